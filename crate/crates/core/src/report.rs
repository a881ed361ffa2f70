//! Machine-readable results and CSV output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harmonic::LevelSample;
use crate::monotone::MonotoneCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIPPED",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// Largest signed excess over the allowed region; positive means the
    /// check failed by that much before tolerance.
    pub worst_defect: Option<f64>,
    pub location_t: Option<f64>,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, status: CheckStatus, tolerance: f64) -> Self {
        CheckResult {
            name: name.into(),
            status,
            worst_defect: None,
            location_t: None,
            tolerance,
            detail: String::new(),
        }
    }

    /// Pass iff `defect <= tolerance`.
    pub fn from_defect(
        name: impl Into<String>,
        defect: f64,
        at: Option<f64>,
        tolerance: f64,
    ) -> Self {
        CheckResult {
            name: name.into(),
            status: CheckStatus::from_bool(defect <= tolerance),
            worst_defect: Some(defect),
            location_t: at,
            tolerance,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>) -> Self {
        SuiteReport {
            suite: suite.into(),
            seed: None,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string_pretty(self).map_err(|e| crate::Error::Config(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| crate::Error::Config(e.to_string()))
    }
}

pub fn write_level_csv<W: Write>(mut out: W, samples: &[LevelSample]) -> Result<()> {
    writeln!(out, "t,r_t,L_t,area_t,flux_t")?;
    for s in samples {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            s.t, s.r_t, s.l, s.area, s.flux
        )?;
    }
    Ok(())
}

pub fn write_curve_csv<W: Write>(mut out: W, curve: &MonotoneCurve) -> Result<()> {
    writeln!(out, "t,L_t,S_t,branch,Q_t,bound")?;
    for i in 0..curve.t_grid.len() {
        let s = curve
            .s_values
            .get(i)
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_default();
        let b = curve
            .branches
            .get(i)
            .map(|b| format!("{b:?}"))
            .unwrap_or_default();
        let q = curve
            .q_values
            .get(i)
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{:.16e},{:.16e},{s},{b},{q},{:.16e}",
            curve.t_grid[i], curve.l_values[i], curve.bound
        )?;
    }
    Ok(())
}
