//! Monotonicity checks on a solved 3D field.

use serde::{Deserialize, Serialize};

use super::{coarea_l, far_field_fit, CoareaSample, CoareaSpec, FarFieldFit, ScalarField3D};
use crate::error::Result;
use crate::monotone::{lower_bounds_from_levels, s_curve, LowerBoundReport, MonotoneCurve};
use crate::report::{CheckResult, CheckStatus};

pub const DEFAULT_TOL_ESTIMATOR: f64 = 1e-3;

/// `0.2, 0.25, ..., 0.8`.
pub fn default_field_t_grid() -> Vec<f64> {
    (0..=12).map(|i| 0.2 + 0.05 * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCheck {
    pub fit: FarFieldFit,
    pub samples: Vec<CoareaSample>,
    /// Levels left out of the curve for near-critical gradients.
    pub non_regular: Vec<f64>,
    pub curve: MonotoneCurve,
    /// Skipped when `m/c >= 2`.
    pub lower_bounds: LowerBoundReport,
}

impl FieldCheck {
    pub fn results(&self, prefix: &str) -> Vec<CheckResult> {
        let mut out = vec![
            self.curve.monotone_check(&format!("{prefix}.s_monotone")),
            self.curve.bound_check(&format!("{prefix}.s_bound")),
        ];
        let r = &self.lower_bounds;
        let (worst, at) = if r.l_margin.0 < r.sharp_margin.0 {
            r.l_margin
        } else {
            r.sharp_margin
        };
        let lower = match r.status {
            CheckStatus::Skipped => CheckResult::new(
                format!("{prefix}.l_lower_bound"),
                CheckStatus::Skipped,
                r.tolerance,
            ),
            _ => CheckResult::from_defect(
                format!("{prefix}.l_lower_bound"),
                -worst,
                Some(at),
                r.tolerance,
            ),
        };
        out.push(lower.with_detail(format!("m/c = {:.6}", r.ratio)));
        if !self.non_regular.is_empty() {
            out.push(
                CheckResult::new(
                    format!("{prefix}.non_regular_levels"),
                    CheckStatus::Skipped,
                    0.0,
                )
                .with_detail(format!("{:?}", self.non_regular)),
            );
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.curve.passed() && self.lower_bounds.status != CheckStatus::Fail
    }
}

/// Fit, coarea levels and the `S(t)` and `L(t)` checks, with `m/c` taken
/// from the far-field fit.
pub fn check_field(
    f: &ScalarField3D,
    t_grid: &[f64],
    spec: CoareaSpec,
    tol: f64,
) -> Result<FieldCheck> {
    let fit = far_field_fit(f)?;
    let samples = coarea_l(f, t_grid, spec);
    let (regular, irregular): (Vec<&CoareaSample>, Vec<&CoareaSample>) =
        samples.iter().partition(|s| s.regular);
    let ts: Vec<f64> = regular.iter().map(|s| s.t).collect();
    let ls: Vec<f64> = regular.iter().map(|s| s.l).collect();
    let ratio = fit.ratio();
    let curve = s_curve(&ts, ls.clone(), ratio - 2.0, tol)?;
    let lower_bounds = if ratio < 2.0 {
        lower_bounds_from_levels(&ts, &ls, ratio, tol)
    } else {
        LowerBoundReport {
            status: CheckStatus::Skipped,
            ratio,
            l_margin: (f64::NAN, f64::NAN),
            sharp_margin: (f64::NAN, f64::NAN),
            tolerance: tol,
        }
    };
    Ok(FieldCheck {
        fit,
        non_regular: irregular.iter().map(|s| s.t).collect(),
        samples,
        curve,
        lower_bounds,
    })
}
