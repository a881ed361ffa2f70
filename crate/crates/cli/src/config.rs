//! Serializable run description. Every run writes one next to its outputs,
//! and `monolab --config <that file>` repeats the run.

use std::path::{Path, PathBuf};

use monolab::field3d::{
    default_field_t_grid, CoareaSpec, PhiField, SolveSpec, DEFAULT_TOL_ESTIMATOR,
};
use monolab::radial::{DomainKind, MetricConfig, RandomMetricSpec};
use monolab::suites::Tolerances;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifySchwarzschild,
    Sweep,
    Fuzz,
    Solve3d,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifySchwarzschild => "verify-schwarzschild",
            Command::Sweep => "sweep",
            Command::Fuzz => "fuzz",
            Command::Solve3d => "solve3d",
            Command::Report => "report",
        }
    }
}

/// `start, start + step, ...` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid {
            start: 0.0,
            stop: 0.99,
            count: 100,
        }
    }
}

impl TGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| self.start + i as f64 * step)
            .collect()
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.count == 0 || !(0.0 <= self.start && self.start <= self.stop && self.stop < 1.0) {
            return Err(config_err(format!(
                "t grid needs 0 <= start <= stop < 1 and count >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchwarzschildRun {
    pub masses: Vec<f64>,
    pub r0: f64,
    /// Also run the two-ended manifold for each positive mass.
    pub two_ended: bool,
}

impl Default for SchwarzschildRun {
    fn default() -> Self {
        SchwarzschildRun {
            masses: vec![0.5, 2.0, -0.5],
            r0: 1.0,
            two_ended: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FuzzDomain {
    Exterior,
    Punctured,
}

/// Inclusive seed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl std::str::FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed '{v}': {e}"))
        };
        let range = match s.split_once("..") {
            Some((a, b)) => SeedRange {
                first: parse(a)?,
                last: parse(b.trim_start_matches('='))?,
            },
            None => {
                let v = parse(s)?;
                SeedRange { first: v, last: v }
            }
        };
        if range.last < range.first {
            return Err(format!("empty seed range {s}"));
        }
        Ok(range)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzRun {
    pub seeds: SeedRange,
    pub domain: FuzzDomain,
    pub shell_count: usize,
    pub mass_budget: f64,
    /// Shell radii are drawn from this range; exterior runs shift it by `r0`.
    pub radius_range: (f64, f64),
    pub r0: f64,
    pub smoothing: bool,
}

impl Default for FuzzRun {
    fn default() -> Self {
        FuzzRun {
            seeds: SeedRange { first: 0, last: 99 },
            domain: FuzzDomain::Exterior,
            shell_count: 3,
            mass_budget: 4.0,
            radius_range: (0.2, 5.0),
            r0: 1.0,
            smoothing: true,
        }
    }
}

impl FuzzRun {
    pub fn metric_spec(&self, seed: u64) -> RandomMetricSpec {
        let (lo, hi) = self.radius_range;
        let (domain, range) = match self.domain {
            FuzzDomain::Exterior => (
                DomainKind::ExteriorOfSphere {
                    inner_radius: self.r0,
                },
                (lo + self.r0, hi + self.r0),
            ),
            FuzzDomain::Punctured => (DomainKind::PuncturedSpace, (lo, hi)),
        };
        RandomMetricSpec {
            seed,
            shell_count: self.shell_count,
            mass_budget: self.mass_budget,
            radius_range: range,
            domain,
            smoothing: self.smoothing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldRun {
    pub field: PhiField,
    pub solve: SolveSpec,
    pub coarea: CoareaSpec,
    pub t_grid: Vec<f64>,
    pub tol_estimator: f64,
    /// Allowed relative capacity error when a closed form exists.
    pub tol_capacity: f64,
}

impl Default for FieldRun {
    fn default() -> Self {
        FieldRun {
            field: PhiField::two_shell_example(),
            solve: SolveSpec::default(),
            coarea: CoareaSpec::default(),
            t_grid: default_field_t_grid(),
            tol_estimator: DEFAULT_TOL_ESTIMATOR,
            tol_capacity: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Sweep target; when absent a sweep draws a random metric from `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricConfig>,
    #[serde(default)]
    pub t_grid: TGrid,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub schwarzschild: SchwarzschildRun,
    #[serde(default)]
    pub fuzz: FuzzRun,
    #[serde(default)]
    pub field: FieldRun,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

pub fn default_out() -> PathBuf {
    PathBuf::from("monolab-out")
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            seed: None,
            metric: None,
            t_grid: TGrid::default(),
            tolerances: Tolerances::default(),
            schwarzschild: SchwarzschildRun::default(),
            fuzz: FuzzRun::default(),
            field: FieldRun::default(),
            out: default_out(),
            threads: None,
        }
    }

    /// Reads a run config, or a bare metric description which becomes a sweep.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let toml_like = path.extension().is_some_and(|e| e == "toml");
        let parse_run = |t: &str| -> Result<RunConfig, String> {
            if toml_like {
                toml::from_str(t).map_err(|e| e.to_string())
            } else {
                serde_json::from_str(t).map_err(|e| e.to_string())
            }
        };
        let parse_metric = |t: &str| -> Result<MetricConfig, String> {
            if toml_like {
                toml::from_str(t).map_err(|e| e.to_string())
            } else {
                serde_json::from_str(t).map_err(|e| e.to_string())
            }
        };
        match parse_run(&text) {
            Ok(c) => Ok(c),
            Err(run_err) => match parse_metric(&text) {
                Ok(metric) => Ok(RunConfig {
                    metric: Some(metric),
                    ..RunConfig::new(Command::Sweep)
                }),
                Err(_) => Err(config_err(format!("{}: {run_err}", path.display()))),
            },
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.t_grid.validate()?;
        let t = &self.tolerances;
        for (name, v) in [
            ("mono", t.mono),
            ("bound", t.bound),
            ("lower", t.lower),
            ("limit_slack", t.limit_slack),
            ("oracle", t.oracle),
            ("capacity", t.capacity),
            ("near_one", t.near_one),
            ("field.tol_estimator", self.field.tol_estimator),
            ("field.tol_capacity", self.field.tol_capacity),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(config_err(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        match self.command {
            Command::Sweep if self.metric.is_none() && self.seed.is_none() => Err(config_err(
                "sweep needs a metric (--config, --flat, --schwarzschild) or --seed",
            )),
            Command::Fuzz if self.fuzz.shell_count == 0 || !(self.fuzz.mass_budget > 0.0) => Err(
                config_err("fuzz needs shell_count >= 1 and a positive mass budget"),
            ),
            Command::Solve3d if self.field.t_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) => {
                Err(config_err("field levels must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}
