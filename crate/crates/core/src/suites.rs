//! Named check suites shared by the command line runner and the tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{solve_radial, HarmonicProfile, LevelSample, DEFAULT_EPS_QUAD};
use crate::monotone::{
    boundary_check, default_t_grid, gauge_closed, gauge_ode_reconstruct, gauge_profile,
    limit_l_over_t, near_one_limit, verify_lower_bounds, verify_q_monotone, verify_s_monotone,
    ExtrapolationSpec, LimitValue, MonotoneCurve,
};
use crate::radial::RadialConformalMetric;
use crate::report::{CheckResult, CheckStatus, SuiteReport};
use crate::schwarzschild::SchwarzschildSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Allowed decrease of a monotone quantity between grid levels.
    pub mono: f64,
    /// Allowed excess over `m/c - 2`.
    pub bound: f64,
    /// Allowed deficit in the `m/c < 2` lower bounds on `L(t)`.
    pub lower: f64,
    /// Allowed negative slack of the `t -> 0` limit.
    pub limit_slack: f64,
    /// Closed-form comparisons of `L(t)`.
    pub oracle: f64,
    pub capacity: f64,
    pub near_one: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mono: 1e-7,
            bound: 1e-7,
            lower: 1e-9,
            limit_slack: 1e-5,
            oracle: 1e-8,
            capacity: 1e-9,
            near_one: 1e-3,
        }
    }
}

/// Checks plus the data behind them.
#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub report: SuiteReport,
    pub curve: Option<MonotoneCurve>,
    pub levels: Vec<LevelSample>,
}

fn worst_at(pairs: impl Iterator<Item = (f64, f64)>) -> (f64, Option<f64>) {
    pairs.fold((f64::NEG_INFINITY, None), |acc, (d, t)| {
        let d = if d.is_nan() { f64::INFINITY } else { d };
        if d > acc.0 {
            (d, Some(t))
        } else {
            acc
        }
    })
}

fn levels(profile: &HarmonicProfile, t_grid: &[f64]) -> Result<Vec<LevelSample>> {
    let ts: Vec<f64> = t_grid
        .iter()
        .copied()
        .filter(|&t| t > 0.0 || !profile.is_punctured())
        .collect();
    ts.iter().map(|&t| profile.l_of_t(t)).collect()
}

/// Monotonicity, upper bound and the lower bounds that apply to the
/// profile's domain.
pub fn level_suite(
    name: &str,
    profile: &HarmonicProfile,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<SuiteRun> {
    let mut report = SuiteReport::new(name);
    let curve = if profile.is_punctured() {
        verify_q_monotone(profile, t_grid, tol.mono)
    } else {
        verify_s_monotone(profile, t_grid, tol.mono)
    };
    let curve = match curve {
        Ok(c) => c,
        Err(Error::InvalidMetric(msg)) => {
            report.push(CheckResult::new("admissible", CheckStatus::Fail, 0.0).with_detail(msg));
            return Ok(SuiteRun {
                report,
                curve: None,
                levels: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let label = if profile.is_punctured() { "q" } else { "s" };
    let (d, at) = curve.worst_decrease();
    report.push(CheckResult::from_defect(
        format!("{label}_monotone"),
        d,
        at,
        tol.mono,
    ));
    let (d, at) = curve.worst_excess();
    report.push(CheckResult::from_defect(
        format!("{label}_bound"),
        d,
        at,
        tol.bound,
    ));

    if profile.is_punctured() {
        let lim = limit_l_over_t(profile, ExtrapolationSpec::default())?;
        let detail = match lim.lambda {
            LimitValue::Finite(v) => format!("lambda = {v:.12e} +/- {:.1e}", lim.error),
            LimitValue::Infinity => "lambda = inf".to_string(),
        };
        report.push(
            CheckResult::from_defect("limit_slack", -lim.slack, Some(0.0), tol.limit_slack)
                .with_detail(detail),
        );
    } else {
        let r = verify_lower_bounds(profile, t_grid, tol.lower)?;
        let check = match r.status {
            CheckStatus::Skipped => {
                CheckResult::new("lower_bounds", CheckStatus::Skipped, tol.lower)
            }
            _ => {
                let (d, at) = worst_at(
                    [
                        (-r.l_margin.0, r.l_margin.1),
                        (-r.sharp_margin.0, r.sharp_margin.1),
                    ]
                    .into_iter(),
                );
                CheckResult::from_defect("lower_bounds", d, at, tol.lower)
            }
        };
        report.push(check.with_detail(format!("m/c = {:.12}", r.ratio)));
        let b = boundary_check(profile, tol.bound)?;
        let mut c =
            CheckResult::from_defect("boundary_inequality", b.lhs - b.rhs, Some(0.0), tol.bound);
        if !b.pass {
            c.status = CheckStatus::Fail;
        }
        report.push(c.with_detail(format!(
            "1 - sqrt(L(0)) = {:.12e}, m/2c = {:.12e}",
            b.lhs, b.rhs
        )));
    }
    Ok(SuiteRun {
        report,
        levels: levels(profile, t_grid)?,
        curve: Some(curve),
    })
}

/// Closed-form comparisons on a Schwarzschild exterior or, with `r0 = 0`,
/// the two-ended manifold, followed by the level suite.
pub fn schwarzschild_suite(spec: SchwarzschildSpec, tol: &Tolerances) -> Result<SuiteRun> {
    let name = if spec.is_two_ended() {
        format!("schwarzschild_m{}_two_ended", spec.m)
    } else {
        format!("schwarzschild_m{}_r{}", spec.m, spec.r0)
    };
    let profile = solve_radial(&spec.metric()?, DEFAULT_EPS_QUAD)?;
    let grid = default_t_grid();
    let mut run = level_suite(&name, &profile, &grid, tol)?;
    let report = &mut run.report;

    let c = profile.capacity();
    report.push(
        CheckResult::from_defect(
            "capacity",
            (c - spec.capacity_closed()).abs(),
            None,
            tol.capacity,
        )
        .with_detail(format!("c = {c:.15e}")),
    );
    let (d, at) = worst_at(
        run.levels
            .iter()
            .map(|s| ((s.l - spec.l_closed(s.t).unwrap_or(f64::NAN)).abs(), s.t)),
    );
    report.push(CheckResult::from_defect("l_closed_form", d, at, tol.oracle));

    if let Some(curve) = &run.curve {
        let target = spec.ratio_closed();
        let (d, at) = worst_at(
            curve
                .monitored()
                .iter()
                .zip(&curve.t_grid[curve.t_grid.len() - curve.monitored().len()..])
                .map(|(&v, &t)| ((v - target).abs(), t)),
        );
        let label = if spec.is_two_ended() {
            "q_vanishes"
        } else {
            "s_constant"
        };
        report.push(CheckResult::from_defect(label, d, at, tol.mono));
    }

    if spec.is_two_ended() {
        let mass = profile.metric().adm_mass()?.mass;
        report.push(CheckResult::from_defect(
            "mass_twice_capacity",
            (mass - 2.0 * c).abs(),
            None,
            tol.capacity,
        ));
        let lim = limit_l_over_t(&profile, ExtrapolationSpec::default())?;
        let d = match lim.lambda {
            LimitValue::Finite(v) => v.abs().max(lim.slack.abs()),
            LimitValue::Infinity => f64::INFINITY,
        };
        report.push(CheckResult::from_defect("limit_zero", d, Some(0.0), 1e-6));
        let span: Vec<f64> = (1..=19).map(|i| 0.05 * i as f64).collect();
        let a = gauge_ode_reconstruct(spec.m, &span)?;
        let (d, at) = worst_at(
            span.iter()
                .zip(&a)
                .map(|(&t, &v)| ((v / gauge_closed(spec.m, t) - 1.0).abs(), t)),
        );
        report.push(CheckResult::from_defect("gauge_ode", d, at, 1e-6));
        let g = gauge_profile(&profile, &span)?;
        let (d, at) = worst_at(
            span.iter()
                .zip(&g.grad_norm)
                .map(|(&t, &v)| ((v - spec.grad_norm_closed(t).unwrap_or(f64::NAN)).abs(), t)),
        );
        report.push(CheckResult::from_defect("gauge_gradient", d, at, 1e-8));
    } else {
        let e = near_one_limit(&profile)?;
        report.push(
            CheckResult::from_defect(
                "near_one_limit",
                (e.estimate - e.target).abs(),
                Some(1.0),
                tol.near_one,
            )
            .with_detail(format!(
                "estimate = {:.12e}, m/c = {:.12e}",
                e.estimate, e.target
            )),
        );
    }
    Ok(run)
}

/// Level suite on an arbitrary radial metric.
pub fn metric_suite(
    name: &str,
    metric: &RadialConformalMetric,
    t_grid: &[f64],
    tol: &Tolerances,
) -> Result<SuiteRun> {
    let profile = solve_radial(metric, DEFAULT_EPS_QUAD)?;
    level_suite(name, &profile, t_grid, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwarzschild_suites_pass() {
        let tol = Tolerances::default();
        for spec in [
            SchwarzschildSpec::new(0.5, 1.0).unwrap(),
            SchwarzschildSpec::new(2.0, 1.0).unwrap(),
            SchwarzschildSpec::new(-0.5, 1.0).unwrap(),
            SchwarzschildSpec::two_ended(2.0).unwrap(),
        ] {
            let run = schwarzschild_suite(spec, &tol).unwrap();
            assert!(run.report.passed(), "{:#?}", run.report);
            assert!(run.report.checks.len() >= 7);
        }
    }

    #[test]
    fn inadmissible_metric_is_refused() {
        use crate::radial::{DomainKind, Profile, TabulatedProfile};
        let radii: Vec<f64> = (0..41).map(|i| 1.0 + 0.1 * i as f64).collect();
        let values = radii.iter().map(|r| 1.0 + 0.1 * r).collect();
        let tab = TabulatedProfile {
            radii,
            values,
            left_slopes: None,
            right_slopes: None,
        };
        let m = RadialConformalMetric::new(
            DomainKind::ExteriorOfSphere { inner_radius: 1.0 },
            Profile::Tabulated(tab),
        )
        .unwrap();
        let run = metric_suite("convex", &m, &default_t_grid(), &Tolerances::default()).unwrap();
        assert!(!run.report.passed());
        assert_eq!(run.report.checks[0].name, "admissible");
    }
}
