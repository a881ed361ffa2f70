//! Monotonicity and bound checks on sampled levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quantities::{q_of, s_of, Branch};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicProfile;
use crate::radial::{scalar_curvature_check, GridSpec};
use crate::report::{CheckResult, CheckStatus};

pub const DEFAULT_TOL_MONO: f64 = 1e-7;

/// `0, 0.01, ..., 0.99`.
pub fn default_t_grid() -> Vec<f64> {
    (0..100).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// Value at `t2` is below the value at `t1`.
    Decrease,
    /// Value at `t1 = t2` exceeds `m/c - 2`.
    BoundExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub t1: f64,
    pub t2: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCurve {
    pub t_grid: Vec<f64>,
    pub l_values: Vec<f64>,
    /// Empty for punctured profiles.
    pub s_values: Vec<f64>,
    pub branches: Vec<Branch>,
    pub q_values: Vec<f64>,
    /// `m/c - 2`.
    pub bound: f64,
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl MonotoneCurve {
    /// The sequence whose monotonicity was tested.
    pub fn monitored(&self) -> &[f64] {
        if self.s_values.is_empty() {
            &self.q_values
        } else {
            &self.s_values
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest `v(t1) - v(t2)` over adjacent pairs, with the right node.
    pub fn worst_decrease(&self) -> (f64, Option<f64>) {
        let v = self.monitored();
        let ts = self.monitored_grid();
        let mut worst = (f64::NEG_INFINITY, None);
        for i in 1..v.len() {
            let d = v[i - 1] - v[i];
            if d > worst.0 {
                worst = (d, Some(ts[i]));
            }
        }
        worst
    }

    /// Largest `v(t) - bound`.
    pub fn worst_excess(&self) -> (f64, Option<f64>) {
        let ts = self.monitored_grid();
        self.monitored()
            .iter()
            .zip(ts)
            .map(|(&v, &t)| (v - self.bound, Some(t)))
            .fold(
                (f64::NEG_INFINITY, None),
                |a, b| if b.0 > a.0 { b } else { a },
            )
    }

    fn monitored_grid(&self) -> &[f64] {
        let n = self.monitored().len();
        &self.t_grid[self.t_grid.len() - n..]
    }

    /// Recompute every stored value from `L` and compare bitwise.
    pub fn is_consistent(&self) -> bool {
        let ts = &self.t_grid;
        let s_ok = self
            .s_values
            .iter()
            .zip(&self.branches)
            .enumerate()
            .all(|(i, (&s, &b))| {
                s_of(self.l_values[i], ts[i])
                    .map(|x| x == (s, b))
                    .unwrap_or(false)
            });
        let off = ts.len() - self.q_values.len();
        let q_ok = self.q_values.iter().enumerate().all(|(i, &q)| {
            q_of(self.l_values[i + off], ts[i + off])
                .map(|x| x == q)
                .unwrap_or(false)
        });
        s_ok && q_ok
    }

    pub fn monotone_check(&self, name: &str) -> CheckResult {
        let (d, at) = self.worst_decrease();
        CheckResult::from_defect(name, d, at, self.tolerance)
    }

    pub fn bound_check(&self, name: &str) -> CheckResult {
        let (d, at) = self.worst_excess();
        CheckResult::from_defect(name, d, at, self.tolerance)
    }
}

fn scan(ts: &[f64], v: &[f64], bound: f64, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for i in 0..v.len() {
        if i > 0 && v[i] - v[i - 1] < -tol {
            out.push(Violation {
                kind: ViolationKind::Decrease,
                t1: ts[i - 1],
                t2: ts[i],
                defect: v[i] - v[i - 1],
            });
        }
        if v[i] - bound > tol {
            out.push(Violation {
                kind: ViolationKind::BoundExceeded,
                t1: ts[i],
                t2: ts[i],
                defect: v[i] - bound,
            });
        }
    }
    out
}

/// `m c^-1 - 2` for the profile.
pub fn mass_capacity_bound(profile: &HarmonicProfile) -> Result<f64> {
    Ok(profile.metric().adm_mass()?.mass / profile.capacity() - 2.0)
}

fn require_admissible(profile: &HarmonicProfile) -> Result<()> {
    let report = scalar_curvature_check(profile.metric(), GridSpec::default());
    if report.pass {
        Ok(())
    } else {
        Err(Error::InvalidMetric(format!(
            "scalar curvature check failed near r = {} (second difference {:e})",
            report.location, report.max_second_difference
        )))
    }
}

fn levels(profile: &HarmonicProfile, ts: &[f64]) -> Result<Vec<f64>> {
    ts.par_iter()
        .map(|&t| profile.l_of_t(t).map(|s| s.l))
        .collect()
}

/// `S(t)` on `t_grid`: nondecreasing and at most `m/c - 2`.
pub fn verify_s_monotone(
    profile: &HarmonicProfile,
    t_grid: &[f64],
    tol: f64,
) -> Result<MonotoneCurve> {
    if profile.is_punctured() {
        return Err(Error::Domain("S(t) is defined on exterior domains".into()));
    }
    require_admissible(profile)?;
    let bound = mass_capacity_bound(profile)?;
    let l_values = levels(profile, t_grid)?;
    s_curve(t_grid, l_values, bound, tol)
}

/// `S(t)` checks from sampled `L(t)` with a given `m/c - 2`.
pub fn s_curve(t_grid: &[f64], l_values: Vec<f64>, bound: f64, tol: f64) -> Result<MonotoneCurve> {
    let mut s_values = Vec::with_capacity(t_grid.len());
    let mut branches = Vec::with_capacity(t_grid.len());
    for (&l, &t) in l_values.iter().zip(t_grid) {
        let (s, b) = s_of(l, t)?;
        s_values.push(s);
        branches.push(b);
    }
    let violations = scan(t_grid, &s_values, bound, tol);
    Ok(MonotoneCurve {
        t_grid: t_grid.to_vec(),
        l_values,
        s_values,
        branches,
        q_values: Vec::new(),
        bound,
        tolerance: tol,
        violations,
    })
}

/// `Q(t)` on the positive part of `t_grid` for a punctured profile.
pub fn verify_q_monotone(
    profile: &HarmonicProfile,
    t_grid: &[f64],
    tol: f64,
) -> Result<MonotoneCurve> {
    if !profile.is_punctured() {
        return Err(Error::Domain("Q(t) is checked on punctured domains".into()));
    }
    require_admissible(profile)?;
    q_curve(profile, t_grid, tol)
}

/// The `k -> inf` limit of the conformal family: `Q(t)` is nondecreasing
/// and bounded on exterior domains too.
pub fn remark_q_check(
    profile: &HarmonicProfile,
    t_grid: &[f64],
    tol: f64,
) -> Result<MonotoneCurve> {
    q_curve(profile, t_grid, tol)
}

fn q_curve(profile: &HarmonicProfile, t_grid: &[f64], tol: f64) -> Result<MonotoneCurve> {
    let bound = mass_capacity_bound(profile)?;
    let ts: Vec<f64> = t_grid.iter().copied().filter(|&t| t > 0.0).collect();
    let l_values = levels(profile, &ts)?;
    let q_values = l_values
        .iter()
        .zip(&ts)
        .map(|(&l, &t)| q_of(l, t))
        .collect::<Result<Vec<_>>>()?;
    let violations = scan(&ts, &q_values, bound, tol);
    Ok(MonotoneCurve {
        t_grid: ts,
        l_values,
        s_values: Vec::new(),
        branches: Vec::new(),
        q_values,
        bound,
        tolerance: tol,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub status: CheckStatus,
    /// `m/c`.
    pub ratio: f64,
    /// `min_t L(t) - t^2 (1-t)^2` and where.
    pub l_margin: (f64, f64),
    /// `min_t sqrt(L)/(1-t) - 1 + (m/2c)(1-t)` and where.
    pub sharp_margin: (f64, f64),
    pub tolerance: f64,
}

/// Under `m/c < 2`: `L(t) > t^2 (1-t)^2` and the sharper lower bound on
/// `sqrt(L)/(1-t)`. Skipped otherwise.
pub fn verify_lower_bounds(
    profile: &HarmonicProfile,
    t_grid: &[f64],
    tol: f64,
) -> Result<LowerBoundReport> {
    let ratio = mass_capacity_bound(profile)? + 2.0;
    if ratio >= 2.0 || profile.is_punctured() {
        return Ok(LowerBoundReport {
            status: CheckStatus::Skipped,
            ratio,
            l_margin: (f64::NAN, f64::NAN),
            sharp_margin: (f64::NAN, f64::NAN),
            tolerance: tol,
        });
    }
    let ls = levels(profile, t_grid)?;
    Ok(lower_bounds_from_levels(t_grid, &ls, ratio, tol))
}

/// The `m/c < 2` lower bounds on sampled `L(t)`; the caller checks the ratio.
pub fn lower_bounds_from_levels(
    t_grid: &[f64],
    ls: &[f64],
    ratio: f64,
    tol: f64,
) -> LowerBoundReport {
    let mut l_margin = (f64::INFINITY, f64::NAN);
    let mut sharp_margin = (f64::INFINITY, f64::NAN);
    for (&l, &t) in ls.iter().zip(t_grid) {
        let w = 1.0 - t;
        let a = l - t * t * w * w;
        if a < l_margin.0 {
            l_margin = (a, t);
        }
        let b = l.sqrt() / w - 1.0 + 0.5 * ratio * w;
        if b < sharp_margin.0 {
            sharp_margin = (b, t);
        }
    }
    let ok = l_margin.0 > -tol && sharp_margin.0 >= -tol;
    LowerBoundReport {
        status: CheckStatus::from_bool(ok),
        ratio,
        l_margin,
        sharp_margin,
        tolerance: tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCheck {
    pub l0: f64,
    pub s0: f64,
    /// `1 - sqrt(L(0))`.
    pub lhs: f64,
    /// `m/(2c)`.
    pub rhs: f64,
    pub pass: bool,
}

/// `1 - sqrt(L(0)) <= m/(2c)`, plus `S(0) = -2 sqrt(L(0))`.
pub fn boundary_check(profile: &HarmonicProfile, tol: f64) -> Result<BoundaryCheck> {
    let l0 = profile.l_of_t(0.0)?.l;
    let (s0, _) = s_of(l0, 0.0)?;
    let lhs = 1.0 - l0.sqrt();
    let rhs = 0.5 * (mass_capacity_bound(profile)? + 2.0);
    let pass = lhs - rhs <= tol && (s0 + 2.0 * l0.sqrt()).abs() <= tol;
    Ok(BoundaryCheck {
        l0,
        s0,
        lhs,
        rhs,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::solve_radial;
    use crate::radial::{DomainKind, RadialConformalMetric, Shell};

    fn profile(m: &RadialConformalMetric) -> HarmonicProfile {
        solve_radial(m, 1e-12).unwrap()
    }

    #[test]
    fn schwarzschild_s_is_constant() {
        let p = profile(&RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap());
        let c = verify_s_monotone(&p, &default_t_grid(), 1e-7).unwrap();
        assert!(c.passed());
        assert!(c.is_consistent());
        for s in &c.s_values {
            assert!((s + 1.0).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn flat_s_is_minus_two() {
        let p = profile(&RadialConformalMetric::flat(1.0).unwrap());
        let c = verify_s_monotone(&p, &default_t_grid(), 1e-7).unwrap();
        assert!(c.passed());
        assert!(c.s_values.iter().all(|s| (s + 2.0).abs() < 1e-9));
        assert!(c.branches.iter().all(|&b| b == Branch::CapacityBranch));
    }

    #[test]
    fn two_ended_q_vanishes() {
        let p = profile(&RadialConformalMetric::schwarzschild_two_ended(2.0).unwrap());
        let c = verify_q_monotone(&p, &default_t_grid(), 1e-7).unwrap();
        assert!(c.passed());
        assert_eq!(c.q_values.len(), 99);
        assert!(c.q_values.iter().all(|q| q.abs() < 1e-8));
        assert!(verify_s_monotone(&p, &default_t_grid(), 1e-7).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        let s = profile(&RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap());
        let r = verify_lower_bounds(&s, &default_t_grid(), 1e-9).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        assert!(r.sharp_margin.0.abs() < 1e-10);
        let shell = RadialConformalMetric::shells(
            DomainKind::ExteriorOfSphere { inner_radius: 1.0 },
            0.0,
            vec![Shell::new(1.0, 2.0)],
        )
        .unwrap();
        let r = verify_lower_bounds(&profile(&shell), &default_t_grid(), 1e-9).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        assert!((r.ratio - 10.0 / 9.0).abs() < 1e-11);
        let heavy = RadialConformalMetric::shells(
            DomainKind::ExteriorOfSphere { inner_radius: 1.0 },
            0.0,
            vec![Shell::new(100.0, 10.0)],
        )
        .unwrap();
        let r = verify_lower_bounds(&profile(&heavy), &default_t_grid(), 1e-9).unwrap();
        assert_eq!(r.status, CheckStatus::Skipped);
    }

    #[test]
    fn heavy_shell_reaches_the_mass_branch() {
        let heavy = RadialConformalMetric::shells(
            DomainKind::ExteriorOfSphere { inner_radius: 1.0 },
            0.0,
            vec![Shell::new(100.0, 10.0)],
        )
        .unwrap();
        let c = verify_s_monotone(&profile(&heavy), &default_t_grid(), 1e-7).unwrap();
        assert!(c.passed(), "{:?}", c.violations);
        assert!(c.branches.contains(&Branch::MassBranch));
        assert!(c.branches.contains(&Branch::CapacityBranch));
    }

    #[test]
    fn boundary_inequality_is_tight_on_schwarzschild() {
        let p = profile(&RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap());
        let b = boundary_check(&p, 1e-9).unwrap();
        assert!(b.pass);
        assert!((b.lhs - 0.5).abs() < 1e-12 && (b.rhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn violations_are_recorded() {
        let v = scan(&[0.0, 0.5, 1.0], &[0.0, -1.0, 3.0], 2.0, 1e-7);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].kind, ViolationKind::Decrease);
        assert_eq!(v[1].kind, ViolationKind::BoundExceeded);
    }
}
