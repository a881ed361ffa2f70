//! Conformal changes by harmonic functions and the identities they satisfy.
//!
//! For a positive harmonic `v` with `v -> 1` at infinity, `gbar = v^4 g`
//! has `phibar = v phi`, and `f` is `gbar`-harmonic iff `f v` is
//! `g`-harmonic. Both families below take `v = 1 - beta (1 - u)`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quantities::{b_k_of, q_of};
use crate::error::{Error, Result};
use crate::harmonic::{HarmonicProfile, DEFAULT_EPS_QUAD};
use crate::radial::{DomainKind, Profile, RadialConformalMetric, TabulatedProfile};
use crate::report::CheckResult;

/// Knot ratio of the tabulated `phibar`.
const KNOT_RATIO: f64 = 1.002;

/// `(1/(1-s)) [4pi - 4pi L(s)/(1-s)^2]` for a level of `(gbar, ubar)`.
pub fn b_bar_of(l: f64, s: f64) -> f64 {
    let w = 1.0 - s;
    (4.0 * PI - 4.0 * PI * l / (w * w)) / w
}

struct Transformed {
    metric: RadialConformalMetric,
    profile: HarmonicProfile,
    mass: f64,
    mass_error: f64,
}

/// Tabulate `phibar = (1 - beta (1-u)) phi` on `r >= r_start` with exact
/// one-sided slopes and solve its harmonic function.
fn transform(base: &HarmonicProfile, r_start: f64, beta: f64) -> Result<Transformed> {
    let metric = base.metric();
    let scale = metric.scale().max(r_start);
    let r_end = (1e4 * scale).max(20.0 * metric.tail_start());
    let mut radii = vec![r_start];
    let mut r = r_start * KNOT_RATIO;
    while r < r_end {
        radii.push(r);
        r *= KNOT_RATIO;
    }
    radii.push(r_end);
    let kinks: Vec<f64> = metric
        .breakpoints()
        .into_iter()
        .filter(|&b| b > r_start && b < r_end)
        .collect();
    radii.extend(kinks);
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);

    let n = radii.len();
    let mut values = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for &r in &radii {
        let (_, w) = base.values(r)?;
        let v = 1.0 - beta * w;
        let dv = beta * base.du_dr(r);
        let phi = metric.phi(r);
        values.push(v * phi);
        left.push(dv * phi + v * metric.dphi_dr_left(r));
        right.push(dv * phi + v * metric.dphi_dr(r));
    }
    let tab = TabulatedProfile {
        radii,
        values,
        left_slopes: Some(left),
        right_slopes: Some(right),
    };
    let metric_bar = RadialConformalMetric::new(
        DomainKind::ExteriorOfSphere {
            inner_radius: r_start,
        },
        Profile::Tabulated(tab),
    )?;
    let mass = metric_bar.adm_mass()?;
    let profile = HarmonicProfile::solve(Arc::new(metric_bar.clone()), DEFAULT_EPS_QUAD)?;
    Ok(Transformed {
        metric: metric_bar,
        profile,
        mass: mass.mass,
        mass_error: mass.error,
    })
}

/// Worst discrepancies between independently computed sides of the
/// conformal identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityDefects {
    /// `|Bbar(s(t)) - B(t)|` and the level where it is largest.
    pub level_identity: (f64, f64),
    /// `|ubar - closed form in u|` at the probe radii.
    pub ubar: f64,
    /// `| |grad ubar|_g - closed form in |grad u| |`.
    pub gradient: f64,
    pub mass: f64,
    pub capacity: f64,
}

impl IdentityDefects {
    pub fn checks(&self, prefix: &str, tol: f64) -> Vec<CheckResult> {
        vec![
            CheckResult::from_defect(
                format!("{prefix}: level identity"),
                self.level_identity.0,
                Some(self.level_identity.1),
                tol,
            ),
            CheckResult::from_defect(format!("{prefix}: ubar"), self.ubar, None, tol),
            CheckResult::from_defect(
                format!("{prefix}: gradient of ubar"),
                self.gradient,
                None,
                tol,
            ),
            CheckResult::from_defect(format!("{prefix}: transformed mass"), self.mass, None, tol),
            CheckResult::from_defect(
                format!("{prefix}: transformed capacity"),
                self.capacity,
                None,
                tol,
            ),
        ]
    }

    pub fn worst(&self) -> f64 {
        [
            self.level_identity.0,
            self.ubar,
            self.gradient,
            self.mass,
            self.capacity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `gbar = v^4 g` with `v = u + (1-u)/k`.
#[derive(Debug, Clone)]
pub struct ConformalGauge {
    pub k: f64,
    pub base: HarmonicProfile,
    pub metric_bar: RadialConformalMetric,
    pub profile_bar: HarmonicProfile,
    /// From the tail of `phibar`.
    pub m_bar: f64,
    pub m_bar_error: f64,
    /// `m - 2 (1 - 1/k) c`.
    pub m_bar_closed: f64,
    /// From the re-solved `ubar`.
    pub c_bar: f64,
    /// `c / k`.
    pub c_bar_closed: f64,
}

pub fn conformal_transform(base: &HarmonicProfile, k: f64) -> Result<ConformalGauge> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("k = {k} must be positive")));
    }
    if base.is_punctured() {
        return Err(Error::Domain(
            "the k-family is built on exterior domains".into(),
        ));
    }
    let beta = 1.0 - 1.0 / k;
    let tr = transform(base, base.metric().inner_radius(), beta)?;
    let m = base.metric().adm_mass()?.mass;
    let c = base.capacity();
    Ok(ConformalGauge {
        k,
        base: base.clone(),
        metric_bar: tr.metric,
        c_bar: tr.profile.capacity(),
        profile_bar: tr.profile,
        m_bar: tr.mass,
        m_bar_error: tr.mass_error,
        m_bar_closed: m - 2.0 * beta * c,
        c_bar_closed: c / k,
    })
}

impl ConformalGauge {
    fn beta(&self) -> f64 {
        1.0 - 1.0 / self.k
    }

    /// Level of `ubar` matching `{u = t}`.
    pub fn level_map(&self, t: f64) -> f64 {
        t / (t + (1.0 - t) / self.k)
    }

    pub fn b_bar(&self, s: f64) -> Result<f64> {
        Ok(b_bar_of(self.profile_bar.l_of_t(s)?.l, s))
    }

    pub fn identity_defects(&self, t_grid: &[f64]) -> Result<IdentityDefects> {
        let mut level = (0.0f64, f64::NAN);
        for &t in t_grid {
            let direct = self.b_bar(self.level_map(t))?;
            let formula = b_k_of(self.base.l_of_t(t)?.l, t, self.k)?.value;
            let d = (direct - formula).abs();
            if !(d <= level.0) {
                level = (d, t);
            }
        }
        let metric = self.base.metric();
        let (mut ubar, mut grad) = (0.0f64, 0.0f64);
        for t in [0.1, 0.5, 0.9] {
            let r = self.base.level_radius(t)?;
            let (u, w) = self.base.values(r)?;
            let v = 1.0 - self.beta() * w;
            ubar = ubar.max((self.profile_bar.u(r)? - u / v).abs());
            let phi2 = metric.phi(r).powi(2);
            let direct = self.profile_bar.du_dr(r) / phi2;
            let closed = self.k * self.base.du_dr(r) / phi2 / (self.k * u + w).powi(2);
            grad = grad.max((direct - closed).abs());
        }
        Ok(IdentityDefects {
            level_identity: level,
            ubar,
            gradient: grad,
            mass: (self.m_bar - self.m_bar_closed).abs(),
            capacity: (self.c_bar - self.c_bar_closed).abs(),
        })
    }
}

/// `gbar = u^4 g` on `{u >= T}` with `ubar_T = (1 - T/u)/(1 - T)`.
#[derive(Debug, Clone)]
pub struct ShiftGauge {
    pub level: f64,
    pub base: HarmonicProfile,
    pub r_level: f64,
    pub metric_bar: RadialConformalMetric,
    pub profile_bar: HarmonicProfile,
    pub m_bar: f64,
    /// `m - 2c`.
    pub m_bar_closed: f64,
    pub c_bar: f64,
    /// `T c / (1 - T)`.
    pub c_bar_closed: f64,
}

pub fn shift_transform(base: &HarmonicProfile, level: f64) -> Result<ShiftGauge> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "shift level {level} must lie in (0, 1)"
        )));
    }
    let r_level = base.level_radius(level)?;
    let tr = transform(base, r_level, 1.0)?;
    let m = base.metric().adm_mass()?.mass;
    let c = base.capacity();
    Ok(ShiftGauge {
        level,
        base: base.clone(),
        r_level,
        metric_bar: tr.metric,
        c_bar: tr.profile.capacity(),
        profile_bar: tr.profile,
        m_bar: tr.mass,
        m_bar_closed: m - 2.0 * c,
        c_bar_closed: level * c / (1.0 - level),
    })
}

impl ShiftGauge {
    /// `s(t) = (1 - T/t)/(1 - T)`.
    pub fn level_map(&self, t: f64) -> f64 {
        (1.0 - self.level / t) / (1.0 - self.level)
    }

    pub fn b_bar(&self, s: f64) -> Result<f64> {
        Ok(b_bar_of(self.profile_bar.l_of_t(s)?.l, s))
    }

    /// `((1-T)/T) 4 pi Q(t)`.
    pub fn b_closed(&self, t: f64) -> Result<f64> {
        let tt = self.level;
        Ok((1.0 - tt) / tt * 4.0 * PI * q_of(self.base.l_of_t(t)?.l, t)?)
    }

    /// Levels `t >= T` from `t_grid` are compared; the rest are ignored.
    pub fn identity_defects(&self, t_grid: &[f64]) -> Result<IdentityDefects> {
        let tt = self.level;
        let mut level = (0.0f64, f64::NAN);
        for &t in t_grid.iter().filter(|&&t| t >= tt) {
            let d = (self.b_bar(self.level_map(t))? - self.b_closed(t)?).abs();
            if !(d <= level.0) {
                level = (d, t);
            }
        }
        let metric = self.base.metric();
        let (mut ubar, mut grad) = (0.0f64, 0.0f64);
        for t in [
            tt + 0.1 * (1.0 - tt),
            0.5 * (1.0 + tt),
            tt + 0.9 * (1.0 - tt),
        ] {
            let r = self.base.level_radius(t)?;
            let u = self.base.u(r)?;
            ubar = ubar.max((self.profile_bar.u(r)? - (1.0 - tt / u) / (1.0 - tt)).abs());
            let phi2 = metric.phi(r).powi(2);
            let direct = self.profile_bar.du_dr(r) / phi2;
            let closed = tt / (1.0 - tt) * self.base.du_dr(r) / phi2 / (u * u);
            grad = grad.max((direct - closed).abs());
        }
        Ok(IdentityDefects {
            level_identity: level,
            ubar,
            gradient: grad,
            mass: (self.m_bar - self.m_bar_closed).abs(),
            capacity: (self.c_bar - self.c_bar_closed).abs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::solve_radial;
    use crate::radial::Shell;

    fn grid() -> Vec<f64> {
        (0..10).map(|i| i as f64 / 10.0).collect()
    }

    #[test]
    fn unit_k_reproduces_the_base() {
        let base = solve_radial(
            &RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap(),
            1e-12,
        )
        .unwrap();
        let g = conformal_transform(&base, 1.0).unwrap();
        assert!((g.m_bar - 2.0).abs() < 1e-10);
        assert!((g.c_bar - 2.0).abs() < 1e-10);
        assert!((g.profile_bar.u(3.0).unwrap() - base.u(3.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn schwarzschild_k2_gives_massless_transform() {
        let base = solve_radial(
            &RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap(),
            1e-12,
        )
        .unwrap();
        let g = conformal_transform(&base, 2.0).unwrap();
        assert_eq!(g.m_bar_closed, 0.0);
        assert_eq!(g.c_bar_closed, 1.0);
        let d = g.identity_defects(&grid()).unwrap();
        assert!(d.worst() < 1e-8, "{d:?}");
    }

    #[test]
    fn flat_k2_has_negative_mass() {
        let base = solve_radial(&RadialConformalMetric::flat(1.0).unwrap(), 1e-12).unwrap();
        let g = conformal_transform(&base, 2.0).unwrap();
        assert!((g.m_bar + 1.0).abs() < 1e-8);
        assert!((g.c_bar - 0.5).abs() < 1e-8);
    }

    #[test]
    fn shell_identities_hold_for_several_k() {
        let m = RadialConformalMetric::shells(
            DomainKind::ExteriorOfSphere { inner_radius: 1.0 },
            0.0,
            vec![Shell::new(1.0, 2.0)],
        )
        .unwrap();
        let base = solve_radial(&m, 1e-12).unwrap();
        for k in [0.5, 5.0] {
            let d = conformal_transform(&base, k)
                .unwrap()
                .identity_defects(&grid())
                .unwrap();
            assert!(d.worst() < 1e-8, "k={k} {d:?}");
        }
    }

    #[test]
    fn shift_identity_on_two_ended_schwarzschild() {
        let base = solve_radial(
            &RadialConformalMetric::schwarzschild_two_ended(2.0).unwrap(),
            1e-12,
        )
        .unwrap();
        let g = shift_transform(&base, 0.3).unwrap();
        assert!((g.m_bar_closed).abs() < 1e-11);
        let d = g.identity_defects(&grid()).unwrap();
        assert!(d.worst() < 1e-8, "{d:?}");
    }
}
