//! Endpoint limits of level quantities, estimated by extrapolation on
//! geometric level sequences.

use serde::{Deserialize, Serialize};

use super::verify::mass_capacity_bound;
use crate::error::{Error, Result};
use crate::harmonic::HarmonicProfile;
use crate::numerics::extrapolate::best_window;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationSpec {
    /// Levels `t = 2^-j` for `j_min <= j <= j_max`.
    pub j_min: i32,
    pub j_max: i32,
    pub window: usize,
    /// Samples of `L(t)/t` beyond this are reported as divergent.
    pub cap: f64,
}

impl Default for ExtrapolationSpec {
    fn default() -> Self {
        ExtrapolationSpec {
            j_min: 4,
            j_max: 30,
            window: 6,
            cap: 1e8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LimitValue {
    Finite(f64),
    Infinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub lambda: LimitValue,
    pub error: f64,
    /// `m/c - 2 + lambda`.
    pub slack: f64,
}

/// `lim_{t -> 0} L(t)/t` on a punctured profile.
pub fn limit_l_over_t(profile: &HarmonicProfile, spec: ExtrapolationSpec) -> Result<LimitEstimate> {
    if !profile.is_punctured() {
        return Err(Error::Domain(
            "the t -> 0 limit is taken on punctured domains".into(),
        ));
    }
    let bound = mass_capacity_bound(profile)?;
    limit_l_over_t_with(|t| profile.l_of_t(t).map(|s| s.l), bound, spec)
}

/// Same estimator for an arbitrary `L(t)`.
pub fn limit_l_over_t_with<F>(l: F, bound: f64, spec: ExtrapolationSpec) -> Result<LimitEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut ts = Vec::new();
    let mut fs = Vec::new();
    for j in spec.j_min..=spec.j_max {
        let t = 2f64.powi(-j);
        ts.push(t);
        fs.push(l(t)? / t);
    }
    let n = fs.len();
    let growing = n >= 4 && (n - 4..n).all(|i| fs[i] > 0.0 && fs[i] >= 1.1 * fs[i - 1]);
    if fs[n - 1].abs() > spec.cap || growing {
        return Ok(LimitEstimate {
            lambda: LimitValue::Infinity,
            error: 0.0,
            slack: f64::INFINITY,
        });
    }
    let e = best_window(&ts, &fs, spec.window);
    Ok(LimitEstimate {
        lambda: LimitValue::Finite(e.value),
        error: e.error,
        slack: bound + e.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearOneLimit {
    pub estimate: f64,
    pub error: f64,
    /// `m/c` from the mass and the solved capacity.
    pub target: f64,
}

/// `lim_{t -> 1} (1/(1-t)) [1 - L(t)/(1-t)^2]`, sampled at `1 - t = 2^-j`.
pub fn near_one_limit(profile: &HarmonicProfile) -> Result<NearOneLimit> {
    let target = mass_capacity_bound(profile)? + 2.0;
    let mut hs = Vec::new();
    let mut fs = Vec::new();
    for j in 4..=22 {
        let t = 1.0 - 2f64.powi(-j);
        let r = profile.level_radius(t)?;
        let (h, l) = profile.tail_pair(r)?;
        hs.push(h);
        fs.push((1.0 - l / (h * h)) / h);
    }
    let e = best_window(&hs, &fs, 6);
    Ok(NearOneLimit {
        estimate: e.value,
        error: e.error,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::solve_radial;
    use crate::radial::RadialConformalMetric;

    #[test]
    fn algebraic_two_ended_input() {
        let e = limit_l_over_t_with(
            |t| Ok(t * t * (1.0 - t) * (1.0 - t)),
            0.0,
            ExtrapolationSpec::default(),
        )
        .unwrap();
        match e.lambda {
            LimitValue::Finite(v) => assert!(v.abs() < 1e-12),
            LimitValue::Infinity => panic!(),
        }
    }

    #[test]
    fn divergent_sequence_is_flagged() {
        let e = limit_l_over_t_with(|t| Ok(t.sqrt()), -1.0, ExtrapolationSpec::default()).unwrap();
        assert_eq!(e.lambda, LimitValue::Infinity);
        assert!(e.slack > 0.0);
    }

    #[test]
    fn near_one_on_schwarzschild_and_flat() {
        let s = solve_radial(
            &RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap(),
            1e-12,
        )
        .unwrap();
        let e = near_one_limit(&s).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-6, "{e:?}");
        let f = solve_radial(&RadialConformalMetric::flat(1.0).unwrap(), 1e-12).unwrap();
        assert!(near_one_limit(&f).unwrap().estimate.abs() < 1e-6);
    }

    #[test]
    fn two_ended_limit_is_zero() {
        let p = solve_radial(
            &RadialConformalMetric::schwarzschild_two_ended(2.0).unwrap(),
            1e-12,
        )
        .unwrap();
        let e = limit_l_over_t(&p, ExtrapolationSpec::default()).unwrap();
        match e.lambda {
            LimitValue::Finite(v) => assert!(v.abs() < 1e-6, "{e:?}"),
            LimitValue::Infinity => panic!(),
        }
        assert!(e.slack.abs() < 1e-6);
    }
}
