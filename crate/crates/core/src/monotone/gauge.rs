//! Level-set gauge: the metric written as `dt^2/|grad u|^2 + a(t) sigma`
//! along the flow of `grad u / |grad u|^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::HarmonicProfile;
use crate::numerics::ode::{dopri5, StepControl};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeProfile {
    pub t_grid: Vec<f64>,
    /// `|grad u|_g` on each level.
    pub grad_norm: Vec<f64>,
    /// `a(t)` with `g_t = a(t)` times the unit round metric.
    pub sphere_coefficient: Vec<f64>,
    /// `h(t)` with `II_t = h(t) g_t`, from `a'(t) = (2/|grad u|) h a`.
    pub second_fundamental_form: Vec<f64>,
}

pub fn gauge_profile(profile: &HarmonicProfile, t_grid: &[f64]) -> Result<GaugeProfile> {
    let metric = profile.metric();
    let mut out = GaugeProfile {
        t_grid: t_grid.to_vec(),
        grad_norm: Vec::with_capacity(t_grid.len()),
        sphere_coefficient: Vec::with_capacity(t_grid.len()),
        second_fundamental_form: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let r = profile.level_radius(t)?;
        let w = metric.r_phi(r);
        let phi = w / r;
        let du = profile.du_dr(r);
        let grad = du / (phi * phi);
        let a = w.powi(4) / (r * r);
        // a = w^4 / r^2 with w = r phi, so a'/a = 4 w'/w - 2/r in r
        let dw = phi + r * metric.dphi_dr(r);
        let dlog_a_dr = 4.0 * dw / w - 2.0 / r;
        let da_dt = a * dlog_a_dr / du;
        out.grad_norm.push(grad);
        out.sphere_coefficient.push(a);
        out.second_fundamental_form.push(grad * da_dt / (2.0 * a));
    }
    Ok(out)
}

/// `m^2 / (4 t^2 (1-t)^2)`.
pub fn gauge_closed(m: f64, t: f64) -> f64 {
    let p = t * (1.0 - t);
    0.25 * m * m / (p * p)
}

/// Integrate `a' = (d/dt) ln[t^-2 (1-t)^-2] a` from `a(1/2) = 4 m^2` to
/// each level in `t_span`.
pub fn gauge_ode_reconstruct(m: f64, t_span: &[f64]) -> Result<Vec<f64>> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    let rhs = |t: f64, a: f64| (4.0 * t - 2.0) / (t * (1.0 - t)) * a;
    let ctl = StepControl {
        rtol: 1e-12,
        atol: 1e-300,
        ..StepControl::default()
    };
    let a_half = 4.0 * m * m;
    let mut below: Vec<(usize, f64)> = Vec::new();
    let mut above: Vec<(usize, f64)> = Vec::new();
    for (i, &t) in t_span.iter().enumerate() {
        if t < 0.5 {
            below.push((i, t));
        } else {
            above.push((i, t));
        }
    }
    below.sort_by(|a, b| b.1.total_cmp(&a.1));
    above.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out = vec![f64::NAN; t_span.len()];
    for part in [below, above] {
        let ts: Vec<f64> = part.iter().map(|p| p.1).collect();
        let ys = dopri5(&rhs, 0.5, a_half, &ts, ctl).map_err(|e| Error::StepFailure {
            t: e.t,
            step: e.step,
        })?;
        for ((i, _), y) in part.into_iter().zip(ys) {
            out[i] = y;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::solve_radial;
    use crate::radial::RadialConformalMetric;

    #[test]
    fn two_ended_gauge_matches_closed_forms() {
        let m = 3.0;
        let p = solve_radial(
            &RadialConformalMetric::schwarzschild_two_ended(m).unwrap(),
            1e-12,
        )
        .unwrap();
        let ts = [0.05, 0.3, 0.5, 0.8, 0.95];
        let g = gauge_profile(&p, &ts).unwrap();
        for (i, &t) in ts.iter().enumerate() {
            let grad = 2.0 / m * t * t * (1.0 - t) * (1.0 - t);
            assert!((g.grad_norm[i] - grad).abs() < 1e-12);
            let a = gauge_closed(m, t);
            assert!((g.sphere_coefficient[i] - a).abs() < 1e-10 * a);
            let h = 2.0 * t * (1.0 - t) * (2.0 * t - 1.0) / m;
            assert!((g.second_fundamental_form[i] - h).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn flat_sphere_coefficient() {
        let p = solve_radial(&RadialConformalMetric::flat(1.0).unwrap(), 1e-12).unwrap();
        let g = gauge_profile(&p, &[0.0, 0.5, 0.75]).unwrap();
        for (i, t) in [0.0f64, 0.5, 0.75].iter().enumerate() {
            assert!((g.sphere_coefficient[i] - 1.0 / (1.0 - t).powi(2)).abs() < 1e-10);
            assert!((g.second_fundamental_form[i] - (1.0 - t)).abs() < 1e-10);
        }
    }

    #[test]
    fn ode_reproduces_closed_form() {
        let ts: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        let a = gauge_ode_reconstruct(2.0, &ts).unwrap();
        for (t, y) in ts.iter().zip(&a) {
            let exact = 1.0 / (t * t * (1.0 - t) * (1.0 - t));
            assert!((y - exact).abs() < 1e-8 * exact);
        }
        assert_eq!(gauge_ode_reconstruct(2.0, &[0.5]).unwrap()[0], 16.0);
        let e = 1e-3;
        let s = gauge_ode_reconstruct(2.0, &[0.5 - e, 0.5 + e]).unwrap();
        assert!((s[0] - s[1]).abs() < 1e-10 * s[0]);
        assert!(gauge_ode_reconstruct(-1.0, &[0.4]).is_err());
        assert!(matches!(
            gauge_ode_reconstruct(1.0, &[1.0]),
            Err(Error::StepFailure { .. })
        ));
    }
}
