//! Normalized harmonic function of a radial conformal metric.
//!
//! For `g = phi^4 g0` the equation `Delta_g u = 0` is
//! `div0(phi^2 grad0 u) = 0`, whose radial first integral is
//! `r^2 phi^2 u' = C`. Hence `u(r) = C * I(r)` with
//! `I(r) = int_{r0}^{r} ds / (s phi(s))^2` and `C = 1 / I(inf)`, which is
//! also the capacity because `phi -> 1` at infinity.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::extrapolate::{neville_to_zero, Extrapolated};
use crate::numerics::quadrature::integrate;
use crate::radial::RadialConformalMetric;

pub const DEFAULT_EPS_QUAD: f64 = 1e-12;

const MAX_PANELS: usize = 2000;

/// One level set `{u = t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSample {
    pub t: f64,
    pub r_t: f64,
    /// `(1/4pi) int |grad u|^2 dsigma` over the level.
    pub l: f64,
    /// True `g`-area of the level sphere.
    pub area: f64,
    /// `(1/4pi) int |grad u| dsigma`; equals the capacity.
    pub flux: f64,
}

#[derive(Debug, Clone)]
pub struct HarmonicProfile {
    metric: Arc<RadialConformalMetric>,
    flux: f64,
    nodes: Vec<f64>,
    /// `I(nodes[j])`, accumulated from the inner end.
    inner: Vec<f64>,
    /// `J(nodes[j]) = int_{nodes[j]}^inf`, accumulated from infinity.
    outer: Vec<f64>,
    total: f64,
    rel_tol: f64,
    eps: f64,
    certified_error: f64,
}

pub fn solve_radial(metric: &RadialConformalMetric, eps_quad: f64) -> Result<HarmonicProfile> {
    HarmonicProfile::solve(Arc::new(metric.clone()), eps_quad)
}

impl HarmonicProfile {
    pub fn solve(metric: Arc<RadialConformalMetric>, eps_quad: f64) -> Result<Self> {
        let scale = metric.scale();
        let punctured = metric.is_punctured();
        if punctured {
            // The integrand 1/(r phi)^2 is integrable at 0 only if r phi
            // stays away from zero there.
            let tiny = 1e-14 * scale;
            let w = metric.r_phi(tiny);
            if !(w > 1e-10 * scale) {
                return Err(Error::NoNormalization(format!(
                    "r phi(r) -> {w:e} as r -> 0, so int_0 ds/(s phi)^2 diverges"
                )));
            }
        }
        let start = metric.inner_radius();
        let r_far = (1e3 * scale).max(2.0 * metric.tail_start());
        let mut nodes = vec![start];
        let mut g = if punctured { 1e-3 * scale } else { start * 1.5 };
        while g < r_far {
            nodes.push(g);
            g *= 1.5;
        }
        nodes.extend(
            metric
                .breakpoints()
                .into_iter()
                .filter(|&b| b > start && b < r_far),
        );
        nodes.push(r_far);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1e-300));

        let rel_tol = (0.25 * eps_quad).max(2e-14);
        let f = |s: f64| {
            let w = metric.r_phi(s);
            1.0 / (w * w)
        };
        let mut pieces = Vec::with_capacity(nodes.len());
        let mut err_sum = 0.0;
        for w in nodes.windows(2) {
            let r = integrate(&f, w[0], w[1], 0.0, rel_tol, MAX_PANELS);
            if !r.value.is_finite() {
                return Err(Error::NoNormalization(format!(
                    "integral over [{}, {}] is not finite",
                    w[0], w[1]
                )));
            }
            if !r.converged {
                return Err(Error::Quadrature(format!(
                    "[{}, {}]: error {:e} after {} panels",
                    w[0], w[1], r.error, r.panels
                )));
            }
            pieces.push(r.value);
            err_sum += r.error;
        }
        let tail = tail_integral(&metric, r_far, rel_tol)?;
        err_sum += tail.1;

        let n = nodes.len();
        let mut inner = vec![0.0; n];
        for j in 1..n {
            inner[j] = inner[j - 1] + pieces[j - 1];
        }
        let mut outer = vec![0.0; n];
        outer[n - 1] = tail.0;
        for j in (0..n - 1).rev() {
            outer[j] = outer[j + 1] + pieces[j];
        }
        let total = outer[0];
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NoNormalization(format!("I(inf) = {total}")));
        }
        let flux = 1.0 / total;
        let rel = err_sum / total;
        let certified_error = (flux * rel).max(2.0 * rel);
        Ok(HarmonicProfile {
            metric,
            flux,
            nodes,
            inner,
            outer,
            total,
            rel_tol,
            eps: eps_quad,
            certified_error,
        })
    }

    pub fn metric(&self) -> &RadialConformalMetric {
        &self.metric
    }

    pub fn metric_arc(&self) -> Arc<RadialConformalMetric> {
        Arc::clone(&self.metric)
    }

    /// The conserved value of `r^2 phi^2 u'`.
    pub fn flux_constant(&self) -> f64 {
        self.flux
    }

    pub fn capacity(&self) -> f64 {
        self.flux
    }

    /// Requested quadrature tolerance.
    pub fn eps_quad(&self) -> f64 {
        self.eps
    }

    /// Error bound from the summed Kronrod estimates, on both `u` and the
    /// capacity.
    pub fn certified_error(&self) -> f64 {
        self.certified_error
    }

    pub fn is_punctured(&self) -> bool {
        self.metric.is_punctured()
    }

    /// `(r_j, u_j)` on the quadrature nodes.
    pub fn u_table(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .zip(&self.inner)
            .map(|(&r, &i)| (r, i * self.flux))
            .collect()
    }

    fn far_radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    fn integrand(&self, s: f64) -> f64 {
        let w = self.metric.r_phi(s);
        1.0 / (w * w)
    }

    fn piece(&self, a: f64, b: f64) -> f64 {
        let f = |s: f64| self.integrand(s);
        integrate(&f, a, b, 0.0, self.rel_tol, MAX_PANELS).value
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        let r_min = self.metric.inner_radius();
        if r.is_nan() || r < r_min || (self.is_punctured() && r <= 0.0) {
            return Err(Error::OutOfDomain { r, r_min });
        }
        Ok(())
    }

    /// `(u(r), 1 - u(r))`, each computed from its own side so neither loses
    /// digits to cancellation.
    pub fn values(&self, r: f64) -> Result<(f64, f64)> {
        self.check_radius(r)?;
        let c = self.flux;
        if r >= self.far_radius() {
            let j = tail_integral(&self.metric, r, self.rel_tol)?.0;
            return Ok((1.0 - c * j, c * j));
        }
        let j = self.nodes.partition_point(|&x| x <= r) - 1;
        let p = self.piece(self.nodes[j], r);
        let q = self.piece(r, self.nodes[j + 1]);
        Ok((c * (self.inner[j] + p), c * (self.outer[j + 1] + q)))
    }

    pub fn u(&self, r: f64) -> Result<f64> {
        self.values(r).map(|v| v.0)
    }

    pub fn one_minus_u(&self, r: f64) -> Result<f64> {
        self.values(r).map(|v| v.1)
    }

    pub fn du_dr(&self, r: f64) -> f64 {
        self.flux * self.integrand(r)
    }

    /// Radius of the level `{u = t}`.
    pub fn level_radius(&self, t: f64) -> Result<f64> {
        let punctured = self.is_punctured();
        let ok = if punctured {
            t > 0.0 && t < 1.0
        } else {
            (0.0..1.0).contains(&t)
        };
        if !ok {
            return Err(Error::OutOfRange { t });
        }
        if t == 0.0 {
            return Ok(self.metric.inner_radius());
        }
        let c = self.flux;
        if t <= 0.5 {
            let target = t / c;
            let j = (self.inner.partition_point(|&x| x <= target) - 1).min(self.nodes.len() - 2);
            let (a, b) = (self.nodes[j], self.nodes[j + 1]);
            let base = self.inner[j];
            let r = solve_increasing(
                a,
                b,
                base - target,
                self.inner[j + 1] - target,
                |x| base + self.piece(a, x) - target,
                |x| self.integrand(x),
            );
            return Ok(r);
        }
        let target = (1.0 - t) / c;
        let n = self.nodes.len();
        if target <= self.outer[n - 1] {
            // Beyond the last node: solve in rho = 1/r where the integrand
            // is bounded.
            let rho_far = 1.0 / self.far_radius();
            let g = |rho: f64| 1.0 / self.metric.phi(1.0 / rho).powi(2);
            let rho = solve_increasing(
                0.0,
                rho_far,
                -target,
                self.outer[n - 1] - target,
                |x| integrate(&g, 0.0, x, 0.0, self.rel_tol, MAX_PANELS).value - target,
                g,
            );
            return Ok(1.0 / rho);
        }
        // outer is decreasing in j
        let j = self.outer.partition_point(|&x| x >= target).clamp(1, n - 1) - 1;
        let (a, b) = (self.nodes[j], self.nodes[j + 1]);
        let top = self.outer[j + 1];
        // residual target - J(r) increases with r
        let r = solve_increasing(
            a,
            b,
            target - self.outer[j],
            target - top,
            |x| target - top - self.piece(x, b),
            |x| self.integrand(x),
        );
        Ok(r)
    }

    /// Level quantities at radius `r`.
    pub fn sample_at_radius(&self, r: f64) -> Result<LevelSample> {
        let (u, _) = self.values(r)?;
        Ok(self.sample_with(u, r))
    }

    fn sample_with(&self, t: f64, r: f64) -> LevelSample {
        let c = self.flux;
        let w = self.metric.r_phi(r);
        let w4 = w.powi(4);
        let l = c * c * r * r / w4;
        let area = 4.0 * PI * w4 / (r * r);
        // |grad u|_g = phi^-2 u'
        let grad = c * r * r / w4;
        LevelSample {
            t,
            r_t: r,
            l,
            area,
            flux: grad * area / (4.0 * PI),
        }
    }

    pub fn l_of_t(&self, t: f64) -> Result<LevelSample> {
        let r = self.level_radius(t)?;
        Ok(self.sample_with(t, r))
    }

    /// `(1 - t, L(t))` at radius `r`, both accurate near `t = 1`.
    pub fn tail_pair(&self, r: f64) -> Result<(f64, f64)> {
        let (_, one_minus) = self.values(r)?;
        Ok((one_minus, self.sample_with(1.0 - one_minus, r).l))
    }

    /// Capacity recovered from the far field: extrapolate `r (1 - u)` to
    /// `r = inf`. Cross-check for [`Self::capacity`].
    pub fn far_field_capacity(&self) -> Result<Extrapolated> {
        let big = self.far_radius();
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        for k in 0..6 {
            let r = big / 2f64.powi(k);
            xs.push(1.0 / r);
            fs.push(r * self.one_minus_u(r)?);
        }
        xs.reverse();
        fs.reverse();
        Ok(neville_to_zero(&xs, &fs))
    }

    /// Largest `|r^2 phi^2 u' - C|` with `u'` from a five-point difference of
    /// the quadrature-evaluated `u` at interval midpoints.
    pub fn first_integral_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let r = if a > 0.0 { (a * b).sqrt() } else { 0.5 * b };
            let d = 1e-3 * (r - a).min(b - r);
            let u = |x: f64| self.u(x);
            let du = (u(r - 2.0 * d)? - 8.0 * u(r - d)? + 8.0 * u(r + d)? - u(r + 2.0 * d)?)
                / (12.0 * d);
            let wphi = self.metric.r_phi(r);
            worst = worst.max((wphi * wphi * du - self.flux).abs());
        }
        Ok(worst)
    }

    /// `I(inf)`.
    pub fn normalization_integral(&self) -> f64 {
        self.total
    }
}

/// `int_R^inf ds / (s phi)^2 = int_0^{1/R} drho / phi(1/rho)^2`.
fn tail_integral(metric: &RadialConformalMetric, r: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let g = |rho: f64| 1.0 / metric.phi(1.0 / rho).powi(2);
    let res = integrate(&g, 0.0, 1.0 / r, 0.0, rel_tol, MAX_PANELS);
    if !res.value.is_finite() {
        return Err(Error::NoNormalization(format!(
            "tail integral from {r} diverges"
        )));
    }
    Ok((res.value, res.error))
}

/// Safeguarded Newton for an increasing residual with a sign change on
/// `[lo, hi]`.
fn solve_increasing<R, D>(mut lo: f64, mut hi: f64, f_lo: f64, f_hi: f64, res: R, deriv: D) -> f64
where
    R: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if f_lo >= 0.0 {
        return lo;
    }
    if f_hi <= 0.0 {
        return hi;
    }
    let mut x = lo + (hi - lo) * (-f_lo / (f_hi - f_lo));
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let fx = res(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = fx / deriv(x);
        let mut next = x - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= 2.0 * f64::EPSILON * hi.abs()
        {
            return next;
        }
        x = next;
    }
    x
}
