//! Closed-form level quantities built from `L(t)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::HarmonicProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `L(t) > t^2 (1-t)^2`.
    CapacityBranch,
    MassBranch,
}

fn check_level(l: f64, t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("level t = {t} must lie in [0, 1)")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("L = {l} must be positive")));
    }
    Ok(())
}

/// `S(t)` together with the branch that produced it.
pub fn s_of(l: f64, t: f64) -> Result<(f64, Branch)> {
    check_level(l, t)?;
    let w = 1.0 - t;
    let p = t * w;
    if l > p * p {
        Ok((2.0 * (t / w - l.sqrt() / (w * w)), Branch::CapacityBranch))
    } else {
        Ok((t / w * (1.0 - l / (p * p)), Branch::MassBranch))
    }
}

/// `Q(t) = (t/(1-t)) [1 - L/(t^2 (1-t)^2)]`.
pub fn q_of(l: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("level t = {t} must lie in (0, 1)")));
    }
    check_level(l, t)?;
    let w = 1.0 - t;
    let p = t * w;
    Ok(t / w * (1.0 - l / (p * p)))
}

/// `B_k(t)` and its normalization `(1/k)[(1/4pi) B_k - 2]`, the latter
/// computed twice by independent algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BkValue {
    pub value: f64,
    /// From `value`.
    pub normalized: f64,
    /// `t/(1-t) - 1/k - k L / ((kt + 1 - t)(1-t)^3)`.
    pub normalized_direct: f64,
}

pub fn b_k_of(l: f64, t: f64, k: f64) -> Result<BkValue> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("k = {k} must be positive")));
    }
    check_level(l, t)?;
    let w = 1.0 - t;
    let d = k * t + w;
    let four_pi = 4.0 * PI;
    let value = d / w * (four_pi - k * k / (w * w * d * d) * four_pi * l);
    let normalized = (value / four_pi - 2.0) / k;
    let normalized_direct = t / w - 1.0 / k - k * l / (d * w * w * w);
    Ok(BkValue {
        value,
        normalized,
        normalized_direct,
    })
}

pub fn b_k(profile: &HarmonicProfile, t: f64, k: f64) -> Result<BkValue> {
    b_k_of(profile.l_of_t(t)?.l, t, k)
}

/// `Psi(k) = 1/k + k L / ((kt + 1 - t)(1-t)^3)`.
pub fn psi(l: f64, t: f64, k: f64) -> f64 {
    let w = 1.0 - t;
    1.0 / k + k * l / ((k * t + w) * w * w * w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KOptimum {
    Finite(f64),
    /// `Psi` decreases on all of `(0, inf)`.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KStar {
    pub k0: KOptimum,
    pub inf_psi: f64,
    /// `t/(1-t) - inf Psi`.
    pub s_via_sup: f64,
}

/// Minimizer of `Psi`. The case split is the same predicate as [`s_of`].
pub fn k0_and_psi(l: f64, t: f64) -> Result<KStar> {
    let (_, branch) = s_of(l, t)?;
    let w = 1.0 - t;
    let root = l.sqrt() / w;
    let (k0, inf_psi) = match branch {
        Branch::CapacityBranch => {
            let gap = root - t;
            let k0 = if gap > 0.0 { w / gap } else { f64::INFINITY };
            (KOptimum::Finite(k0), gap / w + l.sqrt() / (w * w))
        }
        Branch::MassBranch => (KOptimum::Unbounded, l / (t * w * w * w)),
    };
    Ok(KStar {
        k0,
        inf_psi,
        s_via_sup: t / w - inf_psi,
    })
}

/// `n` log-uniform points on `[k_min, k_max]`.
pub fn log_k_grid(k_min: f64, k_max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (k_min.ln(), k_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn default_k_grid() -> Vec<f64> {
    log_k_grid(1e-4, 1e6, 10_000)
}

/// `|max_k normalized B_k - S|` over `k_grid`, with a finite `k0` added to
/// the grid.
pub fn sup_defect(l: f64, t: f64, k_grid: &[f64]) -> Result<f64> {
    let (s, _) = s_of(l, t)?;
    let star = k0_and_psi(l, t)?;
    let mut best = f64::NEG_INFINITY;
    let extra = match star.k0 {
        KOptimum::Finite(k) if k.is_finite() => Some(k),
        _ => None,
    };
    for &k in k_grid.iter().chain(extra.iter()) {
        best = best.max(b_k_of(l, t, k)?.normalized);
    }
    Ok((best - s).abs())
}

pub fn sup_cross_check(profile: &HarmonicProfile, t: f64, k_grid: &[f64]) -> Result<f64> {
    sup_defect(profile.l_of_t(t)?.l, t, k_grid)
}
