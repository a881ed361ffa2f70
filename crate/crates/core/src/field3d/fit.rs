//! Capacity and mass from the far field.

use serde::{Deserialize, Serialize};

use super::{norm, ScalarField3D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MassSource {
    Analytic,
    TailFit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarFieldFit {
    pub capacity: f64,
    /// Half the spread of the two shell estimates.
    pub band: f64,
    pub mass: f64,
    pub mass_source: MassSource,
    pub shell_radii: [f64; 2],
    pub shell_capacities: [f64; 2],
}

impl FarFieldFit {
    pub fn ratio(&self) -> f64 {
        self.mass / self.capacity
    }
}

/// Interior nodes with `| |x| - rho | <= h/2`.
fn shell_nodes(f: &ScalarField3D, rho: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let n = f.n;
    for k in 1..n - 1 {
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let r = norm(f.position(i, j, k));
                if (r - rho).abs() <= 0.5 * f.h && r > f.r0 {
                    out.push((f.index(i, j, k), r));
                }
            }
        }
    }
    out
}

/// Least-squares `y = c w` over the samples.
fn slope(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (num, den) = pairs.fold((0.0, 0.0), |(a, b), (y, w)| (a + y * w, b + w * w));
    num / den
}

pub fn far_field_fit(f: &ScalarField3D) -> Result<FarFieldFit> {
    let radii = [0.5 * f.r_box, 0.75 * f.r_box];
    let shells: Vec<Vec<(usize, f64)>> = radii.iter().map(|&rho| shell_nodes(f, rho)).collect();
    if shells.iter().any(|s| s.is_empty()) {
        return Err(Error::Config("extraction shells contain no nodes".into()));
    }
    let (mass, mass_source) = match &f.source {
        Some(src) => (src.mass(), MassSource::Analytic),
        None => {
            let a: Vec<f64> = shells
                .iter()
                .map(|s| slope(s.iter().map(|&(i, r)| (f.phi[i] - 1.0, 1.0 / r))))
                .collect();
            (a[0] + a[1], MassSource::TailFit)
        }
    };
    let shift = 0.5 * mass;
    let c: Vec<f64> = shells
        .iter()
        .map(|s| slope(s.iter().map(|&(i, r)| (1.0 - f.u[i], 1.0 / (r + shift)))))
        .collect();
    let mean = 0.5 * (c[0] + c[1]);
    if (c[0] - c[1]).abs() > 0.05 * mean.abs() {
        return Err(Error::FitUnstable {
            inner: c[0],
            outer: c[1],
        });
    }
    Ok(FarFieldFit {
        capacity: mean,
        band: 0.5 * (c[0] - c[1]).abs(),
        mass,
        mass_source,
        shell_radii: radii,
        shell_capacities: [c[0], c[1]],
    })
}
