//! Conformal-harmonic solves on a truncated 3D exterior domain.
//!
//! `u` is `g`-harmonic for `g = phi^4 g0` iff `div0(phi^2 grad0 u) = 0`.
//! The box `[-R, R]^3` is discretized with a vertex-centred finite-volume
//! scheme; nodes inside the excised ball `|x| <= r0` carry `u = 0`.

mod check;
mod coarea;
mod fit;
mod snapshot;
mod solver;

pub use check::{check_field, default_field_t_grid, FieldCheck, DEFAULT_TOL_ESTIMATOR};
pub use coarea::{coarea_l, CoareaSample, CoareaSpec};
pub use fit::{far_field_fit, FarFieldFit};
pub use snapshot::{read_snapshot, write_snapshot};
pub use solver::{solve_conformal_laplace, SolveSpec};

use serde::{Deserialize, Serialize};

/// `phi = 1 + a * min(1/|x - p|, 1/s)`, superharmonic for `a >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointShell {
    pub weight: f64,
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PhiField {
    Flat,
    Schwarzschild { mass: f64 },
    PointShells { shells: Vec<PointShell> },
}

impl PhiField {
    /// Two off-centre shells of weight 1/2 each.
    pub fn two_shell_example() -> Self {
        PhiField::PointShells {
            shells: vec![
                PointShell {
                    weight: 0.5,
                    center: [3.0, 0.0, 0.0],
                    radius: 1.2,
                },
                PointShell {
                    weight: 0.5,
                    center: [-2.0, -2.0, 0.0],
                    radius: 1.0,
                },
            ],
        }
    }

    pub fn phi(&self, x: [f64; 3]) -> f64 {
        match self {
            PhiField::Flat => 1.0,
            PhiField::Schwarzschild { mass } => 1.0 + mass / (2.0 * norm(x)),
            PhiField::PointShells { shells } => {
                1.0 + shells
                    .iter()
                    .map(|s| {
                        let d = norm([x[0] - s.center[0], x[1] - s.center[1], x[2] - s.center[2]]);
                        s.weight / d.max(s.radius)
                    })
                    .sum::<f64>()
            }
        }
    }

    /// ADM mass from the exact `1/|x|` tail.
    pub fn mass(&self) -> f64 {
        match self {
            PhiField::Flat => 0.0,
            PhiField::Schwarzschild { mass } => *mass,
            PhiField::PointShells { shells } => 2.0 * shells.iter().map(|s| s.weight).sum::<f64>(),
        }
    }
}

pub(crate) fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// Solved (or loaded) field on `n^3` nodes, x fastest.
#[derive(Debug, Clone)]
pub struct ScalarField3D {
    pub n: usize,
    pub h: f64,
    pub r0: f64,
    pub r_box: f64,
    pub phi: Vec<f64>,
    pub u: Vec<f64>,
    /// Relative residual at exit.
    pub residual: f64,
    pub iterations: usize,
    /// Analytic description, when the field was solved rather than loaded.
    pub source: Option<PhiField>,
}

impl ScalarField3D {
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.r_box + i as f64 * self.h
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn is_active(&self, x: [f64; 3]) -> bool {
        norm(x) > self.r0
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.u
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}
