//! Level integrals from volume integrals.
//!
//! With `|grad u|_g = phi^-2 |grad0 u|` and `dV_g = phi^6 dV0`,
//! `int_{u<t} |grad u|_g^p |grad u|_g dV_g = int_0^t int_{u=s} |grad u|_g^p`,
//! so each level integral is the `t`-derivative of a flat volume sum:
//! weight `G^3` for `L`, `phi^2 G^2` for the flux and `phi^4 G` for the area,
//! where `G = |grad0 u|`. Each control volume is split into sub-cells on
//! which `u` follows the node's quadratic Taylor model; sub-cells inside the ball are
//! dropped. Each sub-cell gets a kernel of variance `b^2` plus its own `u`
//! spread. A plain Gaussian would bias the estimate by half the second
//! derivative of variance times density, so the fourth-order Gaussian
//! `(3 - z^2)/2 N(z)` is used instead.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::{cut_fraction, SolveSpec};
use super::{norm, ScalarField3D};
use crate::harmonic::LevelSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaSpec {
    /// Base kernel width in `t`.
    pub bandwidth: f64,
    /// Nodes with `|grad0 u|` below this mark their level as non-regular.
    pub gradient_floor: f64,
}

impl Default for CoareaSpec {
    fn default() -> Self {
        CoareaSpec {
            bandwidth: 0.02,
            gradient_floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoareaSample {
    pub t: f64,
    pub l: f64,
    /// `(1/4pi) int |grad u|_g dsigma_g`; should equal the capacity.
    pub flux: f64,
    pub area: f64,
    /// Kernel-weighted mean `|x|` of the level.
    pub mean_radius: f64,
    pub regular: bool,
}

impl CoareaSample {
    pub fn level_sample(&self) -> LevelSample {
        LevelSample {
            t: self.t,
            r_t: self.mean_radius,
            l: self.l,
            area: self.area,
            flux: self.flux,
        }
    }
}

struct NodeStat {
    x: [f64; 3],
    u: f64,
    g: [f64; 3],
    hess: [[f64; 3]; 3],
    phi: f64,
    /// Extent of the control volume per axis, relative to the node.
    lo: [f64; 3],
    hi: [f64; 3],
}

/// Derivative along axis `d` at an active node: five-point where the stencil
/// is clear of the ball and the box, otherwise three-point with the cut
/// point standing in for the excised neighbour.
fn axis_derivative(f: &ScalarField3D, ijk: [usize; 3], d: usize) -> f64 {
    let n = f.n;
    let st = [1, n, n * n];
    let idx = f.index(ijk[0], ijk[1], ijk[2]);
    let x = f.position(ijk[0], ijk[1], ijk[2]);
    let h = f.h;
    let u0 = f.u[idx];
    if ijk[d] == 0 {
        return (-3.0 * u0 + 4.0 * f.u[idx + st[d]] - f.u[idx + 2 * st[d]]) / (2.0 * h);
    }
    if ijk[d] == n - 1 {
        return (3.0 * u0 - 4.0 * f.u[idx - st[d]] + f.u[idx - 2 * st[d]]) / (2.0 * h);
    }
    if ijk[d] >= 2 && ijk[d] + 2 < n {
        let far = [-2.0, -1.0, 1.0, 2.0].map(|s| {
            let mut y = x;
            y[d] += s * h;
            f.is_active(y)
        });
        if far.iter().all(|&a| a) {
            let (m2, m1, p1, p2) = (
                f.u[idx - 2 * st[d]],
                f.u[idx - st[d]],
                f.u[idx + st[d]],
                f.u[idx + 2 * st[d]],
            );
            return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        }
    }
    let mut nb = [idx - st[d], idx + st[d]];
    let mut xs = [-h, h];
    let mut us = [f.u[nb[0]], f.u[nb[1]]];
    for s in 0..2 {
        let mut y = x;
        y[d] += xs[s];
        if !f.is_active(y) {
            let theta = cut_fraction(x, d, f.r0, h).max(SolveSpec::default().theta_min);
            xs[s] *= theta;
            us[s] = 0.0;
            nb[s] = idx;
        }
    }
    // three-point derivative on the nodes (xs[0], 0, xs[1])
    let (a, b) = (-xs[0], xs[1]);
    -b / (a * (a + b)) * us[0] + (b - a) / (a * b) * u0 + a / (b * (a + b)) * us[1]
}

fn node_stats(f: &ScalarField3D) -> Vec<NodeStat> {
    let n = f.n;
    let half = 0.5 * f.h;
    let st = [1, n, n * n];
    let ijk_of = |idx: usize| [idx % n, (idx / n) % n, idx / (n * n)];
    let grads: Vec<Option<[f64; 3]>> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| {
            let ijk = ijk_of(idx);
            f.is_active(f.position(ijk[0], ijk[1], ijk[2]))
                .then(|| std::array::from_fn(|d| axis_derivative(f, ijk, d)))
        })
        .collect();
    (0..n * n * n)
        .into_par_iter()
        .filter_map(|idx| {
            let g = grads[idx]?;
            let ijk = ijk_of(idx);
            // Hessian from differences of the gradient field, one-sided next
            // to the ball or the box, then symmetrized.
            let mut hess = [[0.0; 3]; 3];
            for e in 0..3 {
                let minus = if ijk[e] > 0 { grads[idx - st[e]] } else { None };
                let plus = if ijk[e] + 1 < n {
                    grads[idx + st[e]]
                } else {
                    None
                };
                let col: [f64; 3] = match (minus, plus) {
                    (Some(m), Some(p)) => std::array::from_fn(|d| (p[d] - m[d]) / (2.0 * f.h)),
                    (None, Some(p)) => std::array::from_fn(|d| (p[d] - g[d]) / f.h),
                    (Some(m), None) => std::array::from_fn(|d| (g[d] - m[d]) / f.h),
                    (None, None) => [0.0; 3],
                };
                for d in 0..3 {
                    hess[d][e] += 0.5 * col[d];
                    hess[e][d] += 0.5 * col[d];
                }
            }
            Some(NodeStat {
                x: f.position(ijk[0], ijk[1], ijk[2]),
                u: f.u[idx],
                g,
                hess,
                phi: f.phi[idx],
                lo: ijk.map(|c| if c == 0 { 0.0 } else { -half }),
                hi: ijk.map(|c| if c == n - 1 { 0.0 } else { half }),
            })
        })
        .collect()
}

#[derive(Default, Clone, Copy)]
struct Sums {
    l: f64,
    flux: f64,
    area: f64,
    rad: f64,
    weight: f64,
    irregular: bool,
}

impl Sums {
    fn add(self, o: Sums) -> Sums {
        Sums {
            l: self.l + o.l,
            flux: self.flux + o.flux,
            area: self.area + o.area,
            rad: self.rad + o.rad,
            weight: self.weight + o.weight,
            irregular: self.irregular || o.irregular,
        }
    }
}

/// Sub-cells per axis in each control volume.
const SUB: usize = 4;

fn node_sums(s: &NodeStat, t: f64, spec: &CoareaSpec, r0: f64) -> Sums {
    let mut out = Sums::default();
    let step: [f64; 3] = std::array::from_fn(|d| (s.hi[d] - s.lo[d]) / SUB as f64);
    let b2 = spec.bandwidth * spec.bandwidth;
    let hmax: f64 = s.hess.iter().flatten().map(|v| v.abs()).sum();
    let reach: f64 = (0..3)
        .map(|d| (s.g[d].abs() + hmax * s.hi[d].max(-s.lo[d])) * (s.hi[d] - s.lo[d]))
        .sum::<f64>();
    let gmax = norm(s.g)
        + hmax
            * 0.5
            * (s.hi[0] - s.lo[0])
                .max(s.hi[1] - s.lo[1])
                .max(s.hi[2] - s.lo[2])
            * 3.0;
    let smax = b2 + (gmax * step.iter().cloned().fold(0.0, f64::max)).powi(2) / 12.0;
    if (s.u - t).abs() > 6.0 * smax.sqrt() + reach {
        return out;
    }
    let dv = step[0] * step[1] * step[2];
    let p2 = s.phi * s.phi;
    for a in 0..SUB {
        for b in 0..SUB {
            for c in 0..SUB {
                let off = [a, b, c];
                let dx: [f64; 3] =
                    std::array::from_fn(|d| s.lo[d] + (off[d] as f64 + 0.5) * step[d]);
                let y = [s.x[0] + dx[0], s.x[1] + dx[1], s.x[2] + dx[2]];
                let r = norm(y);
                if r <= r0 {
                    continue;
                }
                let hd: [f64; 3] =
                    std::array::from_fn(|d| (0..3).map(|e| s.hess[d][e] * dx[e]).sum());
                let u = s.u + (0..3).map(|d| (s.g[d] + 0.5 * hd[d]) * dx[d]).sum::<f64>();
                let gs: [f64; 3] = std::array::from_fn(|d| s.g[d] + hd[d]);
                let grad = norm(gs);
                let var = b2 + (0..3).map(|d| (gs[d] * step[d]).powi(2)).sum::<f64>() / 12.0;
                let z2 = (u - t).powi(2) / var;
                if z2 > 36.0 {
                    continue;
                }
                if z2 <= 9.0 && grad < spec.gradient_floor {
                    out.irregular = true;
                }
                let kw = 0.5 * (3.0 - z2) * (-0.5 * z2).exp() / (2.0 * PI * var).sqrt() * dv;
                out.l += kw * grad * grad * grad;
                out.flux += kw * p2 * grad * grad;
                out.area += kw * p2 * p2 * grad;
                out.rad += kw * r;
                out.weight += kw;
            }
        }
    }
    out
}

pub fn coarea_l(f: &ScalarField3D, t_grid: &[f64], spec: CoareaSpec) -> Vec<CoareaSample> {
    let stats = node_stats(f);
    t_grid
        .iter()
        .map(|&t| {
            // fixed chunks summed in order keep the result thread-count independent
            let parts: Vec<Sums> = stats
                .par_chunks(4096)
                .map(|c| {
                    c.iter().fold(Sums::default(), |acc, s| {
                        acc.add(node_sums(s, t, &spec, f.r0))
                    })
                })
                .collect();
            let sum = parts.into_iter().fold(Sums::default(), Sums::add);
            let q = 1.0 / (4.0 * PI);
            CoareaSample {
                t,
                l: sum.l * q,
                flux: sum.flux * q,
                area: sum.area,
                mean_radius: if sum.weight > 0.0 {
                    sum.rad / sum.weight
                } else {
                    f64::NAN
                },
                regular: !sum.irregular,
            }
        })
        .collect()
}
