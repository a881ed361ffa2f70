//! Finite-volume assembly and a Jacobi-preconditioned conjugate gradient.
//!
//! Face coefficients are harmonic means of `phi^2`. A link crossing the
//! excised sphere is shortened to the crossing point, where `u = 0`; this
//! only touches the diagonal, so the operator stays symmetric. On the box
//! faces the flux is `d_n u = (x.n/|x|)(1 - u)/(|x| + A)` with `A = m/2`,
//! which the Schwarzschild potential `1 - c/(|x| + A)` satisfies exactly.
//!
//! Every reduction is summed per z-slab and then over slabs in index order,
//! so results do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{norm, PhiField, ScalarField3D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveSpec {
    pub r0: f64,
    pub r_box: f64,
    /// Cells per axis; nodes per axis is one more.
    pub cells: usize,
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// Smallest admitted fraction of a cut link.
    pub theta_min: f64,
}

impl Default for SolveSpec {
    fn default() -> Self {
        SolveSpec {
            r0: 1.0,
            r_box: 16.0,
            cells: 96,
            tol: 1e-12,
            max_iter: 20_000,
            theta_min: 0.05,
        }
    }
}

impl SolveSpec {
    pub fn h(&self) -> f64 {
        2.0 * self.r_box / self.cells as f64
    }
}

/// Fraction of the link from `x` toward `x + sign h e_d` that lies outside
/// the sphere of radius `r0`, given that the far end is inside.
pub(crate) fn cut_fraction(x: [f64; 3], d: usize, r0: f64, h: f64) -> f64 {
    let a = x[d];
    let q = norm(x).powi(2) - a * a;
    let b = a.signum() * (r0 * r0 - q).max(0.0).sqrt();
    ((a - b).abs() / h).min(1.0)
}

struct Operator {
    n: usize,
    diag: Vec<f64>,
    /// `coef[d][idx]` couples `idx` with its `+e_d` neighbour.
    coef: [Vec<f64>; 3],
    active: Vec<bool>,
}

impl Operator {
    fn strides(&self) -> [usize; 3] {
        [1, self.n, self.n * self.n]
    }

    fn apply_slab(&self, p: &[f64], out: &mut [f64], k: usize) {
        let n = self.n;
        let st = self.strides();
        let base = k * n * n;
        for (local, o) in out.iter_mut().enumerate() {
            let idx = base + local;
            if !self.active[idx] {
                *o = 0.0;
                continue;
            }
            let (i, j) = (local % n, local / n);
            let ijk = [i, j, k];
            let mut acc = self.diag[idx] * p[idx];
            for d in 0..3 {
                if ijk[d] + 1 < n {
                    acc -= self.coef[d][idx] * p[idx + st[d]];
                }
                if ijk[d] > 0 {
                    acc -= self.coef[d][idx - st[d]] * p[idx - st[d]];
                }
            }
            *o = acc;
        }
    }

    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let slab = self.n * self.n;
        out.par_chunks_mut(slab)
            .enumerate()
            .for_each(|(k, o)| self.apply_slab(p, o, k));
    }
}

fn dot(a: &[f64], b: &[f64], slab: usize) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(slab)
        .zip(b.par_chunks(slab))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.iter().sum()
}

fn harmonic_mean(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

pub fn solve_conformal_laplace(field: &PhiField, spec: SolveSpec) -> Result<ScalarField3D> {
    let h = spec.h();
    if !(spec.r0 >= 2.0 * h) {
        return Err(Error::BadExcision { r0: spec.r0, h });
    }
    if !(spec.r_box > spec.r0 + 2.0 * h) {
        return Err(Error::Config(format!(
            "box half-width {} must exceed r0 = {}",
            spec.r_box, spec.r0
        )));
    }
    let n = spec.cells + 1;
    let total = n * n * n;
    let slab = n * n;
    let mut out = ScalarField3D {
        n,
        h,
        r0: spec.r0,
        r_box: spec.r_box,
        phi: vec![0.0; total],
        u: vec![0.0; total],
        residual: f64::NAN,
        iterations: 0,
        source: Some(field.clone()),
    };
    out.phi
        .par_chunks_mut(slab)
        .enumerate()
        .for_each(|(k, chunk)| {
            let z = -spec.r_box + k as f64 * h;
            for (local, v) in chunk.iter_mut().enumerate() {
                let mut x = [
                    -spec.r_box + (local % n) as f64 * h,
                    -spec.r_box + (local / n) as f64 * h,
                    z,
                ];
                // excised nodes store phi at their projection onto the sphere
                let r = norm(x);
                if r <= spec.r0 {
                    x = if r > 0.0 {
                        x.map(|c| c * spec.r0 / r)
                    } else {
                        [spec.r0, 0.0, 0.0]
                    };
                }
                *v = field.phi(x);
            }
        });
    if out.phi.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidMetric(
            "conformal factor must be positive on the grid".into(),
        ));
    }

    let (op, rhs) = assemble(&out, field.mass() / 2.0, spec.theta_min);
    let mut x: Vec<f64> = (0..total)
        .map(|idx| {
            let p = out.position(idx % n, (idx / n) % n, idx / slab);
            if op.active[idx] {
                (1.0 - spec.r0 / norm(p)).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let (iterations, residual) = pcg(&op, &rhs, &mut x, spec.tol, spec.max_iter)?;
    out.u = x;
    out.residual = residual;
    out.iterations = iterations;
    Ok(out)
}

fn assemble(f: &ScalarField3D, tail_shift: f64, theta_min: f64) -> (Operator, Vec<f64>) {
    let n = f.n;
    let total = n * n * n;
    let h = f.h;
    let active: Vec<bool> = (0..total)
        .map(|idx| f.is_active(f.position(idx % n, (idx / n) % n, idx / (n * n))))
        .collect();
    let mut diag = vec![0.0; total];
    let mut rhs = vec![0.0; total];
    let mut coef = [vec![0.0; total], vec![0.0; total], vec![0.0; total]];
    let st = [1, n, n * n];
    let sq = |v: f64| v * v;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let idx = f.index(i, j, k);
                if !active[idx] {
                    continue;
                }
                let ijk = [i, j, k];
                let x = f.position(i, j, k);
                let on_face = ijk.map(|c| c == 0 || c == n - 1);
                // Face areas of the (possibly truncated) control volume in
                // units of h^2, per axis.
                let area: [f64; 3] = std::array::from_fn(|d| {
                    (0..3)
                        .filter(|&e| e != d)
                        .map(|e| if on_face[e] { 0.5 } else { 1.0 })
                        .product()
                });
                let k_c = sq(f.phi[idx]);
                for d in 0..3 {
                    for dir in [-1i64, 1] {
                        let c = ijk[d] as i64 + dir;
                        if c < 0 || c >= n as i64 {
                            // outer face: Robin flux
                            let r = norm(x);
                            let g = x[d].abs() / r / (r + tail_shift);
                            let w = area[d] * k_c * g * h;
                            diag[idx] += w;
                            rhs[idx] += w;
                            continue;
                        }
                        let nb = if dir > 0 { idx + st[d] } else { idx - st[d] };
                        if active[nb] {
                            if dir > 0 {
                                let w = area[d] * harmonic_mean(k_c, sq(f.phi[nb]));
                                coef[d][idx] = w;
                                diag[idx] += w;
                                diag[nb] += w;
                            }
                        } else {
                            let theta = cut_fraction(x, d, f.r0, h).max(theta_min);
                            let mut xb = x;
                            xb[d] -= x[d].signum() * theta * h;
                            let kb = match &f.source {
                                Some(src) => sq(src.phi(xb)),
                                None => k_c,
                            };
                            diag[idx] += area[d] * harmonic_mean(k_c, kb) / theta;
                        }
                    }
                }
            }
        }
    }
    (
        Operator {
            n,
            diag,
            coef,
            active,
        },
        rhs,
    )
}

fn pcg(op: &Operator, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<(usize, f64)> {
    let total = b.len();
    let slab = op.n * op.n;
    let inv: Vec<f64> = op
        .diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let mut r = vec![0.0; total];
    op.apply(x, &mut r);
    r.par_iter_mut()
        .zip(b.par_iter())
        .for_each(|(ri, bi)| *ri = bi - *ri);
    let b_norm = dot(b, b, slab).sqrt();
    if b_norm == 0.0 {
        return Ok((0, 0.0));
    }
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; total];
    let mut rz = dot(&r, &z, slab);
    let mut rel = dot(&r, &r, slab).sqrt() / b_norm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok((it, rel));
        }
        op.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap, slab);
        x.par_iter_mut()
            .zip(p.par_iter())
            .for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut()
            .zip(ap.par_iter())
            .for_each(|(ri, ai)| *ri -= alpha * ai);
        z.par_iter_mut()
            .zip(r.par_iter().zip(inv.par_iter()))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
        let rz_new = dot(&r, &z, slab);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut()
            .zip(z.par_iter())
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
        rel = dot(&r, &r, slab).sqrt() / b_norm;
    }
    if rel <= tol {
        Ok((max_iter, rel))
    } else {
        Err(Error::NoConvergence {
            iterations: max_iter,
            residual: rel,
        })
    }
}
