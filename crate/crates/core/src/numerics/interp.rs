//! Piecewise cubic Hermite interpolation with one-sided knot slopes.

/// Cubic Hermite table. Segment `i` spans `[xs[i], xs[i+1]]` and uses the
/// slope `right[i]` at its left end and `left[i+1]` at its right end, so a
/// kink sitting exactly on a knot is represented without smearing.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl HermiteTable {
    /// Build from one-sided slopes. Segments whose cubic would dip to or
    /// below zero while both end values are positive fall back to the
    /// shape-preserving slopes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && ys.len() == n && left.len() == n && right.len() == n);
        let mut table = HermiteTable {
            xs,
            ys,
            left,
            right,
        };
        let safe = pchip_slopes(&table.xs, &table.ys);
        for i in 0..n - 1 {
            if table.ys[i] > 0.0 && table.ys[i + 1] > 0.0 && table.segment_min(i) <= 0.0 {
                table.right[i] = safe[i];
                table.left[i + 1] = safe[i + 1];
            }
        }
        table
    }

    /// Shape-preserving (Fritsch-Butland) interpolant of the data.
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let d = pchip_slopes(&xs, &ys);
        HermiteTable {
            xs,
            ys,
            left: d.clone(),
            right: d,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn left_slopes(&self) -> &[f64] {
        &self.left
    }

    pub fn right_slopes(&self) -> &[f64] {
        &self.right
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    fn segment_eval(&self, i: usize, x: f64) -> (f64, f64) {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.right[i] * h, self.left[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let y = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * d1;
        let dy = (6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * d1;
        (y, dy / h)
    }

    fn segment_min(&self, i: usize) -> f64 {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let mut lo = self.ys[i].min(self.ys[i + 1]);
        // Critical points of the cubic: roots of a quadratic in s.
        let h = x1 - x0;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.right[i] * h, self.left[i + 1] * h);
        let a = 3.0 * (2.0 * y0 + d0 - 2.0 * y1 + d1);
        let b = 2.0 * (-3.0 * y0 - 2.0 * d0 + 3.0 * y1 - d1);
        let c = d0;
        let mut roots = Vec::with_capacity(2);
        if a.abs() < 1e-300 {
            if b != 0.0 {
                roots.push(-c / b);
            }
        } else {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                roots.push((-b + sq) / (2.0 * a));
                roots.push((-b - sq) / (2.0 * a));
            }
        }
        for s in roots {
            if s > 0.0 && s < 1.0 {
                lo = lo.min(self.segment_eval(i, x0 + s * h).0);
            }
        }
        lo
    }

    /// Value and derivative. Outside the knot range the end cubics are
    /// extended; callers are expected to handle tails themselves.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        self.segment_eval(self.segment(x), x)
    }

    /// Like [`Self::eval`], but a knot belongs to the segment on its left.
    pub fn eval_left(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&k| k < x).clamp(1, n - 1) - 1;
        self.segment_eval(i, x)
    }
}

/// Fritsch-Butland slopes: weighted harmonic means of adjacent secants,
/// zero at local extrema of the data.
pub fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_slopes_reproduce_cubic() {
        let f = |x: f64| x * x * x - 2.0 * x + 5.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let xs: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
        let ys = xs.iter().map(|&x| f(x)).collect();
        let ds: Vec<f64> = xs.iter().map(|&x| df(x)).collect();
        let t = HermiteTable::new(xs, ys, ds.clone(), ds);
        for x in [0.1, 0.77, 1.9, 3.4] {
            let (y, dy) = t.eval(x);
            assert!((y - f(x)).abs() < 1e-12);
            assert!((dy - df(x)).abs() < 1e-11);
        }
    }

    #[test]
    fn pchip_does_not_overshoot_step() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![1e-3, 1e-3, 1.0, 1.0, 1.0];
        let t = HermiteTable::pchip(xs, ys);
        for i in 0..=400 {
            let y = t.eval(i as f64 * 0.01).0;
            assert!((1e-3 - 1e-15..=1.0 + 1e-15).contains(&y), "{y}");
        }
    }

    #[test]
    fn wild_slopes_are_repaired_to_stay_positive() {
        let xs = vec![0.0, 1.0, 2.0];
        let ys = vec![0.1, 0.1, 0.1];
        let t = HermiteTable::new(xs, ys, vec![-5.0, -5.0, -5.0], vec![-5.0, -5.0, -5.0]);
        for i in 0..=200 {
            assert!(t.eval(i as f64 * 0.01).0 > 0.0);
        }
    }
}
