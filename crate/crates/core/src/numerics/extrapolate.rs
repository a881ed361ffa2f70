//! Polynomial (Richardson/Neville) extrapolation to a zero step.

/// Extrapolated value with an error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolated {
    pub value: f64,
    pub error: f64,
}

/// Neville extrapolation of samples `(x_i, f_i)` to `x = 0`.
///
/// Samples should be ordered with `x` decreasing toward zero. The error bar
/// is the change contributed by the highest-order correction.
pub fn neville_to_zero(xs: &[f64], fs: &[f64]) -> Extrapolated {
    assert_eq!(xs.len(), fs.len());
    assert!(!xs.is_empty());
    let n = xs.len();
    let mut p = fs.to_vec();
    let mut last_diag = p[n - 1];
    let mut prev_diag = last_diag;
    // p[i] after step k holds the degree-k interpolant through x[i..=i+k]
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (xs[i], xs[i + k]);
            p[i] = (xk * p[i] - xi * p[i + 1]) / (xk - xi);
        }
        prev_diag = last_diag;
        last_diag = p[0];
    }
    let error = if n > 1 {
        (last_diag - prev_diag).abs()
    } else {
        f64::INFINITY
    };
    Extrapolated {
        value: last_diag,
        error,
    }
}

/// Extrapolate a sequence sampled on `h_j = h0 * ratio^j` using the best
/// trailing window of `window` points. Picks the window whose error bar is
/// smallest, which guards against late samples polluted by cancellation.
pub fn best_window(hs: &[f64], fs: &[f64], window: usize) -> Extrapolated {
    assert_eq!(hs.len(), fs.len());
    let w = window.min(hs.len()).max(1);
    let mut best: Option<Extrapolated> = None;
    for start in 0..=hs.len() - w {
        let e = neville_to_zero(&hs[start..start + w], &fs[start..start + w]);
        if !e.value.is_finite() {
            continue;
        }
        if best.is_none_or(|b| e.error < b.error) {
            best = Some(e);
        }
    }
    best.unwrap_or(Extrapolated {
        value: f64::NAN,
        error: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomial_intercept() {
        let hs: Vec<f64> = (0..6).map(|j| 0.5f64.powi(j)).collect();
        let fs: Vec<f64> = hs
            .iter()
            .map(|h| 3.0 - 2.0 * h + 0.5 * h * h - h.powi(3))
            .collect();
        let e = neville_to_zero(&hs, &fs);
        assert!((e.value - 3.0).abs() < 1e-13);
        assert!(e.error < 1e-12);
    }

    #[test]
    fn window_selection_handles_smooth_non_polynomial() {
        let hs: Vec<f64> = (1..14).map(|j| 0.5f64.powi(j)).collect();
        let fs: Vec<f64> = hs.iter().map(|h| (1.0 + h).ln() / h).collect();
        let e = best_window(&hs, &fs, 6);
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
    }
}
