//! Adaptive Dormand-Prince 5(4) integrator for scalar ODEs.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-11,
            atol: 1e-14,
            max_steps: 100_000,
            min_step: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFailure {
    pub t: f64,
    pub step: f64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `y' = f(t, y)` from `(t0, y0)` and report `y` at each of
/// `outputs`, which must be monotone in the direction of integration.
pub fn dopri5<F: Fn(f64, f64) -> f64>(
    f: &F,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    ctl: StepControl,
) -> Result<Vec<f64>, StepFailure> {
    let mut t = t0;
    let mut y = y0;
    let mut out = Vec::with_capacity(outputs.len());
    let mut h = outputs
        .first()
        .map(|&t1| ((t1 - t0).abs() * 0.01).max(1e-6))
        .unwrap_or(1e-3);
    let mut steps = 0usize;
    let mut k1 = f(t, y);
    for &target in outputs {
        let dir = if target >= t { 1.0 } else { -1.0 };
        while (target - t) * dir > 0.0 {
            if steps >= ctl.max_steps {
                return Err(StepFailure { t, step: h });
            }
            let mut step = h.min((target - t).abs()) * dir;
            let k2 = f(t + C2 * step, y + step * A21 * k1);
            let k3 = f(t + C3 * step, y + step * (A31 * k1 + A32 * k2));
            let k4 = f(t + C4 * step, y + step * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(
                t + C5 * step,
                y + step * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            );
            let k6 = f(
                t + step,
                y + step * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let y_new = y + step * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let k7 = f(t + step, y_new);
            let err = step * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let scale = ctl.atol + ctl.rtol * y.abs().max(y_new.abs());
            let ratio = (err / scale).abs();
            steps += 1;
            if !y_new.is_finite() {
                h *= 0.25;
            } else if ratio <= 1.0 {
                t += step;
                y = y_new;
                k1 = k7;
                let grow = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).min(5.0)
                };
                h = step.abs() * grow;
                continue;
            } else {
                h = step.abs() * (0.9 * ratio.powf(-0.2)).max(0.2);
            }
            step = h;
            if step < ctl.min_step {
                return Err(StepFailure { t, step });
            }
        }
        out.push(y);
    }
    Ok(out)
}
