//! Closed-form Schwarzschild values used as ground truth.
//!
//! The family is `(1 + m/(2|x|))^4 g0` either on the exterior `|x| >= r0`
//! or, with `r0 = 0` and `m > 0`, on the whole punctured space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::RadialConformalMetric;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchwarzschildSpec {
    pub m: f64,
    /// Inner isotropic radius. Zero selects the two-ended manifold.
    pub r0: f64,
}

/// Coordinate in which [`SchwarzschildSpec::gauge_metric_closed`] is
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeCoordinate {
    /// `t = (1 + m/(2 rho))^-1`, the two-ended harmonic coordinate.
    Isotropic(f64),
    /// `s = (t - T)/(1 - T)`, the harmonic coordinate of the exterior `r0`.
    Shifted(f64),
}

/// Coefficients of `dt^2` (or `ds^2`) and of the unit round metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeCoefficients {
    pub radial: f64,
    pub sphere: f64,
}

impl SchwarzschildSpec {
    pub fn new(m: f64, r0: f64) -> Result<Self> {
        if !(m.is_finite() && r0.is_finite()) || r0 < 0.0 {
            return Err(Error::InvalidMetric(format!(
                "bad Schwarzschild data m={m}, r0={r0}"
            )));
        }
        if r0 == 0.0 && m <= 0.0 {
            return Err(Error::InvalidMetric(
                "two-ended Schwarzschild needs m > 0".into(),
            ));
        }
        if r0 > 0.0 && 1.0 + m / (2.0 * r0) <= 0.0 {
            return Err(Error::InvalidMetric(format!(
                "1 + m/(2 r0) <= 0 for m={m}, r0={r0}"
            )));
        }
        Ok(SchwarzschildSpec { m, r0 })
    }

    pub fn two_ended(m: f64) -> Result<Self> {
        Self::new(m, 0.0)
    }

    pub fn is_two_ended(&self) -> bool {
        self.r0 == 0.0
    }

    /// `T = (1 + m/(2 r0))^-1`, and `0` for the two-ended manifold.
    pub fn level_shift(&self) -> f64 {
        if self.is_two_ended() {
            0.0
        } else {
            1.0 / (1.0 + self.m / (2.0 * self.r0))
        }
    }

    pub fn metric(&self) -> Result<RadialConformalMetric> {
        if self.is_two_ended() {
            RadialConformalMetric::schwarzschild_two_ended(self.m)
        } else {
            RadialConformalMetric::schwarzschild_exterior(self.m, self.r0)
        }
    }

    pub fn capacity_closed(&self) -> f64 {
        self.r0 + 0.5 * self.m
    }

    /// `m c^-1 - 2`.
    pub fn ratio_closed(&self) -> f64 {
        if self.is_two_ended() {
            0.0
        } else {
            -2.0 / (1.0 + self.m / (2.0 * self.r0))
        }
    }

    fn check_level(&self, t: f64) -> Result<()> {
        let ok = if self.is_two_ended() {
            t > 0.0 && t < 1.0
        } else {
            (0.0..1.0).contains(&t)
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutOfRange { t })
        }
    }

    /// `L(t)` in isotropic variables.
    pub fn l_closed(&self, t: f64) -> Result<f64> {
        self.check_level(t)?;
        let w = 1.0 - t;
        if self.is_two_ended() {
            return Ok(t * t * w * w);
        }
        let a = self.m / (2.0 * self.r0);
        let f = (1.0 + a * t) / (1.0 + a);
        Ok(f * f * w * w)
    }

    /// `L(t)` from the surface integral in the level-set gauge,
    /// `[(1-T)s + T]^2 (1-s)^2`.
    pub fn l_gauge(&self, s: f64) -> Result<f64> {
        self.check_level(s)?;
        let tt = self.level_shift();
        let f = (1.0 - tt) * s + tt;
        Ok(f * f * (1.0 - s) * (1.0 - s))
    }

    /// `|grad u|_g` on the level `t`.
    pub fn grad_norm_closed(&self, t: f64) -> Result<f64> {
        self.check_level(t)?;
        if self.is_two_ended() {
            return Ok(2.0 / self.m * t * t * (1.0 - t) * (1.0 - t));
        }
        if self.m == 0.0 {
            return Ok((1.0 - t) * (1.0 - t) / self.r0);
        }
        let tau = self.isotropic_level(t);
        let two_ended = (2.0 / self.m).abs() * tau * tau * (1.0 - tau) * (1.0 - tau);
        Ok(two_ended / (1.0 - self.level_shift()).abs())
    }

    /// Two-ended variable `tau = (1-T) t + T` of the exterior level `t`.
    pub fn isotropic_level(&self, t: f64) -> f64 {
        let tt = self.level_shift();
        (1.0 - tt) * t + tt
    }

    /// Metric coefficients in the level-set gauge. The sign of `m` fixes
    /// the admissible range of the isotropic coordinate.
    pub fn gauge_metric_closed(&self, at: GaugeCoordinate) -> Result<GaugeCoefficients> {
        let m = self.m;
        if m == 0.0 {
            return Err(Error::Domain("level-set gauge needs m != 0".into()));
        }
        let q = 0.25 * m * m;
        match at {
            GaugeCoordinate::Isotropic(t) => {
                let ok = if m > 0.0 {
                    t > 0.0 && t < 1.0
                } else {
                    t > 1.0 && t.is_finite()
                };
                if !ok {
                    return Err(Error::Domain(format!(
                        "t = {t} is outside the range for m = {m}"
                    )));
                }
                let p = t * (1.0 - t);
                Ok(GaugeCoefficients {
                    radial: q / p.powi(4),
                    sphere: q / (p * p),
                })
            }
            GaugeCoordinate::Shifted(s) => {
                if self.is_two_ended() {
                    return self.gauge_metric_closed(GaugeCoordinate::Isotropic(s));
                }
                if !(0.0..1.0).contains(&s) {
                    return Err(Error::Domain(format!("s = {s} is outside [0, 1)")));
                }
                let tt = self.level_shift();
                let w = (1.0 - tt) * s + tt;
                let p = w * (1.0 - s);
                let lead = q / ((1.0 - tt) * (1.0 - tt));
                Ok(GaugeCoefficients {
                    radial: lead / p.powi(4),
                    sphere: lead / (p * p),
                })
            }
        }
    }
}
