//! Rotationally symmetric conformally flat metrics `g = phi(|x|)^4 g0`.
//!
//! Nonnegative scalar curvature of `g` is equivalent to superharmonicity of
//! `phi`, which for radial `phi` is concavity of `r -> r * phi(r)`.

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::extrapolate::{neville_to_zero, Extrapolated};
use crate::numerics::interp::HermiteTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DomainKind {
    /// `|x| >= inner_radius`, with the harmonic function vanishing on the sphere.
    ExteriorOfSphere { inner_radius: f64 },
    /// `R^3 \ {0}`, with the harmonic function tending to zero at the puncture.
    PuncturedSpace,
}

impl DomainKind {
    pub fn inner_radius(&self) -> f64 {
        match *self {
            DomainKind::ExteriorOfSphere { inner_radius } => inner_radius,
            DomainKind::PuncturedSpace => 0.0,
        }
    }

    pub fn is_punctured(&self) -> bool {
        matches!(self, DomainKind::PuncturedSpace)
    }
}

/// A shell potential `a * min(1/r, 1/s)`, optionally averaged over radii in
/// `[s - w/2, s + w/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub weight: f64,
    pub radius: f64,
    #[serde(default)]
    pub width: f64,
}

impl Shell {
    pub fn new(weight: f64, radius: f64) -> Self {
        Shell {
            weight,
            radius,
            width: 0.0,
        }
    }

    /// `r * potential(r)` for unit weight; bounded as r -> 0.
    fn r_potential(&self, r: f64) -> f64 {
        let (s, w) = (self.radius, self.width);
        if w == 0.0 {
            return (r / s).min(1.0);
        }
        let (lo, hi) = (s - 0.5 * w, s + 0.5 * w);
        if r <= lo {
            r * (hi / lo).ln() / w
        } else if r >= hi {
            1.0
        } else {
            ((r - lo) + r * (hi / r).ln()) / w
        }
    }

    /// Right derivative of the unit-weight potential.
    fn potential_slope(&self, r: f64) -> f64 {
        let (s, w) = (self.radius, self.width);
        if w == 0.0 {
            return if r < s { 0.0 } else { -1.0 / (r * r) };
        }
        let (lo, hi) = (s - 0.5 * w, s + 0.5 * w);
        if r <= lo {
            0.0
        } else if r >= hi {
            -1.0 / (r * r)
        } else {
            (lo / (r * r) - 1.0 / r) / w
        }
    }

    fn potential_slope_left(&self, r: f64) -> f64 {
        if self.width == 0.0 && r <= self.radius {
            0.0
        } else {
            self.potential_slope(r)
        }
    }

    fn kinks(&self) -> Vec<f64> {
        if self.width == 0.0 {
            vec![self.radius]
        } else {
            vec![
                self.radius - 0.5 * self.width,
                self.radius + 0.5 * self.width,
            ]
        }
    }
}

/// Sampled conformal factor. Slopes are one-sided so kinks on knots are
/// preserved; without slopes a shape-preserving interpolant is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_slopes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right_slopes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Profile {
    Flat,
    Schwarzschild {
        mass: f64,
    },
    /// `phi = 1 + core/r + sum_i a_i * min(1/r, 1/s_i)`. A positive `core`
    /// gives a Schwarzschild-type end at the puncture.
    ShellSuperposition {
        #[serde(default)]
        core: f64,
        shells: Vec<Shell>,
    },
    Tabulated(TabulatedProfile),
}

/// Serializable description of a metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub domain: DomainKind,
    pub profile: Profile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_order: Option<f64>,
}

#[derive(Debug)]
struct TableState {
    table: HermiteTable,
    /// `phi = 1 + a/r + b/r^2` beyond the last knot.
    tail: (f64, f64),
    /// `r * phi` below the first knot (punctured domains only).
    core: f64,
}

/// Mass estimate with an error bar (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub mass: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct RadialConformalMetric {
    config: MetricConfig,
    decay_order: f64,
    table: Option<Arc<TableState>>,
    tail_coefficient: OnceLock<std::result::Result<Extrapolated, (f64, f64)>>,
}

impl PartialEq for RadialConformalMetric {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
    }
}

impl RadialConformalMetric {
    pub fn new(domain: DomainKind, profile: Profile) -> Result<Self> {
        Self::from_config(MetricConfig {
            domain,
            profile,
            decay_order: None,
        })
    }

    pub fn flat(inner_radius: f64) -> Result<Self> {
        Self::new(DomainKind::ExteriorOfSphere { inner_radius }, Profile::Flat)
    }

    pub fn schwarzschild_exterior(mass: f64, inner_radius: f64) -> Result<Self> {
        Self::new(
            DomainKind::ExteriorOfSphere { inner_radius },
            Profile::Schwarzschild { mass },
        )
    }

    pub fn schwarzschild_two_ended(mass: f64) -> Result<Self> {
        Self::new(DomainKind::PuncturedSpace, Profile::Schwarzschild { mass })
    }

    pub fn shells(domain: DomainKind, core: f64, shells: Vec<Shell>) -> Result<Self> {
        Self::new(domain, Profile::ShellSuperposition { core, shells })
    }

    pub fn from_config(config: MetricConfig) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMetric(msg));
        if let DomainKind::ExteriorOfSphere { inner_radius } = config.domain {
            if !(inner_radius > 0.0 && inner_radius.is_finite()) {
                return bad(format!("inner radius must be positive, got {inner_radius}"));
            }
        }
        let decay_order = config.decay_order.unwrap_or(1.0);
        if decay_order <= 0.5 {
            return bad(format!("decay order must exceed 1/2, got {decay_order}"));
        }
        let mut table = None;
        match &config.profile {
            Profile::Flat => {}
            Profile::Schwarzschild { mass } => {
                if !mass.is_finite() {
                    return bad("mass must be finite".into());
                }
                match config.domain {
                    DomainKind::ExteriorOfSphere { inner_radius } => {
                        if 1.0 + mass / (2.0 * inner_radius) <= 0.0 {
                            return bad(format!(
                                "1 + m/(2 r0) must be positive (m = {mass}, r0 = {inner_radius})"
                            ));
                        }
                    }
                    DomainKind::PuncturedSpace => {
                        if *mass <= 0.0 {
                            return bad(format!("two-ended Schwarzschild needs m > 0, got {mass}"));
                        }
                    }
                }
            }
            Profile::ShellSuperposition { core, shells } => {
                if !(*core >= 0.0 && core.is_finite()) {
                    return bad(format!("core coefficient must be nonnegative, got {core}"));
                }
                for s in shells {
                    if !(s.weight >= 0.0 && s.weight.is_finite()) {
                        return bad(format!(
                            "shell weight must be nonnegative, got {}",
                            s.weight
                        ));
                    }
                    if !(s.radius > 0.0 && s.radius.is_finite()) {
                        return bad(format!("shell radius must be positive, got {}", s.radius));
                    }
                    if !(s.width >= 0.0 && s.width < 2.0 * s.radius) {
                        return bad(format!(
                            "shell width must lie in [0, 2 s), got {} for s = {}",
                            s.width, s.radius
                        ));
                    }
                }
            }
            Profile::Tabulated(tab) => {
                table = Some(Arc::new(build_table(tab, &config.domain)?));
            }
        }
        Ok(RadialConformalMetric {
            config,
            decay_order,
            table,
            tail_coefficient: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &MetricConfig {
        &self.config
    }

    pub fn profile(&self) -> &Profile {
        &self.config.profile
    }

    pub fn domain(&self) -> DomainKind {
        self.config.domain
    }

    pub fn decay_order(&self) -> f64 {
        self.decay_order
    }

    pub fn inner_radius(&self) -> f64 {
        self.config.domain.inner_radius()
    }

    pub fn is_punctured(&self) -> bool {
        self.config.domain.is_punctured()
    }

    pub fn is_closed_form(&self) -> bool {
        !matches!(self.config.profile, Profile::Tabulated(_))
    }

    /// Conformal factor at `r`, checking the domain.
    pub fn phi_at(&self, r: f64) -> Result<f64> {
        let r_min = self.inner_radius();
        if r.is_nan() || r < r_min || r <= 0.0 {
            return Err(Error::OutOfDomain { r, r_min });
        }
        Ok(self.phi(r))
    }

    /// Conformal factor without the domain check.
    pub fn phi(&self, r: f64) -> f64 {
        match &self.config.profile {
            Profile::Flat => 1.0,
            Profile::Schwarzschild { mass } => 1.0 + mass / (2.0 * r),
            Profile::ShellSuperposition { .. } => self.r_phi(r) / r,
            Profile::Tabulated(_) => self.table_phi(r).0,
        }
    }

    /// `r * phi(r)`, evaluated without forming `phi` where it blows up.
    pub fn r_phi(&self, r: f64) -> f64 {
        match &self.config.profile {
            Profile::Flat => r,
            Profile::Schwarzschild { mass } => r + 0.5 * mass,
            Profile::ShellSuperposition { core, shells } => {
                r + core
                    + shells
                        .iter()
                        .map(|s| s.weight * s.r_potential(r))
                        .sum::<f64>()
            }
            Profile::Tabulated(_) => {
                let st = self.table.as_ref().expect("tabulated state");
                if r < st.table.knots()[0] && self.is_punctured() {
                    st.core
                } else {
                    r * self.table_phi(r).0
                }
            }
        }
    }

    /// Right derivative `phi'(r)`.
    pub fn dphi_dr(&self, r: f64) -> f64 {
        match &self.config.profile {
            Profile::Flat => 0.0,
            Profile::Schwarzschild { mass } => -mass / (2.0 * r * r),
            Profile::ShellSuperposition { core, shells } => {
                -core / (r * r)
                    + shells
                        .iter()
                        .map(|s| s.weight * s.potential_slope(r))
                        .sum::<f64>()
            }
            Profile::Tabulated(_) => self.table_phi(r).1,
        }
    }

    /// Left derivative `phi'(r-)`.
    pub fn dphi_dr_left(&self, r: f64) -> f64 {
        match &self.config.profile {
            Profile::ShellSuperposition { core, shells } => {
                -core / (r * r)
                    + shells
                        .iter()
                        .map(|s| s.weight * s.potential_slope_left(r))
                        .sum::<f64>()
            }
            Profile::Tabulated(_) => {
                let st = self.table.as_ref().expect("tabulated state");
                let knots = st.table.knots();
                if r > *knots.last().unwrap() || (r <= knots[0] && self.is_punctured()) {
                    self.table_phi(r).1
                } else {
                    st.table.eval_left(r).1
                }
            }
            _ => self.dphi_dr(r),
        }
    }

    fn table_phi(&self, r: f64) -> (f64, f64) {
        let st = self.table.as_ref().expect("tabulated state");
        let knots = st.table.knots();
        let last = *knots.last().unwrap();
        if r > last {
            let (a, b) = st.tail;
            (
                1.0 + a / r + b / (r * r),
                -a / (r * r) - 2.0 * b / (r * r * r),
            )
        } else if r < knots[0] && self.is_punctured() {
            (st.core / r, -st.core / (r * r))
        } else {
            st.table.eval(r)
        }
    }

    /// Radii where `phi` is only Lipschitz (or where tabulation changes
    /// cubic); quadrature splits here.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match &self.config.profile {
            Profile::Flat | Profile::Schwarzschild { .. } => vec![],
            Profile::ShellSuperposition { shells, .. } => {
                shells.iter().flat_map(|s| s.kinks()).collect()
            }
            Profile::Tabulated(t) => t.radii.clone(),
        };
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Characteristic length: the largest of the inner radius, the
    /// outermost closed-form kink and 1.
    pub fn scale(&self) -> f64 {
        let kinks = match &self.config.profile {
            Profile::Tabulated(t) => t.radii[0],
            _ => self.breakpoints().last().copied().unwrap_or(0.0),
        };
        let mass = match &self.config.profile {
            Profile::Schwarzschild { mass } => mass.abs(),
            _ => 0.0,
        };
        self.inner_radius().max(kinks).max(mass).max(1.0)
    }

    /// Last radius beyond which `phi` follows its analytic tail.
    pub fn tail_start(&self) -> f64 {
        match &self.config.profile {
            Profile::Tabulated(t) => *t.radii.last().unwrap(),
            _ => self
                .breakpoints()
                .last()
                .copied()
                .unwrap_or(0.0)
                .max(self.inner_radius()),
        }
    }

    /// `lim r (phi(r) - 1)`, i.e. half the ADM mass.
    pub fn tail_coefficient(&self) -> Result<MassEstimate> {
        let closed = match &self.config.profile {
            Profile::Flat => Some(0.0),
            Profile::Schwarzschild { mass } => Some(0.5 * mass),
            Profile::ShellSuperposition { core, shells } => {
                Some(core + shells.iter().map(|s| s.weight).sum::<f64>())
            }
            Profile::Tabulated(_) => None,
        };
        if let Some(a) = closed {
            return Ok(MassEstimate {
                mass: a,
                error: 0.0,
            });
        }
        let est = self.tail_coefficient.get_or_init(|| self.richardson_tail());
        match est {
            Ok(e) => Ok(MassEstimate {
                mass: e.value,
                error: e.error,
            }),
            Err((estimate, error)) => Err(Error::TailNotConvergent {
                estimate: *estimate,
                error: *error,
            }),
        }
    }

    fn richardson_tail(&self) -> std::result::Result<Extrapolated, (f64, f64)> {
        let st = self.table.as_ref().expect("tabulated state");
        let knots = st.table.knots();
        let values = st.table.values();
        // Knot samples of r(phi - 1) at roughly geometric radii R, R/1.5, ...
        let mut xs = Vec::new();
        let mut fs = Vec::new();
        let mut target = *knots.last().unwrap();
        for (i, &r) in knots.iter().enumerate().rev() {
            if r <= target {
                xs.push(1.0 / r);
                fs.push(r * (values[i] - 1.0));
                target = r / 1.5;
                if xs.len() == 6 {
                    break;
                }
            }
        }
        if xs.len() < 3 {
            return Err((fs.first().copied().unwrap_or(f64::NAN), f64::INFINITY));
        }
        let e = neville_to_zero(&xs, &fs);
        let scale = e.value.abs().max(1.0);
        if e.value.is_finite() && e.error <= 1e-6 * scale {
            Ok(e)
        } else {
            Err((e.value, e.error))
        }
    }

    /// ADM mass `2 lim r (phi - 1)`.
    pub fn adm_mass(&self) -> Result<MassEstimate> {
        self.tail_coefficient().map(|a| MassEstimate {
            mass: 2.0 * a.mass,
            error: 2.0 * a.error,
        })
    }
}

fn build_table(tab: &TabulatedProfile, domain: &DomainKind) -> Result<TableState> {
    let bad = |msg: String| Err(Error::InvalidMetric(msg));
    let n = tab.radii.len();
    if n < 2 || tab.values.len() != n {
        return bad("tabulated profile needs at least two (radius, value) pairs".into());
    }
    if tab.radii.windows(2).any(|w| !(w[1] > w[0])) || !(tab.radii[0] > 0.0) {
        return bad("tabulated radii must be positive and strictly increasing".into());
    }
    if tab.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return bad("tabulated values must be positive".into());
    }
    if let DomainKind::ExteriorOfSphere { inner_radius } = *domain {
        if tab.radii[0] > inner_radius * (1.0 + 1e-12) {
            return bad(format!(
                "table starts at {} but the domain starts at {inner_radius}",
                tab.radii[0]
            ));
        }
    }
    let table = match (&tab.left_slopes, &tab.right_slopes) {
        (Some(l), Some(r)) if l.len() == n && r.len() == n => {
            HermiteTable::new(tab.radii.clone(), tab.values.clone(), l.clone(), r.clone())
        }
        (Some(l), None) if l.len() == n => {
            HermiteTable::new(tab.radii.clone(), tab.values.clone(), l.clone(), l.clone())
        }
        (None, None) => HermiteTable::pchip(tab.radii.clone(), tab.values.clone()),
        _ => return bad("slope arrays must match the radii in length".into()),
    };
    let big_r = tab.radii[n - 1];
    let phi_n = tab.values[n - 1];
    let slope_n = table.left_slopes()[n - 1];
    let b = -big_r.powi(3) * slope_n - big_r * big_r * (phi_n - 1.0);
    let a = big_r * (phi_n - 1.0) - b / big_r;
    let core = tab.radii[0] * tab.values[0];
    Ok(TableState {
        table,
        tail: (a, b),
        core,
    })
}

/// Grid for the concavity test of `r * phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_min: None,
            r_max: None,
            nodes: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// Largest centered second difference of `r * phi` on the grid.
    pub max_second_difference: f64,
    pub location: f64,
    pub min_phi: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub const CURVATURE_TOL_CLOSED_FORM: f64 = 1e-10;
pub const CURVATURE_TOL_TABULATED: f64 = 1e-6;

/// Nonnegative scalar curvature test: `(r phi)'' <= 0` by second
/// differences on a uniform grid, plus positivity of `phi`.
pub fn scalar_curvature_check(metric: &RadialConformalMetric, grid: GridSpec) -> CurvatureReport {
    let scale = metric.scale();
    let r_min = grid.r_min.unwrap_or(if metric.is_punctured() {
        1e-3 * scale
    } else {
        metric.inner_radius()
    });
    let r_max = grid.r_max.unwrap_or(20.0 * scale.max(metric.tail_start()));
    let n = grid.nodes.max(1000);
    let h = (r_max - r_min) / (n - 1) as f64;
    let w: Vec<f64> = (0..n).map(|i| metric.r_phi(r_min + i as f64 * h)).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut location = r_min;
    for i in 1..n - 1 {
        let d2 = w[i + 1] - 2.0 * w[i] + w[i - 1];
        if d2 > worst {
            worst = d2;
            location = r_min + i as f64 * h;
        }
    }
    let min_phi = (0..n)
        .map(|i| {
            let r = r_min + i as f64 * h;
            w[i] / r
        })
        .fold(f64::INFINITY, f64::min);
    let tolerance = if metric.is_closed_form() {
        CURVATURE_TOL_CLOSED_FORM
    } else {
        CURVATURE_TOL_TABULATED
    };
    CurvatureReport {
        max_second_difference: worst,
        location,
        min_phi,
        tolerance,
        pass: worst <= tolerance && min_phi > 0.0,
    }
}

/// Inputs for the seeded fuzz generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomMetricSpec {
    pub seed: u64,
    pub shell_count: usize,
    pub mass_budget: f64,
    pub radius_range: (f64, f64),
    pub domain: DomainKind,
    /// Draw nonzero mollification widths.
    #[serde(default)]
    pub smoothing: bool,
}

/// Seeded superposition of shell potentials with `sum a_i <= budget / 2`.
///
/// Every output is superharmonic by construction. Punctured domains get a
/// positive core coefficient (drawn from the same budget) so that a
/// harmonic function with `u -> 0` at the puncture exists.
pub fn random_admissible(spec: &RandomMetricSpec) -> Result<RadialConformalMetric> {
    if spec.shell_count == 0 {
        return Err(Error::InvalidMetric(
            "shell_count must be at least 1".into(),
        ));
    }
    if !(spec.mass_budget > 0.0) {
        return Err(Error::InvalidMetric("mass_budget must be positive".into()));
    }
    let (lo, hi) = spec.radius_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidMetric(format!(
            "bad radius range [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = 0.5 * spec.mass_budget * rng.gen_range(0.05..=1.0);
    let punctured = spec.domain.is_punctured();
    let mut raw: Vec<f64> = (0..spec.shell_count)
        .map(|_| rng.gen_range(0.0..1.0))
        .collect();
    let core_raw = if punctured {
        rng.gen_range(0.2..1.0)
    } else {
        0.0
    };
    let norm = raw.iter().sum::<f64>() + core_raw;
    for x in raw.iter_mut() {
        *x *= total / norm;
    }
    let core = core_raw * total / norm;
    let shells = raw
        .into_iter()
        .map(|weight| {
            let radius = if hi > lo { rng.gen_range(lo..hi) } else { lo };
            let width = if spec.smoothing {
                rng.gen_range(0.0..0.5) * radius
            } else {
                0.0
            };
            Shell {
                weight,
                radius,
                width,
            }
        })
        .collect();
    RadialConformalMetric::shells(spec.domain, core, shells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(r0: f64) -> DomainKind {
        DomainKind::ExteriorOfSphere { inner_radius: r0 }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(
            RadialConformalMetric::flat(1.0)
                .unwrap()
                .phi_at(3.0)
                .unwrap(),
            1.0
        );
        let s = RadialConformalMetric::schwarzschild_exterior(2.0, 0.5).unwrap();
        assert_eq!(s.phi_at(1.0).unwrap(), 2.0);
        let sh = RadialConformalMetric::shells(ext(0.5), 0.0, vec![Shell::new(1.0, 2.0)]).unwrap();
        assert!((sh.phi_at(1.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((sh.phi_at(4.0).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let s = RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap();
        assert!(matches!(s.phi_at(0.5), Err(Error::OutOfDomain { .. })));
        let p = RadialConformalMetric::schwarzschild_two_ended(2.0).unwrap();
        assert!(matches!(p.phi_at(0.0), Err(Error::OutOfDomain { .. })));
        assert!(p.phi_at(1e-9).is_ok());
    }

    #[test]
    fn schwarzschild_construction_rules() {
        assert!(RadialConformalMetric::schwarzschild_exterior(-0.5, 1.0).is_ok());
        assert!(RadialConformalMetric::schwarzschild_exterior(-2.0, 1.0).is_err());
        assert!(RadialConformalMetric::schwarzschild_exterior(-3.0, 1.0).is_err());
        assert!(RadialConformalMetric::schwarzschild_two_ended(-1.0).is_err());
    }

    #[test]
    fn curvature_examples_pass() {
        for m in [
            RadialConformalMetric::flat(1.0).unwrap(),
            RadialConformalMetric::schwarzschild_exterior(1.0, 1.0).unwrap(),
            RadialConformalMetric::shells(ext(1.0), 0.0, vec![Shell::new(1.0, 2.0)]).unwrap(),
        ] {
            let rep = scalar_curvature_check(&m, GridSpec::default());
            assert!(rep.pass, "{rep:?}");
        }
        let flat = scalar_curvature_check(
            &RadialConformalMetric::flat(1.0).unwrap(),
            GridSpec::default(),
        );
        assert!(flat.max_second_difference.abs() < 1e-12);
    }

    #[test]
    fn convex_table_fails_curvature_check() {
        // r phi = r + 0.1 r^2 on [1, 5]: strictly convex.
        let radii: Vec<f64> = (0..41).map(|i| 1.0 + 0.1 * i as f64).collect();
        let values = radii.iter().map(|r| 1.0 + 0.1 * r).collect();
        let tab = TabulatedProfile {
            radii,
            values,
            left_slopes: None,
            right_slopes: None,
        };
        let m = RadialConformalMetric::new(ext(1.0), Profile::Tabulated(tab)).unwrap();
        let rep = scalar_curvature_check(
            &m,
            GridSpec {
                r_min: Some(1.0),
                r_max: Some(5.0),
                nodes: 1000,
            },
        );
        assert!(!rep.pass);
    }

    #[test]
    fn masses() {
        assert_eq!(
            RadialConformalMetric::flat(1.0)
                .unwrap()
                .adm_mass()
                .unwrap()
                .mass,
            0.0
        );
        let s = RadialConformalMetric::schwarzschild_exterior(2.0, 1.0).unwrap();
        assert_eq!(s.adm_mass().unwrap().mass, 2.0);
        let sh = RadialConformalMetric::shells(ext(1.0), 0.0, vec![Shell::new(1.0, 2.0)]).unwrap();
        assert_eq!(sh.adm_mass().unwrap().mass, 2.0);
    }

    #[test]
    fn tabulated_mass_matches_shell_tail() {
        let sh = RadialConformalMetric::shells(ext(1.0), 0.0, vec![Shell::new(1.0, 2.0)]).unwrap();
        let radii: Vec<f64> = (0..400).map(|i| 1.0 * 1.02f64.powi(i)).collect();
        let values = radii.iter().map(|&r| sh.phi(r)).collect();
        let tab = TabulatedProfile {
            radii,
            values,
            left_slopes: None,
            right_slopes: None,
        };
        let m = RadialConformalMetric::new(ext(1.0), Profile::Tabulated(tab)).unwrap();
        let est = m.adm_mass().unwrap();
        assert!((est.mass - 2.0).abs() < 1e-8, "{est:?}");
    }

    #[test]
    fn non_convergent_tail_is_reported() {
        // r(phi - 1) = sqrt(r) grows without bound.
        let radii: Vec<f64> = (0..200).map(|i| 1.0 * 1.05f64.powi(i)).collect();
        let values = radii.iter().map(|&r| 1.0 + 1.0 / r.sqrt()).collect();
        let tab = TabulatedProfile {
            radii,
            values,
            left_slopes: None,
            right_slopes: None,
        };
        let m = RadialConformalMetric::new(ext(1.0), Profile::Tabulated(tab)).unwrap();
        assert!(matches!(m.adm_mass(), Err(Error::TailNotConvergent { .. })));
    }

    #[test]
    fn mollified_shell_is_continuous_and_superharmonic() {
        let m = RadialConformalMetric::shells(
            ext(0.5),
            0.0,
            vec![Shell {
                weight: 0.7,
                radius: 2.0,
                width: 1.0,
            }],
        )
        .unwrap();
        for r in [1.5, 2.5] {
            let (a, b) = (m.phi(r - 1e-9), m.phi(r + 1e-9));
            assert!((a - b).abs() < 1e-8);
        }
        assert!(scalar_curvature_check(&m, GridSpec::default()).pass);
        assert_eq!(m.adm_mass().unwrap().mass, 1.4);
    }

    #[test]
    fn one_sided_slopes_at_a_sharp_shell() {
        let m = RadialConformalMetric::shells(ext(1.0), 0.0, vec![Shell::new(1.0, 2.0)]).unwrap();
        assert_eq!(m.dphi_dr_left(2.0), 0.0);
        assert_eq!(m.dphi_dr(2.0), -0.25);
        let tab = TabulatedProfile {
            radii: vec![1.0, 2.0, 3.0],
            values: vec![1.5, 1.5, 1.0 + 1.0 / 3.0],
            left_slopes: Some(vec![0.0, 0.0, -1.0 / 9.0]),
            right_slopes: Some(vec![0.0, -0.25, -1.0 / 9.0]),
        };
        let t = RadialConformalMetric::new(ext(1.0), Profile::Tabulated(tab)).unwrap();
        assert_eq!(t.dphi_dr_left(2.0), 0.0);
        assert_eq!(t.dphi_dr(2.0), -0.25);
    }

    #[test]
    fn random_metrics_are_deterministic_and_admissible() {
        let spec = RandomMetricSpec {
            seed: 0,
            shell_count: 1,
            mass_budget: 2.0,
            radius_range: (1.0, 4.0),
            domain: ext(1.0),
            smoothing: false,
        };
        let a = random_admissible(&spec).unwrap();
        let b = random_admissible(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.adm_mass().unwrap().mass <= 2.0);
        assert!(scalar_curvature_check(&a, GridSpec::default()).pass);
    }

    #[test]
    fn vanishing_budget_approaches_flat() {
        let spec = RandomMetricSpec {
            seed: 7,
            shell_count: 3,
            mass_budget: 1e-12,
            radius_range: (1.0, 4.0),
            domain: ext(1.0),
            smoothing: true,
        };
        let m = random_admissible(&spec).unwrap();
        assert!(m.adm_mass().unwrap().mass <= 1e-12);
        for r in [1.0, 2.0, 10.0] {
            assert!((m.phi(r) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn config_round_trip_through_toml() {
        let m = RadialConformalMetric::shells(
            ext(1.25),
            0.0,
            vec![
                Shell::new(0.1 + 0.2, 2.0),
                Shell {
                    weight: 1.0 / 3.0,
                    radius: 3.5,
                    width: 0.5,
                },
            ],
        )
        .unwrap();
        let text = toml::to_string(m.config()).unwrap();
        let back: MetricConfig = toml::from_str(&text).unwrap();
        assert_eq!(&back, m.config());
    }
}
