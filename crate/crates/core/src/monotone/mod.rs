//! Monotone level quantities, their conformal-gauge representations, and
//! the verifiers that test them on solved profiles.

pub mod conformal;
pub mod gauge;
pub mod limits;
pub mod quantities;
pub mod verify;

pub use conformal::{
    conformal_transform, shift_transform, ConformalGauge, IdentityDefects, ShiftGauge,
};
pub use gauge::{gauge_closed, gauge_ode_reconstruct, gauge_profile, GaugeProfile};
pub use limits::{
    limit_l_over_t, limit_l_over_t_with, near_one_limit, ExtrapolationSpec, LimitEstimate,
    LimitValue, NearOneLimit,
};
pub use quantities::{
    b_k, b_k_of, default_k_grid, k0_and_psi, log_k_grid, psi, q_of, s_of, sup_cross_check,
    sup_defect, BkValue, Branch, KOptimum, KStar,
};
pub use verify::{
    boundary_check, default_t_grid, lower_bounds_from_levels, mass_capacity_bound, remark_q_check,
    s_curve, verify_lower_bounds, verify_q_monotone, verify_s_monotone, BoundaryCheck,
    LowerBoundReport, MonotoneCurve, Violation, ViolationKind, DEFAULT_TOL_MONO,
};
