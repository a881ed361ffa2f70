//! Numerical building blocks shared by the radial and 3D engines.

pub mod extrapolate;
pub mod interp;
pub mod ode;
pub mod quadrature;
