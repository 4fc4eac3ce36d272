//! Generic numerical building blocks: quadrature, scalar root finding and an
//! embedded Runge–Kutta integrator.

pub mod ode;
pub mod quadrature;
pub mod roots;

pub use ode::{Direction, EventSpec, OdeError, OdeOptions, OdeOutcome, Step};
pub use quadrature::{gauss_legendre, integrate, Estimate, QuadError, QuadOptions};
pub use roots::{bisect, brent, golden_section_min, RootError};
