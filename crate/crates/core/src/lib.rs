//! One-dimensional cohesive phase-field fracture laboratory.

pub mod cohesive;
pub mod critical;
pub mod experiments;
pub mod io;
pub mod law;
pub mod numerics;
pub mod profile;
pub mod real;
pub mod sharp;

pub use real::Real;

pub type MaterialLaw = law::MaterialLaw<f64>;
pub type RegularizedLaw = law::RegularizedLaw<f64>;
pub type CohesiveLaw = cohesive::CohesiveLaw<f64>;
pub type SbvFunction = sharp::SbvFunction<f64>;
pub type SharpCriticalPoint = sharp::SharpCriticalPoint<f64>;
pub use critical::{CriticalPointPair, ShootingProblem};
