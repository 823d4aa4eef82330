//! Random interlacements on Z^d with discrete and Brownian potential theory.

pub mod coarse;
pub mod continuum;
pub mod error;
pub mod fsolver;
pub mod harness;
pub mod interlacement;
pub mod lattice;
pub mod linalg;
pub mod potential;
pub mod quad;
pub mod scalar;
pub mod shape;
pub mod stats;

pub use error::{Error, Result};
pub use lattice::{LatticeBox, LatticePoint, LatticeSet, RealBox};
pub use scalar::Scalar;
pub use shape::GridShape;

/// Default real type.
pub type Real = f64;
/// Exact rational type used for box geometry.
pub type Rational = lattice::Rational;
/// Equilibrium measure over [`Real`].
pub type EquilibriumMeasure = potential::EquilibriumMeasure<Real>;
/// Collocation system over [`Real`].
pub type PanelSystem = continuum::PanelSystem<Real>;
