//! Discrete potential theory on Z^d.

pub mod equilibrium;
pub mod fft;
pub mod green;
pub mod hitting;
pub mod relative;

pub use equilibrium::{capacity, equilibrium_measure, green_matrix, EquilibriumMeasure, SolveMethod, SolverConfig};
pub use green::{green, GreenConfig, GreenTable};
pub use hitting::{hitting_field, hitting_from_measure, hitting_probability, HittingField, HittingMethod};
pub use relative::{relative_equilibrium, relative_equilibrium_check, RelativeEquilibriumReport};
