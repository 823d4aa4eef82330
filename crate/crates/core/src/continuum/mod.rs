//! Brownian (Newtonian) capacity of unions of boxes.

pub mod bem;
pub mod compare;
pub mod panels;
pub mod sphere;
pub mod wos;

pub use bem::{brownian_capacity, brownian_capacity_with_error, panel_system, panel_system_with_symmetry, BemConfig, CapacityEstimate, PanelSystem};
pub use compare::{collection_compare, discrete_continuum_compare, CollectionReport, CompareReport};
pub use panels::{kernel_constant, Panel, RectPanel, TrianglePanel};
pub use sphere::{ball_capacity, icosphere};
pub use wos::{wos_capacity, wos_capacity_target, Ball, BoxUnion, DistanceTarget, WosConfig, WosEstimate};
