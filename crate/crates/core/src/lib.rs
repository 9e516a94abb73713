//! Boundary-integral solvers for the conductivity problem with two nearly
//! touching disks of extreme conductivity.
//!
//! The exterior potential `u` equals a harmonic background `H` at infinity
//! and satisfies either `u = const` (perfect conductor) or `∂u/∂ν = 0`
//! (insulator) on each disk boundary. Two integral formulations are
//! available: the standard single layer representation and an augmented one
//! that adds the explicit singular function carrying the `ε^{-1/2}`
//! gradient blow-up, so the remaining densities stay smooth as the gap
//! closes. A method-of-images series provides an independent reference.

pub mod background;
pub mod error;
pub mod geometry;
pub mod images;
pub mod layer;
pub mod singular;
pub mod solver;

pub use background::{HarmonicPolynomial, HarmonicTerm};
pub use error::{Error, Result};
pub use geometry::{Disk, DiskId, TwoDiskConfig, Vec2};
pub use layer::{BoundaryDensity, BoundaryGrid, CrossQuadrature, NodeLayout};
pub use singular::StressIntensity;
pub use solver::{AssembledSystem, Conductivity, Discretization, Mode, SolutionField, SolveReport};
