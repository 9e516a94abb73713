use thiserror::Error;

use crate::geometry::Vec2;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("disk radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("point ({}, {}) coincides with the inversion pole", .0.x, .0.y)]
    InversionPole(Vec2),

    #[error("disks overlap or touch: center distance {distance} <= r1 + r2 = {radii}")]
    Overlapping { distance: f64, radii: f64 },

    #[error("gap {eps} is below the resolvable threshold {threshold}")]
    DegenerateGap { eps: f64, threshold: f64 },

    #[error("fixed-point residual {residual} exceeds {tolerance}")]
    FixedPointResidual { residual: f64, tolerance: f64 },

    #[error("evaluation at a singular point ({}, {})", .0.x, .0.y)]
    Pole(Vec2),

    #[error("point is not on boundary of disk {disk}: distance to circle {distance}")]
    NotOnBoundary { disk: usize, distance: f64 },

    #[error("target at distance {distance} from a source circle, inside the quadrature margin {margin}")]
    NearBoundary { distance: f64, margin: f64 },

    #[error("point lies inside disk {0}")]
    InsideDisk(usize),

    #[error("invalid harmonic polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("matrix is numerically singular (sigma_min = {sigma_min:e})")]
    Singular { sigma_min: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("boundary sample set is empty")]
    EmptySamples,

    #[error("boundary samples have zero total weight")]
    ZeroWeight,

    #[error("reference flux has zero norm on boundary {0}")]
    ZeroReference(usize),
}
