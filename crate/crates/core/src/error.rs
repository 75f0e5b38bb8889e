use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0:?} lies outside the closed half-ball")]
    OutsideDomain([f64; 4]),

    #[error("non-finite integrand value {value} at node {node:?}")]
    NonFinite { node: [f64; 4], value: f64 },

    #[error("quadrature grid is for region {grid:?}, not {requested:?}")]
    RegionMismatch {
        grid: crate::geometry::Region,
        requested: crate::geometry::Region,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coefficient sequence does not decay (|b_N| = {last:e}, |b_N/2| = {mid:e})")]
    NonDecaying { last: f64, mid: f64 },

    #[error("point is inside the corner exclusion band (phi distance {distance:e} < delta {delta:e})")]
    CornerBand { distance: f64, delta: f64 },

    #[error("stencil leaves the domain at {0:?}")]
    StencilOutside([f64; 4]),

    #[error("boundary data constraint {name} violated: measured {measured}, expected {expected}")]
    Constraint {
        name: &'static str,
        measured: f64,
        expected: f64,
    },

    #[error("series tail mass {0:e} above the mode cap exceeds tolerance")]
    TailMass(f64),

    #[error("not a Lorentz matrix: {0}")]
    NotLorentz(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;
