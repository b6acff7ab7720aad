use thiserror::Error;

/// Errors raised by instance validation, the matrix builders and the dual machinery.
///
/// City and position indices carried by the variants are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("instance has {n} cities; at least 3 are required (n >= 3)")]
    TooFewCities { n: usize },

    #[error("distance matrix is not square: row {row} has {len} entries, expected {n}")]
    NotSquare { n: usize, row: usize, len: usize },

    #[error("distance entry ({i},{j}) is not finite")]
    NonFiniteDistance { i: usize, j: usize },

    #[error("distance matrix is asymmetric at ({i},{j}): {dij} != {dji}")]
    AsymmetricMatrix {
        i: usize,
        j: usize,
        dij: f64,
        dji: f64,
    },

    #[error("distance ({i},{j}) is negative: {value}")]
    NegativeDistance { i: usize, j: usize, value: f64 },

    #[error("diagonal entry ({i},{i}) is nonzero: {value}")]
    NonzeroDiagonal { i: usize, value: f64 },

    #[error("triangle inequality violated at ({i},{j}) via {k}: {dij} > {dik} + {dkj}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        dij: f64,
        dik: f64,
        dkj: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("exhaustive enumeration is limited to n <= {max}, got n = {n}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("tour must visit city 1 in position 1, found city {first}")]
    TourDoesNotFixCityOne { first: usize },

    #[error("multipliers are not dual feasible: smallest eigenvalue {min_eig:e} is not above the tolerance")]
    NotDualFeasible { min_eig: f64 },

    #[error("ascent start is not dual feasible: smallest eigenvalue {min_eig:e}")]
    StartNotDualFeasible { min_eig: f64 },

    #[error("target vector is not a feasible binary assignment: {0}")]
    InfeasibleTarget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
