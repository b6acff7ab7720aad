//! Quadratic encoding of the symmetric traveling salesman problem, its
//! reduction with city 1 fixed, the classic Lagrangian dual of the reduced
//! problem, and a numerical search for data that would make that dual exact.

pub mod cli;
pub mod dual;
pub mod error;
pub mod formulation;
pub mod instance;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod reduction;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod fixtures {
    use crate::formulation::build_formulation;
    use crate::instance::{validate_distance_matrix, DistanceMatrix};
    use crate::reduction::{reduce, ReducedProblem};

    /// Corners of the unit square, visited in order by the optimal tour.
    pub fn unit_square() -> DistanceMatrix {
        let s = 2f64.sqrt();
        validate_distance_matrix(
            &[
                vec![0.0, 1.0, s, 1.0],
                vec![1.0, 0.0, 1.0, s],
                vec![s, 1.0, 0.0, 1.0],
                vec![1.0, s, 1.0, 0.0],
            ],
            true,
        )
        .unwrap()
    }

    pub fn unit_square_reduced() -> ReducedProblem {
        reduce(&build_formulation(&unit_square()))
    }
}
