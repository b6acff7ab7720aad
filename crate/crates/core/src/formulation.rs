//! Quadratic-program encoding of the TSP over position-assignment variables.
//!
//! The assignment vector is laid out position-major: component
//! `(j-1)*n + i` (1-based) holds `x_ij`, "city `i` sits in position `j`".
//! Positions wrap around, so position `0` is position `n` and position
//! `n+1` is position `1`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{DistanceMatrix, Tour};

/// 0-based index of `x_{city,position}` in the assignment vector.
#[inline]
pub fn var_index(n: usize, city: usize, position: usize) -> usize {
    position * n + city
}

/// A 0/1 assignment of cities to tour positions.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentVector {
    n: usize,
    x: DVector<f64>,
}

impl AssignmentVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn as_slice(&self) -> &[f64] {
        self.x.as_slice()
    }

    /// 1-based indices of the nonzero components.
    pub fn support(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(k, _)| k + 1)
            .collect()
    }

    /// Recovers the tour if this is a permutation assignment.
    pub fn decode(&self) -> Option<Tour> {
        let n = self.n;
        let mut order = Vec::with_capacity(n);
        for j in 0..n {
            let mut city = None;
            for i in 0..n {
                match self.x[var_index(n, i, j)] {
                    1.0 => {
                        if city.replace(i).is_some() {
                            return None;
                        }
                    }
                    0.0 => {}
                    _ => return None,
                }
            }
            order.push(city?);
        }
        Tour::new(order).ok()
    }
}

/// `x_ij = 1` iff the tour visits city `i` in position `j`.
pub fn encode_tour(t: &Tour) -> AssignmentVector {
    let n = t.len();
    let mut x = DVector::zeros(n * n);
    for (j, &i) in t.order().iter().enumerate() {
        x[var_index(n, i, j)] = 1.0;
    }
    AssignmentVector { n, x }
}

/// The matrices of `min ½ XᵀAX  s.t.  CX = e, DX = e, X∘X = X`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpFormulation {
    pub n: usize,
    pub a: DMatrix<f64>,
    /// One row per position: sums the cities assigned to it.
    pub c: DMatrix<f64>,
    /// One row per city: sums the positions it occupies.
    pub d: DMatrix<f64>,
    pub e: DVector<f64>,
}

/// Builds `A`, `C`, `D`, `e` for the given distances.
///
/// `A[(j-1)n+i, (j'-1)n+k] = d_ik ([j' = j-1] + [j' = j+1])` with positions
/// taken modulo `n`.
pub fn build_formulation(dist: &DistanceMatrix) -> QpFormulation {
    let n = dist.n();
    let nn = n * n;
    let mut a = DMatrix::zeros(nn, nn);
    for j in 0..n {
        let prev = (j + n - 1) % n;
        let next = (j + 1) % n;
        for i in 0..n {
            let row = var_index(n, i, j);
            for k in 0..n {
                let dik = dist.get(i, k);
                a[(row, var_index(n, k, prev))] += dik;
                a[(row, var_index(n, k, next))] += dik;
            }
        }
    }
    let mut c = DMatrix::zeros(n, nn);
    let mut d = DMatrix::zeros(n, nn);
    for j in 0..n {
        for i in 0..n {
            c[(j, var_index(n, i, j))] = 1.0;
            d[(i, var_index(n, i, j))] = 1.0;
        }
    }
    QpFormulation {
        n,
        a,
        c,
        d,
        e: DVector::from_element(n, 1.0),
    }
}

/// `½ XᵀAX` for any real vector of length `n²`.
pub fn objective(f: &QpFormulation, x: &[f64]) -> Result<f64> {
    let nn = f.n * f.n;
    if x.len() != nn {
        return Err(Error::DimensionMismatch {
            expected: nn,
            found: x.len(),
        });
    }
    let x = DVector::from_column_slice(x);
    Ok(0.5 * x.dot(&(&f.a * &x)))
}

/// Max-norm residuals of the three constraint families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub c_residual: f64,
    pub d_residual: f64,
    pub hadamard_residual: f64,
    pub feasible: bool,
}

pub fn check_feasible(f: &QpFormulation, x: &[f64], tol: f64) -> Result<FeasibilityReport> {
    let nn = f.n * f.n;
    if x.len() != nn {
        return Err(Error::DimensionMismatch {
            expected: nn,
            found: x.len(),
        });
    }
    let x = DVector::from_column_slice(x);
    let c_residual = (&f.c * &x - &f.e).amax();
    let d_residual = (&f.d * &x - &f.e).amax();
    let hadamard_residual = x.iter().map(|v| (v * v - v).abs()).fold(0.0, f64::max);
    Ok(FeasibilityReport {
        c_residual,
        d_residual,
        hadamard_residual,
        feasible: c_residual <= tol && d_residual <= tol && hadamard_residual <= tol,
    })
}
