//! Fixing city 1 in position 1 and eliminating its variables.
//!
//! The full vector `X` is permuted to `X̂ = (X₁; Y)`, where `X₁` collects
//! the `2n-1` variables touching city 1 or position 1 and `Y` the remaining
//! `(n-1)²`, listed position-major over positions `2..n` and cities `2..n`.
//! With `X₁ = (1, 0, …, 0)` the quadratic objective becomes
//! `½ YᵀA_rY − b_rᵀY + c₀`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::formulation::{var_index, QpFormulation};
use crate::instance::{DistanceMatrix, Tour};

/// Bookkeeping between full indices `(j-1)n + i` and reduced indices.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub n: usize,
    /// `perm[p]` is the full index stored at slot `p` of `X̂`.
    perm: Vec<usize>,
    /// Reduced index of each full index, `None` for head variables.
    to_reduced: Vec<Option<usize>>,
}

impl IndexMap {
    pub fn new(n: usize) -> Self {
        let mut perm = Vec::with_capacity(n * n);
        // x_11, x_21, ..., x_n1, then x_12, ..., x_1n
        perm.extend((0..n).map(|i| var_index(n, i, 0)));
        perm.extend((1..n).map(|j| var_index(n, 0, j)));
        for j in 1..n {
            for i in 1..n {
                perm.push(var_index(n, i, j));
            }
        }
        let head = 2 * n - 1;
        let mut to_reduced = vec![None; n * n];
        for (slot, &full) in perm.iter().enumerate().skip(head) {
            to_reduced[full] = Some(slot - head);
        }
        Self {
            n,
            perm,
            to_reduced,
        }
    }

    /// Number of head variables, `2n - 1`.
    pub fn head_len(&self) -> usize {
        2 * self.n - 1
    }

    /// Number of reduced variables, `(n - 1)²`.
    pub fn reduced_len(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    /// Full indices forming `X₁`, in order.
    pub fn head(&self) -> &[usize] {
        &self.perm[..self.head_len()]
    }

    /// Full index for each slot of `X̂`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// 0-based reduced index of `x_{city,position}` (both 0-based, both ≥ 1).
    pub fn reduced_index(&self, city: usize, position: usize) -> Option<usize> {
        self.to_reduced[var_index(self.n, city, position)]
    }

    /// `X̂ = PᵀX`.
    pub fn permute_vector(&self, x: &[f64]) -> Vec<f64> {
        self.perm.iter().map(|&k| x[k]).collect()
    }

    /// `Â = PᵀAP`.
    pub fn permute_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.perm.len();
        DMatrix::from_fn(m, m, |r, c| a[(self.perm[r], self.perm[c])])
    }

    /// Reads the tour off a binary reduced vector; `None` unless it is a
    /// permutation assignment.
    pub fn extract_tour(&self, y: &[f64], tol: f64) -> Option<Tour> {
        let n = self.n;
        if y.len() != self.reduced_len() {
            return None;
        }
        let mut order = vec![0];
        for j in 1..n {
            let mut city = None;
            for i in 1..n {
                let v = y[self.reduced_index(i, j)?];
                if (v - 1.0).abs() <= tol {
                    if city.replace(i).is_some() {
                        return None;
                    }
                } else if v.abs() > tol {
                    return None;
                }
            }
            order.push(city?);
        }
        Tour::new(order).ok()
    }
}

/// `min ½ YᵀA_rY − b_rᵀY  s.t.  E_rY = e, Y∘Y = Y`, plus the constant `c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    pub n: usize,
    pub a_r: DMatrix<f64>,
    pub b_r: DVector<f64>,
    /// Position rows (`n-1`) stacked over city rows for cities `2..n-1`.
    pub e_r: DMatrix<f64>,
    pub c0: f64,
    pub map: IndexMap,
}

impl ReducedProblem {
    /// Length of `Y`.
    pub fn dim(&self) -> usize {
        self.a_r.nrows()
    }

    /// Number of equality constraints, `2n - 3`.
    pub fn n_constraints(&self) -> usize {
        self.e_r.nrows()
    }
}

/// Permutes, partitions and eliminates the head block.
pub fn reduce(f: &QpFormulation) -> ReducedProblem {
    let n = f.n;
    let map = IndexMap::new(n);
    let h = map.head_len();
    let m = map.reduced_len();
    let a_hat = map.permute_matrix(&f.a);

    let a11 = a_hat.view((0, 0), (h, h));
    let a12 = a_hat.view((0, h), (h, m));
    let a21 = a_hat.view((h, 0), (m, h));
    let a22 = a_hat.view((h, h), (m, m));

    let mut x1 = DVector::zeros(h);
    x1[0] = 1.0;

    let b_r = -0.5 * (a21 * &x1 + a12.transpose() * &x1);
    let c0 = 0.5 * x1.dot(&(a11 * &x1));

    ReducedProblem {
        n,
        a_r: a22.into_owned(),
        b_r,
        e_r: reduced_constraints(&map),
        c0,
        map,
    }
}

fn reduced_constraints(map: &IndexMap) -> DMatrix<f64> {
    let n = map.n;
    let mut e = DMatrix::zeros(2 * n - 3, map.reduced_len());
    for j in 1..n {
        for i in 1..n {
            let r = map.reduced_index(i, j).unwrap();
            e[(j - 1, r)] = 1.0;
            // the row for city n is linearly dependent and is dropped
            if i < n - 1 {
                e[(n - 1 + i - 1, r)] = 1.0;
            }
        }
    }
    e
}

/// Reduced vector of a tour that starts at city 1.
pub fn embed_tour(map: &IndexMap, t: &Tour) -> Result<DVector<f64>> {
    if t.len() != map.n {
        return Err(Error::DimensionMismatch {
            expected: map.n,
            found: t.len(),
        });
    }
    let order = t.order();
    if order[0] != 0 {
        return Err(Error::TourDoesNotFixCityOne {
            first: order[0] + 1,
        });
    }
    let mut y = DVector::zeros(map.reduced_len());
    for (j, &i) in order.iter().enumerate().skip(1) {
        y[map.reduced_index(i, j).expect("non-head variable")] = 1.0;
    }
    Ok(y)
}

/// `½ YᵀA_rY − b_rᵀY`.
pub fn reduced_objective(r: &ReducedProblem, y: &[f64]) -> Result<f64> {
    if y.len() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            found: y.len(),
        });
    }
    let y = DVector::from_column_slice(y);
    Ok(0.5 * y.dot(&(&r.a_r * &y)) - r.b_r.dot(&y))
}

/// The 5×9 constraint matrix of the four-city reduced problem.
pub const FOUR_CITY_E_R: [[f64; 9]; 5] = [
    [1., 1., 1., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 1., 1., 1., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 1., 1., 1.],
    [1., 0., 0., 1., 0., 0., 1., 0., 0.],
    [0., 1., 0., 0., 1., 0., 0., 1., 0.],
];

/// Closed-form four-city blocks: `A_r = (0 d₂ 0; d₂ 0 d₂; 0 d₂ 0)` and
/// `b_r = (−d₁; 0; −d₁)`, with `d₁` the distances from city 1 and `d₂` the
/// distances among cities 2..4.
pub fn four_city_blocks(dist: &DistanceMatrix) -> Option<(DMatrix<f64>, DVector<f64>)> {
    if dist.n() != 4 {
        return None;
    }
    let d1 = DVector::from_vec(dist.first_row_tail());
    let d2 = DMatrix::from_row_slice(3, 3, &dist.trailing_block());
    let mut a = DMatrix::zeros(9, 9);
    for (bi, bj) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
        a.view_mut((3 * bi, 3 * bj), (3, 3)).copy_from(&d2);
    }
    let mut b = DVector::zeros(9);
    b.rows_mut(0, 3).copy_from(&(-&d1));
    b.rows_mut(6, 3).copy_from(&(-&d1));
    Some((a, b))
}

/// Exact elementwise match of a four-city reduction with the closed-form
/// blocks and [`FOUR_CITY_E_R`]; `None` for other sizes.
pub fn matches_four_city_layout(r: &ReducedProblem, dist: &DistanceMatrix) -> Option<bool> {
    let (a, b) = four_city_blocks(dist)?;
    let e = DMatrix::from_fn(5, 9, |i, j| FOUR_CITY_E_R[i][j]);
    Some(r.a_r == a && r.b_r == b && r.e_r == e)
}
