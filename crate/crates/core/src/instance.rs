//! Distance matrices, tours and the exhaustive enumeration oracle.
//!
//! Everything downstream (the quadratic encoding, the reduced problem, the
//! dual bounds) is checked against [`brute_force_optimum`], so this module
//! deliberately depends on nothing else in the crate.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest instance the enumeration oracle accepts.
pub const MAX_ORACLE_CITIES: usize = 10;

/// Relative slack applied to the triangle inequality so that exactly
/// collinear Euclidean points are not rejected over a rounding ulp.
const TRIANGLE_SLACK: f64 = 1e-12;

/// A validated symmetric, nonnegative, zero-diagonal distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    metric: bool,
}

impl DistanceMatrix {
    /// Validates a matrix given as rows. See [`validate_distance_matrix`].
    pub fn from_rows(rows: &[Vec<f64>], metric: bool) -> Result<Self> {
        let n = rows.len();
        if n < 3 {
            return Err(Error::TooFewCities { n });
        }
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    n,
                    row: r + 1,
                    len: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(n, entries, metric)
    }

    /// Validates a row-major `n * n` buffer.
    pub fn from_row_major(n: usize, entries: Vec<f64>, metric: bool) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooFewCities { n });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let m = Self { n, entries, metric };
        m.check_structure()?;
        if metric {
            if let Some(err) = m.triangle_violation() {
                return Err(err);
            }
        }
        Ok(m)
    }

    fn check_structure(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFiniteDistance { i: i + 1, j: j + 1 });
                }
            }
        }
        for i in 0..n {
            let v = self.get(i, i);
            if v != 0.0 {
                return Err(Error::NonzeroDiagonal { i: i + 1, value: v });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if v < 0.0 {
                    return Err(Error::NegativeDistance {
                        i: i + 1,
                        j: j + 1,
                        value: v,
                    });
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (dij, dji) = (self.get(i, j), self.get(j, i));
                if dij != dji {
                    return Err(Error::AsymmetricMatrix {
                        i: i + 1,
                        j: j + 1,
                        dij,
                        dji,
                    });
                }
            }
        }
        Ok(())
    }

    /// First violated triangle inequality over pairwise-distinct `i, j, k`, if any.
    pub fn triangle_violation(&self) -> Option<Error> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let (dij, dik, dkj) = (self.get(i, j), self.get(i, k), self.get(k, j));
                    let bound = dik + dkj;
                    if dij > bound + TRIANGLE_SLACK * bound.max(1.0) {
                        return Some(Error::TriangleViolation {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            dij,
                            dik,
                            dkj,
                        });
                    }
                }
            }
        }
        None
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the triangle inequality was enforced at construction.
    pub fn is_metric(&self) -> bool {
        self.metric
    }

    /// Distance between cities `i` and `j` (0-based).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row_major(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// Distances from city 1 to cities 2..n.
    pub fn first_row_tail(&self) -> Vec<f64> {
        (1..self.n).map(|j| self.get(0, j)).collect()
    }

    /// Trailing principal submatrix on cities 2..n, row-major.
    pub fn trailing_block(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity((self.n - 1) * (self.n - 1));
        for i in 1..self.n {
            for j in 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Largest entry.
    pub fn max_distance(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let entries = self.entries.iter().map(|v| v * factor).collect();
        Self::from_row_major(self.n, entries, self.metric)
    }
}

/// Validates a square matrix of distances.
///
/// Checks finiteness, zero diagonal, nonnegativity and symmetry, and the
/// triangle inequality when `metric` is set. Errors name the offending
/// entry with 1-based indices.
pub fn validate_distance_matrix(entries: &[Vec<f64>], metric: bool) -> Result<DistanceMatrix> {
    DistanceMatrix::from_rows(entries, metric)
}

/// A closed tour: `order[j]` is the (0-based) city visited in position `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tour {
    order: Vec<usize>,
}

impl Tour {
    /// Builds a tour from 0-based city indices.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &c in &order {
            if c >= n {
                return Err(Error::InvalidTour(format!(
                    "city {} out of range 1..={n}",
                    c + 1
                )));
            }
            if seen[c] {
                return Err(Error::InvalidTour(format!("city {} repeated", c + 1)));
            }
            seen[c] = true;
        }
        Ok(Self { order })
    }

    /// Builds a tour from 1-based city labels, e.g. `[1, 2, 3, 4]`.
    pub fn from_cities(cities: &[usize]) -> Result<Self> {
        if cities.contains(&0) {
            return Err(Error::InvalidTour("city labels are 1-based".into()));
        }
        Self::new(cities.iter().map(|c| c - 1).collect())
    }

    /// The tour `1, 2, ..., n`.
    pub fn identity(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based city order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based city labels.
    pub fn cities(&self) -> Vec<usize> {
        self.order.iter().map(|c| c + 1).collect()
    }

    /// Rotates city 1 to the front and picks the direction whose second
    /// city has the smaller index.
    pub fn canonical(&self) -> Self {
        let n = self.order.len();
        let start = self.order.iter().position(|&c| c == 0).unwrap_or(0);
        let mut order: Vec<usize> = (0..n).map(|k| self.order[(start + k) % n]).collect();
        if n > 2 && order[1] > order[n - 1] {
            order[1..].reverse();
        }
        Self { order }
    }
}

impl fmt::Display for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.order.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c + 1)?;
        }
        write!(f, ")")
    }
}

impl Serialize for Tour {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.cities().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tour {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cities = Vec::<usize>::deserialize(d)?;
        Tour::from_cities(&cities).map_err(serde::de::Error::custom)
    }
}

/// Length of the closed tour, including the edge back to the start.
pub fn tour_length(d: &DistanceMatrix, t: &Tour) -> Result<f64> {
    let n = d.n();
    if t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: t.len(),
        });
    }
    let o = t.order();
    Ok((0..n).map(|j| d.get(o[j], o[(j + 1) % n])).sum())
}

/// Result of exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_tour: Tour,
    pub best_length: f64,
    /// Length of every canonical tour.
    pub all_lengths: BTreeMap<Tour, f64>,
}

/// Enumerates every tour and returns the shortest.
///
/// With `fix_first` only the `(n-1)!` orders starting at city 1 are visited,
/// otherwise all `n!`. Each tour is canonicalized before it is recorded, and
/// its length is evaluated on the canonical order so that equal tours get
/// bit-identical lengths. Ties go to the lexicographically smallest tour.
pub fn brute_force_optimum(d: &DistanceMatrix, fix_first: bool) -> Result<OracleResult> {
    let n = d.n();
    if n > MAX_ORACLE_CITIES {
        return Err(Error::InstanceTooLarge {
            n,
            max: MAX_ORACLE_CITIES,
        });
    }
    let mut all_lengths = BTreeMap::new();
    let mut perm: Vec<usize> = (0..n).collect();
    let fixed = usize::from(fix_first);
    loop {
        let t = Tour {
            order: perm.clone(),
        }
        .canonical();
        if let std::collections::btree_map::Entry::Vacant(slot) = all_lengths.entry(t) {
            let len = tour_length(d, slot.key())?;
            slot.insert(len);
        }
        if !next_permutation(&mut perm[fixed..]) {
            break;
        }
    }
    let (best_tour, best_length) = all_lengths
        .iter()
        .fold(None::<(&Tour, f64)>, |best, (t, &len)| match best {
            Some((_, b)) if b <= len => best,
            _ => Some((t, len)),
        })
        .map(|(t, l)| (t.clone(), l))
        .expect("at least one tour");
    Ok(OracleResult {
        best_tour,
        best_length,
        all_lengths,
    })
}

/// Advances `xs` to the next lexicographic permutation; false once wrapped.
fn next_permutation(xs: &mut [usize]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let Some(i) = (0..xs.len() - 1).rev().find(|&i| xs[i] < xs[i + 1]) else {
        xs.reverse();
        return false;
    };
    let j = (i + 1..xs.len()).rev().find(|&j| xs[j] > xs[i]).unwrap();
    xs.swap(i, j);
    xs[i + 1..].reverse();
    true
}

/// `n` points drawn uniformly from the unit square with a ChaCha8 stream
/// seeded from `seed`, and their pairwise Euclidean distances.
pub fn random_euclidean_instance(n: usize, seed: u64) -> Result<(DistanceMatrix, Vec<[f64; 2]>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    let d = distances_from_points(&points, true)?;
    Ok((d, points))
}

/// Pairwise Euclidean distance matrix of planar points.
pub fn distances_from_points(points: &[[f64; 2]], metric: bool) -> Result<DistanceMatrix> {
    let n = points.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    DistanceMatrix::from_row_major(n, entries, metric)
}
