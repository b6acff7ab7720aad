//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use tsp_dual::dual::{dual_feasible, DualPoint};
use tsp_dual::instance::{validate_distance_matrix, DistanceMatrix, Tour};
use tsp_dual::reduction::ReducedProblem;

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

/// Four cities with six distinct distances, so every block entry is traceable.
pub fn distinct_four() -> DistanceMatrix {
    validate_distance_matrix(
        &[
            vec![0.0, 2.0, 3.0, 5.0],
            vec![2.0, 0.0, 7.0, 11.0],
            vec![3.0, 7.0, 0.0, 13.0],
            vec![5.0, 11.0, 13.0, 0.0],
        ],
        false,
    )
    .unwrap()
}

/// Every ordering of `0..n`, rotations and reversals included.
pub fn all_tours(n: usize) -> Vec<Tour> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Tour>) {
        if prefix.len() == used.len() {
            out.push(Tour::new(prefix.clone()).unwrap());
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                prefix.push(c);
                rec(prefix, used, out);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Diagonally dominant start plus Gaussian noise, redrawn until strictly
/// inside `S⁺` with more than `min_eig` to spare.
pub fn sample_feasible(
    r: &ReducedProblem,
    rng: &mut ChaCha8Rng,
    sigma: f64,
    min_eig: f64,
) -> DualPoint {
    let noise = Normal::new(0.0, sigma).unwrap();
    let base = DualPoint::diagonally_dominant(r);
    loop {
        let p = DualPoint {
            lambda: base.lambda.iter().map(|v| v + noise.sample(rng)).collect(),
            mu: base.mu.iter().map(|v| v + noise.sample(rng)).collect(),
        };
        let f = dual_feasible(r, &p).unwrap();
        if f.in_s_plus && f.min_eig > min_eig {
            return p;
        }
    }
}

/// Central differences of `g` in every `λ` then every `μ` coordinate.
pub fn central_difference(g: impl Fn(&DualPoint) -> f64, p: &DualPoint, h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.lambda.len() + p.mu.len());
    for k in 0..p.lambda.len() {
        let (mut a, mut b) = (p.clone(), p.clone());
        a.lambda[k] += h;
        b.lambda[k] -= h;
        out.push((g(&a) - g(&b)) / (2.0 * h));
    }
    for k in 0..p.mu.len() {
        let (mut a, mut b) = (p.clone(), p.clone());
        a.mu[k] += h;
        b.mu[k] -= h;
        out.push((g(&a) - g(&b)) / (2.0 * h));
    }
    out
}

/// `‖fd − analytic‖∞ / ‖analytic‖∞`.
pub fn relative_error(fd: &[f64], analytic: &[f64]) -> f64 {
    let diff = fd
        .iter()
        .zip(analytic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = analytic.iter().map(|v| v.abs()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}
