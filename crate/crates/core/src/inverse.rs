//! Inverse feasibility search.
//!
//! Given a target binary `Ȳ`, look for distances `d` and multipliers
//! `(λ, μ)` such that `Ȳ` solves the Lagrangian equation, `A_r + diag μ` is
//! positive definite, `Ȳ`'s tour beats every other tour and `d` is a
//! Euclidean-style distance matrix. Such a point would make `Ȳ` the
//! global minimizer recovered from a dual critical point.
//!
//! Each stationarity row `i` reads `μ_i (Ȳ_i − ½) = b_i − [A_rȲ]_i − [E_rᵀλ]_i`,
//! so `μ` is eliminated in closed form and the search runs over `(d, λ)` only.
//! The smallest eigenvalue is nonsmooth at crossings, so the local refinement
//! is a derivative-free compass search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{assemble, dual_feasible, DualPoint};
use crate::error::{Error, Result};
use crate::formulation::build_formulation;
use crate::instance::{
    brute_force_optimum, distances_from_points, random_euclidean_instance, DistanceMatrix, Tour,
    MAX_ORACLE_CITIES,
};
use crate::linalg::min_eigenvalue;
use crate::reduction::{embed_tour, reduce, IndexMap, ReducedProblem};

/// Margin applied to every strict inequality (positive definiteness,
/// optimality of the target tour, positive distances) when issuing a verdict.
pub const STRICT_MARGIN: f64 = 1e-6;
/// Stationarity residual accepted for a counterexample.
pub const STATIONARITY_TOLERANCE: f64 = 1e-10;
/// Smallest step of the compass search.
pub const STEP_FLOOR: f64 = 1e-9;
/// Side of the box the direct parameterization keeps distances in.
const DIRECT_DISTANCE_BOUND: f64 = std::f64::consts::SQRT_2;

/// `μ` making `(λ, μ)` stationary at `Ȳ` for the problem `r`.
///
/// `μ_i = 2(b_i − [A_rȲ]_i − [E_rᵀλ]_i)` where `Ȳ_i = 1` and the negation
/// where `Ȳ_i = 0`.
pub fn eliminate_mu(r: &ReducedProblem, ybar: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    check_target(r, ybar)?;
    if lambda.len() != r.n_constraints() {
        return Err(Error::DimensionMismatch {
            expected: r.n_constraints(),
            found: lambda.len(),
        });
    }
    let y = nalgebra::DVector::from_column_slice(ybar);
    let l = nalgebra::DVector::from_column_slice(lambda);
    let rhs = &r.b_r - &r.a_r * &y - r.e_r.transpose() * l;
    Ok(rhs
        .iter()
        .zip(ybar)
        .map(|(v, &yi)| if yi == 1.0 { 2.0 * v } else { -2.0 * v })
        .collect())
}

fn check_target(r: &ReducedProblem, ybar: &[f64]) -> Result<()> {
    if ybar.len() != r.dim() {
        return Err(Error::DimensionMismatch {
            expected: r.dim(),
            found: ybar.len(),
        });
    }
    if ybar.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InfeasibleTarget("components must be 0 or 1".into()));
    }
    let y = nalgebra::DVector::from_column_slice(ybar);
    if (&r.e_r * y).iter().any(|&v| v != 1.0) {
        return Err(Error::InfeasibleTarget("E_r Y != e".into()));
    }
    Ok(())
}

/// Max-norm residual of `(A_r + diag μ)Ȳ = b_r + ½μ − E_rᵀλ`.
pub fn stationarity_residual(r: &ReducedProblem, ybar: &[f64], p: &DualPoint) -> Result<f64> {
    let (a, b) = assemble(r, p)?;
    let y = nalgebra::DVector::from_column_slice(ybar);
    Ok((a * y - b).amax())
}

/// Length of every other canonical tour minus the length of `Ȳ`'s tour,
/// in lexicographic tour order.
pub fn optimality_margins(d: &DistanceMatrix, ybar: &[f64]) -> Result<Vec<f64>> {
    let target = target_tour(d.n(), ybar)?;
    let oracle = brute_force_optimum(d, true)?;
    let base = oracle.all_lengths[&target];
    Ok(oracle
        .all_lengths
        .iter()
        .filter(|(t, _)| **t != target)
        .map(|(_, len)| len - base)
        .collect())
}

/// Canonical tour encoded by a binary reduced vector.
pub fn target_tour(n: usize, ybar: &[f64]) -> Result<Tour> {
    IndexMap::new(n)
        .extract_tour(ybar, 0.0)
        .map(|t| t.canonical())
        .ok_or_else(|| Error::InfeasibleTarget("vector does not encode a tour".into()))
}

/// Total shortfall of `d` against positivity (by [`STRICT_MARGIN`]) and the
/// triangle inequality.
pub fn edm_violation(d: &DistanceMatrix) -> f64 {
    let n = d.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if i < j {
                total += (STRICT_MARGIN - d.get(i, j)).max(0.0);
            }
            for k in 0..n {
                if k != i && k != j {
                    total += (d.get(i, j) - d.get(i, k) - d.get(k, j)).max(0.0);
                }
            }
        }
    }
    total
}

/// Everything the search needs to know about one `(d, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub min_eig: f64,
    pub mu: Vec<f64>,
    pub margins: Vec<f64>,
    pub edm_violation: f64,
    pub stationarity_residual: f64,
    /// `min_eig − penalty · (margin shortfall + edm_violation)`.
    pub score: f64,
}

/// Rebuilds the reduced problem from `d`, eliminates `μ` and scores the point.
pub fn feasibility_score(
    d: &DistanceMatrix,
    ybar: &[f64],
    lambda: &[f64],
    penalty: f64,
) -> Result<ScoreReport> {
    let r = reduce(&build_formulation(d));
    let mu = eliminate_mu(&r, ybar, lambda)?;
    let p = DualPoint {
        lambda: lambda.to_vec(),
        mu,
    };
    let (a, _) = assemble(&r, &p)?;
    let min_eig = min_eigenvalue(&a);
    // positive definite forces a positive diagonal
    assert!(
        min_eig <= crate::dual::PD_TOLERANCE || p.mu.iter().all(|&m| m > 0.0),
        "positive definite matrix with a nonpositive diagonal entry"
    );
    let residual = stationarity_residual(&r, ybar, &p)?;
    let margins = optimality_margins(d, ybar)?;
    let edm = edm_violation(d);
    let shortfall: f64 = margins.iter().map(|m| (STRICT_MARGIN - m).max(0.0)).sum();
    Ok(ScoreReport {
        min_eig,
        score: min_eig - penalty * (shortfall + edm),
        mu: p.mu,
        margins,
        edm_violation: edm,
        stationarity_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameterization {
    /// Distances between planar points in the unit square.
    Points,
    /// Free upper-triangular distances with penalized metric violations.
    Direct,
}

/// Search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InverseConfig {
    pub n: usize,
    pub restarts: usize,
    /// Score evaluations allowed per restart.
    pub local_iters: usize,
    /// `λ` starts uniform in `[−L, L]` with `L = lambda_box_factor · max d`.
    pub lambda_box_factor: f64,
    pub seed: u64,
    pub parameterization: Parameterization,
    /// Weight of margin shortfall and metric violations in the score.
    pub penalty: f64,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            n: 4,
            restarts: 1000,
            local_iters: 2000,
            lambda_box_factor: 10.0,
            seed: 0,
            parameterization: Parameterization::Points,
            penalty: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseCandidate {
    pub d: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// `μ` was obtained from [`eliminate_mu`].
    pub derived: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NoFeasiblePointFound,
    FeasibleCounterexample,
}

/// Independent re-check of a candidate, clause by clause.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayCheck {
    pub metric: bool,
    pub positive_distances: bool,
    pub positive_definite: bool,
    pub min_eig: f64,
    pub stationary: bool,
    pub stationarity_residual: f64,
    pub target_feasible: bool,
    pub target_optimal: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InverseSearchReport {
    pub config: InverseConfig,
    pub target: Vec<f64>,
    pub target_tour: Tour,
    pub best: Option<InverseCandidate>,
    pub best_restart: Option<usize>,
    pub best_score: Option<f64>,
    pub best_min_eig: Option<f64>,
    pub stationarity_residual: Option<f64>,
    pub optimality_margins: Vec<f64>,
    pub edm_violations: Option<f64>,
    /// Largest smallest-eigenvalue met at any evaluated point with no
    /// margin or metric shortfall.
    pub max_clean_min_eig: Option<f64>,
    pub restart_scores: Option<ScoreSummary>,
    pub evaluations: u64,
    pub restarts: usize,
    pub verdict: Verdict,
    pub seed: u64,
    pub replay: Option<ReplayCheck>,
}

/// Whether the clauses jointly make a counterexample.
pub fn classify(min_eig: f64, margins: &[f64], edm: f64, residual: f64) -> Verdict {
    if min_eig > STRICT_MARGIN
        && margins.iter().all(|&m| m > STRICT_MARGIN)
        && edm == 0.0
        && residual <= STATIONARITY_TOLERANCE
    {
        Verdict::FeasibleCounterexample
    } else {
        Verdict::NoFeasiblePointFound
    }
}

/// Re-checks a candidate through validation, the matrix builders, the dual
/// feasibility test and the enumeration oracle.
pub fn replay_candidate(c: &InverseCandidate, ybar: &[f64]) -> Result<ReplayCheck> {
    let plain = DistanceMatrix::from_rows(&c.d, false)?;
    let metric = DistanceMatrix::from_rows(&c.d, true).is_ok();
    let n = plain.n();
    let positive_distances = (0..n).all(|i| (0..n).all(|j| i == j || plain.get(i, j) > 0.0));
    let r = reduce(&build_formulation(&plain));
    let target_feasible = check_target(&r, ybar).is_ok();
    let p = DualPoint {
        lambda: c.lambda.clone(),
        mu: c.mu.clone(),
    };
    let feas = dual_feasible(&r, &p)?;
    let residual = stationarity_residual(&r, ybar, &p)?;
    let stationary = residual <= STATIONARITY_TOLERANCE;
    let target_optimal = target_feasible && {
        let target = target_tour(n, ybar)?;
        let oracle = brute_force_optimum(&plain, true)?;
        let base = oracle.all_lengths[&target];
        oracle
            .all_lengths
            .iter()
            .all(|(t, &len)| *t == target || len > base)
    };
    Ok(ReplayCheck {
        metric,
        positive_distances,
        positive_definite: feas.in_s_plus,
        min_eig: feas.min_eig,
        stationary,
        stationarity_residual: residual,
        target_feasible,
        target_optimal,
        passed: metric
            && positive_distances
            && feas.in_s_plus
            && stationary
            && target_feasible
            && target_optimal,
    })
}

/// Search parameters decoded into an instance.
struct Decoded {
    d: DistanceMatrix,
    points: Option<Vec<[f64; 2]>>,
}

struct Problem<'a> {
    cfg: &'a InverseConfig,
    ybar: &'a [f64],
}

impl Problem<'_> {
    fn n_dist_params(&self) -> usize {
        let n = self.cfg.n;
        match self.cfg.parameterization {
            Parameterization::Points => 2 * n,
            Parameterization::Direct => n * (n - 1) / 2,
        }
    }

    fn lower_upper(&self, k: usize) -> (f64, f64) {
        if k < self.n_dist_params() {
            match self.cfg.parameterization {
                Parameterization::Points => (0.0, 1.0),
                Parameterization::Direct => (0.0, DIRECT_DISTANCE_BOUND),
            }
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        }
    }

    fn decode(&self, x: &[f64]) -> Result<Decoded> {
        let n = self.cfg.n;
        let split = self.n_dist_params();
        match self.cfg.parameterization {
            Parameterization::Points => {
                let points: Vec<[f64; 2]> = x[..split].chunks(2).map(|c| [c[0], c[1]]).collect();
                Ok(Decoded {
                    d: distances_from_points(&points, false)?,
                    points: Some(points),
                })
            }
            Parameterization::Direct => {
                let mut entries = vec![0.0; n * n];
                let mut k = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        entries[i * n + j] = x[k];
                        entries[j * n + i] = x[k];
                        k += 1;
                    }
                }
                Ok(Decoded {
                    d: DistanceMatrix::from_row_major(n, entries, false)?,
                    points: None,
                })
            }
        }
    }

    fn score(&self, x: &[f64]) -> Option<(ScoreReport, Decoded)> {
        let split = self.n_dist_params();
        let dec = self.decode(x).ok()?;
        let rep = feasibility_score(&dec.d, self.ybar, &x[split..], self.cfg.penalty).ok()?;
        Some((rep, dec))
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.cfg.n;
        let (d, points) = random_euclidean_instance(n, rng.gen())?;
        let mut x = Vec::new();
        let mut steps = Vec::new();
        match self.cfg.parameterization {
            Parameterization::Points => {
                x.extend(points.iter().flat_map(|p| p.iter().copied()));
                steps.extend(std::iter::repeat_n(0.25, 2 * n));
            }
            Parameterization::Direct => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        x.push(d.get(i, j));
                    }
                }
                steps.extend(std::iter::repeat_n(0.25, n * (n - 1) / 2));
            }
        }
        let half_width = self.cfg.lambda_box_factor * d.max_distance();
        for _ in 0..(2 * n - 3) {
            x.push(if half_width > 0.0 {
                rng.gen_range(-half_width..=half_width)
            } else {
                0.0
            });
            steps.push((half_width / 4.0).max(0.25));
        }
        Ok((x, steps))
    }
}

/// One compass-search refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalRun {
    pub x: Vec<f64>,
    pub score: f64,
    /// Accepted scores, starting with the initial one.
    pub accepted: Vec<f64>,
    pub evaluations: usize,
}

/// Maximizes `f` by coordinate moves of `±scale·steps[k]`, halving `scale`
/// after a sweep without improvement, until the largest step falls below
/// [`STEP_FLOOR`] or `max_evals` evaluations have been spent. Moves are
/// clamped to `bounds`; `f` returning `None` counts as a rejected move.
pub fn compass_search<F>(
    x0: Vec<f64>,
    steps: &[f64],
    bounds: impl Fn(usize) -> (f64, f64),
    max_evals: usize,
    mut f: F,
) -> Option<LocalRun>
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let mut x = x0;
    let mut best = f(&x)?;
    let mut evaluations = 1;
    let mut accepted = vec![best];
    let largest = steps.iter().copied().fold(0.0, f64::max);
    let mut scale = 1.0;
    while evaluations < max_evals && scale * largest >= STEP_FLOOR {
        let mut improved = false;
        'sweep: for k in 0..x.len() {
            let (lo, hi) = bounds(k);
            for sign in [1.0, -1.0] {
                if evaluations >= max_evals {
                    break 'sweep;
                }
                let moved = (x[k] + sign * scale * steps[k]).clamp(lo, hi);
                if moved == x[k] {
                    continue;
                }
                let old = std::mem::replace(&mut x[k], moved);
                evaluations += 1;
                match f(&x) {
                    Some(s) if s > best => {
                        best = s;
                        accepted.push(s);
                        improved = true;
                        break;
                    }
                    _ => x[k] = old,
                }
            }
        }
        if !improved {
            scale *= 0.5;
        }
    }
    Some(LocalRun {
        x,
        score: best,
        accepted,
        evaluations,
    })
}

struct RestartOutcome {
    index: usize,
    x: Vec<f64>,
    score: f64,
    evaluations: usize,
    max_clean_min_eig: Option<f64>,
}

/// Multistart maximization of [`feasibility_score`] over `(d, λ)`.
///
/// Restart `k` draws from the ChaCha8 stream `k` of `cfg.seed`, so results
/// do not depend on scheduling. The best restart is the highest score, ties
/// going to the lowest index.
pub fn inverse_search(ybar: &[f64], cfg: &InverseConfig) -> Result<InverseSearchReport> {
    let n = cfg.n;
    if n < 3 {
        return Err(Error::TooFewCities { n });
    }
    if n > MAX_ORACLE_CITIES {
        return Err(Error::InstanceTooLarge {
            n,
            max: MAX_ORACLE_CITIES,
        });
    }
    let map = IndexMap::new(n);
    if ybar.len() != map.reduced_len() {
        return Err(Error::DimensionMismatch {
            expected: map.reduced_len(),
            found: ybar.len(),
        });
    }
    let target = target_tour(n, ybar)?;
    let problem = Problem { cfg, ybar };

    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| run_restart(&problem, k))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let best = outcomes
        .iter()
        .fold(None::<&RestartOutcome>, |acc, o| match acc {
            Some(b) if b.score >= o.score => Some(b),
            _ => Some(o),
        });
    let evaluations = outcomes.iter().map(|o| o.evaluations as u64).sum();
    let max_clean_min_eig = outcomes
        .iter()
        .filter_map(|o| o.max_clean_min_eig)
        .reduce(f64::max);
    let restart_scores = (!outcomes.is_empty()).then(|| ScoreSummary {
        min: outcomes
            .iter()
            .map(|o| o.score)
            .fold(f64::INFINITY, f64::min),
        mean: outcomes.iter().map(|o| o.score).sum::<f64>() / outcomes.len() as f64,
        max: outcomes
            .iter()
            .map(|o| o.score)
            .fold(f64::NEG_INFINITY, f64::max),
    });

    let mut report = InverseSearchReport {
        config: cfg.clone(),
        target: ybar.to_vec(),
        target_tour: target,
        best: None,
        best_restart: None,
        best_score: None,
        best_min_eig: None,
        stationarity_residual: None,
        optimality_margins: Vec::new(),
        edm_violations: None,
        max_clean_min_eig,
        restart_scores,
        evaluations,
        restarts: cfg.restarts,
        verdict: Verdict::NoFeasiblePointFound,
        seed: cfg.seed,
        replay: None,
    };
    let Some(best) = best else {
        return Ok(report);
    };
    let (rep, dec) = problem
        .score(&best.x)
        .expect("best point was scored during the search");
    let split = problem.n_dist_params();
    let candidate = InverseCandidate {
        d: dec.d.rows(),
        points: dec.points,
        lambda: best.x[split..].to_vec(),
        mu: rep.mu.clone(),
        derived: true,
    };
    report.verdict = classify(
        rep.min_eig,
        &rep.margins,
        rep.edm_violation,
        rep.stationarity_residual,
    );
    if report.verdict == Verdict::FeasibleCounterexample {
        report.replay = Some(replay_candidate(&candidate, ybar)?);
    }
    report.best = Some(candidate);
    report.best_restart = Some(best.index);
    report.best_score = Some(rep.score);
    report.best_min_eig = Some(rep.min_eig);
    report.stationarity_residual = Some(rep.stationarity_residual);
    report.optimality_margins = rep.margins;
    report.edm_violations = Some(rep.edm_violation);
    Ok(report)
}

fn run_restart(problem: &Problem<'_>, index: usize) -> Result<Option<RestartOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(problem.cfg.seed);
    rng.set_stream(index as u64);
    let (x0, steps) = problem.initial(&mut rng)?;
    let mut max_clean: Option<f64> = None;
    let run = compass_search(
        x0,
        &steps,
        |k| problem.lower_upper(k),
        problem.cfg.local_iters.max(1),
        |x| {
            let (rep, _) = problem.score(x)?;
            if rep.edm_violation == 0.0 && rep.margins.iter().all(|&m| m > STRICT_MARGIN) {
                max_clean = Some(max_clean.map_or(rep.min_eig, |m| m.max(rep.min_eig)));
            }
            Some(rep.score)
        },
    );
    Ok(run.map(|run| RestartOutcome {
        index,
        x: run.x,
        score: run.score,
        evaluations: run.evaluations,
        max_clean_min_eig: max_clean,
    }))
}

/// Reduced vector of the tour `1, 2, ..., n`.
pub fn identity_target(n: usize) -> Result<Vec<f64>> {
    Ok(embed_tour(&IndexMap::new(n), &Tour::identity(n))?
        .as_slice()
        .to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::unit_square;
    use crate::instance::validate_distance_matrix;

    fn distinct_four() -> DistanceMatrix {
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

    #[test]
    fn eliminated_rows_match_closed_forms() {
        let d = distinct_four();
        let r = reduce(&build_formulation(&d));
        let ybar = identity_target(4).unwrap();
        let lambda = [0.3, -1.1, 2.0, 0.7, -0.4];
        let mu = eliminate_mu(&r, &ybar, &lambda).unwrap();
        let (d13, d32, d34) = (d.get(0, 2), d.get(2, 1), d.get(2, 3));
        assert!((mu[1] - 2.0 * (d13 + lambda[0] + lambda[4])).abs() < 1e-12);
        assert!((mu[4] + 2.0 * (d32 + d34 + lambda[1] + lambda[4])).abs() < 1e-12);
        let p = DualPoint {
            lambda: lambda.to_vec(),
            mu,
        };
        assert!(stationarity_residual(&r, &ybar, &p).unwrap() <= 1e-12);
    }

    #[test]
    fn eliminate_rejects_bad_targets() {
        let r = reduce(&build_formulation(&unit_square()));
        let lambda = [0.0; 5];
        let mut y = identity_target(4).unwrap();
        y[1] = 1.0;
        assert!(matches!(
            eliminate_mu(&r, &y, &lambda),
            Err(Error::InfeasibleTarget(_))
        ));
        assert!(matches!(
            eliminate_mu(&r, &[0.5; 9], &lambda),
            Err(Error::InfeasibleTarget(_))
        ));
    }

    #[test]
    fn unit_square_margins() {
        let m = optimality_margins(&unit_square(), &identity_target(4).unwrap()).unwrap();
        let expected = 2.0 * 2f64.sqrt() - 2.0;
        assert_eq!(m.len(), 2);
        assert!(m.iter().all(|v| (v - expected).abs() < 1e-12 && *v > 0.0));
    }

    #[test]
    fn uniform_distances_have_zero_margins() {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { 0.0 } else { 1.5 }).collect())
            .collect();
        let d = validate_distance_matrix(&rows, true).unwrap();
        assert_eq!(
            optimality_margins(&d, &identity_target(4).unwrap()).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn score_is_deterministic() {
        let y = identity_target(4).unwrap();
        let a = feasibility_score(&unit_square(), &y, &[0.0; 5], 10.0).unwrap();
        let b = feasibility_score(&unit_square(), &y, &[0.0; 5], 10.0).unwrap();
        assert_eq!(a, b);
        assert!(a.min_eig.is_finite());
        assert_eq!(a.edm_violation, 0.0);
    }

    #[test]
    fn classify_requires_every_clause() {
        use Verdict::*;
        assert_eq!(
            classify(1e-3, &[0.1, 0.2], 0.0, 0.0),
            FeasibleCounterexample
        );
        assert_eq!(classify(0.0, &[0.1, 0.2], 0.0, 0.0), NoFeasiblePointFound);
        assert_eq!(classify(1e-3, &[0.1, 0.0], 0.0, 0.0), NoFeasiblePointFound);
        assert_eq!(classify(1e-3, &[0.1, 0.2], 1e-9, 0.0), NoFeasiblePointFound);
        assert_eq!(classify(1e-3, &[0.1, 0.2], 0.0, 1e-9), NoFeasiblePointFound);
    }

    #[test]
    fn compass_search_climbs_a_concave_bowl() {
        let run = compass_search(
            vec![0.0, 0.0],
            &[1.0, 1.0],
            |_| (f64::NEG_INFINITY, f64::INFINITY),
            10_000,
            |x| Some(-(x[0] - 0.3).powi(2) - (x[1] + 1.7).powi(2)),
        )
        .unwrap();
        assert!((run.x[0] - 0.3).abs() < 1e-8 && (run.x[1] + 1.7).abs() < 1e-8);
        assert!(run.accepted.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn empty_search_is_vacuous() {
        let cfg = InverseConfig {
            restarts: 0,
            ..InverseConfig::default()
        };
        let rep = inverse_search(&identity_target(4).unwrap(), &cfg).unwrap();
        assert_eq!(rep.restarts, 0);
        assert_eq!(rep.verdict, Verdict::NoFeasiblePointFound);
        assert!(rep.best.is_none());
    }
}
