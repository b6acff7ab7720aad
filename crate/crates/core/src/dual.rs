//! Classic Lagrangian dual of the reduced problem.
//!
//! Pricing `E_rY = e` with `λ` and `Y∘Y = Y` with `½μ` gives
//!
//! ```text
//! L(Y, λ, μ) = ½ Yᵀ(A_r + diag μ)Y − Yᵀ(b_r + ½μ − E_rᵀλ) − λᵀe
//! ```
//!
//! which is bounded below in `Y` exactly when `A_r + diag μ` is positive
//! definite (the set `S⁺`). There the infimum is attained at the solution of
//! `(A_r + diag μ) Y = b_r + ½μ − E_rᵀλ` and the dual function is
//! `g = −½ bᵀ(λ,μ) Y − λᵀe`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{OracleResult, Tour};
use crate::linalg::{cholesky_succeeds, min_eigenvalue};
use crate::reduction::{reduced_objective, ReducedProblem};

/// Strict positive definiteness threshold on the smallest eigenvalue.
pub const PD_TOLERANCE: f64 = 1e-10;
/// Distance from {0, 1} below which a recovered component counts as binary.
pub const BINARY_TOLERANCE: f64 = 1e-6;
/// Max-norm residual allowed when solving the Lagrangian equation,
/// relative to `1 + ‖b(λ,μ)‖∞`.
pub const SOLVE_TOLERANCE: f64 = 1e-8;
/// Agreement required between the recovered objective and the optimum.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-8;

/// Multipliers `(λ, μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPoint {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl DualPoint {
    pub fn zeros(r: &ReducedProblem) -> Self {
        Self {
            lambda: vec![0.0; r.n_constraints()],
            mu: vec![0.0; r.dim()],
        }
    }

    /// `λ = 0`, `μ_i = 1 + Σ_k |A_r[i,k]|`: strictly diagonally dominant,
    /// hence inside `S⁺`.
    pub fn diagonally_dominant(r: &ReducedProblem) -> Self {
        let mu = r
            .a_r
            .row_iter()
            .map(|row| 1.0 + row.iter().map(|v| v.abs()).sum::<f64>())
            .collect();
        Self {
            lambda: vec![0.0; r.n_constraints()],
            mu,
        }
    }

    fn check(&self, r: &ReducedProblem) -> Result<()> {
        if self.lambda.len() != r.n_constraints() {
            return Err(Error::DimensionMismatch {
                expected: r.n_constraints(),
                found: self.lambda.len(),
            });
        }
        if self.mu.len() != r.dim() {
            return Err(Error::DimensionMismatch {
                expected: r.dim(),
                found: self.mu.len(),
            });
        }
        Ok(())
    }

    /// `self + step * direction`, componentwise.
    pub fn moved(&self, step: f64, grad_lambda: &[f64], grad_mu: &[f64]) -> Self {
        Self {
            lambda: self
                .lambda
                .iter()
                .zip(grad_lambda)
                .map(|(x, g)| x + step * g)
                .collect(),
            mu: self
                .mu
                .iter()
                .zip(grad_mu)
                .map(|(x, g)| x + step * g)
                .collect(),
        }
    }
}

/// `A_r(λ,μ) = A_r + diag μ` and `b_r(λ,μ) = b_r + ½μ − E_rᵀλ`.
pub fn assemble(r: &ReducedProblem, p: &DualPoint) -> Result<(DMatrix<f64>, DVector<f64>)> {
    p.check(r)?;
    let mu = DVector::from_column_slice(&p.mu);
    let lambda = DVector::from_column_slice(&p.lambda);
    let a = &r.a_r + DMatrix::from_diagonal(&mu);
    let b = &r.b_r + 0.5 * &mu - r.e_r.transpose() * lambda;
    Ok((a, b))
}

/// Membership in `S⁺` with the smallest eigenvalue of `A_r(λ,μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub in_s_plus: bool,
    pub min_eig: f64,
}

/// Tests `A_r + diag μ ≻ 0`: the Cholesky factorization must succeed and the
/// smallest eigenvalue must exceed [`PD_TOLERANCE`].
pub fn dual_feasible(r: &ReducedProblem, p: &DualPoint) -> Result<Feasibility> {
    let (a, _) = assemble(r, p)?;
    Ok(matrix_feasibility(&a))
}

pub(crate) fn matrix_feasibility(a: &DMatrix<f64>) -> Feasibility {
    let min_eig = min_eigenvalue(a);
    Feasibility {
        in_s_plus: min_eig > PD_TOLERANCE && cholesky_succeeds(a),
        min_eig,
    }
}

/// Dual value, primal recovery and gradient at a point of `S⁺`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualEvaluation {
    pub value: f64,
    pub y: Vec<f64>,
    pub grad_lambda: Vec<f64>,
    pub grad_mu: Vec<f64>,
    pub min_eig: f64,
    pub in_s_plus: bool,
}

impl DualEvaluation {
    pub fn grad_norm(&self) -> f64 {
        self.grad_lambda
            .iter()
            .chain(&self.grad_mu)
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }
}

/// Evaluates `g(λ, μ)`.
///
/// `Y` solves the Lagrangian equation, `∂g/∂λ = E_rY − e` and
/// `∂g/∂μ = ½(Y∘Y − Y)`.
pub fn dual_value(r: &ReducedProblem, p: &DualPoint) -> Result<DualEvaluation> {
    let (a, b) = assemble(r, p)?;
    let feas = matrix_feasibility(&a);
    if !feas.in_s_plus {
        return Err(Error::NotDualFeasible {
            min_eig: feas.min_eig,
        });
    }
    let chol = a.clone().cholesky().ok_or(Error::NotDualFeasible {
        min_eig: feas.min_eig,
    })?;
    let y = chol.solve(&b);
    let residual = (&a * &y - &b).amax();
    debug_assert!(residual <= SOLVE_TOLERANCE * (1.0 + b.amax()));

    let lambda = DVector::from_column_slice(&p.lambda);
    let value = -0.5 * b.dot(&y) - lambda.sum();
    let grad_lambda = (&r.e_r * &y).add_scalar(-1.0);
    let grad_mu = y.map(|v| 0.5 * (v * v - v));
    Ok(DualEvaluation {
        value,
        y: y.as_slice().to_vec(),
        grad_lambda: grad_lambda.as_slice().to_vec(),
        grad_mu: grad_mu.as_slice().to_vec(),
        min_eig: feas.min_eig,
        in_s_plus: true,
    })
}

/// `L(Y, λ, μ)` evaluated directly from its definition.
pub fn lagrangian(r: &ReducedProblem, y: &[f64], p: &DualPoint) -> Result<f64> {
    p.check(r)?;
    let f = reduced_objective(r, y)?;
    let yv = DVector::from_column_slice(y);
    let eq: f64 = (&r.e_r * &yv)
        .iter()
        .zip(&p.lambda)
        .map(|(ey, l)| l * (ey - 1.0))
        .sum();
    let had: f64 = y.iter().zip(&p.mu).map(|(v, m)| m * (v * v - v)).sum();
    Ok(f + eq + 0.5 * had)
}

/// Dual ascent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AscentConfig {
    /// Stop once the gradient norm drops below this.
    pub gtol: f64,
    /// Stop once the value has gained less than this over `stall_window` steps.
    pub ftol: f64,
    pub stall_window: usize,
    pub max_iter: usize,
    /// First trial step length.
    pub initial_step: f64,
    /// Halvings tried per iteration before giving up.
    pub max_halvings: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            gtol: 1e-8,
            ftol: 1e-12,
            stall_window: 10,
            max_iter: 10_000,
            initial_step: 1.0,
            max_halvings: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    GradientSmall,
    Stalled,
    IterationCap,
    /// Every trial step along the gradient left `S⁺`.
    LeftCone,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentResult {
    pub best_point: DualPoint,
    pub best_value: f64,
    pub iterations: usize,
    /// One entry per accepted iterate, starting with the initial point.
    pub trajectory: Vec<TracePoint>,
    pub termination: Termination,
}

/// Sufficient-increase constant of the backtracking line search.
const ARMIJO: f64 = 1e-4;

/// Gradient ascent on `g` over `S⁺`.
///
/// Trial steps that leave `S⁺` or fail the sufficient-increase test are
/// halved; only accepted steps move the iterate, so the recorded values are
/// nondecreasing.
pub fn dual_ascent(
    r: &ReducedProblem,
    start: &DualPoint,
    cfg: &AscentConfig,
) -> Result<AscentResult> {
    start.check(r)?;
    let mut eval = match dual_value(r, start) {
        Ok(e) => e,
        Err(Error::NotDualFeasible { min_eig }) => {
            return Err(Error::StartNotDualFeasible { min_eig })
        }
        Err(e) => return Err(e),
    };
    let mut point = start.clone();
    let mut trajectory = vec![TracePoint {
        iteration: 0,
        value: eval.value,
        grad_norm: eval.grad_norm(),
        min_eig: eval.min_eig,
    }];
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    let mut termination = Termination::IterationCap;

    while iterations < cfg.max_iter {
        let gnorm = eval.grad_norm();
        if gnorm < cfg.gtol {
            termination = Termination::GradientSmall;
            break;
        }
        let mut s = step;
        let mut left_cone = false;
        let mut accepted = None;
        for _ in 0..cfg.max_halvings {
            let trial = point.moved(s, &eval.grad_lambda, &eval.grad_mu);
            match dual_value(r, &trial) {
                Ok(ev) if ev.value >= eval.value + ARMIJO * s * gnorm * gnorm => {
                    accepted = Some((trial, ev));
                    break;
                }
                Ok(_) => left_cone = false,
                Err(Error::NotDualFeasible { .. }) => left_cone = true,
                Err(e) => return Err(e),
            }
            s *= 0.5;
        }
        let Some((next, ev)) = accepted else {
            termination = if left_cone {
                Termination::LeftCone
            } else {
                Termination::Stalled
            };
            break;
        };
        iterations += 1;
        point = next;
        eval = ev;
        step = 2.0 * s;
        trajectory.push(TracePoint {
            iteration: iterations,
            value: eval.value,
            grad_norm: eval.grad_norm(),
            min_eig: eval.min_eig,
        });
        let len = trajectory.len();
        if len > cfg.stall_window
            && eval.value - trajectory[len - 1 - cfg.stall_window].value < cfg.ftol
        {
            termination = Termination::Stalled;
            break;
        }
    }

    Ok(AscentResult {
        best_value: eval.value,
        best_point: point,
        iterations,
        trajectory,
        termination,
    })
}

/// Outcome of checking whether a dual point certifies a global optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum GlobalVerdict {
    NotDualFeasible {
        min_eig: f64,
    },
    NotCritical {
        grad_norm: f64,
    },
    NonBinaryRecovery {
        max_deviation: f64,
    },
    ConstraintViolation {
        residual: f64,
    },
    ObjectiveMismatch {
        recovered: f64,
        optimum: f64,
    },
    /// The recovered vector is a binary tour whose length matches the oracle.
    ConfirmsGlobalOptimum {
        tour: Tour,
        length: f64,
    },
}

impl GlobalVerdict {
    pub fn confirms(&self) -> bool {
        matches!(self, GlobalVerdict::ConfirmsGlobalOptimum { .. })
    }
}

/// Checks, in order: membership in `S⁺`, criticality (`‖∇g‖ ≤ gtol`),
/// binary recovery, `E_rY = e`, and agreement of the recovered objective
/// with the enumeration optimum.
pub fn verify_global(
    r: &ReducedProblem,
    p: &DualPoint,
    oracle: &OracleResult,
    gtol: f64,
) -> Result<GlobalVerdict> {
    let eval = match dual_value(r, p) {
        Ok(e) => e,
        Err(Error::NotDualFeasible { min_eig }) => {
            return Ok(GlobalVerdict::NotDualFeasible { min_eig })
        }
        Err(e) => return Err(e),
    };
    let grad_norm = eval.grad_norm();
    if grad_norm > gtol {
        return Ok(GlobalVerdict::NotCritical { grad_norm });
    }
    let max_deviation = eval
        .y
        .iter()
        .map(|v| v.abs().min((v - 1.0).abs()))
        .fold(0.0, f64::max);
    if max_deviation > BINARY_TOLERANCE {
        return Ok(GlobalVerdict::NonBinaryRecovery { max_deviation });
    }
    let residual = eval.grad_lambda.iter().map(|g| g.abs()).fold(0.0, f64::max);
    if residual > BINARY_TOLERANCE {
        return Ok(GlobalVerdict::ConstraintViolation { residual });
    }
    let recovered = reduced_objective(r, &eval.y)? + r.c0;
    if (recovered - oracle.best_length).abs() > OBJECTIVE_TOLERANCE {
        return Ok(GlobalVerdict::ObjectiveMismatch {
            recovered,
            optimum: oracle.best_length,
        });
    }
    let tour = r
        .map
        .extract_tour(&eval.y, BINARY_TOLERANCE)
        .ok_or_else(|| Error::InvalidTour("recovered vector is not a tour".into()))?;
    Ok(GlobalVerdict::ConfirmsGlobalOptimum {
        tour,
        length: recovered,
    })
}
