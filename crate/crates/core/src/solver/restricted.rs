//! Exact minimization of F over a fixed support, and the descent audit that
//! relates an inexact inner solution to the exact one.

use nalgebra::{DMatrix, DVector};

use crate::objective::{LossKind, Objective};
use crate::solver::{Counters, InnerSolver, SolverConfig};
use crate::vector::{DenseVector, SupportSet};
use crate::{Error, Result};

const MAX_NEWTON_ITERS: usize = 100;
const MAX_BACKTRACKS: usize = 60;
const ARMIJO_SLOPE: f64 = 1e-4;

/// Result of [`restricted_minimize`].
#[derive(Debug, Clone)]
pub struct RestrictedSolution {
    /// The minimizer candidate, zero outside the requested support.
    pub x: DenseVector,
    /// The restricted least-squares system was rank-deficient and the
    /// minimum-norm solution was taken.
    pub singular: bool,
    /// The restricted gradient reached the requested tolerance.
    pub converged: bool,
    /// Effective passes spent (one per full-data sweep).
    pub passes: f64,
}

/// Positions of the support coordinates inside a dense map, for O(1)
/// membership tests while sweeping sparse samples.
struct PositionMap {
    positions: Vec<u32>,
    support: Vec<usize>,
}

const ABSENT: u32 = u32::MAX;

impl PositionMap {
    fn new(t_set: &SupportSet, dim: usize) -> Self {
        let mut positions = vec![ABSENT; dim];
        for (p, &k) in t_set.iter().enumerate() {
            positions[k] = p as u32;
        }
        Self {
            positions,
            support: t_set.as_slice().to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.support.len()
    }
}

/// F(x) and ∇F(x) restricted to the support, in one data sweep.
fn loss_and_restricted_gradient(
    obj: &Objective,
    x: &[f64],
    map: &PositionMap,
    gradient: &mut [f64],
) -> f64 {
    gradient.fill(0.0);
    let data = obj.data();
    let mut total = 0.0;
    for (col, &label) in data.columns().iter().zip(data.labels()) {
        let margin = col.dot_slice(x);
        total += obj.loss_term(label, margin);
        let factor = obj.factor(label, margin);
        for (k, v) in col.iter() {
            let p = map.positions[k];
            if p != ABSENT {
                gradient[p as usize] += factor * v;
            }
        }
    }
    let inv_n = 1.0 / data.n() as f64;
    for g in gradient.iter_mut() {
        *g *= inv_n;
    }
    total * inv_n
}

/// Minimizes F over vectors supported on `t_set`, starting from `x_start`
/// (whose off-support coordinates are ignored).
///
/// Least squares solves the restricted normal equations directly (Cholesky,
/// falling back to an SVD minimum-norm solution for rank-deficient systems,
/// flagged `singular`). Logistic regression runs damped Newton on the
/// restricted coordinates until the restricted gradient norm falls below
/// `tol` or an iteration cap is hit, flagged through `converged`. Each
/// full-data sweep — Gram or Hessian build, gradient, or line-search
/// objective — costs one pass.
pub fn restricted_minimize(
    obj: &Objective,
    t_set: &SupportSet,
    x_start: &DenseVector,
    tol: f64,
) -> Result<RestrictedSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if x_start.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: x_start.dim(),
        });
    }
    if let Some(&last) = t_set.as_slice().last() {
        if last >= obj.dim() {
            return Err(Error::InvalidArgument(format!(
                "support index {last} out of range for dimension {}",
                obj.dim()
            )));
        }
    }
    if t_set.is_empty() {
        return Ok(RestrictedSolution {
            x: DenseVector::zeros(obj.dim()),
            singular: false,
            converged: true,
            passes: 0.0,
        });
    }
    let map = PositionMap::new(t_set, obj.dim());
    match obj.kind() {
        LossKind::LeastSquares => least_squares_restricted(obj, &map, tol),
        LossKind::Logistic => logistic_restricted(obj, &map, x_start, tol),
    }
}

fn least_squares_restricted(
    obj: &Objective,
    map: &PositionMap,
    tol: f64,
) -> Result<RestrictedSolution> {
    let k = map.len();
    let data = obj.data();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    let mut local: Vec<(usize, f64)> = Vec::new();
    for (col, &label) in data.columns().iter().zip(data.labels()) {
        local.clear();
        for (idx, v) in col.iter() {
            let p = map.positions[idx];
            if p != ABSENT {
                local.push((p as usize, v));
            }
        }
        for &(p, a) in &local {
            rhs[p] += label * a;
            for &(q, b) in &local {
                gram[(p, q)] += a * b;
            }
        }
    }
    let inv_n = 1.0 / data.n() as f64;
    gram.scale_mut(inv_n);
    rhs.scale_mut(inv_n);
    let mut passes = 1.0;

    let (solution, singular) = match gram.clone().cholesky() {
        Some(chol) => (chol.solve(&rhs), false),
        None => {
            let svd = gram.svd(true, true);
            let sol = svd
                .solve(&rhs, 1e-12)
                .map_err(|e| Error::InvalidArgument(format!("restricted solve failed: {e}")))?;
            (sol, true)
        }
    };

    let mut x = vec![0.0; obj.dim()];
    for (p, &coord) in map.support.iter().enumerate() {
        x[coord] = solution[p];
    }
    let x = DenseVector::from_values(x)?;

    let mut residual = vec![0.0; k];
    let norm = {
        loss_and_restricted_gradient(obj, x.as_slice(), map, &mut residual);
        passes += 1.0;
        residual.iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    Ok(RestrictedSolution {
        x,
        singular,
        converged: norm <= tol,
        passes,
    })
}

fn logistic_restricted(
    obj: &Objective,
    map: &PositionMap,
    x_start: &DenseVector,
    tol: f64,
) -> Result<RestrictedSolution> {
    let k = map.len();
    let data = obj.data();
    let inv_n = 1.0 / data.n() as f64;
    let mut x = vec![0.0; obj.dim()];
    for &coord in &map.support {
        x[coord] = x_start[coord];
    }
    let mut gradient = DVector::<f64>::zeros(k);
    let mut hessian = DMatrix::<f64>::zeros(k, k);
    let mut local: Vec<(usize, f64)> = Vec::new();
    let mut candidate = x.clone();
    let mut passes = 0.0;
    let mut converged = false;
    for _ in 0..MAX_NEWTON_ITERS {
        // one sweep: value, restricted gradient, restricted Hessian. For the
        // logistic loss the per-sample curvature is σ(1−σ) with σ = |factor|.
        gradient.fill(0.0);
        hessian.fill(0.0);
        let mut value = 0.0;
        for (col, &label) in data.columns().iter().zip(data.labels()) {
            let margin = col.dot_slice(&x);
            value += obj.loss_term(label, margin);
            let a = obj.factor(label, margin);
            let curvature = a.abs() * (1.0 - a.abs());
            local.clear();
            for (idx, v) in col.iter() {
                let p = map.positions[idx];
                if p != ABSENT {
                    local.push((p as usize, v));
                }
            }
            for &(p, w) in &local {
                gradient[p] += a * w;
                if curvature > 0.0 {
                    for &(q, u) in &local {
                        hessian[(p, q)] += curvature * w * u;
                    }
                }
            }
        }
        value *= inv_n;
        gradient.scale_mut(inv_n);
        hessian.scale_mut(inv_n);
        passes += 1.0;

        let grad_norm = gradient.norm();
        if grad_norm <= tol {
            converged = true;
            break;
        }

        let newton = newton_direction(&hessian, &gradient);
        let slope = gradient.dot(&newton);
        let (direction, slope) = if slope > 0.0 && newton.iter().all(|v| v.is_finite()) {
            (newton, slope)
        } else {
            (gradient.clone(), grad_norm * grad_norm)
        };

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            candidate.copy_from_slice(&x);
            for (p, &coord) in map.support.iter().enumerate() {
                candidate[coord] = x[coord] - step * direction[p];
            }
            let trial = obj.loss_slice(&candidate);
            passes += 1.0;
            if trial <= value - ARMIJO_SLOPE * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        std::mem::swap(&mut x, &mut candidate);
    }
    if !converged {
        log::debug!("restricted Newton stopped before tolerance {tol}");
    }
    Ok(RestrictedSolution {
        x: DenseVector::from_values(x)?,
        singular: false,
        converged,
        passes,
    })
}

/// Solves Hδ = g, escalating a diagonal ridge until the factorization
/// succeeds; falls back to the gradient itself when the Hessian is
/// numerically rank-deficient (fully saturated samples).
fn newton_direction(hessian: &DMatrix<f64>, gradient: &DVector<f64>) -> DVector<f64> {
    let k = hessian.nrows();
    let mean_diag = hessian.diagonal().sum() / k as f64;
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut damped = hessian.clone();
        for i in 0..k {
            damped[(i, i)] += ridge;
        }
        if let Some(chol) = damped.cholesky() {
            return chol.solve(gradient);
        }
        ridge = if ridge == 0.0 {
            (1e-10 * mean_diag).max(1e-300)
        } else {
            ridge * 100.0
        };
    }
    gradient.clone()
}

/// Checks the slack descent condition ‖b − b̂‖₂ ≤ c₁·‖x_prev − b̂‖₂ relating an
/// inexact inner solution `b` to the exact restricted minimizer `b_hat`.
pub fn audit_descent(b: &DenseVector, b_hat: &DenseVector, x_prev: &DenseVector, c1: f64) -> bool {
    b.distance(b_hat) <= c1 * x_prev.distance(b_hat)
}

/// Inner solver that computes the exact restricted minimizer — the classic
/// greedy pursuit behavior.
#[derive(Debug, Clone)]
pub struct ExactRestrictedSolver {
    pub tol: f64,
}

impl Default for ExactRestrictedSolver {
    fn default() -> Self {
        Self { tol: 1e-9 }
    }
}

impl ExactRestrictedSolver {
    pub fn new(cfg: &SolverConfig) -> Self {
        let _ = cfg;
        Self::default()
    }
}

impl InnerSolver for ExactRestrictedSolver {
    fn solve(
        &mut self,
        obj: &Objective,
        x_prev: &DenseVector,
        _gradient: &[f64],
        _snapshot_margins: &[f64],
        t_set: &SupportSet,
        _outer_iter: usize,
        counters: &mut Counters,
    ) -> Result<DenseVector> {
        let sol = restricted_minimize(obj, t_set, x_prev, self.tol)?;
        counters.passes += sol.passes;
        Ok(sol.x)
    }
}
