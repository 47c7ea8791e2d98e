//! Solvers for min F(x) subject to ‖x‖₀ ≤ s.
//!
//! The pursuit framework in [`rgrasp_run`] alternates support identification
//! with an inexact inner minimization; [`SemiStochasticSolver`] supplies the
//! variance-reduced inner epochs (plain or with periodic thresholding),
//! [`ExactRestrictedSolver`] the exact restricted minimizer that recovers
//! classic GraSP. [`fght_run`], [`sght_run`] and [`svrght_run`] are the
//! projected-gradient baselines. Every run produces a [`RunTrace`] whose
//! counters account work in effective passes (one pass = n component
//! gradients), hard-thresholding operations, and inner-step wall time.

mod baselines;
mod inner;
mod pursuit;
mod restricted;

pub use baselines::{fght_run, sght_run, svrght_run};
pub use inner::{semi_stochastic_epoch, SemiStochasticSolver};
pub use pursuit::{grasp_run, rgrasp_run};
pub use restricted::{
    audit_descent, restricted_minimize, ExactRestrictedSolver, RestrictedSolution,
};

use crate::objective::Objective;
use crate::vector::{DenseVector, SupportSet};
use crate::{Error, Result};

/// Whether a semi-stochastic epoch thresholds its iterates.
///
/// `Plain` epochs never threshold (SVRGSP); `Fast` epochs apply H at a few
/// evenly spaced steps (SVRGSP+). Either way the iterate moves only on the
/// merged support handed to the epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMode {
    Plain,
    Fast,
}

impl std::fmt::Display for InnerMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InnerMode::Plain => "plain",
            InnerMode::Fast => "fast",
        })
    }
}

/// Shared solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target sparsity s of the returned iterate.
    pub sparsity: usize,
    /// Step size η ≥ 0 (zero freezes the iterate; useful for fixed-point
    /// checks).
    pub step_size: f64,
    /// Inner iterations J per epoch.
    pub epoch_length: usize,
    /// Thresholding events m per fast-mode epoch.
    pub ht_per_epoch: usize,
    /// Outer iterations (epochs) T.
    pub outer_iters: usize,
    pub mode: InnerMode,
    pub seed: u64,
    /// Stop starting new outer iterations once this many effective passes
    /// are consumed.
    pub pass_budget: Option<f64>,
    /// Descent-audit tolerance c₁ ∈ (0, 1); carried for test harnesses, not
    /// consulted by the solvers themselves.
    pub c1: Option<f64>,
    /// Record wall-clock time. Off by default so traces are bit-identical
    /// across runs of the same config.
    pub timing: bool,
}

impl SolverConfig {
    /// A plain-mode config with the customary J = 2n and m = 6.
    pub fn standard(sparsity: usize, step_size: f64, n: usize) -> Self {
        Self {
            sparsity,
            step_size,
            epoch_length: 2 * n,
            ht_per_epoch: 6,
            outer_iters: 1_000_000,
            mode: InnerMode::Plain,
            seed: 0,
            pass_budget: None,
            c1: None,
            timing: false,
        }
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        if self.sparsity == 0 || self.sparsity > dim {
            return Err(Error::InvalidSparsity {
                level: self.sparsity,
                dim,
            });
        }
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step size must be finite and nonnegative, got {}",
                self.step_size
            )));
        }
        if self.ht_per_epoch == 0 {
            return Err(Error::InvalidArgument(
                "thresholding events per epoch must be positive".into(),
            ));
        }
        if self.mode == InnerMode::Fast
            && self.epoch_length > 0
            && self.ht_per_epoch > self.epoch_length
        {
            return Err(Error::InvalidArgument(format!(
                "{} thresholding events cannot fit in an epoch of length {}",
                self.ht_per_epoch, self.epoch_length
            )));
        }
        if self.outer_iters == 0 {
            return Err(Error::InvalidArgument(
                "outer iteration count must be positive".into(),
            ));
        }
        if let Some(budget) = self.pass_budget {
            if !(budget >= 0.0 && budget.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "pass budget must be finite and nonnegative, got {budget}"
                )));
            }
        }
        if let Some(c1) = self.c1 {
            if !(c1 > 0.0 && c1 < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "c1 must lie in (0, 1), got {c1}"
                )));
            }
        }
        Ok(())
    }
}

/// Cumulative work performed by a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Counters {
    /// Effective passes over the data: component gradients at 1/n each,
    /// full gradients at 1, and full-data sweeps inside exact inner solves
    /// at 1 per sweep. Objective evaluations done only for tracing are free.
    pub passes: f64,
    /// Component-gradient evaluations (a full gradient counts n).
    pub grad_evals: u64,
    /// Hard-thresholding applications.
    pub ht_ops: u64,
    /// Stochastic inner iterations executed.
    pub inner_steps: u64,
    /// Wall time spent inside inner-iteration loops, when timing is on.
    pub inner_nanos: u128,
}

impl Counters {
    /// Mean wall time per inner step in nanoseconds, when timed.
    pub fn nanos_per_inner_step(&self) -> Option<f64> {
        (self.inner_steps > 0 && self.inner_nanos > 0)
            .then(|| self.inner_nanos as f64 / self.inner_steps as f64)
    }
}

/// State of a run after one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Outer iteration index; 0 is the initial point.
    pub iter: usize,
    /// Objective F(x̂^t).
    pub objective: f64,
    /// ‖x̂^t − x*‖₂/‖x*‖₂ when a reference vector was supplied.
    pub estimation_error: Option<f64>,
    /// Effective passes consumed so far.
    pub passes: f64,
    /// Seconds since the run started (0 when timing is off).
    pub seconds: f64,
    /// Cumulative hard-thresholding operations.
    pub ht_ops: u64,
    /// Cumulative component-gradient evaluations.
    pub grad_evals: u64,
}

/// Per-iteration records plus final totals for one solver run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    /// The run hit a non-finite iterate or an objective blow-up and was
    /// truncated.
    pub diverged: bool,
    pub counters: Counters,
}

impl RunTrace {
    pub fn final_record(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("trace always has the t=0 record")
    }

    pub fn final_objective(&self) -> f64 {
        self.final_record().objective
    }
}

/// An inner solver for the pursuit framework: given the previous iterate,
/// its full gradient and per-sample margins, and the merged support T,
/// produce the next inexact minimizer b.
///
/// Implementations must not zero b outside T — the framework applies that
/// restriction itself — and must register their work on `counters`.
pub trait InnerSolver {
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &mut self,
        obj: &Objective,
        x_prev: &DenseVector,
        gradient: &[f64],
        snapshot_margins: &[f64],
        t_set: &SupportSet,
        outer_iter: usize,
        counters: &mut Counters,
    ) -> Result<DenseVector>;
}

/// Trace bookkeeping shared by every outer loop.
pub(crate) struct RunState<'a> {
    trace: RunTrace,
    start: Option<std::time::Instant>,
    truth: Option<&'a DenseVector>,
    truth_norm: f64,
    /// Objective level that flags divergence (10⁶ × the initial objective).
    pub(crate) blowup_threshold: f64,
}

impl<'a> RunState<'a> {
    pub(crate) fn new(
        obj: &Objective,
        cfg: &SolverConfig,
        x0: &DenseVector,
        truth: Option<&'a DenseVector>,
    ) -> Result<Self> {
        cfg.validate(obj.dim())?;
        if x0.dim() != obj.dim() {
            return Err(Error::DimensionMismatch {
                expected: obj.dim(),
                got: x0.dim(),
            });
        }
        if x0.nnz() > cfg.sparsity {
            return Err(Error::InvalidArgument(format!(
                "starting point has {} nonzeros, above the sparsity level {}",
                x0.nnz(),
                cfg.sparsity
            )));
        }
        let mut truth_norm = 0.0;
        if let Some(t) = truth {
            if t.dim() != obj.dim() {
                return Err(Error::DimensionMismatch {
                    expected: obj.dim(),
                    got: t.dim(),
                });
            }
            truth_norm = t.norm();
            if truth_norm == 0.0 {
                return Err(Error::InvalidArgument(
                    "reference vector must be nonzero".into(),
                ));
            }
        }
        let f0 = obj.loss(x0)?;
        let blowup_threshold = if f0 > 0.0 && f0.is_finite() {
            1e6 * f0
        } else {
            f64::INFINITY
        };
        let mut state = Self {
            trace: RunTrace::default(),
            start: cfg.timing.then(std::time::Instant::now),
            truth,
            truth_norm,
            blowup_threshold,
        };
        state.push(0, f0, x0, &Counters::default());
        Ok(state)
    }

    pub(crate) fn budget_left(&self, cfg: &SolverConfig, counters: &Counters) -> bool {
        cfg.pass_budget.is_none_or(|b| counters.passes < b)
    }

    pub(crate) fn push(&mut self, iter: usize, objective: f64, x: &DenseVector, c: &Counters) {
        let estimation_error = self.truth.map(|t| x.distance(t) / self.truth_norm);
        let seconds = self.start.map_or(0.0, |s| s.elapsed().as_secs_f64());
        self.trace.records.push(TraceRecord {
            iter,
            objective,
            estimation_error,
            passes: c.passes,
            seconds,
            ht_ops: c.ht_ops,
            grad_evals: c.grad_evals,
        });
    }

    pub(crate) fn is_blowup(&self, objective: f64) -> bool {
        !objective.is_finite() || objective > self.blowup_threshold
    }

    pub(crate) fn mark_diverged(&mut self) {
        self.trace.diverged = true;
    }

    pub(crate) fn finish(mut self, counters: Counters) -> RunTrace {
        self.trace.counters = counters;
        self.trace
    }
}
