//! Semi-stochastic support pursuit solvers for sparsity-constrained problems.
//!
//! This crate solves finite-sum problems of the form
//!
//! ```text
//! min F(x) = (1/n) Σ f_i(x)   subject to   ‖x‖₀ ≤ s
//! ```
//!
//! for least-squares and logistic losses. The centerpiece is a relaxed
//! gradient support pursuit (RGraSP) outer loop in the GraSP/CoSaMP family:
//! each iteration identifies the `2s` steepest gradient coordinates, merges
//! them with the support of the current iterate, approximately minimizes the
//! objective with an inner solver, and hard-thresholds the result back to
//! `s` nonzeros. The inner solver is a semi-stochastic (variance-reduced)
//! gradient epoch; running it plain yields SVRGSP, running it with a few
//! periodic hard-thresholding steps per epoch yields SVRGSP+. Both require
//! far fewer hard-thresholding operations than per-step thresholding methods,
//! which keeps the average cost of an inner iteration near the cost of one
//! sparse gradient instead of one full top-`s` selection.
//!
//! Four reference baselines are included for comparison: GraSP (the same
//! outer loop with an exact restricted minimizer), FG-HT (projected full
//! gradient descent), SG-HT (projected stochastic gradient descent) and
//! SVRGHT (variance-reduced epochs with hard thresholding at every step).
//!
//! Module map:
//!
//! * [`vector`] — dense vectors, support sets, top-k selection and the
//!   hard-thresholding operator,
//! * [`objective`] — sparse-column datasets with least-squares and logistic
//!   losses and their component/full gradients,
//! * [`data`] — synthetic Gaussian instance generation and SVMlight I/O,
//! * [`solver`] — the pursuit framework, the semi-stochastic inner solver,
//!   the baselines, and per-run traces with work counters.

pub mod data;
pub mod objective;
pub mod solver;
pub mod vector;

mod select;

pub use data::{
    dataset_stats, generate_synthetic, parse_libsvm, write_svmlight, Covariance, DatasetStats,
    GroundTruth, SyntheticSpec,
};
pub use objective::{LossKind, Objective, SparseColumn, SparseDataset};
pub use solver::{
    audit_descent, fght_run, grasp_run, restricted_minimize, rgrasp_run, semi_stochastic_epoch,
    sght_run, svrght_run, Counters, ExactRestrictedSolver, InnerMode, InnerSolver,
    RestrictedSolution, RunTrace, SemiStochasticSolver, SolverConfig, TraceRecord,
};
pub use vector::{hard_threshold, top_support, DenseVector, SparsityLevel, SupportSet};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid sparsity level {level} for dimension {dim}")]
    InvalidSparsity { level: usize, dim: usize },
    #[error("non-finite entry at coordinate {index}")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("sample index {index} out of range for {count} samples")]
    SampleOutOfRange { index: usize, count: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("iterate diverged at inner step {step}")]
    Diverged { step: usize },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
