//! The relaxed support-pursuit outer loop.
//!
//! Each outer iteration computes the full gradient g at the current
//! s-sparse iterate, selects the 2s steepest gradient coordinates, merges
//! them with the current support into T (at most 3s indices), asks the
//! inner solver for an inexact minimizer b, zeroes b outside T, and hard
//! thresholds back to s nonzeros. With the semi-stochastic inner solver
//! this realizes the plain and fast relaxed pursuits; with the exact
//! restricted solver it reduces to classic greedy pursuit.

use crate::objective::Objective;
use crate::solver::restricted::ExactRestrictedSolver;
use crate::solver::{Counters, InnerSolver, RunState, RunTrace, SolverConfig};
use crate::vector::{hard_threshold_in_place, top_k_indices, DenseVector};
use crate::{Error, Result};

/// Runs the pursuit framework with the supplied inner solver from `x0`
/// (which must satisfy the sparsity constraint). `truth` enables the
/// estimation-error trace column.
///
/// A diverged inner solve or objective blow-up truncates the trace and sets
/// its `diverged` flag rather than erroring; configuration and dimension
/// problems are reported as errors.
pub fn rgrasp_run(
    obj: &Objective,
    cfg: &SolverConfig,
    inner: &mut dyn InnerSolver,
    x0: &DenseVector,
    truth: Option<&DenseVector>,
) -> Result<(DenseVector, RunTrace)> {
    let mut state = RunState::new(obj, cfg, x0, truth)?;
    let n = obj.n();
    let d = obj.dim();
    let direction_count = (2 * cfg.sparsity).min(d);
    if 2 * cfg.sparsity > d {
        log::warn!(
            "2s = {} exceeds the dimension {d}; selecting every coordinate",
            2 * cfg.sparsity
        );
    }

    let mut counters = Counters::default();
    let mut x = x0.clone();
    let mut gradient = Vec::new();
    let mut margins = Vec::new();
    let mut scratch = Vec::new();
    let mut comparisons = 0u64;
    for t in 1..=cfg.outer_iters {
        if !state.budget_left(cfg, &counters) {
            break;
        }
        obj.gradient_and_margins(x.as_slice(), &mut gradient, &mut margins);
        counters.passes += 1.0;
        counters.grad_evals += n as u64;
        if gradient.iter().any(|v| !v.is_finite()) {
            state.mark_diverged();
            break;
        }
        let directions = top_k_indices(&gradient, direction_count, &mut scratch, &mut comparisons);
        let t_set = directions.union(&x.support());

        let mut b = match inner.solve(obj, &x, &gradient, &margins, &t_set, t, &mut counters) {
            Ok(b) => b,
            Err(Error::Diverged { .. }) => {
                state.mark_diverged();
                break;
            }
            Err(other) => return Err(other),
        };
        b.zero_outside(&t_set);
        hard_threshold_in_place(b.as_mut_slice(), cfg.sparsity, &mut scratch);
        counters.ht_ops += 1;
        x = b;

        let objective = obj.loss(&x)?;
        let blowup = state.is_blowup(objective);
        if blowup {
            state.mark_diverged();
        }
        state.push(t, objective, &x, &counters);
        if blowup {
            break;
        }
    }
    Ok((x, state.finish(counters)))
}

/// The pursuit framework with the exact restricted minimizer as its inner
/// solver.
pub fn grasp_run(
    obj: &Objective,
    cfg: &SolverConfig,
    x0: &DenseVector,
    truth: Option<&DenseVector>,
) -> Result<(DenseVector, RunTrace)> {
    let mut inner = ExactRestrictedSolver::default();
    rgrasp_run(obj, cfg, &mut inner, x0, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, Covariance, SyntheticSpec};
    use crate::objective::LossKind;
    use crate::solver::SemiStochasticSolver;
    use crate::vector::SupportSet;

    fn spec(n: usize, d: usize, s_star: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            n,
            d,
            s_star,
            covariance: Covariance::Identity,
            noise_variance: 0.0,
            seed,
        }
    }

    fn config(sparsity: usize, step_size: f64, n: usize) -> SolverConfig {
        SolverConfig {
            outer_iters: 20,
            ..SolverConfig::standard(sparsity, step_size, n)
        }
    }

    /// Inner solver that records |T| and returns its input unchanged.
    struct Probe {
        t_sizes: Vec<usize>,
    }

    impl InnerSolver for Probe {
        fn solve(
            &mut self,
            _obj: &Objective,
            x_prev: &DenseVector,
            _gradient: &[f64],
            _snapshot_margins: &[f64],
            t_set: &SupportSet,
            _outer_iter: usize,
            _counters: &mut Counters,
        ) -> Result<DenseVector> {
            self.t_sizes.push(t_set.len());
            Ok(x_prev.clone())
        }
    }

    #[test]
    fn ground_truth_is_a_fixed_point() {
        let (data, truth) = generate_synthetic(&spec(60, 40, 5, 3)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        let cfg = SolverConfig {
            outer_iters: 4,
            ..SolverConfig::standard(5, 0.001, data.n())
        };
        let mut inner = SemiStochasticSolver::new(&cfg);
        let (x, trace) =
            rgrasp_run(&obj, &cfg, &mut inner, &truth.x_star, Some(&truth.x_star)).unwrap();
        assert_eq!(x, truth.x_star);
        for record in &trace.records {
            assert_eq!(record.estimation_error, Some(0.0));
            assert_eq!(record.objective, 0.0);
        }
        assert_eq!(trace.records.len(), 5);
    }

    #[test]
    fn exact_inner_solver_recovers_noiseless_signal() {
        let (data, truth) = generate_synthetic(&spec(200, 400, 20, 7)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        let cfg = config(24, 0.0, data.n());
        let (x, trace) =
            grasp_run(&obj, &cfg, &DenseVector::zeros(400), Some(&truth.x_star)).unwrap();
        let err = trace.final_record().estimation_error.unwrap();
        assert!(err < 1e-6, "estimation error {err}");
        assert!(truth.support.is_subset_of(&x.support()));
        assert!(!trace.diverged);
    }

    #[test]
    fn merged_support_stays_within_three_s() {
        let (data, _) = generate_synthetic(&spec(50, 60, 6, 11)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        let cfg = SolverConfig {
            outer_iters: 8,
            ..SolverConfig::standard(6, 0.01, data.n())
        };
        let mut probe = Probe {
            t_sizes: Vec::new(),
        };
        // start from a sparse point so supp(x̂) is nonempty
        let mut x0 = vec![0.0; 60];
        x0[3] = 1.0;
        x0[40] = -2.0;
        let x0 = DenseVector::from_values(x0).unwrap();
        rgrasp_run(&obj, &cfg, &mut probe, &x0, None).unwrap();
        assert_eq!(probe.t_sizes.len(), 8);
        for &size in &probe.t_sizes {
            assert!((12..=3 * 6).contains(&size), "|T| = {size}");
        }
    }

    #[test]
    fn oversized_direction_request_is_clamped() {
        let (data, _) = generate_synthetic(&spec(30, 10, 3, 13)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        // 2s = 12 > d = 10
        let cfg = SolverConfig {
            outer_iters: 3,
            ..SolverConfig::standard(6, 0.001, data.n())
        };
        let mut probe = Probe {
            t_sizes: Vec::new(),
        };
        rgrasp_run(&obj, &cfg, &mut probe, &DenseVector::zeros(10), None).unwrap();
        assert!(probe.t_sizes.iter().all(|&s| s == 10));
    }

    #[test]
    fn zero_budget_yields_only_the_initial_record() {
        let (data, _) = generate_synthetic(&spec(40, 20, 4, 17)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        let cfg = SolverConfig {
            pass_budget: Some(0.0),
            ..SolverConfig::standard(4, 0.01, data.n())
        };
        let (_, trace) = grasp_run(&obj, &cfg, &DenseVector::zeros(20), None).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].iter, 0);
        assert_eq!(trace.counters.passes, 0.0);
    }

    #[test]
    fn diverging_inner_solver_truncates_the_trace() {
        let (data, _) = generate_synthetic(&spec(40, 20, 4, 19)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        let cfg = SolverConfig {
            outer_iters: 10,
            ..SolverConfig::standard(4, 1e160, data.n())
        };
        let mut inner = SemiStochasticSolver::new(&cfg);
        let (_, trace) = rgrasp_run(&obj, &cfg, &mut inner, &DenseVector::zeros(20), None).unwrap();
        assert!(trace.diverged);
        assert!(trace.records.len() < 11);
    }

    #[test]
    fn runs_are_deterministic() {
        let (data, truth) = generate_synthetic(&spec(80, 50, 6, 23)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        let eta = 0.5 / data.max_squared_column_norm();
        let cfg = SolverConfig {
            outer_iters: 4,
            ..SolverConfig::standard(8, eta, data.n())
        };
        let run = || {
            let mut inner = SemiStochasticSolver::new(&cfg);
            rgrasp_run(
                &obj,
                &cfg,
                &mut inner,
                &DenseVector::zeros(50),
                Some(&truth.x_star),
            )
            .unwrap()
        };
        let (xa, ta) = run();
        let (xb, tb) = run();
        assert_eq!(xa, xb);
        assert_eq!(ta, tb);
    }

    #[test]
    fn budget_is_checked_before_each_outer_iteration() {
        let (data, _) = generate_synthetic(&spec(40, 30, 4, 29)).unwrap();
        let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
        // one outer iteration costs 1 + 2J/n = 5 passes
        let cfg = SolverConfig {
            pass_budget: Some(7.0),
            ..SolverConfig::standard(4, 1e-4, data.n())
        };
        let mut inner = SemiStochasticSolver::new(&cfg);
        let (_, trace) = rgrasp_run(&obj, &cfg, &mut inner, &DenseVector::zeros(30), None).unwrap();
        // iterations start at passes 0 and 5; the third would start at 10 > 7
        assert_eq!(trace.records.len(), 3);
        assert_eq!(trace.counters.passes, 10.0);
    }
}
