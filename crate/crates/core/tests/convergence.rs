//! End-to-end behavior of the pursuit solvers on synthetic instances:
//! exact recovery, oracle-relative noisy estimation, the slack-descent
//! contract of tuned epochs, and the logistic pipeline.

use rgrasp::{
    audit_descent, generate_synthetic, grasp_run, restricted_minimize, rgrasp_run,
    semi_stochastic_epoch, top_support, Covariance, DenseVector, InnerMode, LossKind, Objective,
    SemiStochasticSolver, SolverConfig, SparseDataset, SparsityLevel, SyntheticSpec,
};

fn cfg(s: usize, eta: f64, j: usize, mode: InnerMode, budget: f64) -> SolverConfig {
    SolverConfig {
        sparsity: s,
        step_size: eta,
        epoch_length: j,
        ht_per_epoch: 6,
        outer_iters: 10_000,
        mode,
        seed: 7,
        pass_budget: Some(budget),
        c1: None,
        timing: false,
    }
}

fn best_error(trace: &rgrasp::RunTrace) -> f64 {
    trace
        .records
        .iter()
        .filter_map(|r| r.estimation_error)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn noiseless_recovery_with_plain_and_fast_epochs() {
    let spec = SyntheticSpec {
        n: 400,
        d: 800,
        s_star: 20,
        covariance: Covariance::Identity,
        noise_variance: 0.0,
        seed: 11,
    };
    let (data, truth) = generate_synthetic(&spec).unwrap();
    let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
    let eta = 12.0 / data.max_squared_column_norm();
    let x0 = DenseVector::zeros(spec.d);

    // 102 = 17·6 steps, so the fast schedule fires exactly 6 times per epoch
    let plain_cfg = cfg(24, eta, 102, InnerMode::Plain, 30.0);
    let mut plain = SemiStochasticSolver::new(&plain_cfg);
    let (x_plain, tr_plain) =
        rgrasp_run(&obj, &plain_cfg, &mut plain, &x0, Some(&truth.x_star)).unwrap();
    assert!(!tr_plain.diverged);
    let err = tr_plain.records.last().unwrap().estimation_error.unwrap();
    assert!(err <= 1e-4, "estimation error {err}");
    assert!(truth.support.is_subset_of(&x_plain.support()));

    // The merged support always covers the working iterate, so the fast
    // schedule's intermediate thresholds keep every nonzero: identical
    // iterates, more thresholding work.
    let fast_cfg = SolverConfig {
        mode: InnerMode::Fast,
        ..plain_cfg
    };
    let mut fast = SemiStochasticSolver::new(&fast_cfg);
    let (x_fast, tr_fast) =
        rgrasp_run(&obj, &fast_cfg, &mut fast, &x0, Some(&truth.x_star)).unwrap();
    assert_eq!(x_fast, x_plain);
    let outer = (tr_plain.records.len() - 1) as u64;
    assert_eq!(tr_plain.counters.ht_ops, outer);
    assert_eq!(tr_fast.counters.ht_ops, outer * 7);
}

#[test]
fn exact_inner_pursuit_recovers_noiseless_signals() {
    let spec = SyntheticSpec {
        n: 400,
        d: 800,
        s_star: 20,
        covariance: Covariance::Identity,
        noise_variance: 0.0,
        seed: 12,
    };
    let (data, truth) = generate_synthetic(&spec).unwrap();
    let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
    let run_cfg = cfg(24, 0.0, 0, InnerMode::Plain, 30.0);
    let (_, trace) = grasp_run(
        &obj,
        &run_cfg,
        &DenseVector::zeros(spec.d),
        Some(&truth.x_star),
    )
    .unwrap();
    assert!(!trace.diverged);
    assert!(best_error(&trace) <= 1e-6);
}

#[test]
fn tuned_epochs_satisfy_the_slack_descent_audit() {
    let spec = SyntheticSpec {
        n: 150,
        d: 300,
        s_star: 10,
        covariance: Covariance::Identity,
        noise_variance: 0.0,
        seed: 13,
    };
    let (data, truth) = generate_synthetic(&spec).unwrap();
    let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
    let s = 12;
    let x0 = DenseVector::zeros(spec.d);

    // one exact outer iteration produces a realistic s-sparse iterate
    let g0 = obj.full_gradient(&x0).unwrap();
    let t0 = top_support(&g0, SparsityLevel::new(2 * s).unwrap()).unwrap();
    let b0 = restricted_minimize(&obj, &t0, &x0, 1e-10).unwrap();
    let x_prev = rgrasp::hard_threshold(&b0.x, SparsityLevel::new(s).unwrap()).unwrap();
    assert!(x_prev.distance(&truth.x_star) > 1e-3);

    let g1 = obj.full_gradient(&x_prev).unwrap();
    let t1 = top_support(&g1, SparsityLevel::new(2 * s).unwrap())
        .unwrap()
        .union(&x_prev.support());
    let b_hat = restricted_minimize(&obj, &t1, &x_prev, 1e-10).unwrap().x;

    // long, conservatively stepped epoch: the variance floor scales with η,
    // so halving from the recovery-tuned rate buys contraction headroom
    let eta = 2.0 / data.max_squared_column_norm();
    let epoch_cfg = SolverConfig {
        pass_budget: None,
        ..cfg(s, eta, 8 * spec.n, InnerMode::Plain, 0.0)
    };
    let b = semi_stochastic_epoch(&obj, &x_prev, &t1, &epoch_cfg).unwrap();

    assert!(audit_descent(&b, &b_hat, &x_prev, 0.5));
    assert!(!audit_descent(&x_prev, &b_hat, &x_prev, 0.5));
    let ratio = b.distance(&b_hat) / x_prev.distance(&b_hat);
    println!("slack-descent ratio: {ratio:.4}");
}

fn sign_labels(data: &SparseDataset) -> SparseDataset {
    let labels = data
        .labels()
        .iter()
        .map(|&y| if y >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    SparseDataset::new(data.columns().to_vec(), labels, data.dim()).unwrap()
}

#[test]
fn logistic_pursuit_reduces_the_objective() {
    let spec = SyntheticSpec {
        n: 300,
        d: 600,
        s_star: 30,
        covariance: Covariance::Identity,
        noise_variance: 0.01,
        seed: 17,
    };
    let (data, _) = generate_synthetic(&spec).unwrap();
    let data = sign_labels(&data);
    let obj = Objective::new(&data, LossKind::Logistic).unwrap();
    let eta = 4.0 / (data.max_squared_column_norm() / 4.0);
    let run_cfg = cfg(36, eta, 150, InnerMode::Fast, 30.0);
    let mut inner = SemiStochasticSolver::new(&run_cfg);
    let (x, trace) = rgrasp_run(
        &obj,
        &run_cfg,
        &mut inner,
        &DenseVector::zeros(spec.d),
        None,
    )
    .unwrap();
    assert!(!trace.diverged);
    assert!(x.nnz() <= 36);
    let first = trace.records[0].objective;
    let last = trace.records.last().unwrap().objective;
    assert!((first - 2f64.ln()).abs() < 1e-12);
    assert!(last < 0.2, "final logistic objective {last}");
}

#[test]
fn tuned_epoch_objective_trend_is_monotone() {
    let spec = SyntheticSpec {
        n: 500,
        d: 1000,
        s_star: 50,
        covariance: Covariance::Identity,
        noise_variance: 0.01,
        seed: 21,
    };
    let (data, truth) = generate_synthetic(&spec).unwrap();
    let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
    let eta = 4.0 / data.max_squared_column_norm();
    let run_cfg = cfg(60, eta, 250, InnerMode::Plain, 30.0);
    let mut inner = SemiStochasticSolver::new(&run_cfg);
    let (_, trace) = rgrasp_run(
        &obj,
        &run_cfg,
        &mut inner,
        &DenseVector::zeros(spec.d),
        Some(&truth.x_star),
    )
    .unwrap();
    assert!(trace.records.len() > 10);
    let slack = 1e-8 * trace.records[1].objective;
    for pair in trace.records[1..].windows(2) {
        assert!(
            pair[1].objective <= pair[0].objective + slack,
            "uptick at iter {}: {} -> {}",
            pair[1].iter,
            pair[0].objective,
            pair[1].objective
        );
    }
}

#[test]
fn noisy_estimation_stays_near_the_exact_inner_baseline() {
    let spec = SyntheticSpec {
        n: 500,
        d: 1000,
        s_star: 50,
        covariance: Covariance::Identity,
        noise_variance: 0.01,
        seed: 50,
    };
    let (data, truth) = generate_synthetic(&spec).unwrap();
    let obj = Objective::new(&data, LossKind::LeastSquares).unwrap();
    let x0 = DenseVector::zeros(spec.d);

    let genie = restricted_minimize(&obj, &truth.support, &x0, 1e-10).unwrap();
    let genie_err = genie.x.distance(&truth.x_star) / truth.x_star.norm();

    let exact_cfg = cfg(60, 0.0, 0, InnerMode::Plain, 30.0);
    let (_, exact) = grasp_run(&obj, &exact_cfg, &x0, Some(&truth.x_star)).unwrap();
    let exact_err = best_error(&exact);

    let eta = 8.0 / data.max_squared_column_norm();
    let run_cfg = cfg(60, eta, 125, InnerMode::Plain, 30.0);
    let mut inner = SemiStochasticSolver::new(&run_cfg);
    let (_, trace) = rgrasp_run(&obj, &run_cfg, &mut inner, &x0, Some(&truth.x_star)).unwrap();
    let err = best_error(&trace);

    println!("noisy errors: genie={genie_err:.3e} exact={exact_err:.3e} stochastic={err:.3e}");
    assert!(err <= 1.5 * exact_err, "{err} vs exact {exact_err}");
    assert!(err <= 2.5 * genie_err, "{err} vs genie {genie_err}");
}
