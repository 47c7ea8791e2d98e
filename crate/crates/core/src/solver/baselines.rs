//! Reference hard-thresholding solvers: full-gradient, stochastic, and
//! stochastic variance-reduced.
//!
//! These share the trace conventions of the pursuit framework: iterate
//! records carry cumulative effective passes (one pass = n component
//! gradients), a diverged run truncates the trace rather than erroring,
//! and the returned estimate always matches the last recorded iterate.
//! The stochastic solvers record once per block of n steps so that their
//! traces align with the full-gradient ones on the pass axis.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::objective::Objective;
use crate::solver::{Counters, RunState, RunTrace, SolverConfig};
use crate::vector::{hard_threshold_in_place, DenseVector};
use crate::Result;

/// Full-gradient hard thresholding: x ← H_s(x − η∇F(x)), one thresholding
/// per iteration. `epoch_length` and `ht_per_epoch` are ignored.
pub fn fght_run(
    obj: &Objective,
    cfg: &SolverConfig,
    x0: &DenseVector,
    truth: Option<&DenseVector>,
) -> Result<(DenseVector, RunTrace)> {
    let mut state = RunState::new(obj, cfg, x0, truth)?;
    let n = obj.n();
    let eta = cfg.step_size;
    let mut counters = Counters::default();
    let mut x = x0.clone();
    let mut gradient = vec![0.0; obj.dim()];
    let mut z = vec![0.0; obj.dim()];
    let mut scratch = Vec::new();
    for t in 1..=cfg.outer_iters {
        if !state.budget_left(cfg, &counters) {
            break;
        }
        gradient.iter_mut().for_each(|g| *g = 0.0);
        obj.accumulate_gradient(x.as_slice(), &mut gradient);
        counters.passes += 1.0;
        counters.grad_evals += n as u64;
        for (out, (&xi, &gi)) in z.iter_mut().zip(x.as_slice().iter().zip(&gradient)) {
            *out = xi - eta * gi;
        }
        if z.iter().any(|v| !v.is_finite()) {
            state.mark_diverged();
            break;
        }
        hard_threshold_in_place(&mut z, cfg.sparsity, &mut scratch);
        counters.ht_ops += 1;
        x.as_mut_slice().copy_from_slice(&z);

        let objective = obj.loss_slice(x.as_slice());
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

/// Stochastic gradient hard thresholding: per step draw i, take a component
/// gradient step, and threshold. Records once per block of n steps;
/// `outer_iters` counts blocks. `epoch_length` and `ht_per_epoch` are
/// ignored.
pub fn sght_run(
    obj: &Objective,
    cfg: &SolverConfig,
    x0: &DenseVector,
    truth: Option<&DenseVector>,
) -> Result<(DenseVector, RunTrace)> {
    let mut state = RunState::new(obj, cfg, x0, truth)?;
    let n = obj.n();
    let eta = cfg.step_size;
    let mut counters = Counters::default();
    let mut x = x0.clone();
    let mut recorded = x.clone();
    let mut scratch = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    'blocks: for t in 1..=cfg.outer_iters {
        if !state.budget_left(cfg, &counters) {
            break;
        }
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let col = obj.data().column(i);
            let margin = col.dot_slice(x.as_slice());
            if !margin.is_finite() {
                state.mark_diverged();
                x = recorded;
                break 'blocks;
            }
            let a = obj.factor(obj.data().label(i), margin);
            let z = x.as_mut_slice();
            let mut corrupt = false;
            for (k, v) in col.iter() {
                z[k] -= eta * (a * v);
                corrupt |= !z[k].is_finite();
            }
            if corrupt {
                state.mark_diverged();
                x = recorded;
                break 'blocks;
            }
            hard_threshold_in_place(z, cfg.sparsity, &mut scratch);
            counters.ht_ops += 1;
            counters.grad_evals += 1;
            counters.passes = counters.grad_evals as f64 / n as f64;
        }
        let objective = obj.loss_slice(x.as_slice());
        let blowup = state.is_blowup(objective);
        if blowup {
            state.mark_diverged();
        }
        state.push(t, objective, &x, &counters);
        if blowup {
            break;
        }
        recorded.as_mut_slice().copy_from_slice(x.as_slice());
    }
    Ok((x, state.finish(counters)))
}

/// Stochastic variance-reduced gradient hard thresholding. Each epoch
/// snapshots the full gradient, then runs `epoch_length` corrected steps
/// with a thresholding after every step and one more when the epoch's
/// result is installed. The dense −ηg term makes every step Θ(d);
/// `ht_per_epoch` is ignored.
pub fn svrght_run(
    obj: &Objective,
    cfg: &SolverConfig,
    x0: &DenseVector,
    truth: Option<&DenseVector>,
) -> Result<(DenseVector, RunTrace)> {
    let mut state = RunState::new(obj, cfg, x0, truth)?;
    let n = obj.n();
    let eta = cfg.step_size;
    let mut counters = Counters::default();
    let mut x = x0.clone();
    let mut gradient = Vec::new();
    let mut margins = Vec::new();
    let mut z = vec![0.0; obj.dim()];
    let mut scratch = Vec::new();
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
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t as u64);
        z.copy_from_slice(x.as_slice());
        let mut executed = 0u64;
        let mut epoch_ok = true;
        let timer = cfg.timing.then(Instant::now);
        for _ in 0..cfg.epoch_length {
            let i = rng.random_range(0..n);
            let col = obj.data().column(i);
            let label = obj.data().label(i);
            let margin = col.dot_slice(&z);
            if !margin.is_finite() {
                epoch_ok = false;
                break;
            }
            let correction = obj.factor(label, margin) - obj.factor(label, margins[i]);
            for (k, v) in col.iter() {
                z[k] -= eta * (correction * v);
            }
            for (zk, &gk) in z.iter_mut().zip(&gradient) {
                *zk -= eta * gk;
            }
            hard_threshold_in_place(&mut z, cfg.sparsity, &mut scratch);
            counters.ht_ops += 1;
            executed += 1;
        }
        if let Some(start) = timer {
            counters.inner_nanos += start.elapsed().as_nanos();
        }
        counters.inner_steps += executed;
        counters.grad_evals += 2 * executed;
        counters.passes += 2.0 * executed as f64 / n as f64;
        if !epoch_ok || z.iter().any(|v| !v.is_finite()) {
            state.mark_diverged();
            break;
        }
        hard_threshold_in_place(&mut z, cfg.sparsity, &mut scratch);
        counters.ht_ops += 1;
        x.as_mut_slice().copy_from_slice(&z);

        let objective = obj.loss_slice(x.as_slice());
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
