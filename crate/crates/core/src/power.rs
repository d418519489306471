//! Power iteration of the affine map `F <- αBF + (1-α)Y`.
//!
//! The map contracts with factor `α` in the weighted norm `‖·‖_w`,
//! `w = d^(1-σ)`, so convergence is monitored in that norm.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::FeatureMatrix;
use crate::operators::{weighted_norm_matrix, DiffusionOperator};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSolveReport {
    pub iterations: usize,
    /// `‖F^(t+1) − F^t‖_w` of the last step.
    pub final_step: f64,
    /// Same step in the max norm.
    pub final_step_inf: f64,
    /// `‖F^(t+1) − F^t‖_w / ‖F^t − F^(t−1)‖_w` for every step after the first.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

fn check_dims(f: &FeatureMatrix, op: &DiffusionOperator, y: &FeatureMatrix) -> Result<()> {
    let n = op.n();
    y.check_shape(n, y.cols(), "Y")?;
    if y.rows() != n {
        return Err(Error::dims(format!("Y has {} rows, operator {n}", y.rows())));
    }
    f.check_shape(n, y.cols(), "F")
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must be in [0,1), got {alpha}")));
    }
    Ok(())
}

/// Writes `αBF + (1-α)Y` into `out`. Rows are computed in parallel, each with
/// a fixed sequential accumulation order, so the result does not depend on
/// the number of worker threads.
pub fn power_step_into(
    f: &FeatureMatrix,
    op: &DiffusionOperator,
    y: &FeatureMatrix,
    alpha: f64,
    out: &mut FeatureMatrix,
) {
    let k = f.cols();
    if k == 0 {
        return;
    }
    out.as_mut_slice()
        .par_chunks_mut(k)
        .enumerate()
        .for_each(|(i, row)| {
            op.row_apply(i, f, row);
            for (v, yv) in row.iter_mut().zip(y.row(i)) {
                *v = alpha * *v + (1.0 - alpha) * yv;
            }
        });
}

/// One application of the affine map.
pub fn power_step(
    f: &FeatureMatrix,
    op: &DiffusionOperator,
    y: &FeatureMatrix,
    alpha: f64,
) -> Result<FeatureMatrix> {
    check_dims(f, op, y)?;
    check_alpha(alpha)?;
    let mut out = FeatureMatrix::zeros(f.rows(), f.cols());
    power_step_into(f, op, y, alpha, &mut out);
    Ok(out)
}

/// Iterates until `‖F^(t+1) − F^t‖_w <= tol` or `max_iters` steps.
pub fn power_solve(
    f0: &FeatureMatrix,
    op: &DiffusionOperator,
    y: &FeatureMatrix,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(FeatureMatrix, PowerSolveReport)> {
    power_solve_observed(f0, op, y, alpha, tol, max_iters, |_, _| {})
}

/// [`power_solve`] calling `observe(t, F^t)` after every step `t = 1, 2, ...`.
pub fn power_solve_observed<O>(
    f0: &FeatureMatrix,
    op: &DiffusionOperator,
    y: &FeatureMatrix,
    alpha: f64,
    tol: f64,
    max_iters: usize,
    mut observe: O,
) -> Result<(FeatureMatrix, PowerSolveReport)>
where
    O: FnMut(usize, &FeatureMatrix),
{
    check_dims(f0, op, y)?;
    check_alpha(alpha)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tol must be positive, got {tol}")));
    }
    let w = op.perron_weights().weights;
    let mut cur = f0.clone();
    let mut next = FeatureMatrix::zeros(f0.rows(), f0.cols());
    let mut diff = FeatureMatrix::zeros(f0.rows(), f0.cols());
    let mut report = PowerSolveReport {
        iterations: 0,
        final_step: f64::INFINITY,
        final_step_inf: f64::INFINITY,
        ratios: Vec::new(),
        converged: false,
    };
    let mut prev_step = None;
    for t in 1..=max_iters {
        power_step_into(&cur, op, y, alpha, &mut next);
        for ((d, a), b) in diff
            .as_mut_slice()
            .iter_mut()
            .zip(next.as_slice())
            .zip(cur.as_slice())
        {
            *d = a - b;
        }
        let step = weighted_norm_matrix(&diff, &w)?;
        if let Some(p) = prev_step {
            if p > 0.0 {
                report.ratios.push(step / p);
            }
        }
        prev_step = Some(step);
        report.iterations = t;
        report.final_step = step;
        report.final_step_inf = diff.max_abs();
        std::mem::swap(&mut cur, &mut next);
        observe(t, &cur);
        if step <= tol {
            report.converged = true;
            break;
        }
    }
    Ok((cur, report))
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
