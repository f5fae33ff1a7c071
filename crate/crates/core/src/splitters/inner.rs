use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::numkit::{all_finite, norm2, Psd};
use crate::problem::{Anchor, SeparableProblem};

use super::schedule::{inner_schedule, InnerSchedule, ScheduleConstants};
use super::{SolverConfig, SolverState};

/// Variance-reduced direction
/// `G'(x, xi) - G'(anchor, xi) + mu`, where `G'(., xi)` is the per-sample
/// surrogate gradient and `mu` the full surrogate gradient at the anchor.
/// The constraint and proximal parts cancel down to `(beta A^T A + S)(x - anchor)`.
#[allow(clippy::too_many_arguments)]
pub fn variance_reduced_gradient(
    problem: &SeparableProblem,
    x: &[f64],
    anchor: &[f64],
    mu: &[f64],
    xi: usize,
    beta: f64,
    s: &Psd,
) -> Result<Vec<f64>> {
    if xi >= problem.n_samples() {
        return Err(Error::invalid(format!("sample index {xi} out of range for {} samples", problem.n_samples())));
    }
    check_dim("x", problem.dim1(), x.len())?;
    check_dim("anchor", problem.dim1(), anchor.len())?;
    check_dim("mu", problem.dim1(), mu.len())?;
    s.check_dim(problem.dim1())?;
    let mut d = mu.to_vec();
    let mut diff = vec![0.0; x.len()];
    accumulate_direction(problem, x, anchor, xi, beta, s, &mut diff, &mut d);
    Ok(d)
}

/// `d += G'(x, xi) - G'(anchor, xi)`, using `diff` as scratch.
#[inline]
#[allow(clippy::too_many_arguments)]
fn accumulate_direction(
    problem: &SeparableProblem,
    x: &[f64],
    anchor: &[f64],
    xi: usize,
    beta: f64,
    s: &Psd,
    diff: &mut [f64],
    d: &mut [f64],
) {
    for ((dj, xj), aj) in diff.iter_mut().zip(x).zip(anchor) {
        *dj = xj - aj;
    }
    problem.add_ata(beta, diff, d);
    s.apply_add(1.0, diff, d);
    problem.add_component_difference(xi, x, anchor, d);
}

/// Source of the per-step direction inside the inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum InnerGradient {
    /// One uniformly drawn sample per step, variance-reduced.
    Stochastic,
    /// Exact surrogate gradient at every step (deterministic test hook).
    #[cfg_attr(not(test), allow(dead_code))]
    Full,
}

#[derive(Debug, Clone)]
pub struct InnerOutcome {
    /// Average of `x_{1,0..M_k-1}`.
    pub x1: Vec<f64>,
    pub c_k: f64,
    pub m_k: usize,
    pub eta_k: f64,
}

/// One variance-reduced inner loop on the x1-surrogate anchored at the
/// current state. Updates the work counters and `state.c_k`.
pub fn ss_prsm_inner(
    problem: &SeparableProblem,
    state: &mut SolverState,
    consts: &ScheduleConstants,
    config: &SolverConfig,
) -> Result<InnerOutcome> {
    ss_prsm_inner_with(problem, state, consts, config, InnerGradient::Stochastic)
}

pub(crate) fn ss_prsm_inner_with(
    problem: &SeparableProblem,
    state: &mut SolverState,
    consts: &ScheduleConstants,
    config: &SolverConfig,
    mode: InnerGradient,
) -> Result<InnerOutcome> {
    let n = problem.n_samples();
    let beta = config.beta;
    let anchor_x1 = state.x1.clone();
    let anchor = Anchor { x1: &anchor_x1, x2: &state.x2, lambda: &state.lambda };
    let mu = problem.surrogate_gradient(&anchor_x1, &anchor, beta, &config.s)?;
    let c_k = norm2(&mu);
    state.c_k = c_k;

    let cap = config.m_cap.resolve(n);
    let (m_k, eta_k) = match config.schedule {
        InnerSchedule::Decaying => inner_schedule(state.k, consts, c_k, cap),
        InnerSchedule::ConstantStep { scale } => {
            (cap.unwrap_or(2 * n).max(1), scale / consts.surrogate_lipschitz(beta))
        }
    };

    let mut x = anchor_x1.clone();
    let mut sum = anchor_x1.clone();
    let mut d = vec![0.0; x.len()];
    let mut diff = vec![0.0; x.len()];
    for _ in 1..m_k {
        match mode {
            InnerGradient::Stochastic => {
                let xi = state.rng.random_range(0..n);
                d.copy_from_slice(&mu);
                accumulate_direction(problem, &x, &anchor_x1, xi, beta, &config.s, &mut diff, &mut d);
            }
            InnerGradient::Full => {
                let anchor = Anchor { x1: &anchor_x1, x2: &state.x2, lambda: &state.lambda };
                d = problem.surrogate_gradient(&x, &anchor, beta, &config.s)?;
            }
        }
        for ((xj, dj), sj) in x.iter_mut().zip(&d).zip(sum.iter_mut()) {
            *xj -= eta_k * dj;
            *sj += *xj;
        }
        if !all_finite(&x) {
            return Err(Error::Divergence {
                algorithm: "ss-prsm".into(),
                iteration: state.k + 1,
                beta,
                eta: eta_k,
                trace: Vec::new(),
            });
        }
    }
    let inv = 1.0 / m_k as f64;
    sum.iter_mut().for_each(|v| *v *= inv);

    state.counters.grad_evals += 2 * m_k as u64 + n as u64;
    state.counters.data_passes += 1.0 + 2.0 * m_k as f64 / n as f64;
    Ok(InnerOutcome { x1: sum, c_k, m_k, eta_k })
}
