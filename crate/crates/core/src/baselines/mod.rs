//! Competitor splitting methods sharing the problem and trace infrastructure:
//! stochastic ADMM, stochastic SPB-SCPRSM, batch ADMM and SC-PRSM.

mod quad;

pub use quad::QuadSolver;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkit::{all_finite, dist2, Psd};
use crate::problem::{Loss, SeparableProblem};
use crate::splitters::{check_relaxation, outer_step, SolverConfig, SolverState};
use crate::trace::{Algorithm, Recorder, ScheduleStamp, SolveOutput, StopReason, TraceOptions};

/// How the x1 block is updated by the two-factor relaxed scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum X1Step {
    /// One sampled gradient, linearized Lagrangian with a `1/(2 eta)` proximal term.
    #[default]
    Linearized,
    /// Exact minimization of the (S-proximal) augmented Lagrangian; least squares only.
    Exact,
}

/// Sample selection for the stochastic methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    #[default]
    Uniform,
    /// `xi_k = k mod n`, for reproducible trajectories in tests.
    Cyclic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    /// Shared parameters; `s` and `a` are ignored by the ADMM variants and `alpha`
    /// serves as the single factor of SC-PRSM.
    pub base: SolverConfig,
    /// Initial step; `1 / nu` when unset.
    pub eta0: Option<f64>,
    /// `eta_{k+1} = eta0 / (k+1)^decay`.
    pub eta_decay: f64,
    pub x1_step: X1Step,
    pub sampling: Sampling,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { base: SolverConfig::default(), eta0: None, eta_decay: 0.5, x1_step: X1Step::Linearized, sampling: Sampling::Uniform }
    }
}

impl BaselineConfig {
    pub fn from_base(base: SolverConfig) -> Self {
        Self { base, ..Self::default() }
    }

    fn resolved_eta0(&self, problem: &SeparableProblem) -> Result<f64> {
        let eta0 = self.eta0.unwrap_or_else(|| 1.0 / problem.smoothness_constant());
        if eta0 > 0.0 && eta0.is_finite() {
            Ok(eta0)
        } else {
            Err(Error::invalid(format!(
                "step eta0 = {eta0} leaves the linearized subproblem without curvature"
            )))
        }
    }
}

/// Iteration-specific choices of the shared scheme.
struct Scheme {
    algorithm: Algorithm,
    alpha: f64,
    gamma: f64,
    s: Psd,
    a: f64,
    x1_step: X1Step,
}

pub fn s_admm_solve(problem: &SeparableProblem, cfg: &BaselineConfig, opts: &TraceOptions) -> Result<SolveOutput> {
    let scheme = Scheme { algorithm: Algorithm::SAdmm, alpha: 0.0, gamma: 1.0, s: Psd::Zero, a: 0.0, x1_step: X1Step::Linearized };
    run_scheme(problem, cfg, &scheme, opts)
}

/// Two-factor scheme with S- and T-proximal terms; `cfg.x1_step` selects a
/// linearized stochastic or an exact x1 update.
pub fn sspb_scprsm_solve(problem: &SeparableProblem, cfg: &BaselineConfig, opts: &TraceOptions) -> Result<SolveOutput> {
    check_relaxation(cfg.base.alpha, cfg.base.gamma)?;
    let scheme = Scheme {
        algorithm: Algorithm::SspbScprsm,
        alpha: cfg.base.alpha,
        gamma: cfg.base.gamma,
        s: cfg.base.s.clone(),
        a: cfg.base.a,
        x1_step: cfg.x1_step,
    };
    run_scheme(problem, cfg, &scheme, opts)
}

pub fn batch_admm_solve(problem: &SeparableProblem, cfg: &BaselineConfig, opts: &TraceOptions) -> Result<SolveOutput> {
    let scheme = Scheme { algorithm: Algorithm::BatchAdmm, alpha: 0.0, gamma: 1.0, s: Psd::Zero, a: 0.0, x1_step: X1Step::Exact };
    run_scheme(problem, cfg, &scheme, opts)
}

/// Strictly contractive PRSM with one relaxation factor `cfg.base.alpha in (0,1)`.
pub fn sc_prsm_solve(problem: &SeparableProblem, cfg: &BaselineConfig, opts: &TraceOptions) -> Result<SolveOutput> {
    let alpha = cfg.base.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("SC-PRSM needs alpha in (0, 1), got {alpha}")));
    }
    let scheme = Scheme { algorithm: Algorithm::ScPrsm, alpha, gamma: alpha, s: Psd::Zero, a: 0.0, x1_step: X1Step::Exact };
    run_scheme(problem, cfg, &scheme, opts)
}

/// Dispatches by algorithm tag; SS-PRSM goes to the splitters module.
pub fn solve_with(algorithm: Algorithm, problem: &SeparableProblem, cfg: &BaselineConfig, opts: &TraceOptions) -> Result<SolveOutput> {
    match algorithm {
        Algorithm::SsPrsm => crate::splitters::solve_traced(problem, &cfg.base, opts),
        Algorithm::SAdmm => s_admm_solve(problem, cfg, opts),
        Algorithm::SspbScprsm => sspb_scprsm_solve(problem, cfg, opts),
        Algorithm::BatchAdmm => batch_admm_solve(problem, cfg, opts),
        Algorithm::ScPrsm => sc_prsm_solve(problem, cfg, opts),
    }
}

fn validate(problem: &SeparableProblem, cfg: &BaselineConfig, scheme: &Scheme) -> Result<()> {
    let b = &cfg.base;
    if !(b.beta > 0.0 && b.beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be positive and finite, got {}", b.beta)));
    }
    if !(b.eps > 0.0) || b.max_outer == 0 {
        return Err(Error::invalid("eps must be positive and max_outer at least 1"));
    }
    if !(scheme.a >= 0.0 && scheme.a.is_finite()) {
        return Err(Error::invalid(format!("proximal weight a must be >= 0, got {}", scheme.a)));
    }
    scheme.s.validate()?;
    scheme.s.check_dim(problem.dim1())?;
    if !problem.is_consensus() {
        return Err(Error::Unsupported(format!("{} is implemented for consensus instances only", scheme.algorithm)));
    }
    if scheme.x1_step == X1Step::Exact && problem.loss() != Loss::LeastSquares {
        return Err(Error::Unsupported(format!(
            "{} needs a closed-form x1 update, which logistic loss lacks",
            scheme.algorithm
        )));
    }
    if scheme.x1_step == X1Step::Linearized && !(cfg.eta_decay >= 0.0 && cfg.eta_decay.is_finite()) {
        return Err(Error::invalid(format!("step decay must be >= 0, got {}", cfg.eta_decay)));
    }
    Ok(())
}

fn run_scheme(problem: &SeparableProblem, cfg: &BaselineConfig, scheme: &Scheme, opts: &TraceOptions) -> Result<SolveOutput> {
    validate(problem, cfg, scheme)?;
    let base = &cfg.base;
    let n = problem.n_samples();
    let p = problem.dim1();
    let mut state = SolverState::new(problem, base);
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed);
    let mut rec = Recorder::new(opts, scheme.algorithm);

    let (quad, eta0) = match scheme.x1_step {
        X1Step::Exact => {
            let d: Vec<f64> = (0..p).map(|j| base.beta + scheme.s.diag(j)).collect();
            (Some(QuadSolver::new(problem.data(), 2.0 / n as f64, d)?), 0.0)
        }
        X1Step::Linearized => (None, cfg.resolved_eta0(problem)?),
    };
    // (2/n) X^T y, reused by every exact solve
    let xty: Vec<f64> = match quad {
        Some(_) => problem.data().matvec_t(problem.response())?.iter().map(|v| v * 2.0 / n as f64).collect(),
        None => Vec::new(),
    };

    let mut stamp = ScheduleStamp::NONE;
    let mut g = vec![0.0; p];
    // dual residual beta ||x2^{k+1} - x2^k||; a zero primal residual alone can
    // occur while the multiplier is still moving
    let mut dual = f64::INFINITY;
    let stop = loop {
        if state.residual_norm(problem) <= base.eps && dual <= base.eps {
            break StopReason::Converged;
        }
        if state.k >= base.max_outer {
            break StopReason::MaxOuter;
        }
        if base.max_data_passes.is_some_and(|b| state.counters.data_passes >= b) {
            break StopReason::Budget;
        }
        let x1_new = match &quad {
            Some(q) => {
                let rhs: Vec<f64> = (0..p)
                    .map(|j| xty[j] + state.lambda[j] + base.beta * state.x2[j] + scheme.s.diag(j) * state.x1[j])
                    .collect();
                state.counters.data_passes += 1.0;
                state.counters.grad_evals += n as u64;
                q.solve(&rhs)
            }
            None => {
                let eta = eta0 / ((state.k + 1) as f64).powf(cfg.eta_decay);
                stamp = ScheduleStamp { c_k: None, m_k: None, eta_k: Some(eta) };
                let xi = match cfg.sampling {
                    Sampling::Uniform => rng.random_range(0..n),
                    Sampling::Cyclic => state.k % n,
                };
                g.iter_mut().for_each(|v| *v = 0.0);
                problem.sample_row(xi).axpy(problem.component_coefficient(xi, &state.x1), &mut g);
                state.counters.data_passes += 1.0 / n as f64;
                state.counters.grad_evals += 1;
                let inv = 1.0 / eta;
                (0..p)
                    .map(|j| {
                        let sj = scheme.s.diag(j);
                        ((inv + sj) * state.x1[j] + base.beta * state.x2[j] + state.lambda[j] - g[j])
                            / (inv + base.beta + sj)
                    })
                    .collect()
            }
        };
        let x2_prev = std::mem::take(&mut state.x2);
        state.x2 = x2_prev.clone();
        outer_step(problem, &mut state, base.beta, scheme.alpha, scheme.gamma, scheme.a, x1_new)?;
        dual = base.beta * dist2(&state.x2, &x2_prev);
        if !(all_finite(&state.x1) && all_finite(&state.x2) && all_finite(&state.lambda)) {
            return Err(Error::Divergence {
                algorithm: scheme.algorithm.name().into(),
                iteration: state.k,
                beta: base.beta,
                eta: stamp.eta_k.unwrap_or(f64::NAN),
                trace: rec.into_records(),
            });
        }
        if rec.due(state.k) {
            rec.record(problem, state.k, state.counters, &state.avg, &state.x1, &state.x2, stamp);
        }
    };
    if state.k > 0 {
        rec.record(problem, state.k, state.counters, &state.avg, &state.x1, &state.x2, stamp);
    }
    Ok(SolveOutput {
        algorithm: scheme.algorithm,
        x1_avg: state.avg.mean1(),
        x2_avg: state.avg.mean2(),
        lambda_avg: state.avg.mean_lambda(),
        x1: state.x1,
        x2: state.x2,
        lambda: state.lambda,
        trace: rec.into_records(),
        stop,
        outer_iterations: state.k,
        counters: state.counters,
        factorizations: usize::from(quad.is_some()),
    })
}
