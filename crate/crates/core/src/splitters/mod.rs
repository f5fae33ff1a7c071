//! Stochastic scalable Peaceman-Rachford splitting.

mod inner;
mod schedule;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkit::{all_finite, norm2, Psd};
use crate::problem::SeparableProblem;
use crate::trace::{
    Algorithm, Counters, Ergodic, Recorder, ScheduleStamp, SolveOutput, StopReason, TraceOptions,
};

pub(crate) use inner::{ss_prsm_inner_with, InnerGradient};
pub use inner::{ss_prsm_inner, variance_reduced_gradient, InnerOutcome};
pub use schedule::{check_relaxation, gamma_max, inner_schedule, InnerSchedule, MCap, ScheduleConstants};

/// Starting value of the regularized block; the smooth block and multiplier start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitX2 {
    #[default]
    Ones,
    Zeros,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub beta: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Proximal matrix of the x1 block.
    pub s: Psd,
    /// Proximal weight `T = a I` of the x2 block.
    pub a: f64,
    /// Stop once `||A x1 + B x2 - b|| <= eps`.
    pub eps: f64,
    pub max_outer: usize,
    /// Replaces the computed schedule constant `C`.
    pub c_override: Option<f64>,
    pub m_cap: MCap,
    /// Diameter bound `D` in `C`; the problem dimension when unset.
    pub diameter: Option<f64>,
    pub seed: u64,
    pub init_x2: InitX2,
    pub schedule: InnerSchedule,
    /// Stop before an iteration once this many data passes have been spent.
    pub max_data_passes: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            alpha: 0.9,
            gamma: 0.1,
            s: Psd::identity(),
            a: 1.0,
            eps: 1e-11,
            max_outer: 1000,
            c_override: None,
            m_cap: MCap::TwiceSamples,
            diameter: None,
            seed: 0,
            init_x2: InitX2::Ones,
            schedule: InnerSchedule::Decaying,
            max_data_passes: None,
        }
    }
}

impl SolverConfig {
    /// Checks the relaxation gate and the positivity of every parameter.
    pub fn validate(&self) -> Result<()> {
        positive("beta", self.beta)?;
        check_relaxation(self.alpha, self.gamma)?;
        self.s.validate()?;
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::invalid(format!("proximal weight a must be >= 0, got {}", self.a)));
        }
        positive("eps", self.eps)?;
        if self.max_outer == 0 {
            return Err(Error::invalid("max_outer must be at least 1"));
        }
        if let Some(c) = self.c_override {
            positive("C", c)?;
        }
        if let Some(d) = self.diameter {
            positive("diameter", d)?;
        }
        if self.m_cap == MCap::Fixed(0) {
            return Err(Error::invalid("inner step cap must be at least 1"));
        }
        if let InnerSchedule::ConstantStep { scale } = self.schedule {
            positive("step scale", scale)?;
        }
        if let Some(p) = self.max_data_passes {
            positive("max_data_passes", p)?;
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Mutable iterate state of one run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Completed outer iterations.
    pub k: usize,
    pub avg: Ergodic,
    pub counters: Counters,
    /// Norm of the anchor gradient of the latest inner loop.
    pub c_k: f64,
    pub(crate) rng: ChaCha8Rng,
}

impl SolverState {
    pub fn new(problem: &SeparableProblem, config: &SolverConfig) -> Self {
        let x2_init = match config.init_x2 {
            InitX2::Ones => 1.0,
            InitX2::Zeros => 0.0,
        };
        Self {
            x1: vec![0.0; problem.dim1()],
            x2: vec![x2_init; problem.dim2()],
            lambda: vec![0.0; problem.m()],
            k: 0,
            avg: Ergodic::new(problem.dim1(), problem.dim2(), problem.m()),
            counters: Counters::default(),
            c_k: 0.0,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        }
    }

    pub fn residual_norm(&self, problem: &SeparableProblem) -> f64 {
        norm2(&problem.residual(&self.x1, &self.x2).expect("state dimensions match problem"))
    }
}

/// Relaxed multiplier / x2 / relaxed multiplier sweep given a fresh x1, then
/// folds the new triple into the ergodic average.
pub fn outer_step(
    problem: &SeparableProblem,
    state: &mut SolverState,
    beta: f64,
    alpha: f64,
    gamma: f64,
    a: f64,
    x1_new: Vec<f64>,
) -> Result<()> {
    let r = problem.residual(&x1_new, &state.x2)?;
    let mut lambda_half = state.lambda.clone();
    for (l, ri) in lambda_half.iter_mut().zip(&r) {
        *l -= alpha * beta * ri;
    }
    let x2_new = problem.x2_subproblem(&x1_new, &state.x2, &lambda_half, beta, a)?;
    let r = problem.residual(&x1_new, &x2_new)?;
    for (l, ri) in lambda_half.iter_mut().zip(&r) {
        *l -= gamma * beta * ri;
    }
    state.x1 = x1_new;
    state.x2 = x2_new;
    state.lambda = lambda_half;
    state.k += 1;
    state.avg.push(&state.x1, &state.x2, &state.lambda);
    Ok(())
}

/// Iterative driver exposing one outer iteration at a time.
pub struct SsPrsm<'p> {
    problem: &'p SeparableProblem,
    config: SolverConfig,
    consts: ScheduleConstants,
    state: SolverState,
    last: ScheduleStamp,
    mode: InnerGradient,
}

impl<'p> SsPrsm<'p> {
    pub fn new(problem: &'p SeparableProblem, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        config.s.check_dim(problem.dim1())?;
        let consts = ScheduleConstants::compute(problem, &config);
        let state = SolverState::new(problem, &config);
        Ok(Self { problem, config, consts, state, last: ScheduleStamp::NONE, mode: InnerGradient::Stochastic })
    }

    /// Replaces the sampled inner direction by the exact surrogate gradient.
    #[cfg(test)]
    pub(crate) fn with_full_gradient(mut self) -> Self {
        self.mode = InnerGradient::Full;
        self
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn constants(&self) -> &ScheduleConstants {
        &self.consts
    }

    pub fn last_schedule(&self) -> ScheduleStamp {
        self.last
    }

    /// One full outer iteration.
    pub fn step(&mut self) -> Result<()> {
        let out = ss_prsm_inner_with(self.problem, &mut self.state, &self.consts, &self.config, self.mode)?;
        self.last = ScheduleStamp { c_k: Some(out.c_k), m_k: Some(out.m_k), eta_k: Some(out.eta_k) };
        let cfg = &self.config;
        outer_step(self.problem, &mut self.state, cfg.beta, cfg.alpha, cfg.gamma, cfg.a, out.x1)?;
        if !(all_finite(&self.state.x2) && all_finite(&self.state.lambda)) {
            return Err(Error::Divergence {
                algorithm: Algorithm::SsPrsm.name().into(),
                iteration: self.state.k,
                beta: cfg.beta,
                eta: out.eta_k,
                trace: Vec::new(),
            });
        }
        Ok(())
    }

    /// Runs until the residual test, the iteration limit or the pass budget stops it.
    pub fn run(mut self, opts: &TraceOptions) -> Result<SolveOutput> {
        let mut rec = Recorder::new(opts, Algorithm::SsPrsm);
        let stop = loop {
            if self.state.residual_norm(self.problem) <= self.config.eps {
                break StopReason::Converged;
            }
            if self.state.k >= self.config.max_outer {
                break StopReason::MaxOuter;
            }
            if self.config.max_data_passes.is_some_and(|b| self.state.counters.data_passes >= b) {
                break StopReason::Budget;
            }
            if let Err(e) = self.step() {
                return Err(attach_trace(e, rec.into_records()));
            }
            if rec.due(self.state.k) {
                self.record(&mut rec);
            }
        };
        if self.state.k > 0 {
            self.record(&mut rec);
        }
        let st = self.state;
        Ok(SolveOutput {
            algorithm: Algorithm::SsPrsm,
            x1_avg: st.avg.mean1(),
            x2_avg: st.avg.mean2(),
            lambda_avg: st.avg.mean_lambda(),
            x1: st.x1,
            x2: st.x2,
            lambda: st.lambda,
            trace: rec.into_records(),
            stop,
            outer_iterations: st.k,
            counters: st.counters,
            factorizations: 0,
        })
    }

    fn record(&self, rec: &mut Recorder<'_>) {
        let st = &self.state;
        rec.record(self.problem, st.k, st.counters, &st.avg, &st.x1, &st.x2, self.last);
    }
}

pub(crate) fn attach_trace(err: Error, records: Vec<crate::trace::TraceRecord>) -> Error {
    match err {
        Error::Divergence { algorithm, iteration, beta, eta, .. } => {
            Error::Divergence { algorithm, iteration, beta, eta, trace: records }
        }
        other => other,
    }
}

/// Runs SS-PRSM with default tracing.
pub fn solve(problem: &SeparableProblem, config: &SolverConfig) -> Result<SolveOutput> {
    solve_traced(problem, config, &TraceOptions::default())
}

pub fn solve_traced(problem: &SeparableProblem, config: &SolverConfig, opts: &TraceOptions) -> Result<SolveOutput> {
    SsPrsm::new(problem, config.clone())?.run(opts)
}

#[cfg(test)]
mod tests;
