//! Per-iteration trace records shared by every solver, ergodic averaging,
//! and the CSV encoding of traces.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::numkit::norm2;
use crate::problem::SeparableProblem;

/// Solver families sharing the trace schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    SsPrsm,
    SspbScprsm,
    SAdmm,
    BatchAdmm,
    ScPrsm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::SsPrsm, Algorithm::SspbScprsm, Algorithm::SAdmm, Algorithm::BatchAdmm, Algorithm::ScPrsm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SsPrsm => "ss-prsm",
            Algorithm::SspbScprsm => "sspb-scprsm",
            Algorithm::SAdmm => "s-admm",
            Algorithm::BatchAdmm => "admm",
            Algorithm::ScPrsm => "sc-prsm",
        }
    }

    /// Batch methods solve the x1 subproblem exactly and need a quadratic loss.
    pub fn is_batch(self) -> bool {
        matches!(self, Algorithm::BatchAdmm | Algorithm::ScPrsm)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm || (norm == "batch-admm" && *a == Algorithm::BatchAdmm))
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub run_id: String,
    pub algorithm: String,
    pub outer_iter: usize,
    pub data_passes: f64,
    pub grad_evals: u64,
    pub wall_ms: f64,
    pub objective_at_avg: f64,
    pub objective_at_last: f64,
    pub residual_norm: f64,
    /// Raw (unclamped) optimality criterion at the ergodic averages.
    pub criterion: Option<f64>,
    pub c_k: Option<f64>,
    pub m_k: Option<usize>,
    pub eta_k: Option<f64>,
}

pub const TRACE_HEADER: [&str; 13] = [
    "run_id",
    "algorithm",
    "outer_iter",
    "data_passes",
    "grad_evals",
    "wall_ms",
    "objective_at_avg",
    "objective_at_last",
    "residual_norm",
    "criterion",
    "C_k",
    "M_k",
    "eta_k",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(out: W, records: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(e.into());
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.run_id.clone(),
            r.algorithm.clone(),
            r.outer_iter.to_string(),
            r.data_passes.to_string(),
            r.grad_evals.to_string(),
            r.wall_ms.to_string(),
            r.objective_at_avg.to_string(),
            r.objective_at_last.to_string(),
            r.residual_norm.to_string(),
            opt(&r.criterion),
            opt(&r.c_k),
            opt(&r.m_k),
            opt(&r.eta_k),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, message: format!("unexpected trace header {:?}", header.iter().collect::<Vec<_>>()) });
    }
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let field = |j: usize| -> &str { rec.get(j).unwrap_or("") };
        fn num<T: FromStr>(s: &str, name: &str, line: usize) -> Result<T> {
            s.parse().map_err(|_| Error::Parse { line, message: format!("bad value '{s}' in column {name}") })
        }
        fn opt_num<T: FromStr>(s: &str, name: &str, line: usize) -> Result<Option<T>> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, name, line).map(Some)
            }
        }
        out.push(TraceRecord {
            run_id: field(0).to_string(),
            algorithm: field(1).to_string(),
            outer_iter: num(field(2), "outer_iter", line)?,
            data_passes: num(field(3), "data_passes", line)?,
            grad_evals: num(field(4), "grad_evals", line)?,
            wall_ms: num(field(5), "wall_ms", line)?,
            objective_at_avg: num(field(6), "objective_at_avg", line)?,
            objective_at_last: num(field(7), "objective_at_last", line)?,
            residual_norm: num(field(8), "residual_norm", line)?,
            criterion: opt_num(field(9), "criterion", line)?,
            c_k: opt_num(field(10), "C_k", line)?,
            m_k: opt_num(field(11), "M_k", line)?,
            eta_k: opt_num(field(12), "eta_k", line)?,
        });
    }
    Ok(out)
}

/// Reference optimum used to fill the criterion column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionRef {
    pub f_star: f64,
    pub rho: f64,
}

#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub run_id: String,
    /// Record every `every`-th outer iteration (and always the last one).
    pub every: usize,
    pub criterion: Option<CriterionRef>,
    /// When false, `wall_ms` is written as 0 so traces are reproducible byte for byte.
    pub wall_clock: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { run_id: "0".into(), every: 1, criterion: None, wall_clock: true }
    }
}

/// Running means of `x1^{k+1}, x2^{k+1}, lambda^{k+1}` over `k = 1..K`.
#[derive(Debug, Clone)]
pub struct Ergodic {
    sum1: Vec<f64>,
    sum2: Vec<f64>,
    sum_lambda: Vec<f64>,
    count: usize,
}

impl Ergodic {
    pub fn new(dim1: usize, dim2: usize, m: usize) -> Self {
        Self { sum1: vec![0.0; dim1], sum2: vec![0.0; dim2], sum_lambda: vec![0.0; m], count: 0 }
    }

    pub fn push(&mut self, x1: &[f64], x2: &[f64], lambda: &[f64]) {
        for (s, v) in self.sum1.iter_mut().zip(x1) {
            *s += v;
        }
        for (s, v) in self.sum2.iter_mut().zip(x2) {
            *s += v;
        }
        for (s, v) in self.sum_lambda.iter_mut().zip(lambda) {
            *s += v;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    fn mean(sum: &[f64], count: usize) -> Vec<f64> {
        let k = count.max(1) as f64;
        sum.iter().map(|s| s / k).collect()
    }

    pub fn mean1(&self) -> Vec<f64> {
        Self::mean(&self.sum1, self.count)
    }

    pub fn mean2(&self) -> Vec<f64> {
        Self::mean(&self.sum2, self.count)
    }

    pub fn mean_lambda(&self) -> Vec<f64> {
        Self::mean(&self.sum_lambda, self.count)
    }
}

/// Work counters: component-gradient evaluations and their count in units of `n`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Counters {
    pub data_passes: f64,
    pub grad_evals: u64,
}

/// Inner-loop schedule values reported by the variance-reduced solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleStamp {
    pub c_k: Option<f64>,
    pub m_k: Option<usize>,
    pub eta_k: Option<f64>,
}

impl ScheduleStamp {
    pub const NONE: ScheduleStamp = ScheduleStamp { c_k: None, m_k: None, eta_k: None };
}

/// `theta(u)` reported for a pair: the consensus point `x2` when the blocks
/// are tied by `x1 = x2`, else `theta1(x1) + theta2(x2)`.
pub fn reported_objective(problem: &SeparableProblem, x1: &[f64], x2: &[f64]) -> f64 {
    if problem.is_consensus() {
        problem.theta1(x2) + problem.theta2(x2)
    } else {
        problem.theta1(x1) + problem.theta2(x2)
    }
}

pub(crate) struct Recorder<'a> {
    opts: &'a TraceOptions,
    algorithm: &'static str,
    start: Instant,
    records: Vec<TraceRecord>,
}

impl<'a> Recorder<'a> {
    pub fn new(opts: &'a TraceOptions, algorithm: Algorithm) -> Self {
        Self { opts, algorithm: algorithm.name(), start: Instant::now(), records: Vec::new() }
    }

    pub fn due(&self, k: usize) -> bool {
        k % self.opts.every.max(1) == 0
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        problem: &SeparableProblem,
        k: usize,
        counters: Counters,
        avg: &Ergodic,
        x1: &[f64],
        x2: &[f64],
        stamp: ScheduleStamp,
    ) {
        if self.records.last().is_some_and(|r| r.outer_iter == k) {
            return;
        }
        let (m1, m2) = (avg.mean1(), avg.mean2());
        let residual = problem.residual(x1, x2).expect("iterate dimensions fixed by solver");
        let criterion = self
            .opts
            .criterion
            .map(|c| crate::bench::criterion(problem, &m1, &m2, c.f_star, c.rho).raw);
        let wall_ms = if self.opts.wall_clock { self.start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        self.records.push(TraceRecord {
            run_id: self.opts.run_id.clone(),
            algorithm: self.algorithm.to_string(),
            outer_iter: k,
            data_passes: counters.data_passes,
            grad_evals: counters.grad_evals,
            wall_ms,
            objective_at_avg: reported_objective(problem, &m1, &m2),
            objective_at_last: reported_objective(problem, x1, x2),
            residual_norm: norm2(&residual),
            criterion,
            c_k: stamp.c_k,
            m_k: stamp.m_k,
            eta_k: stamp.eta_k,
        });
    }

    pub fn into_records(self) -> Vec<TraceRecord> {
        self.records
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Residual norm fell to the threshold.
    Converged,
    MaxOuter,
    Budget,
}

/// Result of any solver run.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub algorithm: Algorithm,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub lambda: Vec<f64>,
    pub x1_avg: Vec<f64>,
    pub x2_avg: Vec<f64>,
    pub lambda_avg: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub stop: StopReason,
    pub outer_iterations: usize,
    pub counters: Counters,
    /// Matrix factorizations performed (batch solvers only).
    pub factorizations: usize,
}

impl SolveOutput {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// Ergodic mean of the smooth block.
    pub fn z_avg(&self) -> &[f64] {
        &self.x1_avg
    }

    /// Last iterate of the regularized block.
    pub fn z_last(&self) -> &[f64] {
        &self.x2
    }
}
