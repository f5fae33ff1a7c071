use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::plan::{AlgSpec, BenchPlan};
use super::reference::reference_solution;
use crate::baselines::solve_with;
use crate::datagen::regularization_zeta;
use crate::error::{Error, Result};
use crate::trace::{write_trace_csv, CriterionRef, SolveOutput, StopReason, TraceOptions, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    Diverged(String),
    Failed(String),
}

impl RunStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Ok)
    }

    fn name(&self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged(_) => "diverged",
            RunStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    pub replicate: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub stop: Option<StopReason>,
    pub trace: Vec<TraceRecord>,
    pub csv_path: PathBuf,
}

impl RunSummary {
    fn last(&self) -> Option<&TraceRecord> {
        self.trace.last()
    }
}

/// Replicate-averaged trace point.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRecord {
    pub algorithm: String,
    pub outer_iter: f64,
    pub data_passes: f64,
    pub grad_evals: f64,
    pub wall_ms: f64,
    pub objective_at_avg: f64,
    pub objective_at_last: f64,
    pub residual_norm: f64,
    pub criterion: Option<f64>,
    pub replicates: usize,
}

pub const MEAN_HEADER: [&str; 10] = [
    "algorithm",
    "outer_iter",
    "data_passes",
    "grad_evals",
    "wall_ms",
    "objective_at_avg",
    "objective_at_last",
    "residual_norm",
    "criterion",
    "replicates",
];

fn mean_of(algorithm: &str, rows: &[&TraceRecord]) -> MeanRecord {
    debug_assert!(!rows.is_empty());
    let m = rows.len() as f64;
    // offset from the first row so identical replicates average exactly
    let avg = |f: &dyn Fn(&TraceRecord) -> f64| {
        let first = f(rows[0]);
        first + rows.iter().map(|r| f(r) - first).sum::<f64>() / m
    };
    let criterion = if rows.iter().all(|r| r.criterion.is_some()) {
        Some(avg(&|r| r.criterion.unwrap_or(0.0)))
    } else {
        None
    };
    MeanRecord {
        algorithm: algorithm.to_string(),
        outer_iter: avg(&|r| r.outer_iter as f64),
        data_passes: avg(&|r| r.data_passes),
        grad_evals: avg(&|r| r.grad_evals as f64),
        wall_ms: avg(&|r| r.wall_ms),
        objective_at_avg: avg(&|r| r.objective_at_avg),
        objective_at_last: avg(&|r| r.objective_at_last),
        residual_norm: avg(&|r| r.residual_norm),
        criterion,
        replicates: rows.len(),
    }
}

/// Mean over replicates on the union grid of `data_passes` values; each run
/// contributes its last record at or before the grid point, and runs that have
/// not reached the point yet are left out.
pub fn mean_trace_by_passes(algorithm: &str, traces: &[&[TraceRecord]]) -> Vec<MeanRecord> {
    let mut grid: Vec<f64> = traces.iter().flat_map(|t| t.iter().map(|r| r.data_passes)).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.iter()
        .map(|&g| {
            let rows: Vec<&TraceRecord> = traces
                .iter()
                .filter_map(|t| {
                    let idx = t.partition_point(|r| r.data_passes <= g);
                    idx.checked_sub(1).map(|i| &t[i])
                })
                .collect();
            let mut m = mean_of(algorithm, &rows);
            m.data_passes = g;
            m
        })
        .collect()
}

/// Mean over replicates for each recorded outer iteration.
pub fn mean_trace_by_iteration(algorithm: &str, traces: &[&[TraceRecord]]) -> Vec<MeanRecord> {
    let mut iters: Vec<usize> = traces.iter().flat_map(|t| t.iter().map(|r| r.outer_iter)).collect();
    iters.sort_unstable();
    iters.dedup();
    iters
        .iter()
        .map(|&k| {
            let rows: Vec<&TraceRecord> =
                traces.iter().filter_map(|t| t.iter().find(|r| r.outer_iter == k)).collect();
            mean_of(algorithm, &rows)
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn write_mean_csv<W: Write>(out: W, records: &[MeanRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(MEAN_HEADER).map_err(err)?;
    for r in records {
        w.write_record([
            r.algorithm.clone(),
            r.outer_iter.to_string(),
            r.data_passes.to_string(),
            r.grad_evals.to_string(),
            r.wall_ms.to_string(),
            r.objective_at_avg.to_string(),
            r.objective_at_last.to_string(),
            r.residual_norm.to_string(),
            opt(r.criterion),
            r.replicates.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub zeta: f64,
    pub f_star: Option<f64>,
    pub runs: Vec<RunSummary>,
    /// Per label: mean trace on the data-pass grid and per outer iteration.
    pub means: Vec<(String, Vec<MeanRecord>, Vec<MeanRecord>)>,
    pub output: PathBuf,
}

impl BenchSummary {
    /// Labels whose every replicate failed.
    pub fn failed_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (label, _, _) in &self.means {
            if self.runs.iter().filter(|r| &r.label == label).all(|r| !r.status.is_ok()) {
                out.push(label.clone());
            }
        }
        out
    }

    pub fn mean_by_iteration(&self, label: &str) -> Option<&[MeanRecord]> {
        self.means.iter().find(|(l, _, _)| l == label).map(|(_, _, m)| m.as_slice())
    }

    pub fn mean_by_passes(&self, label: &str) -> Option<&[MeanRecord]> {
        self.means.iter().find(|(l, _, _)| l == label).map(|(_, m, _)| m.as_slice())
    }
}

fn file_label(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Runs every algorithm for every replicate, then writes
/// `runs/<label>_<r>.csv`, `mean_<label>.csv` (data-pass grid),
/// `mean_iter_<label>.csv`, `runs.csv` and `summary.csv` under the plan's output directory.
pub fn run_benchmark(plan: &BenchPlan) -> Result<BenchSummary> {
    plan.validate()?;
    let data = plan.data.load(plan.data_seed)?;
    let zeta = match plan.zeta {
        Some(z) => z,
        None => regularization_zeta(&data, None)?,
    };
    if !(zeta > 0.0) {
        return Err(Error::invalid(format!("zeta must be positive for solving, got {zeta}")));
    }
    let problem = data.to_problem(zeta)?;
    let f_star = if plan.reference { Some(reference_solution(&problem)?.f_star) } else { None };
    let criterion = f_star.map(|f| CriterionRef { f_star: f, rho: plan.rho });

    let jobs: Vec<(&AlgSpec, usize)> =
        plan.algorithms.iter().flat_map(|a| (0..plan.replicates).map(move |r| (a, r))).collect();
    let run_one = |(spec, r): &(&AlgSpec, usize)| -> (Result<SolveOutput>, u64) {
        let seed = plan.seed + *r as u64;
        let mut cfg = spec.config.clone();
        cfg.base.seed = seed;
        let opts = TraceOptions {
            run_id: format!("{}-{r}", spec.label),
            every: plan.trace_every,
            criterion,
            wall_clock: plan.wall_clock,
        };
        (solve_with(spec.algorithm, &problem, &cfg, &opts), seed)
    };
    let results: Vec<(Result<SolveOutput>, u64)> =
        if plan.serial { jobs.iter().map(run_one).collect() } else { jobs.par_iter().map(run_one).collect() };

    let runs_dir = plan.output.join("runs");
    fs::create_dir_all(&runs_dir)?;
    let mut runs = Vec::new();
    for ((spec, r), (res, seed)) in jobs.iter().zip(results) {
        let csv_path = runs_dir.join(format!("{}_{r}.csv", file_label(&spec.label)));
        let (status, stop, trace) = match res {
            Ok(out) => (RunStatus::Ok, Some(out.stop), out.trace),
            Err(Error::Divergence { iteration, beta, eta, trace, .. }) => {
                (RunStatus::Diverged(format!("iteration {iteration}, beta {beta}, eta {eta}")), None, trace)
            }
            Err(e) => (RunStatus::Failed(e.to_string()), None, Vec::new()),
        };
        write_trace_csv(BufWriter::new(File::create(&csv_path)?), &trace)?;
        runs.push(RunSummary { label: spec.label.clone(), replicate: *r, seed, status, stop, trace, csv_path });
    }

    let mut means = Vec::new();
    for spec in &plan.algorithms {
        let traces: Vec<&[TraceRecord]> = runs
            .iter()
            .filter(|r| r.label == spec.label && r.status.is_ok())
            .map(|r| r.trace.as_slice())
            .collect();
        let by_pass = mean_trace_by_passes(spec.algorithm.name(), &traces);
        let by_iter = mean_trace_by_iteration(spec.algorithm.name(), &traces);
        let name = file_label(&spec.label);
        write_mean_csv(BufWriter::new(File::create(plan.output.join(format!("mean_{name}.csv")))?), &by_pass)?;
        write_mean_csv(BufWriter::new(File::create(plan.output.join(format!("mean_iter_{name}.csv")))?), &by_iter)?;
        means.push((spec.label.clone(), by_pass, by_iter));
    }
    let summary = BenchSummary { zeta, f_star, runs, means, output: plan.output.clone() };
    write_run_table(&summary, &plan.output.join("runs.csv"))?;
    write_summary_table(plan, &summary, &plan.output.join("summary.csv"))?;
    Ok(summary)
}

fn write_run_table(s: &BenchSummary, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "label,replicate,seed,status,stop,outer_iter,data_passes,grad_evals,objective_at_avg,criterion,residual_norm,wall_ms,note")?;
    for r in &s.runs {
        let stop = r.stop.map_or("", |s| match s {
            StopReason::Converged => "converged",
            StopReason::MaxOuter => "max_outer",
            StopReason::Budget => "budget",
        });
        let note = match &r.status {
            RunStatus::Ok => String::new(),
            RunStatus::Diverged(m) | RunStatus::Failed(m) => m.replace([',', '\n'], ";"),
        };
        match r.last() {
            Some(t) => writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.label,
                r.replicate,
                r.seed,
                r.status.name(),
                stop,
                t.outer_iter,
                t.data_passes,
                t.grad_evals,
                t.objective_at_avg,
                opt(t.criterion),
                t.residual_norm,
                t.wall_ms,
                note
            )?,
            None => writeln!(w, "{},{},{},{},{},,,,,,,,{}", r.label, r.replicate, r.seed, r.status.name(), stop, note)?,
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per algorithm: means over successful replicates of the final trace row.
fn write_summary_table(plan: &BenchPlan, s: &BenchSummary, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "label,algorithm,ok,failed,outer_iter,data_passes,grad_evals,objective_at_avg,criterion,residual_norm,wall_ms,zeta,f_star")?;
    for spec in &plan.algorithms {
        let ok: Vec<&TraceRecord> = s
            .runs
            .iter()
            .filter(|r| r.label == spec.label && r.status.is_ok())
            .filter_map(|r| r.last())
            .collect();
        let failed = s.runs.iter().filter(|r| r.label == spec.label && !r.status.is_ok()).count();
        if ok.is_empty() {
            writeln!(w, "{},{},0,{failed},,,,,,,,{},{}", spec.label, spec.algorithm, s.zeta, opt(s.f_star))?;
            continue;
        }
        let m = mean_of(spec.algorithm.name(), &ok);
        writeln!(
            w,
            "{},{},{},{failed},{},{},{},{},{},{},{},{},{}",
            spec.label,
            spec.algorithm,
            ok.len(),
            m.outer_iter,
            m.data_passes,
            m.grad_evals,
            m.objective_at_avg,
            opt(m.criterion),
            m.residual_norm,
            m.wall_ms,
            s.zeta,
            opt(s.f_star)
        )?;
    }
    w.flush()?;
    Ok(())
}
