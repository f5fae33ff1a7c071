use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ssprsm::baselines::{solve_with, BaselineConfig};
use ssprsm::bench::{
    apply_solver_keys, emit_plot_svg, fit_rate, load_dataset, parse_sections, rate_points_from_csv,
    read_plot_series, reference_solution, run_benchmark, sidecar_zeta, write_sidecar, BenchPlan,
};
use ssprsm::datagen::{preset, regularization_zeta, write_libsvm, PresetData, Task};
use ssprsm::trace::{write_trace_csv, Algorithm, CriterionRef, TraceOptions};

#[derive(Parser)]
#[command(name = "ssprsm", version, about = "Stochastic scalable Peaceman-Rachford splitting and baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset from a preset as LIBSVM text plus a `.meta` sidecar.
    Generate(GenerateArgs),
    /// Run one solver on a dataset file.
    Solve(SolveArgs),
    /// Run a benchmark plan.
    Bench(BenchArgs),
    /// Fit the log-log slope of the criterion against the outer iteration.
    FitRate(FitRateArgs),
    /// Plot objective gap against data passes as SVG.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Preset name (lasso5.1, grouplasso5.2, logistic5.3, tiny-lasso, ...).
    preset: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Support size.
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    noise_sd: Option<f64>,
    #[arg(long)]
    row_nnz: Option<usize>,
    /// Number of groups (group lasso).
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    max_group: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    /// LIBSVM or CSV file.
    dataset: PathBuf,
    #[arg(long, default_value = "ss-prsm")]
    alg: String,
    /// key=value solver settings; `[alg:<name>]` sections apply to that algorithm only.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a preset's parameters.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    task: Option<String>,
    /// Penalty; defaults to the preset's or the sidecar's value.
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long)]
    normalize: bool,
    /// Compute a reference solution and record the criterion.
    #[arg(long)]
    criterion: bool,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1)]
    every: usize,
}

#[derive(Args)]
struct BenchArgs {
    plan: PathBuf,
    /// Force serial execution (byte-identical output).
    #[arg(long)]
    serial: bool,
    /// Override the plan's output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitRateArgs {
    csv: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    from: f64,
    #[arg(long, default_value_t = 200.0)]
    to: f64,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(required = true)]
    csv: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Subtracted from objective_at_avg when a file has no criterion column values.
    #[arg(long)]
    f_star: Option<f64>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::FitRate(a) => {
            let points = rate_points_from_csv(File::open(&a.csv).with_context(|| format!("opening {}", a.csv.display()))?)?;
            let slope = fit_rate(&points, a.from, a.to)?;
            println!("{slope}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot(a) => {
            let mut series = Vec::new();
            for path in &a.csv {
                let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                series.extend(read_plot_series(file, a.f_star)?);
            }
            let layout = emit_plot_svg(&series, &a.out)?;
            println!(
                "wrote {} (x {:.4}..{:.4}, log10 gap {:.4}..{:.4})",
                a.out.display(),
                layout.x_min,
                layout.x_max,
                layout.y_min,
                layout.y_max
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let mut p = preset(&a.preset)?;
    match &mut p.data {
        PresetData::Lasso { n, p, s, noise_sd } => {
            *n = a.n.unwrap_or(*n);
            *p = a.p.unwrap_or(*p);
            *s = a.s.unwrap_or(*s);
            *noise_sd = a.noise_sd.unwrap_or(*noise_sd);
        }
        PresetData::GroupLasso { n, n_groups, max_group } => {
            *n = a.n.unwrap_or(*n);
            *n_groups = a.groups.unwrap_or(*n_groups);
            *max_group = a.max_group.unwrap_or(*max_group);
        }
        PresetData::Logistic { n, p, s, row_nnz } => {
            *n = a.n.unwrap_or(*n);
            *p = a.p.unwrap_or(*p);
            *s = a.s.unwrap_or(*s);
            *row_nnz = a.row_nnz.unwrap_or(*row_nnz);
        }
        PresetData::External { .. } => bail!("preset `{}` is real data and cannot be generated", a.preset),
    }
    let d = p.generate(a.seed)?;
    let zeta = p.zeta.map_or_else(|| regularization_zeta(&d, None), Ok)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_libsvm(&d, &a.out)?;
    write_sidecar(&d, Some(zeta), &a.out)?;
    println!("wrote {} (n = {}, p = {}, zeta = {zeta})", a.out.display(), d.n(), d.p());
    Ok(ExitCode::SUCCESS)
}

fn solver_config(algorithm: Algorithm, preset_name: Option<&str>, config: Option<&Path>) -> Result<BaselineConfig> {
    let mut cfg = BaselineConfig::default();
    if let Some(name) = preset_name {
        cfg.base = preset(name)?.config;
    }
    if let Some(path) = config {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for s in parse_sections(&text)? {
            let applies = s.name.is_empty()
                || s.name == "plan"
                || s.name.strip_prefix("alg:").is_some_and(|l| l.parse::<Algorithm>().ok() == Some(algorithm));
            if applies {
                apply_solver_keys(&mut cfg, &s, &["algorithm"])?;
            }
        }
    }
    Ok(cfg)
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let algorithm: Algorithm = a.alg.parse()?;
    let preset_info = a.preset.as_deref().map(preset).transpose()?;
    let task = match (&a.task, &preset_info) {
        (Some(t), _) => Some(Task::parse(t)?),
        (None, Some(p)) => Some(p.task),
        (None, None) => None,
    };
    let width = preset_info.as_ref().and_then(|p| p.width());
    let data = load_dataset(&a.dataset, task, &a.label_column, a.normalize, width)?;
    let zeta = match a.zeta.or(preset_info.as_ref().and_then(|p| p.zeta)) {
        Some(z) => z,
        None => match sidecar_zeta(&a.dataset)? {
            Some(z) => z,
            None => regularization_zeta(&data, None)?,
        },
    };
    if !(zeta > 0.0) {
        bail!("zeta must be positive for solving, got {zeta}");
    }
    let problem = data.to_problem(zeta)?;
    let cfg = solver_config(algorithm, a.preset.as_deref(), a.config.as_deref())?;
    let criterion = if a.criterion {
        let r = reference_solution(&problem)?;
        Some(CriterionRef { f_star: r.f_star, rho: a.rho })
    } else {
        None
    };
    let opts = TraceOptions { run_id: "0".into(), every: a.every, criterion, wall_clock: true };
    let out = solve_with(algorithm, &problem, &cfg, &opts)?;
    if let Some(path) = &a.trace {
        write_trace_csv(BufWriter::new(File::create(path)?), &out.trace)?;
    }
    let last = out.trace.last();
    println!(
        "{algorithm}: {:?} after {} outer iterations, {:.3} data passes, objective {}, residual {}",
        out.stop,
        out.outer_iterations,
        out.counters.data_passes,
        last.map_or(f64::NAN, |r| r.objective_at_avg),
        last.map_or(f64::NAN, |r| r.residual_norm),
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let mut plan = BenchPlan::load(&a.plan).with_context(|| format!("loading plan {}", a.plan.display()))?;
    if a.serial {
        plan.serial = true;
        plan.wall_clock = false;
    }
    if let Some(out) = a.output {
        plan.output = out;
    }
    let summary = run_benchmark(&plan)?;
    for (label, by_pass, _) in &summary.means {
        let ok = summary.runs.iter().filter(|r| &r.label == label && r.status.is_ok()).count();
        let last = by_pass.last();
        println!(
            "{label}: {ok}/{} runs ok, final mean objective {}, criterion {}",
            plan.replicates,
            last.map_or(f64::NAN, |r| r.objective_at_avg),
            last.and_then(|r| r.criterion).map_or_else(|| "-".to_string(), |c| c.to_string()),
        );
    }
    println!("outputs in {}", summary.output.display());
    let failed = summary.failed_labels();
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("every replicate failed for: {}", failed.join(", "));
        Ok(ExitCode::FAILURE)
    }
}
