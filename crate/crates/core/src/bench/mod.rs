//! Reference solutions, the convergence criterion, replicated benchmark runs,
//! rate fitting and plotting.

mod criterion;
mod plan;
mod plot;
mod rate;
mod reference;
mod run;

pub use criterion::{criterion, Criterion};
pub use plan::{
    apply_solver_keys, load_dataset, parse_psd, parse_sections, sidecar_zeta, write_sidecar, AlgSpec, BenchPlan,
    DataSource, Section,
};
pub use plot::{emit_plot_svg, read_plot_series, PlotLayout, PlotSeries};
pub use rate::{fit_rate, rate_points_from_csv};
pub use reference::{reference_solution, reference_solution_from, Reference, ReferenceOptions};
pub use run::{
    mean_trace_by_iteration, mean_trace_by_passes, run_benchmark, write_mean_csv, BenchSummary, MeanRecord,
    RunStatus, RunSummary, MEAN_HEADER,
};
