use std::fs;

use ssprsm::bench::{read_plot_series, rate_points_from_csv, run_benchmark, BenchPlan};
use ssprsm::trace::read_trace_csv;

#[test]
fn single_replicate_writes_one_run_per_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let plan = BenchPlan::parse("dataset = lasso\nreplicates = 1\nmax_outer = 30\nserial = true\n", dir.path()).unwrap();
    let summary = run_benchmark(&plan).unwrap();
    assert_eq!(summary.runs.len(), 5);
    let runs: Vec<_> = fs::read_dir(dir.path().join("bench-out/runs")).unwrap().collect();
    assert_eq!(runs.len(), 5);
    for r in &summary.runs {
        let trace = read_trace_csv(fs::File::open(&r.csv_path).unwrap()).unwrap();
        assert_eq!(trace, r.trace);
        assert!(!trace.is_empty());
    }
    let table = fs::read_to_string(dir.path().join("bench-out/summary.csv")).unwrap();
    assert_eq!(table.lines().count(), 1 + 5);
    let ss = table.lines().find(|l| l.starts_with("ss-prsm,")).unwrap();
    assert!(ss.contains(",1,0,"), "{ss}");

    let mean = fs::read(dir.path().join("bench-out/mean_iter_ss-prsm.csv")).unwrap();
    assert!(rate_points_from_csv(mean.as_slice()).unwrap().len() >= 10);
    let series = read_plot_series(mean.as_slice(), summary.f_star).unwrap();
    assert_eq!(series.len(), 1);
}

#[test]
fn serial_runs_repeat_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let text = "dataset = group-lasso\nn = 60\ngroups = 6\nmax_group = 8\nzeta = 0.01\nreplicates = 2\nmax_outer = 20\nseed = 3\nserial = true\noutput = ";
    let mut contents = Vec::new();
    for out in ["a", "b"] {
        let plan = BenchPlan::parse(&format!("{text}{out}\n"), dir.path()).unwrap();
        assert!(!plan.wall_clock);
        run_benchmark(&plan).unwrap();
        let mut files: Vec<_> = fs::read_dir(dir.path().join(out).join("runs")).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.push(dir.path().join(out).join("summary.csv"));
        files.push(dir.path().join(out).join("runs.csv"));
        contents.push(files.iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(contents[0], contents[1]);
}
