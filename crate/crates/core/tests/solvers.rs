use proptest::prelude::*;
use ssprsm::baselines::{solve_with, BaselineConfig};
use ssprsm::bench::reference_solution;
use ssprsm::datagen::{gen_group_lasso, gen_lasso, load_libsvm, write_libsvm, Dataset, Task};
use ssprsm::numkit::{dist_inf, norm_inf, Matrix, SparseRow};
use ssprsm::problem::{Regularizer, SeparableProblem};
use ssprsm::splitters::{InnerSchedule, SolverConfig, SsPrsm};
use ssprsm::trace::{Algorithm, TraceOptions};

fn quiet() -> TraceOptions {
    TraceOptions { every: usize::MAX, wall_clock: false, ..TraceOptions::default() }
}

fn constant_step(base: SolverConfig) -> SolverConfig {
    SolverConfig { schedule: InnerSchedule::ConstantStep { scale: 0.25 }, ..base }
}

/// Brute-force minimizer on nested grids around `center`.
fn grid_min2(f: impl Fn(f64, f64) -> f64, center: (f64, f64), mut radius: f64) -> (f64, f64) {
    let mut c = center;
    while radius > 1e-7 {
        let step = radius / 20.0;
        let mut best = (f64::INFINITY, c);
        for i in -20..=20 {
            for j in -20..=20 {
                let (u, v) = (c.0 + i as f64 * step, c.1 + j as f64 * step);
                let val = f(u, v);
                if val < best.0 {
                    best = (val, (u, v));
                }
            }
        }
        c = best.1;
        radius = 3.0 * step;
    }
    c
}

#[test]
fn ergodic_average_is_the_mean_of_iterates() {
    let problem = gen_lasso(20, 6, 2, 0.1, 8).unwrap().to_problem(0.05).unwrap();
    let mut solver = SsPrsm::new(&problem, SolverConfig { seed: 4, ..SolverConfig::default() }).unwrap();
    let mut sum1 = vec![0.0; 6];
    let mut sum2 = vec![0.0; 6];
    for k in 1..=15 {
        solver.step().unwrap();
        let st = solver.state();
        for j in 0..6 {
            sum1[j] += st.x1[j];
            sum2[j] += st.x2[j];
        }
        assert_eq!(st.avg.count(), k);
        let m1: Vec<f64> = sum1.iter().map(|s| s / k as f64).collect();
        let m2: Vec<f64> = sum2.iter().map(|s| s / k as f64).collect();
        assert!(dist_inf(&st.avg.mean1(), &m1) < 1e-14);
        assert!(dist_inf(&st.avg.mean2(), &m2) < 1e-14);
    }
}

fn x2_objective(problem: &SeparableProblem, x1: &[f64], prev: &[f64], lam: &[f64], beta: f64, a: f64, x2: &[f64]) -> f64 {
    // consensus: A = I, B = -I, b = 0
    let reg = problem.theta2(x2);
    let mut v = reg;
    for j in 0..x2.len() {
        let r = x1[j] - x2[j];
        v += lam[j] * x2[j] + 0.5 * beta * r * r + 0.5 * a * (x2[j] - prev[j]).powi(2);
    }
    v
}

#[test]
fn x2_update_matches_grid_search() {
    let d = gen_lasso(5, 2, 1, 0.1, 1).unwrap();
    let l1 = d.to_problem(0.4).unwrap();
    let mut g = d.clone();
    g.task = Task::GroupLasso;
    g.groups = Some(vec![2]);
    let group = g.to_problem(0.4).unwrap();
    assert!(matches!(group.regularizer(), Regularizer::GroupL2 { .. }));

    let cases = [
        ([0.3, -1.2], [1.0, 1.0], [0.2, -0.1], 1.0, 1.0),
        ([0.05, 0.02], [0.0, 0.0], [0.0, 0.0], 2.0, 0.0),
        ([2.0, -0.7], [-1.0, 0.5], [0.6, 0.3], 0.5, 3.0),
        ([-0.1, 0.25], [0.4, 0.4], [-0.3, 0.1], 1.5, 0.5),
    ];
    for problem in [&l1, &group] {
        for (x1, prev, lam, beta, a) in cases {
            let got = problem.x2_subproblem(&x1, &prev, &lam, beta, a).unwrap();
            let (u, v) = grid_min2(|u, v| x2_objective(problem, &x1, &prev, &lam, beta, a, &[u, v]), (0.0, 0.0), 4.0);
            assert!((got[0] - u).abs() < 1e-3 && (got[1] - v).abs() < 1e-3, "{got:?} vs ({u}, {v})");
        }
    }
}

#[test]
fn large_penalty_drives_solution_to_zero() {
    let d = gen_lasso(30, 10, 3, 0.1, 2).unwrap();
    let zmax = norm_inf(&d.to_problem(1.0).unwrap().full_gradient(&[0.0; 10]).unwrap());
    let problem = d.to_problem(1.2 * zmax).unwrap();
    let base = SolverConfig { max_outer: 3000, ..SolverConfig::default() };
    for (alg, cfg) in [
        (Algorithm::SsPrsm, constant_step(base.clone())),
        (Algorithm::BatchAdmm, base.clone()),
        (Algorithm::ScPrsm, base.clone()),
    ] {
        let out = solve_with(alg, &problem, &BaselineConfig::from_base(cfg), &quiet()).unwrap();
        assert!(norm_inf(out.z_last()) < 1e-6, "{alg}: {:?}", out.z_last());
    }
}

#[test]
fn all_solvers_approach_the_reference() {
    for d in [gen_lasso(30, 10, 3, 0.1, 6).unwrap(), gen_group_lasso(40, 5, 8, 6).unwrap()] {
        let problem = d.to_problem(0.02).unwrap();
        let z = reference_solution(&problem).unwrap().z;
        let base = SolverConfig { max_outer: usize::MAX, max_data_passes: Some(2e4), ..SolverConfig::default() };
        let tight = [
            (Algorithm::SsPrsm, constant_step(base.clone())),
            (Algorithm::BatchAdmm, base.clone()),
            (Algorithm::ScPrsm, base.clone()),
        ];
        for (alg, cfg) in tight {
            let out = solve_with(alg, &problem, &BaselineConfig::from_base(cfg), &quiet()).unwrap();
            assert!(dist_inf(out.z_last(), &z) < 1e-6, "{alg}: {:e}", dist_inf(out.z_last(), &z));
        }
        // the decaying-step methods only get close within this budget
        for alg in [Algorithm::SAdmm, Algorithm::SspbScprsm] {
            let out = solve_with(alg, &problem, &BaselineConfig::from_base(base.clone()), &quiet()).unwrap();
            assert!(dist_inf(out.z_avg(), &z) < 1e-2, "{alg}: {:e}", dist_inf(out.z_avg(), &z));
        }
    }
}

fn sparse_dataset() -> impl Strategy<Value = (usize, Vec<Vec<(usize, f64)>>, Vec<f64>)> {
    (1usize..25, 1usize..15).prop_flat_map(|(p, n)| {
        let row = proptest::collection::btree_map(0..p, proptest::num::f64::NORMAL, 0..=p)
            .prop_map(|m| m.into_iter().collect::<Vec<_>>());
        (Just(p), proptest::collection::vec(row, n), proptest::collection::vec(-1e6f64..1e6, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn libsvm_round_trip_is_exact((p, rows, y) in sparse_dataset()) {
        let rows: Vec<SparseRow> =
            rows.into_iter().map(|r| { let (i, v) = r.into_iter().unzip(); SparseRow::new(i, v) }).collect();
        let d = Dataset::new(Matrix::sparse(p, rows).unwrap(), y, Task::Lasso, "prop").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.svm");
        write_libsvm(&d, &path).unwrap();
        let back = load_libsvm(&path, Task::Lasso, Some(p)).unwrap();
        prop_assert_eq!(back.x, d.x);
        prop_assert_eq!(back.y, d.y);
    }
}

#[test]
fn averaged_objective_is_nonincreasing_over_windows() {
    // strongly determined: n well above p
    let problem = gen_lasso(60, 8, 3, 0.1, 12).unwrap().to_problem(0.02).unwrap();
    let opts = TraceOptions { every: 1, wall_clock: false, ..TraceOptions::default() };
    let cfg = constant_step(SolverConfig { max_outer: 200, eps: 1e-13, ..SolverConfig::default() });
    let out = ssprsm::splitters::solve_traced(&problem, &cfg, &opts).unwrap();
    let obj: Vec<f64> = out.trace.iter().map(|r| r.objective_at_avg).collect();
    assert!(obj.len() > 20);
    for k in 0..obj.len() - 10 {
        assert!(obj[k + 10] <= obj[k] + 1e-12, "k = {k}: {} -> {}", obj[k], obj[k + 10]);
    }
}
