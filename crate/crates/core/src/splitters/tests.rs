use super::*;
use crate::numkit::{DenseMatrix, Matrix};
use crate::problem::{Anchor, ConsensusInstance, InstanceKind};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn lasso(seed: u64, n: usize, p: usize, zeta: f64) -> SeparableProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..n * p).map(|_| rng.sample(StandardNormal)).collect();
    let y = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let x = Matrix::Dense(DenseMatrix::new(n, p, data).unwrap());
    ConsensusInstance { x, y, zeta, kind: InstanceKind::Lasso }.into_problem().unwrap()
}

fn constant(scale: f64) -> SolverConfig {
    SolverConfig { schedule: InnerSchedule::ConstantStep { scale }, ..SolverConfig::default() }
}

// l1 optimality: |g_j| <= zeta off the support, g_j = -zeta sign(z_j) on it
fn lasso_kkt_violation(problem: &SeparableProblem, z: &[f64], zeta: f64) -> f64 {
    let g = problem.full_gradient(z).unwrap();
    g.iter()
        .zip(z)
        .map(|(gj, zj)| if *zj == 0.0 { (gj.abs() - zeta).max(0.0) } else { (gj + zeta * zj.signum()).abs() })
        .fold(0.0, f64::max)
}

#[test]
fn default_config_is_valid() {
    SolverConfig::default().validate().unwrap();
}

#[test]
fn config_rejections() {
    let bad = [
        SolverConfig { gamma: 1.2, ..SolverConfig::default() },
        SolverConfig { alpha: 1.0, ..SolverConfig::default() },
        SolverConfig { beta: 0.0, ..SolverConfig::default() },
        SolverConfig { eps: -1.0, ..SolverConfig::default() },
        SolverConfig { a: -1.0, ..SolverConfig::default() },
        SolverConfig { max_outer: 0, ..SolverConfig::default() },
        SolverConfig { m_cap: MCap::Fixed(0), ..SolverConfig::default() },
        SolverConfig { s: Psd::Diagonal(vec![1.0, -1.0]), ..SolverConfig::default() },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidArgument(_))), "{cfg:?}");
    }
}

#[test]
fn variance_reduced_gradient_at_anchor_is_mu() {
    let problem = lasso(3, 8, 5, 0.1);
    let anchor = vec![0.3, -0.2, 0.0, 1.0, 0.5];
    let mu = vec![1.0, 2.0, 3.0, 4.0, 5.0];
    for xi in 0..8 {
        let d = variance_reduced_gradient(&problem, &anchor, &anchor, &mu, xi, 1.0, &Psd::identity()).unwrap();
        assert_eq!(d, mu);
    }
}

#[test]
fn variance_reduced_gradient_is_unbiased() {
    let problem = lasso(4, 9, 6, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x1k: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
    let x2k: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
    let lam: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
    let x: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
    let s = Psd::Diagonal(vec![0.5, 1.0, 2.0, 0.0, 1.5, 3.0]);
    let beta = 1.7;
    let anchor = Anchor { x1: &x1k, x2: &x2k, lambda: &lam };
    let mu = problem.surrogate_gradient(&x1k, &anchor, beta, &s).unwrap();
    let mut mean = vec![0.0; 6];
    for xi in 0..9 {
        let d = variance_reduced_gradient(&problem, &x, &x1k, &mu, xi, beta, &s).unwrap();
        for (m, v) in mean.iter_mut().zip(d) {
            *m += v / 9.0;
        }
    }
    let full = problem.surrogate_gradient(&x, &anchor, beta, &s).unwrap();
    for (u, v) in mean.iter().zip(&full) {
        assert!((u - v).abs() < 1e-12, "{u} vs {v}");
    }
}

#[test]
fn variance_reduced_gradient_rejects_bad_index() {
    let problem = lasso(3, 4, 2, 0.1);
    let z = vec![0.0; 2];
    assert!(variance_reduced_gradient(&problem, &z, &z, &z, 4, 1.0, &Psd::Zero).is_err());
}

// Gradient descent on the surrogate written directly against dense matrices.
fn surrogate_gd_oracle(
    problem: &SeparableProblem,
    st: &SolverState,
    beta: f64,
    s: f64,
    eta: f64,
    m: usize,
) -> Vec<f64> {
    let dense = problem.data().to_dense();
    let (n, p) = (problem.n_samples(), problem.dim1());
    let xm = DMatrix::from_row_slice(n, p, dense.data());
    let y = DVector::from_column_slice(problem.response());
    let x1k = DVector::from_column_slice(&st.x1);
    let x2k = DVector::from_column_slice(&st.x2);
    let lam = DVector::from_column_slice(&st.lambda);
    let grad = |x: &DVector<f64>| -> DVector<f64> {
        xm.transpose() * (&xm * x - &y) * (2.0 / n as f64) - &lam + (x - &x2k) * beta + (x - &x1k) * s
    };
    let mut x = x1k.clone();
    let mut sum = x.clone();
    for _ in 1..m {
        x = &x - grad(&x) * eta;
        sum += &x;
    }
    (sum / m as f64).iter().copied().collect()
}

#[test]
fn inner_loop_with_full_gradient_matches_oracle() {
    let problem = lasso(7, 12, 5, 0.2);
    let config = SolverConfig { m_cap: MCap::Fixed(7), beta: 0.8, s: Psd::ScaledIdentity(2.0), ..SolverConfig::default() };
    let consts = ScheduleConstants::compute(&problem, &config);
    let mut st = SolverState::new(&problem, &config);
    st.x1 = vec![0.1, -0.3, 0.2, 0.0, 0.4];
    st.lambda = vec![0.05, 0.0, -0.1, 0.2, 0.0];
    let st0 = st.clone();
    let out = ss_prsm_inner_with(&problem, &mut st, &consts, &config, InnerGradient::Full).unwrap();
    assert_eq!(out.m_k, 7);
    assert!((out.eta_k - 1.0 / 7.0).abs() < 1e-15);
    let expected = surrogate_gd_oracle(&problem, &st0, 0.8, 2.0, out.eta_k, 7);
    for (u, v) in out.x1.iter().zip(&expected) {
        assert!((u - v).abs() < 1e-12, "{u} vs {v}");
    }
}

#[test]
fn inner_loop_counters_and_anchor_norm() {
    let problem = lasso(8, 10, 4, 0.1);
    let config = SolverConfig { m_cap: MCap::Fixed(6), ..SolverConfig::default() };
    let consts = ScheduleConstants::compute(&problem, &config);
    let mut st = SolverState::new(&problem, &config);
    let anchor = Anchor { x1: &st.x1.clone(), x2: &st.x2.clone(), lambda: &st.lambda.clone() };
    let mu = problem.surrogate_gradient(anchor.x1, &anchor, config.beta, &config.s).unwrap();
    let out = ss_prsm_inner(&problem, &mut st, &consts, &config).unwrap();
    assert_eq!(out.m_k, 6);
    assert!((out.c_k - norm2(&mu)).abs() < 1e-14);
    assert_eq!(st.counters.grad_evals, 2 * 6 + 10);
    assert!((st.counters.data_passes - (1.0 + 12.0 / 10.0)).abs() < 1e-15);
}

#[test]
fn schedule_constant_uses_dimension_as_diameter() {
    let problem = lasso(9, 6, 4, 0.1);
    let config = SolverConfig { beta: 2.0, s: Psd::ScaledIdentity(3.0), ..SolverConfig::default() };
    let consts = ScheduleConstants::compute(&problem, &config);
    let nu = problem.smoothness_constant();
    assert!((consts.c - 4.0 * (nu + 2.0 + 3.0)).abs() < 1e-12);
    let over = SolverConfig { c_override: Some(5.0), ..config };
    assert_eq!(ScheduleConstants::compute(&problem, &over).c, 5.0);
}

#[test]
fn seeded_runs_are_identical() {
    let problem = lasso(10, 20, 6, 0.1);
    let config = SolverConfig { max_outer: 15, seed: 42, ..SolverConfig::default() };
    let a = solve(&problem, &config).unwrap();
    let b = solve(&problem, &config).unwrap();
    assert_eq!(a.x1, b.x1);
    assert_eq!(a.x2, b.x2);
    assert_eq!(a.x1_avg, b.x1_avg);
    let c = solve(&problem, &SolverConfig { seed: 43, ..config }).unwrap();
    assert_ne!(a.x1, c.x1);
}

#[test]
fn constant_step_schedule_reaches_kkt_point() {
    let problem = lasso(11, 30, 8, 0.3);
    let config = SolverConfig { max_outer: 3000, eps: 1e-10, ..constant(0.25) };
    let out = solve(&problem, &config).unwrap();
    assert!(out.converged(), "stopped with {:?} after {}", out.stop, out.outer_iterations);
    assert!(lasso_kkt_violation(&problem, &out.x2, 0.3) < 1e-7);
}

#[test]
fn decaying_schedule_trace_fields() {
    let problem = lasso(12, 30, 8, 0.3);
    let out = solve(&problem, &SolverConfig { max_outer: 200, ..SolverConfig::default() }).unwrap();
    assert!(out.trace.last().unwrap().residual_norm < out.trace.first().unwrap().residual_norm);
    assert_eq!(out.trace.len(), 200);
    assert!(out.trace.iter().all(|r| r.m_k == Some(60)));
    assert!(out.trace.windows(2).all(|w| w[1].eta_k < w[0].eta_k));
    for r in &out.trace {
        let k = r.outer_iter as f64;
        assert!((r.eta_k.unwrap() * 60.0 * k * k - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_start_on_consensus_stops_immediately() {
    let problem = lasso(13, 5, 3, 0.1);
    let out = solve(&problem, &SolverConfig { init_x2: InitX2::Zeros, ..SolverConfig::default() }).unwrap();
    assert!(out.converged());
    assert_eq!(out.outer_iterations, 0);
    assert!(out.trace.is_empty());
}

#[test]
fn huge_step_reports_divergence_with_trace() {
    let problem = lasso(14, 10, 4, 0.1);
    let config = SolverConfig { max_outer: 50, ..constant(1e6) };
    match solve(&problem, &config) {
        Err(Error::Divergence { algorithm, iteration, .. }) => {
            assert_eq!(algorithm, "ss-prsm");
            assert!(iteration >= 1);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn data_pass_budget_stops_run() {
    let problem = lasso(15, 10, 4, 0.1);
    let config = SolverConfig { max_outer: 1000, max_data_passes: Some(9.0), ..SolverConfig::default() };
    let out = solve(&problem, &config).unwrap();
    assert_eq!(out.stop, StopReason::Budget);
    // each iteration costs 1 + 2 * 20 / 10 = 5 passes
    assert_eq!(out.outer_iterations, 2);
}

#[test]
fn trace_every_thins_records_but_keeps_last() {
    let problem = lasso(16, 10, 4, 0.1);
    let opts = TraceOptions { every: 4, ..TraceOptions::default() };
    let out = solve_traced(&problem, &SolverConfig { max_outer: 10, ..SolverConfig::default() }, &opts).unwrap();
    let iters: Vec<usize> = out.trace.iter().map(|r| r.outer_iter).collect();
    assert_eq!(iters, vec![4, 8, 10]);
}

#[test]
fn full_gradient_driver_is_deterministic_across_seeds() {
    let problem = lasso(17, 10, 4, 0.1);
    let run = |seed| {
        let cfg = SolverConfig { max_outer: 5, seed, ..SolverConfig::default() };
        let mut d = SsPrsm::new(&problem, cfg).unwrap().with_full_gradient();
        for _ in 0..5 {
            d.step().unwrap();
        }
        d.state().x2.clone()
    };
    assert_eq!(run(1), run(2));
}

#[test]
fn mismatched_proximal_matrix_rejected() {
    let problem = lasso(18, 5, 3, 0.1);
    let cfg = SolverConfig { s: Psd::Diagonal(vec![1.0; 4]), ..SolverConfig::default() };
    assert!(matches!(solve(&problem, &cfg), Err(Error::DimensionMismatch { .. })));
}
