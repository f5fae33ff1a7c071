use crate::error::{check_dim, Error, Result};
use crate::numkit::{dist2, dot, spectral_norm_estimate, DEFAULT_POWER_ITERS};
use crate::problem::{Loss, SeparableProblem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Stop once the gradient mapping norm falls to this value.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 1_000_000 }
    }
}

/// Minimizer of `theta1(z) + theta2(z)` for a consensus instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub z: Vec<f64>,
    pub f_star: f64,
    pub iterations: usize,
    pub mapping_norm: f64,
}

pub fn reference_solution(problem: &SeparableProblem) -> Result<Reference> {
    reference_solution_from(problem, &vec![0.0; problem.dim1()], ReferenceOptions::default())
}

/// Accelerated proximal gradient with backtracking and gradient-based restart,
/// started at `z0`.
pub fn reference_solution_from(problem: &SeparableProblem, z0: &[f64], opts: ReferenceOptions) -> Result<Reference> {
    if !problem.is_consensus() {
        return Err(Error::Unsupported("reference solutions need a consensus instance".into()));
    }
    check_dim("starting point", problem.dim1(), z0.len())?;
    let n = problem.n_samples() as f64;
    let sigma = spectral_norm_estimate(problem.data(), DEFAULT_POWER_ITERS);
    let bound = match problem.loss() {
        Loss::LeastSquares => 2.0 * sigma * sigma / n,
        Loss::Logistic => {
            let ymax = problem.response().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            ymax * ymax * sigma * sigma / (4.0 * n)
        }
    };
    let mut lip = bound.max(1e-12);
    let reg = problem.regularizer();

    let mut z = z0.to_vec();
    let mut y = z.clone();
    let mut t = 1.0f64;
    let mut best = (f64::INFINITY, z.clone());
    for it in 1..=opts.max_iter {
        let g = problem.full_gradient(&y)?;
        let fy = problem.theta1(&y);
        let z_new = loop {
            let mut cand: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - gi / lip).collect();
            reg.prox_in_place(&mut cand, 1.0 / lip);
            let d: Vec<f64> = cand.iter().zip(&y).map(|(c, yi)| c - yi).collect();
            let model = fy + dot(&g, &d) + 0.5 * lip * dot(&d, &d);
            if problem.theta1(&cand) <= model + 1e-13 * fy.abs().max(1.0) || !lip.is_finite() {
                break cand;
            }
            lip *= 2.0;
        };
        let mapping = lip * dist2(&y, &z_new);
        if mapping < best.0 {
            best = (mapping, z_new.clone());
        }
        if mapping <= opts.tol {
            let f_star = problem.theta1(&z_new) + reg.value(&z_new);
            return Ok(Reference { z: z_new, f_star, iterations: it, mapping_norm: mapping });
        }
        // restart when the momentum direction opposes the step
        let restart = y.iter().zip(&z_new).zip(&z).map(|((yi, zn), zo)| (yi - zn) * (zn - zo)).sum::<f64>() > 0.0;
        let t_next = if restart { 1.0 } else { (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0 };
        let w = if restart { 0.0 } else { (t - 1.0) / t_next };
        y = z_new.iter().zip(&z).map(|(zn, zo)| zn + w * (zn - zo)).collect();
        z = z_new;
        t = t_next;
    }
    Err(Error::NonConvergence { iterations: opts.max_iter, achieved: best.0, best: best.1 })
}
