use crate::error::{Error, Result};
use crate::problem::SeparableProblem;

use super::SolverConfig;

/// Upper bound on `(1 - alpha + sqrt((1 + alpha)^2 + 4 (1 - alpha^2))) / 2` for the
/// second relaxation factor; admissible `gamma` lie strictly below it.
pub fn gamma_max(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    let disc = (1.0 + alpha).powi(2) + 4.0 * (1.0 - alpha * alpha);
    Ok((1.0 - alpha + disc.sqrt()) / 2.0)
}

/// Checks `alpha in [0,1)` and `0 < gamma < gamma_max(alpha)`.
pub fn check_relaxation(alpha: f64, gamma: f64) -> Result<()> {
    let bound = gamma_max(alpha)?;
    if gamma > 0.0 && gamma < bound {
        Ok(())
    } else {
        Err(Error::invalid(format!("gamma = {gamma} outside (0, {bound:.6}) for alpha = {alpha}")))
    }
}

/// Cap on the number of inner steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MCap {
    /// `2 n`.
    #[default]
    TwiceSamples,
    Fixed(usize),
    Unbounded,
}

impl MCap {
    pub fn resolve(self, n_samples: usize) -> Option<usize> {
        match self {
            MCap::TwiceSamples => Some(2 * n_samples),
            MCap::Fixed(m) => Some(m),
            MCap::Unbounded => None,
        }
    }
}

/// How `(M_k, eta_k)` are chosen for each inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InnerSchedule {
    /// `M_k = min(cap, ceil(C^2 + C_k^2))`, `eta_k = 1 / (M_k (k+1)^2)`.
    #[default]
    Decaying,
    /// Fixed `eta = scale / L_G` and `M_k = cap` (`2n` when uncapped), where
    /// `L_G = nu + beta sigma_A^2 + sigma_S` bounds the surrogate's curvature.
    ConstantStep { scale: f64 },
}

/// Constants feeding the inner-loop schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConstants {
    pub c: f64,
    pub nu: f64,
    pub sigma_a: f64,
    pub sigma_s: f64,
}

impl ScheduleConstants {
    /// `C = D (nu + beta sigma_A^2 + sigma_S)` with `D` the configured diameter
    /// (problem dimension by default), unless overridden.
    pub fn compute(problem: &SeparableProblem, config: &SolverConfig) -> Self {
        let nu = problem.smoothness_constant();
        let sigma_a = problem.a().spectral_norm();
        let sigma_s = config.s.spectral_norm();
        let diameter = config.diameter.unwrap_or(problem.dim1() as f64);
        let c = config
            .c_override
            .unwrap_or(diameter * (nu + config.beta * sigma_a * sigma_a + sigma_s));
        Self { c, nu, sigma_a, sigma_s }
    }

    /// Curvature bound of the surrogate `G`.
    pub fn surrogate_lipschitz(&self, beta: f64) -> f64 {
        self.nu + beta * self.sigma_a * self.sigma_a + self.sigma_s
    }
}

/// Decaying schedule for outer index `k` (0-based): `M_k = min(cap, ceil(C^2 + C_k^2))`
/// and `eta_k = 1 / (M_k (k+1)^2)` computed from the capped `M_k`.
pub fn inner_schedule(k: usize, consts: &ScheduleConstants, c_k: f64, cap: Option<usize>) -> (usize, f64) {
    let raw = (consts.c * consts.c + c_k * c_k).ceil();
    // saturate before converting; anything this large is capped in practice
    let raw = if raw.is_finite() && raw < (usize::MAX / 4) as f64 { raw as usize } else { usize::MAX / 4 };
    let m = cap.map_or(raw, |c| c.min(raw)).max(1);
    let kk = (k + 1) as f64;
    (m, 1.0 / (m as f64 * kk * kk))
}
