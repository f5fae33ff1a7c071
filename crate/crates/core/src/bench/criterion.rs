use crate::numkit::norm2;
use crate::problem::SeparableProblem;

/// Gap-plus-feasibility measure at an averaged pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    /// `theta1(x1) + theta2(x2) - f* + rho ||A x1 + B x2 - b||`, may be negative.
    pub raw: f64,
    /// `raw` clamped at zero for display.
    pub reported: f64,
}

pub fn criterion(problem: &SeparableProblem, x1: &[f64], x2: &[f64], f_star: f64, rho: f64) -> Criterion {
    let r = problem.residual(x1, x2).expect("averaged iterates have problem dimensions");
    let raw = problem.theta1(x1) + problem.theta2(x2) - f_star + rho * norm2(&r);
    Criterion { raw, reported: raw.max(0.0) }
}
