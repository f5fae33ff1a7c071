use crate::error::{Error, Result};

use super::norm2;

/// Scalar soft-threshold `sign(v) * max(|v| - kappa, 0)`. Zero maps to zero.
#[inline]
pub fn soft_threshold_scalar(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

/// Elementwise soft-threshold, the proximal map of `kappa * ||.||_1`.
pub fn soft_threshold(v: &[f64], kappa: f64) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    Ok(v.iter().map(|&x| soft_threshold_scalar(x, kappa)).collect())
}

/// Block soft-threshold, the proximal map of `kappa * ||.||_2`: scales `v` by
/// `max(1 - kappa / ||v||_2, 0)` and returns zero for `v = 0`.
pub fn soft_threshold_group(v: &[f64], kappa: f64) -> Result<Vec<f64>> {
    check_kappa(kappa)?;
    let mut out = v.to_vec();
    shrink_block(&mut out, kappa);
    Ok(out)
}

/// In-place block shrinkage; `kappa` must already be validated.
pub(crate) fn shrink_block(block: &mut [f64], kappa: f64) {
    let norm = norm2(block);
    let factor = if norm > kappa { 1.0 - kappa / norm } else { 0.0 };
    for x in block.iter_mut() {
        *x *= factor;
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa >= 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("threshold must be a finite nonnegative number, got {kappa}")))
    }
}
