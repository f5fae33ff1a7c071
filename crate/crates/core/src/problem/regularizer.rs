use crate::error::{check_dim, Error, Result};
use crate::numkit::{norm1, norm2, soft_threshold_scalar};
use crate::numkit::shrink_block;

/// The nonsmooth block `theta_2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    /// `zeta * ||x||_1`
    L1 { zeta: f64 },
    /// `zeta * sum_g ||x_g||_2` over contiguous blocks of the given sizes.
    GroupL2 { zeta: f64, groups: Vec<usize> },
}

impl Regularizer {
    pub fn l1(zeta: f64) -> Result<Self> {
        check_zeta(zeta)?;
        Ok(Regularizer::L1 { zeta })
    }

    pub fn group_l2(zeta: f64, groups: Vec<usize>) -> Result<Self> {
        check_zeta(zeta)?;
        if groups.contains(&0) {
            return Err(Error::invalid("group sizes must be positive"));
        }
        Ok(Regularizer::GroupL2 { zeta, groups })
    }

    pub fn zeta(&self) -> f64 {
        match self {
            Regularizer::L1 { zeta } | Regularizer::GroupL2 { zeta, .. } => *zeta,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Regularizer::L1 { .. } => Ok(()),
            Regularizer::GroupL2 { groups, .. } => check_dim("group partition total", dim, groups.iter().sum()),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Regularizer::L1 { zeta } => zeta * norm1(x),
            Regularizer::GroupL2 { zeta, groups } => {
                let mut start = 0;
                let mut total = 0.0;
                for g in groups {
                    total += norm2(&x[start..start + g]);
                    start += g;
                }
                zeta * total
            }
        }
    }

    /// In-place `prox_{c * theta_2}`: the minimizer of `c*theta_2(u) + ||u - v||^2 / 2`.
    pub fn prox_in_place(&self, v: &mut [f64], c: f64) {
        match self {
            Regularizer::L1 { zeta } => {
                let kappa = c * zeta;
                v.iter_mut().for_each(|x| *x = soft_threshold_scalar(*x, kappa));
            }
            Regularizer::GroupL2 { zeta, groups } => {
                let kappa = c * zeta;
                let mut start = 0;
                for g in groups {
                    shrink_block(&mut v[start..start + g], kappa);
                    start += g;
                }
            }
        }
    }

    pub fn prox(&self, v: &[f64], c: f64) -> Result<Vec<f64>> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("prox scale must be finite and nonnegative, got {c}")));
        }
        self.check_dim(v.len())?;
        let mut out = v.to_vec();
        self.prox_in_place(&mut out, c);
        Ok(out)
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta >= 0.0 && zeta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("regularization weight must be finite and nonnegative, got {zeta}")))
    }
}
