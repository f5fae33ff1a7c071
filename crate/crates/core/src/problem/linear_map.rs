use crate::error::{check_dim, Result};
use crate::numkit::{spectral_norm_estimate, Matrix, DEFAULT_POWER_ITERS};

/// Constraint operator `A` or `B`. Identity tags avoid storing `I` densely.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    Identity(usize),
    NegIdentity(usize),
    General(Matrix),
}

impl LinearMap {
    pub fn nrows(&self) -> usize {
        match self {
            LinearMap::Identity(d) | LinearMap::NegIdentity(d) => *d,
            LinearMap::General(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            LinearMap::Identity(d) | LinearMap::NegIdentity(d) => *d,
            LinearMap::General(m) => m.ncols(),
        }
    }

    /// `out += M x`
    pub fn apply_add(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("linear map operand", self.ncols(), x.len())?;
        check_dim("linear map output", self.nrows(), out.len())?;
        match self {
            LinearMap::Identity(_) => out.iter_mut().zip(x).for_each(|(o, v)| *o += v),
            LinearMap::NegIdentity(_) => out.iter_mut().zip(x).for_each(|(o, v)| *o -= v),
            LinearMap::General(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += m.row(i).dot(x);
                }
            }
        }
        Ok(())
    }

    /// `out += scale * M^T y`
    pub fn apply_t_add(&self, scale: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        check_dim("transposed linear map operand", self.nrows(), y.len())?;
        check_dim("transposed linear map output", self.ncols(), out.len())?;
        match self {
            LinearMap::Identity(_) => out.iter_mut().zip(y).for_each(|(o, v)| *o += scale * v),
            LinearMap::NegIdentity(_) => out.iter_mut().zip(y).for_each(|(o, v)| *o -= scale * v),
            LinearMap::General(m) => {
                for (i, yi) in y.iter().enumerate() {
                    if *yi != 0.0 {
                        m.row(i).axpy(scale * yi, out);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn spectral_norm(&self) -> f64 {
        match self {
            LinearMap::Identity(_) | LinearMap::NegIdentity(_) => 1.0,
            LinearMap::General(m) => spectral_norm_estimate(m, DEFAULT_POWER_ITERS),
        }
    }
}
