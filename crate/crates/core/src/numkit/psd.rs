use crate::error::{check_dim, Error, Result};

/// Positive semidefinite proximal weight. Only the forms that keep every
/// subproblem closed-form are representable.
#[derive(Debug, Clone, PartialEq)]
pub enum Psd {
    Zero,
    ScaledIdentity(f64),
    Diagonal(Vec<f64>),
}

impl Psd {
    pub fn identity() -> Self {
        Psd::ScaledIdentity(1.0)
    }

    pub fn scaled(c: f64) -> Result<Self> {
        let p = Psd::ScaledIdentity(c);
        p.validate()?;
        Ok(p)
    }

    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        let p = Psd::Diagonal(d);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Psd::Zero => true,
            Psd::ScaledIdentity(c) => *c >= 0.0 && c.is_finite(),
            Psd::Diagonal(d) => d.iter().all(|v| *v >= 0.0 && v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("proximal weight {self:?} is not positive semidefinite")))
        }
    }

    /// Checks that a diagonal weight has the required dimension.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Psd::Diagonal(d) => check_dim("diagonal proximal weight", dim, d.len()),
            _ => Ok(()),
        }
    }

    /// Entry `j` of the diagonal.
    #[inline]
    pub fn diag(&self, j: usize) -> f64 {
        match self {
            Psd::Zero => 0.0,
            Psd::ScaledIdentity(c) => *c,
            Psd::Diagonal(d) => d[j],
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Psd::Zero => true,
            Psd::ScaledIdentity(c) => *c == 0.0,
            Psd::Diagonal(d) => d.iter().all(|v| *v == 0.0),
        }
    }

    /// Largest eigenvalue, which is also the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        match self {
            Psd::Zero => 0.0,
            Psd::ScaledIdentity(c) => *c,
            Psd::Diagonal(d) => d.iter().fold(0.0, |m: f64, v| m.max(*v)),
        }
    }

    /// `out += scale * S x`
    pub fn apply_add(&self, scale: f64, x: &[f64], out: &mut [f64]) {
        match self {
            Psd::Zero => {}
            Psd::ScaledIdentity(c) => {
                let f = scale * c;
                for (o, v) in out.iter_mut().zip(x) {
                    *o += f * v;
                }
            }
            Psd::Diagonal(d) => {
                for ((o, v), dj) in out.iter_mut().zip(x).zip(d) {
                    *o += scale * dj * v;
                }
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_add(1.0, x, &mut out);
        out
    }
}

/// `x^T S x`.
pub fn weighted_sq_norm(x: &[f64], s: &Psd) -> Result<f64> {
    s.check_dim(x.len())?;
    Ok(match s {
        Psd::Zero => 0.0,
        Psd::ScaledIdentity(c) => c * x.iter().map(|v| v * v).sum::<f64>(),
        Psd::Diagonal(d) => x.iter().zip(d).map(|(v, dj)| dj * v * v).sum(),
    })
}

impl Psd {
    pub fn weighted_sq_norm(&self, x: &[f64]) -> Result<f64> {
        weighted_sq_norm(x, self)
    }
}
