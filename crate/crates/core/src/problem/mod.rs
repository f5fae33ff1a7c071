//! Linearly constrained separable problems
//! `min theta1(x1) + theta2(x2)  s.t.  A x1 + B x2 = b`
//! with `theta1 = (1/n) sum_i theta1_i` a finite-sum data loss.

mod linear_map;
mod regularizer;

pub use linear_map::LinearMap;
pub use regularizer::Regularizer;

use crate::error::{check_dim, Error, Result};
use crate::numkit::{axpy, dot, Matrix, Psd, Row};

/// Per-sample data loss `theta1_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `(x_i^T z - y_i)^2`
    LeastSquares,
    /// `log(1 + exp(-y_i x_i^T z))`, no intercept.
    Logistic,
}

/// The three experiment families, all in consensus form `Z1 - Z2 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceKind {
    Lasso,
    GroupLasso { groups: Vec<usize> },
    SparseLogistic,
}

/// Consensus-form instance before it is lowered into a [`SeparableProblem`].
#[derive(Debug, Clone)]
pub struct ConsensusInstance {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub zeta: f64,
    pub kind: InstanceKind,
}

impl ConsensusInstance {
    pub fn into_problem(self) -> Result<SeparableProblem> {
        let (loss, reg) = match self.kind {
            InstanceKind::Lasso => (Loss::LeastSquares, Regularizer::l1(self.zeta)?),
            InstanceKind::GroupLasso { groups } => (Loss::LeastSquares, Regularizer::group_l2(self.zeta, groups)?),
            InstanceKind::SparseLogistic => (Loss::Logistic, Regularizer::l1(self.zeta)?),
        };
        let p = self.x.ncols();
        SeparableProblem::new(
            self.x,
            self.y,
            loss,
            reg,
            LinearMap::Identity(p),
            LinearMap::NegIdentity(p),
            vec![0.0; p],
        )
    }
}

/// Fixed point `(x1^k, x2^k, lambda^k)` around which the x1-surrogate is built.
#[derive(Debug, Clone, Copy)]
pub struct Anchor<'a> {
    pub x1: &'a [f64],
    pub x2: &'a [f64],
    pub lambda: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct SeparableProblem {
    x: Matrix,
    y: Vec<f64>,
    loss: Loss,
    reg: Regularizer,
    a: LinearMap,
    b_map: LinearMap,
    b: Vec<f64>,
    nu: Vec<f64>,
}

impl SeparableProblem {
    pub fn new(
        x: Matrix,
        y: Vec<f64>,
        loss: Loss,
        reg: Regularizer,
        a: LinearMap,
        b_map: LinearMap,
        b: Vec<f64>,
    ) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::invalid("problem needs at least one sample"));
        }
        check_dim("response length", x.nrows(), y.len())?;
        check_dim("A columns", x.ncols(), a.ncols())?;
        check_dim("B rows", a.nrows(), b_map.nrows())?;
        check_dim("b length", a.nrows(), b.len())?;
        reg.check_dim(b_map.ncols())?;
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("response contains non-finite values"));
        }
        let nu = x
            .row_sq_norms()
            .into_iter()
            .zip(&y)
            .map(|(sq, yi)| match loss {
                Loss::LeastSquares => 2.0 * sq,
                Loss::Logistic => yi * yi * sq,
            })
            .collect();
        Ok(Self { x, y, loss, reg, a, b_map, b, nu })
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim1(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim2(&self) -> usize {
        self.b_map.ncols()
    }

    /// Number of constraint rows.
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn data(&self) -> &Matrix {
        &self.x
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.reg
    }

    pub fn a(&self) -> &LinearMap {
        &self.a
    }

    pub fn b_map(&self) -> &LinearMap {
        &self.b_map
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `A = I, B = -I, b = 0`.
    pub fn is_consensus(&self) -> bool {
        matches!(self.a, LinearMap::Identity(_))
            && matches!(self.b_map, LinearMap::NegIdentity(_))
            && self.b.iter().all(|v| *v == 0.0)
    }

    pub fn component_smoothness(&self) -> &[f64] {
        &self.nu
    }

    /// `nu = max_i nu_i`.
    pub fn smoothness_constant(&self) -> f64 {
        self.nu.iter().fold(0.0, |m, v| m.max(*v))
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n_samples() {
            Ok(())
        } else {
            Err(Error::invalid(format!("sample index {i} out of range for {} samples", self.n_samples())))
        }
    }

    #[inline]
    pub(crate) fn sample_row(&self, i: usize) -> Row<'_> {
        self.x.row(i)
    }

    /// Scalar `c` with `theta1_i'(x1) = c * x_i`; every supported loss is a
    /// function of the margin `x_i^T x1`.
    #[inline]
    pub(crate) fn component_coefficient(&self, i: usize, x1: &[f64]) -> f64 {
        let t = self.x.row(i).dot(x1);
        let yi = self.y[i];
        match self.loss {
            Loss::LeastSquares => 2.0 * (t - yi),
            Loss::Logistic => -yi * sigmoid(-yi * t),
        }
    }

    pub fn component_value(&self, i: usize, x1: &[f64]) -> Result<f64> {
        self.check_index(i)?;
        check_dim("x1", self.dim1(), x1.len())?;
        Ok(self.component_value_unchecked(i, x1))
    }

    fn component_value_unchecked(&self, i: usize, x1: &[f64]) -> f64 {
        let t = self.x.row(i).dot(x1);
        let yi = self.y[i];
        match self.loss {
            Loss::LeastSquares => (t - yi) * (t - yi),
            Loss::Logistic => softplus(-yi * t),
        }
    }

    /// `theta1_i'(x1)`.
    pub fn component_gradient(&self, i: usize, x1: &[f64]) -> Result<Vec<f64>> {
        self.check_index(i)?;
        check_dim("x1", self.dim1(), x1.len())?;
        let mut g = vec![0.0; x1.len()];
        let c = self.component_coefficient(i, x1);
        self.x.row(i).axpy(c, &mut g);
        Ok(g)
    }

    /// `theta1'(x1) = (1/n) sum_i theta1_i'(x1)`, accumulated in place.
    pub fn full_gradient(&self, x1: &[f64]) -> Result<Vec<f64>> {
        check_dim("x1", self.dim1(), x1.len())?;
        let mut g = vec![0.0; x1.len()];
        self.add_full_gradient(1.0, x1, &mut g);
        Ok(g)
    }

    /// `out += scale * theta1'(x1)`
    pub(crate) fn add_full_gradient(&self, scale: f64, x1: &[f64], out: &mut [f64]) {
        let w = scale / self.n_samples() as f64;
        for i in 0..self.n_samples() {
            let c = self.component_coefficient(i, x1);
            if c != 0.0 {
                self.x.row(i).axpy(w * c, out);
            }
        }
    }

    pub fn theta1(&self, x1: &[f64]) -> f64 {
        let total: f64 = (0..self.n_samples()).map(|i| self.component_value_unchecked(i, x1)).sum();
        total / self.n_samples() as f64
    }

    pub fn theta2(&self, x2: &[f64]) -> f64 {
        self.reg.value(x2)
    }

    /// `theta1(z) + theta2(z)`, meaningful when both blocks share a space.
    pub fn objective(&self, z: &[f64]) -> Result<f64> {
        check_dim("z", self.dim1(), z.len())?;
        check_dim("z", self.dim2(), z.len())?;
        Ok(self.theta1(z) + self.theta2(z))
    }

    /// `A x1 + B x2 - b`
    pub fn residual(&self, x1: &[f64], x2: &[f64]) -> Result<Vec<f64>> {
        let mut r: Vec<f64> = self.b.iter().map(|v| -v).collect();
        self.a.apply_add(x1, &mut r)?;
        self.b_map.apply_add(x2, &mut r)?;
        Ok(r)
    }

    pub fn augmented_lagrangian(&self, x1: &[f64], x2: &[f64], lambda: &[f64], beta: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(Error::invalid(format!("penalty must be nonnegative, got {beta}")));
        }
        check_dim("lambda", self.m(), lambda.len())?;
        let r = self.residual(x1, x2)?;
        Ok(self.theta1(x1) + self.theta2(x2) - dot(lambda, &r) + 0.5 * beta * dot(&r, &r))
    }

    /// Gradient of `G(x1) = L_beta(x1, x2^k, lambda^k) + ||x1 - x1^k||_S^2 / 2`:
    /// `theta1'(x1) - A^T lambda^k + beta A^T (A x1 + B x2^k - b) + S (x1 - x1^k)`.
    pub fn surrogate_gradient(&self, x1: &[f64], anchor: &Anchor<'_>, beta: f64, s: &Psd) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dim1()];
        self.add_surrogate_constraint_terms(x1, anchor, beta, s, &mut g)?;
        self.add_full_gradient(1.0, x1, &mut g);
        Ok(g)
    }

    /// Per-sample surrogate gradient: `theta1'` replaced by `theta1_i'`.
    pub fn surrogate_component_gradient(
        &self,
        i: usize,
        x1: &[f64],
        anchor: &Anchor<'_>,
        beta: f64,
        s: &Psd,
    ) -> Result<Vec<f64>> {
        self.check_index(i)?;
        let mut g = vec![0.0; self.dim1()];
        self.add_surrogate_constraint_terms(x1, anchor, beta, s, &mut g)?;
        let c = self.component_coefficient(i, x1);
        self.x.row(i).axpy(c, &mut g);
        Ok(g)
    }

    fn add_surrogate_constraint_terms(
        &self,
        x1: &[f64],
        anchor: &Anchor<'_>,
        beta: f64,
        s: &Psd,
        out: &mut [f64],
    ) -> Result<()> {
        check_dim("x1", self.dim1(), x1.len())?;
        check_dim("anchor x1", self.dim1(), anchor.x1.len())?;
        check_dim("lambda", self.m(), anchor.lambda.len())?;
        s.check_dim(self.dim1())?;
        let r = self.residual(x1, anchor.x2)?;
        // beta * r - lambda, then pulled back through A^T
        let mut w = r;
        for (wi, li) in w.iter_mut().zip(anchor.lambda) {
            *wi = beta * *wi - li;
        }
        self.a.apply_t_add(1.0, &w, out)?;
        let diff: Vec<f64> = x1.iter().zip(anchor.x1).map(|(u, v)| u - v).collect();
        s.apply_add(1.0, &diff, out);
        Ok(())
    }

    /// Closed-form minimizer of the x2 block subproblem with proximal weight `T = a I`:
    /// `argmin theta2(x2) - <lambda, B x2> + (beta/2)||A x1 + B x2 - b||^2 + (a/2)||x2 - x2^k||^2`.
    /// Needs `B = +-I`.
    pub fn x2_subproblem(&self, x1: &[f64], x2_prev: &[f64], lambda: &[f64], beta: f64, a: f64) -> Result<Vec<f64>> {
        let sign = match self.b_map {
            LinearMap::NegIdentity(_) => 1.0,
            LinearMap::Identity(_) => -1.0,
            LinearMap::General(_) => {
                return Err(Error::Unsupported("closed-form x2 update needs B = -I or B = I".into()));
            }
        };
        check_dim("x2", self.dim2(), x2_prev.len())?;
        check_dim("lambda", self.m(), lambda.len())?;
        // c = A x1 - b
        let mut c: Vec<f64> = self.b.iter().map(|v| -v).collect();
        self.a.apply_add(x1, &mut c)?;
        let denom = a + beta;
        let mut v: Vec<f64> = x2_prev
            .iter()
            .zip(&c)
            .zip(lambda)
            .map(|((x2, ci), li)| (a * x2 + sign * (beta * ci - li)) / denom)
            .collect();
        self.reg.prox_in_place(&mut v, 1.0 / denom);
        Ok(v)
    }

    /// `out += (theta1_i'(x) - theta1_i'(anchor))`, the variance-reduction difference term.
    #[inline]
    pub(crate) fn add_component_difference(&self, i: usize, x: &[f64], anchor: &[f64], out: &mut [f64]) {
        let c = self.component_coefficient(i, x) - self.component_coefficient(i, anchor);
        if c != 0.0 {
            self.x.row(i).axpy(c, out);
        }
    }

    /// `out += scale * A^T A v`
    pub(crate) fn add_ata(&self, scale: f64, v: &[f64], out: &mut [f64]) {
        match &self.a {
            LinearMap::Identity(_) | LinearMap::NegIdentity(_) => axpy(scale, v, out),
            LinearMap::General(_) => {
                let mut av = vec![0.0; self.m()];
                self.a.apply_add(v, &mut av).expect("dimensions checked at construction");
                self.a.apply_t_add(scale, &av, out).expect("dimensions checked at construction");
            }
        }
    }
}

/// `1 / (1 + exp(-t))` without overflow.
#[inline]
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(t))` without overflow.
#[inline]
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}
