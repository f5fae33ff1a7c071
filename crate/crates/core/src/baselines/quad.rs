use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_dim, Error, Result};
use crate::numkit::Matrix;

enum Factor {
    /// Cholesky of `D + c X^T X` (p x p).
    Direct(Cholesky<f64, Dyn>),
    /// Cholesky of `(1/c) I + X D^-1 X^T` (n x n), applied through Woodbury.
    Woodbury(Cholesky<f64, Dyn>),
}

/// Cached solver for `(D + c X^T X) z = r` with `D` a positive diagonal.
pub struct QuadSolver<'m> {
    x: &'m Matrix,
    d: Vec<f64>,
    factor: Factor,
}

impl<'m> QuadSolver<'m> {
    pub fn new(x: &'m Matrix, c: f64, d: Vec<f64>) -> Result<Self> {
        let (n, p) = (x.nrows(), x.ncols());
        check_dim("diagonal", p, d.len())?;
        if !(c > 0.0) || d.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Factorization("system is not positive definite".into()));
        }
        let factor = if p <= n {
            let mut m = gram(x);
            m.scale_mut(c);
            for (j, dj) in d.iter().enumerate() {
                m[(j, j)] += dj;
            }
            Factor::Direct(cholesky(m)?)
        } else {
            let mut k = DMatrix::<f64>::zeros(n, n);
            let mut w = vec![0.0; p];
            for i in 0..n {
                w.iter_mut().for_each(|v| *v = 0.0);
                for (j, v) in x.row(i).entries() {
                    w[j] = v / d[j];
                }
                for l in i..n {
                    let v = x.row(l).dot(&w);
                    k[(i, l)] = v;
                    k[(l, i)] = v;
                }
                k[(i, i)] += 1.0 / c;
            }
            Factor::Woodbury(cholesky(k)?)
        };
        Ok(Self { x, d, factor })
    }

    /// Whether the n x n Woodbury route is in use.
    pub fn uses_woodbury(&self) -> bool {
        matches!(self.factor, Factor::Woodbury(_))
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.factor {
            Factor::Direct(ch) => ch.solve(&DVector::from_column_slice(rhs)).iter().copied().collect(),
            Factor::Woodbury(ch) => {
                // z = D^-1 r - D^-1 X^T K^-1 X D^-1 r
                let dr: Vec<f64> = rhs.iter().zip(&self.d).map(|(r, d)| r / d).collect();
                let u = self.x.matvec(&dr).expect("dimensions fixed at construction");
                let v = ch.solve(&DVector::from_vec(u));
                let t = self.x.matvec_t(v.as_slice()).expect("dimensions fixed at construction");
                dr.iter().zip(&t).zip(&self.d).map(|((a, b), d)| a - b / d).collect()
            }
        }
    }
}

fn cholesky(m: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or_else(|| Error::Factorization("Cholesky factorization failed".into()))
}

/// `X^T X`
fn gram(x: &Matrix) -> DMatrix<f64> {
    let p = x.ncols();
    match x {
        Matrix::Dense(d) => {
            let m = DMatrix::from_row_slice(x.nrows(), p, d.data());
            m.tr_mul(&m)
        }
        Matrix::Sparse(_) => {
            let mut g = DMatrix::<f64>::zeros(p, p);
            for i in 0..x.nrows() {
                let row: Vec<(usize, f64)> = x.row(i).entries().collect();
                for &(j, a) in &row {
                    for &(l, b) in &row {
                        g[(j, l)] += a * b;
                    }
                }
            }
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{DenseMatrix, SparseRow};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(n: usize, p: usize, sparse: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64((n * 31 + p) as u64);
        let data: Vec<f64> = (0..n * p)
            .map(|_| if rng.random_bool(0.5) { rng.random_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let dense = DenseMatrix::new(n, p, data.clone()).unwrap();
        let x = if sparse { Matrix::Sparse(Matrix::Dense(dense.clone()).to_sparse()) } else { Matrix::Dense(dense) };
        let d: Vec<f64> = (0..p).map(|j| 0.5 + j as f64 * 0.1).collect();
        let c = 2.0 / n as f64;
        let rhs: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let solver = QuadSolver::new(&x, c, d.clone()).unwrap();
        assert_eq!(solver.uses_woodbury(), p > n);
        let z = solver.solve(&rhs);
        // residual of the original system, formed independently
        let xm = DMatrix::from_row_slice(n, p, &data);
        let full = DMatrix::from_diagonal(&DVector::from_vec(d)) + xm.transpose() * &xm * c;
        let res = full * DVector::from_vec(z) - DVector::from_vec(rhs);
        assert!(res.amax() < 1e-10, "{}", res.amax());
    }

    #[test]
    fn direct_and_woodbury_solve_the_system() {
        check(12, 5, false);
        check(5, 12, false);
        check(12, 5, true);
        check(5, 12, true);
    }

    #[test]
    fn rejects_nonpositive_diagonal() {
        let x = Matrix::Sparse(crate::numkit::SparseMatrix::new(2, vec![SparseRow::new(vec![0], vec![1.0])]).unwrap());
        assert!(matches!(QuadSolver::new(&x, 1.0, vec![1.0, 0.0]), Err(Error::Factorization(_))));
    }
}
