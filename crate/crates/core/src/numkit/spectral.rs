use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{norm2, Matrix};

pub const DEFAULT_POWER_ITERS: usize = 200;

const START_SEED: u64 = 0x005e_ed0f_5eed;

/// Largest singular value of `m` by power iteration on `M^T M`, started from a
/// fixed pseudo-random unit vector. Returns 0 for an all-zero matrix.
pub fn spectral_norm_estimate(m: &Matrix, iters: usize) -> f64 {
    let iters = iters.max(1);
    let ncols = m.ncols();
    if ncols == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..ncols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n0 = norm2(&v);
    v.iter_mut().for_each(|x| *x /= n0);

    let mut estimate = 0.0;
    for _ in 0..iters {
        let mv = m.matvec(&v).expect("dimensions fixed above");
        estimate = norm2(&mv);
        let mut w = m.matvec_t(&mv).expect("dimensions fixed above");
        let nw = norm2(&w);
        if nw == 0.0 {
            return estimate;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
    }
    let mv = m.matvec(&v).expect("dimensions fixed above");
    estimate.max(norm2(&mv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::DenseMatrix;
    use nalgebra::DMatrix;
    use rand_distr::StandardNormal;

    #[test]
    fn identity_and_diagonal() {
        let id = Matrix::Dense(DenseMatrix::identity(6));
        assert!((spectral_norm_estimate(&id, 10) - 1.0).abs() < 1e-10);
        let d = Matrix::dense(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((spectral_norm_estimate(&d, 50) - 3.0).abs() < 1e-8);
    }

    #[test]
    fn zero_matrix_gives_zero() {
        let z = Matrix::dense(3, 4, vec![0.0; 12]).unwrap();
        assert_eq!(spectral_norm_estimate(&z, 20), 0.0);
    }

    #[test]
    fn matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let data: Vec<f64> = (0..400).map(|_| rng.sample(StandardNormal)).collect();
            let m = Matrix::dense(20, 20, data.clone()).unwrap();
            let dm = DMatrix::from_row_slice(20, 20, &data);
            let gram = dm.transpose() * &dm;
            let eig = gram.symmetric_eigen();
            let sigma = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(*b)).sqrt();
            let est = spectral_norm_estimate(&m, 5000);
            assert!((est - sigma).abs() <= 1e-6 * sigma, "{est} vs {sigma}");
        }
    }

    #[test]
    fn nondecreasing_in_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<f64> = (0..150).map(|_| rng.sample(StandardNormal)).collect();
        let m = Matrix::dense(10, 15, data).unwrap();
        let mut prev = 0.0;
        for it in 1..60 {
            let e = spectral_norm_estimate(&m, it);
            assert!(e >= prev - 1e-12);
            prev = e;
        }
    }
}
