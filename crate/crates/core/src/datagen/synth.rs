use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Dataset, DatasetMeta, Task, Truth};
use crate::error::{Error, Result};
use crate::numkit::{DenseMatrix, Matrix, SparseRow};

/// Noise level of the group-lasso design, matching the lasso default.
pub const GROUP_NOISE_SD: f64 = 0.1;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn planted(rng: &mut ChaCha8Rng, p: usize, s: usize) -> Truth {
    let mut support = sample(rng, p, s).into_vec();
    support.sort_unstable();
    let mut z = vec![0.0; p];
    for &j in &support {
        z[j] = normal(rng);
    }
    Truth { z, support }
}

/// Unit-norm Gaussian rows.
fn normalized_gaussian(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
    let data: Vec<f64> = (0..n * p).map(|_| normal(rng)).collect();
    let mut x = Matrix::Dense(DenseMatrix::new(n, p, data).expect("shape matches data"));
    x.normalize_rows();
    x
}

fn noisy_response(rng: &mut ChaCha8Rng, x: &Matrix, z: &[f64], sd: f64) -> Vec<f64> {
    let mut y = x.matvec(z).expect("truth has p entries");
    for v in &mut y {
        *v += sd * normal(rng);
    }
    y
}

fn meta(name: &str, n: usize, p: usize, seed: u64) -> DatasetMeta {
    DatasetMeta { name: name.into(), n, p, seed: Some(seed) }
}

/// `Y = X z + eps`, rows of `X` Gaussian then normalized, `s` Gaussian coefficients.
pub fn gen_lasso(n: usize, p: usize, s: usize, noise_sd: f64, seed: u64) -> Result<Dataset> {
    if s > p {
        return Err(Error::invalid(format!("support size {s} exceeds dimension {p}")));
    }
    if n == 0 || p == 0 {
        return Err(Error::invalid("n and p must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = normalized_gaussian(&mut rng, n, p);
    let truth = planted(&mut rng, p, s);
    let y = noisy_response(&mut rng, &x, &truth.z, noise_sd);
    Ok(Dataset { x, y, groups: None, truth: Some(truth), task: Task::Lasso, meta: meta("lasso", n, p, seed) })
}

/// `n_groups` blocks of size uniform on `1..=max_group`, `floor(0.15 n_i)` active
/// coefficients per block.
pub fn gen_group_lasso(n: usize, n_groups: usize, max_group: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || n_groups == 0 || max_group == 0 {
        return Err(Error::invalid("n, group count and max group size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: Vec<usize> = (0..n_groups).map(|_| rng.random_range(1..=max_group)).collect();
    let p: usize = groups.iter().sum();
    let x = normalized_gaussian(&mut rng, n, p);
    let mut z = vec![0.0; p];
    let mut support = Vec::new();
    let mut start = 0;
    for &g in &groups {
        let active = (0.15 * g as f64).floor() as usize;
        let mut picks = sample(&mut rng, g, active).into_vec();
        picks.sort_unstable();
        for j in picks {
            z[start + j] = normal(&mut rng);
            support.push(start + j);
        }
        start += g;
    }
    let y = noisy_response(&mut rng, &x, &z, GROUP_NOISE_SD);
    Ok(Dataset {
        x,
        y,
        groups: Some(groups),
        truth: Some(Truth { z, support }),
        task: Task::GroupLasso,
        meta: meta("group-lasso", n, p, seed),
    })
}

/// Sparse rows with `row_nnz` Gaussian entries; `Y = sign(X z + eps)` with `sign(0) = +1`.
pub fn gen_sparse_logistic(n: usize, p: usize, s: usize, row_nnz: usize, seed: u64) -> Result<Dataset> {
    if row_nnz > p || s > p {
        return Err(Error::invalid(format!("row_nnz {row_nnz} and support {s} must not exceed p = {p}")));
    }
    if n == 0 || p == 0 {
        return Err(Error::invalid("n and p must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<SparseRow> = (0..n)
        .map(|_| {
            let mut idx = sample(&mut rng, p, row_nnz).into_vec();
            idx.sort_unstable();
            let vals = idx.iter().map(|_| normal(&mut rng)).collect();
            SparseRow::new(idx, vals)
        })
        .collect();
    let x = Matrix::sparse(p, rows)?;
    let truth = planted(&mut rng, p, s);
    let y = noisy_response(&mut rng, &x, &truth.z, 0.1)
        .into_iter()
        .map(|v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    Ok(Dataset { x, y, groups: None, truth: Some(truth), task: Task::Logistic, meta: meta("logistic", n, p, seed) })
}
