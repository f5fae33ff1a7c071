use crate::error::{check_dim, Error, Result};

/// Row-major dense storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim("dense matrix storage", nrows * ncols, data.len())?;
        Ok(Self { nrows, ncols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for row in rows {
            check_dim("dense matrix row", ncols, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Self { nrows: rows.len(), ncols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { nrows: n, ncols: n, data }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }
}

/// One sparse row: strictly increasing column indices with their values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseRow {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Self {
        Self { indices, values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    ncols: usize,
    rows: Vec<SparseRow>,
}

impl SparseMatrix {
    pub fn new(ncols: usize, rows: Vec<SparseRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            check_dim("sparse row values", row.indices.len(), row.values.len())?;
            let increasing = row.indices.windows(2).all(|w| w[0] < w[1]);
            if !increasing {
                return Err(Error::invalid(format!("row {i}: column indices are not strictly increasing")));
            }
            if let Some(&last) = row.indices.last() {
                if last >= ncols {
                    return Err(Error::invalid(format!("row {i}: column index {last} out of range for {ncols} columns")));
                }
            }
        }
        Ok(Self { ncols, rows })
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }
}

/// Design or constraint matrix, stored densely or as sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

/// Borrowed view of one matrix row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse { indices: &'a [usize], values: &'a [f64] },
}

impl Row<'_> {
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        match *self {
            Row::Dense(r) => r.iter().zip(x).map(|(a, b)| a * b).sum(),
            Row::Sparse { indices, values } => indices.iter().zip(values).map(|(&j, v)| v * x[j]).sum(),
        }
    }

    /// `out += alpha * row`
    #[inline]
    pub fn axpy(&self, alpha: f64, out: &mut [f64]) {
        match *self {
            Row::Dense(r) => {
                for (o, v) in out.iter_mut().zip(r) {
                    *o += alpha * v;
                }
            }
            Row::Sparse { indices, values } => {
                for (&j, v) in indices.iter().zip(values) {
                    out[j] += alpha * v;
                }
            }
        }
    }

    pub fn sq_norm(&self) -> f64 {
        match *self {
            Row::Dense(r) => r.iter().map(|v| v * v).sum(),
            Row::Sparse { values, .. } => values.iter().map(|v| v * v).sum(),
        }
    }

    /// Stored `(column, value)` pairs. Dense rows report every column.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match *self {
            Row::Dense(r) => Box::new(r.iter().copied().enumerate()),
            Row::Sparse { indices, values } => Box::new(indices.iter().copied().zip(values.iter().copied())),
        }
    }

    pub fn nnz(&self) -> usize {
        match *self {
            Row::Dense(r) => r.len(),
            Row::Sparse { indices, .. } => indices.len(),
        }
    }
}

impl Matrix {
    pub fn dense(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        DenseMatrix::new(nrows, ncols, data).map(Matrix::Dense)
    }

    pub fn sparse(ncols: usize, rows: Vec<SparseRow>) -> Result<Self> {
        SparseMatrix::new(ncols, rows).map(Matrix::Sparse)
    }

    pub fn nrows(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.nrows,
            Matrix::Sparse(s) => s.rows.len(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Matrix::Dense(d) => d.ncols,
            Matrix::Sparse(s) => s.ncols,
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> Row<'_> {
        match self {
            Matrix::Dense(d) => Row::Dense(&d.data[i * d.ncols..(i + 1) * d.ncols]),
            Matrix::Sparse(s) => {
                let r = &s.rows[i];
                Row::Sparse { indices: &r.indices, values: &r.values }
            }
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Matrix::Sparse(_))
    }

    /// `M x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("matvec operand", self.ncols(), x.len())?;
        Ok((0..self.nrows()).map(|i| self.row(i).dot(x)).collect())
    }

    /// `M^T y`
    pub fn matvec_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim("transposed matvec operand", self.nrows(), y.len())?;
        let mut out = vec![0.0; self.ncols()];
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                self.row(i).axpy(*yi, &mut out);
            }
        }
        Ok(out)
    }

    pub fn row_sq_norms(&self) -> Vec<f64> {
        (0..self.nrows()).map(|i| self.row(i).sq_norm()).collect()
    }

    /// Scales every nonzero row to unit Euclidean norm. All-zero rows are left alone.
    pub fn normalize_rows(&mut self) {
        match self {
            Matrix::Dense(d) => {
                for row in d.data.chunks_mut(d.ncols.max(1)) {
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        row.iter_mut().for_each(|v| *v /= norm);
                    }
                }
            }
            Matrix::Sparse(s) => {
                for row in &mut s.rows {
                    let norm = row.values.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        row.values.iter_mut().for_each(|v| *v /= norm);
                    }
                }
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Matrix::Dense(d) => d.clone(),
            Matrix::Sparse(s) => {
                let mut data = vec![0.0; s.rows.len() * s.ncols];
                for (i, r) in s.rows.iter().enumerate() {
                    for (&j, v) in r.indices.iter().zip(&r.values) {
                        data[i * s.ncols + j] = *v;
                    }
                }
                DenseMatrix { nrows: s.rows.len(), ncols: s.ncols, data }
            }
        }
    }

    /// Sparse-row copy keeping only the nonzero entries.
    pub fn to_sparse(&self) -> SparseMatrix {
        match self {
            Matrix::Sparse(s) => s.clone(),
            Matrix::Dense(d) => {
                let rows = d
                    .data
                    .chunks(d.ncols.max(1))
                    .take(d.nrows)
                    .map(|r| {
                        let (indices, values) = r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, v)| (j, *v)).unzip();
                        SparseRow { indices, values }
                    })
                    .collect();
                SparseMatrix { ncols: d.ncols, rows }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense_and_sparse(nrows: usize, ncols: usize, vals: &[f64]) -> (Matrix, Matrix) {
        // keep roughly half the entries
        let data: Vec<f64> = vals.iter().map(|v| if v.abs() < 0.5 { 0.0 } else { *v }).collect();
        let dense = Matrix::dense(nrows, ncols, data).unwrap();
        let sparse = Matrix::Sparse(dense.to_sparse());
        (dense, sparse)
    }

    proptest! {
        #[test]
        fn sparse_and_dense_products_agree(
            vals in proptest::collection::vec(-2.0f64..2.0, 35),
            x in proptest::collection::vec(-3.0f64..3.0, 7),
            y in proptest::collection::vec(-3.0f64..3.0, 5),
        ) {
            let (d, s) = dense_and_sparse(5, 7, &vals);
            let (a, b) = (d.matvec(&x).unwrap(), s.matvec(&x).unwrap());
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
            }
            let (a, b) = (d.matvec_t(&y).unwrap(), s.matvec_t(&y).unwrap());
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
            }
        }
    }

    #[test]
    fn sparse_rejects_unsorted_and_out_of_range() {
        assert!(Matrix::sparse(4, vec![SparseRow::new(vec![2, 1], vec![1.0, 1.0])]).is_err());
        assert!(Matrix::sparse(4, vec![SparseRow::new(vec![1, 1], vec![1.0, 1.0])]).is_err());
        assert!(Matrix::sparse(4, vec![SparseRow::new(vec![4], vec![1.0])]).is_err());
        assert!(Matrix::sparse(4, vec![SparseRow::new(vec![0, 3], vec![1.0, 1.0])]).is_ok());
    }

    #[test]
    fn normalize_rows_gives_unit_norms() {
        let mut m = Matrix::dense(2, 3, vec![3.0, 4.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        m.normalize_rows();
        assert_eq!(m.row_sq_norms(), vec![1.0, 0.0]);
    }
}
