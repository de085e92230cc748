use crate::error::{Error, Result};

/// Dense row-major `M x N` sensing matrix with cached squared norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    col_sq: Vec<f64>,
    row_sq: Vec<f64>,
    frob_sq: f64,
}

impl SensingOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("operator needs M >= 1 and N >= 1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows} x {cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite matrix entry".into()));
        }
        let mut col_sq = vec![0.0; cols];
        let mut row_sq = vec![0.0; rows];
        for (m, row) in data.chunks_exact(cols).enumerate() {
            for (n, a) in row.iter().enumerate() {
                let a2 = a * a;
                col_sq[n] += a2;
                row_sq[m] += a2;
            }
        }
        let frob_sq = row_sq.iter().sum();
        Ok(Self { rows, cols, data, col_sq, row_sq, frob_sq })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn column_sq_norms(&self) -> &[f64] {
        &self.col_sq
    }

    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.frob_sq
    }

    /// `out = A x`
    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = A^T s`
    pub fn adjoint(&self, s: &[f64], out: &mut [f64]) {
        debug_assert_eq!(s.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (sm, row) in s.iter().zip(self.data.chunks_exact(self.cols)) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * sm;
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.forward(x, &mut out);
        out
    }

    pub fn apply_adjoint(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.adjoint(s, &mut out);
        out
    }
}
