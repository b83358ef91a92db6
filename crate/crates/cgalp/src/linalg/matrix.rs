use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::scalar::Scalar;

/// Dense row-major matrix with finite 64-bit (or 32-bit) float entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<F: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<F>,
}

impl<F: Scalar> DenseMatrix<F> {
    pub fn new(rows: usize, cols: usize, entries: Vec<F>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput("matrix dimensions must be positive".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
                context: "matrix entries".into(),
            });
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite {
                context: "DenseMatrix::new".into(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.get_mut(i, i) = F::one();
        }
        m
    }

    pub fn from_f64_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let entries = rows
            .iter()
            .flat_map(|row| row.iter().map(|&e| F::of(e)))
            .collect();
        Self { rows: r, cols: c, entries }
    }

    pub fn diagonal(diag: &[F]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            *m.get_mut(i, i) = d;
        }
        m
    }

    /// Rank-one matrix `a b^T`.
    pub fn outer(a: &DenseVector<F>, b: &DenseVector<F>) -> Self {
        let mut m = Self::zeros(a.dim(), b.dim());
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                *m.get_mut(i, j) = a[i] * b[j];
            }
        }
        m
    }

    /// Reinterpret a flat vector as a `rows x cols` row-major matrix.
    pub fn from_flat(rows: usize, cols: usize, v: &DenseVector<F>) -> Result<Self> {
        if v.dim() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: v.dim(),
                context: "matrix from flat vector".into(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries: v.as_slice().to_vec(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut F {
        &mut self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[F] {
        &self.entries
    }

    /// Flatten row-major into a vector.
    pub fn to_flat(&self) -> DenseVector<F> {
        DenseVector::from_vec_unchecked(self.entries.clone())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.get_mut(j, i) = self.get(i, j);
            }
        }
        t
    }

    pub fn matvec(&self, x: &DenseVector<F>) -> DenseVector<F> {
        assert_eq!(x.dim(), self.cols, "matvec dimensions");
        let mut out = vec![F::zero(); self.rows];
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            out[i] = row
                .iter()
                .zip(x.as_slice())
                .map(|(&a, &b)| a * b)
                .fold(F::zero(), |acc, v| acc + v);
        }
        DenseVector::from_vec_unchecked(out)
    }

    /// `A^T x` without materializing the transpose.
    pub fn matvec_transpose(&self, x: &DenseVector<F>) -> DenseVector<F> {
        assert_eq!(x.dim(), self.rows, "matvec_transpose dimensions");
        let mut out = vec![F::zero(); self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o = *o + a * xi;
            }
        }
        DenseVector::from_vec_unchecked(out)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimensions");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                for j in 0..other.cols {
                    *out.get_mut(i, j) = out.get(i, j) + aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> F {
        self.entries
            .iter()
            .map(|&e| e * e)
            .fold(F::zero(), |acc, v| acc + v)
            .sqrt()
    }

    /// Entrywise l1 norm (the vectorized norm, not the induced one).
    pub fn entrywise_l1(&self) -> F {
        self.entries.iter().fold(F::zero(), |acc, &e| acc + e.abs())
    }

    pub fn scale(&self, c: F) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn column(&self, j: usize) -> DenseVector<F> {
        DenseVector::from_vec_unchecked((0..self.rows).map(|i| self.get(i, j)).collect())
    }
}
