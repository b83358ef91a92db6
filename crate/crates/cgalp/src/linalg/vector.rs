use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense finite-dimensional Hilbert-space element.
///
/// Constructors reject NaN/Inf entries; all arithmetic assumes matching
/// dimensions and panics otherwise (dimension errors at the API boundary go
/// through [`inner`] and friends, which return structured errors).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector<F: Scalar> {
    entries: Vec<F>,
}

impl<F: Scalar> DenseVector<F> {
    pub fn new(entries: Vec<F>) -> Result<Self> {
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite {
                context: "DenseVector::new".into(),
            });
        }
        Ok(Self { entries })
    }

    /// Construction without the finiteness check, for hot loops whose inputs
    /// are already vetted.
    pub fn from_vec_unchecked(entries: Vec<F>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![F::zero(); dim],
        }
    }

    pub fn from_f64_slice(entries: &[f64]) -> Self {
        Self {
            entries: entries.iter().map(|&e| F::of(e)).collect(),
        }
    }

    /// Standard basis vector `e_i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v[i] = F::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [F] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<F> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, F> {
        self.entries.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }

    pub fn norm(&self) -> F {
        self.entries
            .iter()
            .map(|&e| e * e)
            .fold(F::zero(), |acc, x| acc + x)
            .sqrt()
    }

    pub fn norm_l1(&self) -> F {
        self.entries
            .iter()
            .fold(F::zero(), |acc, &x| acc + x.abs())
    }

    pub fn norm_inf(&self) -> F {
        self.entries
            .iter()
            .fold(F::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn scale(&self, c: F) -> Self {
        Self {
            entries: self.entries.iter().map(|&e| e * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "vector addition dimensions");
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "vector subtraction dimensions");
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    /// `self += c * other`, in place.
    pub fn axpy(&mut self, c: F, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "axpy dimensions");
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a = *a + c * b;
        }
    }

    pub fn scale_in_place(&mut self, c: F) {
        for a in &mut self.entries {
            *a = *a * c;
        }
    }

    /// Slice out entries `[lo, hi)` as a new vector.
    pub fn segment(&self, lo: usize, hi: usize) -> Self {
        Self {
            entries: self.entries[lo..hi].to_vec(),
        }
    }

    /// Concatenate blocks into one vector.
    pub fn concat(blocks: &[Self]) -> Self {
        let mut entries = Vec::with_capacity(blocks.iter().map(|b| b.dim()).sum());
        for b in blocks {
            entries.extend_from_slice(&b.entries);
        }
        Self { entries }
    }
}

impl<F: Scalar> Index<usize> for DenseVector<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.entries[i]
    }
}

impl<F: Scalar> IndexMut<usize> for DenseVector<F> {
    fn index_mut(&mut self, i: usize) -> &mut F {
        &mut self.entries[i]
    }
}

/// Euclidean inner product.
pub fn inner<F: Scalar>(x: &DenseVector<F>, y: &DenseVector<F>) -> Result<F> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
            context: "inner product".into(),
        });
    }
    Ok(x.iter()
        .zip(y.iter())
        .map(|(&a, &b)| a * b)
        .fold(F::zero(), |acc, v| acc + v))
}
