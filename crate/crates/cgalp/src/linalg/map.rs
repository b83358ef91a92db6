use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{inner, DenseMatrix, DenseVector};
use crate::scalar::Scalar;

type MapFn<F> = Arc<dyn Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync>;

/// Bounded linear operator given by its action and the action of its adjoint.
#[derive(Clone)]
pub struct LinearMap<F: Scalar> {
    forward: MapFn<F>,
    adjoint: MapFn<F>,
    in_dim: usize,
    out_dim: usize,
    op_norm_bound: Option<F>,
}

impl<F: Scalar> std::fmt::Debug for LinearMap<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearMap")
            .field("in_dim", &self.in_dim)
            .field("out_dim", &self.out_dim)
            .field("op_norm_bound", &self.op_norm_bound)
            .finish()
    }
}

impl<F: Scalar> LinearMap<F> {
    pub fn new(
        in_dim: usize,
        out_dim: usize,
        forward: impl Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync + 'static,
        adjoint: impl Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync + 'static,
    ) -> Self {
        Self {
            forward: Arc::new(forward),
            adjoint: Arc::new(adjoint),
            in_dim,
            out_dim,
            op_norm_bound: None,
        }
    }

    pub fn with_norm_bound(mut self, bound: F) -> Self {
        self.op_norm_bound = Some(bound);
        self
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn op_norm_bound(&self) -> Option<F> {
        self.op_norm_bound
    }

    pub fn apply(&self, x: &DenseVector<F>) -> DenseVector<F> {
        debug_assert_eq!(x.dim(), self.in_dim, "LinearMap::apply dimension");
        (self.forward)(x)
    }

    pub fn apply_adjoint(&self, y: &DenseVector<F>) -> DenseVector<F> {
        debug_assert_eq!(y.dim(), self.out_dim, "LinearMap::apply_adjoint dimension");
        (self.adjoint)(y)
    }

    pub fn from_matrix(m: DenseMatrix<F>) -> Self {
        let mt = Arc::new(m.clone());
        let m = Arc::new(m);
        let (rows, cols) = (m.rows(), m.cols());
        Self::new(
            cols,
            rows,
            move |x| m.matvec(x),
            move |y| mt.matvec_transpose(y),
        )
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(dim, dim, |x| x.clone(), |y| y.clone()).with_norm_bound(F::one())
    }

    pub fn scaled_identity(dim: usize, c: F) -> Self {
        Self::new(dim, dim, move |x| x.scale(c), move |y| y.scale(c)).with_norm_bound(c.abs())
    }

    pub fn zero(in_dim: usize, out_dim: usize) -> Self {
        Self::new(
            in_dim,
            out_dim,
            move |_| DenseVector::zeros(out_dim),
            move |_| DenseVector::zeros(in_dim),
        )
        .with_norm_bound(F::zero())
    }

    /// Block-diagonal operator acting blockwise with identical block layout.
    pub fn block_diagonal(blocks: Vec<LinearMap<F>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidInput("block_diagonal needs at least one block".into()));
        }
        let in_dims: Vec<usize> = blocks.iter().map(|b| b.in_dim).collect();
        let out_dims: Vec<usize> = blocks.iter().map(|b| b.out_dim).collect();
        let in_total: usize = in_dims.iter().sum();
        let out_total: usize = out_dims.iter().sum();
        let bound = blocks
            .iter()
            .map(|b| b.op_norm_bound)
            .try_fold(F::zero(), |acc, b| b.map(|v| acc.max(v)));
        let fwd_blocks = blocks.clone();
        let adj_blocks = blocks;
        let fwd_in = in_dims.clone();
        let map = Self::new(
            in_total,
            out_total,
            move |x| {
                let mut out = Vec::with_capacity(fwd_blocks.len());
                let mut lo = 0;
                for (b, &d) in fwd_blocks.iter().zip(&fwd_in) {
                    out.push(b.apply(&x.segment(lo, lo + d)));
                    lo += d;
                }
                DenseVector::concat(&out)
            },
            move |y| {
                let mut out = Vec::with_capacity(adj_blocks.len());
                let mut lo = 0;
                for (b, &d) in adj_blocks.iter().zip(&out_dims) {
                    out.push(b.apply_adjoint(&y.segment(lo, lo + d)));
                    lo += d;
                }
                DenseVector::concat(&out)
            },
        );
        Ok(match bound {
            Some(b) => map.with_norm_bound(b),
            None => map,
        })
    }

    /// Projection onto the orthogonal complement of the diagonal subspace of
    /// an `n_blocks`-fold product space: block `i` maps to `x_i - mean_j x_j`.
    /// Self-adjoint and idempotent under both the standard and the
    /// uniformly weighted inner product.
    pub fn diagonal_complement_projector(n_blocks: usize, block_dim: usize) -> Self {
        let dim = n_blocks * block_dim;
        let project = move |x: &DenseVector<F>| {
            let nf = F::of(n_blocks as f64);
            let mut mean = DenseVector::zeros(block_dim);
            for i in 0..n_blocks {
                mean.axpy(F::one() / nf, &x.segment(i * block_dim, (i + 1) * block_dim));
            }
            let mut out = Vec::with_capacity(dim);
            for i in 0..n_blocks {
                for j in 0..block_dim {
                    out.push(x[i * block_dim + j] - mean[j]);
                }
            }
            DenseVector::from_vec_unchecked(out)
        };
        Self::new(dim, dim, project, project).with_norm_bound(F::one())
    }

    /// Materialize as a dense matrix by applying to basis vectors.
    pub fn to_dense(&self) -> DenseMatrix<F> {
        let mut m = DenseMatrix::zeros(self.out_dim, self.in_dim);
        for j in 0..self.in_dim {
            let col = self.apply(&DenseVector::basis(self.in_dim, j));
            for i in 0..self.out_dim {
                *m.get_mut(i, j) = col[i];
            }
        }
        m
    }
}

/// Checks `<A x, y> = <x, A* y>` on seeded random probes to relative
/// tolerance `1e-10`, scaled by `||x|| ||y|| ||A|| + 1`.
pub fn check_adjoint<F: Scalar>(map: &LinearMap<F>, probes: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm_est = operator_norm_estimate(map, 50);
    for _ in 0..probes {
        let x = DenseVector::<F>::from_f64_slice(
            &(0..map.in_dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
        );
        let y = DenseVector::<F>::from_f64_slice(
            &(0..map.out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
        );
        let lhs = inner(&map.apply(&x), &y)?;
        let rhs = inner(&x, &map.apply_adjoint(&y))?;
        let scale = x.norm() * y.norm() * norm_est + F::one();
        if (lhs - rhs).abs() > F::of(1e-10) * scale {
            return Err(Error::InvalidInput(format!(
                "adjoint test failed: <Ax,y>={lhs} but <x,A*y>={rhs}"
            )));
        }
    }
    Ok(())
}

/// Power-method estimate of the operator norm. The estimate is nondecreasing
/// in `iters` and never exceeds the true norm (up to floating-point error).
pub fn operator_norm_estimate<F: Scalar>(map: &LinearMap<F>, iters: usize) -> F {
    assert!(iters >= 1);
    let mut v = seeded_probe::<F>(map.in_dim(), NORM_PROBE_SEED);
    let n0 = v.norm();
    if n0 == F::zero() {
        return F::zero();
    }
    v.scale_in_place(F::one() / n0);
    let mut estimate = F::zero();
    for _ in 0..iters {
        let av = map.apply(&v);
        estimate = av.norm();
        if estimate == F::zero() {
            return F::zero();
        }
        let w = map.apply_adjoint(&av);
        let wn = w.norm();
        if wn == F::zero() {
            return estimate;
        }
        v = w.scale(F::one() / wn);
    }
    estimate
}

const NORM_PROBE_SEED: u64 = 0x0b5e_55ed;

fn seeded_probe<F: Scalar>(dim: usize, seed: u64) -> DenseVector<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseVector::from_f64_slice(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>())
}

/// Sampling mask keeping a fixed set of matrix entries.
#[derive(Debug, Clone)]
pub struct MaskOperator {
    kept_indices: Vec<(usize, usize)>,
    shape: (usize, usize),
}

impl MaskOperator {
    /// Indices are deduplicated, range-checked and kept in sorted order so
    /// the observation vector layout is deterministic.
    pub fn new(mut kept_indices: Vec<(usize, usize)>, shape: (usize, usize)) -> Result<Self> {
        kept_indices.sort_unstable();
        kept_indices.dedup();
        if let Some(&(i, j)) = kept_indices.iter().find(|&&(i, j)| i >= shape.0 || j >= shape.1) {
            return Err(Error::InvalidInput(format!(
                "mask index ({i},{j}) out of range for shape {shape:?}"
            )));
        }
        Ok(Self { kept_indices, shape })
    }

    pub fn kept_indices(&self) -> &[(usize, usize)] {
        &self.kept_indices
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn observed(&self) -> usize {
        self.kept_indices.len()
    }

    /// Operator from flattened `rows x cols` matrices to observation vectors.
    /// The adjoint scatters observations back to the kept positions.
    pub fn as_linear_map<F: Scalar>(&self) -> LinearMap<F> {
        let (rows, cols) = self.shape;
        let dim = rows * cols;
        let kept_f = self.kept_indices.clone();
        let kept_a = self.kept_indices.clone();
        LinearMap::new(
            dim,
            self.kept_indices.len(),
            move |x| {
                DenseVector::from_vec_unchecked(
                    kept_f.iter().map(|&(i, j)| x[i * cols + j]).collect(),
                )
            },
            move |y| {
                let mut out = DenseVector::zeros(dim);
                for (k, &(i, j)) in kept_a.iter().enumerate() {
                    out[i * cols + j] = y[k];
                }
                out
            },
        )
        .with_norm_bound(F::one())
    }
}
