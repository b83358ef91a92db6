//! Product-space lifting: several nonsmooth terms or several constraint
//! sets are folded into the single composite form by stacking `n` copies
//! of the variable and constraining the stack to the diagonal subspace
//! `V = {x : x^(1) = ... = x^(n)}` via `Pi_{V^perp} x = 0`.
//!
//! The product space carries the `1/n`-weighted inner product
//! `<<x, y>> = (1/n) sum_i <x_i, y_i>`. The projector `Pi_{V^perp}`
//! (blockwise "subtract the mean") is self-adjoint and idempotent under
//! both the weighted and the standard product, so the lifted operators are
//! plain standard-adjoint maps; the weight surfaces only in the objective
//! `F(x) = (1/n) sum_i f(x^(i))` and in diagnostics. With that convention
//! the generic solver step reproduces the separable per-block direction
//!
//! ```text
//! s^(i) = argmin_{s in C_i} <s, (1/n) grad f(x^(i))
//!                               + mu^(i) - mean_j mu^(j)
//!                               + rho (x^(i) - mean_j x^(j))>
//! ```
//!
//! with no special-cased code path.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, LinearMap};
use crate::oracle::LmoFriendly;
use crate::problem::CompositeProblem;
use crate::prox::ProxFriendly;
use crate::scalar::Scalar;

type ValueFn<F> = Arc<dyn Fn(&DenseVector<F>) -> F + Send + Sync>;
type GradFn<F> = Arc<dyn Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync>;

/// Description of a liftable problem: one smooth `f` shared by all blocks,
/// optional composite terms `g_i(T_i .)`, and one oracle-friendly set per
/// block.
#[derive(Clone)]
pub struct ProductSpec<F: Scalar> {
    block_dim: usize,
    f_value: ValueFn<F>,
    f_grad: GradFn<F>,
    g_blocks: Vec<(ProxFriendly<F>, LinearMap<F>)>,
    h_blocks: Vec<LmoFriendly<F>>,
}

impl<F: Scalar> ProductSpec<F> {
    /// `g_blocks` may be empty (no composite terms) or have one entry per
    /// block; `h_blocks` determines the number of blocks.
    pub fn new(
        block_dim: usize,
        f_value: impl Fn(&DenseVector<F>) -> F + Send + Sync + 'static,
        f_grad: impl Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync + 'static,
        g_blocks: Vec<(ProxFriendly<F>, LinearMap<F>)>,
        h_blocks: Vec<LmoFriendly<F>>,
    ) -> Result<Self> {
        if h_blocks.is_empty() {
            return Err(Error::InvalidInput("at least one constraint block required".into()));
        }
        if !g_blocks.is_empty() && g_blocks.len() != h_blocks.len() {
            return Err(Error::InvalidInput(format!(
                "{} composite blocks for {} constraint blocks",
                g_blocks.len(),
                h_blocks.len()
            )));
        }
        for (i, h) in h_blocks.iter().enumerate() {
            if h.a_feasible_point().dim() != block_dim {
                return Err(Error::DimensionMismatch {
                    expected: block_dim,
                    got: h.a_feasible_point().dim(),
                    context: format!("constraint block {i}"),
                });
            }
        }
        for (i, (_, t)) in g_blocks.iter().enumerate() {
            if t.in_dim() != block_dim {
                return Err(Error::DimensionMismatch {
                    expected: block_dim,
                    got: t.in_dim(),
                    context: format!("composite block {i} operator"),
                });
            }
        }
        Ok(Self {
            block_dim,
            f_value: Arc::new(f_value),
            f_grad: Arc::new(f_grad),
            g_blocks,
            h_blocks,
        })
    }

    pub fn n(&self) -> usize {
        self.h_blocks.len()
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn h_blocks(&self) -> &[LmoFriendly<F>] {
        &self.h_blocks
    }

    /// Weighted product inner product `(1/n) sum_i <x_i, y_i>`.
    pub fn weighted_inner(&self, x: &DenseVector<F>, y: &DenseVector<F>) -> Result<F> {
        Ok(crate::linalg::inner(x, y)? / F::of(self.n() as f64))
    }

    /// The consensus constraint operator `Pi_{V^perp}`.
    pub fn consensus_projector(&self) -> LinearMap<F> {
        LinearMap::diagonal_complement_projector(self.n(), self.block_dim)
    }
}

/// Build the lifted composite problem over `R^{n * block_dim}` with
/// `A = Pi_{V^perp}`, `b = 0`, block-diagonal `T`, and blockwise-separable
/// `G`, `H`.
pub fn lift<F: Scalar>(spec: &ProductSpec<F>) -> Result<CompositeProblem<F>> {
    let n = spec.n();
    let d = spec.block_dim;
    let total = n * d;
    let weight = F::of(1.0 / n as f64);

    let fv = spec.f_value.clone();
    let lifted_value = move |x: &DenseVector<F>| {
        (0..n)
            .map(|i| fv(&x.segment(i * d, (i + 1) * d)))
            .fold(F::zero(), |acc, v| acc + v)
            * weight
    };
    let fg = spec.f_grad.clone();
    let lifted_grad = move |x: &DenseVector<F>| {
        let blocks: Vec<DenseVector<F>> = (0..n)
            .map(|i| fg(&x.segment(i * d, (i + 1) * d)).scale(weight))
            .collect();
        DenseVector::concat(&blocks)
    };

    let (g, t) = if spec.g_blocks.is_empty() {
        (ProxFriendly::zero(), LinearMap::identity(total))
    } else {
        let g = ProxFriendly::block_sum(
            spec.g_blocks
                .iter()
                .map(|(gi, ti)| (gi.clone(), ti.out_dim()))
                .collect(),
        );
        let t = LinearMap::block_diagonal(
            spec.g_blocks.iter().map(|(_, ti)| ti.clone()).collect(),
        )?;
        (g, t)
    };

    let h = LmoFriendly::product(spec.h_blocks.clone(), d);
    let a = spec.consensus_projector();
    CompositeProblem::new(lifted_value, lifted_grad, g, t, h, a, DenseVector::zeros(total))
}

/// Apply each block's oracle to the corresponding slice of a lifted
/// direction.
pub fn blockwise_lmo<F: Scalar>(
    spec: &ProductSpec<F>,
    z_lifted: &DenseVector<F>,
) -> Result<DenseVector<F>> {
    let d = spec.block_dim;
    if z_lifted.dim() != spec.n() * d {
        return Err(Error::DimensionMismatch {
            expected: spec.n() * d,
            got: z_lifted.dim(),
            context: "lifted oracle direction".into(),
        });
    }
    let mut out = Vec::with_capacity(spec.n());
    for (i, h) in spec.h_blocks.iter().enumerate() {
        out.push(h.lmo(&z_lifted.segment(i * d, (i + 1) * d)).map_err(|e| e.in_block(i))?);
    }
    Ok(DenseVector::concat(&out))
}
