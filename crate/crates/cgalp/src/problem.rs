//! Problem definition: `min f(x) + g(Tx) + h(x)  s.t.  Ax = b`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{DenseVector, LinearMap};
use crate::oracle::LmoFriendly;
use crate::prox::ProxFriendly;
use crate::scalar::Scalar;

type ValueFn<F> = Arc<dyn Fn(&DenseVector<F>) -> F + Send + Sync>;
type GradFn<F> = Arc<dyn Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync>;

/// An affinely constrained composite problem. `h`'s domain is the weakly
/// compact set the conditional-gradient oracle ranges over; `g` is accessed
/// through its prox, `f` through its gradient.
#[derive(Clone)]
pub struct CompositeProblem<F: Scalar> {
    f_value: ValueFn<F>,
    f_grad: GradFn<F>,
    pub g: ProxFriendly<F>,
    pub t: LinearMap<F>,
    pub h: LmoFriendly<F>,
    pub a: LinearMap<F>,
    pub b: DenseVector<F>,
}

impl<F: Scalar> CompositeProblem<F> {
    pub fn new(
        f_value: impl Fn(&DenseVector<F>) -> F + Send + Sync + 'static,
        f_grad: impl Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync + 'static,
        g: ProxFriendly<F>,
        t: LinearMap<F>,
        h: LmoFriendly<F>,
        a: LinearMap<F>,
        b: DenseVector<F>,
    ) -> Result<Self> {
        if b.dim() != a.out_dim() {
            return Err(Error::DimensionMismatch {
                expected: a.out_dim(),
                got: b.dim(),
                context: "constraint right-hand side".into(),
            });
        }
        if t.in_dim() != a.in_dim() || h.a_feasible_point().dim() != a.in_dim() {
            return Err(Error::DimensionMismatch {
                expected: a.in_dim(),
                got: t.in_dim().min(h.a_feasible_point().dim()),
                context: "primal dimension across f, g∘T, h, A".into(),
            });
        }
        Ok(Self { f_value: Arc::new(f_value), f_grad: Arc::new(f_grad), g, t, h, a, b })
    }

    /// Primal dimension.
    pub fn dim(&self) -> usize {
        self.a.in_dim()
    }

    pub fn f_value(&self, x: &DenseVector<F>) -> F {
        (self.f_value)(x)
    }

    pub fn f_grad(&self, x: &DenseVector<F>) -> DenseVector<F> {
        (self.f_grad)(x)
    }

    /// Constraint residual `Ax - b`.
    pub fn residual(&self, x: &DenseVector<F>) -> DenseVector<F> {
        self.a.apply(x).sub(&self.b)
    }
}
