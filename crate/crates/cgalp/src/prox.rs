//! Proximal operators, Moreau envelopes and their gradients, and the ball
//! projections used by the smoothing step and by the forward-backward
//! baseline.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, DenseMatrix, DenseVector};
use crate::scalar::Scalar;

type ValueFn<F> = Arc<dyn Fn(&DenseVector<F>) -> F + Send + Sync>;
type ProxFn<F> = Arc<dyn Fn(F, &DenseVector<F>) -> DenseVector<F> + Send + Sync>;
type SubgradFn<F> = Arc<dyn Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync>;

/// A convex function with a cheaply computable proximal mapping.
///
/// `min_norm_subgrad` is the minimal-norm element of the subdifferential,
/// shipped for the functions used by the experiments and optional elsewhere.
#[derive(Clone)]
pub struct ProxFriendly<F: Scalar> {
    value: ValueFn<F>,
    prox: ProxFn<F>,
    min_norm_subgrad: Option<SubgradFn<F>>,
}

impl<F: Scalar> ProxFriendly<F> {
    pub fn new(
        value: impl Fn(&DenseVector<F>) -> F + Send + Sync + 'static,
        prox: impl Fn(F, &DenseVector<F>) -> DenseVector<F> + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            prox: Arc::new(prox),
            min_norm_subgrad: None,
        }
    }

    pub fn with_min_norm_subgrad(
        mut self,
        subgrad: impl Fn(&DenseVector<F>) -> DenseVector<F> + Send + Sync + 'static,
    ) -> Self {
        self.min_norm_subgrad = Some(Arc::new(subgrad));
        self
    }

    pub fn value(&self, x: &DenseVector<F>) -> F {
        (self.value)(x)
    }

    pub fn prox(&self, beta: F, x: &DenseVector<F>) -> DenseVector<F> {
        debug_assert!(beta > F::zero());
        (self.prox)(beta, x)
    }

    pub fn min_norm_subgrad(&self, x: &DenseVector<F>) -> Option<DenseVector<F>> {
        self.min_norm_subgrad.as_ref().map(|f| f(x))
    }

    /// The zero function: prox is the identity.
    pub fn zero() -> Self {
        Self::new(|_| F::zero(), |_, x| x.clone())
            .with_min_norm_subgrad(|x| DenseVector::zeros(x.dim()))
    }

    /// `g(v) = weight * ||v||_1`. The minimal-norm subgradient is the sign
    /// pattern with zeros on zero entries.
    pub fn l1(weight: F) -> Self {
        Self::scaled_shifted_l1(weight, None)
    }

    /// `g(v) = weight * ||v - shift||_1`, the data-fidelity term of the
    /// matrix completion experiment (`weight = 1/2`, `shift = y`).
    pub fn shifted_l1(weight: F, shift: DenseVector<F>) -> Self {
        Self::scaled_shifted_l1(weight, Some(shift))
    }

    fn scaled_shifted_l1(weight: F, shift: Option<DenseVector<F>>) -> Self {
        assert!(weight > F::zero());
        let shift_v = shift.clone();
        let shift_p = shift.clone();
        let shift_s = shift;
        Self::new(
            move |v| match &shift_v {
                Some(s) => v.sub(s).norm_l1() * weight,
                None => v.norm_l1() * weight,
            },
            move |beta, v| {
                let level = beta * weight;
                match &shift_p {
                    Some(s) => s.add(&soft_threshold(&v.sub(s), level)),
                    None => soft_threshold(v, level),
                }
            },
        )
        .with_min_norm_subgrad(move |v| {
            let centered = match &shift_s {
                Some(s) => v.sub(s),
                None => v.clone(),
            };
            DenseVector::from_vec_unchecked(
                centered.iter().map(|&e| weight * sign0(e)).collect(),
            )
        })
    }

    /// Indicator of the interval box `[lo, hi]^dim`; prox is the clamp.
    pub fn interval_indicator(lo: F, hi: F) -> Self {
        assert!(lo <= hi);
        Self::new(
            move |v| {
                if v.iter().all(|&e| e >= lo && e <= hi) {
                    F::zero()
                } else {
                    F::infinity()
                }
            },
            move |_, v| {
                DenseVector::from_vec_unchecked(v.iter().map(|&e| e.max(lo).min(hi)).collect())
            },
        )
    }

    /// Blockwise sum `g(v) = sum_i g_i(v_i)` over equal-structure blocks.
    pub fn block_sum(blocks: Vec<(ProxFriendly<F>, usize)>) -> Self {
        let value_blocks = blocks.clone();
        let prox_blocks = blocks;
        Self::new(
            move |v| {
                let mut lo = 0;
                let mut total = F::zero();
                for (g, d) in &value_blocks {
                    total = total + g.value(&v.segment(lo, lo + d));
                    lo += d;
                }
                total
            },
            move |beta, v| {
                let mut lo = 0;
                let mut out = Vec::with_capacity(prox_blocks.len());
                for (g, d) in &prox_blocks {
                    out.push(g.prox(beta, &v.segment(lo, lo + d)));
                    lo += d;
                }
                DenseVector::concat(&out)
            },
        )
    }
}

fn sign0<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else if x < F::zero() {
        -F::one()
    } else {
        F::zero()
    }
}

fn soft_threshold<F: Scalar>(x: &DenseVector<F>, level: F) -> DenseVector<F> {
    DenseVector::from_vec_unchecked(
        x.iter()
            .map(|&e| sign0(e) * (e.abs() - level).max(F::zero()))
            .collect(),
    )
}

/// Componentwise soft threshold at level `beta`: the prox of `beta * ||.||_1`.
pub fn prox_l1<F: Scalar>(beta: F, x: &DenseVector<F>) -> DenseVector<F> {
    assert!(beta > F::zero());
    soft_threshold(x, beta)
}

/// Moreau envelope value `g(p) + ||x - p||^2 / (2 beta)` at `p = prox(beta, x)`.
pub fn moreau_value<F: Scalar>(g: &ProxFriendly<F>, beta: F, x: &DenseVector<F>) -> Result<F> {
    assert!(beta > F::zero());
    let p = g.prox(beta, x);
    let gp = g.value(&p);
    if !gp.is_finite() {
        return Err(Error::InvalidInput(
            "prox landed outside dom g; prox and value are inconsistent".into(),
        ));
    }
    let d = x.sub(&p).norm();
    Ok(gp + d * d / (F::of(2.0) * beta))
}

/// Envelope gradient `(x - prox(beta, x)) / beta`; `1/beta`-Lipschitz.
pub fn moreau_grad<F: Scalar>(g: &ProxFriendly<F>, beta: F, x: &DenseVector<F>) -> DenseVector<F> {
    assert!(beta > F::zero());
    x.sub(&g.prox(beta, x)).scale(F::one() / beta)
}

/// Euclidean projection onto the l1 ball of radius `delta`, by the
/// sort-and-threshold reduction to simplex projection.
pub fn project_l1_ball<F: Scalar>(delta: F, x: &DenseVector<F>) -> DenseVector<F> {
    assert!(delta > F::zero());
    if x.norm_l1() <= delta {
        return x.clone();
    }
    let mut abs: Vec<F> = x.iter().map(|&e| e.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumsum = F::zero();
    let mut theta = F::zero();
    for (j, &a) in abs.iter().enumerate() {
        cumsum = cumsum + a;
        let jf = F::of((j + 1) as f64);
        let t = (cumsum - delta) / jf;
        if a - t > F::zero() {
            theta = t;
        } else {
            break;
        }
    }
    soft_threshold(x, theta)
}

/// Euclidean projection onto the nuclear-norm ball of radius `delta`:
/// full SVD, then l1-ball projection of the singular values.
pub fn project_nuclear_ball<F: Scalar>(delta: F, x: &DenseMatrix<F>) -> Result<DenseMatrix<F>> {
    assert!(delta > F::zero());
    let svd = jacobi_svd(x)?;
    if svd.nuclear_norm() <= delta {
        return Ok(x.clone());
    }
    let projected = project_l1_ball(delta, &DenseVector::from_vec_unchecked(svd.sigma.clone()));
    Ok(svd.reconstruct_with(projected.as_slice()))
}
