//! Generalized forward-backward baseline for the masked matrix recovery
//! comparison. With no smooth part the scheme is Douglas-Rachford on
//!
//! `min ||Omega W1 - y||_1 + i_{nuclear ball}(W2) + i_{l1 ball}(W3)`
//! over the consensus set `W1 = W2 = W3`, with step sizes fixed at 1:
//!
//! ```text
//! U_{k+1} = ( R1 + Omega*(y - Omega R1 + soft(Omega R1 - y, 1)),
//!             P_nuc(R2), P_l1(R3) )          where  Ri = 2 Wi - Zi
//! Z_{k+1} = Z_k + U_{k+1} - W_k
//! W_{k+1} = blockwise mean of Z_{k+1}
//! ```
//!
//! The convergence criterion is the Bregman divergence of the separable
//! objective at the reference subgradient `v* = (W* - Z*) / gamma`.

use crate::error::Result;
use crate::linalg::{inner, jacobi_svd, DenseMatrix, DenseVector, LinearMap};
use crate::prox::{project_l1_ball, project_nuclear_ball, prox_l1};
use crate::scalar::Scalar;

/// Feasibility slack when evaluating the indicator blocks of `Q` on
/// averaged iterates.
const FEAS_TOL: f64 = 1e-9;

/// Data of the masked recovery instance: `omega` maps flattened `n x n`
/// matrices to the `p` observed entries.
#[derive(Clone)]
pub struct GfbProblem<F: Scalar> {
    pub omega: LinearMap<F>,
    pub y: DenseVector<F>,
    pub delta_nuc: F,
    pub delta_l1: F,
    pub n: usize,
}

impl<F: Scalar> GfbProblem<F> {
    /// `||Omega x - y||_1` for a flattened matrix `x`.
    pub fn data_fit(&self, x: &DenseVector<F>) -> F {
        self.omega.apply(x).sub(&self.y).norm_l1()
    }

    pub fn nuclear_feasible(&self, x: &DenseVector<F>, tol: F) -> Result<bool> {
        let m = DenseMatrix::from_flat(self.n, self.n, x)?;
        Ok(jacobi_svd(&m)?.nuclear_norm() <= self.delta_nuc + tol)
    }

    pub fn l1_feasible(&self, x: &DenseVector<F>, tol: F) -> bool {
        x.norm_l1() <= self.delta_l1 + tol
    }
}

/// Three-block splitting state. `u_sum` accumulates the `U_i` so the
/// ergodic average is available at any point.
#[derive(Debug, Clone)]
pub struct GfbState<F: Scalar> {
    pub k: usize,
    pub z: [DenseVector<F>; 3],
    pub w: [DenseVector<F>; 3],
    pub u: [DenseVector<F>; 3],
    u_sum: [DenseVector<F>; 3],
}

impl<F: Scalar> GfbState<F> {
    /// All blocks start at zero, which lies on the consensus subspace.
    pub fn init(n: usize) -> Self {
        let zero = || {
            [
                DenseVector::zeros(n * n),
                DenseVector::zeros(n * n),
                DenseVector::zeros(n * n),
            ]
        };
        Self { k: 0, z: zero(), w: zero(), u: zero(), u_sum: zero() }
    }

    /// `U_erg = sum_{i<=k} U_i / (k+1)`.
    pub fn u_ergodic(&self) -> [DenseVector<F>; 3] {
        let scale = F::one() / F::of((self.k + 1) as f64);
        [
            self.u_sum[0].scale(scale),
            self.u_sum[1].scale(scale),
            self.u_sum[2].scale(scale),
        ]
    }
}

/// One Douglas-Rachford step with unit step sizes.
pub fn gfb_step<F: Scalar>(p: &GfbProblem<F>, st: GfbState<F>) -> Result<GfbState<F>> {
    let r: Vec<DenseVector<F>> = (0..3)
        .map(|i| st.w[i].scale(F::of(2.0)).sub(&st.z[i]))
        .collect();

    let omega_r = p.omega.apply(&r[0]).sub(&p.y);
    let u1 = r[0].add(&p.omega.apply_adjoint(&prox_l1(F::one(), &omega_r).sub(&omega_r)));
    let u2 = project_nuclear_ball(p.delta_nuc, &DenseMatrix::from_flat(p.n, p.n, &r[1])?)?
        .to_flat();
    let u3 = project_l1_ball(p.delta_l1, &r[2]);
    let u = [u1, u2, u3];

    let z: [DenseVector<F>; 3] = [
        st.z[0].add(&u[0]).sub(&st.w[0]),
        st.z[1].add(&u[1]).sub(&st.w[1]),
        st.z[2].add(&u[2]).sub(&st.w[2]),
    ];
    let third = F::of(1.0 / 3.0);
    let mean = z[0].add(&z[1]).add(&z[2]).scale(third);
    let w = [mean.clone(), mean.clone(), mean];

    let u_sum = [
        st.u_sum[0].add(&u[0]),
        st.u_sum[1].add(&u[1]),
        st.u_sum[2].add(&u[2]),
    ];
    Ok(GfbState { k: st.k + 1, z, w, u, u_sum })
}

/// Bregman divergence `Q(U_erg) - Q(W*) - <v*, U_erg - W*>` with
/// `v* = (W* - Z*)/gamma`. The indicator blocks are evaluated with a
/// small feasibility slack on `U_erg` (averages of projected points are
/// feasible up to rounding) and treated as zero at the reference `W*`,
/// whose limit is feasible by construction. Returns `+inf` when `U_erg`
/// is infeasible beyond the slack.
pub fn gfb_bregman_criterion<F: Scalar>(
    p: &GfbProblem<F>,
    u_erg: &[DenseVector<F>; 3],
    w_star: &[DenseVector<F>; 3],
    z_star: &[DenseVector<F>; 3],
    gamma: F,
) -> Result<F> {
    let tol = F::of(FEAS_TOL);
    if !p.nuclear_feasible(&u_erg[1], tol)? || !p.l1_feasible(&u_erg[2], tol) {
        return Ok(F::infinity());
    }
    let q_u = p.data_fit(&u_erg[0]);
    let q_star = p.data_fit(&w_star[0]);
    let mut cross = F::zero();
    for i in 0..3 {
        let v_star = w_star[i].sub(&z_star[i]).scale(F::one() / gamma);
        cross = cross + inner(&v_star, &u_erg[i].sub(&w_star[i]))?;
    }
    Ok(q_u - q_star - cross)
}
