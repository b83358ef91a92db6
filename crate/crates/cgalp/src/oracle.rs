//! Linearly perturbed minimization oracles over weakly compact domains.
//!
//! An oracle returns `argmin_{s} h(s) + <z, s>`; for the shipped instances
//! `h` is the indicator of a bounded closed convex set, so this is a linear
//! program over the set. Tie-breaking is "lowest index wins" everywhere so
//! traces are reproducible.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{power_svd_top, DenseMatrix, DenseVector};
use crate::scalar::Scalar;

type LmoFn<F> = Arc<dyn Fn(&DenseVector<F>) -> Result<DenseVector<F>> + Send + Sync>;
type MembershipFn<F> = Arc<dyn Fn(&DenseVector<F>, F) -> bool + Send + Sync>;
type HValueFn<F> = Arc<dyn Fn(&DenseVector<F>) -> F + Send + Sync>;

/// A nonsmooth term accessed through a linearly perturbed minimization
/// oracle, together with the data the solver needs about its domain.
#[derive(Clone)]
pub struct LmoFriendly<F: Scalar> {
    lmo: LmoFn<F>,
    membership: MembershipFn<F>,
    /// `h` itself, evaluated on the domain (zero for indicator oracles).
    h_value: HValueFn<F>,
    diameter_bound: F,
    a_feasible_point: DenseVector<F>,
}

impl<F: Scalar> LmoFriendly<F> {
    pub fn new(
        lmo: impl Fn(&DenseVector<F>) -> Result<DenseVector<F>> + Send + Sync + 'static,
        membership: impl Fn(&DenseVector<F>, F) -> bool + Send + Sync + 'static,
        diameter_bound: F,
        a_feasible_point: DenseVector<F>,
    ) -> Self {
        Self {
            lmo: Arc::new(lmo),
            membership: Arc::new(membership),
            h_value: Arc::new(|_| F::zero()),
            diameter_bound,
            a_feasible_point,
        }
    }

    pub fn with_h_value(
        mut self,
        h: impl Fn(&DenseVector<F>) -> F + Send + Sync + 'static,
    ) -> Self {
        self.h_value = Arc::new(h);
        self
    }

    pub fn lmo(&self, z: &DenseVector<F>) -> Result<DenseVector<F>> {
        (self.lmo)(z)
    }

    pub fn membership(&self, x: &DenseVector<F>, tol: F) -> bool {
        (self.membership)(x, tol)
    }

    /// Value of `h` at a point of its domain (0 for indicators).
    pub fn h_value(&self, x: &DenseVector<F>) -> F {
        (self.h_value)(x)
    }

    pub fn diameter_bound(&self) -> F {
        self.diameter_bound
    }

    pub fn a_feasible_point(&self) -> &DenseVector<F> {
        &self.a_feasible_point
    }

    /// Indicator oracle for the l1 ball of radius `delta`.
    pub fn l1_ball(delta: F, dim: usize) -> Self {
        assert!(delta > F::zero());
        Self::new(
            move |z| Ok(lmo_l1_ball(delta, z)),
            move |x, tol| x.norm_l1() <= delta + tol,
            F::of(2.0) * delta,
            DenseVector::zeros(dim),
        )
    }

    /// Indicator oracle for the nuclear-norm ball of radius `delta` over
    /// flattened `rows x cols` matrices. `tol`/`max_iters` configure the
    /// power iteration used by the oracle.
    pub fn nuclear_ball(delta: F, rows: usize, cols: usize, tol: F, max_iters: usize) -> Self {
        assert!(delta > F::zero());
        Self::new(
            move |z| {
                let zm = DenseMatrix::from_flat(rows, cols, z)?;
                Ok(lmo_nuclear_ball(delta, &zm, tol, max_iters)?.to_flat())
            },
            move |x, tol| {
                let xm = match DenseMatrix::from_flat(rows, cols, x) {
                    Ok(m) => m,
                    Err(_) => return false,
                };
                match crate::linalg::jacobi_svd(&xm) {
                    Ok(svd) => svd.nuclear_norm() <= delta + tol,
                    Err(_) => false,
                }
            },
            F::of(2.0) * delta,
            DenseVector::zeros(rows * cols),
        )
    }

    /// Indicator oracle for the box `[lo, hi]` (componentwise).
    pub fn box_set(lo: DenseVector<F>, hi: DenseVector<F>) -> Self {
        assert_eq!(lo.dim(), hi.dim());
        assert!(lo.iter().zip(hi.iter()).all(|(&a, &b)| a <= b));
        let diameter = hi.sub(&lo).norm();
        let feasible = lo.clone();
        let (lo_m, hi_m) = (lo.clone(), hi.clone());
        Self::new(
            move |z| Ok(lmo_box(&lo, &hi, z)),
            move |x, tol| {
                x.iter()
                    .zip(lo_m.iter().zip(hi_m.iter()))
                    .all(|(&e, (&a, &b))| e >= a - tol && e <= b + tol)
            },
            diameter,
            feasible,
        )
    }

    /// Product oracle over equal-dimension blocks; the LMO, membership and
    /// feasible point act blockwise. The diameter uses the `1/n`-weighted
    /// product norm.
    pub fn product(blocks: Vec<LmoFriendly<F>>, block_dim: usize) -> Self {
        assert!(!blocks.is_empty());
        let n = blocks.len();
        let nf = F::of(n as f64);
        let diameter = (blocks
            .iter()
            .map(|b| b.diameter_bound * b.diameter_bound)
            .fold(F::zero(), |acc, v| acc + v)
            / nf)
            .sqrt();
        let feasible = DenseVector::concat(
            &blocks.iter().map(|b| b.a_feasible_point.clone()).collect::<Vec<_>>(),
        );
        let lmo_blocks = blocks.clone();
        let mem_blocks = blocks.clone();
        let h_blocks = blocks;
        Self::new(
            move |z| {
                let mut out = Vec::with_capacity(n);
                for (i, b) in lmo_blocks.iter().enumerate() {
                    let zi = z.segment(i * block_dim, (i + 1) * block_dim);
                    out.push(b.lmo(&zi).map_err(|e| e.in_block(i))?);
                }
                Ok(DenseVector::concat(&out))
            },
            move |x, tol| {
                mem_blocks.iter().enumerate().all(|(i, b)| {
                    b.membership(&x.segment(i * block_dim, (i + 1) * block_dim), tol)
                })
            },
            diameter,
            feasible,
        )
        .with_h_value(move |x| {
            h_blocks
                .iter()
                .enumerate()
                .map(|(i, b)| b.h_value(&x.segment(i * block_dim, (i + 1) * block_dim)))
                .fold(F::zero(), |acc, v| acc + v)
        })
    }
}

/// Vertex argmin of `<z, s>` over the l1 ball: `-delta sign(z_i*) e_{i*}`
/// where `i*` maximizes `|z_i|` (lowest index on ties). For `z = 0` the
/// deterministic choice is `+delta e_0`.
pub fn lmo_l1_ball<F: Scalar>(delta: F, z: &DenseVector<F>) -> DenseVector<F> {
    assert!(delta > F::zero());
    let mut best = 0usize;
    let mut best_abs = F::zero();
    for (i, &zi) in z.iter().enumerate() {
        if zi.abs() > best_abs {
            best_abs = zi.abs();
            best = i;
        }
    }
    let mut out = DenseVector::zeros(z.dim());
    if best_abs == F::zero() {
        out[0] = delta;
    } else {
        out[best] = if z[best] > F::zero() { -delta } else { delta };
    }
    out
}

/// Rank-one argmin of `<Z, S>` over the nuclear-norm ball:
/// `-delta u v^T` for the leading singular triple of `Z`.
/// `Z = 0` returns the zero matrix (any feasible point is optimal).
pub fn lmo_nuclear_ball<F: Scalar>(
    delta: F,
    z: &DenseMatrix<F>,
    tol: F,
    max_iters: usize,
) -> Result<DenseMatrix<F>> {
    assert!(delta > F::zero());
    if z.frobenius_norm() == F::zero() {
        return Ok(DenseMatrix::zeros(z.rows(), z.cols()));
    }
    let top = power_svd_top(z, tol, max_iters).map_err(Error::from)?;
    Ok(DenseMatrix::outer(&top.u, &top.v).scale(-delta))
}

/// Bang-bang argmin of `<z, s>` over a box: `lo_i` when `z_i > 0`, else
/// `hi_i` (ties go to `lo_i`).
pub fn lmo_box<F: Scalar>(
    lo: &DenseVector<F>,
    hi: &DenseVector<F>,
    z: &DenseVector<F>,
) -> DenseVector<F> {
    DenseVector::from_vec_unchecked(
        z.iter()
            .zip(lo.iter().zip(hi.iter()))
            .map(|(&zi, (&a, &b))| if zi > F::zero() { a } else { b })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_vec(dim: usize, rng: &mut ChaCha8Rng) -> DenseVector<f64> {
        DenseVector::from_f64_slice(
            &(0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn l1_lmo_picks_opposing_vertex() {
        let s = lmo_l1_ball(1.0, &DenseVector::from_f64_slice(&[3.0, -1.0]));
        assert_eq!(s.as_slice(), &[-1.0, 0.0]);
        let s = lmo_l1_ball(2.0, &DenseVector::from_f64_slice(&[0.0, -5.0]));
        assert_eq!(s.as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn l1_lmo_zero_input_tie_break() {
        let s = lmo_l1_ball(1.5, &DenseVector::from_f64_slice(&[0.0, 0.0, 0.0]));
        assert_eq!(s.as_slice(), &[1.5, 0.0, 0.0]);
    }

    #[test]
    fn l1_lmo_matches_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let z = rand_vec(6, &mut rng);
            let s = lmo_l1_ball(1.0, &z);
            let best = (0..6)
                .flat_map(|i| [(i, 1.0f64), (i, -1.0)])
                .map(|(i, sgn)| {
                    let mut v = DenseVector::<f64>::zeros(6);
                    v[i] = sgn;
                    inner(&z, &v).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((inner(&z, &s).unwrap() - best).abs() < 1e-12);
        }
    }

    #[test]
    fn nuclear_lmo_diagonal_and_rank_one() {
        let z = DenseMatrix::<f64>::diagonal(&[2.0, 1.0]);
        let s = lmo_nuclear_ball(1.0, &z, 1e-12, 10_000).unwrap();
        let expected = DenseMatrix::from_f64_rows(&[&[-1.0, 0.0], &[0.0, 0.0]]);
        assert!(s.sub(&expected).frobenius_norm() < 1e-8);

        let a = DenseVector::from_f64_slice(&[0.6, 0.8]);
        let b = DenseVector::from_f64_slice(&[1.0, 0.0]);
        let z = DenseMatrix::outer(&a, &b);
        let s = lmo_nuclear_ball(3.0, &z, 1e-12, 10_000).unwrap();
        let expected = DenseMatrix::outer(&a, &b).scale(-3.0);
        assert!(s.sub(&expected).frobenius_norm() < 1e-7);
    }

    #[test]
    fn nuclear_lmo_zero_matrix() {
        let z = DenseMatrix::<f64>::zeros(3, 3);
        let s = lmo_nuclear_ball(1.0, &z, 1e-9, 100).unwrap();
        assert_eq!(s.frobenius_norm(), 0.0);
    }

    #[test]
    fn nuclear_lmo_matches_full_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let z = DenseMatrix::from_flat(6, 6, &rand_vec(36, &mut rng)).unwrap();
            let s = lmo_nuclear_ball(1.0, &z, 1e-10, 100_000).unwrap();
            let na = nalgebra::DMatrix::from_fn(6, 6, |i, j| z.get(i, j));
            let sigma_max = na.svd(false, false).singular_values.max();
            let ip = inner(&z.to_flat(), &s.to_flat()).unwrap();
            assert!((ip + sigma_max).abs() < 1e-6, "{ip} vs {}", -sigma_max);
        }
    }

    #[test]
    fn box_lmo_bang_bang() {
        let lo = DenseVector::<f64>::from_f64_slice(&[0.0, 0.0]);
        let hi = DenseVector::from_f64_slice(&[1.0, 1.0]);
        let s = lmo_box(&lo, &hi, &DenseVector::from_f64_slice(&[1.0, -1.0]));
        assert_eq!(s.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn box_lmo_singleton_domain() {
        let lo = DenseVector::<f64>::from_f64_slice(&[0.3, -0.7]);
        let s = lmo_box(&lo, &lo, &DenseVector::from_f64_slice(&[5.0, -2.0]));
        assert_eq!(s.as_slice(), lo.as_slice());
    }

    #[test]
    fn box_lmo_matches_corner_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let lo = DenseVector::from_f64_slice(
                &(0..4).map(|_| rng.gen_range(-2.0..0.0)).collect::<Vec<_>>(),
            );
            let hi = DenseVector::from_f64_slice(
                &(0..4).map(|_| rng.gen_range(0.0..2.0)).collect::<Vec<_>>(),
            );
            let z = rand_vec(4, &mut rng);
            let s = lmo_box(&lo, &hi, &z);
            let mut best = f64::INFINITY;
            for mask in 0..16u32 {
                let corner = DenseVector::from_vec_unchecked(
                    (0..4)
                        .map(|i| if mask & (1 << i) != 0 { hi[i] } else { lo[i] })
                        .collect(),
                );
                best = best.min(inner(&z, &corner).unwrap());
            }
            assert!((inner(&z, &s).unwrap() - best).abs() < 1e-12);
        }
    }

    #[test]
    fn lmo_outputs_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l1 = LmoFriendly::<f64>::l1_ball(1.3, 5);
        let nuc = LmoFriendly::<f64>::nuclear_ball(2.0, 3, 3, 1e-9, 50_000);
        let boxy = LmoFriendly::box_set(
            DenseVector::from_f64_slice(&[-1.0, 0.0]),
            DenseVector::from_f64_slice(&[0.5, 2.0]),
        );
        for _ in 0..1000 {
            let z5 = rand_vec(5, &mut rng);
            assert!(l1.membership(&l1.lmo(&z5).unwrap(), 1e-9));
            let z2 = rand_vec(2, &mut rng);
            assert!(boxy.membership(&boxy.lmo(&z2).unwrap(), 1e-9));
        }
        for _ in 0..50 {
            let z9 = rand_vec(9, &mut rng);
            assert!(nuc.membership(&nuc.lmo(&z9).unwrap(), 1e-9));
        }
    }

    // Brute-force linear optimality over random feasible points, dims <= 8.
    #[test]
    fn lmo_linear_optimality_vs_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l1 = LmoFriendly::<f64>::l1_ball(1.0, 8);
        for _ in 0..20 {
            let z = rand_vec(8, &mut rng);
            let s = l1.lmo(&z).unwrap();
            let obj = inner(&z, &s).unwrap();
            for _ in 0..1000 {
                let cand = crate::prox::project_l1_ball(1.0, &rand_vec(8, &mut rng));
                assert!(obj <= inner(&z, &cand).unwrap() + 1e-9);
            }
        }
    }

    #[test]
    fn lmo_scaling_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let lo = DenseVector::from_f64_slice(&[-1.0, -1.0, 0.0]);
        let hi = DenseVector::from_f64_slice(&[1.0, 2.0, 3.0]);
        for _ in 0..100 {
            let z = rand_vec(3, &mut rng);
            let c = rng.gen_range(0.01..100.0);
            let zc = z.scale(c);
            assert_eq!(lmo_l1_ball(1.0, &z).as_slice(), lmo_l1_ball(1.0, &zc).as_slice());
            assert_eq!(lmo_box(&lo, &hi, &z).as_slice(), lmo_box(&lo, &hi, &zc).as_slice());
        }
    }

    #[test]
    fn product_oracle_acts_blockwise() {
        let l1 = LmoFriendly::<f64>::l1_ball(1.0, 2);
        let prod = LmoFriendly::product(vec![l1.clone(), l1.clone()], 2);
        let z = DenseVector::from_f64_slice(&[3.0, -1.0, 3.0, -1.0]);
        let s = prod.lmo(&z).unwrap();
        assert_eq!(s.segment(0, 2).as_slice(), s.segment(2, 4).as_slice());
        assert_eq!(s.as_slice(), &[-1.0, 0.0, -1.0, 0.0]);
        assert!(prod.membership(&s, 1e-9));
    }
}
