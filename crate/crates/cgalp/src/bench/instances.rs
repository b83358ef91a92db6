//! Seeded generators for the two benchmark problem families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{DenseMatrix, DenseVector, LinearMap, MaskOperator};
use crate::oracle::LmoFriendly;
use crate::problem::CompositeProblem;
use crate::product::ProductSpec;
use crate::prox::ProxFriendly;
use crate::Result;

/// Projection of a point onto the intersection of the l1 unit ball and
/// the kernel of a rank-one 2x2 matrix:
/// `min (1/2)||x - y||^2  s.t.  ||x||_1 <= 1, Ax = 0`.
pub struct ProjectionInstance {
    pub problem: CompositeProblem<f64>,
    pub y: DenseVector<f64>,
    pub a_matrix: DenseMatrix<f64>,
    /// Unit vector spanning `ker(A)`.
    pub kernel_dir: DenseVector<f64>,
}

/// Draw a random unit vector in the plane.
fn unit2(rng: &mut ChaCha8Rng) -> DenseVector<f64> {
    loop {
        let v = DenseVector::from_f64_slice(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let n = v.norm();
        if n > 1e-3 {
            return v.scale(1.0 / n);
        }
    }
}

/// Rank-one constraint matrix from seeded unit vectors; the target `y` is
/// rejection-sampled until it lies both outside the l1 ball and off the
/// kernel line, so the projection is nontrivial.
pub fn gen_projection_instance(seed: u64) -> ProjectionInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = unit2(&mut rng);
    let v = unit2(&mut rng);
    let a_matrix = DenseMatrix::outer(&u, &v);
    // ker(A) = v rotated a quarter turn.
    let kernel_dir = DenseVector::from_f64_slice(&[-v[1], v[0]]);
    let y = loop {
        let cand =
            DenseVector::from_f64_slice(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
        if cand.norm_l1() > 1.0 && a_matrix.matvec(&cand).norm() > 1e-3 {
            break cand;
        }
    };
    let target = y.clone();
    let grad_target = y.clone();
    let problem = CompositeProblem::new(
        move |x: &DenseVector<f64>| 0.5 * x.sub(&target).norm().powi(2),
        move |x| x.sub(&grad_target),
        ProxFriendly::zero(),
        LinearMap::identity(2),
        LmoFriendly::l1_ball(1.0, 2),
        LinearMap::from_matrix(a_matrix.clone()),
        DenseVector::zeros(2),
    )
    .expect("projection instance dimensions are static");
    ProjectionInstance { problem, y, a_matrix, kernel_dir }
}

/// Masked recovery of a sparse rank-one matrix.
pub struct MatcompInstance {
    pub mask: MaskOperator,
    pub omega: LinearMap<f64>,
    pub y: DenseVector<f64>,
    pub delta_nuc: f64,
    pub delta_l1: f64,
    pub x0: DenseMatrix<f64>,
    pub n: usize,
}

/// Ground truth `X0 = y~ y~^T` where `y~` has `floor(N/5)` nonzero entries
/// uniform in `[-1, 1]`; the mask keeps `floor(density * N^2)` entries
/// sampled without replacement. Radii are half the nuclear and entrywise
/// l1 norms of `X0`.
pub fn gen_matcomp_instance(n: usize, density: f64, seed: u64) -> MatcompInstance {
    assert!(n >= 5, "need n >= 5 for a nonempty sparse factor");
    assert!(density > 0.0 && density <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Partial Fisher-Yates: the first nnz positions of a shuffled range.
    let nnz = n / 5;
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..nnz {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    let mut y_tilde = DenseVector::zeros(n);
    for &i in &idx[..nnz] {
        y_tilde[i] = rng.gen_range(-1.0..1.0);
    }
    let x0 = DenseMatrix::outer(&y_tilde, &y_tilde);
    // Rank one: nuclear norm is ||y~||^2.
    let nf: f64 = y_tilde.norm();
    let delta_nuc = nf * nf / 2.0;
    let delta_l1 = x0.entrywise_l1() / 2.0;

    let keep = ((density * (n * n) as f64).floor() as usize).min(n * n);
    let mut cells: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    for i in 0..keep {
        let j = rng.gen_range(i..cells.len());
        cells.swap(i, j);
    }
    let mask = MaskOperator::new(cells[..keep].to_vec(), (n, n))
        .expect("mask cells are in range by construction");
    let omega = mask.as_linear_map::<f64>();
    let y = omega.apply(&x0.to_flat());
    MatcompInstance { mask, omega, y, delta_nuc, delta_l1, x0, n }
}

impl MatcompInstance {
    /// Two-block product formulation: `g_i = (1/2)||. - y||_1` composed
    /// with the mask on each block, nuclear-ball oracle on block 1 and
    /// l1-ball oracle on block 2, smooth part identically zero.
    pub fn product_spec(&self) -> Result<ProductSpec<f64>> {
        let d = self.n * self.n;
        let g = ProxFriendly::shifted_l1(0.5, self.y.clone());
        let power_tol = 1e-9;
        let power_iters = 5000;
        ProductSpec::new(
            d,
            |_: &DenseVector<f64>| 0.0,
            |x| DenseVector::zeros(x.dim()),
            vec![(g.clone(), self.omega.clone()), (g, self.omega.clone())],
            vec![
                LmoFriendly::nuclear_ball(self.delta_nuc, self.n, self.n, power_tol, power_iters),
                LmoFriendly::l1_ball(self.delta_l1, d),
            ],
        )
    }

    pub fn gfb_problem(&self) -> crate::gfb::GfbProblem<f64> {
        crate::gfb::GfbProblem {
            omega: self.omega.clone(),
            y: self.y.clone(),
            delta_nuc: self.delta_nuc,
            delta_l1: self.delta_l1,
            n: self.n,
        }
    }
}
