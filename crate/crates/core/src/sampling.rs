//! Seeded random instances for the verification suites.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::birman_schwinger::OperatorPair;
use crate::measure::{L2Space, Operator, SelfAdjointOperator, VectorFunction, WeightedSpace};
use crate::perturbation::{DominatedPair, MatrixPotential};

/// Smallest nonzero eigenvalue of planted operators.
pub const PLANTED_GAP: f64 = 0.1;

pub fn random_weighted_space<R: Rng>(rng: &mut R, points: usize) -> Arc<WeightedSpace> {
    let weights = (0..points).map(|_| rng.gen_range(0.2..3.0)).collect();
    Arc::new(WeightedSpace::new(weights).expect("weights are positive"))
}

/// A space with `1..=max_points` points and fiber `1..=max_fiber`.
pub fn random_l2<R: Rng>(rng: &mut R, max_points: usize, max_fiber: usize) -> L2Space {
    let points = rng.gen_range(1..=max_points);
    let fiber = rng.gen_range(1..=max_fiber);
    L2Space::new(random_weighted_space(rng, points), fiber).expect("fiber >= 1")
}

/// Orthogonal `Q` from the QR factorization of a matrix with uniform entries.
pub fn random_orthogonal<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    a.qr().q()
}

pub fn random_operator_on<R: Rng>(rng: &mut R, space: &L2Space) -> Operator {
    let d = space.dim();
    Operator::new(space.clone(), DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0)))
        .expect("square of the right size")
}

/// Dense operator with independent uniform entries (generically non-normal).
pub fn random_operator<R: Rng>(rng: &mut R, max_points: usize, max_fiber: usize) -> Operator {
    let space = random_l2(rng, max_points, max_fiber);
    random_operator_on(rng, &space)
}

/// `H = Q Λ Qᵀ` in the weighted metric with exactly `kernel_dim` zero
/// eigenvalues and the rest uniform in `[PLANTED_GAP, top]`.
pub fn planted_self_adjoint<R: Rng>(
    rng: &mut R,
    space: &L2Space,
    kernel_dim: usize,
    top: f64,
) -> SelfAdjointOperator {
    let d = space.dim();
    let kernel_dim = kernel_dim.min(d);
    let eigenvalues = (0..d)
        .map(|k| if k < kernel_dim { 0.0 } else { rng.gen_range(PLANTED_GAP..top) })
        .collect();
    let frame = random_orthogonal(rng, d);
    SelfAdjointOperator::from_spectrum(space.clone(), eigenvalues, frame).expect("dimensions match")
}

/// Pointwise `V(x) = U(x) diag(λ) U(x)ᵀ` with `λ` uniform in `[lo, hi]`.
pub fn random_potential<R: Rng>(rng: &mut R, space: &L2Space, lo: f64, hi: f64) -> MatrixPotential {
    let n = space.fiber();
    let values = (0..space.points())
        .map(|_| {
            let u = random_orthogonal(rng, n);
            let l = DVector::from_fn(n, |_, _| if hi > lo { rng.gen_range(lo..hi) } else { lo });
            let m = &u * DMatrix::from_diagonal(&l) * u.transpose();
            (&m + m.transpose()) * 0.5
        })
        .collect();
    let v = MatrixPotential::new(space.clone(), values).expect("symmetric blocks");
    if lo >= 0.0 {
        v.verify_nonneg().expect("eigenvalues are nonnegative")
    } else {
        v
    }
}

/// Symmetric, generally indefinite potential with entries in `[-scale, scale]`.
pub fn random_symmetric_potential<R: Rng>(rng: &mut R, space: &L2Space, scale: f64) -> MatrixPotential {
    let n = space.fiber();
    let values = (0..space.points())
        .map(|_| {
            let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
            (&b + b.transpose()) * 0.5
        })
        .collect();
    MatrixPotential::new(space.clone(), values).expect("symmetric blocks")
}

/// `H` with a planted kernel of dimension `0..=4` and `H' = H + V` with
/// `V(x) ≥ ρ₀` pointwise, so that `H' ≥ ρ₀`.
pub fn planted_pair<R: Rng>(rng: &mut R, max_points: usize, max_fiber: usize) -> OperatorPair {
    let space = random_l2(rng, max_points, max_fiber);
    let kernel_dim = rng.gen_range(0..=4usize.min(space.dim()));
    let h = planted_self_adjoint(rng, &space, kernel_dim, 10.0);
    let rho0 = rng.gen_range(0.2..2.0);
    let v = random_potential(rng, &space, rho0, rho0 + 3.0);
    let h_prime = SelfAdjointOperator::new(
        h.as_operator()
            .add(&v.multiplication_operator())
            .expect("same space"),
    )
    .expect("sum of self-adjoint operators");
    let t0 = rng.gen_range(0.5..2.0);
    OperatorPair::new(h, h_prime, rho0, t0).expect("H ≥ 0 and H' ≥ ρ₀ by construction")
}

/// Discrete connection Laplacian on a random connected weighted graph and the
/// scalar graph Laplacian with the same edge weights (unverified pair).
///
/// `(Hf)(x) = m(x)^{-1} Σ_y w_{xy} (f(x) - R_{xy} f(y))` with orthogonal
/// `R_{yx} = R_{xy}ᵀ`.
pub fn connection_laplacian<R: Rng>(rng: &mut R, max_points: usize, fiber: usize) -> DominatedPair {
    let points = rng.gen_range(2..=max_points.max(2));
    let base = random_weighted_space(rng, points);
    let mut edges: Vec<(usize, usize)> = (1..points).map(|y| (rng.gen_range(0..y), y)).collect();
    let extra = rng.gen_range(0..=points);
    for _ in 0..extra {
        let (x, y) = (rng.gen_range(0..points), rng.gen_range(0..points));
        if x != y && !edges.iter().any(|&(a, b)| (a, b) == (x, y) || (a, b) == (y, x)) {
            edges.push((x, y));
        }
    }
    let n = fiber;
    let mut l = DMatrix::zeros(points * n, points * n);
    let mut l0 = DMatrix::zeros(points, points);
    for &(x, y) in &edges {
        let w = rng.gen_range(0.2..2.0);
        let r = random_orthogonal(rng, n);
        for i in 0..n {
            l[(x * n + i, x * n + i)] += w;
            l[(y * n + i, y * n + i)] += w;
        }
        l.view_mut((x * n, y * n), (n, n)).copy_from(&(&r * -w));
        l.view_mut((y * n, x * n), (n, n)).copy_from(&(r.transpose() * -w));
        l0[(x, x)] += w;
        l0[(y, y)] += w;
        l0[(x, y)] -= w;
        l0[(y, x)] -= w;
    }
    for k in 0..points * n {
        let m = base.weight(k / n);
        l.row_mut(k).scale_mut(1.0 / m);
    }
    for x in 0..points {
        let m = base.weight(x);
        l0.row_mut(x).scale_mut(1.0 / m);
    }
    let space = L2Space::new(base.clone(), n).expect("fiber >= 1");
    let h = SelfAdjointOperator::new(Operator::new(space, l).expect("size")).expect("M^{-1}L is self-adjoint");
    let h0 = SelfAdjointOperator::new(Operator::new(L2Space::scalar(base), l0).expect("size"))
        .expect("M^{-1}L₀ is self-adjoint");
    DominatedPair::new(h, h0).expect("same base")
}

/// Functions with entries uniform in `[-1, 1]`.
pub fn random_functions<R: Rng>(rng: &mut R, space: &L2Space, count: usize) -> Vec<VectorFunction> {
    (0..count)
        .map(|_| {
            let values = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            VectorFunction::new(space.clone(), values).expect("length matches")
        })
        .collect()
}
