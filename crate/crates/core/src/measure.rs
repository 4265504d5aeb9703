//! Finite weighted measure spaces and operators on vector-valued L².
//!
//! A [`WeightedSpace`] is a finite set of points `x` with masses `m(x) > 0`.
//! Functions with values in `Rⁿ` are stored stacked, point-major: coordinate
//! `i` of `f(x)` lives at index `x * n + i`. An [`Operator`] is the matrix
//! acting on that stacked vector, so `(Af)(x) = Σ_y A[x, y] f(y)` in block form.
//!
//! Every singular value and eigenvalue computation goes through the conjugated
//! matrix `M^{1/2} A M^{-1/2}`, where `M` is the diagonal of weights repeated
//! per fiber coordinate. That matrix is the representation of `A` in a
//! weighted-orthonormal basis, so Euclidean numerics on it agree with the
//! geometry of `L²(m)`.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative threshold of the rank rule: `λ` counts as zero iff
/// `|λ| ≤ RANK_TOLERANCE · (1 + spectral radius)`.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Relative symmetry defect accepted when building a [`SelfAdjointOperator`].
pub const SELF_ADJOINT_TOLERANCE: f64 = 1e-10;

/// Relative reconstruction error accepted for a spectral decomposition.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

pub fn is_numerically_zero(value: f64, spectral_radius: f64) -> bool {
    value.abs() <= RANK_TOLERANCE * (1.0 + spectral_radius.abs())
}

/// Finite measure space `(X, m)` with strictly positive point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace {
    weights: Vec<f64>,
}

impl WeightedSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some((index, &value)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(Self { weights })
    }

    pub fn uniform(points: usize) -> Result<Self> {
        Self::new(vec![1.0; points])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `L²(X, m; Rⁿ)`: a weighted space together with a fiber dimension.
#[derive(Debug, Clone)]
pub struct L2Space {
    base: Arc<WeightedSpace>,
    fiber: usize,
}

impl PartialEq for L2Space {
    fn eq(&self, other: &Self) -> bool {
        self.fiber == other.fiber && (Arc::ptr_eq(&self.base, &other.base) || self.base == other.base)
    }
}

impl L2Space {
    pub fn new(base: Arc<WeightedSpace>, fiber: usize) -> Result<Self> {
        if fiber == 0 {
            return Err(Error::ZeroFiber);
        }
        Ok(Self { base, fiber })
    }

    pub fn scalar(base: Arc<WeightedSpace>) -> Self {
        Self { base, fiber: 1 }
    }

    pub fn base(&self) -> &Arc<WeightedSpace> {
        &self.base
    }

    pub fn points(&self) -> usize {
        self.base.len()
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    /// Total number of real coordinates, `N · n`.
    pub fn dim(&self) -> usize {
        self.base.len() * self.fiber
    }

    /// The same base space with a different fiber.
    pub fn with_fiber(&self, fiber: usize) -> Result<Self> {
        Self::new(self.base.clone(), fiber)
    }

    /// Diagonal of `M^{1/2}`, one entry per stacked coordinate.
    pub fn sqrt_metric(&self) -> DVector<f64> {
        let n = self.fiber;
        DVector::from_fn(self.dim(), |k, _| self.base.weight(k / n).sqrt())
    }

    fn check_same(&self, other: &L2Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// An element of `L²(X, m; Rⁿ)`.
#[derive(Debug, Clone)]
pub struct VectorFunction {
    space: L2Space,
    values: DVector<f64>,
}

impl VectorFunction {
    pub fn new(space: L2Space, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                actual: values.len(),
            });
        }
        Ok(Self {
            space,
            values: DVector::from_vec(values),
        })
    }

    pub fn from_vector(space: L2Space, values: DVector<f64>) -> Result<Self> {
        Self::new(space, values.as_slice().to_vec())
    }

    pub fn space(&self) -> &L2Space {
        &self.space
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    /// Fiber vector `f(x)`.
    pub fn at(&self, x: usize) -> &[f64] {
        let n = self.space.fiber;
        &self.values.as_slice()[x * n..(x + 1) * n]
    }

    /// The scalar function `x ↦ |f(x)|` (Euclidean norm on the fiber).
    pub fn pointwise_norm(&self) -> VectorFunction {
        let values = (0..self.space.points())
            .map(|x| self.at(x).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        VectorFunction {
            space: L2Space::scalar(self.space.base.clone()),
            values: DVector::from_vec(values),
        }
    }

    pub fn norm(&self) -> f64 {
        weighted_inner_product(self, self)
            .expect("same space")
            .max(0.0)
            .sqrt()
    }
}

/// `(f | g) = Σ_x m(x) f(x)·g(x)`.
pub fn weighted_inner_product(f: &VectorFunction, g: &VectorFunction) -> Result<f64> {
    f.space.check_same(&g.space)?;
    let n = f.space.fiber;
    let base = &f.space.base;
    Ok(f.values
        .iter()
        .zip(g.values.iter())
        .enumerate()
        .map(|(k, (a, b))| base.weight(k / n) * a * b)
        .sum())
}

/// Schatten (quasi-)norm of an operator together with its exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNormReport {
    pub p: f64,
    pub value: f64,
    /// `p < 1`: the value is a quasi-norm and violates the triangle inequality.
    pub quasi: bool,
}

/// ℓᵖ norm of a nonnegative sequence, scaled by its maximum so that a single
/// nonzero entry is returned exactly.
pub fn lp_norm(values: &[f64], p: f64) -> f64 {
    let max = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * sum.powf(1.0 / p)
}

/// A bounded operator on `L²(X, m; Rⁿ)`, stored as its stacked matrix.
#[derive(Debug, Clone)]
pub struct Operator {
    space: L2Space,
    matrix: DMatrix<f64>,
}

impl Operator {
    pub fn new(space: L2Space, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: if matrix.nrows() != dim { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: L2Space) -> Self {
        let dim = space.dim();
        Self {
            space,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zero(space: L2Space) -> Self {
        let dim = space.dim();
        Self {
            space,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    /// Builds the operator whose conjugated matrix `M^{1/2} A M^{-1/2}` is `conjugated`.
    pub fn from_conjugated(space: L2Space, conjugated: DMatrix<f64>) -> Result<Self> {
        let s = space.sqrt_metric();
        let mut matrix = conjugated;
        if matrix.nrows() != s.len() || matrix.ncols() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                actual: matrix.nrows(),
            });
        }
        for j in 0..matrix.ncols() {
            for i in 0..matrix.nrows() {
                matrix[(i, j)] *= s[j] / s[i];
            }
        }
        Self::new(space, matrix)
    }

    pub fn space(&self) -> &L2Space {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// `M^{1/2} A M^{-1/2}`.
    pub fn conjugated(&self) -> DMatrix<f64> {
        let s = self.space.sqrt_metric();
        let mut out = self.matrix.clone();
        for j in 0..out.ncols() {
            for i in 0..out.nrows() {
                out[(i, j)] *= s[i] / s[j];
            }
        }
        out
    }

    pub fn apply(&self, f: &VectorFunction) -> Result<VectorFunction> {
        self.space.check_same(&f.space)?;
        Ok(VectorFunction {
            space: self.space.clone(),
            values: &self.matrix * &f.values,
        })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.space.check_same(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.space.check_same(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.space.check_same(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    /// Adjoint in the weighted inner product: `M^{-1} Aᵀ M`.
    pub fn adjoint(&self) -> Operator {
        let s = self.space.sqrt_metric();
        let mut matrix = self.matrix.transpose();
        for j in 0..matrix.ncols() {
            for i in 0..matrix.nrows() {
                matrix[(i, j)] *= (s[j] * s[j]) / (s[i] * s[i]);
            }
        }
        Operator {
            space: self.space.clone(),
            matrix,
        }
    }

    /// `max |S - Sᵀ|` of the conjugated matrix relative to `max |S|`.
    pub fn self_adjoint_defect(&self) -> f64 {
        let s = self.conjugated();
        let scale = s.amax();
        if scale == 0.0 {
            return 0.0;
        }
        (&s - s.transpose()).amax() / scale
    }

    /// Singular values in the weighted metric, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.conjugated().singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// `‖A‖_{S_p}`; `p ∈ (0, 1)` yields a flagged quasi-norm.
    pub fn schatten_norm(&self, p: f64) -> Result<OperatorNormReport> {
        schatten_from_singular_values(&self.singular_values(), p)
    }

    pub fn hs_norm(&self) -> f64 {
        self.conjugated().norm()
    }

    /// `‖A‖_{2,2}`, the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// `‖A‖_{L²→L^∞}` with the Euclidean norm on the fiber.
    ///
    /// For point `x` the map `f ↦ (Af)(x)` is the block row `B_x`; its norm on
    /// `L²(m)` is the largest singular value of `B_x M^{-1/2}`.
    pub fn two_inf_norm(&self) -> f64 {
        let n = self.space.fiber;
        let s = self.space.sqrt_metric();
        (0..self.space.points())
            .map(|x| {
                let mut row = self.matrix.rows(x * n, n).into_owned();
                for (j, mut col) in row.column_iter_mut().enumerate() {
                    col /= s[j];
                }
                largest_gram_singular_value(&row)
            })
            .fold(0.0, f64::max)
    }

    /// `‖A‖_{L¹→L²}`. The extreme points of the `L¹(m)` unit ball are
    /// `δ_y u / m(y)` with `|u| = 1`, so the norm is
    /// `max_y σ_max(M^{1/2} A_{·y}) / m(y)`.
    pub fn one_two_norm(&self) -> f64 {
        let n = self.space.fiber;
        let s = self.space.sqrt_metric();
        (0..self.space.points())
            .map(|y| {
                let mut col = self.matrix.columns(y * n, n).into_owned();
                for (i, mut row) in col.row_iter_mut().enumerate() {
                    row *= s[i];
                }
                largest_gram_singular_value(&col.transpose()) / self.space.base.weight(y)
            })
            .fold(0.0, f64::max)
    }

    /// Eigenvalues counted with algebraic multiplicity (complex in general).
    pub fn eigenvalues(&self) -> Result<Vec<Complex<f64>>> {
        let dim = self.matrix.nrows();
        let schur = nalgebra::Schur::try_new(self.matrix.clone(), f64::EPSILON, 100 * dim.max(10))
            .ok_or(Error::NoConvergence("schur decomposition"))?;
        Ok(schur.complex_eigenvalues().iter().copied().collect())
    }
}

pub fn schatten_from_singular_values(singular_values: &[f64], p: f64) -> Result<OperatorNormReport> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("Schatten exponent must be positive, got {p}"),
        });
    }
    Ok(OperatorNormReport {
        p,
        value: lp_norm(singular_values, p),
        quasi: p < 1.0,
    })
}

/// Largest singular value of a short-and-wide block `B` via `B Bᵀ`.
fn largest_gram_singular_value(block: &DMatrix<f64>) -> f64 {
    if block.nrows() == 1 {
        return block.norm();
    }
    let gram = block * block.transpose();
    gram.symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(*v))
        .sqrt()
}

/// A self-adjoint operator with its spectral decomposition.
///
/// `frame` holds Euclidean-orthonormal eigenvectors of the conjugated matrix
/// `S = M^{1/2} A M^{-1/2}`; the weighted-orthonormal eigenvectors of `A` are
/// `M^{-1/2} frame`. Eigenvalues are ascending.
#[derive(Debug, Clone)]
pub struct SelfAdjointOperator {
    op: Operator,
    eigenvalues: DVector<f64>,
    frame: DMatrix<f64>,
}

impl SelfAdjointOperator {
    pub fn new(op: Operator) -> Result<Self> {
        let s = symmetrized_conjugate(&op)?;
        let scale = s.amax();
        let dim = s.nrows();
        let eigen = SymmetricEigen::try_new(s.clone(), f64::EPSILON, 0)
            .ok_or(Error::NoConvergence("symmetric eigendecomposition"))?;
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&k| eigen.eigenvalues[k]));
        let frame = eigen.eigenvectors.select_columns(order.iter());

        let mut scaled = frame.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= eigenvalues[j];
        }
        let reconstruction = &scaled * frame.transpose();
        let err = (&reconstruction - &s).amax();
        if scale > 0.0 && err > RECONSTRUCTION_TOLERANCE * scale {
            return Err(Error::SpectralReconstruction(err / scale));
        }
        Ok(Self {
            op,
            eigenvalues,
            frame,
        })
    }

    /// Assembles `A = M^{-1/2} Q Λ Qᵀ M^{1/2}` from an orthonormal frame `Q`.
    pub fn from_spectrum(space: L2Space, eigenvalues: Vec<f64>, frame: DMatrix<f64>) -> Result<Self> {
        let dim = space.dim();
        if eigenvalues.len() != dim || frame.nrows() != dim || frame.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: eigenvalues.len(),
            });
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let eigenvalues = DVector::from_iterator(dim, order.iter().map(|&k| eigenvalues[k]));
        let frame = frame.select_columns(order.iter());
        let op = spectral_function(&space, &eigenvalues, &frame, |l| l)?;
        Ok(Self {
            op,
            eigenvalues,
            frame,
        })
    }

    pub fn space(&self) -> &L2Space {
        self.op.space()
    }

    pub fn as_operator(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.op.matrix()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn spectral_radius(&self) -> f64 {
        let n = self.eigenvalues.len();
        self.eigenvalues[0].abs().max(self.eigenvalues[n - 1].abs())
    }

    /// `φ(A)` by spectral calculus.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> Operator {
        spectral_function(self.space(), &self.eigenvalues, &self.frame, f)
            .expect("spectral data matches its own space")
    }

    /// `e^{-tA}`, sharing the eigenframe of `A`.
    pub fn semigroup(&self, t: f64) -> Result<SelfAdjointOperator> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::NegativeTime(t));
        }
        let dim = self.eigenvalues.len();
        // e^{-tλ} reverses the ascending order.
        let eigenvalues = DVector::from_iterator(
            dim,
            (0..dim).rev().map(|k| (-t * self.eigenvalues[k]).exp()),
        );
        let frame = self.frame.select_columns((0..dim).rev().collect::<Vec<_>>().iter());
        let op = spectral_function(self.space(), &eigenvalues, &frame, |l| l)?;
        Ok(Self {
            op,
            eigenvalues,
            frame,
        })
    }

    /// `A + c·I`, reusing the eigenframe.
    pub fn shifted(&self, c: f64) -> SelfAdjointOperator {
        let eigenvalues = self.eigenvalues.map(|l| l + c);
        let dim = eigenvalues.len();
        let mut matrix = self.op.matrix().clone();
        for k in 0..dim {
            matrix[(k, k)] += c;
        }
        Self {
            op: Operator {
                space: self.space().clone(),
                matrix,
            },
            eigenvalues,
            frame: self.frame.clone(),
        }
    }

    /// Multiplicity of `λ` under the rank rule.
    pub fn eigenspace_dim(&self, lambda: f64) -> usize {
        let radius = self.spectral_radius();
        self.eigenvalues
            .iter()
            .filter(|&&l| is_numerically_zero(l - lambda, radius))
            .count()
    }

    pub fn kernel_dim(&self) -> usize {
        self.eigenspace_dim(0.0)
    }

    /// Orthonormal basis of `ker A` in conjugated coordinates.
    pub fn kernel_basis(&self) -> DMatrix<f64> {
        let radius = self.spectral_radius();
        let cols: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| is_numerically_zero(self.eigenvalues[k], radius))
            .collect();
        self.frame.select_columns(cols.iter())
    }

    pub fn schatten_norm(&self, p: f64) -> Result<OperatorNormReport> {
        let sv: Vec<f64> = self.eigenvalues.iter().map(|l| l.abs()).collect();
        schatten_from_singular_values(&sv, p)
    }

    pub fn two_inf_norm(&self) -> f64 {
        self.op.two_inf_norm()
    }

    pub fn hs_norm(&self) -> f64 {
        self.op.hs_norm()
    }
}

/// Conjugated matrix of a weighted-self-adjoint operator, symmetrized after
/// checking the defect.
fn symmetrized_conjugate(op: &Operator) -> Result<DMatrix<f64>> {
    let s = op.conjugated();
    let scale = s.amax();
    if scale > 0.0 {
        let defect = (&s - s.transpose()).amax() / scale;
        if defect > SELF_ADJOINT_TOLERANCE {
            return Err(Error::NotSelfAdjoint { defect });
        }
    }
    Ok((&s + s.transpose()) * 0.5)
}

/// Ascending eigenvalues of a weighted-self-adjoint operator, without an
/// eigenframe. Much cheaper than [`SelfAdjointOperator::new`] on large meshes.
pub fn self_adjoint_spectrum(op: &Operator) -> Result<Vec<f64>> {
    let s = symmetrized_conjugate(op)?;
    let mut values: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Number of entries of an ascending spectrum that are zero under the rank rule.
pub fn zero_count(spectrum: &[f64]) -> usize {
    let radius = match (spectrum.first(), spectrum.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => return 0,
    };
    spectrum.iter().filter(|&&l| is_numerically_zero(l, radius)).count()
}

/// `φ(A) = M^{-1/2} Q φ(Λ) Qᵀ M^{1/2}`.
fn spectral_function(
    space: &L2Space,
    eigenvalues: &DVector<f64>,
    frame: &DMatrix<f64>,
    f: impl Fn(f64) -> f64,
) -> Result<Operator> {
    let mut scaled = frame.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= f(eigenvalues[j]);
    }
    let conjugated = scaled * frame.transpose();
    Operator::from_conjugated(space.clone(), conjugated)
}

/// `sin` of the largest principal angle between two subspaces given by
/// orthonormal columns, or `None` if their dimensions differ.
pub fn max_principal_angle_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    if a.ncols() != b.ncols() || a.nrows() != b.nrows() {
        return None;
    }
    if a.ncols() == 0 {
        return Some(0.0);
    }
    let residual = b - a * (a.transpose() * b);
    Some(residual.singular_values().iter().fold(0.0_f64, |acc, v| acc.max(*v)))
}
