use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::measure::{L2Space, Operator};

const SYMMETRY_TOLERANCE: f64 = 1e-12;
const NONNEG_TOLERANCE: f64 = 1e-10;

/// A matrix-valued multiplication operator `(Vf)(x) = V(x) f(x)` with
/// symmetric `V(x) ∈ R^{n×n}`.
#[derive(Debug, Clone)]
pub struct MatrixPotential {
    space: L2Space,
    values: Vec<DMatrix<f64>>,
    nonneg: bool,
}

impl MatrixPotential {
    pub fn new(space: L2Space, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if values.len() != space.points() {
            return Err(Error::DimensionMismatch {
                expected: space.points(),
                actual: values.len(),
            });
        }
        let n = space.fiber();
        let mut symmetric = Vec::with_capacity(values.len());
        for (point, v) in values.into_iter().enumerate() {
            if v.nrows() != n || v.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.nrows(),
                });
            }
            let defect = (&v - v.transpose()).amax();
            if defect > SYMMETRY_TOLERANCE * v.amax().max(1.0) {
                return Err(Error::AsymmetricPotential { point, defect });
            }
            symmetric.push((&v + v.transpose()) * 0.5);
        }
        Ok(Self {
            space,
            values: symmetric,
            nonneg: false,
        })
    }

    /// Like [`MatrixPotential::new`], additionally verifying `V(x) ⪰ 0` everywhere.
    pub fn new_nonneg(space: L2Space, values: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(space, values)?.verify_nonneg()
    }

    pub fn verify_nonneg(mut self) -> Result<Self> {
        for (point, v) in self.values.iter().enumerate() {
            let min = min_eigenvalue(v);
            if min < -NONNEG_TOLERANCE * v.amax().max(1.0) {
                return Err(Error::IndefinitePotential { point, min });
            }
        }
        self.nonneg = true;
        Ok(self)
    }

    pub fn zero(space: L2Space) -> Self {
        let n = space.fiber();
        let values = vec![DMatrix::zeros(n, n); space.points()];
        Self {
            space,
            values,
            nonneg: true,
        }
    }

    /// `V(x) = s(x) · I`.
    pub fn scalar_multiple_of_identity(space: L2Space, s: &[f64]) -> Result<Self> {
        let n = space.fiber();
        let values = s.iter().map(|&v| DMatrix::identity(n, n) * v).collect();
        let potential = Self::new(space, values)?;
        if s.iter().all(|&v| v >= 0.0) {
            Ok(Self {
                nonneg: true,
                ..potential
            })
        } else {
            Ok(potential)
        }
    }

    pub fn space(&self) -> &L2Space {
        &self.space
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }

    pub fn at(&self, x: usize) -> &DMatrix<f64> {
        &self.values[x]
    }

    /// `V ⪰ 0` was claimed and verified.
    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    /// Block-diagonal matrix of the multiplication operator.
    pub fn multiplication_operator(&self) -> Operator {
        let n = self.space.fiber();
        let dim = self.space.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (x, v) in self.values.iter().enumerate() {
            m.view_mut((x * n, x * n), (n, n)).copy_from(v);
        }
        Operator::new(self.space.clone(), m).expect("block sizes match the space")
    }

    /// `‖V(x)‖`, the largest absolute eigenvalue of each block.
    pub fn fiber_norms(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| {
                v.symmetric_eigenvalues()
                    .iter()
                    .fold(0.0_f64, |acc, l| acc.max(l.abs()))
            })
            .collect()
    }

    pub fn max_fiber_norm(&self) -> f64 {
        self.fiber_norms().into_iter().fold(0.0, f64::max)
    }

    /// `(Σ_{ij} ‖V_{ij}‖₂²)^{1/2}`, summing entry functions first.
    pub fn hs_norm_by_entries(&self) -> f64 {
        let n = self.space.fiber();
        let weights = self.space.base().weights();
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += self
                    .values
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| w * v[(i, j)] * v[(i, j)])
                    .sum::<f64>();
            }
        }
        total.sqrt()
    }

    fn map_blocks(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>, nonneg: bool) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(f).collect(),
            nonneg,
        }
    }

    /// `A₊` of each block.
    pub fn positive_part(&self) -> Self {
        self.map_blocks(|v| spectral_map(v, |l| l.max(0.0)), true)
    }

    /// `A₋` of each block, so that `A = A₊ - A₋`.
    pub fn negative_part(&self) -> Self {
        self.map_blocks(|v| spectral_map(v, |l| (-l).max(0.0)), true)
    }

    pub fn shifted(&self, c: f64) -> Self {
        let n = self.space.fiber();
        self.map_blocks(|v| v + DMatrix::identity(n, n) * c, false)
    }
}

/// `‖V‖_{2,HS} = (Σ_x m(x) ‖V(x)‖²_HS)^{1/2}`.
pub fn hs_norm_potential(v: &MatrixPotential) -> f64 {
    v.values
        .iter()
        .zip(v.space.base().weights())
        .map(|(block, w)| w * block.norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// `V^{(k)} = 1_{‖V(x)‖ ≤ k} V`.
pub fn truncate_potential(v: &MatrixPotential, k: u32) -> Result<MatrixPotential> {
    if k == 0 {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: "truncation level must be at least 1".into(),
        });
    }
    let n = v.space.fiber();
    let values = v
        .values
        .iter()
        .zip(v.fiber_norms())
        .map(|(block, norm)| if norm <= f64::from(k) { block.clone() } else { DMatrix::zeros(n, n) })
        .collect();
    Ok(MatrixPotential {
        space: v.space.clone(),
        values,
        nonneg: v.nonneg,
    })
}

/// Per-point `V(x) = U(x) Λ(x) U(x)ᵀ` with ascending `Λ(x)`.
#[derive(Debug, Clone)]
pub struct PointwiseDiagonalization {
    pub eigen_values: Vec<DVector<f64>>,
    pub eigen_frames: Vec<DMatrix<f64>>,
}

impl PointwiseDiagonalization {
    pub fn reconstruct(&self, x: usize) -> DMatrix<f64> {
        let u = &self.eigen_frames[x];
        u * DMatrix::from_diagonal(&self.eigen_values[x]) * u.transpose()
    }
}

pub fn pointwise_diagonalize(v: &MatrixPotential) -> PointwiseDiagonalization {
    let (eigen_values, eigen_frames) = v.values.iter().map(sorted_eigen).unzip();
    PointwiseDiagonalization {
        eigen_values,
        eigen_frames,
    }
}

fn sorted_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eigen = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eigen.eigenvalues[k]));
    (values, eigen.eigenvectors.select_columns(order.iter()))
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |acc, l| acc.min(*l))
}

fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, frame) = sorted_eigen(m);
    &frame * DMatrix::from_diagonal(&values.map(f)) * frame.transpose()
}
