use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::dec::DecOperators;
use crate::geometry::mesh::TriangleMesh;
use crate::perturbation::MatrixPotential;
use crate::measure::L2Space;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureSource {
    AngleDefect,
    Analytic,
}

/// Gaussian curvature per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub values: Vec<f64>,
    pub source: CurvatureSource,
}

impl CurvatureField {
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn gaussian_curvature(mesh: &TriangleMesh, source: CurvatureSource) -> Result<CurvatureField> {
    let values = match source {
        CurvatureSource::AngleDefect => mesh
            .angle_defects()
            .iter()
            .zip(mesh.dual_areas())
            .map(|(d, a)| d / a)
            .collect(),
        CurvatureSource::Analytic => {
            let p = mesh.parametrization().ok_or(Error::MissingParametrization)?;
            p.coords.iter().map(|&[u, v]| p.surface.gaussian_curvature(u, v)).collect()
        }
    };
    Ok(CurvatureField { values, source })
}

/// `|Σ_v K(v) dualArea(v) - 2πχ|`.
pub fn gauss_bonnet_residual(mesh: &TriangleMesh, k: &CurvatureField) -> f64 {
    let total: f64 = k.values.iter().zip(mesh.dual_areas()).map(|(k, a)| k * a).sum();
    (total - 2.0 * PI * mesh.euler_characteristic() as f64).abs()
}

/// Weighted L² distance between two curvature fields, relative to the first.
pub fn relative_l2_distance(mesh: &TriangleMesh, a: &CurvatureField, b: &CurvatureField) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for ((x, y), w) in a.values.iter().zip(&b.values).zip(mesh.dual_areas()) {
        num += w * (x - y).powi(2);
        den += w * x * x;
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Curvature-derived data on a surface, where `Ric_x = K(x)·I₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciPotential {
    pub rho0: f64,
    /// `ρ = K`.
    pub rho: Vec<f64>,
    /// `‖(Ric_x - ρ₀)₋‖²_HS = 2(ρ₀ - K(x))₊²`.
    pub hs_density: Vec<f64>,
    /// `Σ_v dualArea(v) · hs_density(v)`.
    pub norm_sq: f64,
}

pub fn ricci_potential(mesh: &TriangleMesh, k: &CurvatureField, rho0: f64) -> Result<RicciPotential> {
    if !(rho0.is_finite() && rho0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "rho0",
            reason: format!("must be finite and positive, got {rho0}"),
        });
    }
    if k.values.len() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertex_count(),
            actual: k.values.len(),
        });
    }
    let hs_density: Vec<f64> = k.values.iter().map(|&k| 2.0 * (rho0 - k).max(0.0).powi(2)).collect();
    let norm_sq = hs_density.iter().zip(mesh.dual_areas()).map(|(d, a)| d * a).sum();
    Ok(RicciPotential {
        rho0,
        rho: k.values.clone(),
        hs_density,
        norm_sq,
    })
}

impl RicciPotential {
    /// `(Ric - ρ₀)₋` as a `2 × 2` matrix potential on the vertex space.
    pub fn negative_part(&self, dec: &DecOperators) -> Result<MatrixPotential> {
        let space = L2Space::new(dec.vertex_space().base().clone(), 2)?;
        let values = self
            .rho
            .iter()
            .map(|&k| DMatrix::identity(2, 2) * (self.rho0 - k).max(0.0))
            .collect();
        MatrixPotential::new_nonneg(space, values)
    }

    pub fn vanishes(&self) -> bool {
        self.norm_sq == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_dec, fixtures};
    use crate::perturbation::hs_norm_potential;

    #[test]
    fn icosahedron_defect() {
        let m = fixtures::icosphere(1.0, 0).unwrap();
        for d in m.angle_defects() {
            assert!((d - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_gauss_bonnet() {
        for m in [
            fixtures::tetrahedron(),
            fixtures::icosphere(1.3, 2).unwrap(),
            fixtures::torus_of_revolution(2.0, 0.5, 16, 8).unwrap(),
            fixtures::genus2(1).unwrap(),
            fixtures::bumpy_sphere(0.25, 3, 2).unwrap(),
        ] {
            let k = gaussian_curvature(&m, CurvatureSource::AngleDefect).unwrap();
            assert!(gauss_bonnet_residual(&m, &k) <= 1e-9);
        }
    }

    #[test]
    fn flat_torus_has_zero_defect() {
        let m = fixtures::flat_torus(1.0, 1.5, 8, 6).unwrap();
        let k = gaussian_curvature(&m, CurvatureSource::AngleDefect).unwrap();
        assert!(k.values.iter().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn analytic_source() {
        let m = fixtures::icosphere(1.0, 1).unwrap();
        let k = gaussian_curvature(&m, CurvatureSource::Analytic).unwrap();
        assert!(k.values.iter().all(|&k| k == 1.0));
        assert!(matches!(
            gaussian_curvature(&fixtures::genus2(0).unwrap(), CurvatureSource::Analytic),
            Err(Error::MissingParametrization)
        ));
    }

    #[test]
    fn angle_defect_approaches_analytic_curvature() {
        let err = |n: usize| {
            let m = fixtures::torus_of_revolution(2.0, 0.7, 2 * n, n).unwrap();
            let a = gaussian_curvature(&m, CurvatureSource::Analytic).unwrap();
            let d = gaussian_curvature(&m, CurvatureSource::AngleDefect).unwrap();
            relative_l2_distance(&m, &a, &d)
        };
        let (coarse, fine) = (err(8), err(32));
        assert!(fine < coarse, "{coarse} -> {fine}");
    }

    #[test]
    fn ricci_potential_closed_forms() {
        let m = fixtures::icosphere(1.0, 2).unwrap();
        let k = gaussian_curvature(&m, CurvatureSource::Analytic).unwrap();
        let low = ricci_potential(&m, &k, 0.5).unwrap();
        assert!(low.vanishes());
        let high = ricci_potential(&m, &k, 2.0).unwrap();
        assert!((high.norm_sq - 2.0 * m.area()).abs() < 1e-12);
        assert!((high.norm_sq / (8.0 * PI) - 1.0).abs() < 0.02);

        let t = fixtures::flat_torus(2.0, 1.5, 6, 5).unwrap();
        let k = gaussian_curvature(&t, CurvatureSource::AngleDefect).unwrap();
        let rho0 = 0.3;
        let r = ricci_potential(&t, &k, rho0).unwrap();
        assert!((r.norm_sq - 2.0 * rho0 * rho0 * 3.0).abs() < 1e-12);
        // Same norm through the matrix-potential machinery.
        let v = r.negative_part(&build_dec(&t).unwrap()).unwrap();
        assert!((hs_norm_potential(&v).powi(2) - r.norm_sq).abs() < 1e-12);
        assert!(ricci_potential(&t, &k, 0.0).is_err());
    }
}
