//! Upper bounds on the first Betti number of a triangulated surface.
//!
//! With `ρ = K` and `V = (Ric - ρ₀)₋ = (ρ₀ - K)₊ · I₂` on a surface (`n = 2`),
//!
//! ```text
//! b₁ ≤ 4n / (ρ₀ (1 + e^{-t₀ρ₀}))² · ‖V‖²_{2,HS} · ‖e^{-t₀(Δ + ρ)}‖²_{2,∞}.
//! ```
//!
//! Every bound is checked against `b₁` from the two mesh oracles.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::birman_schwinger::{bs_bound, OperatorPair};
use crate::error::{Error, Result};
use crate::geometry::{
    betti1_both, build_dec, gaussian_curvature, ricci_potential, schrodinger_comparison, Betti1,
    CurvatureField, CurvatureSource, DecOperators, TriangleMesh,
};
use crate::inequality::Inequality;
use crate::measure::SelfAdjointOperator;
use crate::perturbation::{exponential_integral, MatrixPotential};

/// Dimension of the surface, which is also the fiber of 1-forms.
pub const SURFACE_DIM: usize = 2;

/// Relative slack for `b₁ ≤ bound`.
pub const SOUNDNESS_TOLERANCE: f64 = 1e-9;

/// `4n / (ρ₀ (1 + e^{-t₀ρ₀}))²`.
pub fn prefactor_main(n: usize, rho0: f64, t0: f64) -> f64 {
    4.0 * n as f64 / (rho0 * (1.0 + (-t0 * rho0).exp())).powi(2)
}

/// `4n / ρ₀²`, the prefactor of the simpler form of the bound.
pub fn prefactor_abstract(n: usize, rho0: f64) -> f64 {
    4.0 * n as f64 / (rho0 * rho0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BettiBoundInputs {
    pub rho0: f64,
    pub t0: f64,
    /// Schatten exponent of the operator-level bound.
    pub p: f64,
}

impl BettiBoundInputs {
    pub fn new(rho0: f64, t0: f64, p: f64) -> Result<Self> {
        for (name, x) in [("rho0", rho0), ("t0", t0)] {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and positive, got {x}"),
                });
            }
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: format!("Schatten exponent must be at least 1, got {p}"),
            });
        }
        Ok(Self { rho0, t0, p })
    }
}

/// A mesh with everything the bounds need that does not depend on `(ρ₀, t₀)`.
#[derive(Debug)]
pub struct PreparedSurface {
    pub label: String,
    pub mesh: TriangleMesh,
    pub dec: DecOperators,
    pub curvature: CurvatureField,
    pub betti1: Betti1,
    /// `Δ⁰ + ρ` on vertex functions.
    pub comparison: SelfAdjointOperator,
    pub diameter_estimate: f64,
    pub volume: f64,
    hodge1: OnceLock<SelfAdjointOperator>,
}

impl PreparedSurface {
    /// Fails if the two `b₁` oracles disagree.
    pub fn new(label: impl Into<String>, mesh: TriangleMesh, source: CurvatureSource) -> Result<Self> {
        let dec = build_dec(&mesh)?;
        let betti1 = betti1_both(&dec)?;
        if !betti1.agree() {
            return Err(Error::OracleDisagreement {
                hodge: betti1.hodge,
                homology: betti1.homology,
            });
        }
        let curvature = gaussian_curvature(&mesh, source)?;
        let comparison = schrodinger_comparison(&dec, &curvature.values)?;
        Ok(Self {
            label: label.into(),
            diameter_estimate: mesh.diameter_estimate(),
            volume: mesh.area(),
            mesh,
            dec,
            curvature,
            betti1,
            comparison,
            hodge1: OnceLock::new(),
        })
    }

    pub fn b1(&self) -> usize {
        self.betti1.hodge
    }

    /// `Δ¹` with its spectral decomposition, computed on first use.
    pub fn hodge_laplacian1(&self) -> Result<&SelfAdjointOperator> {
        if let Some(h) = self.hodge1.get() {
            return Ok(h);
        }
        let h = SelfAdjointOperator::new(self.dec.laplacian1())?;
        Ok(self.hodge1.get_or_init(|| h))
    }
}

/// Values entering the main bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intermediate {
    /// `‖(Ric - ρ₀)₋‖_{2,HS}`.
    pub v_norm_2hs: f64,
    /// `‖e^{-t₀(Δ + ρ)}‖_{2,∞}`.
    pub two_inf_of_comparison: f64,
    /// `∫₀^{t₀} e^{-sρ₀} ds`.
    pub integral_22: f64,
    pub kernel_dim_hodge: usize,
    pub kernel_dim_homology: usize,
    /// Longest shortest edge path; an estimate, not the geodesic diameter.
    pub diameter_estimate: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiYauBound {
    pub value: f64,
    pub c_n: f64,
    pub alpha_n: f64,
    pub k_lower: f64,
    /// Always false: `c(n)` and `α(n)` are user inputs, not known constants.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BettiBoundReport {
    pub surface: String,
    pub rho0: f64,
    pub t0: f64,
    pub p: f64,
    pub b1_oracle: usize,
    pub bound_main: f64,
    /// Same bound with the prefactor `4n/ρ₀²`.
    pub bound_abstract: f64,
    /// Operator-level Schatten bound on `Δ¹`; absent when the synthetic
    /// edge potential does not lift `Δ¹ + V` above `ρ₀`.
    pub bound_schatten: Option<f64>,
    pub bound_liyau: Option<LiYauBound>,
    pub intermediate: Intermediate,
    pub pass: bool,
}

impl BettiBoundReport {
    pub fn main_inequality(&self) -> Inequality {
        Inequality::new(self.b1_oracle as f64, self.bound_main, SOUNDNESS_TOLERANCE)
    }

    pub fn schatten_inequality(&self) -> Option<Inequality> {
        self.bound_schatten
            .map(|b| Inequality::new(self.b1_oracle as f64, b, SOUNDNESS_TOLERANCE))
    }

    fn evaluate_pass(&mut self) {
        self.pass = self.main_inequality().holds() && self.schatten_inequality().is_none_or(|i| i.holds());
    }
}

/// Main bound, the simpler-prefactor variant and, when it applies, the
/// operator-level Schatten bound at the same `(ρ₀, t₀)`.
pub fn bound_main(surface: &PreparedSurface, inputs: &BettiBoundInputs) -> Result<BettiBoundReport> {
    let BettiBoundInputs { rho0, t0, p } = *inputs;
    let ricci = ricci_potential(&surface.mesh, &surface.curvature, rho0)?;
    let two_inf = surface.comparison.semigroup(t0)?.two_inf_norm();
    let factor = ricci.norm_sq * two_inf * two_inf;
    let bound_schatten = match edge_schatten_bound(surface, inputs) {
        Ok(b) => Some(b.value),
        Err(Error::NotBoundedBelow { .. }) => None,
        Err(e) => return Err(e),
    };
    let mut report = BettiBoundReport {
        surface: surface.label.clone(),
        rho0,
        t0,
        p,
        b1_oracle: surface.b1(),
        bound_main: prefactor_main(SURFACE_DIM, rho0, t0) * factor,
        bound_abstract: prefactor_abstract(SURFACE_DIM, rho0) * factor,
        bound_schatten,
        bound_liyau: None,
        intermediate: Intermediate {
            v_norm_2hs: ricci.norm_sq.sqrt(),
            two_inf_of_comparison: two_inf,
            integral_22: exponential_integral(rho0, t0),
            kernel_dim_hodge: surface.betti1.hodge,
            kernel_dim_homology: surface.betti1.homology,
            diameter_estimate: surface.diameter_estimate,
            volume: surface.volume,
        },
        pass: false,
    };
    report.evaluate_pass();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchattenBound {
    /// `(1 - e^{-2ρ₀t₀})^{-p} ‖e^{-2t₀H} - e^{-2t₀(H+V)}‖_{S_p}^p`.
    pub value: f64,
    pub kernel_dim: usize,
}

impl SchattenBound {
    pub fn inequality(&self) -> Inequality {
        Inequality::new(self.kernel_dim as f64, self.value, SOUNDNESS_TOLERANCE)
    }
}

/// Kernel-count bound for `H ≥ 0` from a potential `V ⪰ 0` with `H + V ≥ ρ₀`.
pub fn bound_schatten_operator_level(
    h: &SelfAdjointOperator,
    v: &MatrixPotential,
    rho0: f64,
    t0: f64,
    p: f64,
) -> Result<SchattenBound> {
    if !v.is_nonneg() {
        return Err(Error::InvalidParameter {
            name: "V",
            reason: "potential must be verified positive semidefinite".into(),
        });
    }
    if h.space() != v.space() {
        return Err(Error::SpaceMismatch);
    }
    let h_prime = SelfAdjointOperator::new(h.as_operator().add(&v.multiplication_operator())?)?;
    let cert = bs_bound(&OperatorPair::new(h.clone(), h_prime, rho0, 2.0 * t0)?, p)?;
    Ok(SchattenBound {
        value: cert.bound_crude,
        kernel_dim: cert.kernel_dim,
    })
}

/// `V_e = (ρ̃ - κ_e)₊` on edges, with `κ_e` the mean curvature of the two endpoints.
pub fn synthetic_edge_potential(dec: &DecOperators, k: &CurvatureField, shift: f64) -> Result<MatrixPotential> {
    let mut kappa = vec![0.0; dec.edge_count()];
    for &(e, v, _) in &dec.d0.entries {
        kappa[e] += 0.5 * k.values[v];
    }
    let values = kappa
        .iter()
        .map(|&c| DMatrix::from_element(1, 1, (shift - c).max(0.0)))
        .collect();
    MatrixPotential::new_nonneg(dec.edge_space(), values)
}

/// Operator-level bound on the mesh's `Δ¹` with the synthetic edge potential at `ρ̃ = ρ₀`.
pub fn edge_schatten_bound(surface: &PreparedSurface, inputs: &BettiBoundInputs) -> Result<SchattenBound> {
    let h = surface.hodge_laplacian1()?;
    let v = synthetic_edge_potential(&surface.dec, &surface.curvature, inputs.rho0)?;
    bound_schatten_operator_level(h, &v, inputs.rho0, inputs.t0, inputs.p)
}

/// `c ρ₀⁻² ‖(Ric - ρ₀)₋‖²_{2,HS} Vol⁻¹ e^{α K D²}` with user-supplied `c`, `α`.
pub fn bound_liyau(
    surface: &PreparedSurface,
    rho0: f64,
    k_lower: f64,
    c_n: f64,
    alpha_n: f64,
) -> Result<LiYauBound> {
    for (name, x) in [("c_n", c_n), ("alpha_n", alpha_n)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidParameter {
                name,
                reason: format!("must be finite and positive, got {x}"),
            });
        }
    }
    if !(k_lower.is_finite() && k_lower >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "k_lower",
            reason: format!("must be finite and nonnegative, got {k_lower}"),
        });
    }
    if let Some((vertex, &value)) = surface
        .curvature
        .values
        .iter()
        .enumerate()
        .find(|(_, &k)| k < -k_lower)
    {
        return Err(Error::CurvatureBoundViolated {
            vertex,
            value,
            bound: k_lower,
        });
    }
    let ricci = ricci_potential(&surface.mesh, &surface.curvature, rho0)?;
    let d = surface.diameter_estimate;
    Ok(LiYauBound {
        value: c_n * ricci.norm_sq / (rho0 * rho0 * surface.volume) * (alpha_n * k_lower * d * d).exp(),
        c_n,
        alpha_n,
        k_lower,
        certified: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub reports: Vec<BettiBoundReport>,
    /// Index of the smallest `bound_main`.
    pub argmin: usize,
}

impl Sweep {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn best(&self) -> &BettiBoundReport {
        &self.reports[self.argmin]
    }
}

/// `bound_main` over a `(ρ₀, t₀)` grid, in grid order.
pub fn parameter_sweep(surface: &PreparedSurface, grid: &[BettiBoundInputs]) -> Result<Sweep> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    // Decompose Δ¹ once before the parallel section.
    surface.hodge_laplacian1()?;
    let reports = grid
        .par_iter()
        .map(|inputs| bound_main(surface, inputs))
        .collect::<Result<Vec<_>>>()?;
    let argmin = reports
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.bound_main.total_cmp(&b.1.bound_main))
        .map(|(k, _)| k)
        .expect("grid is nonempty");
    Ok(Sweep { reports, argmin })
}

/// Cartesian product of `rho0s × t0s`, `ρ₀` varying slowest.
pub fn grid(rho0s: &[f64], t0s: &[f64], p: f64) -> Result<Vec<BettiBoundInputs>> {
    let mut out = Vec::with_capacity(rho0s.len() * t0s.len());
    for &r in rho0s {
        for &t in t0s {
            out.push(BettiBoundInputs::new(r, t, p)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use crate::perturbation::hs_norm_potential;

    fn prepared(label: &str, mesh: TriangleMesh) -> PreparedSurface {
        PreparedSurface::new(label, mesh, CurvatureSource::AngleDefect).unwrap()
    }

    #[test]
    fn sphere_bound_vanishes() {
        let s = prepared("sphere", fixtures::icosphere(1.0, 2).unwrap());
        for t0 in [0.1, 1.0, 5.0] {
            let r = bound_main(&s, &BettiBoundInputs::new(0.5, t0, 2.0).unwrap()).unwrap();
            assert_eq!(r.bound_main, 0.0);
            assert_eq!(r.b1_oracle, 0);
            assert_eq!(r.bound_schatten, Some(0.0));
            assert!(r.pass);
        }
    }

    #[test]
    fn flat_torus_bound_dominates_b1() {
        let s = prepared("flat-torus", fixtures::flat_torus(1.0, 1.0, 8, 8).unwrap());
        let r = bound_main(&s, &BettiBoundInputs::new(0.5, 1.0, 2.0).unwrap()).unwrap();
        assert_eq!(r.b1_oracle, 2);
        assert!(r.bound_main >= 2.0);
        assert!(r.bound_main <= r.bound_abstract);
        assert!(r.pass);
        // ‖V‖² = 2ρ₀²·Area.
        assert!((r.intermediate.v_norm_2hs.powi(2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn main_bound_matches_direct_assembly() {
        // Oracle: assemble Δ⁰ + K densely and exponentiate by eigen-decomposition
        // of the symmetric conjugate, independent of the prepared surface.
        let mesh = fixtures::bumpy_sphere(0.3, 3, 1).unwrap();
        let s = prepared("bumpy", mesh.clone());
        let (rho0, t0) = (1.5, 0.7);
        let r = bound_main(&s, &BettiBoundInputs::new(rho0, t0, 2.0).unwrap()).unwrap();

        let dec = build_dec(&mesh).unwrap();
        let k = gaussian_curvature(&mesh, CurvatureSource::AngleDefect).unwrap();
        let l0 = dec.d0.to_dense();
        let nv = mesh.vertex_count();
        let m = DMatrix::from_fn(nv, nv, |i, j| if i == j { dec.star0[i] } else { 0.0 });
        let w = DMatrix::from_fn(dec.edge_count(), dec.edge_count(), |i, j| if i == j { dec.star1[i] } else { 0.0 });
        let mut form = l0.transpose() * w * &l0;
        for v in 0..nv {
            form[(v, v)] += k.values[v] * dec.star0[v];
        }
        let ms = m.map(|x| x.sqrt());
        let msi = m.map(|x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 });
        let sym = &msi * form * &msi;
        let eig = sym.symmetric_eigen();
        let e = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-t0 * l).exp()))
            * eig.eigenvectors.transpose();
        // Kernel of e^{-t₀H₀} in the weighted space: msi · e · ms, rows weighted.
        let kernel = &msi * e * &ms;
        let two_inf = (0..nv)
            .map(|x| (0..nv).map(|y| kernel[(x, y)].powi(2) / dec.star0[y]).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let norm_sq: f64 = (0..nv)
            .map(|v| mesh.dual_areas()[v] * 2.0 * (rho0 - k.values[v]).max(0.0).powi(2))
            .sum();
        let expected = prefactor_main(2, rho0, t0) * norm_sq * two_inf * two_inf;
        assert!((r.bound_main - expected).abs() <= 1e-9 * expected, "{} vs {expected}", r.bound_main);
        let v = ricci_potential(&mesh, &k, rho0).unwrap().negative_part(&dec).unwrap();
        assert!((hs_norm_potential(&v) - r.intermediate.v_norm_2hs).abs() < 1e-12);
    }

    #[test]
    fn prefactor_ordering() {
        for &(r, t) in &[(0.1, 0.1), (1.0, 1.0), (3.0, 0.01), (0.5, 20.0)] {
            assert!(prefactor_main(2, r, t) <= prefactor_abstract(2, r));
        }
        assert!((prefactor_main(2, 1.0, 1e6) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn schatten_commuting_shift_on_torus() {
        let s = prepared("flat-torus", fixtures::flat_torus(1.0, 1.0, 6, 6).unwrap());
        let h = s.hodge_laplacian1().unwrap();
        let (rho0, t0) = (0.4, 0.8);
        let v = MatrixPotential::scalar_multiple_of_identity(h.space().clone(), &vec![rho0; h.space().points()])
            .unwrap()
            .verify_nonneg()
            .unwrap();
        for p in [1.0, 2.0] {
            let b = bound_schatten_operator_level(h, &v, rho0, t0, p).unwrap();
            let direct = h.semigroup(2.0 * t0).unwrap().schatten_norm(p).unwrap().value.powf(p);
            assert!((b.value - direct).abs() <= 1e-9 * direct);
            assert_eq!(b.kernel_dim, 2);
            assert!(b.inequality().holds());
        }
    }

    #[test]
    fn schatten_requires_lift() {
        let s = prepared("flat-torus", fixtures::flat_torus(1.0, 1.0, 5, 5).unwrap());
        let h = s.hodge_laplacian1().unwrap();
        let v = MatrixPotential::zero(h.space().clone()).verify_nonneg().unwrap();
        assert!(matches!(
            bound_schatten_operator_level(h, &v, 0.5, 1.0, 2.0),
            Err(Error::NotBoundedBelow { .. })
        ));
        let indefinite = MatrixPotential::zero(h.space().clone());
        assert!(bound_schatten_operator_level(h, &indefinite, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn liyau_closed_form_on_flat_torus() {
        let s = prepared("flat-torus", fixtures::flat_torus(2.0, 1.0, 8, 4).unwrap());
        let b = bound_liyau(&s, 0.7, 0.0, 1.0, 1.0).unwrap();
        assert!((b.value - 2.0).abs() < 1e-12);
        assert!(!b.certified);
        let sphere = prepared("sphere", fixtures::icosphere(1.0, 1).unwrap());
        assert_eq!(bound_liyau(&sphere, 0.5, 0.0, 1.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn liyau_rejects_violated_curvature_bound() {
        let s = prepared("torus-rev", fixtures::torus_of_revolution(2.0, 1.0, 12, 6).unwrap());
        assert!(matches!(
            bound_liyau(&s, 0.5, 0.0, 1.0, 1.0),
            Err(Error::CurvatureBoundViolated { .. })
        ));
        let k = -s.curvature.min();
        let b = bound_liyau(&s, 0.5, k, 1.0, 1.0).unwrap();
        assert!(b.value.is_finite() && b.value > 0.0);
    }

    #[test]
    fn sweep_order_and_argmin() {
        let s = prepared("flat-torus", fixtures::flat_torus(1.0, 1.0, 6, 6).unwrap());
        let g = grid(&[0.2, 0.8], &[0.5, 2.0], 2.0).unwrap();
        let sweep = parameter_sweep(&s, &g).unwrap();
        assert_eq!(sweep.reports.len(), 4);
        for (r, i) in sweep.reports.iter().zip(&g) {
            assert_eq!((r.rho0, r.t0), (i.rho0, i.t0));
        }
        let min = sweep.reports.iter().map(|r| r.bound_main).fold(f64::INFINITY, f64::min);
        assert_eq!(sweep.best().bound_main, min);
        assert!(sweep.all_pass());
        let single = parameter_sweep(&s, &g[..1]).unwrap();
        assert_eq!(single.reports.len(), 1);
        assert!(matches!(parameter_sweep(&s, &[]), Err(Error::EmptyGrid)));
    }

    #[test]
    fn invalid_inputs() {
        assert!(BettiBoundInputs::new(0.0, 1.0, 2.0).is_err());
        assert!(BettiBoundInputs::new(1.0, -1.0, 2.0).is_err());
        assert!(BettiBoundInputs::new(1.0, 1.0, 0.5).is_err());
    }
}
