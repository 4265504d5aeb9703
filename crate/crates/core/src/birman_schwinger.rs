//! Kernel counting through semigroup differences.
//!
//! For `H ≥ 0` and `H' ≥ ρ₀ > 0` set `D_t = e^{-tH} - e^{-tH'}` and
//! `K_t = (I - e^{-tH'})^{-1} D_t`. Then `ker H = ker(K_t - I)`, and
//! Weyl's inequality turns that fixed-point space into the bounds
//!
//! ```text
//! dim ker H ≤ ‖K_t‖_{S_p}^p ≤ (1 - e^{-ρ₀ t})^{-p} ‖D_t‖_{S_p}^p.
//! ```

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measure::{
    is_numerically_zero, lp_norm, max_principal_angle_sine, Operator, SelfAdjointOperator,
};

/// Relative slack for the Weyl and Birman–Schwinger chain inequalities.
pub const CHAIN_TOLERANCE: f64 = 1e-9;

/// `H ≥ 0` and `H' ≥ ρ₀ > 0` on a common space, plus a reference time `t₀`.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    h: SelfAdjointOperator,
    h_prime: SelfAdjointOperator,
    rho0: f64,
    t0: f64,
}

impl OperatorPair {
    pub fn new(h: SelfAdjointOperator, h_prime: SelfAdjointOperator, rho0: f64, t0: f64) -> Result<Self> {
        if h.space() != h_prime.space() {
            return Err(Error::SpaceMismatch);
        }
        if !(rho0.is_finite() && rho0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho0",
                reason: format!("must be finite and positive, got {rho0}"),
            });
        }
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t0",
                reason: format!("must be finite and positive, got {t0}"),
            });
        }
        let h_min = h.min_eigenvalue();
        if h_min < 0.0 && !is_numerically_zero(h_min, h.spectral_radius()) {
            return Err(Error::NotBoundedBelow { min: h_min, bound: 0.0 });
        }
        let hp_min = h_prime.min_eigenvalue();
        if hp_min < rho0 && !is_numerically_zero(hp_min - rho0, h_prime.spectral_radius()) {
            return Err(Error::NotBoundedBelow { min: hp_min, bound: rho0 });
        }
        Ok(Self { h, h_prime, rho0, t0 })
    }

    pub fn h(&self) -> &SelfAdjointOperator {
        &self.h
    }

    pub fn h_prime(&self) -> &SelfAdjointOperator {
        &self.h_prime
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            reason: format!("must be finite and positive, got {t}"),
        })
    }
}

/// `D_t = e^{-tH} - e^{-tH'}`.
pub fn semigroup_difference(pair: &OperatorPair, t: f64) -> Result<Operator> {
    check_time(t)?;
    pair.h
        .semigroup(t)?
        .as_operator()
        .sub(pair.h_prime.semigroup(t)?.as_operator())
}

/// `K_t = (I - e^{-tH'})^{-1} D_t`, the inverse taken on the spectrum of `H'`.
pub fn birman_schwinger_operator(pair: &OperatorPair, t: f64) -> Result<Operator> {
    let d = semigroup_difference(pair, t)?;
    let inverse = pair.h_prime.function(|l| 1.0 / (1.0 - (-t * l).exp()));
    inverse.compose(&d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelIdentity {
    pub kernel_dim: usize,
    pub fixed_point_dim: usize,
    /// Sine of the largest principal angle between the two subspaces;
    /// `None` when the dimensions differ.
    pub max_angle_sine: Option<f64>,
}

impl KernelIdentity {
    pub fn holds(&self, angle_tol: f64) -> bool {
        self.kernel_dim == self.fixed_point_dim
            && self.max_angle_sine.is_some_and(|s| s <= angle_tol)
    }
}

/// Compares `ker H` with `ker(K_t - I)`, both computed under the rank rule.
pub fn kernel_identity_check(pair: &OperatorPair, t: f64) -> Result<KernelIdentity> {
    let k = birman_schwinger_operator(pair, t)?;
    let dim = k.space().dim();
    let shifted = k.conjugated() - DMatrix::<f64>::identity(dim, dim);
    let svd = nalgebra::SVD::try_new(shifted, false, true, f64::EPSILON, 0)
        .ok_or(Error::NoConvergence("svd"))?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |acc, s| acc.max(*s));
    let null_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| is_numerically_zero(svd.singular_values[i], sigma_max))
        .collect();
    let fixed = v_t.select_rows(null_rows.iter()).transpose();
    let kernel = pair.h.kernel_basis();
    Ok(KernelIdentity {
        kernel_dim: kernel.ncols(),
        fixed_point_dim: fixed.ncols(),
        max_angle_sine: max_principal_angle_sine(&kernel, &fixed),
    })
}

/// Both sides of the kernel-counting bound at `t₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsCertificate {
    pub kernel_dim: usize,
    /// `‖(I - e^{-t₀H'})^{-1} D_{t₀}‖_{S_p}^p`.
    pub bound_sharp: f64,
    /// `(1 - e^{-ρ₀t₀})^{-p} ‖D_{t₀}‖_{S_p}^p`.
    pub bound_crude: f64,
    pub p: f64,
}

impl BsCertificate {
    /// `kernel_dim ≤ bound_sharp ≤ bound_crude` up to relative slack.
    pub fn chain_holds(&self, rel_tol: f64) -> bool {
        let k = self.kernel_dim as f64;
        k <= self.bound_sharp * (1.0 + rel_tol) && self.bound_sharp <= self.bound_crude * (1.0 + rel_tol)
    }
}

pub fn bs_bound(pair: &OperatorPair, p: f64) -> Result<BsCertificate> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("Schatten exponent must be positive, got {p}"),
        });
    }
    let t0 = pair.t0;
    let d = semigroup_difference(pair, t0)?;
    let inverse = pair.h_prime.function(|l| 1.0 / (1.0 - (-t0 * l).exp()));
    let k = inverse.compose(&d)?;
    let sharp = k.schatten_norm(p)?.value.powf(p);
    // Divide before raising to p so the scalar saturation case is exact.
    let crude = (d.schatten_norm(p)?.value / (1.0 - (-pair.rho0 * t0).exp())).powf(p);
    Ok(BsCertificate {
        kernel_dim: pair.h.kernel_dim(),
        bound_sharp: sharp,
        bound_crude: crude,
        p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylCheck {
    /// `Σ |λ_n(K)|^p`.
    pub eigen_sum: f64,
    /// `Σ s_n(K)^p`.
    pub singular_sum: f64,
}

impl WeylCheck {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.eigen_sum <= self.singular_sum * (1.0 + rel_tol)
    }
}

/// Weyl's eigenvalue/singular-value inequality for an arbitrary operator.
pub fn weyl_inequality_check(k: &Operator, p: f64) -> Result<WeylCheck> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("exponent must be positive, got {p}"),
        });
    }
    let eigen: Vec<f64> = k.eigenvalues()?.iter().map(|z| z.norm()).collect();
    let singular = k.singular_values();
    Ok(WeylCheck {
        eigen_sum: lp_norm(&eigen, p).powf(p),
        singular_sum: lp_norm(&singular, p).powf(p),
    })
}
