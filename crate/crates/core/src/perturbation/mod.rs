//! Hilbert–Schmidt estimates for `e^{-tH} - e^{-t(H+V)}` with matrix-valued `V`.
//!
//! Everything here is finite-dimensional, so every bound can be compared with
//! the exactly computed left-hand side. The pieces are:
//!
//! * the `(2,HS)` norm of a potential and the factorization bound
//!   `‖VT‖_HS ≤ √n ‖V‖_{2,HS} ‖T‖_{2,∞}`,
//! * the Duhamel representation of the semigroup difference,
//! * the difference bound with ultracontractive `e^{-t₀H}` and `e^{-t₀(H+V)}`,
//! * the variant where a scalar semigroup `e^{-tH₀}` dominates `e^{-tH}`.

mod domination;
mod potential;

pub use domination::{
    domination_check, domination_check_with_slack, DominatedPair, DominationReport, DOMINATION_SLACK,
};
pub use potential::{
    hs_norm_potential, pointwise_diagonalize, truncate_potential, MatrixPotential,
    PointwiseDiagonalization,
};

use crate::error::{Error, Result};
use crate::inequality::Inequality;
use crate::measure::{is_numerically_zero, Operator, SelfAdjointOperator};
use crate::quadrature::gauss_legendre_on;

/// Relative slack for the Hilbert–Schmidt bounds.
pub const BOUND_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

/// `‖VT‖_HS ≤ √n ‖V‖_{2,HS} ‖T‖_{2,∞}`.
pub fn prop26_bound_check(v: &MatrixPotential, t: &Operator) -> Result<Inequality> {
    if v.space() != t.space() {
        return Err(Error::SpaceMismatch);
    }
    let lhs = v.multiplication_operator().compose(t)?.hs_norm();
    let n = v.space().fiber() as f64;
    let rhs = n.sqrt() * hs_norm_potential(v) * t.two_inf_norm();
    Ok(Inequality::new(lhs, rhs, BOUND_TOLERANCE))
}

fn perturbed(h: &SelfAdjointOperator, v: &MatrixPotential) -> Result<SelfAdjointOperator> {
    if h.space() != v.space() {
        return Err(Error::SpaceMismatch);
    }
    SelfAdjointOperator::new(h.as_operator().add(&v.multiplication_operator())?)
}

fn check_positive_time(name: &'static str, t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {t}"),
        })
    }
}

/// `∫₀^t e^{-(t-s)(H+V)} V e^{-sH} ds` by Gauss–Legendre quadrature.
///
/// The integral equals `e^{-tH} - e^{-t(H+V)}`.
pub fn duhamel_difference(
    h: &SelfAdjointOperator,
    v: &MatrixPotential,
    t: f64,
    order: usize,
) -> Result<Operator> {
    check_positive_time("t", t)?;
    if order < 2 {
        return Err(Error::InvalidParameter {
            name: "quadrature_order",
            reason: format!("must be at least 2, got {order}"),
        });
    }
    let hv = perturbed(h, v)?;
    let vop = v.multiplication_operator();
    let mut acc = Operator::zero(h.space().clone());
    for (s, w) in gauss_legendre_on(order, 0.0, t) {
        let left = hv.function(|l| (-(t - s) * l).exp());
        let right = h.function(|l| (-s * l).exp());
        let term = left.compose(&vop)?.compose(&right)?;
        acc = acc.add(&term.scale(w))?;
    }
    Ok(acc)
}

/// `∫₀^{t₀} e^{-ρ₀ s} ds` with `ρ₀ = max(0, λ_min(H+V))`.
///
/// In finite dimensions `‖e^{-sA}‖_{2,2} = e^{-s λ_min(A)}`, so for `A ≥ 0`
/// this is the integral itself, not only a bound.
pub fn integral_22_bound(h_plus_v: &SelfAdjointOperator, t0: f64) -> f64 {
    exponential_integral(h_plus_v.min_eigenvalue().max(0.0), t0)
}

/// `∫₀^{t₀} ‖e^{-sA}‖_{2,2} ds` for any self-adjoint `A` (no clamping).
pub fn exact_integral_22(a: &SelfAdjointOperator, t0: f64) -> f64 {
    exponential_integral(a.min_eigenvalue(), t0)
}

/// `∫₀^{t₀} e^{-μ s} ds`.
pub fn exponential_integral(mu: f64, t0: f64) -> f64 {
    if mu == 0.0 {
        t0
    } else {
        -(-t0 * mu).exp_m1() / mu
    }
}

/// Both sides of the ultracontractive difference bound at `t₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedBound {
    /// `‖e^{-2t₀H} - e^{-2t₀(H+V)}‖_HS`.
    pub lhs: f64,
    pub rhs: f64,
    pub v_norm: f64,
    pub two_inf_h: f64,
    pub two_inf_hv: f64,
    pub integral: f64,
}

impl TruncatedBound {
    pub fn inequality(&self) -> Inequality {
        Inequality::new(self.lhs, self.rhs, BOUND_TOLERANCE)
    }
}

/// `‖e^{-2t₀H} - e^{-2t₀(H+V)}‖_HS ≤ √n ‖V‖_{2,HS} (‖e^{-t₀H}‖_{2,∞} + ‖e^{-t₀(H+V)}‖_{2,∞}) ∫₀^{t₀} ‖e^{-s(H+V)}‖_{2,2} ds`.
pub fn thm_truncated_bound(h: &SelfAdjointOperator, v: &MatrixPotential, t0: f64) -> Result<TruncatedBound> {
    check_positive_time("t0", t0)?;
    let h_min = h.min_eigenvalue();
    if h_min < 0.0 && !is_numerically_zero(h_min, h.spectral_radius()) {
        return Err(Error::NotBoundedBelow { min: h_min, bound: 0.0 });
    }
    let hv = perturbed(h, v)?;
    let lhs = h
        .semigroup(2.0 * t0)?
        .as_operator()
        .sub(hv.semigroup(2.0 * t0)?.as_operator())?
        .hs_norm();
    let n = v.space().fiber() as f64;
    let v_norm = hs_norm_potential(v);
    let two_inf_h = h.semigroup(t0)?.two_inf_norm();
    let two_inf_hv = hv.semigroup(t0)?.two_inf_norm();
    // V need not be nonnegative here, so the integral is taken at the true
    // bottom of the spectrum of H+V rather than clamped at zero.
    let integral = exact_integral_22(&hv, t0);
    Ok(TruncatedBound {
        lhs,
        rhs: n.sqrt() * v_norm * (two_inf_h + two_inf_hv) * integral,
        v_norm,
        two_inf_h,
        two_inf_hv,
        integral,
    })
}

/// The dominated-pair difference bounds and the two 2→∞ comparisons they rest on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UltraBound {
    pub lhs: f64,
    /// `2√n ‖V‖_{2,HS} ‖e^{-t₀H₀}‖_{2,∞} ∫₀^{t₀} ‖e^{-s(H+V)}‖_{2,2} ds`.
    pub rhs8: f64,
    /// `2√n ‖V‖_{2,HS} ‖e^{-t₀H₀}‖_{2,∞} t₀`.
    pub rhs80: f64,
    /// `‖e^{-t₀(H+V)}‖_{2,∞} ≤ ‖e^{-t₀H₀}‖_{2,∞}`.
    pub perturbed_two_inf: Inequality,
    /// `‖e^{-t₀H}‖_{2,∞} ≤ ‖e^{-t₀H₀}‖_{2,∞}`.
    pub unperturbed_two_inf: Inequality,
}

impl UltraBound {
    pub fn lhs_vs_rhs8(&self) -> Inequality {
        Inequality::new(self.lhs, self.rhs8, BOUND_TOLERANCE)
    }

    pub fn rhs8_vs_rhs80(&self) -> Inequality {
        Inequality::new(self.rhs8, self.rhs80, BOUND_TOLERANCE)
    }

    pub fn all_hold(&self) -> bool {
        self.lhs_vs_rhs8().holds()
            && self.rhs8_vs_rhs80().holds()
            && self.perturbed_two_inf.holds()
            && self.unperturbed_two_inf.holds()
    }
}

pub fn thm_ultra_bound(pair: &DominatedPair, v: &MatrixPotential, t0: f64) -> Result<UltraBound> {
    check_positive_time("t0", t0)?;
    if !pair.domination_verified() {
        return Err(Error::DominationNotVerified);
    }
    if !v.is_nonneg() {
        return Err(Error::InvalidParameter {
            name: "V",
            reason: "potential must be verified positive semidefinite".into(),
        });
    }
    let h = pair.h();
    let hv = perturbed(h, v)?;
    let lhs = h
        .semigroup(2.0 * t0)?
        .as_operator()
        .sub(hv.semigroup(2.0 * t0)?.as_operator())?
        .hs_norm();
    let n = v.space().fiber() as f64;
    let dominating = pair.h0().semigroup(t0)?.two_inf_norm();
    let prefactor = 2.0 * n.sqrt() * hs_norm_potential(v) * dominating;
    Ok(UltraBound {
        lhs,
        rhs8: prefactor * integral_22_bound(&hv, t0),
        rhs80: prefactor * t0,
        perturbed_two_inf: Inequality::new(hv.semigroup(t0)?.two_inf_norm(), dominating, BOUND_TOLERANCE),
        unperturbed_two_inf: Inequality::new(h.semigroup(t0)?.two_inf_norm(), dominating, BOUND_TOLERANCE),
    })
}
