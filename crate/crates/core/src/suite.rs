//! Seeded randomized verification of the operator inequalities.
//!
//! Each family draws its instances from a ChaCha stream keyed by
//! `(seed, family, trial)`, so results do not depend on scheduling. Trials
//! run in parallel and are folded into [`Record`]s in trial order.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::betti::{prefactor_abstract, prefactor_main, SURFACE_DIM};
use crate::birman_schwinger::{bs_bound, kernel_identity_check, weyl_inequality_check, OperatorPair};
use crate::error::{Error, Result};
use crate::measure::{L2Space, Operator, SelfAdjointOperator, WeightedSpace};
use crate::perturbation::{
    domination_check_with_slack, duhamel_difference, exact_integral_22, hs_norm_potential, prop26_bound_check,
    thm_truncated_bound, thm_ultra_bound, truncate_potential, MatrixPotential,
};
use crate::quadrature;
use crate::report::{Check, Record, RunReport};
use crate::sampling;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_MAX_POINTS: usize = 40;
pub const DEFAULT_MAX_FIBER: usize = 4;
pub const DEFAULT_MESH_SUBDIVISION: u32 = 2;
pub const MAX_TOLERANCE: f64 = 1e-3;

/// Everything that determines a run. Output paths are not part of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_points: usize,
    pub max_fiber: usize,
    pub mesh_subdivision: u32,
    pub quadrature_order: usize,
    /// Replaces every family's default slack when set.
    pub tolerance: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            max_points: DEFAULT_MAX_POINTS,
            max_fiber: DEFAULT_MAX_FIBER,
            mesh_subdivision: DEFAULT_MESH_SUBDIVISION,
            quadrature_order: crate::perturbation::DEFAULT_QUADRATURE_ORDER,
            tolerance: None,
        }
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1".into()));
        }
        if self.max_points == 0 {
            return Err(invalid("max_points", "must be at least 1".into()));
        }
        if self.max_fiber == 0 {
            return Err(invalid("max_fiber", "must be at least 1".into()));
        }
        if self.quadrature_order < 2 {
            return Err(invalid("quadrature_order", format!("must be at least 2, got {}", self.quadrature_order)));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t <= MAX_TOLERANCE) {
                return Err(invalid("tolerance", format!("must lie in (0, {MAX_TOLERANCE:e}], got {t:e}")));
            }
        }
        Ok(())
    }

    /// `default`, unless an override is set.
    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    fn points(&self, cap: usize) -> usize {
        self.max_points.min(cap)
    }

    fn fiber(&self, cap: usize) -> usize {
        self.max_fiber.min(cap)
    }
}

/// Default slack per family.
pub mod tolerances {
    pub const CHAIN: f64 = 1e-9;
    pub const ANGLE: f64 = 1e-7;
    pub const WEYL: f64 = 1e-9;
    pub const BOUND: f64 = 1e-9;
    pub const EQUALITY: f64 = 1e-14;
    pub const DUHAMEL: f64 = 1e-6;
    pub const INTEGRAL: f64 = 1e-10;
    pub const DOMINATION: f64 = 1e-10;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    BirmanSchwinger,
    KernelIdentity,
    Weyl,
    HsFactorization,
    Duhamel,
    TruncatedBound,
    UltraBound,
    Domination,
    Truncation,
    Prefactor,
}

impl Family {
    pub const ABSTRACT: [Family; 10] = [
        Family::BirmanSchwinger,
        Family::KernelIdentity,
        Family::Weyl,
        Family::HsFactorization,
        Family::Duhamel,
        Family::TruncatedBound,
        Family::UltraBound,
        Family::Domination,
        Family::Truncation,
        Family::Prefactor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::BirmanSchwinger => "birman-schwinger",
            Family::KernelIdentity => "kernel-identity",
            Family::Weyl => "weyl",
            Family::HsFactorization => "hs-factorization",
            Family::Duhamel => "duhamel",
            Family::TruncatedBound => "truncated-bound",
            Family::UltraBound => "ultra-bound",
            Family::Domination => "domination",
            Family::Truncation => "truncation",
            Family::Prefactor => "prefactor",
        }
    }

    fn stream(self) -> u64 {
        Family::ABSTRACT.iter().position(|&f| f == self).expect("listed") as u64 + 1
    }

    /// `(suffix, formula, default slack)` per check, in output order.
    fn checks(self) -> &'static [(&'static str, &'static str, f64)] {
        use tolerances::*;
        match self {
            Family::BirmanSchwinger => &[
                ("kernel-vs-sharp.p1", "dim ker H <= ||(I - e^{-t0 H'})^{-1} D_t0||_{S_1}", CHAIN),
                ("sharp-vs-crude.p1", "||(I - e^{-t0 H'})^{-1} D_t0||_{S_1} <= (1 - e^{-rho0 t0})^{-1} ||D_t0||_{S_1}", CHAIN),
                ("kernel-vs-sharp.p2", "dim ker H <= ||(I - e^{-t0 H'})^{-1} D_t0||_{S_2}^2", CHAIN),
                ("sharp-vs-crude.p2", "||(I - e^{-t0 H'})^{-1} D_t0||_{S_2}^2 <= (1 - e^{-rho0 t0})^{-2} ||D_t0||_{S_2}^2", CHAIN),
                ("scalar-saturation", "H = 0, H' = rho0 on one point: crude bound = dim ker H = 1", 0.0),
            ],
            Family::KernelIdentity => &[
                ("principal-angle", "sin angle(ker H, ker(K_t - I)) <= tol", ANGLE),
                ("dimension", "dim ker(K_t - I) = dim ker H", 0.0),
            ],
            Family::Weyl => &[
                ("p1", "sum |lambda_n(K)| <= sum s_n(K)", WEYL),
                ("p2", "sum |lambda_n(K)|^2 <= sum s_n(K)^2", WEYL),
            ],
            Family::HsFactorization => &[
                ("bound", "||V T||_HS <= sqrt(n) ||V||_{2,HS} ||T||_{2,inf}", BOUND),
                ("scalar-equality", "one point, n = 1: ||V T||_HS = ||V||_{2,HS} ||T||_{2,inf}", EQUALITY),
            ],
            Family::Duhamel => &[(
                "quadrature-error",
                "||int_0^t e^{-(t-s)(H+V)} V e^{-sH} ds - (e^{-tH} - e^{-t(H+V)})||_HS <= tol",
                DUHAMEL,
            )],
            Family::TruncatedBound => &[
                (
                    "bound",
                    "||e^{-2t0 H} - e^{-2t0(H+V)}||_HS <= sqrt(n) ||V||_{2,HS} (||e^{-t0 H}||_{2,inf} + ||e^{-t0(H+V)}||_{2,inf}) int_0^t0 ||e^{-s(H+V)}||_{2,2} ds",
                    BOUND,
                ),
                ("integral-closed-form", "int_0^t0 e^{-mu s} ds = (1 - e^{-mu t0}) / mu", INTEGRAL),
            ],
            Family::UltraBound => &[
                (
                    "lhs-vs-integral-form",
                    "||e^{-2t0 H} - e^{-2t0(H+V)}||_HS <= 2 sqrt(n) ||V||_{2,HS} ||e^{-t0 H0}||_{2,inf} int_0^t0 ||e^{-s(H+V)}||_{2,2} ds",
                    BOUND,
                ),
                (
                    "integral-form-vs-linear-form",
                    "2 sqrt(n) ||V||_{2,HS} ||e^{-t0 H0}||_{2,inf} int_0^t0 ||e^{-s(H+V)}||_{2,2} ds <= 2 sqrt(n) ||V||_{2,HS} ||e^{-t0 H0}||_{2,inf} t0",
                    BOUND,
                ),
                ("perturbed-two-inf", "||e^{-t0(H+V)}||_{2,inf} <= ||e^{-t0 H0}||_{2,inf}", BOUND),
                ("unperturbed-two-inf", "||e^{-t0 H}||_{2,inf} <= ||e^{-t0 H0}||_{2,inf}", BOUND),
            ],
            Family::Domination => &[("pointwise", "|e^{-tH} f|(x) <= e^{-tH0} |f| (x)", DOMINATION)],
            Family::Truncation => &[
                ("saturation", "||e^{-2tH_V} - e^{-2tH_{V^(k)}}||_HS = 0 for k >= max ||V(x)||", 0.0),
                ("monotone", "||V^(k)||_{2,HS} <= ||V^(k+1)||_{2,HS}", 0.0),
                ("reaches-full", "||V^(k)||_{2,HS} = ||V||_{2,HS} for k >= max ||V(x)||", 0.0),
            ],
            Family::Prefactor => &[("order", "4n / (rho0 (1 + e^{-t0 rho0}))^2 <= 4n / rho0^2", 0.0)],
        }
    }
}

/// RNG for one trial of one family.
pub fn trial_rng(seed: u64, family: Family, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((family.stream() << 32) | trial as u64);
    rng
}

/// One instance outcome for check number `check` of a family.
#[derive(Debug, Clone, Copy)]
struct Observation {
    check: usize,
    lhs: f64,
    rhs: f64,
    pass: bool,
}

struct Trial<'a> {
    cfg: &'a SuiteConfig,
    family: Family,
    out: Vec<Observation>,
}

impl Trial<'_> {
    fn tol(&self, check: usize) -> f64 {
        let default = self.family.checks()[check].2;
        if default == 0.0 {
            0.0
        } else {
            self.cfg.tolerance_or(default)
        }
    }

    fn push(&mut self, check: usize, lhs: f64, rhs: f64, pass: bool) {
        self.out.push(Observation { check, lhs, rhs, pass });
    }

    /// `lhs ≤ rhs + tol · |rhs|`.
    fn relative(&mut self, check: usize, lhs: f64, rhs: f64) {
        let pass = lhs <= rhs + self.tol(check) * rhs.abs();
        self.push(check, lhs, rhs, pass);
    }

    /// `lhs ≤ tol`, with the tolerance as right-hand side.
    fn absolute(&mut self, check: usize, lhs: f64) {
        let rhs = self.tol(check);
        self.push(check, lhs, rhs, lhs <= rhs);
    }
}

fn perturbed(h: &SelfAdjointOperator, v: &MatrixPotential) -> Result<SelfAdjointOperator> {
    SelfAdjointOperator::new(h.as_operator().add(&v.multiplication_operator())?)
}

fn birman_schwinger_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let pair = sampling::planted_pair(rng, t.cfg.points(40), t.cfg.fiber(4));
    for (k, p) in [1.0, 2.0].into_iter().enumerate() {
        let c = bs_bound(&pair, p)?;
        t.relative(2 * k, c.kernel_dim as f64, c.bound_sharp);
        t.relative(2 * k + 1, c.bound_sharp, c.bound_crude);
    }
    let sp = L2Space::scalar(Arc::new(WeightedSpace::new(vec![1.0])?));
    let rho0 = rng.gen_range(0.05..5.0);
    let t0 = rng.gen_range(0.05..5.0);
    let p = if rng.gen_bool(0.5) { 1.0 } else { 2.0 };
    let one = |x: f64| SelfAdjointOperator::new(Operator::new(sp.clone(), DMatrix::from_element(1, 1, x))?);
    let c = bs_bound(&OperatorPair::new(one(0.0)?, one(rho0)?, rho0, t0)?, p)?;
    t.push(4, c.bound_crude, c.kernel_dim as f64, c.bound_crude == 1.0 && c.kernel_dim == 1);
    Ok(())
}

fn kernel_identity_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let pair = sampling::planted_pair(rng, t.cfg.points(40), t.cfg.fiber(4));
    let id = kernel_identity_check(&pair, pair.t0())?;
    let sine = id.max_angle_sine.unwrap_or(f64::INFINITY);
    let tol = t.tol(0);
    t.push(0, sine, tol, id.holds(tol));
    t.push(1, id.fixed_point_dim as f64, id.kernel_dim as f64, id.fixed_point_dim == id.kernel_dim);
    Ok(())
}

fn weyl_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let k = sampling::random_operator(rng, t.cfg.points(40), t.cfg.fiber(4));
    for (i, p) in [1.0, 2.0].into_iter().enumerate() {
        let w = weyl_inequality_check(&k, p)?;
        t.relative(i, w.eigen_sum, w.singular_sum);
    }
    Ok(())
}

fn hs_factorization_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let sp = sampling::random_l2(rng, t.cfg.points(30), t.cfg.fiber(3));
    let v = sampling::random_symmetric_potential(rng, &sp, 2.0);
    let op = sampling::random_operator_on(rng, &sp);
    let check = prop26_bound_check(&v, &op)?;
    t.relative(0, check.lhs, check.rhs);

    let sp = L2Space::scalar(Arc::new(WeightedSpace::new(vec![rng.gen_range(0.1..10.0)])?));
    let v = MatrixPotential::new(sp.clone(), vec![DMatrix::from_element(1, 1, rng.gen_range(0.1..3.0))])?;
    let op = Operator::new(sp, DMatrix::from_element(1, 1, rng.gen_range(-2.0..2.0)))?;
    let check = prop26_bound_check(&v, &op)?;
    let pass = (check.lhs - check.rhs).abs() <= t.tol(1) * check.rhs;
    t.push(1, check.lhs, check.rhs, pass);
    Ok(())
}

fn duhamel_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let sp = sampling::random_l2(rng, t.cfg.points(40), t.cfg.fiber(4));
    let k = rng.gen_range(0..3usize.min(sp.dim() + 1));
    // σ(H) ⊂ [0, 8] and σ(V(x)) ⊂ [-2, 2], so both spectra lie in [-2, 10].
    let h = sampling::planted_self_adjoint(rng, &sp, k, 8.0);
    let v = sampling::random_potential(rng, &sp, -2.0, 2.0);
    let time = rng.gen_range(0.1..=1.0);
    let d = duhamel_difference(&h, &v, time, t.cfg.quadrature_order)?;
    let direct = h.semigroup(time)?.as_operator().sub(perturbed(&h, &v)?.semigroup(time)?.as_operator())?;
    t.absolute(0, d.sub(&direct)?.hs_norm());
    Ok(())
}

fn truncated_bound_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let sp = sampling::random_l2(rng, t.cfg.points(25), t.cfg.fiber(3));
    let k = rng.gen_range(0..3usize.min(sp.dim() + 1));
    let h = sampling::planted_self_adjoint(rng, &sp, k, 10.0);
    let v = sampling::random_symmetric_potential(rng, &sp, 3.0);
    let t0 = rng.gen_range(0.1..2.0);
    let b = thm_truncated_bound(&h, &v, t0)?;
    t.relative(0, b.lhs, b.rhs);

    let hv = perturbed(&h, &v)?;
    let mu = hv.min_eigenvalue();
    let closed = exact_integral_22(&hv, t0);
    let quad = quadrature::integrate(64, 0.0, t0, |s| (-s * mu).exp());
    let rhs = t.tol(1) * quad.abs();
    t.push(1, (closed - quad).abs(), rhs, (closed - quad).abs() <= rhs);
    Ok(())
}

fn ultra_bound_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let fiber = rng.gen_range(1..=t.cfg.fiber(3));
    let pair = sampling::connection_laplacian(rng, t.cfg.points(12), fiber);
    let fs = sampling::random_functions(rng, pair.h().space(), 10);
    let (pair, _) = pair.verify(&[0.1, 1.0, 10.0], &fs)?;
    let v = sampling::random_potential(rng, pair.h().space(), 0.2, 3.0);
    let t0 = rng.gen_range(0.2..2.0);
    let b = thm_ultra_bound(&pair, &v, t0)?;
    for (i, ineq) in [b.lhs_vs_rhs8(), b.rhs8_vs_rhs80(), b.perturbed_two_inf, b.unperturbed_two_inf]
        .into_iter()
        .enumerate()
    {
        t.relative(i, ineq.lhs, ineq.rhs);
    }
    Ok(())
}

fn domination_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let fiber = rng.gen_range(1..=t.cfg.fiber(4));
    let pair = sampling::connection_laplacian(rng, t.cfg.points(20), fiber);
    let fs = sampling::random_functions(rng, pair.h().space(), 100);
    let report = domination_check_with_slack(&pair, &[0.1, 1.0, 10.0], &fs, t.tol(0))?;
    t.push(0, report.worst.0, report.worst.1, report.holds);
    Ok(())
}

fn truncation_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let sp = sampling::random_l2(rng, t.cfg.points(12), t.cfg.fiber(3));
    let k = rng.gen_range(0..2usize.min(sp.dim() + 1));
    let h = sampling::planted_self_adjoint(rng, &sp, k, 5.0);
    let v = sampling::random_potential(rng, &sp, 0.0, 6.5);
    let kmax = (v.max_fiber_norm().ceil() as u32).max(1);
    let time = rng.gen_range(0.1..1.0);
    let full = perturbed(&h, &v)?.semigroup(2.0 * time)?;
    let trunc = perturbed(&h, &truncate_potential(&v, kmax)?)?.semigroup(2.0 * time)?;
    let dist = full.as_operator().sub(trunc.as_operator())?.hs_norm();
    t.push(0, dist, 0.0, dist == 0.0);

    let norms = (1..=kmax + 1)
        .map(|k| truncate_potential(&v, k).map(|vk| hs_norm_potential(&vk)))
        .collect::<Result<Vec<_>>>()?;
    for w in norms.windows(2) {
        t.push(1, w[0], w[1], w[0] <= w[1]);
    }
    let total = hs_norm_potential(&v);
    let last = norms[kmax as usize - 1];
    t.push(2, last, total, last == total);
    Ok(())
}

fn prefactor_trial(t: &mut Trial, rng: &mut ChaCha8Rng) -> Result<()> {
    let rho0 = 10f64.powf(rng.gen_range(-3.0..3.0));
    let t0 = 10f64.powf(rng.gen_range(-3.0..3.0));
    let lhs = prefactor_main(SURFACE_DIM, rho0, t0);
    let rhs = prefactor_abstract(SURFACE_DIM, rho0);
    t.push(0, lhs, rhs, lhs <= rhs);
    Ok(())
}

/// Runs `trials` instances of one family and aggregates them per check.
pub fn run_family(cfg: &SuiteConfig, family: Family, trials: usize) -> Result<Vec<Record>> {
    let body: fn(&mut Trial, &mut ChaCha8Rng) -> Result<()> = match family {
        Family::BirmanSchwinger => birman_schwinger_trial,
        Family::KernelIdentity => kernel_identity_trial,
        Family::Weyl => weyl_trial,
        Family::HsFactorization => hs_factorization_trial,
        Family::Duhamel => duhamel_trial,
        Family::TruncatedBound => truncated_bound_trial,
        Family::UltraBound => ultra_bound_trial,
        Family::Domination => domination_trial,
        Family::Truncation => truncation_trial,
        Family::Prefactor => prefactor_trial,
    };
    let observations = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, family, trial);
            let mut t = Trial {
                cfg,
                family,
                out: Vec::new(),
            };
            body(&mut t, &mut rng)?;
            Ok(t.out)
        })
        .collect::<Result<Vec<_>>>()?;

    let probe = Trial {
        cfg,
        family,
        out: Vec::new(),
    };
    let mut checks: Vec<Check> = family
        .checks()
        .iter()
        .enumerate()
        .map(|(i, (suffix, formula, _))| Check::new(format!("{}.{suffix}", family.name()), *formula, probe.tol(i)))
        .collect();
    for o in observations.into_iter().flatten() {
        checks[o.check].observe(o.lhs, o.rhs, o.pass);
    }
    Ok(checks.into_iter().map(Check::finish).collect())
}

/// All operator-level families with `cfg.trials` instances each.
pub fn run_verify_abstract(cfg: &SuiteConfig, command: Vec<String>) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut records = Vec::new();
    for family in Family::ABSTRACT {
        records.extend(run_family(cfg, family, cfg.trials)?);
    }
    RunReport::new(command, cfg, records, start.elapsed().as_secs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            trials: 3,
            max_points: 8,
            max_fiber: 2,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(small().validate().is_ok());
        for bad in [
            SuiteConfig { trials: 0, ..small() },
            SuiteConfig { tolerance: Some(0.0), ..small() },
            SuiteConfig { tolerance: Some(2e-3), ..small() },
            SuiteConfig { quadrature_order: 1, ..small() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        assert!(SuiteConfig { tolerance: Some(1e-3), ..small() }.validate().is_ok());
    }

    #[test]
    fn streams_are_distinct() {
        let a: u64 = trial_rng(1, Family::Weyl, 0).gen();
        let b: u64 = trial_rng(1, Family::Weyl, 1).gen();
        let c: u64 = trial_rng(1, Family::Duhamel, 0).gen();
        let d: u64 = trial_rng(2, Family::Weyl, 0).gen();
        assert_eq!(a, trial_rng(1, Family::Weyl, 0).gen::<u64>());
        assert!(a != b && a != c && a != d);
    }

    #[test]
    fn every_family_passes_on_small_instances() {
        let cfg = small();
        for family in Family::ABSTRACT {
            let records = run_family(&cfg, family, 3).unwrap();
            assert_eq!(records.len(), family.checks().len());
            for r in records {
                assert!(r.pass, "{r:?}");
                assert!(r.name.starts_with(family.name()));
            }
        }
    }

    #[test]
    fn single_trial_report() {
        let cfg = SuiteConfig { trials: 1, ..SuiteConfig::default() };
        let r = run_verify_abstract(&cfg, vec!["verify-abstract".into()]).unwrap();
        assert!(r.pass(), "{}", r.to_json());
        assert!(r.records.iter().all(|r| r.trials >= 1));
    }

    #[test]
    fn tiny_tolerance_forces_failures() {
        let cfg = SuiteConfig {
            tolerance: Some(1e-30),
            ..small()
        };
        let r = run_verify_abstract(&cfg, vec![]).unwrap();
        assert!(!r.pass());
        let duhamel = r.records.iter().find(|r| r.name.starts_with("duhamel")).unwrap();
        assert!(!duhamel.pass && duhamel.margin < 0.0);
    }
}
