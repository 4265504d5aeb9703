use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use betti_core::betti::{bound_main, prefactor_abstract, prefactor_main, BettiBoundInputs, PreparedSurface};
use betti_core::birman_schwinger::{bs_bound, kernel_identity_check};
use betti_core::geometry::{betti1_hodge, betti1_homology, build_dec, fixtures, gauss_bonnet_residual, gaussian_curvature, CurvatureSource};
use betti_core::measure::self_adjoint_spectrum;
use betti_core::perturbation::{hs_norm_potential, pointwise_diagonalize, truncate_potential};
use betti_core::report::{Check, RunReport};
use betti_core::sampling::{planted_pair, planted_self_adjoint, random_l2, random_symmetric_potential};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semigroup_spectrum_is_exponential(seed in any::<u64>(), t in 0.01f64..3.0) {
        let mut r = rng(seed);
        let space = random_l2(&mut r, 8, 3);
        let k = r.gen_range(0..=space.dim());
        let h = planted_self_adjoint(&mut r, &space, k, 10.0);
        let e = h.semigroup(t).unwrap();
        let got = sorted(self_adjoint_spectrum(e.as_operator()).unwrap());
        let want = sorted(h.eigenvalues().iter().map(|l| (-t * l).exp()).collect());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn semigroup_preserves_eigenspaces(seed in any::<u64>(), t in 0.05f64..2.0) {
        let mut r = rng(seed);
        let space = random_l2(&mut r, 8, 2);
        let k = r.gen_range(0..=space.dim());
        let h = planted_self_adjoint(&mut r, &space, k, 10.0);
        let e = h.semigroup(t).unwrap();
        prop_assert_eq!(h.kernel_dim(), k);
        prop_assert_eq!(e.eigenspace_dim(1.0), k);
        for &l in h.eigenvalues().iter() {
            prop_assert_eq!(h.eigenspace_dim(l), e.eigenspace_dim((-t * l).exp()));
        }
    }

    #[test]
    fn kernel_count_chain(seed in any::<u64>(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let pair = planted_pair(&mut rng(seed), 12, 3);
        let c = bs_bound(&pair, p).unwrap();
        prop_assert!(c.chain_holds(1e-9), "{c:?}");
        let ki = kernel_identity_check(&pair, pair.t0()).unwrap();
        prop_assert!(ki.holds(1e-7), "{ki:?}");
    }

    #[test]
    fn positive_part_calculus(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_l2(&mut r, 10, 4);
        let v = random_symmetric_potential(&mut r, &space, 2.0);
        let (plus, minus) = (v.positive_part(), v.negative_part());
        let diag = pointwise_diagonalize(&v);
        for x in 0..space.points() {
            let a = v.at(x);
            let scale = 1.0 + a.norm();
            prop_assert!((a - (plus.at(x) - minus.at(x))).norm() <= 1e-12 * scale);
            prop_assert!((plus.at(x) * minus.at(x)).norm() <= 1e-12 * scale * scale);
            for part in [plus.at(x), minus.at(x)] {
                let low = part.clone().symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, l| m.min(*l));
                prop_assert!(low >= -1e-12 * scale);
            }
            prop_assert!((a - diag.reconstruct(x)).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn truncation_norms_are_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let space = random_l2(&mut r, 10, 3);
        let v = random_symmetric_potential(&mut r, &space, 4.0);
        let full = hs_norm_potential(&v);
        let top = v.max_fiber_norm().ceil().max(1.0) as u32;
        let mut prev = 0.0;
        for k in 1..=top {
            let n = hs_norm_potential(&truncate_potential(&v, k).unwrap());
            prop_assert!(n >= prev);
            prev = n;
        }
        prop_assert_eq!(prev, full);
    }

    #[test]
    fn prefactor_order(rho0 in 1e-3f64..50.0, t0 in 1e-3f64..50.0, n in 1usize..5) {
        let main = prefactor_main(n, rho0, t0);
        let independent = 4.0 * n as f64 / (rho0 * rho0) / (1.0 + (-t0 * rho0).exp()).powi(2);
        prop_assert!((main - independent).abs() <= 1e-13 * independent);
        prop_assert!(main <= prefactor_abstract(n, rho0));
    }

    #[test]
    fn check_passes_iff_no_failures(obs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..20)) {
        let mut c = Check::new("c", "lhs <= rhs", 0.0);
        for &(l, r) in &obs {
            c.observe(l, r, l <= r);
        }
        let rec = c.finish();
        let failures = obs.iter().filter(|(l, r)| l > r).count();
        prop_assert_eq!(rec.failures, failures);
        prop_assert_eq!(rec.trials, obs.len());
        prop_assert_eq!(rec.pass, failures == 0);
    }

    #[test]
    fn report_floats_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..10)) {
        let mut c = Check::new("r", "lhs <= rhs", 0.0);
        for &x in &values {
            c.observe(x, x, true);
        }
        let report = RunReport::new(vec![], serde_json::json!({}), vec![c.finish()], 0.0).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        let lhs = parsed["records"][0]["lhs"].as_f64().unwrap();
        prop_assert_eq!(lhs, report.records[0].lhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn mesh_invariants(name in prop::sample::select(fixtures::BUILTIN_NAMES.to_vec()), level in 0u32..2) {
        let mesh = fixtures::builtin(name, level).unwrap();
        let dec = build_dec(&mesh).unwrap();
        prop_assert!(dec.is_chain_complex());
        let k = gaussian_curvature(&mesh, CurvatureSource::AngleDefect).unwrap();
        prop_assert!(gauss_bonnet_residual(&mesh, &k) <= 1e-9);
        let chi = mesh.euler_characteristic();
        let b1 = betti1_homology(&dec);
        prop_assert_eq!(betti1_hodge(&dec).unwrap(), b1);
        prop_assert_eq!(b1 as i64, 2 - chi);
        let ones = DMatrix::from_element(dec.vertex_count(), 1, 1.0);
        let l0 = dec.laplacian0();
        prop_assert!((l0.matrix() * ones).amax() <= 1e-12 * (1.0 + l0.matrix().amax()));
    }

    #[test]
    fn main_bound_is_sound(name in prop::sample::select(vec!["sphere", "flat-torus", "bumpy-sphere", "torus-rev"]), rho0 in 0.05f64..3.0, t0 in 0.1f64..5.0) {
        let s = PreparedSurface::new(name, fixtures::builtin(name, 0).unwrap(), CurvatureSource::AngleDefect).unwrap();
        let r = bound_main(&s, &BettiBoundInputs::new(rho0, t0, 2.0).unwrap()).unwrap();
        prop_assert!(r.b1_oracle as f64 <= r.bound_main * (1.0 + 1e-9), "{r:?}");
        if s.curvature.min() > rho0 {
            prop_assert_eq!(r.bound_main, 0.0);
        }
    }
}
