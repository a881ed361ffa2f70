use monolab::field3d::{read_snapshot, write_snapshot, ScalarField3D};
use monolab::harmonic::{solve_radial, DEFAULT_EPS_QUAD};
use monolab::monotone::{
    b_k_of, default_t_grid, k0_and_psi, q_of, s_of, verify_s_monotone, Branch, KOptimum,
};
use monolab::radial::{
    random_admissible, scalar_curvature_check, DomainKind, GridSpec, RandomMetricSpec,
};
use proptest::prelude::*;

fn level() -> impl Strategy<Value = (f64, f64)> {
    (0.001f64..0.999, 1e-4f64..4.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalized_b_k_never_exceeds_s((t, l) in level(), log_k in -6.0f64..8.0) {
        let k = 10f64.powf(log_k);
        let (s, _) = s_of(l, t).unwrap();
        let b = b_k_of(l, t, k).unwrap();
        prop_assert!(b.normalized <= s + 1e-9 * (1.0 + s.abs()), "k={k}: {} > {s}", b.normalized);
        prop_assert!((b.normalized - b.normalized_direct).abs() <= 1e-9 * (1.0 + b.normalized.abs()));
    }

    #[test]
    fn finite_optimum_attains_s((t, l) in level()) {
        let (s, branch) = s_of(l, t).unwrap();
        let star = k0_and_psi(l, t).unwrap();
        prop_assert!((star.s_via_sup - s).abs() <= 1e-9 * (1.0 + s.abs()));
        match (branch, star.k0) {
            (Branch::CapacityBranch, KOptimum::Finite(k)) if k.is_finite() => {
                let b = b_k_of(l, t, k).unwrap().normalized;
                prop_assert!((b - s).abs() <= 1e-9 * (1.0 + s.abs()));
            }
            (Branch::MassBranch, KOptimum::Unbounded) => {
                prop_assert!((s - q_of(l, t).unwrap()).abs() <= 1e-12 * (1.0 + s.abs()));
            }
            (Branch::CapacityBranch, _) => {}
            (b, k) => prop_assert!(false, "{b:?} with {k:?}"),
        }
    }

    #[test]
    fn branches_meet_continuously(t in 0.01f64..0.99) {
        let p = t * (1.0 - t);
        let l = p * p;
        let (below, _) = s_of(l * (1.0 - 1e-12), t).unwrap();
        let (above, _) = s_of(l * (1.0 + 1e-12), t).unwrap();
        prop_assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn snapshot_round_trips(phi in prop::collection::vec(0.5f64..3.0, 27), u in prop::collection::vec(0.0f64..1.0, 27)) {
        let f = ScalarField3D { n: 3, h: 1.0, r0: 0.5, r_box: 1.0, phi, u, residual: 0.0, iterations: 0, source: None };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        let g = read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(g.phi, f.phi);
        prop_assert_eq!(g.u, f.u);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_exterior_metrics_are_admissible_and_monotone(
        seed in any::<u64>(),
        shells in 1usize..6,
        budget in 0.1f64..8.0,
        smoothing in any::<bool>(),
    ) {
        let spec = RandomMetricSpec {
            seed,
            shell_count: shells,
            mass_budget: budget,
            radius_range: (1.1, 8.0),
            domain: DomainKind::ExteriorOfSphere { inner_radius: 1.0 },
            smoothing,
        };
        let m = random_admissible(&spec).unwrap();
        prop_assert!(scalar_curvature_check(&m, GridSpec::default()).pass);
        let p = solve_radial(&m, DEFAULT_EPS_QUAD).unwrap();
        prop_assert!(p.capacity() > 0.0);
        let curve = verify_s_monotone(&p, &default_t_grid(), 1e-7).unwrap();
        prop_assert!(curve.passed(), "{:?}", curve.violations);
    }
}
