use monolab::field3d::*;
use monolab::Error;

fn small() -> SolveSpec {
    SolveSpec {
        r0: 1.0,
        r_box: 8.0,
        cells: 32,
        ..Default::default()
    }
}

#[test]
fn flat_exterior_matches_green_function() {
    let f = solve_conformal_laplace(
        &PhiField::Flat,
        SolveSpec {
            cells: 64,
            ..small()
        },
    )
    .unwrap();
    assert!(f.residual <= 1e-12);
    let n = f.n;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let x = f.position(i, j, k);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r > 1.0 {
                    worst = worst.max((f.u[f.index(i, j, k)] - (1.0 - 1.0 / r)).abs());
                }
            }
        }
    }
    assert!(worst < 0.03, "max error {worst}");
    let fit = far_field_fit(&f).unwrap();
    assert!((fit.capacity - 1.0).abs() < 0.02, "{fit:?}");
    assert_eq!(fit.mass, 0.0);
}

#[test]
fn discrete_maximum_principle() {
    for field in [
        PhiField::Flat,
        PhiField::Schwarzschild { mass: 1.0 },
        PhiField::two_shell_example(),
    ] {
        let f = solve_conformal_laplace(&field, small()).unwrap();
        let (lo, hi) = f.u_range();
        assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12, "{field:?}: [{lo}, {hi}]");
    }
}

#[test]
fn schwarzschild_capacity_converges() {
    let exact = 1.5;
    let err = |cells| {
        let spec = SolveSpec { cells, ..small() };
        let f = solve_conformal_laplace(&PhiField::Schwarzschild { mass: 1.0 }, spec).unwrap();
        (far_field_fit(&f).unwrap().capacity - exact).abs()
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine < coarse / 1.8, "{coarse} -> {fine}");
    assert!(fine < 0.02 * exact);
}

#[test]
fn two_shell_mass_is_analytic() {
    let field = PhiField::two_shell_example();
    assert_eq!(field.mass(), 2.0);
    let f = solve_conformal_laplace(&field, small()).unwrap();
    let fit = far_field_fit(&f).unwrap();
    assert_eq!(fit.mass, 2.0);
    assert!(fit.ratio() < 2.0);
}

#[test]
fn excision_must_span_two_cells() {
    let spec = SolveSpec {
        cells: 16,
        ..small()
    };
    assert!(matches!(
        solve_conformal_laplace(&PhiField::Flat, spec),
        Err(Error::BadExcision { .. })
    ));
}

#[test]
fn solve_is_independent_of_thread_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| solve_conformal_laplace(&PhiField::two_shell_example(), small()).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.iterations, b.iterations);
    assert!(a
        .u
        .iter()
        .zip(&b.u)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn snapshot_round_trip() {
    let f = solve_conformal_laplace(&PhiField::two_shell_example(), small()).unwrap();
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &f).unwrap();
    assert_eq!(buf.len(), 48 + 16 * f.n.pow(3));
    let g = read_snapshot(buf.as_slice()).unwrap();
    assert_eq!((g.n, g.h, g.r0, g.r_box), (f.n, f.h, f.r0, f.r_box));
    assert_eq!(g.phi, f.phi);
    assert_eq!(g.u, f.u);
    assert!(g.source.is_none());

    // Without the analytic source the mass comes from the tail of phi.
    let fit = far_field_fit(&g).unwrap();
    assert!((fit.mass - 2.0).abs() < 0.05, "{fit:?}");

    let mut long = buf.clone();
    long.push(0);
    assert!(matches!(
        read_snapshot(long.as_slice()),
        Err(Error::Snapshot(_))
    ));
    assert!(matches!(
        read_snapshot(&buf[..buf.len() - 8]),
        Err(Error::Snapshot(_))
    ));
}

#[test]
fn flat_coarea_levels() {
    // Levels at least two cells outside the excised sphere.
    let f = solve_conformal_laplace(&PhiField::Flat, SolveSpec::default()).unwrap();
    let cap = far_field_fit(&f).unwrap().capacity;
    let ts = [0.4, 0.5, 0.6, 0.7, 0.8];
    for s in coarea_l(&f, &ts, CoareaSpec::default()) {
        let exact = (1.0 - s.t).powi(2);
        assert!(
            (s.l / exact - 1.0).abs() < 0.05,
            "t={} L={} exact={exact}",
            s.t,
            s.l
        );
        assert!(
            (s.flux / cap - 1.0).abs() < 0.01,
            "t={} flux={} capacity={cap}",
            s.t,
            s.flux
        );
        assert!(s.regular);
        let r = cap / (1.0 - s.t);
        assert!(
            (s.area / (4.0 * std::f64::consts::PI * r * r) - 1.0).abs() < 0.05,
            "area at t={}",
            s.t
        );
        assert!(
            (s.mean_radius / r - 1.0).abs() < 0.05,
            "radius at t={}",
            s.t
        );
    }
}

#[test]
fn coarea_flags_critical_levels() {
    let f = solve_conformal_laplace(&PhiField::Flat, small()).unwrap();
    let spec = CoareaSpec {
        gradient_floor: 1e3,
        ..Default::default()
    };
    assert!(coarea_l(&f, &[0.5], spec).iter().all(|s| !s.regular));
}

#[test]
fn two_shell_passes_field_checks() {
    let f = solve_conformal_laplace(&PhiField::two_shell_example(), SolveSpec::default()).unwrap();
    let check = check_field(
        &f,
        &default_field_t_grid(),
        CoareaSpec::default(),
        DEFAULT_TOL_ESTIMATOR,
    )
    .unwrap();
    assert!(check.fit.ratio() < 2.0);
    assert!(check.passed(), "{:?}", check.results("two_shell"));
    assert!(check.non_regular.is_empty());
}
