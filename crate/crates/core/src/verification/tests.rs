use super::*;
use crate::maps::{identity, rotation};
use proptest::prelude::*;

fn defaults() -> Construction {
    Construction::new(Params::default()).unwrap()
}

/// `ρ′` written out from its definition, independent of the profile code.
fn slope_oracle(p: &Params, r: f64) -> f64 {
    let u = (r - 0.5 * p.r2()) / (7.0 * p.r2() / 18.0);
    let b = if u.abs() < 1.0 { (1.0 - 1.0 / (1.0 - u * u)).exp() } else { 0.0 };
    p.delta + (PI / (2.0 * f64::from(p.k)) - p.delta) * b
}

struct Scale(f64);

impl SelfMap for Scale {
    fn info(&self) -> maps::MapInfo {
        maps::MapInfo { name: "scale".into(), params: None }
    }
    fn dim(&self) -> usize {
        2
    }
    fn radius(&self) -> f64 {
        1.0
    }
    fn apply(&self, z: &BallPoint) -> Result<BallPoint, MapError> {
        Ok(BallPoint::new(z.coords.iter().map(|c| c * self.0).collect()))
    }
}

#[test]
fn identity_and_rotation_are_symplectic() {
    let z = BallPoint::from_reals(&[0.1, -0.3, 0.2, 0.4]);
    assert!(symplectic_defect(identity(2, 1.0).as_ref(), &z, 1e-5).unwrap() <= 1e-10);
    let d = PI / 60.0;
    let rot = rotation(vec![9.0 * d / 5.0, 2.0 * d], 1.0);
    assert!(symplectic_defect(rot.as_ref(), &z, 1e-5).unwrap() <= 1e-10);
}

#[test]
fn scaling_is_detected() {
    let z = BallPoint::from_reals(&[0.1, -0.3, 0.2, 0.4]);
    let d = symplectic_defect(&Scale(2.0), &z, 1e-5).unwrap();
    assert!((d - 3.0).abs() < 1e-8, "{d}");
}

#[test]
fn stencil_outside_ball_is_an_error() {
    let z = BallPoint::from_reals(&[0.0, 0.0, 1.0 - 1e-6, 0.0]);
    assert!(matches!(symplectic_defect(identity(2, 1.0).as_ref(), &z, 1e-5), Err(MapError::Escape { .. })));
}

#[test]
fn symplectic_checks_on_defaults() {
    let c = Arc::new(defaults());
    for (name, map) in [
        ("h", maps::flow_h(&c, 1.0)),
        ("f", maps::flow_f(&c, 1.0)),
        ("phi", maps::phi(&c)),
    ] {
        let r = check_symplectic(name, map.as_ref(), 50, 1e-5, 1e-5, 3);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.samples + r.skipped, 50);
    }
}

#[test]
fn boundary_examples() {
    let c = defaults();
    let p = *c.params();
    let z = BallPoint::from_reals(&[0.0, 0.0, 0.97, 0.0]);
    assert!(boundary_admissible(&p, &z).is_ok());
    let w = c.phi(&z).unwrap();
    let expected = Complex64::from_polar(0.97, 2.0 * p.delta);
    assert!((w.last() - expected).norm() <= 1e-15);
    assert!(w.coords[0].norm() == 0.0);

    let bad = BallPoint::new(vec![Complex64::new(0.97, 0.0), Complex64::from_polar(0.1, 1.0)]);
    assert!(boundary_admissible(&p, &bad).is_err());
}

#[test]
fn boundary_rigidity_passes() {
    let r = check_boundary_rigidity(&defaults(), 100, 11);
    assert!(r.pass, "{r:?}");
    assert_eq!(r.samples, 100);
}

#[test]
fn rotation_step_examples() {
    let c = defaults();
    let p = *c.params();
    let bound = PI / 3.0;

    let peak = rotation_step(&c, &plane_point(2, 0.5, 0.0)).unwrap();
    assert!(peak.equality);
    assert!((peak.advance - bound).abs() <= 1e-15);
    assert_eq!(peak.defect, 0.0);

    let off = rotation_step(&c, &plane_point(2, 0.4, PI / 6.0)).unwrap();
    let ell = 0.4 - 2.0 * p.epsilon * 3.0;
    assert!((off.ell - ell).abs() < 1e-15);
    assert!((off.advance - 2.0 * slope_oracle(&p, ell)).abs() < 1e-12);
    assert!(off.advance > 0.0 && off.advance < bound && !off.equality);

    let edge = rotation_step(&c, &plane_point(2, 1.0 / 9.0, 0.0)).unwrap();
    assert!((edge.advance - 2.0 * p.delta).abs() < 1e-15);
    assert_eq!(edge.defect, 0.0);
}

#[test]
fn rotation_step_check_finds_peak() {
    let r = check_rotation_step(&defaults(), 1000, 5);
    assert!(r.pass, "{r:?}");
    assert_eq!(r.samples, 1003);
    assert!(r.notes[0].starts_with("1 "), "{:?}", r.notes);
}

#[test]
fn closed_form_and_conservation() {
    let c = defaults();
    assert!(check_closed_form(&c, 100, 1).pass);
    assert!(check_conservation(&c, 100, 1).pass);
}

#[test]
fn coarse_integrator_fails_conservation() {
    let c = Construction::new(Params { integrator_step: 0.5, ..Params::default() }).unwrap();
    let r = check_conservation(&c, 400, 1);
    assert!(!r.pass);
    assert!(r.max_defect > 1e-6, "{r:?}");
    assert!(r.witness.is_some());
}

#[test]
fn circle_rotation_is_pi_over_k() {
    for k in [2, 3, 5] {
        let c = Construction::new(Params::with_k(k)).unwrap();
        let r = check_circle_rotation(&c, 100, 2);
        assert!(r.pass && r.max_defect <= 1e-12, "{r:?}");
    }
}

#[test]
fn fixed_set_distance() {
    let r = 1.0;
    assert_eq!(distance_to_unperturbed_fixed_set(&BallPoint::origin(2), r), 0.0);
    let on_c = plane_point(2, 0.5, 1.3);
    assert!(distance_to_unperturbed_fixed_set(&on_c, r) < 1e-15);
    let off = BallPoint::new(vec![Complex64::new(0.01, 0.0), on_c.last()]);
    assert!((distance_to_unperturbed_fixed_set(&off, r) - 0.01).abs() < 1e-15);
}

#[test]
fn unperturbed_fixed_set_in_one_dimension() {
    let p = Params { n: 1, ..Params::default() };
    let c = Arc::new(Construction::new(p).unwrap());
    let set = enumerate_fixed_points(maps::flow_h(&c, 1.0).as_ref(), 6, &EnumerationOptions::from_params(&p, 12));
    let r = check_fixed_set_unperturbed(&set, 1.0);
    assert!(r.pass, "{r:?}");
    assert!(set.records.iter().any(|rec| rec.point.norm_sqr() == 0.0));
    assert!(set.records.iter().any(|rec| (rec.point.norm_sqr() - 0.5).abs() < 1e-7));
}

#[test]
fn profile_cutoff_and_convention() {
    let c = defaults();
    assert!(check_profile(&c, 500, 4).pass);
    assert!(check_cutoff(&c, 500, 4).pass);
    let q = check_quadratic_convention(100, 4);
    assert!(q.pass && q.max_defect <= 1e-14);
}

#[test]
fn invalid_params_rejected_before_suite() {
    let opts = SuiteOptions::default();
    let bad_delta = Params { delta: PI / 4.0, ..Params::default() };
    assert!(matches!(run_suite(&bad_delta, &Suite::Quick, &opts), Err(ParamsError::Delta { .. })));
    let bad_eps = Params { epsilon: 1.0, ..Params::default() };
    let err = run_suite(&bad_eps, &Suite::Quick, &opts).unwrap_err();
    assert!(err.to_string().contains(&Params::default().epsilon_max().to_string()), "{err}");
}

#[test]
fn zero_samples_pass_vacuously() {
    let opts = SuiteOptions { samples: Some(0), ..SuiteOptions::default() };
    let reports = run_suite(&Params::default(), &Suite::Quick, &opts).unwrap();
    assert!(!reports.is_empty());
    for r in reports {
        assert!(r.pass && r.samples == 0, "{r:?}");
        assert!(r.warnings.iter().any(|w| w.contains("vacuous")), "{r:?}");
    }
}

#[test]
fn full_suite_passes_on_small_grid() {
    let opts = SuiteOptions { grid_resolution: 4, samples: Some(100), ..SuiteOptions::default() };
    let reports = run_suite(&Params::default(), &Suite::Full, &opts).unwrap();
    let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
    for expected in [
        "symplectic_flow_h",
        "symplectic_flow_f",
        "symplectic_phi",
        "flow_h_modulus",
        "flow_f_closed_form",
        "fixed_set_unperturbed",
        "boundary_rigidity",
        "rotation_step",
        "plane_confinement",
    ] {
        assert!(names.contains(&expected), "{names:?}");
    }
    assert!(names.iter().filter(|n| n.starts_with("gcd_law")).count() == 2);
    for r in &reports {
        assert!(r.pass, "{r:?}");
        assert_eq!(r.pass, r.max_defect <= r.tolerance);
    }
}

#[test]
fn suite_is_reproducible() {
    let opts = SuiteOptions { samples: Some(50), ..SuiteOptions::default() };
    let a = run_suite(&Params::default(), &Suite::Quick, &opts).unwrap();
    let b = run_suite(&Params::default(), &Suite::Quick, &opts).unwrap();
    assert_eq!(a, b);
    let other = SuiteOptions { seed: opts.seed + 100, ..opts };
    let c = run_suite(&Params::default(), &Suite::Quick, &other).unwrap();
    assert_ne!(a[0].witness, c[0].witness);
}

#[test]
fn selection_keeps_declared_order() {
    let suite = Suite::Only(vec![CheckKind::RotationStep, CheckKind::ModulusFlowH]);
    assert_eq!(suite.kinds(), vec![CheckKind::ModulusFlowH, CheckKind::RotationStep]);
    assert!(!Suite::Quick.kinds().contains(&CheckKind::GcdLaw));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_step_holds_on_plane(ell in 1.0 / 3.0..2.0 / 3.0f64, theta in 0.0..2.0 * PI) {
        let c = defaults();
        let s = rotation_step(&c, &plane_point(2, ell, theta)).unwrap();
        prop_assert_eq!(s.defect, 0.0);
        prop_assert!(s.advance > 0.0 && s.advance <= PI / 3.0 * (1.0 + ROTATION_SLACK));
    }

    #[test]
    fn rotations_are_symplectic(a in -PI..PI, b in -PI..PI, x in -0.5..0.5f64, y in -0.5..0.5f64) {
        let z = BallPoint::from_reals(&[x, y, 0.3, -0.2]);
        prop_assert!(symplectic_defect(rotation(vec![a, b], 1.0).as_ref(), &z, 1e-5).unwrap() <= 1e-10);
    }

    #[test]
    fn admissible_points_rotate_rigidly(seed in 0u64..1000) {
        let c = defaults();
        let p = *c.params();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = sample_outer_band(&mut rng, 2, 1.0);
        if boundary_admissible(&p, &z).is_ok() {
            prop_assert!(c.phi(&z).unwrap().distance(&c.boundary_rotation(&z)) <= 1e-12);
        }
    }
}
