use super::*;
use crate::construction::Construction;
use crate::maps::{self, identity, rotation, MapHandle};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use cycles::CycleViolation;

fn construction() -> &'static Arc<Construction> {
    static C: OnceLock<Arc<Construction>> = OnceLock::new();
    C.get_or_init(|| Arc::new(Construction::new(Params::default()).unwrap()))
}

fn phi() -> MapHandle {
    maps::phi(construction())
}

fn plane(ell: f64, theta: f64) -> BallPoint {
    BallPoint::new(vec![Complex64::new(0.0, 0.0), Complex64::from_polar(ell.sqrt(), theta)])
}

fn small_grid() -> EnumerationOptions {
    EnumerationOptions::from_params(&Params::default(), 4)
}

fn phi_cycles() -> &'static CycleSpace {
    static S: OnceLock<CycleSpace> = OnceLock::new();
    S.get_or_init(|| cycle_space(phi().as_ref(), 6, &small_grid()))
}

/// Root of a sign-changing `f` on `[a, b]`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn iterate_examples() {
    let map = phi();
    let origin = BallPoint::origin(2);
    assert_eq!(iterate(map.as_ref(), &origin, 6).unwrap(), origin);
    for d in construction().distinguished_cycle() {
        assert!(iterate(map.as_ref(), &d, 6).unwrap().distance(&d) <= 1e-9);
    }
    let z = BallPoint::from_reals(&[0.3, -0.1, 0.2, 0.5]);
    assert_eq!(iterate(identity(2, 1.0).as_ref(), &z, 17).unwrap(), z);
}

#[test]
fn iterate_reports_escape() {
    let outward = rotation(vec![0.0, 0.0], 0.5);
    let z = BallPoint::from_reals(&[0.0, 0.0, 0.6, 0.0]);
    assert!(matches!(iterate(outward.as_ref(), &z, 3), Err(MapError::Escape { steps: 1, .. })));
}

#[test]
fn newton_from_exact_cycle_point() {
    let opts = NewtonOptions::from_params(&Params::default());
    let d0 = &construction().distinguished_cycle()[0];
    let rec = newton_fixed_point(phi().as_ref(), 6, d0, &opts).converged().cloned().expect("converges");
    assert!(rec.newton_iterations <= 1);
    assert!(rec.residual < 1e-12);
    assert!(rec.point.distance(d0) <= 1e-12);
    assert_eq!(rec.minimal_period, 6);
}

#[test]
fn newton_from_origin() {
    let opts = NewtonOptions::from_params(&Params::default());
    let origin = BallPoint::origin(2);
    let rec = newton_fixed_point(phi().as_ref(), 6, &origin, &opts).converged().cloned().unwrap();
    assert_eq!(rec.point, origin);
    assert_eq!(rec.minimal_period, 1);
}

#[test]
fn newton_from_nearby_seed_reaches_cycle() {
    let c = construction();
    let p = *c.params();
    let opts = NewtonOptions::from_params(&p);
    let seed = plane(0.49, 0.05);
    let rec = newton_fixed_point(phi().as_ref(), 6, &seed, &opts).converged().cloned().expect("converges");
    let rec = polish_fixed_point(phi().as_ref(), &rec, &opts);

    let m = f64::from(c.harmonic());
    let theta = bisect(|t| c.plateau_action(0.5, t, 1.0) - 0.5, -PI / (2.0 * m) + 0.01, PI / (2.0 * m) - 0.01);
    let ell = bisect(|r| c.profile().curvature(r), 0.3, 0.7);
    let oracle = plane(ell, theta);
    assert!(rec.point.distance(&oracle) <= p.dedup_radius, "{:?}", rec.point);
    assert!(iterate(phi().as_ref(), &rec.point, 6).unwrap().distance(&rec.point) <= p.newton_tol);
}

#[test]
fn newton_iteration_cap_is_reported() {
    let opts = NewtonOptions { max_iterations: 1, ..NewtonOptions::from_params(&Params::default()) };
    let out = newton_fixed_point(phi().as_ref(), 6, &plane(0.45, 0.3), &opts);
    assert!(matches!(out, NewtonOutcome::NoConvergence { iterations: 1, .. }), "{out:?}");
}

#[test]
fn minimal_period_examples() {
    let p = Params::default();
    let map = phi();
    for d in construction().distinguished_cycle() {
        assert_eq!(minimal_period(map.as_ref(), &d, 6, &p), 6);
    }
    assert_eq!(minimal_period(map.as_ref(), &BallPoint::origin(2), 6, &p), 1);
    let z = BallPoint::from_reals(&[0.3, -0.1, 0.2, 0.5]);
    assert_eq!(minimal_period(identity(2, 1.0).as_ref(), &z, 4, &p), 1);
    let quarter = rotation(vec![PI / 2.0, PI], 1.0);
    assert_eq!(minimal_period(quarter.as_ref(), &z, 4, &p), 4);
    assert_eq!(minimal_period(quarter.as_ref(), &BallPoint::from_reals(&[0.0, 0.0, 0.2, 0.5]), 4, &p), 2);
}

#[test]
fn unperturbed_fixed_points_are_origin_and_circle() {
    let p = Params::default();
    let set = enumerate_fixed_points(maps::flow_h(construction(), 1.0).as_ref(), 6, &EnumerationOptions::from_params(&p, 12));
    assert!(set.records.len() > 100);
    let mut origin = 0;
    for rec in &set.records {
        if rec.point.norm_sqr().sqrt() <= 1e-7 {
            origin += 1;
        } else {
            assert!(rec.point.head_norm() <= 1e-7, "{:?}", rec.point);
            assert!((rec.point.last().norm() - 0.5f64.sqrt()).abs() <= 1e-7, "{:?}", rec.point);
        }
        assert!(rec.residual <= p.newton_tol);
        assert_eq!(6 % rec.minimal_period, 0);
    }
    assert_eq!(origin, 1);
}

#[test]
fn rotation_has_only_the_origin() {
    let p = Params::default();
    let d = p.delta;
    let rot = rotation(vec![2.0 * d, 2.0 * d], 1.0);
    let set = enumerate_fixed_points(rot.as_ref(), 6, &EnumerationOptions::from_params(&p, 12));
    assert_eq!(set.records.len(), 1);
    assert!(set.records[0].point.norm_sqr() <= 1e-20);
}

#[test]
fn phi_fixed_points_of_sixth_iterate() {
    let set = &phi_cycles().fixed_points;
    assert_eq!(set.records.len(), 7);
    let d = construction().distinguished_cycle();
    assert_eq!(set.records.iter().filter(|r| r.minimal_period == 1).count(), 1);
    for z in &d {
        assert!(set.records.iter().any(|r| r.point.distance(z) <= 1e-6));
    }
}

#[test]
fn phi_has_one_six_cycle() {
    let space = phi_cycles();
    assert_eq!(space.count(), 1);
    let class = &space.classes[0];
    assert_eq!(class.order, 6);
    let tol = Params::default().newton_tol;
    assert!(class.closure_defect(phi().as_ref()).unwrap() <= 2.0 * tol);
    class.validate(phi().as_ref(), tol, Params::default().dedup_radius).unwrap();
    for z in &class.points {
        assert!(z.head_norm() <= 1e-7);
        let polar = z.to_polar();
        assert!((polar.ell - 0.5).abs() <= 1e-6);
        let j = (polar.theta / (PI / 3.0)).round();
        assert!((polar.theta - j * PI / 3.0).abs() <= 1e-6, "{polar:?}");
    }
}

#[test]
fn phi_has_one_fixed_point() {
    let space = cycle_space(phi().as_ref(), 1, &small_grid());
    assert_eq!(space.count(), 1);
    assert!(space.classes[0].points[0].norm_sqr() <= 1e-20);
}

#[test]
fn enumeration_is_schedule_independent() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| enumerate_fixed_points(phi().as_ref(), 6, &small_grid()))
    };
    let (a, b) = (run(1), run(3));
    let pts = |s: &FixedPointSet| s.records.iter().map(|r| r.point.to_reals()).collect::<Vec<_>>();
    assert_eq!(pts(&a), pts(&b));
    assert_eq!(pts(&a), pts(&phi_cycles().fixed_points));
}

#[test]
fn seeds_cover_grid_and_rings() {
    let opts = small_grid();
    let s = seeds(2, 1.0, &opts);
    assert_eq!(s[0], BallPoint::origin(2));
    assert!(s.iter().all(|z| z.in_ball(1.0)));
    let rings = s.iter().filter(|z| z.head_norm() == 0.0 && (z.last().norm_sqr() - 0.5).abs() < 1e-12).count();
    assert_eq!(rings, 64 * 3);
}

#[test]
fn validate_rejects_non_primitive_and_broken_links() {
    let p = Params::default();
    let map = phi();
    let d = construction().distinguished_cycle();
    let doubled = CycleClass::from_points(map.as_ref(), [d.clone(), d.clone()].concat(), p.dedup_radius).unwrap();
    assert!(matches!(
        doubled.validate(map.as_ref(), 1e-9, p.dedup_radius),
        Err(CycleViolation::NotPrimitive { .. })
    ));
    let mut shuffled = d.clone();
    shuffled.swap(1, 2);
    let broken = CycleClass::from_points(map.as_ref(), shuffled, p.dedup_radius).unwrap();
    assert!(matches!(broken.validate(map.as_ref(), 1e-9, p.dedup_radius), Err(CycleViolation::Link { .. })));
}

fn arb_points() -> impl Strategy<Value = Vec<BallPoint>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 4), 1..8)
        .prop_map(|v| v.into_iter().map(|r| BallPoint::from_reals(&r)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_shift_invariant(points in arb_points(), shift in 0usize..8) {
        let map = identity(2, 2.0);
        let base = CycleClass::from_points(map.as_ref(), points.clone(), 1e-12).unwrap();
        let mut shifted = points.clone();
        let s = shift % points.len();
        shifted.rotate_left(s);
        let other = CycleClass::from_points(map.as_ref(), shifted, 1e-12).unwrap();
        prop_assert_eq!(&base.points, &other.points);
        let again = CycleClass::from_points(map.as_ref(), base.points.clone(), 1e-12).unwrap();
        prop_assert_eq!(base.points, again.points);
    }

    #[test]
    fn minimal_period_divides_order(a in 0u32..12, n in 1usize..13) {
        let z = BallPoint::from_reals(&[0.1, 0.2, 0.3, 0.4]);
        let angle = 2.0 * PI * f64::from(a) / 12.0;
        let rot = rotation(vec![angle, angle], 1.0);
        let d = minimal_period(rot.as_ref(), &z, n, &Params::default());
        prop_assert_eq!(n % d, 0);
        // independent count: smallest divisor of n that is a multiple of the rotation order
        let order = 12 / gcd(a as usize, 12);
        let expected = (1..=n).find(|d| n % d == 0 && d % order == 0).unwrap_or(n);
        prop_assert_eq!(d, expected);
    }

    #[test]
    fn plane_cycle_points_stay_fixed(j in 0usize..6) {
        let d = &construction().distinguished_cycle()[j];
        let w = iterate(phi().as_ref(), d, 6).unwrap();
        prop_assert!(w.distance(d) <= 1e-9);
        prop_assert!(w.head_norm() == 0.0);
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
