use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use tubelog::comb::{CombAtlas, Strip};
use tubelog::folding::{semiflow_apply, RationalTime};
use tubelog::hedgehog::*;
use tubelog::{Anchored, Offset, ParameterLedger};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn high() -> ParameterLedger {
    ParameterLedger::exploratory(&[(5, 10.0), (5, 6.5), (6, 3.0), (6, 3.0)]).unwrap()
}

#[test]
fn imaginary_axis_is_inside_at_every_depth() {
    let l = high();
    for n in 0..3 {
        for y in [0.0, 1e-300, 1e-3, 0.5, 3.0, 10.0, 50.0] {
            let m = contains(c(0.0, y), n, &l).unwrap();
            assert!(m.member, "n = {n}, y = {y}: {m:?}");
            assert!(m.margin >= 0.0);
        }
    }
}

#[test]
fn comb_points_are_inside() {
    let l = high();
    let atlas = CombAtlas::build(&l, 2, Strip::new(11.5, 12.5), 8).unwrap();
    let points: Vec<Complex64> = atlas.curves.iter().flat_map(|c| c.points.iter().map(|p| p.value)).collect();
    for (n, row) in containment_margins(&points, 2, &l).into_iter().enumerate() {
        let (outside, worst) = row.unwrap();
        assert_eq!(outside, 0, "n = {n}, worst margin {worst}");
    }
}

#[test]
fn below_a_boundary_arc_is_outside() {
    let l = high();
    let hh = HedgehogApprox::build(&l, 1, 512).unwrap();
    // the peak of the deepest arc over the cell [2, 3]
    let peak = Anchored::plain(c(2.5, 0.0));
    let on = hh.lift(peak, 0.0).unwrap();
    let m = contains(on, 1, &l).unwrap();
    assert!(m.member && m.margin.abs() < 1e-6, "{m:?}");
    let below = contains(on - c(0.0, 0.01), 1, &l).unwrap();
    assert!(!below.member);
    assert!(below.margin < 0.0 && below.margin.is_finite(), "{below:?}");
}

#[test]
fn boundary_samples_sit_on_the_boundary() {
    let l = high();
    for n in 0..3 {
        let hh = HedgehogApprox::build(&l, n, 512).unwrap();
        assert_eq!(hh.dropped, 0);
        let mut resolvable = 0;
        for p in hh.boundary.iter() {
            if n == 0 || p.resolvable() {
                resolvable += 1;
                let m = contains(p.value, n, &l).unwrap();
                assert!(m.member && m.margin.abs() < 1e-6, "n = {n}, {:?}: {m:?}", p.value);
            }
            let inner = contains(hh.lift(p.deepest, 0.01).unwrap(), n, &l).unwrap();
            assert!(inner.member, "n = {n}, {:?}: {inner:?}", p.value);
            assert!((inner.margin - 0.01).abs() < 1e-6);
        }
        assert!(resolvable >= 256, "n = {n}: {resolvable}");
    }
}

#[test]
fn boundary_spans_one_top_level_period() {
    let l = high();
    for n in 0..3 {
        let hh = HedgehogApprox::build(&l, n, 512).unwrap();
        assert!(hh.boundary.len() >= 512);
        assert_eq!(hh.boundary.first().unwrap().value, c(0.0, 0.0));
        let last = hh.boundary.last().unwrap().value;
        assert!((last - c(0.2, 0.0)).norm() < 1e-15, "{last}");
        // needles reach the tips at height 0
        assert_eq!(hh.lowest().im, 0.0);
        assert_eq!(hh.periods(5).len(), 5 * hh.boundary.len() - 4);
    }
    let top = HedgehogApprox::build(&l, 0, 512).unwrap().highest();
    assert!((top - c(0.1, 10.0)).norm() < 1e-12, "{top}");
    // deeper arcs are lifted by about h_n / (a_0 ... a_{n-1})
    let heights: Vec<f64> = (0..3).map(|n| HedgehogApprox::build(&l, n, 512).unwrap().highest().im).collect();
    assert!(heights[0] < heights[1] && heights[1] < heights[2], "{heights:?}");
    assert!((heights[1] - (10.0 + 6.5 / 5.0)).abs() < 0.05, "{heights:?}");
}

#[test]
fn boundary_is_periodic_at_the_top_level() {
    let l = high();
    for n in 1..3 {
        let hh = HedgehogApprox::build(&l, n, 512).unwrap();
        let cells: f64 = hh.a[1..].iter().map(|&a| a as f64).product();
        for p in hh.boundary.iter().filter(|p| p.resolvable()).step_by(17) {
            let Offset::Linear(d) = p.deepest.offset else { unreachable!() };
            let x = p.deepest.anchor as f64 + d.re;
            let here = hh.lift(Anchored::plain(c(x, 0.0)), 0.05).unwrap();
            let there = hh.lift(Anchored::plain(c(x + cells, 0.0)), 0.05).unwrap();
            assert!((there - here - c(0.2, 0.0)).norm() < 1e-9, "n = {n}: {here} {there}");
        }
    }
}

#[test]
fn nested_domains_on_a_grid() {
    let l = high();
    let mut inside = [0usize; 3];
    for i in 0..40 {
        for j in 0..40 {
            let z = c(i as f64 / 40.0, 9.0 + j as f64 * 0.08);
            let m: Vec<bool> = (0..3).map(|n| contains(z, n, &l).unwrap().member).collect();
            for n in 0..2 {
                assert!(!m[n + 1] || m[n], "{z}");
            }
            for n in 0..3 {
                inside[n] += m[n] as usize;
            }
        }
    }
    assert!(inside[0] > inside[1] && inside[1] > inside[2] && inside[2] > 0, "{inside:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn membership_is_monotone_in_depth(x in 0.0f64..1.0, y in 0.0f64..14.0) {
        let l = high();
        let z = c(x, y);
        for n in 0..2 {
            let deeper = contains(z, n + 1, &l).unwrap();
            let shallower = contains(z, n, &l).unwrap();
            prop_assert!(!deeper.member || shallower.member);
        }
    }

    #[test]
    fn disk_transport_is_periodic(x in -3.0f64..3.0, y in -2.0f64..150.0) {
        let z = c(x, y);
        let (e, f) = (disk_transport_log(z), disk_transport_log(z + 1.0));
        prop_assert_eq!(e.log_modulus, f.log_modulus);
        prop_assert!((e.arg - f.arg).abs() < 1e-14 || (e.arg - f.arg).abs() > 2.0 * PI - 1e-14);
    }
}

#[test]
fn disk_transport_values() {
    assert_eq!(disk_transport(c(0.0, 0.0)), c(1.0, 0.0));
    let e = disk_transport(c(0.0, 10.0));
    let expected = (-20.0 * PI).exp();
    assert!((e.re / expected - 1.0).abs() < 1e-14 && e.im == 0.0, "{e}");
    assert!((e.re - 5.1e-28).abs() < 1e-29);
    let far = disk_transport_log(c(0.25, 200.0));
    assert_eq!(far.log_modulus, -400.0 * PI);
    assert_eq!(far.arg, PI / 2.0);
    assert_eq!(disk_transport(c(0.25, 200.0)), c(0.0, 0.0));
    let z = c(0.3, 0.7);
    assert!((disk_transport(z) - disk_transport(z + 1.0)).norm() < 1e-15);
}

#[test]
fn rigid_times_leave_the_domain_invariant() {
    let l = high();
    let t = RationalTime::ratio(1, 5);
    let samples: Vec<FlowSample> = (0..10)
        .map(|i| FlowSample {
            time: t.clone(),
            z: c(0.05 + 0.09 * i as f64, 11.6 + 0.1 * i as f64),
        })
        .collect();
    assert!(samples.iter().all(|s| contains(s.z, 1, &l).unwrap().member));
    let r = invariance_check(1, &samples, &l).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn seeded_flow_samples_stay_inside() {
    let l = high();
    for depth in 1..3 {
        let draw = legal_flow_samples(depth, 20, 11, (0.05, 1.5), &l).unwrap();
        assert_eq!(draw.samples.len(), 20);
        let r = invariance_check(depth, &draw.samples, &l).unwrap();
        assert!(r.passed, "depth {depth}: {r:?}");
        assert!(r.worst_margin >= -1e-8);
    }
}

#[test]
fn samples_near_the_boundary_stay_inside() {
    let l = high();
    let draw = legal_flow_samples(1, 20, 5, (0.005, 0.05), &l).unwrap();
    assert!(!draw.samples.is_empty());
    for s in &draw.samples {
        assert!(contains(s.z, 1, &l).unwrap().margin < 0.05);
    }
    let r = invariance_check(1, &draw.samples, &l).unwrap();
    assert!(r.passed, "{r:?}");
}

#[test]
fn legal_times_are_members_of_the_time_sets() {
    use rand::SeedableRng;
    let a = [5u64, 5, 6, 6];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for n in 0..4 {
        let set = tubelog::folding::TimeSetDescriptor::new(0, n, &a).unwrap();
        for _ in 0..50 {
            assert!(set.contains(&legal_time(&mut rng, n, &a).unwrap()));
        }
    }
}

#[test]
fn flow_commutes_with_unit_translation_through_the_disk() {
    let l = high();
    let draw = legal_flow_samples(1, 10, 3, (0.1, 1.0), &l).unwrap();
    for s in &draw.samples {
        let w = semiflow_apply(2, &s.time, s.z, &l).unwrap();
        let shifted = semiflow_apply(2, &s.time, s.z + 1.0, &l).unwrap();
        assert!((disk_transport(w) - disk_transport(shifted)).norm() < 1e-10, "{}", s.z);
    }
}

#[test]
fn orbit_heights_on_an_exploratory_ledger() {
    let l = high();
    let r = nonlinearisability_evidence(1, &l, 10_000).unwrap();
    assert_eq!(r.rows.len(), 2);
    // O_{0,1} = P_0 sits at h_0 - C_1/a_0, just below h_0
    let first = &r.rows[0];
    assert_eq!(first.points, 5);
    assert!(!first.height_ok);
    assert!((first.min_height - (10.0 - 0.350_84 / 5.0)).abs() < 1e-4);
    assert_eq!(first.clears_h0_minus_one, Some(true));
    let second = &r.rows[1];
    assert_eq!(second.points, 25);
    assert!(second.height_ok && second.radius_ok);
    for row in &r.rows {
        assert!(row.returns.passed, "{:?}", row.returns);
        assert_eq!(row.log_disk_radius, -2.0 * PI * row.min_height);
    }
    assert!(r.radii_decreasing);
    assert!(!r.passed);
}

#[test]
fn missing_stages_are_reported() {
    let l = ParameterLedger::exploratory(&[(5, 10.0)]).unwrap();
    let r = nonlinearisability_evidence(2, &l, 100).unwrap();
    assert_eq!(r.missing, vec![1, 2]);
    assert_eq!(r.rows.len(), 1);
    assert!(r.rows[0].returns.passed);
    assert!(!r.passed);
    assert!(contains(c(0.0, 1.0), 1, &l).is_err());
}
