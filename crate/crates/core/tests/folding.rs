use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tubelog::folding::flow::{cylinder_end_orbit, distance_mod_one, orbit_closure};
use tubelog::folding::{periodic_orbit_set, semiflow_apply, ComposedMap, RationalTime, TimeSetDescriptor};
use tubelog::{Error, NormalizedUniformizer, ParameterLedger};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ledger() -> ParameterLedger {
    ParameterLedger::exploratory(&[(5, 10.0), (5, 6.5), (6, 3.0)]).unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Membership by trying every integer candidate near `a_j r`, level by
/// level, with no rounding shortcut.
fn chain_oracle(t: &BigRational, a: &[u64]) -> bool {
    fn rec(r: &BigRational, a: &[u64]) -> bool {
        if a.len() < 2 {
            return true;
        }
        let scaled = r * BigRational::from_integer(BigInt::from(a[0]));
        let bound = q(2, a[1] as i64);
        let lo = (&scaled - &bound).ceil().to_integer();
        let hi = (&scaled + &bound).floor().to_integer();
        let mut m = lo;
        while m <= hi {
            let rest = &scaled - BigRational::from_integer(m.clone());
            if rest.abs() <= bound && rec(&rest, &a[1..]) {
                return true;
            }
            m += 1;
        }
        false
    }
    rec(t, a)
}

#[test]
fn last_level_accepts_everything() {
    let set = TimeSetDescriptor::new(2, 2, &[5, 5, 6]).unwrap();
    for t in [q(1, 3), q(-17, 2), q(123_456, 7)] {
        assert!(set.contains(&RationalTime(t)));
    }
}

#[test]
fn digit_times_are_members_at_depth_three() {
    let a = [5u64, 7, 6, 5];
    let set = TimeSetDescriptor::new(0, 3, &a).unwrap();
    for code in 0..81u32 {
        let digits: Vec<i8> = (0..4).map(|i| ((code / 3u32.pow(i)) % 3) as i8 - 1).collect();
        for k in 0..4 {
            let t = RationalTime::from_digits(2, &digits[..k], &a).unwrap();
            assert!(set.contains(&t), "digits {:?}", &digits[..k]);
            assert!(chain_oracle(t.value(), &a));
        }
    }
}

#[test]
fn membership_matches_the_unfolded_chain() {
    let a = [5u64, 6, 5, 7];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let den: i64 = 5 * 6 * 5 * 7 * 4;
    for _ in 0..2000 {
        let t = q(rng.gen_range(-3 * den..3 * den), den);
        for n in 0..4 {
            let set = TimeSetDescriptor::new(0, n, &a).unwrap();
            assert_eq!(set.contains(&RationalTime(t.clone())), chain_oracle(&t, &a[..=n]), "t = {t}, n = {n}");
        }
    }
}

#[test]
fn time_sets_decrease() {
    let a = [5u64, 5, 9, 6, 5];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let digits: Vec<i8> = (0..5).map(|_| rng.gen_range(-1..=1)).collect();
        let jitter = q(rng.gen_range(-40..40), 5 * 5 * 9 * 6 * 5 * 10);
        let t = RationalTime(RationalTime::from_digits(0, &digits, &a).unwrap().0 + jitter);
        for n in 0..4 {
            let inner = TimeSetDescriptor::new(0, n + 1, &a).unwrap().contains(&t);
            let outer = TimeSetDescriptor::new(0, n, &a).unwrap().contains(&t);
            assert!(!inner || outer);
        }
    }
}

#[test]
fn imaginary_axis_stays_imaginary_through_the_tower() {
    let l = ledger();
    let g = ComposedMap::from_ledger(&l, 3).unwrap();
    for y in [0.05, 0.5, 2.0] {
        let p = g.apply(c(0.0, y)).unwrap();
        assert_eq!(p.value.re, 0.0);
        for coord in &p.coords {
            assert_eq!(coord.to_complex().re, 0.0);
        }
    }
}

#[test]
fn integer_verticals_map_to_rational_verticals() {
    let l = ledger();
    let g = ComposedMap::from_ledger(&l, 3).unwrap();
    for m in [-2i64, 1, 7] {
        let p = g.apply(c(m as f64, 0.7)).unwrap();
        // coords[1] is the image of the deepest point under K_2
        let x = p.coords[1].to_complex().re;
        assert_eq!(x, m as f64 / 6.0);
    }
}

#[test]
fn single_level_composition_is_norm_k() {
    let l = ledger();
    let g = ComposedMap::from_ledger(&l, 1).unwrap();
    let k = l.uniformizer(0).unwrap();
    let z = c(0.31, 0.42);
    assert_eq!(g.apply(z).unwrap().value, k.eval(z).unwrap());
}

#[test]
fn inverse_tower_round_trip() {
    let l = ledger();
    let g = ComposedMap::from_ledger(&l, 2).unwrap();
    for z in [c(0.3, 0.4), c(-1.2, 2.0), c(0.49, 5.0)] {
        let w = g.value(z).unwrap();
        let back = g.invert(w).unwrap();
        assert!((back.deepest().to_complex() - z).norm() < 1e-9, "{z}");
    }
}

#[test]
fn integer_multiple_of_the_top_period_is_rigid() {
    let l = ledger();
    let t = RationalTime::ratio(1, 5);
    for z in [c(0.1, 0.2), c(0.33, 11.0), c(-4.0, 1e-3)] {
        assert_eq!(semiflow_apply(1, &t, z, &l).unwrap(), z + 0.2);
    }
}

#[test]
fn small_times_translate_high_up() {
    let l = ledger();
    let k0 = l.uniformizer(0).unwrap();
    for s in [0.1, -0.35, 0.02] {
        let t = RationalTime(q((s * 1000.0f64).round() as i64, 5000));
        let z = c(0.2, 25.0);
        let fz = semiflow_apply(1, &t, z, &l).unwrap();
        assert!((fz - z - t.to_f64()).norm() < 1e-6);
        // a legal time at depth one moves the preimage by a_0 t
        let pre = k0.invert(z, None).unwrap();
        let direct = k0.eval(pre + 5.0 * t.to_f64()).unwrap();
        assert!((fz - direct).norm() < 1e-12);
    }
}

#[test]
fn illegal_times_are_rejected() {
    let l = ledger();
    // a_0 t = 1/2 is farther than 2/a_1 from the integers
    let t = RationalTime::ratio(1, 10);
    assert!(matches!(semiflow_apply(1, &t, c(0.0, 20.0), &l), Err(Error::IllegalTime(_, 1))));
}

#[test]
fn deviation_from_translation_decays_with_height() {
    // low trough heights so the deviation is visible above rounding
    let l = ParameterLedger::exploratory(&[(3, 3.0), (3, 2.5), (3, 2.5)]).unwrap();
    let t = RationalTime(q(1, 3) + q(1, 9) + q(1, 54));
    let mut last = f64::INFINITY;
    let mut first = None;
    for y in [4.0, 4.3, 4.6, 5.0, 6.0, 8.0] {
        let z = c(0.17, y);
        let d = (semiflow_apply(2, &t, z, &l).unwrap() - z - t.to_f64()).norm();
        first.get_or_insert(d);
        // below 1e-13 only rounding is left
        assert!(d <= last.max(1e-13), "height {y}: {d} > {last}");
        last = d;
    }
    assert!(first.unwrap() > 1e-9);
    assert!(last < 1e-14);
}

fn legal_depth_two_time(rng: &mut ChaCha8Rng) -> RationalTime {
    // a_0 t = m0 + (m1 + r2)/a_1 with |m1 + r2| <= 2, |r2| <= 2/a_2
    let m0 = rng.gen_range(-2..=2);
    let m1 = rng.gen_range(-1..=1);
    let r2 = q(rng.gen_range(-20..=20), 60);
    let inner = (BigRational::from_integer(BigInt::from(m1)) + r2) / BigRational::from_integer(BigInt::from(5));
    RationalTime((BigRational::from_integer(BigInt::from(m0)) + inner) / BigRational::from_integer(BigInt::from(5)))
}

#[test]
fn flows_commute_at_depth_two() {
    let l = ledger();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let set = TimeSetDescriptor::new(0, 2, &l.a_values()).unwrap();
    for _ in 0..20 {
        let t = legal_depth_two_time(&mut rng);
        let s = legal_depth_two_time(&mut rng);
        assert!(set.contains(&t) && set.contains(&s));
        let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(11.6..13.0));
        let ts = semiflow_apply(2, &t, semiflow_apply(2, &s, z, &l).unwrap(), &l).unwrap();
        let st = semiflow_apply(2, &s, semiflow_apply(2, &t, z, &l).unwrap(), &l).unwrap();
        assert!((ts - st).norm() < 1e-8, "t = {t}, s = {s}, z = {z}");
        let sum = &t + &s;
        if set.contains(&sum) {
            let direct = semiflow_apply(2, &sum, z, &l).unwrap();
            assert!((ts - direct).norm() < 1e-8);
        }
    }
}

#[test]
fn low_points_leave_the_domain() {
    let l = ledger();
    let t = RationalTime(q(1, 5) + q(1, 25) + q(1, 300));
    match semiflow_apply(2, &t, c(0.1, -0.5), &l) {
        Err(Error::SheetBudgetExceeded { .. }) | Err(Error::OrbitHitsExclusion(_)) => {}
        other => panic!("expected an exclusion, got {other:?}"),
    }
}

#[test]
fn cylinder_end_orbits_are_spaced_by_the_period() {
    let k = NormalizedUniformizer::new(6, 3.0).unwrap();
    let p = cylinder_end_orbit(&k);
    assert_eq!(p.len(), 6);
    for w in p.windows(2) {
        assert!((w[1] - w[0] - 1.0 / 6.0).norm() < 1e-15);
    }
}

#[test]
fn orbit_sets_at_the_expected_heights() {
    let l = ledger();
    let o1 = periodic_orbit_set(0, &l, 1000).unwrap();
    let k0 = l.uniformizer(0).unwrap();
    assert_eq!(o1.len(), 5);
    for p in &o1 {
        assert!((p.im - k0.cylinder_end(1).im).abs() < 1e-14);
    }
    let o2 = periodic_orbit_set(1, &l, 1000).unwrap();
    assert_eq!(o2.len(), 25);
    assert!(matches!(periodic_orbit_set(2, &l, 100), Err(Error::TooManyPoints { .. })));
    for p in &o2 {
        assert!(p.im > 11.0, "{p}");
    }
}

#[test]
fn orbit_points_return_under_the_flow() {
    let l = ledger();
    for (n, t) in [
        (0usize, RationalTime::ratio(1, 5)),
        (0, RationalTime(q(1, 5) + q(1, 40))),
        (1, RationalTime(q(1, 25))),
        (1, RationalTime(q(2, 5) + q(1, 25) + q(1, 180))),
    ] {
        let set = periodic_orbit_set(n, &l, 1000).unwrap();
        for &p in &set {
            let closure = orbit_closure(n, &t, p, &set, set.len(), 1e-6, &l).unwrap();
            assert!(closure.max_deviation < 1e-6, "n = {n}, t = {t}: {closure:?}");
            assert!(closure.period.is_some(), "n = {n}, t = {t}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn nesting_on_random_rationals(num in -10_000i64..10_000, den in 1i64..2_000) {
        let a = [5u64, 6, 5];
        let t = RationalTime(q(num, den));
        let inner = TimeSetDescriptor::new(0, 2, &a).unwrap().contains(&t);
        let outer = TimeSetDescriptor::new(0, 1, &a).unwrap().contains(&t);
        prop_assert!(!inner || outer);
        prop_assert_eq!(inner, chain_oracle(t.value(), &a));
    }

    #[test]
    fn orbit_sets_are_invariant_mod_one(k in 0usize..5, num in -3i64..3) {
        let l = ledger();
        let set = periodic_orbit_set(0, &l, 1000).unwrap();
        let t = RationalTime(q(num, 5) + q(1, 60));
        let img = semiflow_apply(1, &t, set[k], &l).unwrap();
        let d = set.iter().map(|&p| distance_mod_one(img, p)).fold(f64::INFINITY, f64::min);
        prop_assert!(d < 1e-6);
        prop_assert!(!t.value().is_zero());
    }
}
