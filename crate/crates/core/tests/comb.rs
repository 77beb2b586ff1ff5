use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use tubelog::comb::construct::{open_next_stage, stage_predicates};
use tubelog::comb::curve::{sample_tooth, tooth_solver};
use tubelog::comb::digits::{digits_of_theta, digit_weight, first_difference};
use tubelog::comb::regularity::verify_contraction;
use tubelog::comb::*;
use tubelog::{Error, NormalizedUniformizer, ParameterLedger};

const LN_TAU: f64 = 1.837_877_066_409_345_5;

fn low() -> ParameterLedger {
    ParameterLedger::exploratory(&[(3, 3.0), (3, 2.5), (3, 2.5)]).unwrap()
}

fn high() -> ParameterLedger {
    ParameterLedger::exploratory(&[(5, 10.0), (5, 6.5), (6, 3.0)]).unwrap()
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

const A: [u64; 4] = [5, 6, 5, 7];

#[test]
fn abscissas_of_the_first_stages() {
    assert_eq!(x_of(&[1], &A).unwrap(), q(1, 6));
    assert_eq!(x_of(&[-1, 1], &A).unwrap(), q(-1, 1) + q(1, 5));
    assert_eq!(x_of(&[0, 0, 0], &A).unwrap(), q(0, 1));
    for p in all_prefixes(3) {
        let x = x_of(&p, &A).unwrap() * q(A[3] as i64, 1);
        assert!(x.is_integer(), "{p:?}");
    }
}

#[test]
fn theta_separates_at_the_first_difference() {
    let ps = all_prefixes(3);
    let mut checked = 0;
    for p in &ps {
        for r in &ps {
            let Some(i0) = first_difference(p, r) else { continue };
            if p[i0] > r[i0] {
                continue;
            }
            // theta of the shared digits through i0 of the smaller sequence
            let mut head = p[..=i0].to_vec();
            head.resize(3, 0);
            let theta = theta_of(&head, &A).unwrap();
            let delta = digit_weight(i0, &A).unwrap();
            let (lo, hi) = (theta_of(p, &A).unwrap(), theta_of(r, &A).unwrap());
            assert!(lo <= &theta + &delta * q(1, 3), "{p:?} {r:?}");
            assert!(&theta + &delta * q(1, 3) < &theta + &delta * q(2, 3));
            assert!(&theta + &delta * q(2, 3) <= hi, "{p:?} {r:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 27 * 26 / 2);
}

#[test]
fn theta_is_injective_at_depth_three() {
    let mut thetas: Vec<BigRational> = all_prefixes(3).iter().map(|p| theta_of(p, &A).unwrap()).collect();
    assert_eq!(thetas.len(), 27);
    thetas.sort();
    thetas.dedup();
    assert_eq!(thetas.len(), 27);
    assert!(theta_of(&[0, 0, 0], &A).unwrap().is_zero());
}

#[test]
fn axis_tooth_is_the_imaginary_axis() {
    let l = high();
    for t in [1.0, 1.5, 2.0] {
        let p = tooth_solver(&[0], &l).unwrap().point(t, None).unwrap();
        assert_eq!(p.value, Complex64::new(0.0, t));
        assert_eq!(p.derivs[0], Complex64::new(0.0, 1.0));
        // deep in the needle of K_0
        assert!(p.log_y < -1e100);
        assert!(p.log_dv_dy.is_some());
    }
}

#[test]
fn teeth_are_graphs_inside_the_band() {
    let l = high();
    let strip = Strip::new(11.5, 12.5);
    let atlas = CombAtlas::build(&l, 2, strip, 16).unwrap();
    assert_eq!(atlas.curves.len(), 9);
    for c in &atlas.curves {
        assert!(c.is_graph(), "{:?}", c.prefix);
        assert!(c.max_abs_re() < 0.5);
        for p in &c.points {
            assert_eq!(p.value.im, p.t);
        }
        assert_eq!(c.points.first().unwrap().t, 11.5);
        assert_eq!(c.points.last().unwrap().t, 12.5);
    }
}

#[test]
fn zero_child_coincides_with_parent() {
    for (l, strip) in [(high(), Strip::new(11.5, 12.5)), (low(), Strip::new(4.0, 5.0))] {
        let grid = strip.grid(16);
        for p in all_prefixes(1) {
            let parent = sample_tooth(&p, &l, &grid).unwrap();
            let mut c = p.clone();
            c.push(0);
            let child = sample_tooth(&c, &l, &grid).unwrap();
            assert!(cr_distance(&parent, &child, 0).unwrap() < 1e-12, "{p:?}");
        }
    }
}

/// Central differences in `t` of the value and of each derivative.
fn check_derivatives(prefix: &[i8], ts: &[f64]) {
    let l = low();
    let s = tooth_solver(prefix, &l).unwrap();
    let h = 1e-4;
    for &t in ts {
        let p = s.point(t, None).unwrap();
        let (m, pl) = (s.point(t - h, None).unwrap(), s.point(t + h, None).unwrap());
        let jet = |x: &tubelog::comb::CurvePoint| x.jet();
        for k in 0..3 {
            let fd = (jet(&pl)[k].re - jet(&m)[k].re) / (2.0 * h);
            let exact = p.derivs[k].re;
            let scale = exact.abs().max(1e-3);
            assert!((fd - exact).abs() < 1e-5 * scale.max(1.0) + 1e-5 * exact.abs(), "{prefix:?} t={t} k={k}: {fd} vs {exact}");
        }
    }
}

#[test]
fn derivatives_match_finite_differences() {
    check_derivatives(&[1], &[3.0, 3.05, 3.1, 3.2]);
    check_derivatives(&[-1], &[3.0, 3.1]);
    check_derivatives(&[1, 1], &[4.0, 4.05]);
    check_derivatives(&[1, -1], &[4.0]);
}

#[test]
fn dv_dy_matches_finite_differences() {
    let l = low();
    let s = tooth_solver(&[1], &l).unwrap();
    let p = s.point(3.1, None).unwrap();
    let y = p.line_y;
    let h = 1e-6 * y;
    let fd = (s.height(y + h).unwrap() - s.height(y - h).unwrap()) / (2.0 * h);
    let exact = p.log_dv_dy.unwrap().exp();
    assert!((fd / exact - 1.0).abs() < 1e-5, "{fd} {exact}");
}

#[test]
fn teeth_below_the_parent_trough_are_not_bracketed() {
    let l = low();
    let err = tooth_solver(&[1, 1], &l).unwrap().point(3.0, None).unwrap_err();
    assert!(matches!(err, Error::BracketFailure(_)));
}

#[test]
fn cr_distance_basics() {
    let l = low();
    let g = Strip::new(3.0, 3.5).grid(8);
    let c = sample_tooth(&[1], &l, &g).unwrap();
    assert_eq!(cr_distance(&c, &c, 3).unwrap(), 0.0);
    let d = sample_tooth(&[-1], &l, &g).unwrap();
    assert!(cr_distance(&c, &d, 1).unwrap() >= cr_distance(&c, &d, 0).unwrap());
    let other = sample_tooth(&[-1], &l, &Strip::new(3.0, 3.5).grid(9)).unwrap();
    assert_eq!(cr_distance(&c, &other, 0), Err(Error::GridMismatch));
}

#[test]
fn phi_of_zero_is_the_axis() {
    let l = high();
    let key = CombPointKey {
        theta: BigRational::zero(),
        t: 12.0,
    };
    let v = phi(&key, 1, &l).unwrap();
    assert_eq!(v.value, Complex64::new(0.0, 12.0));
    assert_eq!(v.prefix, vec![0, 0]);
    assert!((v.truncation_bound - 0.1 / 150.0).abs() < 1e-15);
}

#[test]
fn phi_truncates_theta() {
    let l = high();
    let a = l.a_values();
    let theta = theta_of(&[1, -1], &a).unwrap();
    let key = CombPointKey { theta, t: 12.0 };
    let shallow = phi(&key, 0, &l).unwrap();
    assert_eq!(shallow.prefix, vec![1]);
    let deep = phi(&key, 1, &l).unwrap();
    assert_eq!(deep.prefix, vec![1, -1]);
    let unrealizable = CombPointKey { theta: q(1, 7), t: 12.0 };
    assert!(matches!(phi(&unrealizable, 0, &l), Err(Error::UnrealizableTheta(_))));
}

#[test]
fn successive_truncations_on_an_exploratory_ledger() {
    let l = ParameterLedger::exploratory(&[(5, 10.0), (5, 6.5), (6, 3.0), (6, 3.0)]).unwrap();
    let r = verify_truncation(&l, 0, &Strip::new(11.5, 12.5).grid(16)).unwrap();
    assert_eq!(r.limit_depth, 2);
    assert_eq!(r.successive.pairs, 27 * 16);
    assert_eq!(r.successive.status, CheckStatus::Pass);
    // a_n this small are far from the regime where the limit bound holds
    assert!(r.assembled.worst_ratio > 1.0);
    let short = ParameterLedger::exploratory(&[(5, 10.0), (5, 6.5), (6, 3.0)]).unwrap();
    let r = verify_truncation(&short, 0, &[12.0]).unwrap();
    assert_eq!((r.limit_depth, r.successive.pairs), (1, 9));
    // with D = d + 1 both compare the same pair, against 0.01 and 0.004
    assert!((r.assembled.worst_ratio - 2.5 * r.successive.worst_ratio).abs() < 1e-12 * r.assembled.worst_ratio);
    assert!(verify_truncation(&short, 1, &[12.0]).is_err());
}

#[test]
fn regularity_on_an_exploratory_atlas() {
    let atlas = CombAtlas::build(&high(), 2, Strip::new(11.5, 12.5), 16).unwrap();
    let h = verify_holder(&atlas, 2.0 / 3.0, 2.0 / 3.0).unwrap();
    assert_eq!(h.all_pairs.status, CheckStatus::Pass);
    assert_eq!(h.adjacent.status, CheckStatus::Pass);
    assert!((h.m - 13.5).abs() < 1e-12, "M = sup |sigma_0| + 1 on the band");
    let above = verify_holder(&atlas, 0.9, 2.0 / 3.0).unwrap();
    assert_eq!(above.all_pairs.status, CheckStatus::NotCertified);
    let lip = verify_lipschitz_inverse(&atlas).unwrap();
    assert_eq!(lip.all_pairs.status, CheckStatus::Pass);
    // equal-theta pairs give exactly 3/13
    assert!((lip.all_pairs.worst_ratio - 3.0 / 13.0).abs() < 1e-12);
    assert!(lip.separation.pairs > 0);
}

#[test]
fn level_maps_do_not_contract_more_than_one_over_a() {
    let k = NormalizedUniformizer::new(5, 10.0).unwrap();
    // near a trough, where the level maps expand
    let pts: Vec<Complex64> = (0..6)
        .flat_map(|i| (0..5).map(move |j| Complex64::new(-0.08 + 0.032 * i as f64, 0.01 + 0.015 * j as f64)))
        .collect();
    let r = verify_contraction(&k, &pts).unwrap();
    assert_eq!(r.pairs, 30 * 29 / 2);
    assert_eq!(r.status, CheckStatus::Pass);
}

fn axis_oracle_log_neg_log_y(k: &NormalizedUniformizer, v: f64) -> f64 {
    // Im K(iy) = (A - log u) / (2 pi a), y = e^{-u} / (2 pi) for large u
    let u = (k.log_lambda() - std::f64::consts::TAU * k.divisor_f64() * v).exp();
    (u + LN_TAU).ln()
}

#[test]
fn stage_zero_of_the_default_construction() {
    let config = ConstructionConfig::default();
    let c = construct(&config, 0);
    assert!(c.complete());
    assert_eq!(c.ledger.divisor(0).unwrap(), 5);
    assert_eq!(c.stages[0].candidates_tried, 1);
    assert!(c.stages[0].predicates.iter().all(|p| p.passed));
    let next = &c.ledger.stages[1];

    // h_1 from an independent scan for min_x Im K_0(x + iy) > h_0 + 1
    let k = NormalizedUniformizer::new(5, 10.0).unwrap();
    let mut y = 0.25;
    while (0..64).any(|i| k.eval(Complex64::new(i as f64 / 64.0, y)).unwrap().im <= 11.0) {
        y += 0.25;
    }
    assert_eq!(next.h, 1.05 * y + 1.0);

    let tau_oracle = (1.05 * ((k.log_lambda() - std::f64::consts::TAU * 5.0).exp() + LN_TAU)).ln();
    assert!((next.tau.unwrap().log_neg_log - tau_oracle).abs() < 1e-12);
    assert!((next.tau.unwrap().log_neg_log - 282.4256).abs() < 1e-4);
    let y_oracle = axis_oracle_log_neg_log_y(&k, 9.5);
    assert!((next.y_cap.unwrap().log_neg_log - y_oracle).abs() < 1e-9);
    let hp_oracle = axis_oracle_log_neg_log_y(&k, 2.1);
    assert!((next.h_prime.unwrap().log_neg_log - hp_oracle).abs() < 1e-9);
    assert_eq!(next.rectangles.len(), 1);
}

#[test]
fn stage_one_search_is_exhausted() {
    let config = ConstructionConfig::default();
    let c = construct(&config, 2);
    assert_eq!(c.reached_depth(), Some(0));
    let Some(Error::SearchExhausted { stage, failing, .. }) = &c.exhausted else {
        panic!("expected an exhausted search, got {:?}", c.exhausted)
    };
    assert_eq!(*stage, 1);
    assert!(failing.contains(&"exclusion".to_string()));
    assert!(failing.contains(&"width".to_string()));
    let rec = &c.stages[1];
    assert_eq!(rec.candidates_tried, 58);
    let req = |name: &str| rec.predicates.iter().find(|p| p.name == name).unwrap().required_ln_a.unwrap();
    // log log a_1 > A_0 + 2 pi a_0 M with A_0 = 2 pi 50 + log log 2
    let a0 = std::f64::consts::TAU * 50.0 + std::f64::consts::LN_2.ln();
    assert!((req("exclusion").ln() - (a0 + std::f64::consts::TAU * 5.0)).abs() < 1e-6);
    assert!((req("width").ln() - (a0 - std::f64::consts::TAU * 5.0)).abs() < 0.1);
    assert!(req("holder_step") > 1e122);
}

#[test]
fn lowering_a_zero_fails_a_predicate() {
    let config = ConstructionConfig::default();
    let c = construct(&config, 0);
    let tampered = c.ledger.with_a(0, 4);
    let preds = stage_predicates(&tampered, 0, &config);
    assert!(preds.iter().any(|p| !p.passed && p.name == "min_a"));
}

#[test]
fn next_stage_checks_hold_on_exploratory_ledgers() {
    let config = ConstructionConfig::default();
    let (next, checks) = open_next_stage(&high(), 0, &config).unwrap();
    assert!(checks.iter().all(|p| p.passed), "{checks:?}");
    assert_eq!(next.stages.len(), 2);
    assert!(next.stages[1].h > 2.0);
    assert!(next.stages[1].tau.is_some());
}

#[test]
fn explicit_alpha_schedules() {
    assert!(AlphaSchedule::Explicit(vec![0.5, 0.6, 0.7]).is_valid());
    assert!(!AlphaSchedule::Explicit(vec![0.5, 0.5]).is_valid());
    assert!(!AlphaSchedule::Explicit(vec![0.5, 1.0]).is_valid());
    assert_eq!(AlphaSchedule::Explicit(vec![0.5, 0.6]).alpha(5), 0.6);
    assert!((AlphaSchedule::Default.alpha(1) - 2.0 / 3.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn theta_digits_round_trip(
        digits in proptest::collection::vec(-1i8..=1, 0..6),
        a in proptest::collection::vec(5u64..40, 7),
    ) {
        let theta = theta_of(&digits, &a).unwrap();
        let mut back = digits_of_theta(&theta, &a, 6).unwrap();
        back.resize(digits.len().max(back.len()), 0);
        let mut padded = digits.clone();
        padded.resize(back.len(), 0);
        prop_assert_eq!(back, padded);
    }
}
