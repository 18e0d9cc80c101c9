use mandelcert_core::certifier::{DecideConfig, Verdict};
use mandelcert_core::rational::{
    cantor_pair, cantor_unpair, circle_decide, even_denominator, exp_bounds,
    exp_epigraph_decide, exp_epigraph_witness, mandelbrot_rational_semi, phi_decode, phi_encode,
    RationalCode,
};
use mandelcert_core::{ComplexRational, Rational};
use num_bigint::BigUint;
use proptest::prelude::*;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-100_000i64..=100_000, 1i64..=100_000).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

/// `T(w) + u` by walking the diagonals one cell at a time.
fn pair_by_walking(u: u64, v: u64) -> u64 {
    let mut m = 0;
    for w in 0..(u + v) {
        m += w + 1;
    }
    m + u
}

#[test]
fn pairing_agrees_with_diagonal_walk() {
    for u in 0..40u64 {
        for v in 0..40u64 {
            let m = cantor_pair(&BigUint::from(u), &BigUint::from(v));
            assert_eq!(m, BigUint::from(pair_by_walking(u, v)));
            assert_eq!(cantor_unpair(&m), (BigUint::from(u), BigUint::from(v)));
        }
    }
}

#[test]
fn enumeration_examples() {
    let n = |k: u32| BigUint::from(k);
    assert_eq!(phi_decode(&n(0)), q("-1"));
    assert_eq!(phi_decode(&n(1)), q("1"));
    assert_eq!(phi_decode(&n(4)), q("0"));
    assert_eq!(RationalCode::new(5u32).components(), (1, n(1), n(0)));
    assert_eq!(phi_encode(&q("-7/3")), n(127));
    assert_eq!(phi_decode(&n(127)), q("-7/3"));
}

#[test]
fn exp_bounds_bracket_and_tighten() {
    for x in ["-4", "-3/2", "-1/7", "1/3", "1", "5/2", "4"] {
        let x = q(x);
        let e = x.to_f64().exp();
        let mut width = None;
        for m in [2, 5, 10, 20, 40] {
            let b = exp_bounds(&x, m);
            assert!(b.lower.to_f64() <= e * (1.0 + 1e-12));
            assert!(b.upper.to_f64() >= e * (1.0 - 1e-12));
            let w = b.width();
            if let Some(prev) = &width {
                assert!(&w <= prev);
            }
            width = Some(w);
        }
    }
}

#[test]
fn epigraph_witness_orders() {
    assert_eq!(exp_epigraph_witness(&q("1"), &q("2")), (false, 2));
    assert_eq!(exp_epigraph_witness(&q("1"), &q("3")), (true, 3));
    assert_eq!(exp_epigraph_witness(&q("0"), &q("1")), (true, 0));
    // e = 2.718281828...
    assert!(exp_epigraph_decide(&q("1"), &q("2718282/1000000")));
    assert!(!exp_epigraph_decide(&q("1"), &q("2718281/1000000")));
}

#[test]
fn rational_membership_is_semi() {
    let cfg = DecideConfig::default();
    let c = |re: &str, im: &str| ComplexRational::new(q(re), q(im));
    assert!(mandelbrot_rational_semi(&c("-2", "0"), &cfg).is_in());
    assert!(mandelbrot_rational_semi(&c("0", "1"), &cfg).is_in());
    assert!(matches!(
        mandelbrot_rational_semi(&c("1/2", "0"), &cfg),
        Verdict::Out { .. }
    ));
    assert!(mandelbrot_rational_semi(&c("1/4", "0"), &cfg).is_unknown());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn decode_then_encode_is_least_preimage(k in 0u32..20_000) {
        let n = BigUint::from(k);
        let r = phi_decode(&n);
        let least = phi_encode(&r);
        prop_assert!(least <= n);
        prop_assert_eq!(phi_decode(&least), r);
    }

    #[test]
    fn encode_round_trips(r in rational()) {
        prop_assert_eq!(phi_decode(&phi_encode(&r)), r);
    }

    #[test]
    fn circle_matches_integer_check(a in -300i64..=300, b in -300i64..=300, c in 1i64..=300) {
        let (x, y) = (Rational::new(a, c).unwrap(), Rational::new(b, c).unwrap());
        prop_assert_eq!(circle_decide(&x, &y), a * a + b * b == c * c);
    }

    #[test]
    fn even_denominator_matches_two_adic_count(n in -100_000i64..=100_000, d in 1i64..=100_000) {
        // lowest-terms denominator is even iff d has more factors of 2 than n
        let twos = |v: i64| if v == 0 { u32::MAX } else { v.trailing_zeros() };
        let expected = u8::from(d.trailing_zeros() > twos(n) && n != 0);
        prop_assert_eq!(even_denominator(&Rational::new(n, d).unwrap()), expected);
    }

    #[test]
    fn exp_bounds_contain_float_value(n in -400i64..=400, m in 3u32..30) {
        let x = Rational::new(n, 100).unwrap();
        let b = exp_bounds(&x, m);
        let e = (n as f64 / 100.0).exp();
        prop_assert!(b.lower <= b.upper);
        prop_assert!(b.lower.to_f64() <= e * (1.0 + 1e-12));
        prop_assert!(b.upper.to_f64() >= e * (1.0 - 1e-12));
    }

    #[test]
    fn epigraph_agrees_with_floats_away_from_the_curve(n in -400i64..=400, y in -2000i64..=60_000) {
        let x = Rational::new(n, 100).unwrap();
        let yv = Rational::new(y, 1000).unwrap();
        let e = (n as f64 / 100.0).exp();
        let yf = y as f64 / 1000.0;
        prop_assume!((yf - e).abs() > 1e-9 * e.max(1.0));
        prop_assert_eq!(exp_epigraph_decide(&x, &yv), yf > e);
    }
}
