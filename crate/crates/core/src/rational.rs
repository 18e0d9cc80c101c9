//! Computing over the rationals.
//!
//! An explicit enumeration of `Q` ([`phi_decode`], [`phi_encode`]), exact
//! deciders for a few sets of rationals, and the best available
//! semi-decision for the Mandelbrot set restricted to rational points.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::certifier::{decide, DecideConfig, Parameter, Verdict};
use crate::exact_arith::{ComplexRational, Rational};

/// `(u + v)(u + v + 1)/2 + u`.
pub fn cantor_pair(u: &BigUint, v: &BigUint) -> BigUint {
    let w = u + v;
    ((&w * (&w + 1u32)) >> 1u32) + u
}

/// Inverse of [`cantor_pair`].
pub fn cantor_unpair(m: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8m + 1) - 1) / 2)
    let w = (((m << 3u32) + 1u32).sqrt() - 1u32) >> 1u32;
    let t = (&w * (&w + 1u32)) >> 1u32;
    let u = m - t;
    let v = w - &u;
    (u, v)
}

/// A natural number read as a rational through the enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalCode {
    pub n: BigUint,
}

impl RationalCode {
    pub fn new(n: impl Into<BigUint>) -> Self {
        RationalCode { n: n.into() }
    }

    /// `(s, a, b)` with `s = n mod 2` and `(a, b)` unpaired from `n div 2`.
    pub fn components(&self) -> (u8, BigUint, BigUint) {
        let (m, s) = self.n.div_rem(&BigUint::from(2u32));
        let (a, b) = cantor_unpair(&m);
        (if s.is_zero() { 0 } else { 1 }, a, b)
    }

    pub fn decode(&self) -> Rational {
        phi_decode(&self.n)
    }
}

/// `(-1)^s (a - 1)/(b + 1)` for the components of `n`.
pub fn phi_decode(n: &BigUint) -> Rational {
    let (s, a, b) = RationalCode::new(n.clone()).components();
    let num = BigInt::from(a) - BigInt::one();
    let num = if s == 1 { -num } else { num };
    Rational::new(num, BigInt::from(b) + 1).expect("denominator is positive")
}

/// Smallest `n` with `phi_decode(n) == q`.
pub fn phi_encode(q: &Rational) -> BigUint {
    let code = |s: u32, a: BigUint, b: BigUint| (cantor_pair(&a, &b) << 1u32) + s;
    if q.is_zero() {
        return code(0, BigUint::one(), BigUint::zero());
    }
    let negative = q.is_negative();
    let a = q.numer().magnitude().clone();
    let b = q.denom().magnitude().clone();
    // a - 1 = |num|, b + 1 = den, sign from s
    let mut best = code(u32::from(negative), &a + 1u32, &b - 1u32);
    if a.is_one() {
        // a = 0 gives a - 1 = -1, with the sign flipped by s
        best = best.min(code(u32::from(!negative), BigUint::zero(), &b - 1u32));
    }
    best
}

/// `x^2 + y^2 = 1`, exactly.
pub fn circle_decide(x: &Rational, y: &Rational) -> bool {
    x.square() + y.square() == Rational::one()
}

/// 1 when the lowest-terms denominator of `q` is even.
pub fn even_denominator(q: &Rational) -> u8 {
    u8::from(q.denom().is_even())
}

/// Two-sided rational bounds on `e^q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpBound {
    pub lower: Rational,
    pub upper: Rational,
    pub order: u32,
}

impl ExpBound {
    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }
}

/// `sum_{k<=m} t^k/k!` and the term `t^m/m!`.
fn partial_sum(t: &Rational, m: u32) -> (Rational, Rational) {
    let mut term = Rational::one();
    let mut sum = Rational::one();
    for k in 1..=m {
        term = &(&term * t) / &Rational::from(k as i64);
        sum = &sum + &term;
    }
    (sum, term)
}

/// `e^q` bracketed using the order-`m` Taylor polynomial.
///
/// Positive `q` is halved `j` times into `(0, 1]`, where the remainder is at
/// most `3 t^(m+1)/(m+1)!`; both bounds are then squared `j` times. Negative
/// `q` uses reciprocals of the bounds for `-q`.
///
/// Panics if `m == 0`.
pub fn exp_bounds(q: &Rational, m: u32) -> ExpBound {
    assert!(m >= 1, "order must be at least one");
    if q.is_zero() {
        return ExpBound {
            lower: Rational::one(),
            upper: Rational::one(),
            order: m,
        };
    }
    if q.is_negative() {
        let b = exp_bounds(&-q, m);
        return ExpBound {
            lower: b.upper.recip().expect("bounds are positive"),
            upper: b.lower.recip().expect("bounds are positive"),
            order: m,
        };
    }
    let one = Rational::one();
    let mut t = q.clone();
    let mut halvings = 0;
    while t > one {
        t = &t * &Rational::pow2(-1);
        halvings += 1;
    }
    let (sum, term) = partial_sum(&t, m);
    let remainder = &(&(&term * &t) * &Rational::from(3)) / &Rational::from(m as i64 + 1);
    let mut lower = sum;
    let mut upper = &lower + &remainder;
    for _ in 0..halvings {
        lower = lower.square();
        upper = upper.square();
    }
    ExpBound {
        lower,
        upper,
        order: m,
    }
}

/// `y >= e^x`, with the order at which the bounds separated (0 for `x = 0`).
pub fn exp_epigraph_witness(x: &Rational, y: &Rational) -> (bool, u32) {
    if x.is_zero() {
        return (y >= &Rational::one(), 0);
    }
    // e^x is irrational here, so one of the two exits is eventually taken
    let mut m = 1;
    loop {
        let b = exp_bounds(x, m);
        if y < &b.lower {
            return (false, m);
        }
        if y > &b.upper {
            return (true, m);
        }
        m += 1;
    }
}

/// `y >= e^x`.
pub fn exp_epigraph_decide(x: &Rational, y: &Rational) -> bool {
    exp_epigraph_witness(x, y).0
}

/// Membership of a rational point, as far as certificates reach. Never
/// more than a semi-decision: `Unknown` is a possible answer.
pub fn mandelbrot_rational_semi(c: &ComplexRational, cfg: &DecideConfig) -> Verdict {
    decide(&Parameter::Point(c.clone()), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::InCertificate;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn n(k: u32) -> BigUint {
        BigUint::from(k)
    }

    #[test]
    fn pairing_round_trip() {
        for m in 0u32..2000 {
            let (u, v) = cantor_unpair(&n(m));
            assert_eq!(cantor_pair(&u, &v), n(m));
        }
        assert_eq!(cantor_unpair(&n(2)), (n(1), n(0)));
        assert_eq!(cantor_pair(&n(0), &n(1)), n(1));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(phi_decode(&n(0)), q("-1"));
        assert_eq!(phi_decode(&n(1)), q("1"));
        assert_eq!(RationalCode::new(4u32).components(), (0, n(1), n(0)));
        assert_eq!(phi_decode(&n(4)), q("0"));
    }

    #[test]
    fn encode_examples() {
        assert_eq!(phi_encode(&q("-1")), n(0));
        assert_eq!(phi_encode(&q("1")), n(1));
        assert_eq!(phi_encode(&q("0")), n(4));
        for s in ["0", "1/2", "-7/3", "-1/5", "1/9", "12"] {
            assert_eq!(phi_decode(&phi_encode(&q(s))), q(s), "{s}");
        }
    }

    #[test]
    fn encode_is_smallest_preimage() {
        let mut first = std::collections::HashMap::new();
        for k in 0u32..3000 {
            first.entry(phi_decode(&n(k))).or_insert(k);
        }
        for (value, k) in first {
            assert_eq!(phi_encode(&value), n(k), "{value}");
        }
    }

    #[test]
    fn circle_and_even_denominator() {
        assert!(circle_decide(&q("3/5"), &q("4/5")));
        assert!(circle_decide(&q("1"), &q("0")));
        assert!(!circle_decide(&q("1"), &q("1")));
        assert_eq!(even_denominator(&q("1/2")), 1);
        assert_eq!(even_denominator(&q("1/3")), 0);
        assert_eq!(even_denominator(&q("2")), 0);
        assert_eq!(even_denominator(&q("2/4")), 1);
        assert_eq!(even_denominator(&q("6/4")), 1);
    }

    #[test]
    fn exp_examples() {
        let b = exp_bounds(&q("0"), 7);
        assert_eq!((b.lower, b.upper), (q("1"), q("1")));
        let b = exp_bounds(&q("1"), 4);
        assert_eq!(b.lower, q("65/24"));
        assert_eq!(b.upper, &q("65/24") + &q("1/40"));
        let b = exp_bounds(&q("-1"), 4);
        assert_eq!(b.lower, q("15/41"));
        assert_eq!(b.upper, q("24/65"));
    }

    #[test]
    fn epigraph_examples() {
        assert!(exp_epigraph_decide(&q("0"), &q("1")));
        assert!(!exp_epigraph_decide(&q("0"), &q("99/100")));
        assert_eq!(exp_epigraph_witness(&q("1"), &q("2")), (false, 2));
        assert_eq!(exp_epigraph_witness(&q("1"), &q("3")), (true, 3));
        assert!(!exp_epigraph_decide(&q("-1"), &q("-5")));
        assert!(exp_epigraph_decide(&q("-1"), &q("1/2")));
        assert!(!exp_epigraph_decide(&q("-1"), &q("1/3")));
    }

    #[test]
    fn semi_decision_examples() {
        let cfg = DecideConfig::default();
        let c = |re: &str| ComplexRational::real(q(re));
        assert!(mandelbrot_rational_semi(&c("-2"), &cfg).is_in());
        assert_eq!(mandelbrot_rational_semi(&c("1"), &cfg).escape_step(), Some(3));
        let v = mandelbrot_rational_semi(&c("-3/4"), &cfg);
        assert!(v.is_unknown(), "{v:?}");
        assert!(!matches!(
            v,
            Verdict::In {
                certificate: InCertificate::Bulb(_)
            }
        ));
    }
}
