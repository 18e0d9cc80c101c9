use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ArithError;

/// Exact rational number, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

// Canonical form makes hashing the raw parts consistent with `Eq`.
impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.numer().hash(state);
        self.0.denom().hash(state);
    }
}

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    /// `num / den` reduced to canonical form.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ArithError> {
        rat_normalize(num.into(), den.into())
    }

    /// Builds from parts already known to be coprime with `den > 0`.
    pub(crate) fn from_reduced(num: BigInt, den: BigInt) -> Self {
        debug_assert!(den.is_positive());
        debug_assert!(num.gcd(&den).is_one());
        Rational(BigRational::new_raw(num, den))
    }

    /// Reduces `num / den` where `den > 0` is already guaranteed.
    pub(crate) fn from_positive_den(num: BigInt, den: BigInt) -> Self {
        debug_assert!(den.is_positive());
        let g = num.gcd(&den);
        if g.is_one() {
            Rational(BigRational::new_raw(num, den))
        } else {
            Rational(BigRational::new_raw(num / &g, den / g))
        }
    }

    /// `2^k` for any integer `k`.
    pub fn pow2(k: i64) -> Self {
        let p = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            Rational::from_reduced(p, BigInt::one())
        } else {
            Rational::from_reduced(BigInt::one(), p)
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn square(&self) -> Self {
        // squares of coprime parts stay coprime
        Rational::from_reduced(self.numer() * self.numer(), self.denom() * self.denom())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Rational(self.0.recip()))
        }
    }

    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    pub fn ceil(&self) -> BigInt {
        -((-self.numer()).div_floor(self.denom()))
    }

    /// Larger of the numerator and denominator bit lengths.
    pub fn bits(&self) -> u64 {
        self.numer().bits().max(self.denom().bits())
    }

    pub fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }

    pub fn pow(&self, e: u32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, e))
    }
}

/// Canonical `num/den`: lowest terms, positive denominator.
pub fn rat_normalize(num: BigInt, den: BigInt) -> Result<Rational, ArithError> {
    if den.is_zero() {
        return Err(ArithError::ZeroDenominator);
    }
    let (num, den) = if den.sign() == Sign::Minus {
        (-num, -den)
    } else {
        (num, den)
    };
    Ok(Rational::from_positive_den(num, den))
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&Rational> for &Rational {
    type Output = Rational;
    /// Panics on division by zero.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rational(&self.0 / &rhs.0)
    }
}

impl Div<Rational> for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        &self / &rhs
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p`, `p/q` and finite decimals such as `-0.375`, each with an
/// optional sign.
impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(bad());
        }
        if let Some((n, d)) = t.split_once('/') {
            let num = parse_int(n).ok_or_else(bad)?;
            let d = d.trim();
            if d.starts_with(['+', '-']) {
                return Err(bad());
            }
            let den = parse_int(d).ok_or_else(bad)?;
            return rat_normalize(num, den);
        }
        if let Some((int_part, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int_part.starts_with('-');
            let digits = int_part.trim_start_matches(['+', '-']);
            if int_part.len() - digits.len() > 1 || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let joined = format!("{digits}{frac}");
            let mut num: BigInt = joined.parse().map_err(|_| bad())?;
            if negative {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10u8), frac.len());
            return rat_normalize(num, den);
        }
        Ok(Rational::from_integer(parse_int(t).ok_or_else(bad)?))
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let n: BigInt = digits.parse().ok()?;
    Some(if s.starts_with('-') { -n } else { n })
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact complex number with rational components.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        ComplexRational { re, im }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn real(re: Rational) -> Self {
        ComplexRational {
            re,
            im: Rational::zero(),
        }
    }

    /// `|z|^2`, exact.
    pub fn norm_sqr(&self) -> Rational {
        self.re.square() + self.im.square()
    }

    /// `self^2 + c`, exact.
    pub fn square_add(&self, c: &ComplexRational) -> ComplexRational {
        let (re, im) = self.square_add_raw(c);
        ComplexRational {
            re: Rational::from_positive_den(re.0, re.1),
            im: Rational::from_positive_den(im.0, im.1),
        }
    }

    /// `self^2 + c` when every prime factor of the denominators of `self`
    /// divides `support`, and `support` is a multiple of both denominators
    /// of `c`. The result then satisfies the same condition, so whole orbits
    /// of zero can be reduced with gcds against `support` alone.
    pub(crate) fn square_add_supported(&self, c: &ComplexRational, support: &BigInt) -> Self {
        let (re, im) = self.square_add_raw(c);
        ComplexRational {
            re: reduce_supported(re.0, re.1, support),
            im: reduce_supported(im.0, im.1, support),
        }
    }

    fn square_add_raw(&self, c: &ComplexRational) -> ((BigInt, BigInt), (BigInt, BigInt)) {
        let (x, y) = (&self.re, &self.im);
        // x^2 - y^2 + cr and 2xy + ci over common denominators, unreduced
        let (xn, yn) = (x.numer(), y.numer());
        let (num, den) = if x.denom() == y.denom() {
            (xn * xn - yn * yn, x.denom() * x.denom())
        } else {
            let dx2 = x.denom() * x.denom();
            let dy2 = y.denom() * y.denom();
            (xn * xn * &dy2 - yn * yn * &dx2, dx2 * dy2)
        };
        let re = add_raw(num, den, &c.re);
        let num = (xn * yn) << 1;
        let im = add_raw(num, x.denom() * y.denom(), &c.im);
        (re, im)
    }

    /// `|self|^2 > bound`, without reducing any fraction.
    pub fn norm_sqr_exceeds(&self, bound: &Rational) -> bool {
        let (num, den) = self.norm_sqr_parts();
        num * bound.denom() > bound.numer() * den
    }

    /// `|self|^2` as an unreduced `(num, den)` with `den > 0`.
    pub(crate) fn norm_sqr_parts(&self) -> (BigInt, BigInt) {
        let (a, b) = (self.re.numer(), self.re.denom());
        let (c, d) = (self.im.numer(), self.im.denom());
        if b == d {
            return (a * a + c * c, b * b);
        }
        let (b2, d2) = (b * b, d * d);
        (a * a * &d2 + c * c * &b2, b2 * d2)
    }

    pub fn bits(&self) -> u64 {
        self.re.bits().max(self.im.bits())
    }
}

fn add_raw(num: BigInt, den: BigInt, c: &Rational) -> (BigInt, BigInt) {
    let num = num * c.denom() + c.numer() * &den;
    (num, den * c.denom())
}

/// Lowest terms for `num/den`, given that every prime factor of `den`
/// divides `support`. Only gcds with `support`-sized numbers are taken.
fn reduce_supported(mut num: BigInt, mut den: BigInt, support: &BigInt) -> Rational {
    debug_assert!(den.is_positive());
    if support.is_one() || num.is_zero() {
        return Rational::from_positive_den(num, den);
    }
    loop {
        let g = (&num % support).gcd(support);
        if g.is_one() {
            break;
        }
        let h = (&den % &g).gcd(&g);
        if h.is_one() {
            break;
        }
        // strip the common power of h: h, h^2, h^4, ... then greedily back down
        let divides = |p: &BigInt, num: &BigInt, den: &BigInt| {
            (num % p).is_zero() && (den % p).is_zero()
        };
        let mut powers = vec![h];
        while divides(powers.last().unwrap(), &num, &den) {
            let last = powers.last().unwrap();
            powers.push(last * last);
        }
        powers.pop();
        for p in powers.iter().rev() {
            if divides(p, &num, &den) {
                num /= p;
                den /= p;
            }
        }
    }
    Rational::from_reduced(num, den)
}

impl fmt::Display for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{} - {}i", self.re, self.im.abs())
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for ComplexRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
