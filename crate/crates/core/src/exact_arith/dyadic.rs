use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ArithError, Rational};

/// Rounding direction for [`dyadic_round`] and interval endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// `mantissa * 2^exponent`. Canonical: the mantissa is odd, or zero with a
/// zero exponent.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        let mut d = Dyadic { mantissa, exponent };
        d.canonicalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic::default()
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Dyadic::new(n.into(), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    fn canonicalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        if let Some(tz) = self.mantissa.trailing_zeros() {
            if tz > 0 {
                self.mantissa >>= tz;
                self.exponent += tz as i64;
            }
        }
    }

    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            Rational::from_reduced(
                self.mantissa.clone(),
                BigInt::one() << self.exponent.unsigned_abs(),
            )
        }
    }

    /// Rounds onto the grid `2^-p * Z` in the given direction.
    pub fn round_to(&self, p: u32, dir: Round) -> Dyadic {
        let target = -(p as i64);
        if self.exponent >= target {
            return self.clone();
        }
        let shift = (target - self.exponent) as u64;
        let m = match dir {
            Round::Down => &self.mantissa >> shift,
            Round::Up => -((-&self.mantissa) >> shift),
        };
        Dyadic::new(m, target)
    }

    pub fn square(&self) -> Dyadic {
        Dyadic {
            mantissa: &self.mantissa * &self.mantissa,
            exponent: 2 * self.exponent,
        }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
        }
    }
}

/// Rounds `r` to a multiple of `2^-p`, downward or upward, so the result
/// is within `2^-p` of `r` on the requested side.
///
/// Panics if `p == 0`.
pub fn dyadic_round(r: &Rational, p: u32, dir: Round) -> Dyadic {
    assert!(p >= 1, "precision must be at least one bit");
    round_fraction(r.numer(), r.denom(), p, dir)
}

/// [`dyadic_round`] of `num / den` for `den > 0`, in any terms.
pub(crate) fn round_fraction(num: &BigInt, den: &BigInt, p: u32, dir: Round) -> Dyadic {
    let scaled = num << p as u64;
    let m = match dir {
        Round::Down => scaled.div_floor(den),
        Round::Up => scaled.div_ceil(den),
    };
    Dyadic::new(m, -(p as i64))
}

fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, i64) {
    match a.exponent.cmp(&b.exponent) {
        Ordering::Equal => (a.mantissa.clone(), b.mantissa.clone(), a.exponent),
        Ordering::Greater => (
            &a.mantissa << (a.exponent - b.exponent) as u64,
            b.mantissa.clone(),
            b.exponent,
        ),
        Ordering::Less => (
            a.mantissa.clone(),
            &b.mantissa << (b.exponent - a.exponent) as u64,
            a.exponent,
        ),
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (a, b, e) = aligned(self, rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // product of odd mantissas is odd, so this is canonical
        Dyadic {
            mantissa: &self.mantissa * &rhs.mantissa,
            exponent: self.exponent + rhs.exponent,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ls, rs) = (self.mantissa.sign(), other.mantissa.sign());
        if ls != rs {
            return ls.cmp(&rs);
        }
        let (a, b, _) = aligned(self, other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_integer(n)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Parse(s.to_string());
        let (m, e) = s.trim().split_once("*2^").ok_or_else(bad)?;
        let mantissa: BigInt = m.parse().map_err(|_| bad())?;
        let exponent: i64 = e.parse().map_err(|_| bad())?;
        Ok(Dyadic::new(mantissa, exponent))
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
