use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::{ArithError, Rational};

/// A computable real given by its approximations: `approx(m)` must lie
/// strictly within `2^-m` of the represented value, for every `m`.
///
/// Oracles are total by contract. An implementation that fails to return is
/// outside what this crate can detect.
pub trait RealOracle: Send + Sync {
    fn approx(&self, m: u32) -> Rational;
}

impl<F> RealOracle for F
where
    F: Fn(u32) -> Rational + Send + Sync,
{
    fn approx(&self, m: u32) -> Rational {
        self(m)
    }
}

/// `q_m` for the real represented by `o`; `|x - q_m| < 2^-m`.
pub fn oracle_query(o: &(impl RealOracle + ?Sized), m: u32) -> Rational {
    o.approx(m)
}

/// The small oracle family reachable from the command line.
#[derive(Clone, PartialEq, Eq)]
pub enum BuiltinOracle {
    /// Exactly this rational at every precision.
    Rational(Rational),
    /// `±sqrt(radicand)` via integer square roots.
    Sqrt { radicand: Rational, negative: bool },
}

impl BuiltinOracle {
    pub fn constant(q: Rational) -> Self {
        BuiltinOracle::Rational(q)
    }

    pub fn sqrt(radicand: Rational) -> Result<Self, ArithError> {
        if radicand.is_negative() {
            return Err(ArithError::Parse(format!("sqrt of negative {radicand}")));
        }
        Ok(BuiltinOracle::Sqrt {
            radicand,
            negative: false,
        })
    }
}

/// `floor(sqrt(r) * 2^k) / 2^k` up to the denominator, within `2^-k` below.
fn sqrt_approx(r: &Rational, k: u32) -> Rational {
    // sqrt(u/v) = sqrt(u v) / v
    let (u, v) = (r.numer(), r.denom());
    let scaled: BigInt = (u * v) << (2 * k as u64);
    let root = scaled.sqrt();
    Rational::from_positive_den(root, v << k as u64)
}

impl RealOracle for BuiltinOracle {
    fn approx(&self, m: u32) -> Rational {
        match self {
            BuiltinOracle::Rational(q) => q.clone(),
            BuiltinOracle::Sqrt { radicand, negative } => {
                let q = sqrt_approx(radicand, m + 2);
                if *negative {
                    -q
                } else {
                    q
                }
            }
        }
    }
}

impl fmt::Display for BuiltinOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinOracle::Rational(q) => write!(f, "{q}"),
            BuiltinOracle::Sqrt { radicand, negative } => {
                write!(f, "{}sqrt:{radicand}", if *negative { "-" } else { "" })
            }
        }
    }
}

impl fmt::Debug for BuiltinOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `p/q`, `rat:p/q`, `sqrt:p/q` or `-sqrt:p/q`.
impl FromStr for BuiltinOracle {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("rat:") {
            return Ok(BuiltinOracle::Rational(rest.parse()?));
        }
        let (negative, body) = match t.strip_prefix('-') {
            Some(rest) if rest.starts_with("sqrt:") => (true, rest),
            _ => (false, t),
        };
        if let Some(rest) = body.strip_prefix("sqrt:") {
            let mut o = BuiltinOracle::sqrt(rest.parse()?)?;
            if let BuiltinOracle::Sqrt { negative: n, .. } = &mut o {
                *n = negative;
            }
            return Ok(o);
        }
        Ok(BuiltinOracle::Rational(t.parse()?))
    }
}
