//! Exact rational and complex-rational numbers, dyadic rounding, outward
//! rounded interval and box arithmetic, and real-number oracles.
//!
//! Everything here is a value type: operations are pure and results are
//! immutable once built.

pub(crate) mod dyadic;
mod interval;
mod oracle;
mod rational;

pub use dyadic::{dyadic_round, Dyadic, Round};
pub use interval::{
    box_abs_sq_bounds, box_step, iv_add, iv_mul, iv_sqr, iv_sub, ComplexBox, DyadicInterval,
};
pub use oracle::{oracle_query, BuiltinOracle, RealOracle};
pub use rational::{rat_normalize, ComplexRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed number `{0}`")]
    Parse(String),
}
