//! Certified membership decisions for the Mandelbrot set.
//!
//! Points are classified as [`certifier::Verdict::Out`] (an escape step
//! proven by exact or outward-rounded interval arithmetic),
//! [`certifier::Verdict::In`] (an exact cycle or a closed-form region
//! proof), or [`certifier::Verdict::Unknown`]. No verdict comes from
//! floating point.
//!
//! Alongside the decider the crate carries:
//!
//! - [`zeno`]: a Turing machine simulator with accelerated ("Zeno") time
//!   accounting and limit classification of tape cells.
//! - [`rational`]: an enumeration of the rationals and deciders for sets of
//!   rationals (unit circle, even denominators, the epigraph of `exp`).
//! - [`render`]: grid classification, escape-band images and certified area
//!   bounds.

pub mod certifier;
pub mod exact_arith;
pub mod rational;
pub mod render;
pub mod zeno;

pub use certifier::{decide, DecideConfig, Parameter, Verdict};
pub use exact_arith::{ComplexBox, ComplexRational, Dyadic, DyadicInterval, Rational};
