use std::fmt;

use serde::{Deserialize, Serialize};

use super::dyadic::{dyadic_round, Dyadic, Round};
use super::{ComplexRational, Rational};

/// Closed interval `[lo, hi]` with dyadic endpoints.
///
/// The inherent arithmetic methods are exact; the `iv_*` functions round the
/// exact result outward onto the `2^-p` grid.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    /// Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: {lo} > {hi}");
        DyadicInterval { lo, hi }
    }

    pub fn point(d: Dyadic) -> Self {
        DyadicInterval {
            lo: d.clone(),
            hi: d,
        }
    }

    /// Smallest `2^-p` grid interval containing `r`.
    pub fn enclose(r: &Rational, p: u32) -> Self {
        DyadicInterval {
            lo: dyadic_round(r, p, Round::Down),
            hi: dyadic_round(r, p, Round::Up),
        }
    }

    /// Smallest `2^-p` grid interval containing `[lo, hi]`.
    pub fn enclose_range(lo: &Rational, hi: &Rational, p: u32) -> Self {
        assert!(lo <= hi);
        DyadicInterval {
            lo: dyadic_round(lo, p, Round::Down),
            hi: dyadic_round(hi, p, Round::Up),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn contains(&self, d: &Dyadic) -> bool {
        &self.lo <= d && d <= &self.hi
    }

    pub fn contains_rational(&self, r: &Rational) -> bool {
        &self.lo.to_rational() <= r && r <= &self.hi.to_rational()
    }

    /// `other ⊆ self`.
    pub fn encloses(&self, other: &DyadicInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        DyadicInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        DyadicInterval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn neg(&self) -> Self {
        DyadicInterval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        DyadicInterval { lo, hi }
    }

    pub fn sqr(&self) -> Self {
        let zero = Dyadic::zero();
        if self.lo >= zero {
            DyadicInterval {
                lo: self.lo.square(),
                hi: self.hi.square(),
            }
        } else if self.hi <= zero {
            DyadicInterval {
                lo: self.hi.square(),
                hi: self.lo.square(),
            }
        } else {
            let (a, b) = (self.lo.square(), self.hi.square());
            DyadicInterval {
                lo: zero,
                hi: a.max(b),
            }
        }
    }

    /// Multiplies by `2^k` exactly.
    pub fn shl(&self, k: i64) -> Self {
        DyadicInterval {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
        }
    }

    /// Outward rounding onto the `2^-p` grid.
    pub fn round_out(&self, p: u32) -> Self {
        DyadicInterval {
            lo: self.lo.round_to(p, Round::Down),
            hi: self.hi.round_to(p, Round::Up),
        }
    }
}

impl From<Dyadic> for DyadicInterval {
    fn from(d: Dyadic) -> Self {
        DyadicInterval::point(d)
    }
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.to_rational(), self.hi.to_rational())
    }
}

pub fn iv_add(a: &DyadicInterval, b: &DyadicInterval, p: u32) -> DyadicInterval {
    a.add(b).round_out(p)
}

pub fn iv_sub(a: &DyadicInterval, b: &DyadicInterval, p: u32) -> DyadicInterval {
    a.sub(b).round_out(p)
}

pub fn iv_mul(a: &DyadicInterval, b: &DyadicInterval, p: u32) -> DyadicInterval {
    a.mul(b).round_out(p)
}

pub fn iv_sqr(a: &DyadicInterval, p: u32) -> DyadicInterval {
    a.sqr().round_out(p)
}

/// Axis-aligned enclosure of a set of complex numbers.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ComplexBox {
    pub re: DyadicInterval,
    pub im: DyadicInterval,
}

impl ComplexBox {
    pub fn new(re: DyadicInterval, im: DyadicInterval) -> Self {
        ComplexBox { re, im }
    }

    pub fn zero() -> Self {
        ComplexBox::point(Dyadic::zero(), Dyadic::zero())
    }

    pub fn point(re: Dyadic, im: Dyadic) -> Self {
        ComplexBox {
            re: DyadicInterval::point(re),
            im: DyadicInterval::point(im),
        }
    }

    /// Smallest `2^-p` grid box containing `z`.
    pub fn enclose(z: &ComplexRational, p: u32) -> Self {
        ComplexBox {
            re: DyadicInterval::enclose(&z.re, p),
            im: DyadicInterval::enclose(&z.im, p),
        }
    }

    pub fn contains(&self, z: &ComplexRational) -> bool {
        self.re.contains_rational(&z.re) && self.im.contains_rational(&z.im)
    }

    pub fn encloses(&self, other: &ComplexBox) -> bool {
        self.re.encloses(&other.re) && self.im.encloses(&other.im)
    }

    pub fn is_point(&self) -> bool {
        self.re.lo() == self.re.hi() && self.im.lo() == self.im.hi()
    }

    /// The single point of a degenerate box.
    pub fn as_point(&self) -> Option<ComplexRational> {
        self.is_point().then(|| {
            ComplexRational::new(self.re.lo().to_rational(), self.im.lo().to_rational())
        })
    }
}

/// Encloses `z'^2 + c'` for every `z' ∈ z`, `c' ∈ c`. The components are
/// evaluated exactly and rounded outward once.
pub fn box_step(z: &ComplexBox, c: &ComplexBox, p: u32) -> ComplexBox {
    let re = z.re.sqr().sub(&z.im.sqr()).add(&c.re).round_out(p);
    let im = z.re.mul(&z.im).shl(1).add(&c.im).round_out(p);
    ComplexBox { re, im }
}

/// Encloses `|z'|^2` for every `z' ∈ z`.
pub fn box_abs_sq_bounds(z: &ComplexBox, p: u32) -> DyadicInterval {
    z.re.sqr().add(&z.im.sqr()).round_out(p)
}
