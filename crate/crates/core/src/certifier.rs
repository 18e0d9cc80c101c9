//! Three-valued membership decisions.
//!
//! `c` belongs to the Mandelbrot set when `|z_n| <= 2` for every `n >= 1`,
//! where `z_0 = 0` and `z_{n+1} = z_n^2 + c`. A single step with
//! `|z_n|^2 > 4` refutes membership outright; membership itself is only
//! certified by an exact eventually periodic orbit or by the closed-form
//! main cardioid and period-2 disk. Anything else is `Unknown`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;

use serde::{Deserialize, Serialize};

use crate::exact_arith::{
    box_abs_sq_bounds, box_step, ComplexBox, ComplexRational, Dyadic,
    DyadicInterval, RealOracle, Round, Rational,
};
use crate::exact_arith::dyadic::round_fraction;

/// Iteration budget for point queries.
pub const DEFAULT_BUDGET: u32 = 50;
/// Iteration budget for escape-band rendering.
pub const DEFAULT_BAND_BUDGET: u32 = 60;
pub const DEFAULT_PRECISION: u32 = 64;
pub const DEFAULT_PRECISION_MAX: u32 = 256;
pub const DEFAULT_BIT_CAP: u64 = 4096;

/// Result of iterating `z -> z^2 + c` from zero in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrbitOutcome {
    /// `|z_n|^2 > 4`, and `n` is the first such step.
    Escaped { n: u32, z_n: ComplexRational },
    /// `z_preperiod == z_{preperiod + period}`, with every value up to the
    /// repeat inside the closed disk of radius 2.
    Cycle {
        preperiod: u32,
        period: u32,
        witness: ComplexRational,
    },
    /// The budget ran out at step `n` without escape or repeat.
    Exhausted { n: u32, z_n: ComplexRational },
    /// `z_n` needed more than the permitted number of bits.
    BitCapHit { n: u32 },
}

pub fn iterate_exact(c: &ComplexRational, budget: u32, bit_cap: u64) -> OrbitOutcome {
    assert!(budget >= 1, "budget must be at least one step");
    let four = Rational::from(4);
    let support = c.re.denom().lcm(c.im.denom());
    let mut seen: HashMap<ComplexRational, u32> = HashMap::new();
    let mut z = ComplexRational::zero();
    seen.insert(z.clone(), 0);
    for n in 1..=budget {
        z = z.square_add_supported(c, &support);
        if z.norm_sqr_exceeds(&four) {
            return OrbitOutcome::Escaped { n, z_n: z };
        }
        if let Some(&first) = seen.get(&z) {
            return OrbitOutcome::Cycle {
                preperiod: first,
                period: n - first,
                witness: z,
            };
        }
        if z.bits() > bit_cap {
            return OrbitOutcome::BitCapHit { n };
        }
        seen.insert(z.clone(), n);
    }
    OrbitOutcome::Exhausted { n: budget, z_n: z }
}

/// An exact repeat in the orbit of zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCert {
    pub preperiod: u32,
    pub period: u32,
    pub witness: ComplexRational,
}

/// `bound` is a proven upper bound, strictly negative, for the region's
/// defining polynomial over the whole input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCert {
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InCertificate {
    Cycle(CycleCert),
    /// `q (q + x - 1/4) - y^2/4 < 0` with `q = (x - 1/4)^2 + y^2`.
    Cardioid(RegionCert),
    /// `(x + 1)^2 + y^2 - 1/16 < 0`.
    Bulb(RegionCert),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// `|z_n|^2 >= abs_sq_lower > 4` for every parameter in the input.
    Out { n: u32, abs_sq_lower: Dyadic },
    In { certificate: InCertificate },
    Unknown { budget: u32, precision: u32 },
}

impl Verdict {
    pub fn is_in(&self) -> bool {
        matches!(self, Verdict::In { .. })
    }

    pub fn is_out(&self) -> bool {
        matches!(self, Verdict::Out { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Out { .. } => VerdictKind::Out,
            Verdict::In { .. } => VerdictKind::In,
            Verdict::Unknown { .. } => VerdictKind::Unknown,
        }
    }

    /// First escape step of an `Out` verdict.
    pub fn escape_step(&self) -> Option<u32> {
        match self {
            Verdict::Out { n, .. } => Some(*n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Out,
    In,
    Unknown,
}

/// What is being decided: a single exact point or every point of a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parameter {
    Point(ComplexRational),
    Box(ComplexBox),
}

impl Parameter {
    /// Enclosure on the `2^-p` grid. Boxes are returned unchanged.
    pub fn enclose(&self, p: u32) -> ComplexBox {
        match self {
            Parameter::Point(c) => ComplexBox::enclose(c, p),
            Parameter::Box(b) => b.clone(),
        }
    }
}

impl From<ComplexRational> for Parameter {
    fn from(c: ComplexRational) -> Self {
        Parameter::Point(c)
    }
}

impl From<ComplexBox> for Parameter {
    fn from(b: ComplexBox) -> Self {
        Parameter::Box(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecideConfig {
    pub budget: u32,
    pub p0: u32,
    pub p_max: u32,
    pub bit_cap: u64,
    /// Try the cardioid and period-2 disk certificates.
    pub use_regions: bool,
    /// Try exact cycle detection on point inputs.
    pub use_cycles: bool,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            budget: DEFAULT_BUDGET,
            p0: DEFAULT_PRECISION,
            p_max: DEFAULT_PRECISION_MAX,
            bit_cap: DEFAULT_BIT_CAP,
            use_regions: true,
            use_cycles: true,
        }
    }
}

impl DecideConfig {
    pub fn with_budget(budget: u32) -> Self {
        DecideConfig {
            budget,
            ..Default::default()
        }
    }

    /// Only escape certificates, as a plain escape-time plotter would find.
    pub fn complement_only(mut self) -> Self {
        self.use_regions = false;
        self.use_cycles = false;
        self
    }
}

/// Interval escape search from the point box zero.
///
/// A step whose `|z|^2` enclosure contains 4 and is wider than 8 means the
/// precision is too coarse; the search restarts at doubled precision, up to
/// `p_max`.
pub fn certify_out_interval(c: &Parameter, budget: u32, p0: u32, p_max: u32) -> Verdict {
    assert!(budget >= 1 && p0 >= 1 && p0 <= p_max);
    let four = Dyadic::from(4);
    let eight = Dyadic::from(8);
    let mut p = p0;
    'restart: loop {
        let cb = c.enclose(p);
        let mut z = ComplexBox::zero();
        for n in 1..=budget {
            z = box_step(&z, &cb, p);
            let abs_sq = box_abs_sq_bounds(&z, p);
            if abs_sq.lo() > &four {
                return Verdict::Out {
                    n,
                    abs_sq_lower: abs_sq.lo().clone(),
                };
            }
            if abs_sq.contains(&four) && abs_sq.width() > eight {
                if p >= p_max {
                    return Verdict::Unknown {
                        budget,
                        precision: p,
                    };
                }
                p = (2 * p).min(p_max);
                continue 'restart;
            }
        }
        return Verdict::Unknown {
            budget,
            precision: p,
        };
    }
}

pub fn certify_in_cycle(c: &ComplexRational, budget: u32, bit_cap: u64) -> Verdict {
    match iterate_exact(c, budget, bit_cap) {
        OrbitOutcome::Cycle {
            preperiod,
            period,
            witness,
        } => Verdict::In {
            certificate: InCertificate::Cycle(CycleCert {
                preperiod,
                period,
                witness,
            }),
        },
        _ => Verdict::Unknown {
            budget,
            precision: 0,
        },
    }
}

/// Closed-form membership: main cardioid, then the period-2 disk.
///
/// Points are tested with exact rationals; boxes with exact dyadic interval
/// evaluation, which proves the inequality for every point in the box.
pub fn certify_in_region(c: &Parameter) -> Option<InCertificate> {
    let cardioid = match c {
        Parameter::Point(c) => cardioid_margin_point(c),
        Parameter::Box(b) => cardioid_margin_box(b),
    };
    if cardioid.is_negative() {
        return Some(InCertificate::Cardioid(RegionCert { bound: cardioid }));
    }
    let bulb = match c {
        Parameter::Point(c) => bulb_margin_point(c),
        Parameter::Box(b) => bulb_margin_box(b),
    };
    if bulb.is_negative() {
        return Some(InCertificate::Bulb(RegionCert { bound: bulb }));
    }
    None
}

/// `c` over one denominator: `(re_num, im_num, den)` with `den > 0`.
fn common_parts(c: &ComplexRational) -> (BigInt, BigInt, BigInt) {
    let (b, f) = (c.re.denom(), c.im.denom());
    if b == f {
        (c.re.numer().clone(), c.im.numer().clone(), b.clone())
    } else {
        (c.re.numer() * f, c.im.numer() * b, b * f)
    }
}

fn cardioid_margin_point(c: &ComplexRational) -> Rational {
    // u = x - 1/4 = U / 4D, y = 4Y / 4D
    let (x, y, d) = common_parts(c);
    let d4 = &d << 2;
    let u = (x << 2) - &d;
    let y = y << 2;
    let y2 = &y * &y;
    let q = &u * &u + &y2;
    // q (q + u) - y^2 / 4, over 4 (4D)^4
    let num = ((&q + &u * &d4) * q << 2) - y2 * &d4 * &d4;
    let d2 = &d4 * &d4;
    Rational::from_positive_den(num, (&d2 * &d2) << 2)
}

fn bulb_margin_point(c: &ComplexRational) -> Rational {
    let (x, y, d) = common_parts(c);
    let v = x + &d;
    let num = ((&v * &v + &y * &y) << 4) - &d * &d;
    Rational::from_positive_den(num, (&d * &d) << 4)
}

fn cardioid_margin_box(b: &ComplexBox) -> Rational {
    let quarter = DyadicInterval::point(Dyadic::new(1.into(), -2));
    let xs = b.re.sub(&quarter);
    let y2 = b.im.sqr();
    let q = xs.sqr().add(&y2);
    let t = q.add(&xs);
    q.mul(&t).sub(&y2.shl(-2)).hi().to_rational()
}

fn bulb_margin_box(b: &ComplexBox) -> Rational {
    let one = DyadicInterval::point(Dyadic::from(1));
    let x1 = b.re.add(&one);
    x1.sqr()
        .add(&b.im.sqr())
        .hi()
        .to_rational()
        - Rational::new(1, 16).unwrap()
}

/// Smallest-effort dyadic lower bound for `r > 4` that still exceeds 4.
fn escape_lower_bound(z: &ComplexRational, p0: u32) -> Dyadic {
    let four = Dyadic::from(4);
    let (num, den) = z.norm_sqr_parts();
    let mut p = p0.max(1);
    loop {
        let d = round_fraction(&num, &den, p, Round::Down);
        if d > four {
            return d;
        }
        p *= 2;
    }
}

/// Region certificate, then exact cycle or escape for points, then interval
/// escape search. The first certificate found wins.
pub fn decide(c: &Parameter, cfg: &DecideConfig) -> Verdict {
    if cfg.use_regions {
        if let Some(certificate) = certify_in_region(c) {
            return Verdict::In { certificate };
        }
    }
    if let Parameter::Point(point) = c {
        match iterate_exact(point, cfg.budget, cfg.bit_cap) {
            OrbitOutcome::Escaped { n, z_n } => {
                return Verdict::Out {
                    n,
                    abs_sq_lower: escape_lower_bound(&z_n, cfg.p0),
                }
            }
            OrbitOutcome::Cycle {
                preperiod,
                period,
                witness,
            } if cfg.use_cycles => {
                return Verdict::In {
                    certificate: InCertificate::Cycle(CycleCert {
                        preperiod,
                        period,
                        witness,
                    }),
                }
            }
            // The exact orbit stayed bounded for the whole budget, so no
            // enclosure of it can escape within the budget either.
            OrbitOutcome::Exhausted { .. } | OrbitOutcome::Cycle { .. } => {
                return Verdict::Unknown {
                    budget: cfg.budget,
                    precision: cfg.p0,
                }
            }
            OrbitOutcome::BitCapHit { .. } => {}
        }
    }
    certify_out_interval(c, cfg.budget, cfg.p0, cfg.p_max)
}

/// Outcome of [`decide_oracle`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedVerdict {
    pub verdict: Verdict,
    /// Stage that produced the certificate, if any.
    pub stage: Option<u32>,
    /// Parameter box of the last stage run.
    pub last_box: ComplexBox,
}

/// Parameter box of stage `i`: each component is `q_i ± 2^-i` from the
/// oracles, rounded outward on the `2^-p` grid.
pub fn stage_box(
    ox: &(impl RealOracle + ?Sized),
    oy: &(impl RealOracle + ?Sized),
    i: u32,
    p: u32,
) -> ComplexBox {
    let radius = Rational::pow2(-(i as i64));
    let component = |q: Rational| {
        DyadicInterval::enclose_range(&(&q - &radius), &(&q + &radius), p)
    };
    ComplexBox::new(component(ox.approx(i)), component(oy.approx(i)))
}

/// Budgeted semi-decision for a point given by two real oracles.
///
/// Stage `i` recomputes everything from scratch with the stage-`i` box and
/// `i` iterations. The first certifying stage decides; after `stages`
/// stages without a certificate the answer is `Unknown`.
pub fn decide_oracle(
    ox: &(impl RealOracle + ?Sized),
    oy: &(impl RealOracle + ?Sized),
    stages: u32,
    cfg: &DecideConfig,
) -> StagedVerdict {
    assert!(stages >= 1, "at least one stage is required");
    let mut last_box = ComplexBox::zero();
    let mut precision = cfg.p0;
    for i in 1..=stages {
        precision = cfg.p0 + i;
        let b = stage_box(ox, oy, i, precision);
        let param = Parameter::Box(b.clone());
        last_box = b;
        if cfg.use_regions {
            if let Some(certificate) = certify_in_region(&param) {
                return StagedVerdict {
                    verdict: Verdict::In { certificate },
                    stage: Some(i),
                    last_box,
                };
            }
        }
        let v = certify_out_interval(&param, i, precision, cfg.p_max.max(precision));
        if v.is_out() {
            return StagedVerdict {
                verdict: v,
                stage: Some(i),
                last_box,
            };
        }
    }
    StagedVerdict {
        verdict: Verdict::Unknown {
            budget: stages,
            precision,
        },
        stage: None,
        last_box,
    }
}

/// Result of re-validating a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recheck {
    Confirmed,
    Refuted,
    /// The check would exceed the bit limit (exact escape replay only).
    Skipped,
}

/// Re-validates a verdict by plain exact arithmetic, without going through
/// the routines that produced it.
///
/// Escape certificates on points are replayed exactly while the orbit stays
/// under `bit_limit` bits; region certificates on boxes are re-derived from
/// rational interval endpoints.
pub fn recheck(c: &Parameter, verdict: &Verdict, bit_limit: u64) -> Recheck {
    let ok = |b: bool| if b { Recheck::Confirmed } else { Recheck::Refuted };
    let four = Rational::from(4);
    match (verdict, c) {
        (Verdict::Unknown { .. }, _) => Recheck::Confirmed,
        (Verdict::Out { n, abs_sq_lower }, Parameter::Point(c)) => {
            if abs_sq_lower.to_rational() <= four {
                return Recheck::Refuted;
            }
            let mut z = ComplexRational::zero();
            for _ in 0..*n {
                let re = &z.re * &z.re - &z.im * &z.im + &c.re;
                let im = Rational::from(2) * &z.re * &z.im + &c.im;
                z = ComplexRational::new(re, im);
                if z.bits() > bit_limit {
                    return Recheck::Skipped;
                }
            }
            let m = &z.re * &z.re + &z.im * &z.im;
            ok(m > four && m >= abs_sq_lower.to_rational())
        }
        (Verdict::Out { abs_sq_lower, .. }, Parameter::Box(_)) => {
            ok(abs_sq_lower.to_rational() > four)
        }
        (Verdict::In { certificate }, _) => match certificate {
            InCertificate::Cycle(cert) => match c {
                Parameter::Point(c) => ok(recheck_cycle(c, cert)),
                Parameter::Box(b) => match b.as_point() {
                    Some(c) => ok(recheck_cycle(&c, cert)),
                    None => Recheck::Refuted,
                },
            },
            InCertificate::Cardioid(cert) => {
                let bound = rational_region_bound(c, true);
                ok(cert.bound.is_negative() && bound <= cert.bound)
            }
            InCertificate::Bulb(cert) => {
                let bound = rational_region_bound(c, false);
                ok(cert.bound.is_negative() && bound <= cert.bound)
            }
        },
    }
}

fn recheck_cycle(c: &ComplexRational, cert: &CycleCert) -> bool {
    let four = Rational::from(4);
    let mut orbit = vec![ComplexRational::zero()];
    for _ in 0..(cert.preperiod + cert.period) {
        let z = orbit.last().unwrap();
        let re = &z.re * &z.re - &z.im * &z.im + &c.re;
        let im = Rational::from(2) * &z.re * &z.im + &c.im;
        let next = ComplexRational::new(re, im);
        if next.norm_sqr() > four {
            return false;
        }
        orbit.push(next);
    }
    let (a, b) = (cert.preperiod as usize, (cert.preperiod + cert.period) as usize);
    cert.period >= 1 && orbit[a] == orbit[b] && orbit[b] == cert.witness
}

/// Upper bound of a region polynomial over `c`, using rational intervals.
fn rational_region_bound(c: &Parameter, cardioid: bool) -> Rational {
    type Iv = (Rational, Rational);
    fn mul(a: &Iv, b: &Iv) -> Iv {
        let ps = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
        let lo = ps.iter().min().unwrap().clone();
        let hi = ps.iter().max().unwrap().clone();
        (lo, hi)
    }
    fn sqr(a: &Iv) -> Iv {
        let m = mul(a, a);
        if a.0.is_negative() && a.1.is_positive() {
            (Rational::zero(), m.1)
        } else {
            m
        }
    }
    fn add(a: &Iv, b: &Iv) -> Iv {
        (&a.0 + &b.0, &a.1 + &b.1)
    }
    fn shift(a: &Iv, r: &Rational) -> Iv {
        (&a.0 + r, &a.1 + r)
    }
    let (x, y): (Iv, Iv) = match c {
        Parameter::Point(p) => ((p.re.clone(), p.re.clone()), (p.im.clone(), p.im.clone())),
        Parameter::Box(b) => (
            (b.re.lo().to_rational(), b.re.hi().to_rational()),
            (b.im.lo().to_rational(), b.im.hi().to_rational()),
        ),
    };
    let quarter = Rational::new(1, 4).unwrap();
    if cardioid {
        let xs = shift(&x, &-&quarter);
        let y2 = sqr(&y);
        let q = add(&sqr(&xs), &y2);
        let prod = mul(&q, &add(&q, &xs));
        &prod.1 - &(&y2.0 * &quarter)
    } else {
        let x1 = shift(&x, &Rational::one());
        add(&sqr(&x1), &sqr(&y)).1 - Rational::new(1, 16).unwrap()
    }
}

/// Serialized form of a verdict, with the input and the run parameters.
///
/// `{"c":{"re":"p/q","im":"p/q"},"verdict":"in","certificate":{...},"budget":50,"precision":64}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub c: InputRecord,
    pub verdict: VerdictKind,
    pub certificate: Option<Certificate>,
    pub budget: u32,
    pub precision: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputRecord {
    Point(ComplexRational),
    Box(ComplexBox),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Certificate {
    Escape { n: u32, abs_sq_lower: Dyadic },
    Cycle(CycleCert),
    Cardioid(RegionCert),
    Bulb(RegionCert),
}

impl VerdictRecord {
    pub fn new(c: &Parameter, verdict: &Verdict, cfg: &DecideConfig) -> Self {
        let c = match c {
            Parameter::Point(p) => InputRecord::Point(p.clone()),
            Parameter::Box(b) => InputRecord::Box(b.clone()),
        };
        let (certificate, budget, precision) = match verdict {
            Verdict::Out { n, abs_sq_lower } => (
                Some(Certificate::Escape {
                    n: *n,
                    abs_sq_lower: abs_sq_lower.clone(),
                }),
                cfg.budget,
                cfg.p0,
            ),
            Verdict::In { certificate } => (
                Some(match certificate.clone() {
                    InCertificate::Cycle(c) => Certificate::Cycle(c),
                    InCertificate::Cardioid(r) => Certificate::Cardioid(r),
                    InCertificate::Bulb(r) => Certificate::Bulb(r),
                }),
                cfg.budget,
                cfg.p0,
            ),
            Verdict::Unknown { budget, precision } => (None, *budget, *precision),
        };
        VerdictRecord {
            c,
            verdict: verdict.kind(),
            certificate,
            budget,
            precision,
        }
    }

    /// The verdict this record describes, if it is internally consistent.
    pub fn verdict(&self) -> Option<Verdict> {
        match (self.verdict, &self.certificate) {
            (VerdictKind::Out, Some(Certificate::Escape { n, abs_sq_lower })) => {
                Some(Verdict::Out {
                    n: *n,
                    abs_sq_lower: abs_sq_lower.clone(),
                })
            }
            (VerdictKind::In, Some(cert)) => {
                let certificate = match cert.clone() {
                    Certificate::Cycle(c) => InCertificate::Cycle(c),
                    Certificate::Cardioid(r) => InCertificate::Cardioid(r),
                    Certificate::Bulb(r) => InCertificate::Bulb(r),
                    Certificate::Escape { .. } => return None,
                };
                Some(Verdict::In { certificate })
            }
            (VerdictKind::Unknown, None) => Some(Verdict::Unknown {
                budget: self.budget,
                precision: self.precision,
            }),
            _ => None,
        }
    }
}
