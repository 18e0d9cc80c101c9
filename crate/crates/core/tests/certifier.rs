use mandelcert_core::certifier::{
    certify_in_cycle, certify_in_region, certify_out_interval, decide, decide_oracle,
    iterate_exact, recheck, DecideConfig, InCertificate, OrbitOutcome, Parameter, Recheck,
    Verdict, VerdictRecord,
};
use mandelcert_core::exact_arith::{BuiltinOracle, ComplexBox};
use mandelcert_core::{ComplexRational, Rational};
use proptest::prelude::*;

/// Certifying stage for the oracle pair (1, 0).
const GOLDEN_ORACLE_STAGE: u32 = 3;
/// First escape step of 1/4 + 1/100 = 13/50.
const GOLDEN_NEAR_CUSP_ESCAPE: u32 = 30;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn c(re: &str, im: &str) -> ComplexRational {
    ComplexRational::new(q(re), q(im))
}

fn point(re: &str, im: &str) -> Parameter {
    Parameter::Point(c(re, im))
}

/// First `n` with `|z_n|^2 > 4`, using rigorous balls on a `2^-prec` grid:
/// centres are truncated after every step and the radius absorbs the error.
fn ball_escape(c: &ComplexRational, max_steps: u32, prec: i64) -> Option<u32> {
    let grid = Rational::pow2(-prec);
    let trunc = |r: Rational| &Rational::from((&r / &grid).floor()) * &grid;
    let widen = |r: Rational| &Rational::from((&r / &grid).ceil()) * &grid;
    let two = Rational::from(2);
    let (mut x, mut y, mut eps) = (Rational::zero(), Rational::zero(), Rational::zero());
    for n in 1..=max_steps {
        let nx = &(&(&x * &x) - &(&y * &y)) + &c.re;
        let ny = &(&(&two * &x) * &y) + &c.im;
        // |w^2 - v^2| <= (2|v| + eps) eps with |v| <= |x| + |y|
        let m = &x.abs() + &y.abs();
        let grown = &(&(&(&two * &m) + &eps) * &eps) * &two;
        let (tx, ty) = (trunc(nx.clone()), trunc(ny.clone()));
        eps = widen(&(&grown + &(&nx - &tx)) + &(&ny - &ty));
        x = tx;
        y = ty;
        let norm = &(&x * &x) + &(&y * &y);
        let outer = (&two + &eps).square();
        let inner = &two - &eps;
        if norm > outer {
            return Some(n);
        }
        assert!(
            inner.is_positive() && norm < inner.square(),
            "ball too wide to decide step {n}"
        );
    }
    None
}

#[test]
fn iterate_exact_examples() {
    let run = |re: &str, im: &str| iterate_exact(&c(re, im), 50, 4096);
    assert!(matches!(run("0", "0"), OrbitOutcome::Cycle { preperiod: 0, period: 1, .. }));
    assert!(matches!(run("-1", "0"), OrbitOutcome::Cycle { preperiod: 0, period: 2, .. }));
    assert!(matches!(run("-2", "0"), OrbitOutcome::Cycle { preperiod: 2, period: 1, .. }));
    assert!(matches!(run("0", "1"), OrbitOutcome::Cycle { preperiod: 2, period: 2, .. }));
    assert!(matches!(run("1", "0"), OrbitOutcome::Escaped { n: 3, .. }));
}

#[test]
fn certifier_examples() {
    assert_eq!(certify_out_interval(&point("1", "0"), 50, 64, 256).escape_step(), Some(3));
    assert!(certify_out_interval(&point("0", "0"), 500, 64, 256).is_unknown());
    assert!(certify_in_cycle(&c("0", "1"), 50, 4096).is_in());
    assert!(certify_in_cycle(&c("1/8", "0"), 14, 1 << 20).is_unknown());
    assert!(matches!(
        certify_in_region(&point("0", "0")),
        Some(InCertificate::Cardioid(ref r)) if r.bound == q("-3/256")
    ));
    assert!(matches!(certify_in_region(&point("-1", "0")), Some(InCertificate::Bulb(_))));
    assert_eq!(certify_in_region(&point("1", "0")), None);
}

#[test]
fn eighth_never_repeats_exactly() {
    // the orbit of 1/8 increases strictly towards an irrational fixed point
    let c = c("1/8", "0");
    let mut z = ComplexRational::zero();
    let mut prev = q("-1");
    for _ in 0..14 {
        z = ComplexRational::new(&z.re.square() + &c.re, Rational::zero());
        assert!(z.re > prev);
        prev = z.re.clone();
    }
    assert!(matches!(
        iterate_exact(&c, 14, 1 << 20),
        OrbitOutcome::Exhausted { n: 14, .. }
    ));
}

#[test]
fn near_cusp_escape_matches_ball_oracle() {
    let z = c("13/50", "0");
    assert_eq!(ball_escape(&z, 200, 400), Some(GOLDEN_NEAR_CUSP_ESCAPE));
    let v = decide(&Parameter::Point(z), &DecideConfig::with_budget(200));
    assert_eq!(v.escape_step(), Some(GOLDEN_NEAR_CUSP_ESCAPE));
}

#[test]
fn oracle_examples() {
    let k = |s: &str| BuiltinOracle::constant(q(s));
    let cfg = DecideConfig::default();
    let zero = decide_oracle(&k("0"), &k("0"), 40, &cfg);
    let cfg_complement = DecideConfig::default().complement_only();
    assert!(decide_oracle(&k("0"), &k("0"), 40, &cfg_complement).verdict.is_unknown());
    assert!(!zero.verdict.is_out());
    let three = decide_oracle(&k("3"), &k("0"), 20, &cfg);
    assert!(three.verdict.is_out());
    assert_eq!(three.stage, Some(1));
    let one = decide_oracle(&k("1"), &k("0"), 20, &cfg);
    assert!(one.verdict.is_out());
    assert_eq!(one.stage, Some(GOLDEN_ORACLE_STAGE));
    let root: BuiltinOracle = "sqrt:2".parse().unwrap();
    assert!(decide_oracle(&root, &k("0"), 20, &cfg).verdict.is_out());
}

#[test]
fn verdict_json_round_trips() {
    let cfg = DecideConfig::default();
    for (re, im) in [("0", "0"), ("-1", "0"), ("0", "1"), ("1", "0"), ("1/4", "0")] {
        let p = point(re, im);
        let v = decide(&p, &cfg);
        let record = VerdictRecord::new(&p, &v, &cfg);
        let text = serde_json::to_string(&record).unwrap();
        let back: VerdictRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert_eq!(back.verdict(), Some(v));
    }
}

fn small_complex() -> impl Strategy<Value = ComplexRational> {
    (-40i64..=40, 1i64..=16, -40i64..=40, 1i64..=16).prop_map(|(a, b, e, f)| {
        ComplexRational::new(
            &Rational::new(a, b).unwrap() * &Rational::pow2(-3),
            &Rational::new(e, f).unwrap() * &Rational::pow2(-3),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn verdicts_are_mutually_exclusive(z in small_complex()) {
        let mut seen_in = false;
        let mut seen_out = false;
        for budget in [5, 20, 60] {
            for p0 in [32, 64, 200] {
                let cfg = DecideConfig { budget, p0, p_max: p0.max(256), ..Default::default() };
                let v = decide(&Parameter::Point(z.clone()), &cfg);
                seen_in |= v.is_in();
                seen_out |= v.is_out();
            }
        }
        prop_assert!(!(seen_in && seen_out), "{z} is both in and out");
    }

    #[test]
    fn certificates_recheck(z in small_complex()) {
        let p = Parameter::Point(z);
        let v = decide(&p, &DecideConfig::default());
        let r = recheck(&p, &v, 1 << 16);
        prop_assert!(matches!(r, Recheck::Confirmed | Recheck::Skipped), "{v:?} gave {r:?}");
    }

    #[test]
    fn knowledge_is_monotone(z in small_complex()) {
        let p = Parameter::Point(z);
        let low = decide(&p, &DecideConfig::with_budget(10));
        let high = decide(&p, &DecideConfig::with_budget(60));
        prop_assert!(low.is_unknown() || low.kind() == high.kind(), "{low:?} then {high:?}");
    }

    #[test]
    fn interval_escape_agrees_with_exact(z in small_complex()) {
        if let OrbitOutcome::Escaped { n, .. } = iterate_exact(&z, 30, 1 << 16) {
            let v = certify_out_interval(&Parameter::Point(z), 30, 64, 1024);
            // a tighter enclosure can only certify at or after the true step
            prop_assert!(v.escape_step().map_or(true, |m| m >= n), "{v:?} before {n}");
        }
    }

    #[test]
    fn complement_only_never_claims_membership(z in small_complex()) {
        let cfg = DecideConfig::default().complement_only();
        let v = decide(&Parameter::Point(z), &cfg);
        prop_assert!(!v.is_in());
    }

    #[test]
    fn box_out_covers_every_point(z in small_complex(), k in 0u32..=4) {
        let b = ComplexBox::enclose(&z, 10);
        if let Verdict::Out { n, .. } = decide(&Parameter::Box(b.clone()), &DecideConfig::default()) {
            let corner = b.re.lo().to_rational();
            let far = b.im.hi().to_rational();
            let frac = Rational::new(k as i64, 4).unwrap();
            let inner = ComplexRational::new(
                &corner + &(&(&b.re.hi().to_rational() - &corner) * &frac),
                far,
            );
            let v = decide(&Parameter::Point(inner), &DecideConfig::default());
            prop_assert!(v.is_out());
            prop_assert!(v.escape_step().unwrap() <= n);
        }
    }
}
