use mandelcert_core::certifier::{decide_oracle, DecideConfig};
use mandelcert_core::exact_arith::{BuiltinOracle, RealOracle};
use mandelcert_core::zeno::{
    bundled, classify_cell_limit, parse_tm, run_stages, step, zeno_elapsed,
    zeno_mandelbrot_run, CellLimit, Configuration, ParseErrorKind, ParseOptions, StageClass,
    Step, StopReason, BUNDLED,
};
use mandelcert_core::Rational;
use num_bigint::BigInt;
use num_traits::One;
use proptest::prelude::*;

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn lenient() -> ParseOptions {
    ParseOptions { strict: false }
}

/// `1 - 2^-k` built from integers.
fn elapsed_oracle(k: u64) -> Rational {
    let two_k = BigInt::one() << k;
    Rational::new(&two_k - BigInt::one(), two_k).unwrap()
}

#[test]
fn elapsed_matches_closed_form() {
    for k in 0..=200 {
        assert_eq!(zeno_elapsed(k), elapsed_oracle(k), "k = {k}");
    }
    assert_eq!(zeno_elapsed(2), q("3/4"));
}

#[test]
fn bundled_machines_behave_as_labelled() {
    for m in BUNDLED {
        let trace = run_stages(&m.parse(), m.input, 5_000, 7);
        assert_eq!(trace.halted_at.is_some(), m.halts, "{}", m.name);
        if m.halts {
            assert_eq!(trace.stop, StopReason::Halted);
            assert_eq!(trace.elapsed, elapsed_oracle(trace.steps));
        }
    }
    let inc = bundled("increment").unwrap();
    let trace = run_stages(&inc.parse(), "1011", 100, 1);
    assert_eq!(trace.last.tape_string(), "1100");
    let trace = run_stages(&inc.parse(), "111", 100, 1);
    assert_eq!(trace.last.tape_string(), "1000");
    assert_eq!(run_stages(&bundled("halt_two").unwrap().parse(), "", 10, 1).elapsed, q("3/4"));
}

#[test]
fn lamp_alternates_and_flip_once_settles() {
    let lamp = bundled("lamp").unwrap();
    let trace = run_stages(&lamp.parse(), "", 64, 1);
    assert_eq!(trace.stop, StopReason::Budget);
    for w in 4..=trace.snapshots.len() {
        assert_eq!(classify_cell_limit(&trace, 0, w).unwrap(), CellLimit::Alternating);
    }
    assert!(classify_cell_limit(&trace, 0, trace.snapshots.len() + 1).is_err());
    assert!(classify_cell_limit(&trace, 0, 0).is_err());

    let flip = bundled("flip_once").unwrap();
    let trace = run_stages(&flip.parse(), "", 50, 1);
    assert_eq!(
        classify_cell_limit(&trace, 0, 10).unwrap(),
        CellLimit::Stabilized { value: '1', since: 1 }
    );
}

#[test]
fn mixed_window_is_inconclusive() {
    let m = parse_tm(
        "start: a\na,_ -> b,1,S\nb,1 -> c,1,S\nc,1 -> c,1,S\n",
        lenient(),
    )
    .unwrap();
    let trace = run_stages(&m, "", 20, 1);
    // one change in a window of four
    assert_eq!(classify_cell_limit(&trace, 0, 4).unwrap(), CellLimit::Stabilized { value: '1', since: 1 });
    let m = parse_tm(
        "a,_ -> b,1,S\nb,1 -> c,0,S\nc,0 -> d,0,S\nd,0 -> d,0,S\n",
        lenient(),
    )
    .unwrap();
    let trace = run_stages(&m, "", 4, 1);
    assert_eq!(trace.snapshots.len(), 5);
    assert_eq!(classify_cell_limit(&trace, 0, 5).unwrap(), CellLimit::Inconclusive);
}

#[test]
fn parser_reports_lines() {
    let err = parse_tm("a,_ -> b,1,S\na,_ -> c,0,L\n", lenient()).unwrap_err();
    assert_eq!(err.line, 2);
    assert!(matches!(err.kind, ParseErrorKind::DuplicateRule { .. }));
    let err = parse_tm("# comment\na,_ -> b,1,X\n", lenient()).unwrap_err();
    assert_eq!(err.line, 2);
    assert!(matches!(err.kind, ParseErrorKind::BadMove(_)));
    let err = parse_tm("states: a\na,_ -> b,1,S\n", ParseOptions { strict: true }).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::UndeclaredState(_)));
    assert!(matches!(parse_tm("\n# only\n", lenient()).unwrap_err().kind, ParseErrorKind::Empty));
}

#[test]
fn step_distinguishes_stall_from_halt() {
    let m = parse_tm("a,_ -> halt,_,S\nb,_ -> a,_,S\n", lenient()).unwrap();
    let c = Configuration::initial(&m, "");
    let Step::Next(next) = step(&m, &c) else {
        panic!("expected a step");
    };
    assert_eq!(next.state, "halt");
    assert!(matches!(step(&m, &next), Step::Halted));
    let m = parse_tm("a,1 -> a,1,R\n", lenient()).unwrap();
    assert!(matches!(step(&m, &Configuration::initial(&m, "")), Step::Stall));
    let trace = run_stages(&m, "11", 10, 1);
    assert_eq!((trace.stop, trace.steps), (StopReason::Stalled, 2));
    assert!(matches!(
        classify_cell_limit(&trace, 1, 1).unwrap(),
        CellLimit::Stabilized { value: '1', .. }
    ));
}

#[test]
fn traces_are_deterministic_and_serialize() {
    let m = bundled("increment").unwrap().parse();
    let a = run_stages(&m, "10111", 100, 2);
    let b = run_stages(&m, "10111", 100, 2);
    assert_eq!(a, b);
    assert_eq!(a.to_json_lines(), b.to_json_lines());
    assert_eq!(a.to_json_lines().lines().count(), a.snapshots.len());
    let text = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::to_string(&serde_json::from_str::<mandelcert_core::zeno::ZenoTrace>(&text).unwrap()).unwrap(), text);
}

#[test]
fn zeno_mandelbrot_goldens() {
    let k = |s: &str| BuiltinOracle::constant(q(s));
    let one = zeno_mandelbrot_run(&k("1"), &k("0"), 20);
    assert_eq!(one.class, StageClass::EscapeCofinal);
    assert_eq!(one.first_flag(), Some(3));
    assert!(one.records[2..].iter().all(|r| r.escaped_flag));
    let zero = zeno_mandelbrot_run(&k("0"), &k("0"), 50);
    assert_eq!(zero.class, StageClass::BoundedSoFar);
    assert_eq!(zero.records.len(), 50);
    for r in &one.records {
        let bound = mandelcert_core::exact_arith::DyadicInterval::new(
            mandelcert_core::Dyadic::from(-3),
            mandelcert_core::Dyadic::from(3),
        );
        assert!(bound.encloses(&r.x.re) && bound.encloses(&r.x.im));
    }
}

fn check_flags_against_oracle(ox: &dyn RealOracle, oy: &dyn RealOracle, stages: u32) {
    let run = zeno_mandelbrot_run(ox, oy, stages);
    let cfg = DecideConfig::default();
    for r in run.records.iter().filter(|r| r.escaped_flag) {
        for later in r.stage..=stages {
            let v = decide_oracle(ox, oy, later, &cfg);
            assert!(!v.verdict.is_in(), "stage {} flagged, stage {later} in", r.stage);
        }
    }
}

#[test]
fn flags_never_precede_membership() {
    let k = |s: &str| BuiltinOracle::constant(q(s));
    for (re, im) in [("1", "0"), ("0", "0"), ("-1", "0"), ("1/2", "1/2"), ("-3/4", "1/5")] {
        check_flags_against_oracle(&k(re), &k(im), 12);
    }
    let root: BuiltinOracle = "sqrt:1/2".parse().unwrap();
    check_flags_against_oracle(&root, &k("0"), 12);
    check_flags_against_oracle(&k("-1/4"), &root, 12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elapsed_increments_halve(k in 0u64..512) {
        let step = Rational::pow2(-(k as i64 + 1));
        prop_assert_eq!(&zeno_elapsed(k + 1) - &zeno_elapsed(k), step);
    }

    #[test]
    fn flagged_stages_are_not_members(a in -12i64..=12, b in -12i64..=12) {
        let k = |n: i64| BuiltinOracle::constant(Rational::new(n, 6).unwrap());
        check_flags_against_oracle(&k(a), &k(b), 8);
    }

    #[test]
    fn increment_adds_one(n in 0u64..5000) {
        let m = bundled("increment").unwrap().parse();
        let input = format!("{n:b}");
        let trace = run_stages(&m, &input, 10_000, 100);
        prop_assert_eq!(trace.stop, StopReason::Halted);
        prop_assert_eq!(trace.last.tape_string(), format!("{:b}", n + 1));
    }
}

#[test]
fn operation_examples() {
    let m = parse_tm("start,_ -> halt,_,S\n", lenient()).unwrap();
    assert_eq!(m.states.len(), 2);
    assert_eq!(m.transitions.len(), 1);
    let m = parse_tm("start,_ -> halt,1,R\n", lenient()).unwrap();
    let Step::Next(c) = step(&m, &Configuration::initial(&m, "")) else {
        panic!("expected a step");
    };
    assert_eq!((c.read(0), c.head, c.state.as_str()), ('1', 1, "halt"));
    let m = parse_tm("a,_ -> a,_,S\n", lenient()).unwrap();
    let Step::Next(c) = step(&m, &Configuration::initial(&m, "")) else {
        panic!("expected a step");
    };
    assert_eq!(c.head, 0);

    assert_eq!(zeno_elapsed(0), q("0"));
    assert_eq!(zeno_elapsed(1), q("1/2"));
    assert_eq!(zeno_elapsed(3), q("7/8"));
    let t = run_stages(&bundled("halt_immediate").unwrap().parse(), "", 10, 1);
    assert_eq!((t.halted_at, t.elapsed.clone()), (Some(1), q("1/2")));
    let t = run_stages(&bundled("right_forever").unwrap().parse(), "", 100, 10);
    assert_eq!(t.halted_at, None);
    assert_eq!(t.elapsed, elapsed_oracle(100));

    let k = |s: &str| BuiltinOracle::constant(q(s));
    let three = zeno_mandelbrot_run(&k("3"), &k("0"), 12);
    assert!(three.records.iter().all(|r| r.escaped_flag));
    assert_eq!(three.class, StageClass::EscapeCofinal);
}
