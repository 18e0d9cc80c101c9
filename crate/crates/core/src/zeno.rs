//! Turing machines run on an accelerated clock.
//!
//! Step `k` of a run takes `2^-k` hours, so any finite prefix of `k` steps
//! finishes at exactly `1 - 2^-k` hours and the whole infinite run fits in
//! one hour. Only finite prefixes are ever simulated; what happens "at the
//! hour" is estimated by [`classify_cell_limit`].
//!
//! Machines are written one rule per line:
//!
//! ```text
//! # comment
//! start: q0          # optional, defaults to the first rule's state
//! halt: done         # optional, defaults to `halt`
//! states: q0 q1 done # optional, required for targets in strict mode
//! q0,_ -> q1,1,R
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::certifier::{stage_box, DEFAULT_PRECISION};
use crate::exact_arith::{
    box_abs_sq_bounds, box_step, iv_mul, ComplexBox, Dyadic, DyadicInterval, RealOracle,
    Rational, Round,
};

pub const BLANK: char = '_';

const DEFAULT_HALT: &str = "halt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    L,
    R,
    S,
}

impl Move {
    fn offset(self) -> i64 {
        match self {
            Move::L => -1,
            Move::R => 1,
            Move::S => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub next: String,
    pub write: char,
    pub shift: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TmDescription {
    pub states: BTreeSet<String>,
    pub alphabet: BTreeSet<char>,
    pub transitions: BTreeMap<(String, char), Transition>,
    pub start: String,
    pub halt: BTreeSet<String>,
}

impl TmDescription {
    pub fn is_halt(&self, state: &str) -> bool {
        self.halt.contains(state)
    }

    pub fn rule(&self, state: &str, symbol: char) -> Option<&Transition> {
        self.transitions.get(&(state.to_string(), symbol))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected `state,symbol -> state,symbol,move`: {0}")]
    Syntax(String),
    #[error("bad state name `{0}`")]
    BadState(String),
    #[error("bad symbol `{0}`; symbols are single characters")]
    BadSymbol(String),
    #[error("malformed move `{0}`; expected L, R or S")]
    BadMove(String),
    #[error("duplicate rule for ({state}, {symbol}), first given on line {first}")]
    DuplicateRule {
        state: String,
        symbol: char,
        first: usize,
    },
    #[error("target state `{0}` is not declared")]
    UndeclaredState(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("directive `{0}` given twice")]
    RepeatedDirective(String),
    #[error("no rules")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based; 0 for errors about the file as a whole.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Every target state must be declared by a directive or be the source
    /// of some rule.
    pub strict: bool,
}

fn state_name(s: &str, line: usize) -> Result<String, ParseError> {
    let ok = !s.is_empty() && s.chars().all(|ch| ch.is_alphanumeric() || ch == '_');
    if ok {
        Ok(s.to_string())
    } else {
        Err(ParseError {
            line,
            kind: ParseErrorKind::BadState(s.to_string()),
        })
    }
}

fn symbol(s: &str, line: usize) -> Result<char, ParseError> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(ch), None) if !ch.is_whitespace() && ch != ',' => Ok(ch),
        _ => Err(ParseError {
            line,
            kind: ParseErrorKind::BadSymbol(s.to_string()),
        }),
    }
}

fn shift(s: &str, line: usize) -> Result<Move, ParseError> {
    match s {
        "L" => Ok(Move::L),
        "R" => Ok(Move::R),
        "S" => Ok(Move::S),
        _ => Err(ParseError {
            line,
            kind: ParseErrorKind::BadMove(s.to_string()),
        }),
    }
}

struct Rule {
    line: usize,
    state: String,
    read: char,
    transition: Transition,
}

fn parse_rule(text: &str, line: usize) -> Result<Rule, ParseError> {
    let syntax = || ParseError {
        line,
        kind: ParseErrorKind::Syntax(text.to_string()),
    };
    let (lhs, rhs) = text.split_once("->").ok_or_else(syntax)?;
    let lhs: Vec<&str> = lhs.split(',').map(str::trim).collect();
    let rhs: Vec<&str> = rhs.split(',').map(str::trim).collect();
    if lhs.len() != 2 || rhs.len() != 3 {
        return Err(syntax());
    }
    Ok(Rule {
        line,
        state: state_name(lhs[0], line)?,
        read: symbol(lhs[1], line)?,
        transition: Transition {
            next: state_name(rhs[0], line)?,
            write: symbol(rhs[1], line)?,
            shift: shift(rhs[2], line)?,
        },
    })
}

/// Parses the line format described in the module docs.
pub fn parse_tm(text: &str, options: ParseOptions) -> Result<TmDescription, ParseError> {
    let mut rules: Vec<Rule> = Vec::new();
    let mut start: Option<String> = None;
    let mut halt: Option<BTreeSet<String>> = None;
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut first_line: BTreeMap<(String, char), usize> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if !body.contains("->") {
            if let Some((key, value)) = body.split_once(':') {
                let names = value
                    .split_whitespace()
                    .map(|s| state_name(s, line))
                    .collect::<Result<Vec<_>, _>>()?;
                let repeated = || ParseError {
                    line,
                    kind: ParseErrorKind::RepeatedDirective(key.trim().to_string()),
                };
                match key.trim() {
                    "start" => {
                        if start.is_some() {
                            return Err(repeated());
                        }
                        let [name] = names.as_slice() else {
                            return Err(ParseError {
                                line,
                                kind: ParseErrorKind::Syntax(body.to_string()),
                            });
                        };
                        start = Some(name.clone());
                    }
                    "halt" => {
                        if halt.is_some() {
                            return Err(repeated());
                        }
                        halt = Some(names.into_iter().collect());
                    }
                    "states" => declared.extend(names),
                    other => {
                        return Err(ParseError {
                            line,
                            kind: ParseErrorKind::UnknownDirective(other.to_string()),
                        })
                    }
                }
                continue;
            }
        }
        let rule = parse_rule(body, line)?;
        let key = (rule.state.clone(), rule.read);
        if let Some(&first) = first_line.get(&key) {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::DuplicateRule {
                    state: key.0,
                    symbol: key.1,
                    first,
                },
            });
        }
        first_line.insert(key, line);
        rules.push(rule);
    }

    if rules.is_empty() {
        return Err(ParseError {
            line: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let start = start.unwrap_or_else(|| rules[0].state.clone());
    let explicit_halt = halt.is_some();
    let mut halt = halt.unwrap_or_else(|| BTreeSet::from([DEFAULT_HALT.to_string()]));

    declared.insert(start.clone());
    declared.extend(halt.iter().cloned());
    declared.extend(rules.iter().map(|r| r.state.clone()));
    if options.strict {
        for r in &rules {
            if !declared.contains(&r.transition.next) {
                return Err(ParseError {
                    line: r.line,
                    kind: ParseErrorKind::UndeclaredState(r.transition.next.clone()),
                });
            }
        }
    }
    let default_unused = !explicit_halt
        && start != DEFAULT_HALT
        && !rules
            .iter()
            .any(|r| r.state == DEFAULT_HALT || r.transition.next == DEFAULT_HALT);
    if default_unused {
        declared.remove(DEFAULT_HALT);
        halt.clear();
    }

    let mut states = declared;
    let mut alphabet = BTreeSet::from([BLANK]);
    let mut transitions = BTreeMap::new();
    for r in rules {
        states.insert(r.transition.next.clone());
        alphabet.insert(r.read);
        alphabet.insert(r.transition.write);
        transitions.insert((r.state, r.read), r.transition);
    }

    Ok(TmDescription {
        states,
        alphabet,
        transitions,
        start,
        halt,
    })
}

/// Machine configuration. Cells absent from `tape` hold [`BLANK`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub tape: BTreeMap<i64, char>,
    pub head: i64,
    pub state: String,
    pub step_count: u64,
}

impl Configuration {
    /// `input` written from cell 0 rightwards, head on cell 0.
    pub fn initial(m: &TmDescription, input: &str) -> Self {
        let mut tape = BTreeMap::new();
        for (i, ch) in input.chars().enumerate() {
            if ch != BLANK {
                tape.insert(i as i64, ch);
            }
        }
        Configuration {
            tape,
            head: 0,
            state: m.start.clone(),
            step_count: 0,
        }
    }

    pub fn read(&self, cell: i64) -> char {
        self.tape.get(&cell).copied().unwrap_or(BLANK)
    }

    fn write(&mut self, cell: i64, ch: char) {
        if ch == BLANK {
            self.tape.remove(&cell);
        } else {
            self.tape.insert(cell, ch);
        }
    }

    /// Non-blank cells, leftmost to rightmost, with blanks in between.
    pub fn tape_string(&self) -> String {
        match (self.tape.keys().next(), self.tape.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo..=hi).map(|i| self.read(i)).collect(),
            _ => String::new(),
        }
    }

    /// SHA-256 over state, head and non-blank cells, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.state.as_bytes());
        h.update([0]);
        h.update(self.head.to_le_bytes());
        for (pos, ch) in &self.tape {
            h.update(pos.to_le_bytes());
            h.update((*ch as u32).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Next(Configuration),
    /// No rule for the current state and symbol.
    Stall,
    /// The machine is already in a halt state.
    Halted,
}

pub fn step(m: &TmDescription, c: &Configuration) -> Step {
    if m.is_halt(&c.state) {
        return Step::Halted;
    }
    let Some(t) = m.rule(&c.state, c.read(c.head)) else {
        return Step::Stall;
    };
    let mut next = c.clone();
    next.write(c.head, t.write);
    next.head += t.shift.offset();
    next.state = t.next.clone();
    next.step_count += 1;
    Step::Next(next)
}

/// Hours on the accelerated clock after `k` steps: `1 - 2^-k`.
pub fn zeno_elapsed(k: u64) -> Rational {
    Rational::one() - Rational::pow2(-(k as i64))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub digest: String,
    pub config: Configuration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Halted,
    Stalled,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZenoTrace {
    pub snapshots: Vec<Snapshot>,
    /// Step at which a halt state was entered.
    pub halted_at: Option<u64>,
    pub stop: StopReason,
    pub steps: u64,
    pub elapsed: Rational,
    pub last: Configuration,
}

impl ZenoTrace {
    /// The final configuration is permanent: the machine halted or stalled.
    pub fn is_final(&self) -> bool {
        self.stop != StopReason::Budget
    }

    /// One snapshot per line.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.snapshots {
            out.push_str(&serde_json::to_string(s).expect("snapshot serializes"));
            out.push('\n');
        }
        out
    }
}

/// Runs at most `budget` steps, snapshotting step 0, every
/// `snapshot_every`-th step and the last step.
///
/// Panics if `budget` or `snapshot_every` is zero.
pub fn run_stages(
    m: &TmDescription,
    input: &str,
    budget: u64,
    snapshot_every: u64,
) -> ZenoTrace {
    assert!(budget >= 1, "budget must be at least one step");
    assert!(snapshot_every >= 1, "snapshot cadence must be positive");
    let snap = |c: &Configuration| Snapshot {
        step: c.step_count,
        digest: c.digest(),
        config: c.clone(),
    };
    let mut c = Configuration::initial(m, input);
    let mut snapshots = vec![snap(&c)];
    let mut stop = StopReason::Budget;
    while c.step_count < budget {
        match step(m, &c) {
            Step::Next(next) => c = next,
            Step::Stall => {
                stop = StopReason::Stalled;
                break;
            }
            Step::Halted => {
                stop = StopReason::Halted;
                break;
            }
        }
        if c.step_count % snapshot_every == 0 {
            snapshots.push(snap(&c));
        }
        if m.is_halt(&c.state) {
            stop = StopReason::Halted;
            break;
        }
    }
    if snapshots.last().map(|s| s.step) != Some(c.step_count) {
        snapshots.push(snap(&c));
    }
    let halted_at = (stop == StopReason::Halted).then_some(c.step_count);
    ZenoTrace {
        snapshots,
        halted_at,
        stop,
        steps: c.step_count,
        elapsed: zeno_elapsed(c.step_count),
        last: c,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CellLimit {
    /// Constant since snapshot step `since`.
    Stabilized { value: char, since: u64 },
    Alternating,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZenoError {
    #[error("window of {window} snapshots exceeds the {available} recorded")]
    WindowTooLarge { window: usize, available: usize },
    #[error("window must be at least one snapshot")]
    EmptyWindow,
}

/// Limit behavior of one tape cell over the last `window` snapshots.
///
/// Halted and stalled traces are final, so their cells are reported as
/// stabilized whatever the window.
pub fn classify_cell_limit(
    trace: &ZenoTrace,
    cell: i64,
    window: usize,
) -> Result<CellLimit, ZenoError> {
    if window == 0 {
        return Err(ZenoError::EmptyWindow);
    }
    let values: Vec<char> = trace.snapshots.iter().map(|s| s.config.read(cell)).collect();
    let value = trace.last.read(cell);
    let since = || {
        let mut i = values.len() - 1;
        while i > 0 && values[i - 1] == value {
            i -= 1;
        }
        trace.snapshots[i].step
    };
    if trace.is_final() {
        return Ok(CellLimit::Stabilized {
            value,
            since: since(),
        });
    }
    if window > values.len() {
        return Err(ZenoError::WindowTooLarge {
            window,
            available: values.len(),
        });
    }
    let tail = &values[values.len() - window..];
    let changes = tail.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(if changes == 0 {
        CellLimit::Stabilized {
            value,
            since: since(),
        }
    } else if changes >= window.div_ceil(2) {
        CellLimit::Alternating
    } else {
        CellLimit::Inconclusive
    })
}

/// A machine shipped with the crate.
#[derive(Debug, Clone, Copy)]
pub struct BundledMachine {
    pub name: &'static str,
    pub source: &'static str,
    pub input: &'static str,
    pub halts: bool,
}

impl BundledMachine {
    pub fn parse(&self) -> TmDescription {
        parse_tm(self.source, ParseOptions { strict: true }).expect("bundled machines parse")
    }
}

pub const BUNDLED: &[BundledMachine] = &[
    BundledMachine {
        name: "lamp",
        source: include_str!("../machines/lamp.tm"),
        input: "",
        halts: false,
    },
    BundledMachine {
        name: "halt_immediate",
        source: include_str!("../machines/halt_immediate.tm"),
        input: "",
        halts: true,
    },
    BundledMachine {
        name: "halt_two",
        source: include_str!("../machines/halt_two.tm"),
        input: "",
        halts: true,
    },
    BundledMachine {
        name: "flip_once",
        source: include_str!("../machines/flip_once.tm"),
        input: "",
        halts: false,
    },
    BundledMachine {
        name: "right_forever",
        source: include_str!("../machines/right_forever.tm"),
        input: "",
        halts: false,
    },
    BundledMachine {
        name: "increment",
        source: include_str!("../machines/increment.tm"),
        input: "1011",
        halts: true,
    },
];

pub fn bundled(name: &str) -> Option<&'static BundledMachine> {
    BUNDLED.iter().find(|m| m.name == name)
}

/// One stage of the accelerated Mandelbrot loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: u32,
    /// Enclosure of the stage's final iterate, after scaling back.
    pub x: ComplexBox,
    /// `|x| >= 2.1` is proven for every parameter in the stage box.
    pub escaped_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageClass {
    /// The last stage is flagged, so every suffix of the run holds a flag.
    EscapeCofinal,
    BoundedSoFar,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZenoMandelbrotRun {
    pub records: Vec<StageRecord>,
    pub class: StageClass,
}

impl ZenoMandelbrotRun {
    pub fn first_flag(&self) -> Option<u32> {
        self.records.iter().find(|r| r.escaped_flag).map(|r| r.stage)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

fn dyadic_sqrt(d: &Dyadic, p: u32, dir: Round) -> Rational {
    // isqrt of d * 4^p, rounded as asked, over 2^p
    let r = d.round_to(2 * p, dir);
    let n: BigInt = r.mantissa() << (r.exponent() + 2 * p as i64) as u64;
    let mut s = n.sqrt();
    if dir == Round::Up && &s * &s < n {
        s += 1;
    }
    Rational::from(s) * Rational::pow2(-(p as i64))
}

/// Encloses `z * min(|z|, 3) / |z|` for every `z` in the box.
fn scale_back(z: &ComplexBox, p: u32) -> ComplexBox {
    let abs_sq = box_abs_sq_bounds(z, p);
    let nine = Dyadic::from(9);
    if abs_sq.hi() <= &nine {
        return z.clone();
    }
    let three = Rational::from(3);
    let m_up = dyadic_sqrt(abs_sq.hi(), p, Round::Up);
    let m_down = dyadic_sqrt(abs_sq.lo(), p, Round::Down);
    let lo = &three / &m_up;
    let hi = if m_down > three {
        &three / &m_down
    } else {
        Rational::one()
    };
    let factor = DyadicInterval::enclose_range(&lo, &hi, p);
    let clamp = DyadicInterval::new(Dyadic::from(-3), Dyadic::from(3));
    let bound = |iv: DyadicInterval| {
        DyadicInterval::new(
            iv.lo().clone().max(clamp.lo().clone()),
            iv.hi().clone().min(clamp.hi().clone()),
        )
    };
    ComplexBox::new(
        bound(iv_mul(&z.re, &factor, p)),
        bound(iv_mul(&z.im, &factor, p)),
    )
}

/// The plotting loop with scale-back, one stage per oracle precision.
///
/// Stage `i` restarts from `z = 0` with the stage-`i` parameter box and runs
/// `i` iterations of `z <- scale(z^2 + c)`. A stage is flagged when the
/// unscaled last iterate is proven to have modulus at least 2.1, which the
/// scaling (to modulus 3) preserves.
pub fn zeno_mandelbrot_run(
    ox: &(impl RealOracle + ?Sized),
    oy: &(impl RealOracle + ?Sized),
    stages: u32,
) -> ZenoMandelbrotRun {
    assert!(stages >= 1, "at least one stage is required");
    let threshold = Rational::new(441, 100).expect("nonzero denominator");
    let mut records = Vec::with_capacity(stages as usize);
    for i in 1..=stages {
        let p = DEFAULT_PRECISION + i;
        let c = stage_box(ox, oy, i, p);
        let mut z = ComplexBox::zero();
        let mut flagged = false;
        for k in 1..=i {
            let raw = box_step(&z, &c, p);
            if k == i {
                flagged = box_abs_sq_bounds(&raw, p).lo().to_rational() >= threshold;
            }
            z = scale_back(&raw, p);
        }
        records.push(StageRecord {
            stage: i,
            x: z,
            escaped_flag: flagged,
        });
    }
    let any = records.iter().any(|r| r.escaped_flag);
    let last = records.last().is_some_and(|r| r.escaped_flag);
    let class = match (any, last) {
        (_, true) => StageClass::EscapeCofinal,
        (false, _) => StageClass::BoundedSoFar,
        _ => StageClass::Mixed,
    };
    ZenoMandelbrotRun { records, class }
}

impl fmt::Display for StageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageClass::EscapeCofinal => "escape_cofinal",
            StageClass::BoundedSoFar => "bounded_so_far",
            StageClass::Mixed => "mixed",
        })
    }
}
