//! Weighted timed games: the `.wtg` format, operational semantics, regions and
//! the region automaton.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

use num::{BigInt, BigRational, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::game::Owner;

/// Exact rational number.
pub type Q = BigRational;
pub type ClockId = usize;
pub type StateId = usize;
pub type TransId = usize;
pub type RegionId = usize;
pub type NodeId = usize;
pub type ArcId = usize;
pub type ClockValuation = Vec<Q>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, integers and decimals such as `0.25`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((i, f)) = s.split_once('.') {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = i.starts_with('-');
        let ip: BigInt = if i.is_empty() || i == "-" { BigInt::zero() } else { i.parse().ok()? };
        let scale = BigInt::from(10).pow(f.len() as u32);
        let fp: BigInt = f.parse().ok()?;
        let frac = Q::new(fp, scale);
        let base = Q::from_integer(ip);
        return Some(if neg { base - frac } else { base + frac });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

/// `p/q` spelling (integers without denominator).
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    fn flipped(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }

    fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            Rel::Lt => a < b,
            Rel::Le => a <= b,
            Rel::Eq => a == b,
            Rel::Ge => a >= b,
            Rel::Gt => a > b,
        }
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Rel::Lt | Rel::Le | Rel::Eq)
    }
}

/// `clock rel constant`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Atom {
    pub clock: ClockId,
    pub rel: Rel,
    pub constant: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Guard {
    pub atoms: Vec<Atom>,
}

impl Guard {
    pub fn satisfied_by(&self, v: &[Q]) -> bool {
        self.atoms.iter().all(|a| a.rel.holds(&v[a.clock], &qi(a.constant as i64)))
    }

    pub fn satisfied_by_region(&self, r: &Region) -> bool {
        self.atoms.iter().all(|a| r.satisfies(a))
    }

    pub fn closed(&self) -> Guard {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                rel: match a.rel {
                    Rel::Lt => Rel::Le,
                    Rel::Gt => Rel::Ge,
                    r => r,
                },
                ..*a
            })
            .collect();
        Guard { atoms }
    }

    pub fn render(&self, clocks: &[String]) -> String {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{} {} {}", clocks[a.clock], a.rel.symbol(), a.constant))
            .collect();
        parts.join(" & ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimedState {
    pub name: String,
    pub owner: Owner,
    pub rate: i64,
    pub target: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TimedTransition {
    pub src: StateId,
    pub dst: StateId,
    pub guard: Guard,
    /// Sorted, without duplicates.
    pub resets: Vec<ClockId>,
    pub weight: i64,
}

impl TimedTransition {
    pub fn resets_clock(&self, c: ClockId) -> bool {
        self.resets.binary_search(&c).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimedError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate state {0}")]
    DuplicateState(String),
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("duplicate clock {0}")]
    DuplicateClock(String),
    #[error("unknown clock {0}")]
    UnknownClock(String),
    #[error("at least one clock is required")]
    NoClocks,
    #[error("guard of transition t{transition} has no upper bound on clock {clock}")]
    UnboundedClock { transition: TransId, clock: String },
    #[error("constant {constant} exceeds the declared bound {bound}")]
    ConstantAboveBound { constant: u32, bound: u32 },
    #[error("target {0} is owned by max")]
    MaxTarget(String),
    #[error("state {state} has no enabled transition from region {region}")]
    Deadlock { state: String, region: String },
    #[error("transition t{0} does not leave the current state")]
    WrongSource(TransId),
    #[error("guard of transition t{0} is not satisfied")]
    GuardUnsatisfied(TransId),
    #[error("delay exceeds the clock bound {0}")]
    ClockBoundExceeded(u32),
    #[error("valuation outside [0, {0}]")]
    OutOfBound(u32),
    #[error("valuation has {got} clocks, expected {expected}")]
    Arity { expected: usize, got: usize },
    #[error("negative delay")]
    NegativeDelay,
}

impl TimedError {
    pub fn is_syntax(&self) -> bool {
        matches!(self, TimedError::Syntax { .. })
    }
}

/// A validated weighted timed game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedGame {
    clocks: Vec<String>,
    bound: u32,
    declared_bound: Option<u32>,
    states: Vec<TimedState>,
    transitions: Vec<TimedTransition>,
    out: Vec<Vec<TransId>>,
    index: HashMap<String, StateId>,
}

impl TimedGame {
    /// Validates and assembles a game. `bound = None` uses the largest guard constant.
    pub fn new(
        clocks: Vec<String>,
        bound: Option<u32>,
        states: Vec<TimedState>,
        mut transitions: Vec<TimedTransition>,
    ) -> Result<TimedGame, TimedError> {
        if clocks.is_empty() {
            return Err(TimedError::NoClocks);
        }
        for (i, c) in clocks.iter().enumerate() {
            if clocks[..i].contains(c) {
                return Err(TimedError::DuplicateClock(c.clone()));
            }
        }
        let mut index = HashMap::new();
        for (i, s) in states.iter().enumerate() {
            if index.insert(s.name.clone(), i).is_some() {
                return Err(TimedError::DuplicateState(s.name.clone()));
            }
            if s.target && s.owner == Owner::Max {
                return Err(TimedError::MaxTarget(s.name.clone()));
            }
        }
        let max_const = transitions
            .iter()
            .flat_map(|t| t.guard.atoms.iter().map(|a| a.constant))
            .max()
            .unwrap_or(0);
        if let Some(b) = bound {
            if max_const > b {
                return Err(TimedError::ConstantAboveBound { constant: max_const, bound: b });
            }
        }
        for (id, t) in transitions.iter_mut().enumerate() {
            t.resets.sort_unstable();
            t.resets.dedup();
            for c in 0..clocks.len() {
                if !t.guard.atoms.iter().any(|a| a.clock == c && a.rel.is_upper()) {
                    return Err(TimedError::UnboundedClock { transition: id, clock: clocks[c].clone() });
                }
            }
        }
        let mut out = vec![Vec::new(); states.len()];
        for (id, t) in transitions.iter().enumerate() {
            out[t.src].push(id);
        }
        let game = TimedGame {
            clocks,
            bound: bound.unwrap_or(max_const),
            declared_bound: bound,
            states,
            transitions,
            out,
            index,
        };
        let ra = RegionAutomaton::build(&game);
        for node in 0..ra.num_nodes() {
            if ra.out_arcs(node).is_empty() {
                let (s, r) = ra.node(node);
                return Err(TimedError::Deadlock {
                    state: game.states[s].name.clone(),
                    region: ra.region(r).render(&game.clocks),
                });
            }
        }
        Ok(game)
    }

    pub fn parse(text: &str) -> Result<TimedGame, TimedError> {
        parse_timed_game(text)
    }

    pub fn clocks(&self) -> &[String] {
        &self.clocks
    }

    pub fn num_clocks(&self) -> usize {
        self.clocks.len()
    }

    /// The largest constant `M`; valuations range over `[0, M]^X`.
    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn states(&self) -> &[TimedState] {
        &self.states
    }

    pub fn state(&self, s: StateId) -> &TimedState {
        &self.states[s]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn transitions(&self) -> &[TimedTransition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransId) -> &TimedTransition {
        &self.transitions[t]
    }

    pub fn out_transitions(&self, s: StateId) -> &[TransId] {
        &self.out[s]
    }

    /// Largest absolute rate or transition weight.
    pub fn max_abs_weight(&self) -> i64 {
        let r = self.states.iter().map(|s| s.rate.abs()).max().unwrap_or(0);
        let w = self.transitions.iter().map(|t| t.weight.abs()).max().unwrap_or(0);
        r.max(w)
    }

    pub(crate) fn with_transitions(&self, transitions: Vec<TimedTransition>) -> TimedGame {
        TimedGame { transitions, ..self.clone() }
    }

    /// Owners of non-target states swapped, rates and weights negated.
    pub fn dual(&self) -> TimedGame {
        let states = self
            .states
            .iter()
            .map(|s| TimedState {
                owner: if s.target { s.owner } else { s.owner.opponent() },
                rate: -s.rate,
                ..s.clone()
            })
            .collect();
        let transitions = self.transitions.iter().map(|t| TimedTransition { weight: -t.weight, ..t.clone() }).collect();
        TimedGame { states, transitions, ..self.clone() }
    }

    pub fn to_wtg(&self) -> String {
        let mut s = String::from("game timed\n");
        let _ = writeln!(s, "clocks {}", self.clocks.join(" "));
        if let Some(b) = self.declared_bound {
            let _ = writeln!(s, "bound {b}");
        }
        for st in &self.states {
            let _ = writeln!(
                s,
                "state {} {} rate {}{}",
                st.name,
                st.owner.keyword(),
                st.rate,
                if st.target { " target" } else { "" }
            );
        }
        for t in &self.transitions {
            let resets: Vec<&str> = t.resets.iter().map(|&c| self.clocks[c].as_str()).collect();
            let _ = writeln!(
                s,
                "trans {} {} guard \"{}\" reset {{{}}} weight {}",
                self.states[t.src].name,
                self.states[t.dst].name,
                t.guard.render(&self.clocks),
                resets.join(", "),
                t.weight
            );
        }
        s
    }
}

/// Tokens of a `.wtg` line; quoted strings and `{...}` groups stay whole.
fn wtg_tokens(line: &str, ln: usize) -> Result<Vec<(usize, String)>, TimedError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let close = match c {
            '"' => Some('"'),
            '{' => Some('}'),
            _ => None,
        };
        let mut j = i + 1;
        if let Some(close) = close {
            while j < chars.len() && chars[j].1 != close {
                j += 1;
            }
            if j == chars.len() {
                return Err(TimedError::Syntax { line: ln, col: pos + 1, msg: format!("unterminated {c}") });
            }
            j += 1;
        } else {
            while j < chars.len() && !chars[j].1.is_whitespace() {
                j += 1;
            }
        }
        let end = chars.get(j).map_or(line.len(), |x| x.0);
        out.push((pos + 1, line[pos..end].to_string()));
        i = j;
    }
    Ok(out)
}

fn parse_guard(text: &str, clocks: &[String], ln: usize, col: usize) -> Result<Guard, TimedError> {
    let err = |msg: String| TimedError::Syntax { line: ln, col, msg };
    let mut atoms = Vec::new();
    for part in text.split('&') {
        let part = part.trim();
        let (pos, op, rel) = ["<=", ">=", "==", "<", ">", "="]
            .iter()
            .find_map(|op| {
                part.find(op).map(|p| {
                    let rel = match *op {
                        "<=" => Rel::Le,
                        ">=" => Rel::Ge,
                        "<" => Rel::Lt,
                        ">" => Rel::Gt,
                        _ => Rel::Eq,
                    };
                    (p, *op, rel)
                })
            })
            .ok_or_else(|| err(format!("atom without relation: {part:?}")))?;
        let lhs = part[..pos].trim();
        let rhs = part[pos + op.len()..].trim();
        let clock_of = |s: &str| clocks.iter().position(|c| c == s);
        let (clock, rel, cst) = match (clock_of(lhs), clock_of(rhs)) {
            (Some(c), None) => (c, rel, rhs),
            (None, Some(c)) => (c, rel.flipped(), lhs),
            _ => {
                let name = if lhs.chars().all(|ch| ch.is_ascii_digit()) { rhs } else { lhs };
                if name.chars().all(|ch| ch.is_ascii_digit()) {
                    return Err(err(format!("atom {part:?} mentions no clock")));
                }
                return Err(TimedError::UnknownClock(name.to_string()));
            }
        };
        let constant: u32 = cst.parse().map_err(|_| err(format!("bad constant {cst:?}")))?;
        atoms.push(Atom { clock, rel, constant });
    }
    Ok(Guard { atoms })
}

/// Parses the line-oriented `.wtg` format.
///
/// ```text
/// game timed
/// clocks x
/// state s0 min rate 1
/// state st min rate 0 target
/// trans s0 st guard "1 <= x & x <= 2" reset {} weight 0
/// trans st st guard "x <= 2" reset {x} weight 0
/// ```
pub fn parse_timed_game(text: &str) -> Result<TimedGame, TimedError> {
    struct RawTrans {
        ln: usize,
        src: String,
        dst: String,
        guard: (usize, String),
        resets: Vec<String>,
        weight: i64,
    }
    let mut header = false;
    let mut clocks: Option<Vec<String>> = None;
    let mut bound = None;
    let mut states = Vec::new();
    let mut raw = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let ln = lineno + 1;
        let line = line.split('#').next().unwrap_or("");
        let toks = wtg_tokens(line, ln)?;
        if toks.is_empty() {
            continue;
        }
        let err = |col: usize, msg: String| TimedError::Syntax { line: ln, col, msg };
        let word = |i: usize| toks.get(i).map(|t| t.1.as_str());
        let int = |i: usize| -> Result<i64, TimedError> {
            let (col, t) = toks.get(i).ok_or_else(|| err(line.len() + 1, "missing integer".into()))?;
            t.parse().map_err(|_| err(*col, format!("bad integer {t}")))
        };
        if !header {
            if toks.len() == 2 && word(0) == Some("game") && word(1) == Some("timed") {
                header = true;
                continue;
            }
            return Err(err(toks[0].0, "expected `game timed`".into()));
        }
        match toks[0].1.as_str() {
            "clocks" => {
                if clocks.is_some() {
                    return Err(err(toks[0].0, "clocks declared twice".into()));
                }
                clocks = Some(toks[1..].iter().map(|t| t.1.clone()).collect());
            }
            "bound" => {
                if toks.len() != 2 {
                    return Err(err(toks[0].0, "`bound` expects one integer".into()));
                }
                let b = int(1)?;
                bound = Some(u32::try_from(b).map_err(|_| err(toks[1].0, "bound must be a natural".into()))?);
            }
            "state" => {
                let owner = match word(2) {
                    Some("min") => Owner::Min,
                    Some("max") => Owner::Max,
                    _ => return Err(err(toks.get(2).map_or(line.len() + 1, |t| t.0), "expected min or max".into())),
                };
                if word(3) != Some("rate") {
                    return Err(err(toks.get(3).map_or(line.len() + 1, |t| t.0), "expected `rate`".into()));
                }
                let rate = int(4)?;
                let target = match (toks.len(), word(5)) {
                    (5, _) => false,
                    (6, Some("target")) => true,
                    _ => return Err(err(toks.get(5).map_or(1, |t| t.0), "unexpected trailing tokens".into())),
                };
                let name = toks[1].1.clone();
                states.push(TimedState { name, owner, rate, target });
            }
            "trans" => {
                if toks.len() != 9 || word(3) != Some("guard") || word(5) != Some("reset") || word(7) != Some("weight") {
                    return Err(err(
                        toks[0].0,
                        "expected `trans <src> <dst> guard \"...\" reset {...} weight <int>`".into(),
                    ));
                }
                let g = &toks[4];
                if !(g.1.starts_with('"') && g.1.ends_with('"') && g.1.len() >= 2) {
                    return Err(err(g.0, "guard must be quoted".into()));
                }
                let r = &toks[6];
                if !(r.1.starts_with('{') && r.1.ends_with('}')) {
                    return Err(err(r.0, "resets must be written {x, y}".into()));
                }
                let resets = r.1[1..r.1.len() - 1]
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
                raw.push(RawTrans {
                    ln,
                    src: toks[1].1.clone(),
                    dst: toks[2].1.clone(),
                    guard: (g.0 + 1, g.1[1..g.1.len() - 1].to_string()),
                    resets,
                    weight: int(8)?,
                });
            }
            "game" => return Err(err(toks[0].0, "duplicate header".into())),
            other => return Err(err(toks[0].0, format!("unknown directive {other}"))),
        }
    }
    if !header {
        return Err(TimedError::Syntax { line: 1, col: 1, msg: "missing `game timed` header".into() });
    }
    let clocks = clocks.ok_or(TimedError::NoClocks)?;
    let state_of = |n: &str| {
        states
            .iter()
            .position(|s: &TimedState| s.name == n)
            .ok_or_else(|| TimedError::UnknownState(n.to_string()))
    };
    let mut transitions = Vec::new();
    for t in raw {
        let guard = parse_guard(&t.guard.1, &clocks, t.ln, t.guard.0)?;
        let mut resets = Vec::new();
        for r in &t.resets {
            resets.push(clocks.iter().position(|c| c == r).ok_or_else(|| TimedError::UnknownClock(r.clone()))?);
        }
        transitions.push(TimedTransition {
            src: state_of(&t.src)?,
            dst: state_of(&t.dst)?,
            guard,
            resets,
            weight: t.weight,
        });
    }
    TimedGame::new(clocks, bound, states, transitions)
}

/// An Alur–Dill region over `[0, M]^X`.
///
/// `ints[c]` is the integer part of clock `c`. Clocks with a nonzero fractional part
/// are grouped in `classes`, ordered by increasing fractional part; clocks that
/// appear in no class have fractional part zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Region {
    pub ints: Vec<u32>,
    pub classes: Vec<Vec<ClockId>>,
}

/// Integer valuation in the closure of a region.
pub type Corner = Vec<u32>;

impl Region {
    pub fn num_clocks(&self) -> usize {
        self.ints.len()
    }

    /// Index of the fractional class of `c`, `None` when its fractional part is 0.
    pub fn class_of(&self, c: ClockId) -> Option<usize> {
        self.classes.iter().position(|k| k.contains(&c))
    }

    pub fn is_zero_frac(&self, c: ClockId) -> bool {
        self.class_of(c).is_none()
    }

    /// Every clock has a nonzero fractional part, so small delays stay inside.
    pub fn is_open(&self) -> bool {
        (0..self.num_clocks()).all(|c| !self.is_zero_frac(c))
    }

    pub fn satisfies(&self, a: &Atom) -> bool {
        let n = self.ints[a.clock];
        let k = a.constant;
        if self.is_zero_frac(a.clock) {
            return a.rel.holds(&n, &k);
        }
        match a.rel {
            Rel::Lt | Rel::Le => n < k,
            Rel::Eq => false,
            Rel::Gt | Rel::Ge => n >= k,
        }
    }

    /// The next region along the diagonal, `None` at the bound.
    pub fn successor(&self, bound: u32) -> Option<Region> {
        let zero: Vec<ClockId> = (0..self.num_clocks()).filter(|&c| self.is_zero_frac(c)).collect();
        let mut r = self.clone();
        if !zero.is_empty() {
            if zero.iter().any(|&c| self.ints[c] >= bound) {
                return None;
            }
            r.classes.insert(0, zero);
        } else {
            let last = r.classes.pop()?;
            for c in last {
                r.ints[c] += 1;
            }
        }
        Some(r)
    }

    /// `self` followed by every later region along the diagonal.
    pub fn time_successors(&self, bound: u32) -> Vec<Region> {
        let mut out = vec![self.clone()];
        while let Some(n) = out.last().expect("nonempty").successor(bound) {
            out.push(n);
        }
        out
    }

    pub fn reset(&self, clocks: &[ClockId]) -> Region {
        let mut r = self.clone();
        for &c in clocks {
            r.ints[c] = 0;
        }
        for k in &mut r.classes {
            k.retain(|c| !clocks.contains(c));
        }
        r.classes.retain(|k| !k.is_empty());
        r
    }

    /// A valuation of the region: class `i` of `m` gets fractional part `(i+1)/(m+1)`.
    pub fn representative(&self) -> ClockValuation {
        let m = self.classes.len() as i64;
        (0..self.num_clocks())
            .map(|c| {
                let base = qi(self.ints[c] as i64);
                match self.class_of(c) {
                    Some(i) => base + q(i as i64 + 1, m + 1),
                    None => base,
                }
            })
            .collect()
    }

    /// Integer points of the closure, sorted.
    pub fn corners(&self) -> Vec<Corner> {
        let m = self.classes.len();
        let mut out: Vec<Corner> = (0..=m)
            .map(|j| {
                let mut c = self.ints.clone();
                for k in &self.classes[j..] {
                    for &x in k {
                        c[x] += 1;
                    }
                }
                c
            })
            .collect();
        out.sort();
        out
    }

    pub fn closure_contains(&self, corner: &[u32]) -> bool {
        let mut prev = 0;
        for c in 0..self.num_clocks() {
            if self.is_zero_frac(c) && corner[c] != self.ints[c] {
                return false;
            }
        }
        for k in &self.classes {
            let d = corner[k[0]] as i64 - self.ints[k[0]] as i64;
            if !(0..=1).contains(&d) || k.iter().any(|&x| corner[x] as i64 - self.ints[x] as i64 != d) {
                return false;
            }
            if d < prev {
                return false;
            }
            prev = d;
        }
        true
    }

    pub fn contains(&self, v: &[Q], bound: u32) -> bool {
        region_of(v, bound).is_ok_and(|r| &r == self)
    }

    /// Closure bounds of clock `c`: `[n, n]` or `[n, n+1]`.
    pub fn clock_interval(&self, c: ClockId) -> (u32, u32) {
        let n = self.ints[c];
        if self.is_zero_frac(c) {
            (n, n)
        } else {
            (n, n + 1)
        }
    }

    pub fn render(&self, clocks: &[String]) -> String {
        let mut parts: Vec<String> = (0..self.num_clocks())
            .map(|c| {
                let n = self.ints[c];
                if self.is_zero_frac(c) {
                    format!("{} = {n}", clocks[c])
                } else {
                    format!("{n} < {} < {}", clocks[c], n + 1)
                }
            })
            .collect();
        let nonzero: usize = self.classes.iter().map(Vec::len).sum();
        if nonzero >= 2 {
            let chain: Vec<String> = self
                .classes
                .iter()
                .map(|k| k.iter().map(|&c| format!("frac({})", clocks[c])).collect::<Vec<_>>().join(" = "))
                .collect();
            parts.push(chain.join(" < "));
        }
        parts.join(", ")
    }
}

/// The region containing `v`.
pub fn region_of(v: &[Q], bound: u32) -> Result<Region, TimedError> {
    let m = qi(bound as i64);
    let mut ints = Vec::with_capacity(v.len());
    let mut fracs: Vec<(Q, ClockId)> = Vec::new();
    for (c, x) in v.iter().enumerate() {
        if x.is_negative() || *x > m {
            return Err(TimedError::OutOfBound(bound));
        }
        let f = x.floor();
        ints.push(f.to_integer().to_u32().ok_or(TimedError::OutOfBound(bound))?);
        let frac = x - &f;
        if !frac.is_zero() {
            fracs.push((frac, c));
        }
    }
    fracs.sort();
    let mut classes: Vec<Vec<ClockId>> = Vec::new();
    let mut last: Option<Q> = None;
    for (f, c) in fracs {
        if last.as_ref() == Some(&f) {
            classes.last_mut().expect("nonempty").push(c);
        } else {
            classes.push(vec![c]);
            last = Some(f);
        }
    }
    for k in &mut classes {
        k.sort_unstable();
    }
    Ok(Region { ints, classes })
}

fn ordered_partitions(set: &[ClockId]) -> Vec<Vec<Vec<ClockId>>> {
    if set.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let n = set.len();
    for mask in 1u32..(1 << n) {
        let first: Vec<ClockId> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| set[i]).collect();
        let rest: Vec<ClockId> = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| set[i]).collect();
        for mut tail in ordered_partitions(&rest) {
            tail.insert(0, first.clone());
            out.push(tail);
        }
    }
    out
}

/// All regions over `[0, M]^k`, ordered by their representatives.
pub fn enumerate_regions(num_clocks: usize, bound: u32) -> Vec<Region> {
    let mut out = Vec::new();
    let total = (bound as usize + 1).pow(num_clocks as u32);
    for code in 0..total {
        let mut ints = Vec::with_capacity(num_clocks);
        let mut x = code;
        for _ in 0..num_clocks {
            ints.push((x % (bound as usize + 1)) as u32);
            x /= bound as usize + 1;
        }
        ints.reverse();
        let movable: Vec<ClockId> = (0..num_clocks).filter(|&c| ints[c] < bound).collect();
        for mask in 0u32..(1 << movable.len()) {
            let chosen: Vec<ClockId> =
                (0..movable.len()).filter(|i| mask & (1 << i) != 0).map(|i| movable[i]).collect();
            for classes in ordered_partitions(&chosen) {
                out.push(Region { ints: ints.clone(), classes });
            }
        }
    }
    let mut keyed: Vec<(ClockValuation, Region)> = out.into_iter().map(|r| (r.representative(), r)).collect();
    keyed.sort();
    keyed.into_iter().map(|(_, r)| r).collect()
}

/// Arc `(s, r) --t--> (s', r')`, with the time-successors of `r` through which `t` fires.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionArc {
    pub src: NodeId,
    pub trans: TransId,
    pub dst: NodeId,
    pub via: Vec<RegionId>,
}

/// Every `(state, region)` node, with node id `state * #regions + region`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionAutomaton {
    bound: u32,
    regions: Vec<Region>,
    region_index: HashMap<Region, RegionId>,
    num_states: usize,
    owners: Vec<Owner>,
    targets: Vec<bool>,
    arcs: Vec<RegionArc>,
    out: Vec<Vec<ArcId>>,
}

impl RegionAutomaton {
    pub fn build(game: &TimedGame) -> RegionAutomaton {
        let regions = enumerate_regions(game.num_clocks(), game.bound());
        let region_index: HashMap<Region, RegionId> =
            regions.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        let nr = regions.len();
        let ns = game.num_states();
        let succ: Vec<Vec<RegionId>> = regions
            .iter()
            .map(|r| r.time_successors(game.bound()).iter().map(|x| region_index[x]).collect())
            .collect();
        let mut arcs = Vec::new();
        let mut out = vec![Vec::new(); ns * nr];
        for s in 0..ns {
            for r in 0..nr {
                let src = s * nr + r;
                let mut grouped: BTreeMap<(TransId, NodeId), Vec<RegionId>> = BTreeMap::new();
                for &t in game.out_transitions(s) {
                    let tr = game.transition(t);
                    for &r2 in &succ[r] {
                        if tr.guard.satisfied_by_region(&regions[r2]) {
                            let landing = region_index[&regions[r2].reset(&tr.resets)];
                            grouped.entry((t, tr.dst * nr + landing)).or_default().push(r2);
                        }
                    }
                }
                for ((trans, dst), via) in grouped {
                    out[src].push(arcs.len());
                    arcs.push(RegionArc { src, trans, dst, via });
                }
            }
        }
        let owners = (0..ns * nr).map(|n| game.state(n / nr).owner).collect();
        let targets = (0..ns * nr).map(|n| game.state(n / nr).target).collect();
        RegionAutomaton { bound: game.bound(), regions, region_index, num_states: ns, owners, targets, arcs, out }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_states * self.regions.len()
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, r: RegionId) -> &Region {
        &self.regions[r]
    }

    pub fn region_id(&self, r: &Region) -> Option<RegionId> {
        self.region_index.get(r).copied()
    }

    pub fn node(&self, n: NodeId) -> (StateId, RegionId) {
        (n / self.regions.len(), n % self.regions.len())
    }

    pub fn node_id(&self, s: StateId, r: RegionId) -> NodeId {
        s * self.regions.len() + r
    }

    pub fn node_of(&self, s: StateId, v: &[Q]) -> Result<NodeId, TimedError> {
        let r = region_of(v, self.bound)?;
        Ok(self.node_id(s, self.region_index[&r]))
    }

    pub fn owner(&self, n: NodeId) -> Owner {
        self.owners[n]
    }

    pub fn owners(&self) -> &[Owner] {
        &self.owners
    }

    pub fn is_target(&self, n: NodeId) -> bool {
        self.targets[n]
    }

    pub fn arcs(&self) -> &[RegionArc] {
        &self.arcs
    }

    pub fn arc(&self, a: ArcId) -> &RegionArc {
        &self.arcs[a]
    }

    pub fn out_arcs(&self, n: NodeId) -> &[ArcId] {
        &self.out[n]
    }

    pub fn find_arc(&self, src: NodeId, trans: TransId, dst: NodeId) -> Option<ArcId> {
        self.out[src].iter().copied().find(|&a| self.arcs[a].trans == trans && self.arcs[a].dst == dst)
    }

    /// Nodes reachable from `start`, in id order.
    pub fn reachable_from(&self, start: &[NodeId]) -> Vec<NodeId> {
        let mut seen = vec![false; self.num_nodes()];
        let mut stack: Vec<NodeId> = start.to_vec();
        for &s in start {
            seen[s] = true;
        }
        while let Some(n) = stack.pop() {
            for &a in &self.out[n] {
                let d = self.arcs[a].dst;
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        (0..self.num_nodes()).filter(|&n| seen[n]).collect()
    }

    /// `state / region` label.
    pub fn label(&self, game: &TimedGame, n: NodeId) -> String {
        let (s, r) = self.node(n);
        format!("{} / {}", game.state(s).name, self.regions[r].render(game.clocks()))
    }

    /// Region graph without arcs leaving target nodes. Arc tags are RA arc ids.
    pub fn play_digraph(&self) -> crate::graph_analysis::Digraph {
        let mut g = crate::graph_analysis::Digraph::new(self.num_nodes());
        for (id, a) in self.arcs.iter().enumerate() {
            if !self.targets[a.src] {
                g.add_arc(a.src, a.dst, 0, id);
            }
        }
        g
    }
}

pub fn build_region_automaton(game: &TimedGame) -> RegionAutomaton {
    RegionAutomaton::build(game)
}

/// Upper bound `(4(M+1))^|X| |X|!` on the number of regions.
pub fn region_count_bound(num_clocks: usize, bound: u32) -> u128 {
    let base = 4 * (bound as u128 + 1);
    let fact: u128 = (1..=num_clocks as u128).product();
    base.pow(num_clocks as u32) * fact
}

/// A configuration `(state, valuation)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Config {
    pub state: StateId,
    pub valuation: ClockValuation,
}

/// Fires `t` after waiting `delay` in `config`.
pub fn timed_step(game: &TimedGame, config: &Config, delay: &Q, t: TransId) -> Result<(Config, Q), TimedError> {
    if config.valuation.len() != game.num_clocks() {
        return Err(TimedError::Arity { expected: game.num_clocks(), got: config.valuation.len() });
    }
    if delay.is_negative() {
        return Err(TimedError::NegativeDelay);
    }
    let tr = game.transitions.get(t).ok_or(TimedError::WrongSource(t))?;
    if tr.src != config.state {
        return Err(TimedError::WrongSource(t));
    }
    let m = qi(game.bound() as i64);
    let moved: ClockValuation = config.valuation.iter().map(|x| x + delay).collect();
    if moved.iter().any(|x| *x > m) {
        return Err(TimedError::ClockBoundExceeded(game.bound()));
    }
    if !tr.guard.satisfied_by(&moved) {
        return Err(TimedError::GuardUnsatisfied(t));
    }
    let valuation = moved
        .into_iter()
        .enumerate()
        .map(|(c, x)| if tr.resets_clock(c) { Q::zero() } else { x })
        .collect();
    let weight = delay * qi(game.state(config.state).rate) + qi(tr.weight);
    Ok((Config { state: tr.dst, valuation }, weight))
}

/// A finite timed play: start configuration and `(delay, transition)` steps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedPlay {
    pub start: Config,
    pub steps: Vec<(Q, TransId)>,
}

impl TimedPlay {
    /// Configurations visited and the accumulated weight.
    pub fn run(&self, game: &TimedGame) -> Result<(Vec<Config>, Q), TimedError> {
        let mut configs = vec![self.start.clone()];
        let mut total = Q::zero();
        for (d, t) in &self.steps {
            let (next, w) = timed_step(game, configs.last().expect("nonempty"), d, *t)?;
            total += w;
            configs.push(next);
        }
        Ok((configs, total))
    }
}

/// A path of the region automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegionPath {
    pub start: NodeId,
    pub arcs: Vec<ArcId>,
}

impl RegionPath {
    pub fn nodes(&self, ra: &RegionAutomaton) -> Vec<NodeId> {
        let mut out = vec![self.start];
        out.extend(self.arcs.iter().map(|&a| ra.arc(a).dst));
        out
    }

    pub fn end(&self, ra: &RegionAutomaton) -> NodeId {
        self.arcs.last().map_or(self.start, |&a| ra.arc(a).dst)
    }

    pub fn is_cycle(&self, ra: &RegionAutomaton) -> bool {
        !self.arcs.is_empty() && self.end(ra) == self.start
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

/// Replaces valuations by regions.
pub fn project_play(game: &TimedGame, ra: &RegionAutomaton, play: &TimedPlay) -> Result<RegionPath, TimedError> {
    let (configs, _) = play.run(game)?;
    let start = ra.node_of(configs[0].state, &configs[0].valuation)?;
    let mut arcs = Vec::new();
    let mut cur = start;
    for (i, (_, t)) in play.steps.iter().enumerate() {
        let next = ra.node_of(configs[i + 1].state, &configs[i + 1].valuation)?;
        let a = ra.find_arc(cur, *t, next).expect("every concrete step has a region arc");
        arcs.push(a);
        cur = next;
    }
    Ok(RegionPath { start, arcs })
}

/// Interval `{lo ⋈ x ⋈ hi}` of rationals with endpoint flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub lo_closed: bool,
    pub hi: Q,
    pub hi_closed: bool,
}

impl Interval {
    pub fn point(x: Q) -> Interval {
        Interval { lo: x.clone(), lo_closed: true, hi: x, hi_closed: true }
    }

    pub fn open(lo: Q, hi: Q) -> Interval {
        Interval { lo, lo_closed: false, hi, hi_closed: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: &Q) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.hi_closed { *x <= self.hi } else { *x < self.hi };
        above && below
    }

    pub fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_closed) = match self.lo.cmp(&o.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Less => (o.lo.clone(), o.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && o.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&o.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (o.hi.clone(), o.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && o.hi_closed),
        };
        Interval { lo, lo_closed, hi, hi_closed }
    }

    /// The midpoint, or the single point of a degenerate interval.
    pub fn pick(&self) -> Option<Q> {
        if self.is_empty() {
            None
        } else {
            Some((&self.lo + &self.hi) / qi(2))
        }
    }
}

/// Delays `d ≥ 0` with `v + d` in `target`, a time-successor of the region of `v`.
pub fn delay_interval(v: &[Q], target: &Region) -> Interval {
    let mut iv = Interval { lo: Q::zero(), lo_closed: true, hi: qi(i64::MAX), hi_closed: true };
    for (c, x) in v.iter().enumerate() {
        let (lo, hi) = target.clock_interval(c);
        let clock = if lo == hi {
            Interval::point(qi(lo as i64) - x)
        } else {
            Interval::open(qi(lo as i64) - x, qi(hi as i64) - x)
        };
        iv = iv.intersect(&clock);
    }
    iv
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.num_clocks()).map(|c| format!("x{c}")).collect();
        f.write_str(&self.render(&names))
    }
}
