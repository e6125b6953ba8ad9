//! Piecewise-affine functions of one clock with exact rational breakpoints.

use std::collections::BTreeSet;

use num::{Signed, Zero};
use serde_json::{json, Value};

use crate::ext::Extended;
use crate::timed::{fmt_q, qi, Interval, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub a: Q,
    pub b: Q,
}

impl Affine {
    pub fn new(a: Q, b: Q) -> Affine {
        Affine { a, b }
    }

    pub fn constant(b: Q) -> Affine {
        Affine { a: Q::zero(), b }
    }

    pub fn eval(&self, x: &Q) -> Q {
        &self.a * x + &self.b
    }

    /// `self + a·x + b`.
    pub fn shift(&self, a: &Q, b: &Q) -> Affine {
        Affine { a: &self.a + a, b: &self.b + b }
    }
}

/// An affine piece or a constant infinity.
pub type CellValue = Extended<Affine>;

pub fn eval_value(v: &CellValue, x: &Q) -> Extended<Q> {
    match v {
        Extended::NegInf => Extended::NegInf,
        Extended::PosInf => Extended::PosInf,
        Extended::Fin(f) => Extended::Fin(f.eval(x)),
    }
}

fn constant_value(v: &Extended<Q>) -> CellValue {
    v.clone().map(Affine::constant)
}

pub fn fmt_ext(v: &Extended<Q>) -> String {
    match v {
        Extended::NegInf => "-inf".to_string(),
        Extended::PosInf => "+inf".to_string(),
        Extended::Fin(x) => fmt_q(x),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub lo: Q,
    pub lo_closed: bool,
    pub hi: Q,
    pub hi_closed: bool,
    pub value: CellValue,
}

impl Cell {
    pub fn point(p: Q, v: Extended<Q>) -> Cell {
        Cell { lo: p.clone(), lo_closed: true, hi: p, hi_closed: true, value: constant_value(&v) }
    }

    pub fn open(lo: Q, hi: Q, value: CellValue) -> Cell {
        Cell { lo, lo_closed: false, hi, hi_closed: false, value }
    }

    pub fn on(iv: &Interval, value: CellValue) -> Cell {
        Cell { lo: iv.lo.clone(), lo_closed: iv.lo_closed, hi: iv.hi.clone(), hi_closed: iv.hi_closed, value }
    }

    pub fn interval(&self) -> Interval {
        Interval { lo: self.lo.clone(), lo_closed: self.lo_closed, hi: self.hi.clone(), hi_closed: self.hi_closed }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.interval().contains(x)
    }

    /// The point itself, or the midpoint.
    pub fn sample(&self) -> Q {
        (&self.lo + &self.hi) / qi(2)
    }

    pub fn eval(&self, x: &Q) -> Extended<Q> {
        eval_value(&self.value, x)
    }

    pub fn to_json(&self) -> Value {
        let (a, b) = match &self.value {
            Extended::Fin(f) => (json!(fmt_q(&f.a)), json!(fmt_q(&f.b))),
            Extended::NegInf => (Value::Null, json!("-inf")),
            Extended::PosInf => (Value::Null, json!("+inf")),
        };
        json!({
            "lo": fmt_q(&self.lo),
            "hi": fmt_q(&self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
            "a": a,
            "b": b,
        })
    }

    pub fn render(&self) -> String {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        let v = match &self.value {
            Extended::Fin(f) if f.a.is_zero() => fmt_q(&f.b),
            Extended::Fin(f) => format!("{}*x + {}", fmt_q(&f.a), fmt_q(&f.b)),
            Extended::NegInf => "-inf".to_string(),
            Extended::PosInf => "+inf".to_string(),
        };
        if self.is_point() {
            format!("{{{}}}: {v}", fmt_q(&self.lo))
        } else {
            format!("{l}{}, {}{r}: {v}", fmt_q(&self.lo), fmt_q(&self.hi))
        }
    }
}

/// A partial function given by sorted, disjoint cells. After [`Pwa::normalize`] the
/// representation is canonical: equal functions have equal cells.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Pwa {
    cells: Vec<Cell>,
}

enum Item {
    Point(Q, Extended<Q>),
    Open(Cell),
}

impl Pwa {
    pub fn from_cells(mut cells: Vec<Cell>) -> Pwa {
        cells.retain(|c| !c.interval().is_empty());
        cells.sort_by(|x, y| x.lo.cmp(&y.lo).then(y.lo_closed.cmp(&x.lo_closed)));
        Pwa { cells }.normalize()
    }

    pub fn constant(iv: &Interval, v: Extended<Q>) -> Pwa {
        if iv.lo == iv.hi {
            return Pwa::from_cells(vec![Cell::point(iv.lo.clone(), v)]);
        }
        Pwa::from_cells(vec![Cell::on(iv, constant_value(&v))])
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_at(&self, x: &Q) -> Option<&Cell> {
        self.cells.iter().find(|c| c.contains(x))
    }

    pub fn eval(&self, x: &Q) -> Option<Extended<Q>> {
        self.cell_at(x).map(|c| c.eval(x))
    }

    pub fn restrict(&self, iv: &Interval) -> Pwa {
        let cells = self
            .cells
            .iter()
            .filter_map(|c| {
                let i = c.interval().intersect(iv);
                (!i.is_empty()).then(|| Cell::on(&i, c.value.clone()))
            })
            .collect();
        Pwa::from_cells(cells)
    }

    /// Applies `f` to every finite piece.
    pub fn map_finite(&self, f: impl Fn(&Affine) -> Affine) -> Pwa {
        let cells = self
            .cells
            .iter()
            .map(|c| Cell { value: c.value.clone().map(|a| f(&a)), ..c.clone() })
            .collect();
        Pwa::from_cells(cells)
    }

    pub fn negate(&self) -> Pwa {
        let cells = self
            .cells
            .iter()
            .map(|c| Cell {
                value: match &c.value {
                    Extended::NegInf => Extended::PosInf,
                    Extended::PosInf => Extended::NegInf,
                    Extended::Fin(f) => Extended::Fin(Affine::new(-&f.a, -&f.b)),
                },
                ..c.clone()
            })
            .collect();
        Pwa::from_cells(cells)
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Pwa>) -> Pwa {
        Pwa::from_cells(parts.into_iter().flat_map(|p| p.cells.iter().cloned()).collect())
    }

    /// `Some(v)` if the function is the constant infinity `v` everywhere.
    pub fn infinite(&self) -> Option<Extended<Q>> {
        let first = self.cells.first()?;
        let v = match first.value {
            Extended::NegInf => Extended::NegInf,
            Extended::PosInf => Extended::PosInf,
            Extended::Fin(_) => return None,
        };
        self.cells.iter().all(|c| c.value == first.value).then_some(v)
    }

    pub fn all_finite(&self) -> bool {
        self.cells.iter().all(|c| c.value.is_finite())
    }

    pub fn max_abs_slope(&self) -> Q {
        self.cells
            .iter()
            .filter_map(|c| c.value.finite().map(|f| f.a.abs()))
            .max()
            .unwrap_or_else(Q::zero)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.cells.iter().map(Cell::to_json).collect())
    }

    pub fn render(&self) -> String {
        self.cells.iter().map(Cell::render).collect::<Vec<_>>().join("; ")
    }

    fn normalize(self) -> Pwa {
        let mut items: Vec<Item> = Vec::new();
        for c in self.cells {
            if c.is_point() {
                let v = c.eval(&c.lo);
                items.push(Item::Point(c.lo, v));
                continue;
            }
            if c.lo_closed {
                items.push(Item::Point(c.lo.clone(), c.eval(&c.lo)));
            }
            let hi = c.hi_closed.then(|| (c.hi.clone(), c.eval(&c.hi)));
            items.push(Item::Open(Cell { lo_closed: false, hi_closed: false, ..c }));
            if let Some((h, v)) = hi {
                items.push(Item::Point(h, v));
            }
        }
        // Join open, point, open runs that share one description.
        let mut joined: Vec<Item> = Vec::new();
        for it in items {
            joined.push(it);
            let n = joined.len();
            if n < 3 {
                continue;
            }
            let ok = matches!(
                (&joined[n - 3], &joined[n - 2], &joined[n - 1]),
                (Item::Open(a), Item::Point(p, v), Item::Open(b))
                    if a.value == b.value && a.hi == *p && b.lo == *p && a.eval(p) == *v
            );
            if ok {
                let Some(Item::Open(b)) = joined.pop() else { unreachable!() };
                joined.pop();
                if let Some(Item::Open(a)) = joined.last_mut() {
                    a.hi = b.hi;
                }
            }
        }
        // Attach the remaining points to a neighbour, left first.
        let mut cells: Vec<Cell> = Vec::new();
        let mut pending: Option<(Q, Extended<Q>)> = None;
        for it in joined {
            match it {
                Item::Open(mut c) => {
                    if let Some((p, v)) = pending.take() {
                        if c.lo == p && c.eval(&p) == v {
                            c.lo_closed = true;
                        } else {
                            cells.push(Cell::point(p, v));
                        }
                    }
                    cells.push(c);
                }
                Item::Point(p, v) => {
                    if let Some((q, w)) = pending.take() {
                        cells.push(Cell::point(q, w));
                    }
                    match cells.last_mut() {
                        Some(c) if !c.is_point() && c.hi == p && !c.hi_closed && c.eval(&p) == v => {
                            c.hi_closed = true;
                        }
                        _ => pending = Some((p, v)),
                    }
                }
            }
        }
        if let Some((p, v)) = pending {
            cells.push(Cell::point(p, v));
        }
        Pwa { cells }
    }
}

fn better(x: &Extended<Q>, y: &Extended<Q>, maximize: bool) -> bool {
    if maximize {
        x > y
    } else {
        x < y
    }
}

/// Elementary pieces between sorted breakpoints: each point and each open gap.
fn pieces(points: &[Q]) -> Vec<Interval> {
    let mut out = Vec::new();
    for (i, p) in points.iter().enumerate() {
        out.push(Interval::point(p.clone()));
        if let Some(n) = points.get(i + 1) {
            out.push(Interval::open(p.clone(), n.clone()));
        }
    }
    out
}

fn crossing(f: &Affine, g: &Affine) -> Option<Q> {
    (f.a != g.a).then(|| (&g.b - &f.b) / (&f.a - &g.a))
}

/// Splits open `iv` where any two of `lines` cross.
fn split_at_crossings(iv: &Interval, lines: &[&CellValue]) -> Vec<Interval> {
    let mut pts: BTreeSet<Q> = BTreeSet::new();
    pts.insert(iv.lo.clone());
    pts.insert(iv.hi.clone());
    for (i, f) in lines.iter().enumerate() {
        for g in &lines[i + 1..] {
            if let (Extended::Fin(f), Extended::Fin(g)) = (f, g) {
                if let Some(x) = crossing(f, g) {
                    if x > iv.lo && x < iv.hi {
                        pts.insert(x);
                    }
                }
            }
        }
    }
    let pts: Vec<Q> = pts.into_iter().collect();
    pieces(&pts).into_iter().filter(|p| !(p.lo == p.hi && (p.lo == iv.lo || p.lo == iv.hi))).collect()
}

/// Pointwise optimum of partial functions. Each output cell carries the index of
/// the first function attaining it.
pub fn envelope(fs: &[Pwa], maximize: bool) -> Vec<(Cell, usize)> {
    let pts: BTreeSet<Q> = fs
        .iter()
        .flat_map(|f| f.cells.iter().flat_map(|c| [c.lo.clone(), c.hi.clone()]))
        .collect();
    let pts: Vec<Q> = pts.into_iter().collect();
    let mut out = Vec::new();
    for piece in pieces(&pts) {
        let m = piece.pick().expect("nonempty");
        let cands: Vec<(usize, &CellValue)> =
            fs.iter().enumerate().filter_map(|(k, f)| f.cell_at(&m).map(|c| (k, &c.value))).collect();
        if cands.is_empty() {
            continue;
        }
        let lines: Vec<&CellValue> = cands.iter().map(|c| c.1).collect();
        let subs = if piece.lo == piece.hi { vec![piece.clone()] } else { split_at_crossings(&piece, &lines) };
        for sub in subs {
            let s = sub.pick().expect("nonempty");
            let mut best = 0;
            for i in 1..cands.len() {
                if better(&eval_value(cands[i].1, &s), &eval_value(cands[best].1, &s), maximize) {
                    best = i;
                }
            }
            let (k, v) = cands[best];
            let cell = if sub.lo == sub.hi { Cell::point(s.clone(), eval_value(v, &s)) } else { Cell::on(&sub, v.clone()) };
            out.push((cell, k));
        }
    }
    out
}

/// Where the optimum over later points is taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reach {
    /// At the current point itself.
    Here,
    /// At a fixed point.
    At(Q),
    /// Approached towards `y` from within the cell containing `inside`.
    Near { y: Q, inside: Q },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice {
    pub arg: usize,
    pub reach: Reach,
}

/// Optimum of a cell over itself and where it is reached; `Here` when it
/// is reached at the starting point of the cell's favourable direction.
fn cell_extremum(c: &Cell, maximize: bool) -> (Extended<Q>, Reach) {
    let towards_hi = match &c.value {
        Extended::Fin(f) => {
            if maximize {
                f.a.is_positive()
            } else {
                f.a.is_negative()
            }
        }
        _ => false,
    };
    let (y, closed) = if towards_hi { (&c.hi, c.hi_closed) } else { (&c.lo, c.lo_closed) };
    let reach = if closed { Reach::At(y.clone()) } else { Reach::Near { y: y.clone(), inside: c.sample() } };
    (c.eval(y), reach)
}

/// For `nu` in `carrier`, the optimum of `g(y)` over `y ≥ nu` in the domain of `g`.
/// `None` if some point of `carrier` has no such `y`.
pub fn suffix_opt(g: &[(Cell, usize)], carrier: &Interval, maximize: bool) -> Option<Vec<(Cell, Choice)>> {
    let mut pts: BTreeSet<Q> = g.iter().flat_map(|(c, _)| [c.lo.clone(), c.hi.clone()]).collect();
    pts.insert(carrier.lo.clone());
    pts.insert(carrier.hi.clone());
    let pts: Vec<Q> = pts.into_iter().collect();
    let extrema: Vec<(Extended<Q>, Reach)> = g.iter().map(|(c, _)| cell_extremum(c, maximize)).collect();
    let mut out = Vec::new();
    for piece in pieces(&pts) {
        let m = piece.pick().expect("nonempty");
        if !carrier.contains(&m) {
            continue;
        }
        let mut tail: Option<(Extended<Q>, Choice)> = None;
        let mut own: Option<(CellValue, Choice)> = None;
        for (j, (c, arg)) in g.iter().enumerate() {
            if c.contains(&m) {
                let (v, reach) = &extrema[j];
                let favourable = matches!(c.value, Extended::Fin(ref f) if if maximize { !f.a.is_positive() } else { !f.a.is_negative() })
                    || !c.value.is_finite();
                own = Some(if favourable {
                    (c.value.clone(), Choice { arg: *arg, reach: Reach::Here })
                } else {
                    (constant_value(v), Choice { arg: *arg, reach: reach.clone() })
                });
            } else if c.sample() > m {
                let (v, reach) = &extrema[j];
                let replace = match &tail {
                    None => true,
                    Some((tv, tc)) => better(v, tv, maximize) || (v == tv && *arg < tc.arg),
                };
                if replace {
                    tail = Some((v.clone(), Choice { arg: *arg, reach: reach.clone() }));
                }
            }
        }
        match (own, tail) {
            (None, None) => return None,
            (None, Some((v, ch))) => out.push((Cell::on(&piece, constant_value(&v)), ch)),
            (Some((f, ch)), None) => out.push((Cell::on(&piece, f), ch)),
            (Some((f, och)), Some((v, tch))) => {
                let t = constant_value(&v);
                let subs = if piece.lo == piece.hi { vec![piece.clone()] } else { split_at_crossings(&piece, &[&f, &t]) };
                for sub in subs {
                    let s = sub.pick().expect("nonempty");
                    let (fv, tv) = (eval_value(&f, &s), v.clone());
                    let take_tail = better(&tv, &fv, maximize) || (tv == fv && tch.arg < och.arg);
                    let (val, ch) = if take_tail { (t.clone(), tch.clone()) } else { (f.clone(), och.clone()) };
                    let cell = if sub.lo == sub.hi { Cell::point(s.clone(), eval_value(&val, &s)) } else { Cell::on(&sub, val) };
                    out.push((cell, ch));
                }
            }
        }
    }
    Some(out)
}
