//! Exact values of divergent one-clock weighted timed games, a grid approximation
//! for any number of clocks, and ε-optimal strategies.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use rand::Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::corner::{cycle_sign, is_divergent_timed_with, simple_cycle_in, CycleSign, TimedWitness};
use crate::ext::Extended;
use crate::game::{Owner, WeightedGame};
use crate::graph_analysis::{attractor_in, sccs, Digraph};
use crate::pwa::{envelope, fmt_ext, suffix_opt, Cell, Choice, Pwa, Reach};
use crate::timed::{
    delay_interval, fmt_q, q, qi, Config, Guard, Interval, NodeId, Q, Region, RegionAutomaton, Rel, StateId,
    TimedError, TimedGame, TimedPlay, TransId,
};
use crate::untimed::{solve, SolveError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimedSolveError {
    #[error("exact solving supports one clock, the game has {0}; use the grid approximation")]
    MultiClock(usize),
    #[error("game is not divergent")]
    NotDivergent(Box<TimedWitness>),
    #[error("inconsistent result on nodes {nodes:?}: {reason}")]
    Inconsistent { nodes: Vec<NodeId>, reason: String },
    #[error("no move from part of node {0}")]
    Degenerate(NodeId),
    #[error("value of {state} at {valuation} is infinite")]
    InfiniteValue { state: String, valuation: String },
    #[error("grid game would have {vertices} vertices, limit is {limit}")]
    GuardViolated { vertices: usize, limit: usize },
    #[error("granularity must be positive")]
    BadGranularity,
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error(transparent)]
    Untimed(#[from] SolveError),
    #[error(transparent)]
    Timed(#[from] TimedError),
}

/// Clock interval of a one-clock region.
pub fn region_interval(r: &Region) -> Interval {
    let (lo, hi) = r.clock_interval(0);
    if lo == hi {
        Interval::point(qi(lo as i64))
    } else {
        Interval::open(qi(lo as i64), qi(hi as i64))
    }
}

/// Valuations of clock 0 satisfying `guard`, within `[0, bound]`.
pub fn guard_interval(guard: &Guard, bound: u32) -> Interval {
    let mut iv = Interval { lo: Q::zero(), lo_closed: true, hi: qi(bound as i64), hi_closed: true };
    for a in guard.atoms.iter().filter(|a| a.clock == 0) {
        let c = qi(a.constant as i64);
        let bound = match a.rel {
            Rel::Lt => Interval { hi: c, hi_closed: false, ..iv.clone() },
            Rel::Le => Interval { hi: c, hi_closed: true, ..iv.clone() },
            Rel::Eq => Interval::point(c),
            Rel::Ge => Interval { lo: c, lo_closed: true, ..iv.clone() },
            Rel::Gt => Interval { lo: c, lo_closed: false, ..iv.clone() },
        };
        iv = iv.intersect(&bound);
    }
    iv
}

/// One piecewise-affine function per region-automaton node, restricted to the
/// node's region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueMap {
    ra: RegionAutomaton,
    nodes: Vec<Pwa>,
}

impl ValueMap {
    pub fn ra(&self) -> &RegionAutomaton {
        &self.ra
    }

    pub fn node(&self, n: NodeId) -> &Pwa {
        &self.nodes[n]
    }

    pub fn nodes(&self) -> &[Pwa] {
        &self.nodes
    }

    /// All regions of one state, merged.
    pub fn state_function(&self, s: StateId) -> Pwa {
        Pwa::concat((0..self.ra.num_regions()).map(|r| &self.nodes[self.ra.node_id(s, r)]))
    }

    pub fn eval(&self, s: StateId, x: &Q) -> Option<Extended<Q>> {
        let n = self.ra.node_of(s, std::slice::from_ref(x)).ok()?;
        self.nodes[n].eval(x)
    }

    pub fn to_json(&self, game: &TimedGame) -> Value {
        let nodes: Vec<Value> = (0..self.ra.num_nodes())
            .map(|n| {
                let (s, r) = self.ra.node(n);
                json!({
                    "state": game.state(s).name,
                    "region": self.ra.region(r).render(game.clocks()),
                    "cells": self.nodes[n].to_json(),
                })
            })
            .collect();
        let mut states = Map::new();
        for s in 0..game.num_states() {
            states.insert(game.state(s).name.clone(), self.state_function(s).to_json());
        }
        json!({ "nodes": nodes, "states": states })
    }

    pub fn render(&self, game: &TimedGame) -> String {
        let mut out = String::new();
        for s in 0..game.num_states() {
            out.push_str(&format!("{}: {}\n", game.state(s).name, self.state_function(s).render()));
        }
        out
    }
}

fn maximizes(owner: Owner) -> bool {
    owner == Owner::Max
}

fn one_clock(game: &TimedGame) -> Result<(), TimedSolveError> {
    match game.num_clocks() {
        1 => Ok(()),
        k => Err(TimedSolveError::MultiClock(k)),
    }
}

/// One operator application at `node`, with the optimizing move of every cell.
fn node_step(
    game: &TimedGame,
    ra: &RegionAutomaton,
    vals: &[Option<Pwa>],
    node: NodeId,
) -> Result<Vec<(Cell, Choice)>, TimedSolveError> {
    let (s, r) = ra.node(node);
    let iv = region_interval(ra.region(r));
    let m = game.bound();
    let later = Interval { hi: qi(m as i64), hi_closed: true, ..iv.clone() };
    let rate = qi(game.state(s).rate);
    let missing = |n: NodeId| TimedSolveError::Inconsistent {
        nodes: vec![node, n],
        reason: "successor value not yet computed".to_string(),
    };
    let mut posts = Vec::new();
    let mut ids = Vec::new();
    for &t in game.out_transitions(s) {
        let tr = game.transition(t);
        let dom = guard_interval(&tr.guard, m).intersect(&later);
        if dom.is_empty() {
            continue;
        }
        let landing = if tr.resets_clock(0) {
            let n0 = ra.node_id(tr.dst, 0);
            let v = vals[n0].as_ref().ok_or_else(|| missing(n0))?.eval(&Q::zero()).ok_or_else(|| missing(n0))?;
            Pwa::constant(&dom, v)
        } else {
            let mut parts = Vec::new();
            for r2 in 0..ra.num_regions() {
                if region_interval(ra.region(r2)).intersect(&dom).is_empty() {
                    continue;
                }
                let n2 = ra.node_id(tr.dst, r2);
                parts.push(vals[n2].as_ref().ok_or_else(|| missing(n2))?.clone());
            }
            Pwa::concat(&parts).restrict(&dom)
        };
        let w = qi(tr.weight);
        posts.push(landing.map_finite(|f| f.shift(&rate, &w)));
        ids.push(t);
    }
    let env = envelope(&posts, maximizes(game.state(s).owner));
    let best = suffix_opt(&env, &iv, maximizes(game.state(s).owner)).ok_or(TimedSolveError::Degenerate(node))?;
    let neg_rate = -rate;
    Ok(best
        .into_iter()
        .map(|(c, ch)| {
            let value = c.value.clone().map(|f| f.shift(&neg_rate, &Q::zero()));
            (Cell { value, ..c }, Choice { arg: ids[ch.arg], reach: ch.reach })
        })
        .collect())
}

fn step_nodes(
    game: &TimedGame,
    ra: &RegionAutomaton,
    vals: &[Option<Pwa>],
    active: &[NodeId],
) -> Result<Vec<Pwa>, TimedSolveError> {
    active
        .iter()
        .map(|&n| Ok(Pwa::from_cells(node_step(game, ra, vals, n)?.into_iter().map(|(c, _)| c).collect())))
        .collect()
}

/// The operator applied on `active` nodes; every other node keeps its value.
pub fn timed_value_step(game: &TimedGame, values: &ValueMap, active: &[NodeId]) -> Result<ValueMap, TimedSolveError> {
    one_clock(game)?;
    let vals: Vec<Option<Pwa>> = values.nodes.iter().cloned().map(Some).collect();
    let next = step_nodes(game, &values.ra, &vals, active)?;
    let mut nodes = values.nodes.clone();
    for (&n, p) in active.iter().zip(next) {
        nodes[n] = p;
    }
    Ok(ValueMap { ra: values.ra.clone(), nodes })
}

/// Nodes from which Min cannot force reaching a target.
pub fn infinite_states(_game: &TimedGame, ra: &RegionAutomaton) -> Vec<NodeId> {
    let n = ra.num_nodes();
    let targets: Vec<bool> = (0..n).map(|v| ra.is_target(v)).collect();
    let attr = attractor_in(&ra.play_digraph(), ra.owners(), Owner::Min, &targets, &vec![true; n]);
    (0..n).filter(|&v| !attr.member[v]).collect()
}

/// Iterates of one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedSccTrace {
    pub component: Vec<NodeId>,
    pub sign: CycleSign,
    /// Nodes iterated, after settling `-inf` nodes.
    pub active: Vec<NodeId>,
    /// Values of `active` nodes, one vector per iterate.
    pub iterates: Vec<Vec<Pwa>>,
    pub stabilized_at: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedSolution {
    pub values: ValueMap,
    pub components: Vec<TimedSccTrace>,
}

/// Values of a divergent one-clock game. Non-divergent games are refused.
pub fn solve_timed(game: &TimedGame) -> Result<ValueMap, TimedSolveError> {
    one_clock(game)?;
    let ra = RegionAutomaton::build(game);
    let report = is_divergent_timed_with(game, &ra);
    if let Some(w) = report.witness {
        return Err(TimedSolveError::NotDivergent(Box::new(w)));
    }
    Ok(solve_timed_traced(game, ra)?.values)
}

/// [`solve_timed`] without the divergence check, keeping every iterate.
pub fn solve_timed_traced(game: &TimedGame, ra: RegionAutomaton) -> Result<TimedSolution, TimedSolveError> {
    one_clock(game)?;
    let n = ra.num_nodes();
    let mut vals: Vec<Option<Pwa>> = vec![None; n];
    let interval = |v: NodeId| region_interval(ra.region(ra.node(v).1));
    for (v, slot) in vals.iter_mut().enumerate() {
        if ra.is_target(v) {
            *slot = Some(Pwa::constant(&interval(v), Extended::Fin(Q::zero())));
        }
    }
    for v in infinite_states(game, &ra) {
        vals[v] = Some(Pwa::constant(&interval(v), Extended::PosInf));
    }
    let rg = ra.play_digraph();
    let scc = sccs(&rg);
    let mut traces = Vec::new();
    for (c, comp) in scc.components.iter().enumerate() {
        let active: Vec<NodeId> = comp.iter().copied().filter(|&v| vals[v].is_none()).collect();
        if active.is_empty() {
            continue;
        }
        let sign = if scc.is_trivial(&rg, c) {
            CycleSign::Positive
        } else {
            let cycle = simple_cycle_in(&ra, comp).expect("nontrivial component has a cycle");
            cycle_sign(game, &ra, &cycle).map_err(|e| TimedSolveError::Inconsistent {
                nodes: comp.clone(),
                reason: e.to_string(),
            })?
            .sign
        };
        if sign == CycleSign::Neither {
            return Err(TimedSolveError::Inconsistent {
                nodes: comp.clone(),
                reason: "component holds a cycle of weight in (-1, 1)".to_string(),
            });
        }
        let mut trace = solve_component(game, &ra, &mut vals, &active, sign)?;
        trace.component = comp.clone();
        traces.push(trace);
    }
    let nodes = vals.into_iter().map(|v| v.expect("every node solved")).collect();
    Ok(TimedSolution { values: ValueMap { ra, nodes }, components: traces })
}

#[derive(PartialEq, Eq)]
enum Kind {
    Finite,
    PosInf,
    NegInf,
}

fn classify(p: &Pwa) -> Option<Kind> {
    match p.infinite() {
        Some(Extended::PosInf) => Some(Kind::PosInf),
        Some(Extended::NegInf) => Some(Kind::NegInf),
        _ if p.all_finite() => Some(Kind::Finite),
        _ => None,
    }
}

fn solve_component(
    game: &TimedGame,
    ra: &RegionAutomaton,
    vals: &mut [Option<Pwa>],
    component: &[NodeId],
    sign: CycleSign,
) -> Result<TimedSccTrace, TimedSolveError> {
    let n = ra.num_nodes();
    let mut in_comp = vec![false; n];
    for &v in component {
        in_comp[v] = true;
    }
    let mut arena = Digraph::new(n);
    let mut restriction = in_comp.clone();
    let mut entry = vec![false; n];
    for (id, a) in ra.arcs().iter().enumerate() {
        if !in_comp[a.src] {
            continue;
        }
        arena.add_arc(a.src, a.dst, 0, id);
        if in_comp[a.dst] {
            continue;
        }
        let kind = vals[a.dst].as_ref().and_then(classify).ok_or_else(|| TimedSolveError::Inconsistent {
            nodes: vec![a.src, a.dst],
            reason: "boundary node mixes finite and infinite values".to_string(),
        })?;
        restriction[a.dst] = sign == CycleSign::Positive || kind != Kind::PosInf;
        entry[a.dst] = match sign {
            CycleSign::Negative => kind == Kind::Finite,
            _ => kind == Kind::NegInf,
        };
    }
    let player = if sign == CycleSign::Negative { Owner::Max } else { Owner::Min };
    let attr = attractor_in(&arena, ra.owners(), player, &entry, &restriction);
    let region_of_node = |v: NodeId| region_interval(ra.region(ra.node(v).1));
    let mut active = Vec::new();
    for &v in component {
        let settled = if sign == CycleSign::Negative { !attr.member[v] } else { attr.member[v] };
        if settled {
            vals[v] = Some(Pwa::constant(&region_of_node(v), Extended::NegInf));
        } else {
            active.push(v);
        }
    }
    let init = if sign == CycleSign::Negative { Extended::NegInf } else { Extended::PosInf };
    let mut current: Vec<Pwa> = active.iter().map(|&v| Pwa::constant(&region_of_node(v), init.clone())).collect();
    let mut iterates = vec![current.clone()];
    let bound = active.len();
    let mut stabilized_at = None;
    for k in 0..=bound {
        for (&v, p) in active.iter().zip(&current) {
            vals[v] = Some(p.clone());
        }
        let next = step_nodes(game, ra, vals, &active)?;
        let fixed = next == current;
        iterates.push(next.clone());
        current = next;
        if fixed {
            stabilized_at = Some(k);
            break;
        }
    }
    let Some(k) = stabilized_at else {
        return Err(TimedSolveError::Inconsistent {
            nodes: component.to_vec(),
            reason: format!("no fixed point after {bound} steps"),
        });
    };
    for (&v, p) in active.iter().zip(&current) {
        vals[v] = Some(p.clone());
    }
    Ok(TimedSccTrace { component: component.to_vec(), sign, active, iterates, stabilized_at: k })
}

/// Applies the operator `steps` times on `active` from `init`, every other node
/// keeping its value in `boundary`.
pub fn iterate_timed(
    game: &TimedGame,
    boundary: &ValueMap,
    active: &[NodeId],
    init: Extended<Q>,
    steps: usize,
) -> Result<Vec<ValueMap>, TimedSolveError> {
    one_clock(game)?;
    let mut x = boundary.clone();
    for &v in active {
        x.nodes[v] = Pwa::constant(&region_interval(x.ra.region(x.ra.node(v).1)), init.clone());
    }
    let mut out = vec![x];
    for _ in 0..steps {
        let next = timed_value_step(game, out.last().expect("nonempty"), active)?;
        out.push(next);
    }
    Ok(out)
}

impl ValueMap {
    /// Every node constant `v`, targets 0.
    pub fn constant(game: &TimedGame, v: Extended<Q>) -> ValueMap {
        let ra = RegionAutomaton::build(game);
        let nodes = (0..ra.num_nodes())
            .map(|n| {
                let iv = region_interval(ra.region(ra.node(n).1));
                Pwa::constant(&iv, if ra.is_target(n) { Extended::Fin(Q::zero()) } else { v.clone() })
            })
            .collect();
        ValueMap { ra, nodes }
    }

    pub fn negate(&self) -> ValueMap {
        ValueMap { ra: self.ra.clone(), nodes: self.nodes.iter().map(Pwa::negate).collect() }
    }
}

pub const GRID_MAX_VERTICES: usize = 5000;

/// Values of the game restricted to valuations and delays in `(1/N)·ℕ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridValues {
    pub granularity: u32,
    /// `(state, valuation × N)` to value.
    pub values: BTreeMap<(StateId, Vec<u32>), Extended<Q>>,
}

impl GridValues {
    pub fn get(&self, s: StateId, v: &[Q]) -> Option<Extended<Q>> {
        let n = qi(self.granularity as i64);
        let key: Option<Vec<u32>> = v
            .iter()
            .map(|x| {
                let y = x * &n;
                y.is_integer().then(|| y.to_integer().try_into().ok()).flatten()
            })
            .collect();
        self.values.get(&(s, key?)).cloned()
    }

    pub fn to_json(&self, game: &TimedGame) -> Value {
        let n = self.granularity as i64;
        let points: Vec<Value> = self
            .values
            .iter()
            .map(|((s, p), v)| {
                let val: Vec<String> = p.iter().map(|&k| fmt_q(&q(k as i64, n))).collect();
                json!({ "state": game.state(*s).name, "valuation": val, "value": fmt_ext(v) })
            })
            .collect();
        json!({ "granularity": self.granularity, "values": points })
    }
}

fn grid_points(k: usize, top: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out.into_iter().flat_map(|p| (0..=top).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}

/// Solves the finite game of grid configurations with the untimed solver.
pub fn solve_timed_grid(game: &TimedGame, granularity: u32) -> Result<GridValues, TimedSolveError> {
    if granularity == 0 {
        return Err(TimedSolveError::BadGranularity);
    }
    let top = granularity * game.bound();
    let points = grid_points(game.num_clocks(), top);
    let vertices = game.num_states() * points.len() + 1;
    if vertices > GRID_MAX_VERTICES {
        return Err(TimedSolveError::GuardViolated { vertices, limit: GRID_MAX_VERTICES });
    }
    let index: BTreeMap<&Vec<u32>, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let id = |s: StateId, p: &Vec<u32>| s * points.len() + index[p];
    let sink = game.num_states() * points.len();
    let nq = qi(granularity as i64);
    let mut b = WeightedGame::builder();
    for s in 0..game.num_states() {
        for p in &points {
            let coords: Vec<String> = p.iter().map(u32::to_string).collect();
            b.vertex(&format!("{}_{}", game.state(s).name, coords.join("_")), game.state(s).owner)
                .map_err(|e| TimedSolveError::Inconsistent { nodes: vec![], reason: e.to_string() })?;
        }
    }
    b.vertex("sink", Owner::Max).map_err(|e| TimedSolveError::Inconsistent { nodes: vec![], reason: e.to_string() })?;
    b.edge_ids(sink, Some("loop"), sink, 1);
    for s in 0..game.num_states() {
        let st = game.state(s);
        for p in &points {
            let v = id(s, p);
            if st.target {
                b.target(&format!("{}_{}", st.name, p.iter().map(u32::to_string).collect::<Vec<_>>().join("_")))
                    .map_err(|e| TimedSolveError::Inconsistent { nodes: vec![], reason: e.to_string() })?;
                b.edge_ids(v, Some("stay"), v, 0);
                continue;
            }
            let room = top - p.iter().copied().max().unwrap_or(0);
            let mut any = false;
            for d in 0..=room {
                let moved: Vec<u32> = p.iter().map(|x| x + d).collect();
                let val: Vec<Q> = moved.iter().map(|&x| qi(x as i64) / &nq).collect();
                for (j, &t) in game.out_transitions(s).iter().enumerate() {
                    let tr = game.transition(t);
                    if !tr.guard.satisfied_by(&val) {
                        continue;
                    }
                    let landed: Vec<u32> =
                        moved.iter().enumerate().map(|(c, &x)| if tr.resets_clock(c) { 0 } else { x }).collect();
                    let w = st.rate * d as i64 + tr.weight * granularity as i64;
                    b.edge_ids(v, Some(&format!("d{d}t{j}")), id(tr.dst, &landed), w);
                    any = true;
                }
            }
            if !any {
                b.edge_ids(v, Some("stuck"), sink, 0);
            }
        }
    }
    let g = b.build().map_err(|e| TimedSolveError::Inconsistent { nodes: vec![], reason: e.to_string() })?;
    let sol = solve(&g)?;
    let mut values = BTreeMap::new();
    for s in 0..game.num_states() {
        for p in &points {
            let v = sol[id(s, p)].map(|x| qi(x) / &nq);
            values.insert((s, p.clone()), v);
        }
    }
    Ok(GridValues { granularity, values })
}

/// Wait until the clock reaches `until` (immediately if already past), then fire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedMove {
    pub trans: TransId,
    pub until: Option<Q>,
}

impl TimedMove {
    pub fn delay(&self, x: &Q) -> Q {
        match &self.until {
            Some(u) if u > x => u - x,
            _ => Q::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyCell {
    pub cell: Interval,
    pub mv: TimedMove,
}

/// Moves of one player, constant over each cell of every node it owns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedStrategy {
    pub player: Owner,
    pub epsilon: Q,
    /// Distance kept from open endpoints.
    pub margin: Q,
    /// `None` for nodes of other players, targets and infinite values.
    pub nodes: Vec<Option<Vec<StrategyCell>>>,
}

impl TimedStrategy {
    pub fn choose(&self, game: &TimedGame, ra: &RegionAutomaton, config: &Config) -> Result<(Q, TransId), TimedSolveError> {
        let n = ra.node_of(config.state, &config.valuation)?;
        let x = &config.valuation[0];
        let infinite = || TimedSolveError::InfiniteValue {
            state: game.state(config.state).name.clone(),
            valuation: fmt_q(x),
        };
        let cells = self.nodes[n].as_ref().ok_or_else(infinite)?;
        let c = cells.iter().find(|c| c.cell.contains(x)).ok_or_else(infinite)?;
        Ok((c.mv.delay(x), c.mv.trans))
    }

    pub fn to_json(&self, game: &TimedGame, ra: &RegionAutomaton) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(n, cells)| {
                let cells = cells.as_ref()?;
                let (s, r) = ra.node(n);
                let moves: Vec<Value> = cells
                    .iter()
                    .map(|c| {
                        json!({
                            "lo": fmt_q(&c.cell.lo),
                            "hi": fmt_q(&c.cell.hi),
                            "lo_closed": c.cell.lo_closed,
                            "hi_closed": c.cell.hi_closed,
                            "transition": c.mv.trans,
                            "until": c.mv.until.as_ref().map(fmt_q),
                        })
                    })
                    .collect();
                Some(json!({
                    "state": game.state(s).name,
                    "region": ra.region(r).render(game.clocks()),
                    "moves": moves,
                }))
            })
            .collect();
        json!({
            "player": self.player.keyword(),
            "epsilon": fmt_q(&self.epsilon),
            "margin": fmt_q(&self.margin),
            "nodes": nodes,
        })
    }
}

/// Moves realizing the operator's optimum from `values`, shifted inward by a
/// margin derived from `epsilon` where the optimum is only approached.
pub fn extract_timed_strategy(
    game: &TimedGame,
    values: &ValueMap,
    player: Owner,
    epsilon: &Q,
) -> Result<TimedStrategy, TimedSolveError> {
    one_clock(game)?;
    if !epsilon.is_positive() {
        return Err(TimedSolveError::BadEpsilon);
    }
    let ra = &values.ra;
    let slope = values.nodes.iter().map(Pwa::max_abs_slope).max().unwrap_or_else(Q::zero);
    let rate = qi(game.states().iter().map(|s| s.rate.abs()).max().unwrap_or(0));
    let margin = (epsilon / (qi(ra.num_nodes() as i64) * (rate + slope + qi(1)))).min(q(1, 4));
    let vals: Vec<Option<Pwa>> = values.nodes.iter().cloned().map(Some).collect();
    let mut nodes = vec![None; ra.num_nodes()];
    for (n, slot) in nodes.iter_mut().enumerate() {
        if ra.is_target(n) || ra.owner(n) != player || !values.nodes[n].all_finite() {
            continue;
        }
        let cells = node_step(game, ra, &vals, n)?
            .into_iter()
            .map(|(c, ch)| {
                let until = match ch.reach {
                    Reach::Here => None,
                    Reach::At(y) => Some(y),
                    Reach::Near { y, inside } => {
                        let gap = (&inside - &y).abs().min(margin.clone());
                        Some(if inside > y { y + gap } else { y - gap })
                    }
                };
                StrategyCell { cell: c.interval(), mv: TimedMove { trans: ch.arg, until } }
            })
            .collect();
        *slot = Some(cells);
    }
    Ok(TimedStrategy { player, epsilon: epsilon.clone(), margin, nodes })
}

/// A play and its weight, `None` when no target was reached within the step limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyPlay {
    pub play: TimedPlay,
    pub weight: Option<Q>,
}

/// Plays `min` against `max` (or against random moves when `max` is `None`).
pub fn play_strategies<R: Rng>(
    game: &TimedGame,
    ra: &RegionAutomaton,
    min: Option<&TimedStrategy>,
    max: Option<&TimedStrategy>,
    start: Config,
    max_steps: usize,
    rng: &mut R,
) -> Result<StrategyPlay, TimedSolveError> {
    let mut cur = start.clone();
    let mut steps = Vec::new();
    let mut total = Q::zero();
    for _ in 0..max_steps {
        if game.state(cur.state).target {
            return Ok(StrategyPlay { play: TimedPlay { start, steps }, weight: Some(total) });
        }
        let strat = match game.state(cur.state).owner {
            Owner::Min => min,
            Owner::Max => max,
        };
        let (d, t) = match strat {
            Some(s) => s.choose(game, ra, &cur)?,
            None => random_move(game, ra, &cur, rng).ok_or_else(|| TimedSolveError::Degenerate(ra.node_of(cur.state, &cur.valuation).unwrap_or(0)))?,
        };
        let (next, w) = crate::timed::timed_step(game, &cur, &d, t)?;
        total += w;
        steps.push((d, t));
        cur = next;
    }
    let weight = game.state(cur.state).target.then_some(total);
    Ok(StrategyPlay { play: TimedPlay { start, steps }, weight })
}

/// A uniformly chosen region arc, then a delay inside its landing region.
pub fn random_move<R: Rng>(game: &TimedGame, ra: &RegionAutomaton, config: &Config, rng: &mut R) -> Option<(Q, TransId)> {
    let n = ra.node_of(config.state, &config.valuation).ok()?;
    let arcs = ra.out_arcs(n);
    if arcs.is_empty() {
        return None;
    }
    let a = ra.arc(arcs[rng.gen_range(0..arcs.len())]);
    let r = a.via[rng.gen_range(0..a.via.len())];
    let iv = delay_interval(&config.valuation, ra.region(r));
    let d = if iv.lo == iv.hi {
        iv.lo.clone()
    } else {
        &iv.lo + q(rng.gen_range(1..64), 64) * (&iv.hi - &iv.lo)
    };
    let _ = game;
    Some((d, a.trans))
}

/// Each point cell, and evenly spaced points inside every interval cell.
pub fn sample_points(p: &Pwa, per_cell: i64) -> Vec<Q> {
    let mut out = Vec::new();
    for c in p.cells() {
        if c.is_point() {
            out.push(c.lo.clone());
            continue;
        }
        for k in 0..=per_cell {
            let x = &c.lo + (&c.hi - &c.lo) * q(k, per_cell);
            if c.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}
