//! SCC-ordered value iteration for divergent weighted games, the brute-force
//! oracle, and descent plays read off iteration traces.

use std::ops::{Index, IndexMut};

use serde::Serialize;
use thiserror::Error;

use crate::ext::{ArithError, ExtValue, Extended};
use crate::game::{Owner, Play, VertexId, WeightedGame};
use crate::graph_analysis::{
    attractor_in, full_graph, is_divergent_untimed, play_graph, sccs, sign_of_component,
    DivergenceWitness, GraphError, Sign,
};

/// One extended value per vertex of a game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValueVector(pub Vec<ExtValue>);

impl ValueVector {
    pub fn constant(n: usize, v: ExtValue) -> ValueVector {
        ValueVector(vec![v; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[ExtValue] {
        &self.0
    }

    /// `{"name": value, ...}` in vertex order.
    pub fn to_json(&self, game: &WeightedGame) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        for v in game.vertices() {
            m.insert(game.name(v).to_string(), serde_json::to_value(self.0[v]).expect("serializable"));
        }
        serde_json::Value::Object(m)
    }

    pub fn restricted(&self, domain: &[VertexId]) -> Vec<ExtValue> {
        domain.iter().map(|&v| self.0[v]).collect()
    }
}

impl Index<VertexId> for ValueVector {
    type Output = ExtValue;
    fn index(&self, v: VertexId) -> &ExtValue {
        &self.0[v]
    }
}

impl IndexMut<VertexId> for ValueVector {
    fn index_mut(&mut self, v: VertexId) -> &mut ExtValue {
        &mut self.0[v]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("game is not divergent (witness vertex {})", .0.vertex)]
    NotDivergent(Box<DivergenceWitness>),
    #[error("inconsistency on component {component:?}: {reason}")]
    Inconsistent { component: Vec<VertexId>, reason: String },
    #[error("oracle guard violated: {vertices} vertices, max weight {max_weight} (limits 10 and 16)")]
    GuardViolated { vertices: usize, max_weight: i64 },
    #[error("vertex {0} has an infinite value")]
    InfiniteValue(VertexId),
    #[error("no descent between the two iterates")]
    NoDescent,
    #[error("invalid trace query: {0}")]
    BadQuery(String),
    #[error("strategy picks an edge that does not leave vertex {0}")]
    InvalidStrategy(VertexId),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Iterates `x^0, x^1, ...` of the operator on one component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IterationTrace {
    pub domain: Vec<VertexId>,
    /// Values outside `domain`, frozen during the iteration.
    pub boundary: ValueVector,
    pub iterates: Vec<ValueVector>,
}

impl IterationTrace {
    fn value(&self, step: usize, in_domain: &[bool], v: VertexId) -> ExtValue {
        if in_domain[v] {
            self.iterates[step][v]
        } else {
            self.boundary[v]
        }
    }
}

fn mask(n: usize, set: &[VertexId]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

fn phi_at(
    game: &WeightedGame,
    x: &ValueVector,
    in_domain: &[bool],
    boundary: &ValueVector,
    v: VertexId,
) -> Result<ExtValue, SolveError> {
    let mut best: Option<ExtValue> = None;
    for &e in game.out_edges(v) {
        let edge = game.edge(e);
        let base = if in_domain[edge.dst] { x[edge.dst] } else { boundary[edge.dst] };
        let c = base.plus_weight(edge.weight)?;
        best = Some(match (best, game.owner(v)) {
            (None, _) => c,
            (Some(b), Owner::Min) => b.min(c),
            (Some(b), Owner::Max) => b.max(c),
        });
    }
    Ok(best.expect("games are deadlock-free"))
}

/// One application of the operator on `domain`; edges leaving `domain` read `boundary`.
pub fn value_iteration_step(
    game: &WeightedGame,
    x: &ValueVector,
    domain: &[VertexId],
    boundary: &ValueVector,
) -> Result<ValueVector, SolveError> {
    let in_domain = mask(game.num_vertices(), domain);
    step_masked(game, x, domain, &in_domain, boundary)
}

fn step_masked(
    game: &WeightedGame,
    x: &ValueVector,
    domain: &[VertexId],
    in_domain: &[bool],
    boundary: &ValueVector,
) -> Result<ValueVector, SolveError> {
    let mut y = x.clone();
    for &v in domain {
        y[v] = phi_at(game, x, in_domain, boundary, v)?;
    }
    Ok(y)
}

/// `steps` applications of the operator on `domain` starting from `init` there.
pub fn iterate(
    game: &WeightedGame,
    domain: &[VertexId],
    init: ExtValue,
    boundary: &ValueVector,
    steps: usize,
) -> Result<IterationTrace, SolveError> {
    let in_domain = mask(game.num_vertices(), domain);
    let mut x = boundary.clone();
    for &v in domain {
        x[v] = init;
    }
    let mut iterates = vec![x];
    for _ in 0..steps {
        let next = step_masked(game, iterates.last().expect("nonempty"), domain, &in_domain, boundary)?;
        iterates.push(next);
    }
    Ok(IterationTrace { domain: domain.to_vec(), boundary: boundary.clone(), iterates })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SccSolution {
    /// The input boundary with the component's values filled in.
    pub values: ValueVector,
    /// Iteration on the vertices that were not settled to `-inf` beforehand.
    pub trace: IterationTrace,
    /// First `k` with `x^k = x^{k+1}`.
    pub stabilized_at: usize,
}

/// Restricts the arena to edges leaving `component`.
fn component_arena(game: &WeightedGame, component: &[VertexId]) -> crate::graph_analysis::Digraph {
    let in_comp = mask(game.num_vertices(), component);
    let mut g = crate::graph_analysis::Digraph::new(game.num_vertices());
    for (id, e) in game.edges().iter().enumerate() {
        if in_comp[e.src] {
            g.add_arc(e.src, e.dst, e.weight, id);
        }
    }
    g
}

/// Values of one SCC given the values of everything it can reach.
pub fn solve_scc(
    game: &WeightedGame,
    component: &[VertexId],
    sign: Sign,
    boundary: &ValueVector,
) -> Result<SccSolution, SolveError> {
    let n = game.num_vertices();
    let in_comp = mask(n, component);
    let arena = component_arena(game, component);
    let mut frozen = boundary.clone();
    let mut restriction = in_comp.clone();
    let mut entry = vec![false; n];
    for a in arena.arcs() {
        if !in_comp[a.dst] {
            let b = boundary[a.dst];
            // Min never moves to a +inf exit from a vertex of finite value.
            restriction[a.dst] = sign == Sign::Positive || b != Extended::PosInf;
            entry[a.dst] = match sign {
                Sign::Positive => b == Extended::NegInf,
                Sign::Negative => b.is_finite(),
            };
        }
    }
    let init = match sign {
        Sign::Positive => Extended::PosInf,
        Sign::Negative => Extended::NegInf,
    };
    let player = match sign {
        Sign::Positive => Owner::Min,
        Sign::Negative => Owner::Max,
    };
    let attr = attractor_in(&arena, game.owners(), player, &entry, &restriction);
    let mut active = Vec::new();
    for &v in component {
        let settled = match sign {
            // Min can force a -inf boundary vertex.
            Sign::Positive => attr.member[v],
            // Max cannot force a finite exit, so Min keeps a negative cycle.
            Sign::Negative => !attr.member[v],
        };
        if settled {
            frozen[v] = Extended::NegInf;
        } else {
            active.push(v);
        }
    }
    let in_active = mask(n, &active);
    let mut x = frozen.clone();
    for &v in &active {
        x[v] = init;
    }
    let mut iterates = vec![x];
    let bound = active.len();
    let mut stabilized_at = None;
    for k in 0..=bound {
        let next = step_masked(game, &iterates[k], &active, &in_active, &frozen)?;
        let fixed = next == iterates[k];
        iterates.push(next);
        if fixed {
            stabilized_at = Some(k);
            break;
        }
    }
    let Some(k) = stabilized_at else {
        return Err(SolveError::Inconsistent {
            component: component.to_vec(),
            reason: format!("no fixed point after {bound} steps"),
        });
    };
    let values = iterates[k].clone();
    Ok(SccSolution {
        values,
        trace: IterationTrace { domain: active, boundary: frozen, iterates },
        stabilized_at: k,
    })
}

/// Values of a divergent game. Non-divergent games are refused.
pub fn solve(game: &WeightedGame) -> Result<ValueVector, SolveError> {
    let report = is_divergent_untimed(game);
    if let Some(w) = report.witness {
        return Err(SolveError::NotDivergent(Box::new(w)));
    }
    solve_unchecked(game)
}

/// [`solve`] without the divergence check; on non-divergent games the result is
/// either an inconsistency error or meaningless.
pub fn solve_unchecked(game: &WeightedGame) -> Result<ValueVector, SolveError> {
    let n = game.num_vertices();
    let targets: Vec<bool> = game.vertices().map(|v| game.is_target(v)).collect();
    let attr = attractor_in(&full_graph(game), game.owners(), Owner::Min, &targets, &vec![true; n]);
    let mut values = ValueVector::constant(n, Extended::PosInf);
    for v in game.targets() {
        values[v] = Extended::Fin(0);
    }
    let g = play_graph(game);
    let scc = sccs(&g);
    for comp in &scc.components {
        let active: Vec<VertexId> = comp
            .iter()
            .copied()
            .filter(|&v| !game.is_target(v) && attr.member[v])
            .collect();
        if active.is_empty() {
            continue;
        }
        let sign = sign_of_component(&g, comp)?;
        values = solve_scc(game, &active, sign, &values)?.values;
    }
    Ok(values)
}

pub const ORACLE_MAX_VERTICES: usize = 10;
pub const ORACLE_MAX_WEIGHT: i64 = 16;

/// Pseudo-polynomial global value iteration; exact on divergent games within the guard.
pub fn brute_force_values(game: &WeightedGame) -> Result<ValueVector, SolveError> {
    let n = game.num_vertices();
    let w = game.max_abs_weight();
    if n > ORACLE_MAX_VERTICES || w > ORACLE_MAX_WEIGHT {
        return Err(SolveError::GuardViolated { vertices: n, max_weight: w });
    }
    let steps = n * (2 * n * w as usize + 1);
    let mut boundary = ValueVector::constant(n, Extended::PosInf);
    for v in game.targets() {
        boundary[v] = Extended::Fin(0);
    }
    let domain: Vec<VertexId> = game.vertices().filter(|&v| !game.is_target(v)).collect();
    let in_domain = mask(n, &domain);
    let mut x = boundary.clone();
    for _ in 0..steps {
        x = step_masked(game, &x, &domain, &in_domain, &boundary)?;
    }
    let floor = -((n as i64 - 1) * w);
    for v in &mut x.0 {
        if let Extended::Fin(k) = *v {
            if k < floor {
                *v = Extended::NegInf;
            }
        }
    }
    Ok(x)
}

/// A play whose weight telescopes between two iterates of a trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DescentPlay {
    pub start: VertexId,
    pub edges: Vec<usize>,
    /// Steps not taken because the play reached a frozen vertex early.
    pub padding: usize,
    pub weight: i64,
}

impl DescentPlay {
    pub fn play(&self) -> Play {
        Play { start: self.start, steps: self.edges.clone() }
    }
}

/// Follows optimizing edges from `x^j_v` down to `x^i`. The resulting weight is
/// `x^j_v - x^i_{v'}` with `v'` the endpoint; frozen vertices end the play early.
pub fn extract_descent_play(
    game: &WeightedGame,
    trace: &IterationTrace,
    v: VertexId,
    i: usize,
    j: usize,
) -> Result<DescentPlay, SolveError> {
    if i >= j || j >= trace.iterates.len() {
        return Err(SolveError::BadQuery(format!("need i < j < {}", trace.iterates.len())));
    }
    let in_domain = mask(game.num_vertices(), &trace.domain);
    if !in_domain[v] {
        return Err(SolveError::BadQuery(format!("vertex {v} is not in the trace domain")));
    }
    if trace.iterates[i].restricted(&trace.domain) == trace.iterates[j].restricted(&trace.domain) {
        return Err(SolveError::NoDescent);
    }
    let Extended::Fin(top) = trace.iterates[j][v] else {
        return Err(SolveError::InfiniteValue(v));
    };
    let mut cur = v;
    let mut step = j;
    let mut edges = Vec::new();
    while step > i && in_domain[cur] {
        let goal = trace.iterates[step][cur];
        let e = game
            .out_edges(cur)
            .iter()
            .copied()
            .find(|&e| {
                let edge = game.edge(e);
                trace.value(step - 1, &in_domain, edge.dst).plus_weight(edge.weight) == Ok(goal)
            })
            .ok_or_else(|| SolveError::BadQuery(format!("step {step} is not an operator image")))?;
        edges.push(e);
        cur = game.edge(e).dst;
        step -= 1;
    }
    let Extended::Fin(bottom) = trace.value(step, &in_domain, cur) else {
        return Err(SolveError::InfiniteValue(cur));
    };
    Ok(DescentPlay { start: v, edges, padding: step - i, weight: top - bottom })
}
