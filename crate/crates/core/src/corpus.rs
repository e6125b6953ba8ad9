//! Seeded random generators for test corpora.
//!
//! `DIVGAME_SEED` overrides the base seed used by [`base_seed`].

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::game::{Owner, WeightedGame};
use crate::corner::is_divergent_timed;
use crate::graph_analysis::is_divergent_untimed;
use crate::timed::{Atom, Guard, Rel, TimedError, TimedGame, TimedState, TimedTransition};

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `DIVGAME_SEED` if set and numeric, else `default`.
pub fn base_seed(default: u64) -> u64 {
    std::env::var("DIVGAME_SEED")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

/// A random valid game with 1..=`max_vertices` vertices and weights in
/// `-max_weight..=max_weight`. About half of the games have a target, which then
/// carries its zero self-loop.
pub fn random_game(rng: &mut CorpusRng, max_vertices: usize, max_weight: i64) -> WeightedGame {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let mut b = WeightedGame::builder();
    let target = if rng.gen_bool(0.6) { Some(rng.gen_range(0..n)) } else { None };
    for v in 0..n {
        let owner = if Some(v) == target || rng.gen_bool(0.5) { Owner::Min } else { Owner::Max };
        b.vertex(&format!("v{v}"), owner).expect("fresh name");
    }
    if let Some(t) = target {
        b.target(&format!("v{t}")).expect("declared");
    }
    for v in 0..n {
        if Some(v) == target {
            b.edge_ids(v, None, v, 0);
            continue;
        }
        let k = rng.gen_range(1..=3.min(n + 1));
        for _ in 0..k {
            let d = rng.gen_range(0..n);
            let w = rng.gen_range(-max_weight..=max_weight);
            b.edge_ids(v, None, d, w);
        }
    }
    b.build().expect("generated games are valid")
}

/// Rejection-samples [`random_game`] until the game is divergent.
pub fn random_divergent_game(rng: &mut CorpusRng, max_vertices: usize, max_weight: i64) -> WeightedGame {
    loop {
        let g = sparse_game(rng, max_vertices, max_weight);
        if is_divergent_untimed(&g).divergent {
            return g;
        }
    }
}

/// Like [`random_game`] but every component is biased towards one sign, which makes
/// divergent samples frequent.
fn sparse_game(rng: &mut CorpusRng, max_vertices: usize, max_weight: i64) -> WeightedGame {
    let n = rng.gen_range(1..=max_vertices.max(1));
    let mut b = WeightedGame::builder();
    let target = if rng.gen_bool(0.8) { Some(n - 1) } else { None };
    for v in 0..n {
        let owner = if Some(v) == target || rng.gen_bool(0.5) { Owner::Min } else { Owner::Max };
        b.vertex(&format!("v{v}"), owner).expect("fresh name");
    }
    if let Some(t) = target {
        b.target(&format!("v{t}")).expect("declared");
    }
    let sign: i64 = *[-1, 1].choose(rng).expect("nonempty");
    for v in 0..n {
        if Some(v) == target {
            b.edge_ids(v, None, v, 0);
            continue;
        }
        let k = rng.gen_range(1..=2);
        for _ in 0..k {
            let d = rng.gen_range(0..n);
            let w = if rng.gen_bool(0.8) {
                sign * rng.gen_range(0..=max_weight)
            } else {
                rng.gen_range(-max_weight..=max_weight)
            };
            b.edge_ids(v, None, d, w);
        }
    }
    b.build().expect("generated games are valid")
}

/// A random valid one-clock timed game with 1..=`max_states` states, clock bound
/// 1..=`max_bound`, and rates and weights in `-max_weight..=max_weight`.
pub fn random_timed_game(rng: &mut CorpusRng, max_states: usize, max_bound: u32, max_weight: i64) -> TimedGame {
    loop {
        if let Ok(g) = timed_candidate(rng, max_states, max_bound, max_weight, None) {
            return g;
        }
    }
}

/// Rejection-samples sign-biased timed games until one is divergent.
pub fn random_divergent_timed_game(rng: &mut CorpusRng, max_states: usize, max_bound: u32, max_weight: i64) -> TimedGame {
    loop {
        let sign: i64 = *[-1, 1].choose(rng).expect("nonempty");
        if let Ok(g) = timed_candidate(rng, max_states, max_bound, max_weight, Some(sign)) {
            if is_divergent_timed(&g).divergent {
                return g;
            }
        }
    }
}

fn biased(rng: &mut CorpusRng, max: i64, sign: Option<i64>) -> i64 {
    match sign {
        Some(s) if rng.gen_bool(0.8) => s * rng.gen_range(0..=max),
        _ => rng.gen_range(-max..=max),
    }
}

fn atom(rel: Rel, constant: u32) -> Atom {
    Atom { clock: 0, rel, constant }
}

fn timed_candidate(
    rng: &mut CorpusRng,
    max_states: usize,
    max_bound: u32,
    max_weight: i64,
    sign: Option<i64>,
) -> Result<TimedGame, TimedError> {
    let n = if rng.gen_bool(0.7) { max_states.max(1) } else { rng.gen_range(1..=max_states.max(1)) };
    let m = rng.gen_range(1..=max_bound.max(1));
    let target = if n > 1 && rng.gen_bool(0.85) { Some(n - 1) } else { None };
    let states: Vec<TimedState> = (0..n)
        .map(|s| TimedState {
            name: format!("s{s}"),
            owner: if Some(s) == target || rng.gen_bool(0.5) { Owner::Min } else { Owner::Max },
            rate: if Some(s) == target { 0 } else { biased(rng, max_weight, sign) },
            target: Some(s) == target,
        })
        .collect();
    let mut transitions = Vec::new();
    for s in 0..n {
        if Some(s) == target {
            transitions.push(TimedTransition {
                src: s,
                dst: s,
                guard: Guard { atoms: vec![atom(Rel::Le, m)] },
                resets: vec![0],
                weight: 0,
            });
            continue;
        }
        let k = rng.gen_range(1..=3);
        for i in 0..k {
            let guard = if i == 0 && rng.gen_bool(0.5) {
                Guard { atoms: vec![atom(Rel::Le, m)] }
            } else {
                let lo = rng.gen_range(0..=m);
                let hi = rng.gen_range(lo..=m);
                let strict = lo < hi && rng.gen_bool(0.3);
                let mut atoms = Vec::new();
                if lo > 0 {
                    atoms.push(atom(if strict { Rel::Gt } else { Rel::Ge }, lo));
                }
                atoms.push(atom(if lo < hi && rng.gen_bool(0.3) { Rel::Lt } else { Rel::Le }, hi));
                Guard { atoms }
            };
            let dst = match target {
                Some(t) if i == 0 && rng.gen_bool(0.5) => t,
                _ => rng.gen_range(0..n),
            };
            transitions.push(TimedTransition {
                src: s,
                dst,
                guard,
                resets: if rng.gen_bool(0.5) { vec![0] } else { vec![] },
                weight: biased(rng, max_weight, sign),
            });
        }
    }
    TimedGame::new(vec!["x".to_string()], Some(m), states, transitions)
}
