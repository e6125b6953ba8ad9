//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use divgame::corner::{build_fog, cycle_sign, is_divergent_timed, realize_corner_play, simple_cycle_in, CycleSign};
use divgame::corpus;
use divgame::graph_analysis::{attractor, play_graph, sccs, sign_of_component, Sign};
use divgame::strategy::{extract_max_strategy, extract_min_strategy, strategy_value};
use divgame::testdata::{FIG1, LOOP_N, LOOP_P, WAIT1};
use divgame::timed::{fmt_q, q, qi, Interval, RegionAutomaton, RegionPath, TimedGame, Q};
use divgame::timed_solver::{solve_timed, solve_timed_grid};
use divgame::pwa::{Affine, Cell, Pwa};
use divgame::untimed::{brute_force_values, iterate, solve, solve_scc};
use divgame::{ExtValue, Extended, Owner, WeightedGame};
use num::{Signed, Zero};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ids(g: &WeightedGame, names: &[&str]) -> Vec<usize> {
    names.iter().map(|n| g.vertex(n).unwrap()).collect()
}

fn fig1() -> WeightedGame {
    WeightedGame::parse(FIG1).unwrap()
}

fn c1() -> Outcome {
    let g = fig1();
    let t = Instant::now();
    let v = solve(&g).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    use Extended::*;
    let expected = [NegInf, Fin(-9), Fin(-9), PosInf, Fin(1), Fin(1), PosInf, Fin(0), Fin(2), Fin(0)];
    let order = ids(&g, &["v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8", "v9", "vt"]);
    let got: Vec<ExtValue> = order.iter().map(|&i| v[i]).collect();
    check(got == expected, format!("values {got:?}"))?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("fig1 values match in {elapsed:?}"))
}

fn c2() -> Outcome {
    let g = fig1();
    let values = solve(&g).map_err(|e| e.to_string())?;
    let dom = ids(&g, &["v2", "v3"]);
    let trace = iterate(&g, &dom, Extended::NegInf, &values, 2).map_err(|e| e.to_string())?;
    let at = |k: usize| (trace.iterates[k][dom[0]], trace.iterates[k][dom[1]]);
    check(at(1) == (Extended::Fin(-9), Extended::NegInf), format!("x^1 = {:?}", at(1)))?;
    check(at(2) == (Extended::Fin(-9), Extended::Fin(-9)), format!("x^2 = {:?}", at(2)))?;
    check(values[g.vertex("v5").unwrap()] == Extended::Fin(1), "boundary v5 is not 1")?;
    Ok("x^1 = (-9, -inf), x^2 = (-9, -9)".to_string())
}

fn c3() -> Outcome {
    let g = fig1();
    let all: Vec<usize> = g.vertices().collect();
    let targets: Vec<usize> = g.targets().collect();
    let attr = attractor(&g, Owner::Min, &targets, &all);
    let complement: Vec<usize> = all.iter().copied().filter(|v| !attr.contains(v)).collect();
    check(complement == ids(&g, &["v4", "v7"]), format!("Min complement {complement:?}"))?;
    let within = ids(&g, &["v1", "v2", "v3", "v5"]);
    let mut max = attractor(&g, Owner::Max, &ids(&g, &["v5"]), &within);
    max.sort_unstable();
    let mut expected = ids(&g, &["v5", "v2", "v3"]);
    expected.sort_unstable();
    check(max == expected, format!("Max attractor {max:?}"))?;
    Ok("complement {v4, v7}; Max attractor {v5, v2, v3}".to_string())
}

fn c4() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(4));
    let t = Instant::now();
    let (mut yes, mut no) = (0, 0);
    for i in 0..500 {
        let g = corpus::random_game(&mut rng, 7, 4);
        let got = divgame::graph_analysis::is_divergent_untimed(&g).divergent;
        let want = common::oracle_divergent_untimed(&g);
        check(got == want, format!("game {i} disagrees (library {got}):\n{}", g.to_wg()))?;
        if got {
            yes += 1
        } else {
            no += 1
        }
    }
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("500 games ({yes} divergent, {no} not) in {elapsed:?}"))
}

fn c5() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(5));
    let mut checked = 0;
    let mut games = 0;
    while checked < 200 {
        let g = corpus::random_divergent_game(&mut rng, 7, 4);
        games += 1;
        let pg = play_graph(&g);
        let scc = sccs(&pg);
        let values = solve(&g).map_err(|e| e.to_string())?;
        // Re-solve component by component, in the solver's order, from the final
        // values of everything downstream.
        for (c, comp) in scc.components.iter().enumerate() {
            let active: Vec<usize> =
                comp.iter().copied().filter(|&v| !g.is_target(v) && values[v] != Extended::PosInf).collect();
            if scc.is_trivial(&pg, c) || active.is_empty() {
                continue;
            }
            let sign = sign_of_component(&pg, comp).map_err(|e| e.to_string())?;
            let sol = solve_scc(&g, &active, sign, &values).map_err(|e| e.to_string())?;
            check(sol.values == values, format!("component re-solve differs:\n{}", g.to_wg()))?;
            let k = sol.stabilized_at;
            check(k <= active.len(), format!("stabilized after {k} > {} steps:\n{}", active.len(), g.to_wg()))?;
            let tr = &sol.trace;
            let init = match sign {
                Sign::Positive => Extended::PosInf,
                Sign::Negative => Extended::NegInf,
            };
            let ext = iterate(&g, &tr.domain, init, &tr.boundary, k + 10).map_err(|e| e.to_string())?;
            check(
                ext.iterates[k..].iter().all(|x| *x == ext.iterates[k]),
                format!("trace moved after stabilizing:\n{}", g.to_wg()),
            )?;
            checked += 1;
        }
    }
    Ok(format!("{checked} components from {games} games"))
}

fn c6() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(6));
    for i in 0..500 {
        let g = corpus::random_divergent_game(&mut rng, 7, 4);
        let a = solve(&g).map_err(|e| e.to_string())?;
        let b = brute_force_values(&g).map_err(|e| e.to_string())?;
        check(a == b, format!("game {i}: solve {:?} brute force {:?}\n{}", a.0, b.0, g.to_wg()))?;
    }
    Ok("500 divergent games".to_string())
}

fn c7() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(7));
    let mut finite = 0;
    for i in 0..300 {
        let g = corpus::random_divergent_game(&mut rng, 7, 4);
        let v = solve(&g).map_err(|e| e.to_string())?;
        let max = extract_max_strategy(&g, &v).map_err(|e| e.to_string())?;
        let mv = strategy_value(&g, &max).map_err(|e| e.to_string())?;
        check(mv == v, format!("game {i}: Max strategy value {:?} vs {:?}\n{}", mv.0, v.0, g.to_wg()))?;
        if v.0.iter().all(|x| x.is_finite()) {
            let min = extract_min_strategy(&g, &v).map_err(|e| e.to_string())?;
            let nv = strategy_value(&g, &min).map_err(|e| e.to_string())?;
            check(nv == v, format!("game {i}: Min strategy value {:?} vs {:?}\n{}", nv.0, v.0, g.to_wg()))?;
            finite += 1;
        }
    }
    Ok(format!("300 games, {finite} with finite values"))
}

fn c8() -> Outcome {
    let w = TimedGame::parse(WAIT1).map_err(|e| e.to_string())?;
    let v = solve_timed(&w).map_err(|e| e.to_string())?;
    let expected = Pwa::from_cells(vec![
        Cell::on(
            &Interval { lo: qi(0), lo_closed: true, hi: qi(1), hi_closed: true },
            Extended::Fin(Affine::new(qi(-1), qi(1))),
        ),
        Cell::on(&Interval { lo: qi(1), lo_closed: false, hi: qi(2), hi_closed: true }, Extended::Fin(Affine::constant(qi(0)))),
    ]);
    let s0 = v.state_function(w.state_id("s0").unwrap());
    check(s0 == expected, format!("wait1 s0 = {}", s0.render()))?;

    let n = TimedGame::parse(LOOP_N).map_err(|e| e.to_string())?;
    let v = solve_timed(&n).map_err(|e| e.to_string())?;
    let s0 = v.state_function(n.state_id("s0").unwrap());
    check(s0.infinite() == Some(Extended::NegInf), format!("loopN s0 = {}", s0.render()))?;

    let p = TimedGame::parse(LOOP_P).map_err(|e| e.to_string())?;
    let ra = RegionAutomaton::build(&p);
    let zero = ra.node_id(p.state_id("s0").unwrap(), 0);
    let arc = ra.find_arc(zero, 0, zero).ok_or("loopP has no loop arc")?;
    let r = cycle_sign(&p, &ra, &RegionPath { start: zero, arcs: vec![arc] }).map_err(|e| e.to_string())?;
    check(r.sign == CycleSign::Positive && r.lo == 1 && r.hi == 1, format!("loopP sign {r:?}"))?;
    Ok("wait1 = 1-x on [0,1], 0 on (1,2]; loopN = -inf; loopP loop positive, lo = hi = 1".to_string())
}

fn c9() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(9));
    let t = Instant::now();
    let (mut yes, mut no) = (0, 0);
    for i in 0..150 {
        let g = corpus::random_timed_game(&mut rng, 3, 2, 3);
        let got = is_divergent_timed(&g).divergent;
        let want = common::oracle_divergent_timed(&g);
        check(got == want, format!("game {i} disagrees (library {got}):\n{}", g.to_wtg()))?;
        if got {
            yes += 1
        } else {
            no += 1
        }
    }
    let elapsed = t.elapsed();
    check(elapsed < Duration::from_secs(300), format!("took {elapsed:?}"))?;
    Ok(format!("150 games ({yes} divergent, {no} not) in {elapsed:?}"))
}

fn c10() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(10));
    let mut games: Vec<TimedGame> = [LOOP_P, LOOP_N, WAIT1].iter().map(|t| TimedGame::parse(t).unwrap()).collect();
    games.extend((0..40).map(|_| corpus::random_timed_game(&mut rng, 3, 2, 3)));
    let mut edges = 0;
    for g in &games {
        let ra = RegionAutomaton::build(g);
        let pg = ra.play_digraph();
        let scc = sccs(&pg);
        let w = qi(g.max_abs_weight());
        for (c, comp) in scc.components.iter().enumerate() {
            if scc.is_trivial(&pg, c) {
                continue;
            }
            let cycle = simple_cycle_in(&ra, comp).ok_or("nontrivial component without a cycle")?;
            let fog = build_fog(g, &ra, &cycle).map_err(|e| e.to_string())?;
            for e in &fog.edges {
                for eps in [q(1, 4), q(1, 8), q(1, 16)] {
                    let real = realize_corner_play(g, &ra, &e.play, &eps, None)
                        .map_err(|err| format!("{err} for eps {}:\n{}", fmt_q(&eps), g.to_wtg()))?;
                    let gap = (&real.weight - qi(real.corner_weight)).abs();
                    let bound = qi(2) * &eps * qi(cycle.len() as i64) * &w;
                    check(
                        gap <= bound,
                        format!("gap {} above {} for eps {}:\n{}", fmt_q(&gap), fmt_q(&bound), fmt_q(&eps), g.to_wtg()),
                    )?;
                }
                edges += 1;
            }
        }
    }
    Ok(format!("{edges} orbit-graph edges from {} games, 3 epsilons each", games.len()))
}

fn c11() -> Outcome {
    let mut rng = corpus::rng(corpus::base_seed(11));
    let mut points = 0;
    let mut worst = Q::zero();
    let games = 40;
    for i in 0..games {
        let g = corpus::random_divergent_timed_game(&mut rng, 3, 2, 3);
        let exact = solve_timed(&g).map_err(|e| e.to_string())?;
        let grids: Vec<_> = [4, 8, 16]
            .iter()
            .map(|&n| solve_timed_grid(&g, n).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        for s in 0..g.num_states() {
            for k in 0..=4 * g.bound() as i64 {
                let x = q(k, 4);
                let Some(Extended::Fin(e)) = exact.eval(s, &x) else { continue };
                let mut prev: Option<Q> = None;
                for grid in &grids {
                    let Some(Extended::Fin(a)) = grid.get(s, std::slice::from_ref(&x)) else {
                        return Err(format!("game {i}: grid value at s{s}, x = {} is not finite:\n{}", fmt_q(&x), g.to_wtg()));
                    };
                    let d = (&e - a).abs();
                    if let Some(p) = &prev {
                        check(d <= *p, format!("game {i}: error grows at s{s}, x = {}:\n{}", fmt_q(&x), g.to_wtg()))?;
                    }
                    prev = Some(d);
                }
                let last = prev.expect("three grids");
                check(last <= q(1, 2), format!("game {i}: error {} at N = 16:\n{}", fmt_q(&last), g.to_wtg()))?;
                worst = worst.max(last);
                points += 1;
            }
        }
    }
    Ok(format!("{points} points from {games} games, worst error at N = 16: {}", fmt_q(&worst)))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 11] =
        [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9), (10, c10), (11, c11)];
    let mut failed = 0;
    for (n, f) in criteria {
        let t = Instant::now();
        match f() {
            Ok(detail) => println!("criterion {n}: PASS ({detail}; {:.2?})", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL ({why})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 11 criteria passed");
}
