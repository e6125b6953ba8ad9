mod common;

use divgame::corpus;
use divgame::game::{play_value, play_weight, LassoPlay};
use divgame::testdata::FIG1;
use divgame::{ArithError, ExtValue, Extended, GameError, Play, WeightedGame};
use proptest::prelude::*;
use rand::Rng;

fn random_play(g: &WeightedGame, seed: u64, len: usize) -> Play {
    let mut rng = corpus::rng(seed);
    let mut play = Play::new(rng.gen_range(0..g.num_vertices()));
    let mut cur = play.start;
    for _ in 0..len {
        let out = g.out_edges(cur);
        let e = out[rng.gen_range(0..out.len())];
        play.steps.push(e);
        cur = g.edge(e).dst;
    }
    play
}

fn ext() -> impl Strategy<Value = ExtValue> {
    prop_oneof![
        Just(Extended::NegInf),
        Just(Extended::PosInf),
        (-1000i64..1000).prop_map(Extended::Fin),
    ]
}

proptest! {
    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let g = corpus::random_game(&mut corpus::rng(seed), 7, 4);
        let text = g.to_wg();
        let back = WeightedGame::parse(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_wg(), text);
    }

    #[test]
    fn value_is_weight_of_the_prefix_up_to_the_first_target(seed in any::<u64>(), len in 0usize..12) {
        let g = corpus::random_game(&mut corpus::rng(seed), 6, 4);
        let play = random_play(&g, seed ^ 0x5eed, len);
        let mut cur = play.start;
        let mut hit = g.is_target(cur).then_some(0);
        for (k, &e) in play.steps.iter().enumerate() {
            cur = g.edge(e).dst;
            if hit.is_none() && g.is_target(cur) {
                hit = Some(k + 1);
            }
        }
        let value = play_value(&g, &play).unwrap();
        match hit {
            Some(k) => {
                let prefix = Play { start: play.start, steps: play.steps[..k].to_vec() };
                prop_assert_eq!(value, Extended::Fin(play_weight(&g, &prefix).unwrap()));
            }
            None => prop_assert_eq!(value, Extended::PosInf),
        }
    }

    #[test]
    fn finite_addition_is_associative_and_monotone(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000) {
        let (fa, fb, fc) = (Extended::Fin(a), Extended::Fin(b), Extended::Fin(c));
        let left = fa.checked_add(fb).unwrap().checked_add(fc).unwrap();
        let right = fa.checked_add(fb.checked_add(fc).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        if a <= b {
            prop_assert!(fa.checked_add(fc).unwrap() <= fb.checked_add(fc).unwrap());
        }
    }

    #[test]
    fn order_is_total_and_consistent_with_addition(x in ext(), y in ext()) {
        prop_assert!(x <= y || y <= x);
        match (x, y) {
            (Extended::PosInf, Extended::NegInf) | (Extended::NegInf, Extended::PosInf) => {
                prop_assert_eq!(x.checked_add(y), Err(ArithError::InfMinusInf));
            }
            _ => {
                let s = x.checked_add(y).unwrap();
                if x == Extended::PosInf || y == Extended::PosInf {
                    prop_assert_eq!(s, Extended::PosInf);
                } else if x == Extended::NegInf || y == Extended::NegInf {
                    prop_assert_eq!(s, Extended::NegInf);
                }
            }
        }
    }
}

#[test]
fn fig1_plays() {
    let g = WeightedGame::parse(FIG1).unwrap();
    let v = |n: &str| g.vertex(n).unwrap();
    let p = Play::from_actions(&g, v("v2"), &["c", "a", "b"]).unwrap();
    assert_eq!(play_weight(&g, &p).unwrap(), -9);
    assert_eq!(play_value(&g, &p).unwrap(), Extended::PosInf);
    let p = Play::from_actions(&g, v("v9"), &["b", "a", "a"]).unwrap();
    assert_eq!(play_value(&g, &p).unwrap(), Extended::Fin(0));
    assert_eq!(play_weight(&g, &Play::new(v("v4"))).unwrap(), 0);

    let forever = LassoPlay { stem: Play::new(v("v4")), cycle: vec![g.edge_by_action(v("v4"), "a").unwrap()] };
    assert_eq!(forever.value(&g).unwrap(), Extended::PosInf);
}

#[test]
fn broken_plays_are_rejected() {
    let g = WeightedGame::parse(FIG1).unwrap();
    let to_vt = g.edge_by_action(g.vertex("v8").unwrap(), "b").unwrap();
    let p = Play { start: g.vertex("v1").unwrap(), steps: vec![to_vt] };
    assert!(matches!(play_weight(&g, &p), Err(GameError::NonChainedPlay(0))));
}

#[test]
fn validation_errors() {
    let bad = |text: &str| WeightedGame::parse(text).unwrap_err();
    assert!(bad("game untimed\nvertex v min\n").to_string().contains("no outgoing edge"));
    assert!(matches!(
        bad("game untimed\nvertex v max\ntarget v\nedge v a v 0\n"),
        GameError::MaxTarget(_)
    ));
    assert!(matches!(
        bad("game untimed\nvertex v min\nedge v a v 0\nedge v a v 1\n"),
        GameError::NonDeterministic { .. }
    ));
    assert!(matches!(bad("game untimed\nvertex v min\nedge v a w 0\n"), GameError::UnknownVertex(_)));
    assert!(bad("game untimed\nvertex v min\nedge v a v zero\n").is_syntax());
    assert!(common::oracle_divergent_untimed(&WeightedGame::parse(FIG1).unwrap()));
}
