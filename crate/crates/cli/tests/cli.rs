use std::path::PathBuf;
use std::process::Command as Proc;

use divgame::corpus;
use divgame::testdata::{FIG1, LOOP_0, LOOP_P, WAIT1};
use divgame::timed_solver::TimedSolveError;
use divgame::untimed::{solve, SolveError};
use divgame::ExtValue;
use divgame_cli::{run_source, solve_exit_code, timed_solve_exit_code, CliRequest, Command, Flags, Report};
use proptest::prelude::*;
use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

fn run(command: Command, source: &str, flags: Flags) -> Report {
    run_source(&CliRequest { command, input: PathBuf::new(), flags }, source)
}

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Proc::new(env!("CARGO_BIN_EXE_divgame")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn at_vertex(v: &str) -> Flags {
    Flags { vertex: Some(v.into()), ..Flags::default() }
}

fn threshold(alpha: &str, vertex: &str) -> Flags {
    Flags { threshold: Some(alpha.into()), vertex: Some(vertex.into()), ..Flags::default() }
}

proptest! {
    #[test]
    fn threshold_agrees_with_the_reported_value(seed in any::<u64>(), alpha in -8i64..=8, which in 0usize..3) {
        let g = corpus::random_divergent_game(&mut corpus::rng(seed), 6, 4);
        let values = solve(&g).unwrap();
        let alpha = ["-inf".to_string(), "+inf".to_string(), alpha.to_string()][which].clone();
        let a: ExtValue = alpha.parse().unwrap();
        for v in g.vertices() {
            let r = run(Command::Solve, &g.to_wg(), threshold(&alpha, g.name(v)));
            prop_assert_eq!(r.exit_code, 0);
            prop_assert_eq!(&r.json["threshold"]["holds"], &json!(values[v] <= a));
            prop_assert_eq!(&r.json["values"][g.name(v)], &serde_json::to_value(values[v]).unwrap());
        }
    }

    #[test]
    fn reports_round_trip_through_json(seed in any::<u64>()) {
        let mut rng = corpus::rng(seed);
        let g = corpus::random_divergent_game(&mut rng, 6, 4);
        let t = corpus::random_divergent_timed_game(&mut rng, 3, 2, 3);
        let reports = [
            run(Command::Solve, &g.to_wg(), Flags::default()),
            run(Command::Divergent, &g.to_wg(), Flags::default()),
            run(Command::Strategy, &g.to_wg(), Flags::default()),
            run(Command::Solve, &t.to_wtg(), Flags::default()),
            run(Command::Strategy, &t.to_wtg(), Flags::default()),
            run(Command::Approx, &t.to_wtg(), Flags { granularity: Some(2), ..Flags::default() }),
            run(Command::Corners, &t.to_wtg(), Flags::default()),
        ];
        for r in reports {
            prop_assert_eq!(r.exit_code, 0, "{}", r.text);
            let back: Value = serde_json::from_str(&r.body(true)).unwrap();
            prop_assert_eq!(back, r.json);
        }
    }
}

#[test]
fn fig1_values_and_divergence() {
    let r = run(Command::Solve, FIG1, Flags { json: true, ..Flags::default() });
    assert_eq!(r.exit_code, 0);
    assert_eq!(
        r.json["values"],
        json!({"v1":"-inf","v2":-9,"v3":-9,"v4":"+inf","v5":1,"v6":1,"v7":"+inf","v8":0,"v9":2,"vt":0})
    );
    let d = run(Command::Divergent, FIG1, Flags::default());
    assert_eq!((d.exit_code, d.text.as_str()), (0, "divergent: true\n"));
}

#[test]
fn threshold_at_infinite_values() {
    for (alpha, v, holds) in [("-inf", "v1", true), ("-100", "v1", true), ("+inf", "v4", true), ("100", "v4", false), ("-inf", "v9", false), ("2", "v9", true), ("1", "v9", false)] {
        let r = run(Command::Solve, FIG1, threshold(alpha, v));
        assert_eq!(r.json["threshold"]["holds"], json!(holds), "Val({v}) <= {alpha}");
    }
    let r = run(Command::Solve, WAIT1, Flags { threshold: Some("0".into()), state: Some("s0".into()), valuation: Some("1/2".into()), ..Flags::default() });
    assert_eq!(r.json["threshold"]["value"], json!("1/2"));
    assert_eq!(r.json["threshold"]["holds"], json!(false));
}

#[test]
fn non_divergent_games_are_refused() {
    let r = run(Command::Solve, LOOP_0, Flags::default());
    assert_eq!(r.exit_code, 2);
    assert!(r.text.starts_with("not divergent"));
    assert_eq!(r.json["witness"]["nonpositive"]["weight"], json!(0));
    let forced = run(Command::Solve, LOOP_0, Flags { force: true, ..Flags::default() });
    assert_eq!(forced.exit_code, 2);

    let zero = "game untimed\nvertex v min\nvertex t min\ntarget t\nedge v a v 0\nedge v b t 3\nedge t a t 0\n";
    assert_eq!(run(Command::Divergent, zero, Flags::default()).exit_code, 2);
    assert_eq!(run(Command::Solve, zero, Flags::default()).exit_code, 2);
    let forced = run(Command::Solve, zero, Flags { force: true, ..Flags::default() });
    assert_eq!(forced.exit_code, 0);
    assert_eq!(forced.json["values"], json!({"v": 3, "t": 0}));
}

#[test]
fn dot_exports() {
    let r = run(Command::Regions, LOOP_P, Flags::default());
    assert_eq!(r.text.matches("label=\"s0 / ").count(), 3);
    assert!(r.text.starts_with("digraph") && r.text.ends_with("}\n"));
    let fog = run(Command::Fog, LOOP_P, Flags::default());
    let edges: Vec<&str> = fog.text.lines().filter(|l| l.contains("->")).collect();
    assert_eq!(edges, ["  k0 -> k0 [label=\"1\"];"]);
    assert_eq!(fog.text.lines().filter(|l| l.contains("[label=") && !l.contains("->")).count(), 1);
    let target = Flags { state: Some("st".into()), valuation: Some("1/2".into()), ..Flags::default() };
    let empty = run(Command::Fog, WAIT1, target);
    assert_eq!(empty.text, "digraph fog {\n}\n");
    let corners = run(Command::Corners, LOOP_P, Flags::default());
    assert_eq!(corners.exit_code, 0);
    assert_eq!(corners.json["dot"], json!(corners.text));
}

#[test]
fn outputs_are_deterministic() {
    for c in [Command::Solve, Command::Strategy, Command::Regions, Command::Corners, Command::Fog] {
        assert_eq!(run(c, LOOP_P, Flags::default()), run(c, LOOP_P, Flags::default()));
    }
}

#[test]
fn strategies_and_grid() {
    let s = run(Command::Strategy, WAIT1, Flags { state: Some("s0".into()), valuation: Some("0".into()), ..Flags::default() });
    assert_eq!(s.json["move"], json!({"delay": "1", "transition": 0}));
    let untimed = run(Command::Strategy, FIG1, at_vertex("v2"));
    assert_eq!(untimed.json["move"]["action"], json!("c"));
    assert_eq!(untimed.json["min"], Value::Null);
    let a = run(Command::Approx, WAIT1, Flags { granularity: Some(2), state: Some("s0".into()), valuation: Some("1/2".into()), ..Flags::default() });
    assert_eq!(a.json["value"], json!("1/2"));
    let off_grid = run(Command::Approx, WAIT1, Flags { granularity: Some(2), state: Some("s0".into()), valuation: Some("1/3".into()), ..Flags::default() });
    assert_eq!(off_grid.exit_code, 4);
}

#[test]
fn flag_validation() {
    let bad = [
        (Command::Solve, Flags { granularity: Some(2), ..Flags::default() }),
        (Command::Approx, Flags::default()),
        (Command::Solve, Flags { threshold: Some("1".into()), ..Flags::default() }),
        (Command::Solve, Flags { state: Some("s0".into()), ..Flags::default() }),
        (Command::Divergent, Flags { force: true, ..Flags::default() }),
        (Command::Solve, threshold("one", "v1")),
        (Command::Solve, threshold("1", "nowhere")),
    ];
    for (c, f) in bad {
        assert_eq!(run(c, FIG1, f.clone()).exit_code, 4, "{c:?} {f:?}");
    }
    assert_eq!(run(Command::Regions, FIG1, Flags::default()).exit_code, 4);
    assert_eq!(run(Command::Solve, WAIT1, threshold("1", "s0")).exit_code, 4);
    let two = "game timed\nclocks x y\nstate s min rate 1 target\ntrans s s guard \"x <= 1 & y <= 1\" reset {x, y} weight 0\n";
    assert_eq!(run(Command::Solve, two, Flags::default()).exit_code, 4);
    assert_eq!(run(Command::Regions, two, Flags::default()).exit_code, 0);
}

#[test]
fn error_codes_map_to_the_table() {
    assert_eq!(solve_exit_code(&SolveError::Inconsistent { component: vec![0], reason: "x".into() }), 5);
    assert_eq!(timed_solve_exit_code(&TimedSolveError::Degenerate(0)), 5);
    assert_eq!(timed_solve_exit_code(&TimedSolveError::Inconsistent { nodes: vec![], reason: "x".into() }), 5);
    assert_eq!(timed_solve_exit_code(&TimedSolveError::MultiClock(2)), 4);
    assert_eq!(timed_solve_exit_code(&TimedSolveError::BadEpsilon), 4);
}

#[test]
fn binary_exit_codes_and_streams() {
    let fig1 = data("fig1.wg");
    let fig1 = fig1.to_str().unwrap();
    let (code, out, _) = bin(&["solve", fig1, "--json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["values"]["v2"], json!(-9));
    let (code, out, _) = bin(&["solve", fig1, "--threshold", "-inf", "--vertex", "v1"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("Val(v1) <= -inf: true\n"));
    let (code, out, _) = bin(&["solve", data("loop0.wtg").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.starts_with("not divergent"));

    let dir = std::env::temp_dir().join(format!("divgame-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let syntax = dir.join("syntax.wg");
    std::fs::write(&syntax, "game untimed\nvertex a\n").unwrap();
    let unknown = dir.join("unknown.wg");
    std::fs::write(&unknown, "game untimed\nvertex a min\nedge a x b 1\n").unwrap();
    let (code, out, err) = bin(&["solve", syntax.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (3, ""));
    assert!(err.starts_with("parse error"));
    assert_eq!(bin(&["solve", unknown.to_str().unwrap()]).0, 4);
    assert_eq!(bin(&["solve", dir.join("missing.wg").to_str().unwrap()]).0, 4);
    assert_eq!(bin(&["frobnicate", fig1]).0, 4);
    assert_eq!(bin(&["--help"]).0, 0);
    std::fs::remove_dir_all(&dir).unwrap();
}
