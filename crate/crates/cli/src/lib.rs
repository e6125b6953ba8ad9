//! Command-line front end: parses a game file, runs one command and builds a
//! [`Report`] carrying a JSON body, a text body and the process exit code.

use std::fmt::Write;
use std::path::PathBuf;

use divgame::corner::{
    build_corner_graph, build_fog, is_divergent_timed_with, simple_cycle_in, CornerWalk, TimedWitness,
};
use divgame::dot::{corner_dot, fog_dot, game_dot, region_dot};
use divgame::graph_analysis::{is_divergent_untimed, sccs, DivergenceWitness};
use divgame::pwa::fmt_ext;
use divgame::strategy::{extract_max_strategy, extract_min_strategy, min_fuel, Strategy};
use divgame::timed::{fmt_q, parse_q, qi, Config, RegionAutomaton, TimedError, TimedGame, Q};
use divgame::timed_solver::{extract_timed_strategy, solve_timed, solve_timed_grid, TimedSolveError};
use divgame::untimed::{brute_force_values, solve, SolveError, ValueVector};
use divgame::{ExtValue, GameError, Owner, WeightedGame};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_DIVERGENT: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;
pub const EXIT_INCONSISTENT: i32 = 5;

/// Default `--epsilon` of the `strategy` command on timed games.
pub const DEFAULT_EPSILON: &str = "1/10";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Divergent,
    Regions,
    Corners,
    Fog,
    Approx,
    Strategy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Divergent => "divergent",
            Command::Regions => "regions",
            Command::Corners => "corners",
            Command::Fog => "fog",
            Command::Approx => "approx",
            Command::Strategy => "strategy",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub json: bool,
    pub dot: bool,
    pub threshold: Option<String>,
    pub vertex: Option<String>,
    pub state: Option<String>,
    pub valuation: Option<String>,
    pub granularity: Option<u32>,
    pub epsilon: Option<String>,
    pub force: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliRequest {
    pub command: Command,
    pub input: PathBuf,
    pub flags: Flags,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub json: Value,
    pub text: String,
    pub exit_code: i32,
}

impl Report {
    fn ok(json: Value, text: String) -> Report {
        Report { json, text, exit_code: EXIT_OK }
    }

    fn fail(code: i32, msg: impl Into<String>) -> Report {
        let msg = msg.into();
        let kind = match code {
            EXIT_NOT_DIVERGENT => "not divergent",
            EXIT_PARSE => "parse error",
            EXIT_VALIDATION => "validation error",
            _ => "internal inconsistency",
        };
        Report { json: json!({ "error": kind, "message": msg }), text: format!("{kind}: {msg}\n"), exit_code: code }
    }

    /// The body selected by `--json`.
    pub fn body(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

enum Game {
    Untimed(WeightedGame),
    Timed(TimedGame),
}

/// Reads `request.input` and runs the command on its contents.
pub fn run_cli(request: &CliRequest) -> Report {
    match std::fs::read_to_string(&request.input) {
        Ok(text) => run_source(request, &text),
        Err(e) => Report::fail(EXIT_VALIDATION, format!("cannot read {}: {e}", request.input.display())),
    }
}

/// Runs the command on game text (the input path is ignored).
pub fn run_source(request: &CliRequest, source: &str) -> Report {
    if let Err(msg) = check_flags(request) {
        return Report::fail(EXIT_VALIDATION, msg);
    }
    let game = match parse(source) {
        Ok(g) => g,
        Err(r) => return r,
    };
    let f = &request.flags;
    match &game {
        Game::Untimed(_) if f.state.is_some() => {
            return Report::fail(EXIT_VALIDATION, "--state/--valuation need a timed game; use --vertex")
        }
        Game::Timed(_) if f.vertex.is_some() => {
            return Report::fail(EXIT_VALIDATION, "--vertex needs an untimed game; use --state/--valuation")
        }
        _ => {}
    }
    let result = match (&game, request.command) {
        (Game::Untimed(g), Command::Solve) => solve_untimed(g, f),
        (Game::Timed(g), Command::Solve) => solve_timed_cmd(g, f),
        (Game::Untimed(g), Command::Divergent) => Ok(divergent_untimed(g)),
        (Game::Timed(g), Command::Divergent) => Ok(divergent_timed(g)),
        (Game::Untimed(g), Command::Strategy) => strategy_untimed(g, f),
        (Game::Timed(g), Command::Strategy) => strategy_timed(g, f),
        (Game::Timed(g), Command::Regions) => Ok(dot_report(region_dot(g, &RegionAutomaton::build(g)), json!({}))),
        (Game::Timed(g), Command::Corners) => {
            let ra = RegionAutomaton::build(g);
            let cg = build_corner_graph(g, &ra);
            let summary = json!({ "nodes": cg.nodes.len(), "arcs": cg.arcs.len() });
            Ok(dot_report(corner_dot(g, &ra, &cg), summary))
        }
        (Game::Timed(g), Command::Fog) => fog_cmd(g, f),
        (Game::Timed(g), Command::Approx) => approx_cmd(g, f),
        (Game::Untimed(_), c) => Err(Report::fail(EXIT_VALIDATION, format!("{} needs a timed game", c.name()))),
    };
    result.unwrap_or_else(|r| r)
}

fn check_flags(request: &CliRequest) -> Result<(), String> {
    let f = &request.flags;
    let allowed: &[&str] = match request.command {
        Command::Solve => &["threshold", "vertex", "state", "valuation", "force", "dot"],
        Command::Divergent => &["dot"],
        Command::Regions | Command::Corners => &["dot"],
        Command::Fog => &["dot", "state", "valuation"],
        Command::Approx => &["granularity", "state", "valuation"],
        Command::Strategy => &["epsilon", "vertex", "state", "valuation"],
    };
    let given = [
        ("dot", f.dot),
        ("threshold", f.threshold.is_some()),
        ("vertex", f.vertex.is_some()),
        ("state", f.state.is_some()),
        ("valuation", f.valuation.is_some()),
        ("granularity", f.granularity.is_some()),
        ("epsilon", f.epsilon.is_some()),
        ("force", f.force),
    ];
    for (name, set) in given {
        if set && !allowed.contains(&name) {
            return Err(format!("--{name} is not valid for {}", request.command.name()));
        }
    }
    if f.vertex.is_some() && (f.state.is_some() || f.valuation.is_some()) {
        return Err("--vertex cannot be combined with --state/--valuation".to_string());
    }
    if f.state.is_some() != f.valuation.is_some() {
        return Err("--state and --valuation go together".to_string());
    }
    if f.threshold.is_some() && f.vertex.is_none() && f.state.is_none() {
        return Err("--threshold needs --vertex or --state/--valuation".to_string());
    }
    if f.dot && f.json {
        return Err("--dot and --json are exclusive".to_string());
    }
    if request.command == Command::Approx && f.granularity.is_none() {
        return Err("approx needs --granularity".to_string());
    }
    Ok(())
}

fn header(source: &str) -> Option<&str> {
    source
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
}

fn parse(source: &str) -> Result<Game, Report> {
    let words: Vec<&str> = header(source).unwrap_or("").split_whitespace().collect();
    match words.as_slice() {
        ["game", "untimed"] => WeightedGame::parse(source).map(Game::Untimed).map_err(game_error),
        ["game", "timed"] => TimedGame::parse(source).map(Game::Timed).map_err(timed_error),
        _ => Err(Report::fail(EXIT_PARSE, "expected a header line `game untimed` or `game timed`")),
    }
}

fn game_error(e: GameError) -> Report {
    Report::fail(if e.is_syntax() { EXIT_PARSE } else { EXIT_VALIDATION }, e.to_string())
}

fn timed_error(e: TimedError) -> Report {
    Report::fail(if e.is_syntax() { EXIT_PARSE } else { EXIT_VALIDATION }, e.to_string())
}

/// Exit code reported for an untimed solver error.
pub fn solve_exit_code(e: &SolveError) -> i32 {
    match e {
        SolveError::NotDivergent(_) | SolveError::GuardViolated { .. } => EXIT_NOT_DIVERGENT,
        _ => EXIT_INCONSISTENT,
    }
}

/// Exit code reported for a timed solver error.
pub fn timed_solve_exit_code(e: &TimedSolveError) -> i32 {
    match e {
        TimedSolveError::NotDivergent(_) => EXIT_NOT_DIVERGENT,
        TimedSolveError::Untimed(inner) => solve_exit_code(inner),
        TimedSolveError::MultiClock(_)
        | TimedSolveError::GuardViolated { .. }
        | TimedSolveError::BadGranularity
        | TimedSolveError::BadEpsilon
        | TimedSolveError::Timed(_) => EXIT_VALIDATION,
        _ => EXIT_INCONSISTENT,
    }
}

fn solve_error(e: SolveError) -> Report {
    Report::fail(solve_exit_code(&e), e.to_string())
}

fn timed_solve_error(e: TimedSolveError) -> Report {
    Report::fail(timed_solve_exit_code(&e), e.to_string())
}

fn dot_report(dot: String, summary: Value) -> Report {
    let mut json = summary;
    json["dot"] = Value::String(dot.clone());
    Report::ok(json, dot)
}

fn parse_threshold(s: &str) -> Result<ExtValue, Report> {
    s.parse::<ExtValue>()
        .map_err(|_| Report::fail(EXIT_VALIDATION, format!("threshold {s:?} is not an integer, +inf or -inf")))
}

fn vertex_id(g: &WeightedGame, name: &str) -> Result<usize, Report> {
    g.vertex(name).ok_or_else(|| Report::fail(EXIT_VALIDATION, format!("unknown vertex {name}")))
}

/// `(state, valuation)` from `--state` and `--valuation`.
fn configuration(g: &TimedGame, f: &Flags) -> Result<Option<Config>, Report> {
    let (Some(state), Some(val)) = (&f.state, &f.valuation) else {
        return Ok(None);
    };
    let s = g.state_id(state).ok_or_else(|| Report::fail(EXIT_VALIDATION, format!("unknown state {state}")))?;
    let valuation: Vec<Q> = val
        .split(',')
        .map(|p| parse_q(p.trim()).ok_or_else(|| Report::fail(EXIT_VALIDATION, format!("bad rational {p:?}"))))
        .collect::<Result<_, _>>()?;
    if valuation.len() != g.num_clocks() {
        return Err(Report::fail(
            EXIT_VALIDATION,
            format!("valuation has {} entries for {} clocks", valuation.len(), g.num_clocks()),
        ));
    }
    let m = qi(g.bound() as i64);
    if valuation.iter().any(|x| *x < qi(0) || *x > m) {
        return Err(Report::fail(EXIT_VALIDATION, format!("valuation outside [0, {}]", g.bound())));
    }
    Ok(Some(Config { state: s, valuation }))
}

fn witness_untimed(g: &WeightedGame, w: &DivergenceWitness) -> (Value, String) {
    let cycle = |c: &Option<Vec<usize>>| -> (Value, String) {
        let Some(c) = c else { return (Value::Null, "none".to_string()) };
        let steps: Vec<Value> = c
            .iter()
            .map(|&e| {
                let e = g.edge(e);
                json!({ "from": g.name(e.src), "action": e.action, "to": g.name(e.dst), "weight": e.weight })
            })
            .collect();
        let mut text = g.name(w.vertex).to_string();
        for &e in c {
            let e = g.edge(e);
            let _ = write!(text, " -{}-> {}", e.action, g.name(e.dst));
        }
        let weight: i64 = c.iter().map(|&e| g.edge(e).weight).sum();
        let _ = write!(text, " (weight {weight})");
        (json!({ "edges": steps, "weight": weight }), text)
    };
    let (np, np_text) = cycle(&w.nonpositive);
    let (nn, nn_text) = cycle(&w.nonnegative);
    let json = json!({
        "vertex": g.name(w.vertex),
        "lo": w.lo,
        "hi": w.hi,
        "nonpositive": np,
        "nonnegative": nn,
    });
    let text = format!(
        "witness vertex {}: cycle weights in [{}, {}]\n  nonpositive cycle: {np_text}\n  nonnegative cycle: {nn_text}\n",
        g.name(w.vertex),
        w.lo,
        w.hi
    );
    (json, text)
}

fn corner_text(c: &[u32]) -> String {
    let parts: Vec<String> = c.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn walk_json(g: &TimedGame, ra: &RegionAutomaton, w: &CornerWalk) -> (Value, String) {
    let mut text = format!("{} @ {}", ra.label(g, w.start.0), corner_text(&w.start.1));
    let steps: Vec<Value> = w
        .steps
        .iter()
        .map(|s| {
            let a = ra.arc(s.arc);
            let _ = write!(text, " -t{} wait {}-> {} @ {}", a.trans, s.delay, ra.label(g, a.dst), corner_text(&s.next));
            json!({
                "transition": a.trans,
                "delay": s.delay,
                "via": ra.region(s.via).render(g.clocks()),
                "to": ra.label(g, a.dst),
                "corner": s.next,
                "weight": s.weight,
            })
        })
        .collect();
    let _ = write!(text, " (weight {})", w.weight);
    let json = json!({
        "start": ra.label(g, w.start.0),
        "corner": w.start.1,
        "steps": steps,
        "weight": w.weight,
    });
    (json, text)
}

fn witness_timed(g: &TimedGame, ra: &RegionAutomaton, w: &TimedWitness) -> (Value, String) {
    let (np, np_text) = walk_json(g, ra, &w.nonpositive);
    let (nn, nn_text) = walk_json(g, ra, &w.nonnegative);
    let scc: Vec<String> = w.scc.iter().map(|&n| ra.label(g, n)).collect();
    let json = json!({ "component": scc, "nonpositive": np, "nonnegative": nn });
    let text = format!("witness corner cycles:\n  nonpositive: {np_text}\n  nonnegative: {nn_text}\n");
    (json, text)
}

fn values_text(g: &WeightedGame, v: &ValueVector) -> String {
    g.vertices().map(|u| format!("{}: {}\n", g.name(u), v[u])).collect()
}

fn solve_untimed(g: &WeightedGame, f: &Flags) -> Result<Report, Report> {
    let report = is_divergent_untimed(g);
    let (values, method) = match report.witness {
        None => (solve(g).map_err(solve_error)?, "scc"),
        Some(w) if !f.force => {
            let (wj, wt) = witness_untimed(g, &w);
            return Err(Report {
                json: json!({ "error": "not divergent", "witness": wj }),
                text: format!("not divergent: refusing to solve (use --force for the brute-force oracle)\n{wt}"),
                exit_code: EXIT_NOT_DIVERGENT,
            });
        }
        Some(_) => (brute_force_values(g).map_err(solve_error)?, "brute-force"),
    };
    if f.dot {
        return Ok(dot_report(game_dot(g), json!({})));
    }
    let mut json = json!({ "values": values.to_json(g) });
    let mut text = values_text(g, &values);
    if method != "scc" {
        json["method"] = Value::String(method.to_string());
        text.insert_str(0, "not divergent: values from the brute-force oracle\n");
    }
    if let (Some(t), Some(v)) = (&f.threshold, &f.vertex) {
        let alpha = parse_threshold(t)?;
        let u = vertex_id(g, v)?;
        let holds = values[u] <= alpha;
        json["threshold"] = json!({ "vertex": v, "alpha": alpha, "value": values[u], "holds": holds });
        let _ = writeln!(text, "Val({v}) <= {alpha}: {holds}");
    }
    Ok(Report::ok(json, text))
}

fn solve_timed_cmd(g: &TimedGame, f: &Flags) -> Result<Report, Report> {
    let ra = RegionAutomaton::build(g);
    if g.num_clocks() == 1 {
        if let Some(w) = is_divergent_timed_with(g, &ra).witness {
            let (wj, wt) = witness_timed(g, &ra, &w);
            let note = if f.force { " (--force does not apply to timed games)" } else { "" };
            return Err(Report {
                json: json!({ "error": "not divergent", "witness": wj }),
                text: format!("not divergent: refusing to solve{note}\n{wt}"),
                exit_code: EXIT_NOT_DIVERGENT,
            });
        }
    }
    let values = solve_timed(g).map_err(timed_solve_error)?;
    if f.dot {
        return Ok(dot_report(region_dot(g, &ra), json!({})));
    }
    let mut json = json!({ "values": values.to_json(g) });
    let mut text = values.render(g);
    if let Some(t) = &f.threshold {
        let alpha = parse_threshold(t)?;
        let cfg = configuration(g, f)?
            .ok_or_else(|| Report::fail(EXIT_VALIDATION, "timed thresholds need --state and --valuation"))?;
        let x = &cfg.valuation[0];
        let value = values.eval(cfg.state, x).expect("valuation within the bound");
        let holds = value <= alpha.map(qi);
        let (s, v) = (f.state.as_deref().unwrap_or(""), f.valuation.as_deref().unwrap_or(""));
        json["threshold"] =
            json!({ "state": s, "valuation": v, "alpha": alpha, "value": fmt_ext(&value), "holds": holds });
        let _ = writeln!(text, "Val({s}, {v}) <= {alpha}: {holds}");
    }
    Ok(Report::ok(json, text))
}

fn divergent_untimed(g: &WeightedGame) -> Report {
    let r = is_divergent_untimed(g);
    match r.witness {
        None => Report::ok(json!({ "divergent": true }), "divergent: true\n".to_string()),
        Some(w) => {
            let (wj, wt) = witness_untimed(g, &w);
            Report {
                json: json!({ "divergent": false, "witness": wj }),
                text: format!("divergent: false\n{wt}"),
                exit_code: EXIT_NOT_DIVERGENT,
            }
        }
    }
}

fn divergent_timed(g: &TimedGame) -> Report {
    let ra = RegionAutomaton::build(g);
    match is_divergent_timed_with(g, &ra).witness {
        None => Report::ok(json!({ "divergent": true }), "divergent: true\n".to_string()),
        Some(w) => {
            let (wj, wt) = witness_timed(g, &ra, &w);
            Report {
                json: json!({ "divergent": false, "witness": wj }),
                text: format!("divergent: false\n{wt}"),
                exit_code: EXIT_NOT_DIVERGENT,
            }
        }
    }
}

fn strategy_text(g: &WeightedGame, s: &Strategy, fuel: u64) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        if g.owner(v) != s.player || g.is_target(v) {
            continue;
        }
        if let Some(e) = s.choose(v, fuel) {
            let _ = writeln!(out, "  {}: {}", g.name(v), g.edge(e).action);
        }
    }
    out
}

fn strategy_untimed(g: &WeightedGame, f: &Flags) -> Result<Report, Report> {
    let values = solve(g).map_err(solve_error)?;
    let max = extract_max_strategy(g, &values).map_err(solve_error)?;
    let min = values.0.iter().all(ExtValue::is_finite).then(|| extract_min_strategy(g, &values)).transpose();
    let min = min.map_err(solve_error)?;
    let fuel = min_fuel(g);
    let mut text = format!("max:\n{}", strategy_text(g, &max, fuel));
    match &min {
        Some(m) => {
            let _ = write!(text, "min (fuel {fuel}):\n{}", strategy_text(g, m, fuel));
        }
        None => text.push_str("min: none (some values are infinite)\n"),
    }
    let mut json = json!({
        "max": max.to_json(g),
        "min": min.as_ref().map(|m| m.to_json(g)),
    });
    if let Some(name) = &f.vertex {
        let v = vertex_id(g, name)?;
        let s = if g.owner(v) == Owner::Max { Some(&max) } else { min.as_ref() };
        let action = s.and_then(|s| s.choose(v, fuel)).map(|e| g.edge(e).action.clone());
        let _ = writeln!(text, "move at {name}: {}", action.as_deref().unwrap_or("none"));
        json["move"] = json!({ "vertex": name, "action": action });
    }
    Ok(Report::ok(json, text))
}

fn strategy_timed(g: &TimedGame, f: &Flags) -> Result<Report, Report> {
    let eps_text = f.epsilon.as_deref().unwrap_or(DEFAULT_EPSILON);
    let eps = parse_q(eps_text).ok_or_else(|| Report::fail(EXIT_VALIDATION, format!("bad epsilon {eps_text:?}")))?;
    let values = solve_timed(g).map_err(timed_solve_error)?;
    let ra = values.ra();
    let min = extract_timed_strategy(g, &values, Owner::Min, &eps).map_err(timed_solve_error)?;
    let max = extract_timed_strategy(g, &values, Owner::Max, &eps).map_err(timed_solve_error)?;
    let mut json = json!({ "min": min.to_json(g, ra), "max": max.to_json(g, ra) });
    let mut text = format!("epsilon {}, margins {} (min) and {} (max)\n", fmt_q(&eps), fmt_q(&min.margin), fmt_q(&max.margin));
    for (name, s) in [("min", &min), ("max", &max)] {
        let _ = writeln!(text, "{name}:");
        for (n, cells) in s.nodes.iter().enumerate() {
            let Some(cells) = cells else { continue };
            for c in cells {
                let open = if c.cell.lo_closed { "[" } else { "(" };
                let close = if c.cell.hi_closed { "]" } else { ")" };
                let until = c.mv.until.as_ref().map_or("now".to_string(), |y| format!("at x = {}", fmt_q(y)));
                let _ = writeln!(
                    text,
                    "  {} {open}{}, {}{close}: t{} {until}",
                    ra.label(g, n),
                    fmt_q(&c.cell.lo),
                    fmt_q(&c.cell.hi),
                    c.mv.trans
                );
            }
        }
    }
    if let Some(cfg) = configuration(g, f)? {
        let s = if g.state(cfg.state).owner == Owner::Max { &max } else { &min };
        let (d, t) = s.choose(g, ra, &cfg).map_err(timed_solve_error)?;
        let _ = writeln!(text, "move: wait {} then t{t}", fmt_q(&d));
        json["move"] = json!({ "delay": fmt_q(&d), "transition": t });
    }
    Ok(Report::ok(json, text))
}

fn fog_cmd(g: &TimedGame, f: &Flags) -> Result<Report, Report> {
    let ra = RegionAutomaton::build(g);
    let pg = ra.play_digraph();
    let scc = sccs(&pg);
    let chosen = match configuration(g, f)? {
        Some(cfg) => {
            let n = ra.node_of(cfg.state, &cfg.valuation).map_err(timed_error)?;
            let c = scc.component_of[n];
            (!scc.is_trivial(&pg, c)).then_some(c)
        }
        None => (0..scc.components.len()).find(|&c| !scc.is_trivial(&pg, c)),
    };
    let Some(c) = chosen else {
        return Ok(dot_report("digraph fog {\n}\n".to_string(), json!({ "cycle": [], "corners": [], "edges": [] })));
    };
    let cycle = simple_cycle_in(&ra, &scc.components[c]).expect("nontrivial component has a cycle");
    let fog = build_fog(g, &ra, &cycle).map_err(|e| Report::fail(EXIT_INCONSISTENT, e.to_string()))?;
    let nodes: Vec<String> = cycle.nodes(&ra).iter().map(|&n| ra.label(g, n)).collect();
    let edges: Vec<Value> =
        fog.edges.iter().map(|e| json!({ "from": e.from, "to": e.to, "weight": e.weight })).collect();
    let summary = json!({ "cycle": nodes, "corners": fog.corners, "edges": edges });
    Ok(dot_report(fog_dot(&fog), summary))
}

fn approx_cmd(g: &TimedGame, f: &Flags) -> Result<Report, Report> {
    let n = f.granularity.expect("checked with the flags");
    let grid = solve_timed_grid(g, n).map_err(timed_solve_error)?;
    let mut json = grid.to_json(g);
    let mut text = format!("granularity {n}\n");
    for ((s, p), v) in &grid.values {
        let val: Vec<String> = p.iter().map(|&k| fmt_q(&(qi(k as i64) / qi(n as i64)))).collect();
        let _ = writeln!(text, "{} ({}): {}", g.state(*s).name, val.join(", "), fmt_ext(v));
    }
    if let Some(cfg) = configuration(g, f)? {
        let v = grid.get(cfg.state, &cfg.valuation).ok_or_else(|| {
            Report::fail(EXIT_VALIDATION, format!("valuation is not a multiple of 1/{n}"))
        })?;
        let _ = writeln!(text, "value at {} ({}): {}", g.state(cfg.state).name, f.valuation.as_deref().unwrap_or(""), fmt_ext(&v));
        json["value"] = Value::String(fmt_ext(&v));
    }
    Ok(Report::ok(json, text))
}
