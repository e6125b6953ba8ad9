use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use divgame_cli::{run_cli, CliRequest, Command, Flags, EXIT_NOT_DIVERGENT, EXIT_OK, EXIT_VALIDATION};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Optimal values (refuses non-divergent games).
    Solve,
    /// Divergence check with a witness on failure.
    Divergent,
    /// Region automaton as DOT.
    Regions,
    /// Corner graph as DOT.
    Corners,
    /// Folded graph of one region cycle as DOT.
    Fog,
    /// Values on a 1/N grid.
    Approx,
    /// Optimal (or eps-optimal) strategies.
    Strategy,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Solve => Command::Solve,
            Cmd::Divergent => Command::Divergent,
            Cmd::Regions => Command::Regions,
            Cmd::Corners => Command::Corners,
            Cmd::Fog => Command::Fog,
            Cmd::Approx => Command::Approx,
            Cmd::Strategy => Command::Strategy,
        }
    }
}

/// Solver for divergent weighted games and one-clock weighted timed games.
#[derive(Debug, Parser)]
#[command(name = "divgame", version)]
struct Args {
    command: Cmd,
    /// A `.wg` (untimed) or `.wtg` (timed) game file.
    input: PathBuf,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Print the game (or its region automaton) as DOT.
    #[arg(long)]
    dot: bool,
    /// Decide Val <= ALPHA at --vertex or --state/--valuation.
    #[arg(long, value_name = "ALPHA", allow_hyphen_values = true)]
    threshold: Option<String>,
    #[arg(long)]
    vertex: Option<String>,
    #[arg(long)]
    state: Option<String>,
    /// Comma-separated rationals, one per clock.
    #[arg(long)]
    valuation: Option<String>,
    #[arg(long, value_name = "N")]
    granularity: Option<u32>,
    /// Rational, defaults to 1/10.
    #[arg(long)]
    epsilon: Option<String>,
    /// Solve an untimed game with the brute-force oracle even if it is not divergent.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION as u8 } else { EXIT_OK as u8 });
        }
    };
    let request = CliRequest {
        command: args.command.into(),
        input: args.input,
        flags: Flags {
            json: args.json,
            dot: args.dot,
            threshold: args.threshold,
            vertex: args.vertex,
            state: args.state,
            valuation: args.valuation,
            granularity: args.granularity,
            epsilon: args.epsilon,
            force: args.force,
        },
    };
    let report = run_cli(&request);
    let body = report.body(request.flags.json);
    if report.exit_code == EXIT_OK || report.exit_code == EXIT_NOT_DIVERGENT {
        let _ = std::io::stdout().write_all(body.as_bytes());
    } else {
        let _ = std::io::stderr().write_all(body.as_bytes());
    }
    ExitCode::from(report.exit_code as u8)
}
