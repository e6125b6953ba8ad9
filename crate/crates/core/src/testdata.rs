//! Example games shared by unit tests, integration tests and the CLI.

pub const FIG1: &str = include_str!("../data/fig1.wg");
pub const WAIT1: &str = include_str!("../data/wait1.wtg");
pub const LOOP_P: &str = include_str!("../data/loopP.wtg");
pub const LOOP_N: &str = include_str!("../data/loopN.wtg");
pub const LOOP_0: &str = include_str!("../data/loop0.wtg");
