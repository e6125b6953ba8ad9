//! Values of divergent weighted games and divergent weighted timed games.

pub mod corner;
pub mod corpus;
pub mod dot;
pub mod ext;
pub mod game;
pub mod graph_analysis;
pub mod pwa;
pub mod strategy;
pub mod testdata;
pub mod timed;
pub mod timed_solver;
pub mod untimed;

pub use ext::{ArithError, ExtValue, Extended};
pub use game::{GameError, Owner, Play, WeightedGame};
