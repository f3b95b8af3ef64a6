//! Nash, secure and subgame perfect equilibria of turn-based multiplayer
//! quantitative reachability games on finite graphs.
//!
//! The crate works on explicit arenas ([`GameGraph`]), unravels them into
//! truncated trees, verifies strategy profiles there and transforms secure
//! equilibria into finite-memory ones.

pub mod construction;
pub mod cost;
pub mod decider;
pub mod format;
pub mod game;
pub mod play;
pub mod preference;
pub mod solver;
pub mod moore;
pub mod tree;
pub mod zero_sum;

pub use cost::{Cost, CostProfile, Rational};
pub use game::{GameBuilder, GameGraph, PlayerSet, ValidationReport, VertexId};
pub use play::{History, Lasso};
