//! Exact tools for turning multi-allocations of indivisible items into
//! allocations: valuations, picking games, the multigraph token game, the
//! halving reduction, maximin shares and a certification harness.

pub mod allocation;
pub mod harness;
pub mod itemset;
pub mod mms;
pub mod multigraph;
pub mod picking_game;
pub mod rational;
pub mod reduction;
pub mod valuations;

pub use allocation::MultiAllocation;
pub use itemset::ItemSet;
pub use rational::Rational;
pub use valuations::{SetFunction, Valuation};
