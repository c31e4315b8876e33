//! Tree maximal operators, weak-L^p norms, sharp Bellman-type bounds
//! and the extremal functions attaining them, on discretized trees.
//!
//! The library models a non-atomic probability space as `[0,1]` with a
//! uniform tree partition ([`partition`]), computes the associated
//! maximal operator and its distribution function ([`maximal`]), the
//! weak-L^p quasi-norm and its equivalent norm ([`norms`]), and the
//! constructive rearrangement lemmas ([`rearrange`]). On top of that it
//! evaluates the closed-form Bellman functions for the maximal
//! operator's level-set measure under integral and weak-norm
//! constraints ([`bellman`]), builds the extremal functions that attain
//! them ([`extremal`]), and verifies both directions numerically with a
//! seeded search harness ([`search`]).
//!
//! Every capability has a runnable example under `examples/`; the
//! `bellman-lab` binary exposes the same operations as subcommands.

pub mod bellman;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod maximal;
pub mod norms;
pub mod partition;
pub mod profile;
pub mod rearrange;
pub mod search;
mod window;

pub use error::{Error, Result};
pub use partition::{build_tree, NodeId, StepFunction, TreePartition};
