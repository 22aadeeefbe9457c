//! Random low-density subset-sum instances and their hardness for ordinary
//! branch-and-bound.
//!
//! The crate is organised around the life cycle of an experiment:
//!
//! * [`instance`] draws coefficients `a_j ~ U{1..⌊10^{n/2}⌋}` with exact
//!   big-integer arithmetic and sets `β = ⌊r Σ a_j⌋` (or `⌈·⌉`).
//! * [`solver`] runs depth-first branch-and-bound on single binary variables,
//!   pruning only when the LP relaxation is infeasible, and counts nodes.
//! * [`oracles`] decides feasibility independently (brute force, meet in the
//!   middle, dynamic programming) and checks the structural properties that
//!   force a large search tree.
//! * [`bounds`] evaluates the closed-form probability and node-count bounds.
//! * [`harness`] sweeps seeds and sizes and aggregates the observations.
//! * [`cli`] is the command-line front end.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod harness;
pub mod instance;
pub mod numeric;
pub mod oracles;
pub mod params;
pub mod solver;

pub use error::{Error, Result};
pub use instance::{GeneratorConfig, Instance, Rounding};
pub use params::{Constants, Exponent, Ratio};
pub use solver::{BranchOrder, FirstChild, SolveConfig, SolveReport, Verdict};

/// Name of the pseudo-random generator every seeded stream uses.
pub const PRNG_NAME: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";
