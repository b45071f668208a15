//! Chvátal-Gomory cut separation with learned constraint screening.
//!
//! The crate bundles everything needed to study a pure cutting-plane loop on
//! small generated MILPs: an LP solver with tableau access, a branch-and-bound
//! solver with a solution pool, GMI and exact CG separators, a bipartite graph
//! network that predicts which rows the separator needs, and an evaluation
//! harness comparing the reduced separator with the full one.

pub mod bnb;
pub mod cutloop;
pub mod features;
mod error;
pub mod gnn;
pub mod harness;
pub mod instgen;
pub mod lp;
pub mod milp;
pub mod separators;

pub use error::{Error, Result};
