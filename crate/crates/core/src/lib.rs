//! Exact solvers for score-based social distance games.
//!
//! Agents of a social network form coalitions; an agent's utility sums a
//! scoring vector over its distances to the other members of its coalition,
//! measured inside the coalition. The crate computes outcomes of maximum
//! social welfare, optionally restricted to individually rational or Nash
//! stable outcomes, with three interchangeable solvers:
//!
//! * [`oracle`]: exhaustive enumeration of all partitions;
//! * [`dp`]: dynamic programming over a nice tree decomposition with a cap on
//!   coalition size;
//! * [`vc`]: branching over a minimum vertex cover with an exact inner count
//!   program.

pub mod bounds;
pub mod dp;
pub mod error;
pub mod instances;
pub mod io;
pub mod model;
pub mod oracle;
pub mod solve;
pub mod stability;
pub mod treewidth;
pub mod vc;

pub use error::{Result, SdgError};
pub use model::{Coalition, Distance, Instance, Outcome, ScoringVector, Welfare};
pub use solve::{SolveMode, SolveResult};
