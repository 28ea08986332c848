//! Game representation: networks, scoring vectors, coalitions, outcomes and
//! exact welfare arithmetic.

mod instance;
pub mod mask;
mod outcome;
mod utility;
mod welfare;

pub use instance::{Distance, Instance, ScoringVector};
pub use outcome::{validate_partition, Coalition, Outcome};
pub use utility::{
    coalition_welfare, distances_within, member_utilities, utility, welfare, DistanceMatrix,
};
pub use welfare::Welfare;
