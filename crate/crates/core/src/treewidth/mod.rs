//! Nice tree decompositions: construction, validation and JSON form.

mod elimination;
mod nice;

pub use elimination::{
    best_ordering, exact_ordering, min_fill_ordering, ordering_width, EXACT_MAX_N,
};
pub use nice::{
    build_nice_decomposition, from_ordering, validate_decomposition, NiceTreeDecomposition,
    NodeKind, TdNode, Violation,
};
