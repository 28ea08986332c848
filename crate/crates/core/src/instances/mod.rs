//! Fixture networks, the hardness reduction, and seeded random generators.

mod fixtures;
mod random;
mod reduction;

pub use fixtures::{make_lemma2, make_lemma3, Expectation, Fixture, UtilityAnnotation};
pub use random::{
    random_bounded_degree, random_instance, random_partial_ktree, random_tree, GraphFilter,
};
pub use reduction::{
    all_two_triangle_graphs, is_three_colorable, random_triangle_covered, reduce_3ctcg,
    TriangleCoveredGraph,
};
