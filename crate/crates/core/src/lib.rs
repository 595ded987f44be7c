//! Link-traversal query processing over TREE-fragmented RDF documents.
//!
//! The engine dereferences seed documents, extracts `tree:relation`
//! hypermedia controls, and follows a link only when the query's filter,
//! pushed down onto the relation's path, is satisfiable together with the
//! relation's constraint. A predicate-based criterion that follows every
//! link is provided as the baseline.

pub mod fragmenter;
pub mod harness;
pub mod query;
pub mod rdf;
pub mod solver;
pub mod traversal;
pub mod tree;
pub mod value;

pub use query::{evaluate, parse_query, relevant_filter, Binding, Query};
pub use rdf::{parse_turtle, serialize_turtle, Term, Triple, TripleStore};
pub use solver::{
    satisfiable, to_interval_set, ConstraintExpr, IntervalSet, ReachabilityCriterion,
};
pub use traversal::{
    traverse_and_query, Fetcher, TraversalMetrics, TraversalOptions, TraversalResult,
};
pub use tree::{extract_relations, relation_to_constraint, RelationKind, TreeRelation};
pub use value::TypedValue;
