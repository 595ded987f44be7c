//! Satisfiability of single-variable order constraints and the two
//! reachability criteria built on it.

mod expr;
mod interval;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use expr::{Atom, Comparator, ConstraintExpr};
pub use interval::{to_interval_set, Axis, Endpoint, Interval, IntervalSet, SolverError};

use crate::query::{relevant_filter, Query};
use crate::tree::{relation_to_constraint, RelationKind, TreeRelation};

/// Does some single value `x` satisfy both `f` and `e`?
///
/// Variable names are ignored: both sides are read as constraints on the
/// one value bound to the same path. When `f` mentions several variables
/// (several patterns share the path predicate) the link is needed if any one
/// of them can land in `e`, so the answer is the disjunction over `f`'s
/// variables of `f` weakened to that variable. Constants of incomparable
/// kinds make the answer `true`.
pub fn satisfiable(f: &ConstraintExpr, e: &ConstraintExpr) -> bool {
    let vars = f.variables();
    if vars.len() > 1 {
        return vars
            .iter()
            .any(|v| satisfiable_single(&f.restrict_to(&[*v].into()), e));
    }
    satisfiable_single(f, e)
}

fn satisfiable_single(f: &ConstraintExpr, e: &ConstraintExpr) -> bool {
    let Ok(axis) = Axis::infer([f, e]) else {
        return true;
    };
    let sets = interval::interval_set_on(f, axis)
        .and_then(|sf| Ok((sf, interval::interval_set_on(e, axis)?)));
    match sets {
        Ok((sf, se)) => !sf.intersection(&se).is_empty(),
        Err(_) => true,
    }
}

/// Decides whether a discovered link must be dereferenced.
#[derive(Debug, Clone)]
pub enum ReachabilityCriterion {
    /// Follow every `tree:node` link regardless of its constraints.
    PredicateBased,
    /// Follow a link only if the query filter, pushed down onto the
    /// relation's path, is satisfiable together with the relation constraints.
    RuleBased(Arc<Query>),
}

impl ReachabilityCriterion {
    pub fn rule_based(query: Query) -> Self {
        ReachabilityCriterion::RuleBased(Arc::new(query))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReachabilityCriterion::PredicateBased => "predicate",
            ReachabilityCriterion::RuleBased(_) => "rule",
        }
    }

    /// Decide for `rel` given every relation to the same target found in the
    /// same document (`rel` itself may or may not be among them).
    pub fn decide(&self, rel: &TreeRelation, accumulated: &[TreeRelation]) -> bool {
        let mut all: Vec<&TreeRelation> = accumulated
            .iter()
            .filter(|r| r.target == rel.target)
            .collect();
        if !all.contains(&rel) {
            all.push(rel);
        }
        self.decide_target(all)
    }

    /// Decide one target from all relations pointing at it. Constraints on
    /// the same path are conjoined; the link is pruned when any path's
    /// pushed-down filter is unsatisfiable together with them.
    pub fn decide_target<'a>(&self, relations: impl IntoIterator<Item = &'a TreeRelation>) -> bool {
        let query = match self {
            ReachabilityCriterion::PredicateBased => return true,
            ReachabilityCriterion::RuleBased(q) => q,
        };
        let mut per_path: BTreeMap<&str, Vec<ConstraintExpr>> = BTreeMap::new();
        for rel in relations {
            if rel.kind == RelationKind::Unconstrained {
                continue;
            }
            if let Some(path) = rel.path.as_deref() {
                per_path
                    .entry(path)
                    .or_default()
                    .push(relation_to_constraint(rel));
            }
        }
        per_path.into_iter().all(|(path, constraints)| {
            let f = relevant_filter(query, path);
            satisfiable(&f, &ConstraintExpr::conjunction(constraints))
        })
    }
}

impl fmt::Display for ReachabilityCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;
    use crate::rdf::vocab;
    use crate::value::TypedValue;

    fn dt(s: &str) -> TypedValue {
        TypedValue::parse_date_time(s).unwrap()
    }

    fn t(c: Comparator, s: &str) -> ConstraintExpr {
        ConstraintExpr::atom("t", c, dt(s))
    }

    fn figure_relation() -> TreeRelation {
        TreeRelation {
            source_doc: "http://example.org/root".into(),
            target: "http://example.org/nextNode".into(),
            kind: RelationKind::GreaterThanOrEqualTo,
            path: Some(vocab::SAREF_HAS_TIMESTAMP.into()),
            boundary: Some(dt("2022-01-03T09:47:59")),
        }
    }

    /// Dense sampling plus endpoint checks, independent of interval sets.
    fn sampled_oracle(f: &ConstraintExpr, e: &ConstraintExpr) -> bool {
        let both = f.clone().and(e.clone());
        let mut points: Vec<i64> = both
            .atoms()
            .iter()
            .map(|a| a.value.magnitude() as i64)
            .collect();
        let lo = *points.iter().min().unwrap();
        let hi = *points.iter().max().unwrap();
        let step = ((hi - lo) / 1000).max(1);
        points.extend((lo - 10 * step..=hi + 10 * step).step_by(step as usize));
        let extra: Vec<i64> = points.iter().flat_map(|p| [p - 1, p + 1]).collect();
        points.extend(extra);
        points
            .into_iter()
            .any(|p| both.evaluate_at(&TypedValue::date_time_micros(p)) == Some(true))
    }

    #[test]
    fn overlapping_day_range_is_satisfiable() {
        let f =
            t(Comparator::Ge, "2022-01-05T00:00:00").and(t(Comparator::Lt, "2022-01-06T00:00:00"));
        let e = t(Comparator::Ge, "2022-01-03T09:47:59");
        assert!(sampled_oracle(&f, &e));
        assert!(satisfiable(&f, &e));
    }

    #[test]
    fn disjoint_range_is_pruned() {
        let f = t(Comparator::Lt, "2022-01-01T00:00:00");
        let e = t(Comparator::Ge, "2022-01-03T09:47:59");
        assert!(!sampled_oracle(&f, &e));
        assert!(!satisfiable(&f, &e));
    }

    #[test]
    fn true_filter_and_contradiction() {
        let e = t(Comparator::Ge, "2022-01-03T09:47:59");
        assert!(satisfiable(&ConstraintExpr::True, &e));
        let five = TypedValue::integer(5);
        assert!(!satisfiable(
            &ConstraintExpr::atom("t", Comparator::Eq, five),
            &ConstraintExpr::atom("t", Comparator::Ne, five),
        ));
    }

    #[test]
    fn incomparable_kinds_are_followed() {
        let f = ConstraintExpr::atom("t", Comparator::Lt, TypedValue::integer(0));
        let e = t(Comparator::Ge, "2022-01-03T09:47:59");
        assert!(satisfiable(&f, &e));
    }

    #[test]
    fn multi_variable_filter_is_a_disjunction() {
        let int = TypedValue::integer;
        let f = ConstraintExpr::atom("a", Comparator::Lt, int(5)).and(ConstraintExpr::atom(
            "b",
            Comparator::Gt,
            int(10),
        ));
        assert!(satisfiable(
            &f,
            &ConstraintExpr::atom("p", Comparator::Ge, int(20))
        ));
        assert!(satisfiable(
            &f,
            &ConstraintExpr::atom("p", Comparator::Le, int(0))
        ));
        assert!(!satisfiable(
            &f,
            &ConstraintExpr::atom("p", Comparator::Ge, int(5)).and(ConstraintExpr::atom(
                "p",
                Comparator::Le,
                int(10)
            ))
        ));
    }

    #[test]
    fn predicate_based_always_follows() {
        let rel = figure_relation();
        assert!(ReachabilityCriterion::PredicateBased.decide(&rel, &[]));
    }

    #[test]
    fn rule_based_prunes_disjoint_filter() {
        let q = parse_query(
            "PREFIX saref: <https://saref.etsi.org/core/>
             PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
             SELECT ?m WHERE { ?m saref:hasTimestamp ?t }
             FILTER(?t < \"2022-01-01T00:00:00\"^^xsd:dateTime)",
        )
        .unwrap();
        let c = ReachabilityCriterion::rule_based(q);
        let rel = figure_relation();
        assert!(!c.decide(&rel, &[]));

        let unconstrained = TreeRelation {
            kind: RelationKind::Unconstrained,
            boundary: None,
            ..rel
        };
        assert!(c.decide(&unconstrained, &[]));
    }

    #[test]
    fn bounds_to_the_same_target_are_conjoined() {
        let q = parse_query(
            "PREFIX saref: <https://saref.etsi.org/core/>
             PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
             SELECT ?m WHERE { ?m saref:hasTimestamp ?t }
             FILTER(?t >= \"2022-02-01T00:00:00\"^^xsd:dateTime)",
        )
        .unwrap();
        let c = ReachabilityCriterion::rule_based(q);
        let lower = figure_relation();
        let upper = TreeRelation {
            kind: RelationKind::LessThan,
            boundary: Some(dt("2022-01-10T00:00:00")),
            ..lower.clone()
        };
        // Each bound alone admits February; together they do not.
        assert!(c.decide(&lower, &[]));
        assert!(!c.decide(&lower, std::slice::from_ref(&upper)));
    }
}
