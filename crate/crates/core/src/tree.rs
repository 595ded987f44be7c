//! TREE hypermedia relations and their translation into constraints.

use std::collections::{HashMap, HashSet};

use crate::rdf::{vocab, Term, Triple};
use crate::solver::{Comparator, ConstraintExpr};
use crate::value::TypedValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    GreaterThan,
    GreaterThanOrEqualTo,
    LessThan,
    LessThanOrEqualTo,
    EqualTo,
    Unconstrained,
}

impl RelationKind {
    pub fn from_class(iri: &str) -> Option<Self> {
        Some(match iri {
            vocab::TREE_GREATER_THAN => RelationKind::GreaterThan,
            vocab::TREE_GREATER_THAN_OR_EQUAL => RelationKind::GreaterThanOrEqualTo,
            vocab::TREE_LESS_THAN => RelationKind::LessThan,
            vocab::TREE_LESS_THAN_OR_EQUAL => RelationKind::LessThanOrEqualTo,
            vocab::TREE_EQUAL => RelationKind::EqualTo,
            _ => return None,
        })
    }

    pub fn class_iri(self) -> Option<&'static str> {
        Some(match self {
            RelationKind::GreaterThan => vocab::TREE_GREATER_THAN,
            RelationKind::GreaterThanOrEqualTo => vocab::TREE_GREATER_THAN_OR_EQUAL,
            RelationKind::LessThan => vocab::TREE_LESS_THAN,
            RelationKind::LessThanOrEqualTo => vocab::TREE_LESS_THAN_OR_EQUAL,
            RelationKind::EqualTo => vocab::TREE_EQUAL,
            RelationKind::Unconstrained => return None,
        })
    }

    pub fn comparator(self) -> Option<Comparator> {
        Some(match self {
            RelationKind::GreaterThan => Comparator::Gt,
            RelationKind::GreaterThanOrEqualTo => Comparator::Ge,
            RelationKind::LessThan => Comparator::Lt,
            RelationKind::LessThanOrEqualTo => Comparator::Le,
            RelationKind::EqualTo => Comparator::Eq,
            RelationKind::Unconstrained => return None,
        })
    }
}

/// One hypermedia relation: a link to `target` whose reachable data has
/// `path` values satisfying `kind` against `boundary`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeRelation {
    pub source_doc: String,
    pub target: String,
    pub kind: RelationKind,
    pub path: Option<String>,
    pub boundary: Option<TypedValue>,
}

impl TreeRelation {
    pub fn unconstrained(source_doc: impl Into<String>, target: impl Into<String>) -> Self {
        TreeRelation {
            source_doc: source_doc.into(),
            target: target.into(),
            kind: RelationKind::Unconstrained,
            path: None,
            boundary: None,
        }
    }

    /// The triples describing this relation, hung off `node`.
    pub fn to_triples(&self, node: Term) -> Vec<Triple> {
        let mut out = vec![Triple::new(
            Term::iri(&self.source_doc),
            Term::iri(vocab::TREE_RELATION),
            node.clone(),
        )];
        if let Some(class) = self.kind.class_iri() {
            out.push(Triple::new(
                node.clone(),
                Term::iri(vocab::RDF_TYPE),
                Term::iri(class),
            ));
        }
        if let Some(path) = &self.path {
            out.push(Triple::new(
                node.clone(),
                Term::iri(vocab::TREE_PATH),
                Term::iri(path),
            ));
        }
        if let Some(boundary) = &self.boundary {
            out.push(Triple::new(
                node.clone(),
                Term::iri(vocab::TREE_VALUE),
                boundary.to_term(),
            ));
        }
        out.push(Triple::new(
            node,
            Term::iri(vocab::TREE_NODE),
            Term::iri(&self.target),
        ));
        out
    }
}

/// Extract every relation of a document.
///
/// Each node carrying a `tree:node` triple yields one relation per target.
/// A node with a missing, unknown, or ambiguous type, path or value yields
/// an `Unconstrained` relation so its target is never lost.
pub fn extract_relations(doc: &[Triple], doc_iri: &str) -> Vec<TreeRelation> {
    let mut props: HashMap<&Term, NodeProps<'_>> = HashMap::new();
    let mut order: Vec<(&Term, &str)> = Vec::new();
    let mut seen: HashSet<(&Term, &str)> = HashSet::new();
    for t in doc {
        let Some(p) = t.predicate.as_iri() else {
            continue;
        };
        match p {
            vocab::TREE_NODE => {
                if let Some(target) = t.object.as_iri() {
                    if seen.insert((&t.subject, target)) {
                        order.push((&t.subject, target));
                    }
                }
            }
            vocab::RDF_TYPE => props.entry(&t.subject).or_default().types.push(&t.object),
            vocab::TREE_PATH => props.entry(&t.subject).or_default().paths.push(&t.object),
            vocab::TREE_VALUE => props.entry(&t.subject).or_default().values.push(&t.object),
            _ => {}
        }
    }

    order
        .into_iter()
        .map(|(node, target)| {
            let constrained = props.get(node).and_then(NodeProps::constraint);
            match constrained {
                Some((kind, path, boundary)) => TreeRelation {
                    source_doc: doc_iri.to_string(),
                    target: target.to_string(),
                    kind,
                    path: Some(path.to_string()),
                    boundary: Some(boundary),
                },
                None => TreeRelation::unconstrained(doc_iri, target),
            }
        })
        .collect()
}

#[derive(Default)]
struct NodeProps<'a> {
    types: Vec<&'a Term>,
    paths: Vec<&'a Term>,
    values: Vec<&'a Term>,
}

impl NodeProps<'_> {
    fn constraint(&self) -> Option<(RelationKind, &str, TypedValue)> {
        let kinds: HashSet<RelationKind> = self
            .types
            .iter()
            .filter_map(|t| t.as_iri().and_then(RelationKind::from_class))
            .collect();
        if kinds.len() != 1 || self.paths.len() != 1 || self.values.len() != 1 {
            return None;
        }
        let kind = *kinds.iter().next()?;
        let path = self.paths[0].as_iri()?;
        let boundary = TypedValue::from_term(self.values[0])?;
        Some((kind, path, boundary))
    }
}

/// The constraint `E` a relation places on values of its path. The variable
/// is named after the path IRI.
pub fn relation_to_constraint(rel: &TreeRelation) -> ConstraintExpr {
    match (rel.kind.comparator(), &rel.path, rel.boundary) {
        (Some(c), Some(path), Some(boundary)) => ConstraintExpr::atom(path.clone(), c, boundary),
        _ => ConstraintExpr::True,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    const DOC: &str = "http://example.org/root";

    fn parse(body: &str) -> Vec<Triple> {
        let text = format!(
            "@prefix tree: <https://w3id.org/tree#> .\n\
             @prefix saref: <https://saref.etsi.org/core/> .\n\
             @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
             @prefix ex: <http://example.org/> .\n{body}"
        );
        parse_turtle(&text, DOC).unwrap()
    }

    fn figure_boundary() -> TypedValue {
        TypedValue::parse_date_time("2022-01-03T09:47:59.000000").unwrap()
    }

    #[test]
    fn figure_relation_is_extracted() {
        let doc = parse(
            r#"<> tree:relation [ a tree:GreaterThanOrEqualToRelation ;
                tree:path saref:hasTimestamp ;
                tree:value "2022-01-03T09:47:59.000000"^^xsd:dateTime ;
                tree:node ex:nextNode ] ."#,
        );
        assert_eq!(
            extract_relations(&doc, DOC),
            vec![TreeRelation {
                source_doc: DOC.into(),
                target: "http://example.org/nextNode".into(),
                kind: RelationKind::GreaterThanOrEqualTo,
                path: Some(vocab::SAREF_HAS_TIMESTAMP.into()),
                boundary: Some(figure_boundary()),
            }]
        );
    }

    #[test]
    fn no_relations() {
        let doc = parse("ex:m1 saref:hasValue 3 .");
        assert!(extract_relations(&doc, DOC).is_empty());
    }

    #[test]
    fn untyped_relation_degrades() {
        let doc = parse(
            "<> tree:relation [ tree:path saref:hasTimestamp ; tree:value 3 ; tree:node ex:n ] .",
        );
        assert_eq!(
            extract_relations(&doc, DOC),
            vec![TreeRelation::unconstrained(DOC, "http://example.org/n")]
        );
    }

    #[test]
    fn malformed_relations_degrade_not_drop() {
        let doc = parse(
            r#"<> tree:relation
                 [ a tree:PrefixRelation ; tree:path ex:p ; tree:value "ab" ; tree:node ex:a ],
                 [ a tree:LessThanRelation ; tree:path ex:p ; tree:value "x"^^xsd:integer ; tree:node ex:b ],
                 [ a tree:LessThanRelation ; tree:path ex:p, ex:q ; tree:value 4 ; tree:node ex:c ],
                 [ a tree:LessThanRelation ; tree:value 4 ; tree:node ex:d ] ."#,
        );
        let rels = extract_relations(&doc, DOC);
        assert_eq!(rels.len(), 4);
        assert!(rels.iter().all(|r| r.kind == RelationKind::Unconstrained));
        assert!(rels
            .iter()
            .all(|r| relation_to_constraint(r) == ConstraintExpr::True));
    }

    #[test]
    fn every_tree_node_object_becomes_a_target() {
        let doc = parse(
            "<> tree:relation [ a tree:LessThanRelation ; tree:path ex:p ; tree:value 4 ; tree:node ex:a ] .\n\
             <> tree:relation [ a tree:GreaterThanOrEqualToRelation ; tree:path ex:p ; tree:value 4 ; tree:node ex:a ] .\n\
             ex:other tree:node ex:b .",
        );
        let rels = extract_relations(&doc, DOC);
        let targets: HashSet<&str> = rels.iter().map(|r| r.target.as_str()).collect();
        assert_eq!(
            targets,
            ["http://example.org/a", "http://example.org/b"].into()
        );
        assert_eq!(rels.len(), 3);
    }

    #[test]
    fn translation_of_figure_relation() {
        let rel = TreeRelation {
            source_doc: DOC.into(),
            target: "http://example.org/nextNode".into(),
            kind: RelationKind::GreaterThanOrEqualTo,
            path: Some(vocab::SAREF_HAS_TIMESTAMP.into()),
            boundary: Some(figure_boundary()),
        };
        assert_eq!(
            relation_to_constraint(&rel),
            ConstraintExpr::atom(
                vocab::SAREF_HAS_TIMESTAMP,
                Comparator::Ge,
                figure_boundary()
            )
        );
    }

    #[test]
    fn translation_of_less_than_integer() {
        let rel = TreeRelation {
            source_doc: DOC.into(),
            target: "t".into(),
            kind: RelationKind::LessThan,
            path: Some("v".into()),
            boundary: Some(TypedValue::integer(10)),
        };
        assert_eq!(
            relation_to_constraint(&rel),
            ConstraintExpr::atom("v", Comparator::Lt, TypedValue::integer(10))
        );
        assert_eq!(
            relation_to_constraint(&TreeRelation::unconstrained(DOC, "t")),
            ConstraintExpr::True
        );
    }

    /// Exhaustive small-domain check of translation soundness.
    #[test]
    fn translation_matches_comparator_semantics() {
        type Holds = fn(i64, i64) -> bool;
        let kinds: [(RelationKind, Holds); 5] = [
            (RelationKind::GreaterThan, |x: i64, b: i64| x > b),
            (RelationKind::GreaterThanOrEqualTo, |x, b| x >= b),
            (RelationKind::LessThan, |x, b| x < b),
            (RelationKind::LessThanOrEqualTo, |x, b| x <= b),
            (RelationKind::EqualTo, |x, b| x == b),
        ];
        for (kind, holds) in kinds {
            for b in -3..=3 {
                let rel = TreeRelation {
                    source_doc: DOC.into(),
                    target: "t".into(),
                    kind,
                    path: Some("p".into()),
                    boundary: Some(TypedValue::integer(b)),
                };
                let e = relation_to_constraint(&rel);
                for x in -5..=5 {
                    assert_eq!(
                        e.evaluate_at(&TypedValue::integer(x)),
                        Some(holds(x, b)),
                        "{kind:?} x={x} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn to_triples_round_trips_through_extraction() {
        let rel = TreeRelation {
            source_doc: DOC.into(),
            target: "http://example.org/leaf".into(),
            kind: RelationKind::LessThanOrEqualTo,
            path: Some(vocab::SAREF_HAS_TIMESTAMP.into()),
            boundary: Some(figure_boundary()),
        };
        let triples = rel.to_triples(Term::blank("r0"));
        assert_eq!(extract_relations(&triples, DOC), vec![rel]);
    }
}
