//! RDF data model, a Turtle-subset reader/writer, and the in-memory triple
//! store the traversal engine accumulates documents into.

mod isomorphism;
pub(crate) mod lexer;
mod store;
pub(crate) mod turtle;

use std::fmt;

pub use isomorphism::isomorphic;
pub use store::TripleStore;
pub use turtle::{parse_turtle, serialize_turtle, RdfError};

/// Well-known vocabulary IRIs.
pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
    pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

    pub const TREE: &str = "https://w3id.org/tree#";
    pub const TREE_RELATION: &str = "https://w3id.org/tree#relation";
    pub const TREE_NODE: &str = "https://w3id.org/tree#node";
    pub const TREE_PATH: &str = "https://w3id.org/tree#path";
    pub const TREE_VALUE: &str = "https://w3id.org/tree#value";
    pub const TREE_GREATER_THAN: &str = "https://w3id.org/tree#GreaterThanRelation";
    pub const TREE_GREATER_THAN_OR_EQUAL: &str =
        "https://w3id.org/tree#GreaterThanOrEqualToRelation";
    pub const TREE_LESS_THAN: &str = "https://w3id.org/tree#LessThanRelation";
    pub const TREE_LESS_THAN_OR_EQUAL: &str = "https://w3id.org/tree#LessThanOrEqualToRelation";
    pub const TREE_EQUAL: &str = "https://w3id.org/tree#EqualToRelation";

    pub const SAREF: &str = "https://saref.etsi.org/core/";
    pub const SAREF_HAS_TIMESTAMP: &str = "https://saref.etsi.org/core/hasTimestamp";
    pub const SAREF_HAS_VALUE: &str = "https://saref.etsi.org/core/hasValue";
    pub const SAREF_MADE_BY: &str = "https://saref.etsi.org/core/measurementMadeBy";

    pub const EX: &str = "http://example.org/";

    /// Prefixes emitted by the serializer, in output order.
    pub const WELL_KNOWN_PREFIXES: &[(&str, &str)] = &[
        ("rdf", RDF),
        ("xsd", XSD),
        ("tree", TREE),
        ("saref", SAREF),
        ("ex", EX),
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: Option<String>,
    language: Option<String>,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language.into()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

/// An RDF term. Literal equality is lexical form plus datatype (and
/// language tag); value-space comparison lives in [`crate::value`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::Blank(label.into())
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn plain_literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::plain(lexical))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }
}

/// N-Triples style rendering.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                write!(f, "\"{}\"", turtle::escape_string(&lit.lexical))?;
                if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")
                } else if let Some(dt) = &lit.datatype {
                    write!(f, "^^<{dt}>")
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    /// Panics if the subject is a literal or the predicate is not an IRI.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        assert!(!subject.is_literal(), "literal in subject position");
        assert!(
            matches!(predicate, Term::Iri(_)),
            "predicate must be an IRI"
        );
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A triple pattern position: a concrete term or a wildcard.
pub type PatternTerm<'a> = Option<&'a Term>;
