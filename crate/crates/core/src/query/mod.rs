//! The mini query language: SELECT over a basic graph pattern with an
//! optional FILTER of variable/constant comparisons.

mod eval;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use eval::{evaluate, evaluate_with_stats, EvalStats};
pub use parser::parse_query;

use crate::rdf::Term;
use crate::solver::ConstraintExpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported query feature: {0}")]
    Unsupported(String),
    #[error("variable ?{0} is not bound by the graph pattern")]
    UnboundVariable(String),
}

/// A pattern position: a concrete term or a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Term(Term),
    Var(String),
}

impl PatternTerm {
    pub fn var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Term(t) => write!(f, "{t}"),
            PatternTerm::Var(v) => write!(f, "?{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    projected: Vec<String>,
    bgp: Vec<TriplePattern>,
    filter: Option<ConstraintExpr>,
}

impl Query {
    /// Checks that every projected and filtered variable occurs in the
    /// pattern. `None` for `projected` means `SELECT *`.
    pub fn new(
        projected: Option<Vec<String>>,
        bgp: Vec<TriplePattern>,
        filter: Option<ConstraintExpr>,
    ) -> Result<Self, QueryError> {
        let mut bgp_vars: Vec<String> = Vec::new();
        for pattern in &bgp {
            for v in pattern.positions().into_iter().filter_map(PatternTerm::var) {
                if !bgp_vars.iter().any(|b| b == v) {
                    bgp_vars.push(v.to_string());
                }
            }
        }
        let projected = match projected {
            Some(vars) => {
                if let Some(missing) = vars.iter().find(|v| !bgp_vars.contains(v)) {
                    return Err(QueryError::UnboundVariable(missing.clone()));
                }
                vars
            }
            None => bgp_vars
                .iter()
                .filter(|v| !v.starts_with("_:"))
                .cloned()
                .collect(),
        };
        if let Some(f) = &filter {
            if let Some(missing) = f
                .variables()
                .into_iter()
                .find(|v| !bgp_vars.iter().any(|b| b == v))
            {
                return Err(QueryError::UnboundVariable(missing.to_string()));
            }
        }
        Ok(Query {
            projected,
            bgp,
            filter,
        })
    }

    pub fn projected(&self) -> &[String] {
        &self.projected
    }

    pub fn bgp(&self) -> &[TriplePattern] {
        &self.bgp
    }

    pub fn filter(&self) -> Option<&ConstraintExpr> {
        self.filter.as_ref()
    }

    /// The same query projecting every pattern variable.
    pub fn select_all(&self) -> Query {
        Query::new(None, self.bgp.clone(), self.filter.clone()).expect("already validated")
    }
}

/// One solution: projected variable name to term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Binding(BTreeMap<String, Term>);

impl Binding {
    pub fn new() -> Self {
        Binding(BTreeMap::new())
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, term: Term) {
        self.0.insert(var.into(), term);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn project(&self, vars: &[String]) -> Binding {
        Binding(
            vars.iter()
                .filter_map(|v| self.0.get(v).map(|t| (v.clone(), t.clone())))
                .collect(),
        )
    }
}

/// The query filter pushed down onto the values of `path`.
///
/// The variables considered are the objects of patterns `?s <path> ?v`.
/// Comparisons over any other variable are replaced by TRUE (after
/// negation normal form), which can only weaken the filter. Returns TRUE if
/// the path binds no variable or the query has no filter.
pub fn relevant_filter(q: &Query, path: &str) -> ConstraintExpr {
    let Some(filter) = q.filter() else {
        return ConstraintExpr::True;
    };
    let targeted: BTreeSet<&str> = q
        .bgp()
        .iter()
        .filter(|p| matches!(&p.predicate, PatternTerm::Term(Term::Iri(iri)) if iri == path))
        .filter_map(|p| p.object.var())
        .collect();
    if targeted.is_empty() {
        return ConstraintExpr::True;
    }
    filter.restrict_to(&targeted)
}
