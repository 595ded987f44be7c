use std::collections::HashMap;

use super::{PatternTerm, Term, Triple};

/// Set-semantic in-memory triple store with subject, predicate, object and
/// subject+predicate indexes.
///
/// Single writer or many readers; wrap it in a lock if it must be shared.
#[derive(Debug, Default, Clone)]
pub struct TripleStore {
    triples: Vec<Triple>,
    ids: HashMap<Triple, usize>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_predicate: HashMap<Term, Vec<usize>>,
    by_object: HashMap<Term, Vec<usize>>,
    by_subject_predicate: HashMap<(Term, Term), Vec<usize>>,
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Returns `true` if the triple was not already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.ids.contains_key(&triple) {
            return false;
        }
        let id = self.triples.len();
        self.by_subject
            .entry(triple.subject.clone())
            .or_default()
            .push(id);
        self.by_predicate
            .entry(triple.predicate.clone())
            .or_default()
            .push(id);
        self.by_object
            .entry(triple.object.clone())
            .or_default()
            .push(id);
        self.by_subject_predicate
            .entry((triple.subject.clone(), triple.predicate.clone()))
            .or_default()
            .push(id);
        self.ids.insert(triple.clone(), id);
        self.triples.push(triple);
        true
    }

    /// Insert the triples of one dereferenced document. Blank nodes are
    /// skolemized with the document IRI so labels from different documents
    /// never collide. Returns the number of newly added triples.
    pub fn insert_document(
        &mut self,
        document: &str,
        triples: impl IntoIterator<Item = Triple>,
    ) -> usize {
        let skolem = |term: Term| match term {
            Term::Blank(label) => Term::Blank(format!("{document}#{label}")),
            other => other,
        };
        triples
            .into_iter()
            .map(|t| Triple {
                subject: skolem(t.subject),
                predicate: t.predicate,
                object: skolem(t.object),
            })
            .filter(|t| self.insert(t.clone()))
            .count()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.ids.contains_key(triple)
    }

    /// All triples agreeing with every concrete position of the pattern.
    pub fn match_pattern(
        &self,
        subject: PatternTerm<'_>,
        predicate: PatternTerm<'_>,
        object: PatternTerm<'_>,
    ) -> Vec<&Triple> {
        let candidates: Box<dyn Iterator<Item = &Triple>> = match (subject, predicate, object) {
            (Some(s), Some(p), _) => self.lookup(
                self.by_subject_predicate
                    .get(&(s.clone(), p.clone()))
                    .map(Vec::as_slice),
            ),
            (Some(s), None, _) => self.lookup(self.by_subject.get(s).map(Vec::as_slice)),
            (None, _, Some(o)) => self.lookup(self.by_object.get(o).map(Vec::as_slice)),
            (None, Some(p), None) => self.lookup(self.by_predicate.get(p).map(Vec::as_slice)),
            (None, None, None) => Box::new(self.triples.iter()),
        };
        candidates
            .filter(|t| {
                subject.is_none_or(|s| &t.subject == s)
                    && predicate.is_none_or(|p| &t.predicate == p)
                    && object.is_none_or(|o| &t.object == o)
            })
            .collect()
    }

    fn lookup<'a>(&'a self, ids: Option<&'a [usize]>) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        Box::new(ids.unwrap_or(&[]).iter().map(|&i| &self.triples[i]))
    }
}

impl Extend<Triple> for TripleStore {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl FromIterator<Triple> for TripleStore {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut store = TripleStore::new();
        store.extend(iter);
        store
    }
}
