//! The traversal engine: dereference, extract relations, decide each
//! discovered link, accumulate triples, then evaluate the query.

mod fetch;

use std::collections::{HashSet, VecDeque};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

pub use fetch::{FetchError, FetchedDocument, Fetcher, Scheme, TURTLE_MEDIA_TYPE};

use crate::query::{evaluate_with_stats, Binding, Query};
use crate::rdf::{parse_turtle, RdfError, TripleStore};
use crate::solver::ReachabilityCriterion;
use crate::tree::{extract_relations, TreeRelation};

#[derive(Debug, Error)]
pub enum TraversalError {
    #[error("no seed IRIs given")]
    NoSeeds,
    #[error("seed {iri} could not be fetched: {source}")]
    SeedUnreachable {
        iri: String,
        #[source]
        source: FetchError,
    },
    #[error("seed {iri} is not valid Turtle: {message}")]
    SeedUnparsable { iri: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraversalOptions {
    /// Global budget for the whole traversal.
    pub timeout: Duration,
    /// Fetches in flight at once.
    pub fetch_parallelism: usize,
}

impl Default for TraversalOptions {
    fn default() -> Self {
        TraversalOptions {
            timeout: Duration::from_secs(120),
            fetch_parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraversalMetrics {
    /// Every attempted dereference, failed ones included.
    pub requests: usize,
    pub failed_requests: usize,
    pub pruned_links: usize,
    pub wall_time: Duration,
    pub result_count: usize,
    /// `(requests so far, store triple count)` after each dereference.
    pub store_sizes: Vec<(usize, usize)>,
    pub timed_out: bool,
    pub intermediate_bindings: usize,
}

impl TraversalMetrics {
    pub fn peak_store_size(&self) -> usize {
        self.store_sizes.iter().map(|&(_, s)| s).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalResult {
    /// Sorted, so output is independent of fetch interleaving.
    pub bindings: Vec<Binding>,
    pub metrics: TraversalMetrics,
    /// Dereferenced IRIs in the order they were taken off the queue.
    pub visited: Vec<String>,
}

impl TraversalResult {
    /// False when the traversal was cut short by the timeout.
    pub fn is_complete(&self) -> bool {
        !self.metrics.timed_out
    }
}

/// FIFO of pending IRIs plus the visited set. Pruning is recorded per
/// discovery: an IRI pruned once can still be enqueued later.
#[derive(Debug, Default)]
pub struct LinkQueue {
    pending: VecDeque<String>,
    queued: HashSet<String>,
    visited: HashSet<String>,
    pruned: HashSet<String>,
}

impl LinkQueue {
    pub fn new() -> Self {
        LinkQueue::default()
    }

    /// Whether the IRI is already dereferenced or waiting to be.
    pub fn is_known(&self, iri: &str) -> bool {
        self.visited.contains(iri) || self.queued.contains(iri)
    }

    /// Returns false if the IRI was already known.
    pub fn push(&mut self, iri: &str) -> bool {
        if self.is_known(iri) {
            return false;
        }
        self.pruned.remove(iri);
        self.queued.insert(iri.to_string());
        self.pending.push_back(iri.to_string());
        true
    }

    pub fn prune(&mut self, iri: &str) {
        debug_assert!(!self.visited.contains(iri));
        self.pruned.insert(iri.to_string());
    }

    /// Dequeue up to `k` IRIs and mark them visited.
    pub fn take(&mut self, k: usize) -> Vec<String> {
        let mut batch = Vec::with_capacity(k);
        while batch.len() < k {
            let Some(iri) = self.pending.pop_front() else {
                break;
            };
            self.queued.remove(&iri);
            self.visited.insert(iri.clone());
            batch.push(iri);
        }
        batch
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn visited(&self) -> &HashSet<String> {
        &self.visited
    }

    pub fn pruned(&self) -> &HashSet<String> {
        &self.pruned
    }
}

/// Run the traversal from `seeds` and evaluate `q` over everything
/// gathered. Seeds are always dereferenced; every other link goes through
/// `criterion`.
pub fn traverse_and_query(
    seeds: &[String],
    q: &Query,
    criterion: &ReachabilityCriterion,
    fetcher: &Fetcher,
    options: TraversalOptions,
) -> Result<TraversalResult, TraversalError> {
    if seeds.is_empty() {
        return Err(TraversalError::NoSeeds);
    }
    let started = Instant::now();
    let deadline = started + options.timeout;
    let k = options.fetch_parallelism.max(1);

    let seed_set: HashSet<&str> = seeds.iter().map(String::as_str).collect();
    let mut queue = LinkQueue::new();
    for s in seeds {
        queue.push(s);
    }
    let mut store = TripleStore::new();
    let mut metrics = TraversalMetrics::default();
    let mut visited = Vec::new();

    while !queue.is_empty() {
        let now = Instant::now();
        if now >= deadline {
            metrics.timed_out = true;
            break;
        }
        let remaining = deadline - now;
        let batch = queue.take(k);
        visited.extend(batch.iter().cloned());
        let fetched = fetch_batch(fetcher, &batch, remaining);

        for (iri, outcome) in batch.iter().zip(fetched) {
            metrics.requests += 1;
            let parsed = outcome
                .map_err(Failure::Fetch)
                .and_then(|doc| parse_document(&doc.body, iri).map_err(Failure::Parse));
            let triples = match parsed {
                Ok(triples) => triples,
                Err(failure) => {
                    if seed_set.contains(iri.as_str()) {
                        return Err(failure.into_seed_error(iri));
                    }
                    log::warn!("skipping {iri}: {failure}");
                    metrics.failed_requests += 1;
                    metrics.store_sizes.push((metrics.requests, store.len()));
                    continue;
                }
            };
            let relations = extract_relations(&triples, iri);
            store.insert_document(iri, triples);
            metrics.store_sizes.push((metrics.requests, store.len()));

            for (target, group) in group_by_target(&relations) {
                if queue.is_known(target) {
                    continue;
                }
                if criterion.decide_target(group) {
                    queue.push(target);
                } else {
                    queue.prune(target);
                    metrics.pruned_links += 1;
                }
            }
        }
    }

    let (mut bindings, stats) = evaluate_with_stats(q, &store);
    bindings.sort();
    metrics.result_count = bindings.len();
    metrics.intermediate_bindings = stats.intermediate_bindings;
    metrics.wall_time = started.elapsed();
    Ok(TraversalResult {
        bindings,
        metrics,
        visited,
    })
}

enum Failure {
    Fetch(FetchError),
    Parse(String),
}

impl Failure {
    fn into_seed_error(self, iri: &str) -> TraversalError {
        match self {
            Failure::Fetch(source) => TraversalError::SeedUnreachable {
                iri: iri.to_string(),
                source,
            },
            Failure::Parse(message) => TraversalError::SeedUnparsable {
                iri: iri.to_string(),
                message,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Fetch(e) => write!(f, "{e}"),
            Failure::Parse(m) => write!(f, "{m}"),
        }
    }
}

fn parse_document(body: &[u8], iri: &str) -> Result<Vec<crate::rdf::Triple>, String> {
    let text = std::str::from_utf8(body).map_err(|e| format!("not UTF-8: {e}"))?;
    parse_turtle(text, iri).map_err(|e: RdfError| e.to_string())
}

fn fetch_batch(
    fetcher: &Fetcher,
    batch: &[String],
    limit: Duration,
) -> Vec<Result<FetchedDocument, FetchError>> {
    if batch.len() == 1 {
        return vec![fetcher.fetch_within(&batch[0], limit)];
    }
    thread::scope(|scope| {
        let handles: Vec<_> = batch
            .iter()
            .map(|iri| scope.spawn(move || fetcher.fetch_within(iri, limit)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fetch thread panicked"))
            .collect()
    })
}

/// Relations grouped by target, in order of first appearance.
fn group_by_target(relations: &[TreeRelation]) -> Vec<(&str, Vec<&TreeRelation>)> {
    let mut groups: Vec<(&str, Vec<&TreeRelation>)> = Vec::new();
    for rel in relations {
        match groups.iter_mut().find(|(t, _)| *t == rel.target) {
            Some((_, g)) => g.push(rel),
            None => groups.push((&rel.target, vec![rel])),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_queue_never_revisits() {
        let mut q = LinkQueue::new();
        assert!(q.push("a"));
        assert!(!q.push("a"));
        assert_eq!(q.take(4), vec!["a".to_string()]);
        assert!(!q.push("a"));
        assert!(q.is_empty());
    }

    #[test]
    fn pruned_iri_can_be_enqueued_later() {
        let mut q = LinkQueue::new();
        q.prune("b");
        assert!(q.pruned().contains("b"));
        assert!(q.push("b"));
        assert!(!q.pruned().contains("b"));
        assert_eq!(q.take(1), vec!["b".to_string()]);
        assert!(q.visited().contains("b"));
    }

    #[test]
    fn fifo_order() {
        let mut q = LinkQueue::new();
        for iri in ["x", "y", "z"] {
            q.push(iri);
        }
        assert_eq!(q.take(2), vec!["x".to_string(), "y".to_string()]);
        assert_eq!(q.take(2), vec!["z".to_string()]);
    }

    #[test]
    fn grouping_keeps_first_appearance_order() {
        let rels = vec![
            TreeRelation::unconstrained("d", "b"),
            TreeRelation::unconstrained("d", "a"),
            TreeRelation::unconstrained("d", "b"),
        ];
        let groups = group_by_target(&rels);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, "b");
        assert_eq!(groups[0].1.len(), 2);
    }
}
