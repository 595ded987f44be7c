use std::fs;
use std::path::Path;
use std::time::Duration;

use treelink::fragmenter::{
    fragment, generate_dataset, leaf_file_name, write_fragments, SensorDataSpec, DEFAULT_BASE,
};
use treelink::harness::{query_analogs, serve, ServeOptions};
use treelink::rdf::vocab;
use treelink::traversal::TraversalError;
use treelink::{parse_query, traverse_and_query, Fetcher, ReachabilityCriterion, TraversalOptions};
use url::Url;

fn file_iri(path: &Path) -> String {
    Url::from_file_path(path).unwrap().to_string()
}

fn fixture(dir: &Path, count: usize, n: usize) -> SensorDataSpec {
    let spec = SensorDataSpec {
        count,
        ..SensorDataSpec::default()
    };
    let data = generate_dataset(&spec).unwrap();
    let set = fragment(&data, n, vocab::SAREF_HAS_TIMESTAMP, DEFAULT_BASE).unwrap();
    write_fragments(&set, dir).unwrap();
    spec
}

const PREFIXES: &str = "PREFIX saref: <https://saref.etsi.org/core/>\nPREFIX xsd: <http://www.w3.org/2001/XMLSchema#>\n";

fn timestamp_query(filter: &str) -> treelink::Query {
    parse_query(&format!(
        "{PREFIXES}SELECT ?m ?t WHERE {{ ?m saref:hasTimestamp ?t }} FILTER({filter})"
    ))
    .unwrap()
}

fn run(
    seed: &str,
    q: &treelink::Query,
    criterion: &ReachabilityCriterion,
    k: usize,
) -> treelink::TraversalResult {
    traverse_and_query(
        &[seed.to_string()],
        q,
        criterion,
        &Fetcher::file(),
        TraversalOptions {
            fetch_parallelism: k,
            ..TraversalOptions::default()
        },
    )
    .unwrap()
}

#[test]
fn predicate_based_loads_everything() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 200, 4);
    let q = timestamp_query("?t < \"2000-01-01T00:00:00\"^^xsd:dateTime");
    let r = run(
        &file_iri(&dir.path().join("root.ttl")),
        &q,
        &ReachabilityCriterion::PredicateBased,
        1,
    );
    assert_eq!(r.metrics.requests, 5);
    assert_eq!(r.metrics.pruned_links, 0);
    assert!(r.bindings.is_empty());
}

#[test]
fn filter_outside_the_data_loads_only_the_root() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 200, 4);
    let q = timestamp_query("?t < \"2000-01-01T00:00:00\"^^xsd:dateTime");
    let r = run(
        &file_iri(&dir.path().join("root.ttl")),
        &q,
        &ReachabilityCriterion::rule_based(q.clone()),
        1,
    );
    assert_eq!(r.metrics.requests, 1);
    assert_eq!(r.metrics.pruned_links, 4);
    assert_eq!(r.metrics.result_count, 0);
}

#[test]
fn requests_match_overlapping_leaves() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture(dir.path(), 400, 8);
    let seed = file_iri(&dir.path().join("root.ttl"));
    // Leaves hold 50 measurements each; [T_60, T_160) overlaps leaves 2..=4.
    let lo = treelink::TypedValue::date_time_micros(spec.timestamp_micros(60));
    let hi = treelink::TypedValue::date_time_micros(spec.timestamp_micros(160));
    let q = timestamp_query(&format!(
        "?t >= \"{lo}\"^^xsd:dateTime && ?t < \"{hi}\"^^xsd:dateTime"
    ));
    let rule = run(&seed, &q, &ReachabilityCriterion::rule_based(q.clone()), 1);
    let pred = run(&seed, &q, &ReachabilityCriterion::PredicateBased, 1);
    assert_eq!(rule.metrics.requests, 1 + 3);
    assert_eq!(rule.bindings, pred.bindings);
    assert_eq!(rule.bindings.len(), 100);
    assert!(rule.metrics.peak_store_size() < pred.metrics.peak_store_size());
    assert!(rule
        .metrics
        .store_sizes
        .windows(2)
        .all(|w| w[0].1 <= w[1].1));
    assert_eq!(rule.metrics.requests, rule.visited.len());
    assert!(rule.metrics.pruned_links + rule.metrics.requests <= 1 + 16 + 1);
}

#[test]
fn two_document_cycle_terminates() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ttl");
    let b = dir.path().join("b.ttl");
    fs::write(&a, "<a.ttl> <https://w3id.org/tree#relation> [ <https://w3id.org/tree#node> <b.ttl> ] .\n<x> <http://example.org/p> 1 .\n").unwrap();
    fs::write(&b, "<b.ttl> <https://w3id.org/tree#relation> [ <https://w3id.org/tree#node> <a.ttl> ] .\n<y> <http://example.org/p> 2 .\n").unwrap();
    let q = parse_query("SELECT ?s WHERE { ?s <http://example.org/p> ?v } FILTER(?v > 0)").unwrap();
    for criterion in [
        ReachabilityCriterion::PredicateBased,
        ReachabilityCriterion::rule_based(q.clone()),
    ] {
        let r = run(&file_iri(&a), &q, &criterion, 1);
        assert_eq!(r.metrics.requests, 2);
        assert_eq!(r.bindings.len(), 2);
    }
}

#[test]
fn missing_leaf_is_counted_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 100, 4);
    fs::remove_file(dir.path().join(leaf_file_name(1))).unwrap();
    let q = timestamp_query("?t > \"2000-01-01T00:00:00\"^^xsd:dateTime");
    let r = run(
        &file_iri(&dir.path().join("root.ttl")),
        &q,
        &ReachabilityCriterion::PredicateBased,
        1,
    );
    assert_eq!(r.metrics.requests, 5);
    assert_eq!(r.metrics.failed_requests, 1);
    assert_eq!(r.bindings.len(), 75);
}

#[test]
fn unreachable_seed_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let q = timestamp_query("?t > \"2000-01-01T00:00:00\"^^xsd:dateTime");
    let err = traverse_and_query(
        &[file_iri(&dir.path().join("nope.ttl"))],
        &q,
        &ReachabilityCriterion::PredicateBased,
        &Fetcher::file(),
        TraversalOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, TraversalError::SeedUnreachable { .. }));
    assert!(matches!(
        traverse_and_query(
            &[],
            &q,
            &ReachabilityCriterion::PredicateBased,
            &Fetcher::file(),
            TraversalOptions::default()
        ),
        Err(TraversalError::NoSeeds)
    ));
}

#[test]
fn zero_timeout_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path(), 100, 4);
    let q = timestamp_query("?t > \"2000-01-01T00:00:00\"^^xsd:dateTime");
    let r = traverse_and_query(
        &[file_iri(&dir.path().join("root.ttl"))],
        &q,
        &ReachabilityCriterion::PredicateBased,
        &Fetcher::file(),
        TraversalOptions {
            timeout: Duration::ZERO,
            ..TraversalOptions::default()
        },
    )
    .unwrap();
    assert!(r.metrics.timed_out);
    assert!(!r.is_complete());
}

#[test]
fn parallel_fetching_gives_the_same_answer() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture(dir.path(), 1_000, 16);
    let seed = file_iri(&dir.path().join("root.ttl"));
    for analog in query_analogs(&spec) {
        let q = parse_query(&analog.text).unwrap();
        for criterion in [
            ReachabilityCriterion::PredicateBased,
            ReachabilityCriterion::rule_based(q.clone()),
        ] {
            let one = run(&seed, &q, &criterion, 1);
            let eight = run(&seed, &q, &criterion, 8);
            assert_eq!(one.bindings, eight.bindings);
            assert_eq!(one.metrics.requests, eight.metrics.requests);
            assert_eq!(one.bindings.len(), analog.expected_results);
        }
    }
}

#[test]
fn http_run_matches_file_run_and_server_counter() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture(dir.path(), 500, 10);
    let server = serve(dir.path(), 0, ServeOptions::default()).unwrap();
    let http = Fetcher::http(Duration::from_secs(10));
    for entry in treelink::fragmenter::Manifest::read(dir.path())
        .unwrap()
        .entries
    {
        let body = http.fetch(&server.url_of(&entry.file)).unwrap().body;
        assert_eq!(body, fs::read(dir.path().join(&entry.file)).unwrap());
    }
    let q = parse_query(&query_analogs(&spec)[2].text).unwrap();
    let before = server.total_requests();
    let http = Fetcher::http(Duration::from_secs(10));
    let over_http = traverse_and_query(
        &[server.url_of("root.ttl")],
        &q,
        &ReachabilityCriterion::rule_based(q.clone()),
        &http,
        TraversalOptions {
            fetch_parallelism: 4,
            ..TraversalOptions::default()
        },
    )
    .unwrap();
    assert_eq!(server.total_requests() - before, http.requests());
    assert_eq!(http.requests(), over_http.metrics.requests);
    let over_file = run(
        &file_iri(&dir.path().join("root.ttl")),
        &q,
        &ReachabilityCriterion::rule_based(q.clone()),
        1,
    );
    assert_eq!(over_http.bindings, over_file.bindings);
    assert_eq!(over_http.metrics.requests, over_file.metrics.requests);
}
