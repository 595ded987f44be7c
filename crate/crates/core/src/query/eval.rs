use std::collections::HashMap;

use super::{Binding, PatternTerm, Query, TriplePattern};
use crate::rdf::{Term, TripleStore};
use crate::value::TypedValue;

/// Join cost counters for one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Partial solutions produced across all join steps.
    pub intermediate_bindings: usize,
    /// Store lookups issued.
    pub lookups: usize,
}

/// Evaluate a query over the store: nested-loop join over the patterns in
/// written order, then the filter (value-space comparison; errors count as
/// false), then projection. Duplicates after projection are kept.
pub fn evaluate(q: &Query, store: &TripleStore) -> Vec<Binding> {
    evaluate_with_stats(q, store).0
}

pub fn evaluate_with_stats(q: &Query, store: &TripleStore) -> (Vec<Binding>, EvalStats) {
    let mut stats = EvalStats::default();
    let mut partial: Vec<HashMap<&str, Term>> = vec![HashMap::new()];
    for pattern in q.bgp() {
        let mut next = Vec::new();
        for solution in &partial {
            stats.lookups += 1;
            extend(pattern, solution, store, &mut next);
        }
        stats.intermediate_bindings += next.len();
        partial = next;
        if partial.is_empty() {
            break;
        }
    }

    let results = partial
        .into_iter()
        .filter(|solution| match q.filter() {
            None => true,
            Some(f) => {
                f.evaluate(&|v| solution.get(v).and_then(TypedValue::from_term)) == Some(true)
            }
        })
        .map(|solution| {
            let mut b = Binding::new();
            for v in q.projected() {
                if let Some(t) = solution.get(v.as_str()) {
                    b.insert(v.clone(), t.clone());
                }
            }
            b
        })
        .collect();
    (results, stats)
}

fn extend<'q>(
    pattern: &'q TriplePattern,
    solution: &HashMap<&'q str, Term>,
    store: &TripleStore,
    out: &mut Vec<HashMap<&'q str, Term>>,
) {
    let resolve = |p: &'q PatternTerm| -> Option<Term> {
        match p {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Var(v) => solution.get(v.as_str()).cloned(),
        }
    };
    let s = resolve(&pattern.subject);
    let p = resolve(&pattern.predicate);
    let o = resolve(&pattern.object);
    'triples: for t in store.match_pattern(s.as_ref(), p.as_ref(), o.as_ref()) {
        let mut extended = solution.clone();
        for (position, term) in [
            (&pattern.subject, &t.subject),
            (&pattern.predicate, &t.predicate),
            (&pattern.object, &t.object),
        ] {
            if let PatternTerm::Var(v) = position {
                match extended.get(v.as_str()) {
                    Some(bound) if bound != term => continue 'triples,
                    Some(_) => {}
                    None => {
                        extended.insert(v.as_str(), term.clone());
                    }
                }
            }
        }
        out.push(extended);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;
    use crate::rdf::{vocab, Triple};
    use crate::value::format_date_time_micros;
    use proptest::prelude::*;

    const BASE_MICROS: i64 = 1_641_168_000_000_000; // 2022-01-03T00:00:00Z

    fn measurements(n: i64) -> TripleStore {
        let mut store = TripleStore::new();
        for k in 0..n {
            let m = Term::iri(format!("http://example.org/m{k}"));
            store.insert(Triple::new(
                m.clone(),
                Term::iri(vocab::SAREF_HAS_TIMESTAMP),
                Term::typed_literal(
                    format_date_time_micros(BASE_MICROS + k * 60_000_000),
                    vocab::XSD_DATE_TIME,
                ),
            ));
            store.insert(Triple::new(
                m,
                Term::iri(vocab::SAREF_MADE_BY),
                Term::iri("http://example.org/sensor0"),
            ));
        }
        store
    }

    fn range_query(from: &str, to: &str) -> Query {
        parse_query(&format!(
            r#"PREFIX saref: <https://saref.etsi.org/core/>
               PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
               SELECT ?m ?t WHERE {{ ?m saref:hasTimestamp ?t . ?m saref:measurementMadeBy ?s }}
               FILTER(?t >= "{from}"^^xsd:dateTime && ?t < "{to}"^^xsd:dateTime)"#
        ))
        .unwrap()
    }

    #[test]
    fn single_measurement_in_range() {
        let store = measurements(10);
        let q = range_query("2022-01-03T00:03:00", "2022-01-03T00:03:30");
        let results = evaluate(&q, &store);
        assert_eq!(results.len(), 1);
        assert_eq!(
            results[0].get("m"),
            Some(&Term::iri("http://example.org/m3"))
        );
    }

    #[test]
    fn empty_store() {
        let q = range_query("2022-01-03T00:00:00", "2022-01-04T00:00:00");
        assert!(evaluate(&q, &TripleStore::new()).is_empty());
    }

    #[test]
    fn four_of_ten() {
        let store = measurements(10);
        let q = range_query("2022-01-03T00:02:00", "2022-01-03T00:06:00");
        // Brute force: minutes 2, 3, 4, 5.
        let expected: Vec<i64> = (0..10).filter(|k| (2..6).contains(k)).collect();
        assert_eq!(evaluate(&q, &store).len(), expected.len());
        assert_eq!(expected.len(), 4);
    }

    #[test]
    fn repeated_variable_must_agree() {
        let mut store = TripleStore::new();
        store.insert(Triple::new(Term::iri("a"), Term::iri("p"), Term::iri("a")));
        store.insert(Triple::new(Term::iri("a"), Term::iri("p"), Term::iri("b")));
        let q = parse_query("SELECT ?x WHERE { ?x <p> ?x }").unwrap();
        assert_eq!(evaluate(&q, &store).len(), 1);
    }

    #[test]
    fn projection_keeps_duplicates() {
        let store = measurements(3);
        let q = parse_query(
            "SELECT ?s WHERE { ?m <https://saref.etsi.org/core/measurementMadeBy> ?s }",
        )
        .unwrap();
        assert_eq!(evaluate(&q, &store).len(), 3);
    }

    #[test]
    fn join_cost_is_recorded() {
        let store = measurements(5);
        let q = range_query("2022-01-03T00:00:00", "2022-01-04T00:00:00");
        let (results, stats) = evaluate_with_stats(&q, &store);
        assert_eq!(results.len(), 5);
        assert_eq!(stats.intermediate_bindings, 10);
        assert_eq!(stats.lookups, 6);
    }

    /// Enumerate every assignment of store terms to the query variables.
    fn brute_force(q: &Query, store: &TripleStore) -> Vec<Binding> {
        let mut vars: Vec<&str> = Vec::new();
        for p in q.bgp() {
            for v in p.positions().into_iter().filter_map(PatternTerm::var) {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        let mut domain: Vec<Term> = store
            .iter()
            .flat_map(|t| [t.subject.clone(), t.predicate.clone(), t.object.clone()])
            .collect();
        domain.sort();
        domain.dedup();

        let mut out = Vec::new();
        let mut assignment = vec![0usize; vars.len()];
        if !domain.is_empty() || vars.is_empty() {
            loop {
                let lookup = |v: &str| {
                    vars.iter()
                        .position(|x| *x == v)
                        .map(|i| domain[assignment[i]].clone())
                };
                let ground = |p: &PatternTerm| match p {
                    PatternTerm::Term(t) => t.clone(),
                    PatternTerm::Var(v) => lookup(v).unwrap(),
                };
                let matches = q.bgp().iter().all(|p| {
                    let (s, pr, o) = (ground(&p.subject), ground(&p.predicate), ground(&p.object));
                    !s.is_literal()
                        && matches!(pr, Term::Iri(_))
                        && store.contains(&Triple {
                            subject: s,
                            predicate: pr,
                            object: o,
                        })
                });
                let passes = q.filter().is_none_or(|f| {
                    f.evaluate(&|v| lookup(v).and_then(|t| TypedValue::from_term(&t))) == Some(true)
                });
                if matches && passes {
                    let mut b = Binding::new();
                    for v in q.projected() {
                        b.insert(v.clone(), lookup(v).unwrap());
                    }
                    out.push(b);
                }
                // Odometer increment.
                let mut i = 0;
                loop {
                    if i == vars.len() {
                        return out;
                    }
                    assignment[i] += 1;
                    if assignment[i] < domain.len() {
                        break;
                    }
                    assignment[i] = 0;
                    i += 1;
                }
            }
        }
        out
    }

    fn random_store() -> impl Strategy<Value = Vec<(u8, u8, u8, bool)>> {
        prop::collection::vec((0u8..4, 0u8..2, 0u8..5, any::<bool>()), 0..20)
    }

    fn build(spec: &[(u8, u8, u8, bool)]) -> TripleStore {
        spec.iter()
            .map(|&(s, p, o, lit)| {
                let object = if lit {
                    Term::typed_literal(o.to_string(), vocab::XSD_INTEGER)
                } else {
                    Term::iri(format!("http://x/n{o}"))
                };
                Triple::new(
                    Term::iri(format!("http://x/n{s}")),
                    Term::iri(format!("http://x/p{p}")),
                    object,
                )
            })
            .collect()
    }

    fn sorted(mut v: Vec<Binding>) -> Vec<Binding> {
        v.sort();
        v
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn evaluation_matches_brute_force(spec in random_store(), bound in 0i64..5) {
            let store = build(&spec);
            let queries = [
                "SELECT * WHERE { ?a <http://x/p0> ?b }".to_string(),
                "SELECT ?a ?c WHERE { ?a <http://x/p0> ?b . ?b <http://x/p1> ?c }".to_string(),
                format!("SELECT * WHERE {{ ?a ?p ?v }} FILTER(?v >= {bound})"),
                format!("SELECT ?a WHERE {{ ?a <http://x/p1> ?v . ?a <http://x/p0> ?w }} FILTER(!(?v = {bound}) || ?w < 2)"),
            ];
            for text in &queries {
                let q = parse_query(text).unwrap();
                prop_assert_eq!(sorted(evaluate(&q, &store)), sorted(brute_force(&q, &store)), "{}", text);
            }
        }

        #[test]
        fn projection_is_stable(spec in random_store()) {
            let store = build(&spec);
            let q = parse_query("SELECT ?a ?c WHERE { ?a <http://x/p0> ?b . ?b <http://x/p1> ?c }").unwrap();
            let star: Vec<Binding> = evaluate(&q.select_all(), &store)
                .iter()
                .map(|b| b.project(q.projected()))
                .collect();
            prop_assert_eq!(sorted(star), sorted(evaluate(&q, &store)));
        }
    }
}
