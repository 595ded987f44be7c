use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treelink::{Term, Triple, TripleStore};

fn term(rng: &mut ChaCha8Rng, pool: usize, literal_ok: bool) -> Term {
    let k = rng.gen_range(0..pool);
    if literal_ok && rng.gen_bool(0.3) {
        Term::typed_literal(k.to_string(), "http://www.w3.org/2001/XMLSchema#integer")
    } else if rng.gen_bool(0.1) {
        Term::blank(format!("b{k}"))
    } else {
        Term::iri(format!("http://example.org/n{k}"))
    }
}

#[test]
fn ten_thousand_triples_thousand_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut store = TripleStore::new();
    let mut all = Vec::new();
    while all.len() < 10_000 {
        let s = term(&mut rng, 400, false);
        let p = Term::iri(format!("http://example.org/p{}", rng.gen_range(0..12)));
        let o = term(&mut rng, 600, true);
        let t = Triple::new(s, p, o);
        if store.insert(t.clone()) {
            all.push(t);
        }
    }
    assert_eq!(store.len(), 10_000);

    for _ in 0..1_000 {
        let pick = &all[rng.gen_range(0..all.len())];
        let s = rng.gen_bool(0.5).then(|| pick.subject.clone());
        let p = rng.gen_bool(0.5).then(|| pick.predicate.clone());
        let o = rng.gen_bool(0.5).then(|| pick.object.clone());
        let mut got: Vec<&Triple> = store.match_pattern(s.as_ref(), p.as_ref(), o.as_ref());
        let mut expected: Vec<&Triple> = all
            .iter()
            .filter(|t| {
                s.as_ref().is_none_or(|x| *x == t.subject)
                    && p.as_ref().is_none_or(|x| *x == t.predicate)
                    && o.as_ref().is_none_or(|x| *x == t.object)
            })
            .collect();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }
}

#[test]
fn duplicate_inserts_keep_set_semantics() {
    let mut store = TripleStore::new();
    let t = Triple::new(Term::iri("a"), Term::iri("p"), Term::iri("b"));
    assert!(store.insert(t.clone()));
    assert!(!store.insert(t));
    assert_eq!(store.len(), 1);
}
