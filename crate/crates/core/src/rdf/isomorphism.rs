use std::collections::{BTreeMap, HashMap, HashSet};

use super::{Term, Triple};

/// Graph isomorphism up to blank-node relabeling.
///
/// Blank nodes are grouped by a signature of their ground neighbourhood and
/// then matched by backtracking within each group. Adequate for documents
/// with many blank nodes as long as most signatures are distinct.
pub fn isomorphic(a: &[Triple], b: &[Triple]) -> bool {
    let set_a: HashSet<&Triple> = a.iter().collect();
    let set_b: HashSet<&Triple> = b.iter().collect();
    if set_a.len() != set_b.len() {
        return false;
    }
    let blanks_a = blank_signatures(&set_a);
    let blanks_b = blank_signatures(&set_b);
    if blanks_a.len() != blanks_b.len() {
        return false;
    }

    let mut groups_a: BTreeMap<&Vec<String>, Vec<&str>> = BTreeMap::new();
    for (label, sig) in &blanks_a {
        groups_a.entry(sig).or_default().push(label);
    }
    let mut groups_b: BTreeMap<&Vec<String>, Vec<&str>> = BTreeMap::new();
    for (label, sig) in &blanks_b {
        groups_b.entry(sig).or_default().push(label);
    }
    if groups_a.len() != groups_b.len()
        || groups_a
            .iter()
            .zip(&groups_b)
            .any(|((sa, va), (sb, vb))| sa != sb || va.len() != vb.len())
    {
        return false;
    }

    let candidates: Vec<(&str, Vec<&str>)> = groups_a
        .iter()
        .flat_map(|(sig, labels)| {
            labels
                .iter()
                .map(|l| (*l, groups_b[sig].clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    let mut mapping = HashMap::new();
    let mut used = HashSet::new();
    search(&candidates, 0, &mut mapping, &mut used, &set_a, &set_b)
}

fn blank_signatures<'t>(triples: &HashSet<&'t Triple>) -> HashMap<&'t str, Vec<String>> {
    let mut sigs: HashMap<&str, Vec<String>> = HashMap::new();
    let show = |t: &Term| match t {
        Term::Blank(_) => "_".to_string(),
        other => other.to_string(),
    };
    for t in triples {
        if let Term::Blank(l) = &t.subject {
            sigs.entry(l)
                .or_default()
                .push(format!("s {} {}", t.predicate, show(&t.object)));
        }
        if let Term::Blank(l) = &t.object {
            sigs.entry(l)
                .or_default()
                .push(format!("o {} {}", show(&t.subject), t.predicate));
        }
    }
    for sig in sigs.values_mut() {
        sig.sort();
    }
    sigs
}

fn search<'a>(
    candidates: &[(&'a str, Vec<&'a str>)],
    index: usize,
    mapping: &mut HashMap<&'a str, &'a str>,
    used: &mut HashSet<&'a str>,
    a: &HashSet<&Triple>,
    b: &HashSet<&Triple>,
) -> bool {
    if index == candidates.len() {
        return a.iter().all(|t| b.contains(&relabel(t, mapping)));
    }
    let (label, options) = &candidates[index];
    for &option in options {
        if used.contains(option) {
            continue;
        }
        mapping.insert(label, option);
        used.insert(option);
        if search(candidates, index + 1, mapping, used, a, b) {
            return true;
        }
        mapping.remove(label);
        used.remove(option);
    }
    false
}

fn relabel(t: &Triple, mapping: &HashMap<&str, &str>) -> Triple {
    let map = |term: &Term| match term {
        Term::Blank(l) => Term::Blank(mapping[l.as_str()].to_string()),
        other => other.clone(),
    };
    Triple {
        subject: map(&t.subject),
        predicate: t.predicate.clone(),
        object: map(&t.object),
    }
}
