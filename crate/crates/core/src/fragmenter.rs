//! Synthetic sensor data and its depth-1 B-tree fragmentation: one root
//! document holding only relations, and `n` leaf documents partitioning the
//! measurements by their path value.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rdf::{serialize_turtle, vocab, Term, Triple};
use crate::tree::{RelationKind, TreeRelation};
use crate::value::{format_date_time_micros, TypedValue};

pub const ROOT_FILE: &str = "root.ttl";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const DEFAULT_BASE: &str = "http://example.org/fragments/";

#[derive(Debug, Error)]
pub enum FragmentError {
    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),
    #[error("cannot split {measurements} measurements into {leaves} leaves")]
    TooManyLeaves { leaves: usize, measurements: usize },
    #[error("leaf count must be at least 1")]
    NoLeaves,
    #[error("measurement {0} has no comparable value for the fragmentation path")]
    MissingPathValue(String),
    #[error("measurement {0} has more than one value for the fragmentation path")]
    AmbiguousPathValue(String),
    #[error("path values mix dateTime and numeric kinds")]
    IncomparableValues,
    #[error("malformed manifest line {line}: {content:?}")]
    Manifest { line: usize, content: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FragmentError + '_ {
    move |source| FragmentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorDataSpec {
    pub count: usize,
    /// Microseconds since the epoch, UTC.
    pub start_micros: i64,
    pub step: Duration,
    pub sensors: usize,
    pub seed: u64,
}

impl Default for SensorDataSpec {
    fn default() -> Self {
        SensorDataSpec {
            count: 10_000,
            // 2022-01-03T00:00:00Z
            start_micros: 1_641_168_000_000_000,
            step: Duration::from_secs(60),
            sensors: 4,
            seed: 31,
        }
    }
}

impl SensorDataSpec {
    pub fn validate(&self) -> Result<(), FragmentError> {
        if self.step.is_zero() {
            return Err(FragmentError::InvalidSpec("step must be positive".into()));
        }
        if self.sensors == 0 {
            return Err(FragmentError::InvalidSpec(
                "at least one sensor is required".into(),
            ));
        }
        Ok(())
    }

    pub fn step_micros(&self) -> i64 {
        self.step.as_micros() as i64
    }

    /// Timestamp of measurement `k`.
    pub fn timestamp_micros(&self, k: usize) -> i64 {
        self.start_micros + k as i64 * self.step_micros()
    }
}

pub fn measurement_iri(k: usize) -> String {
    format!("{}m{k}", vocab::EX)
}

/// Three triples per measurement `k`: timestamp `start + k·step`, a jittered
/// decimal value, and the sensor `k mod sensors`. Deterministic in `spec`.
pub fn generate_dataset(spec: &SensorDataSpec) -> Result<Vec<Triple>, FragmentError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let timestamp = Term::iri(vocab::SAREF_HAS_TIMESTAMP);
    let value = Term::iri(vocab::SAREF_HAS_VALUE);
    let made_by = Term::iri(vocab::SAREF_MADE_BY);
    let mut out = Vec::with_capacity(spec.count * 3);
    for k in 0..spec.count {
        let m = Term::iri(measurement_iri(k));
        let millis: u32 = rng.gen_range(15_000..25_000);
        out.push(Triple::new(
            m.clone(),
            timestamp.clone(),
            Term::typed_literal(
                format_date_time_micros(spec.timestamp_micros(k)),
                vocab::XSD_DATE_TIME,
            ),
        ));
        out.push(Triple::new(
            m.clone(),
            value.clone(),
            Term::typed_literal(
                format!("{}.{:03}", millis / 1000, millis % 1000),
                vocab::XSD_DECIMAL,
            ),
        ));
        out.push(Triple::new(
            m,
            made_by.clone(),
            Term::iri(format!("{}sensor{}", vocab::EX, k % spec.sensors)),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub iri: String,
    pub triples: Vec<Triple>,
}

impl Fragment {
    pub fn file_name(&self) -> &str {
        self.iri.rsplit('/').next().unwrap_or(&self.iri)
    }
}

/// Value range covered by one leaf: `[lower, upper)`, or `[lower, upper]`
/// when `upper_inclusive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafBounds {
    pub lower: TypedValue,
    pub upper: TypedValue,
    pub upper_inclusive: bool,
}

impl LeafBounds {
    pub fn contains(&self, v: &TypedValue) -> bool {
        let above = v >= &self.lower;
        let below = if self.upper_inclusive {
            v <= &self.upper
        } else {
            v < &self.upper
        };
        above && below
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentSet {
    pub root: Fragment,
    pub leaves: Vec<Fragment>,
    pub bounds: Vec<LeafBounds>,
    pub path: String,
}

impl FragmentSet {
    pub fn n(&self) -> usize {
        self.leaves.len()
    }

    pub fn documents(&self) -> impl Iterator<Item = &Fragment> {
        std::iter::once(&self.root).chain(&self.leaves)
    }
}

pub fn leaf_file_name(i: usize) -> String {
    format!("leaf-{:04}.ttl", i + 1)
}

/// Sort measurements by path value and split them into `n` contiguous
/// groups whose sizes differ by at most one.
///
/// Leaf `i` gets a `>= lo_i` relation and a `< lo_{i+1}` relation; the last
/// leaf, and any leaf whose maximum equals the next leaf's minimum, gets
/// `<= max_i` instead so that tied values stay reachable.
pub fn fragment(
    data: &[Triple],
    n: usize,
    path: &str,
    base: &str,
) -> Result<FragmentSet, FragmentError> {
    if n == 0 {
        return Err(FragmentError::NoLeaves);
    }
    let base = if base.ends_with('/') {
        base.to_string()
    } else {
        format!("{base}/")
    };

    let mut order: Vec<&Term> = Vec::new();
    let mut groups: HashMap<&Term, Vec<&Triple>> = HashMap::new();
    for t in data {
        groups
            .entry(&t.subject)
            .or_insert_with(|| {
                order.push(&t.subject);
                Vec::new()
            })
            .push(t);
    }

    let mut measurements: Vec<(TypedValue, &Term)> = Vec::with_capacity(order.len());
    for subject in order {
        let mut values = groups[subject]
            .iter()
            .filter(|t| t.predicate.as_iri() == Some(path));
        let describe = || subject.to_string();
        let first = values
            .next()
            .ok_or_else(|| FragmentError::MissingPathValue(describe()))?;
        if values.next().is_some() {
            return Err(FragmentError::AmbiguousPathValue(describe()));
        }
        let v = TypedValue::from_term(&first.object)
            .ok_or_else(|| FragmentError::MissingPathValue(describe()))?;
        measurements.push((v, subject));
    }
    if let Some((first, _)) = measurements.first() {
        if measurements.iter().any(|(v, _)| !v.comparable(first)) {
            return Err(FragmentError::IncomparableValues);
        }
    }
    if n > measurements.len() {
        return Err(FragmentError::TooManyLeaves {
            leaves: n,
            measurements: measurements.len(),
        });
    }
    measurements.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("checked comparable"));

    let total = measurements.len();
    let mut chunks: Vec<&[(TypedValue, &Term)]> = Vec::with_capacity(n);
    let mut offset = 0;
    for i in 0..n {
        let size = total / n + usize::from(i < total % n);
        chunks.push(&measurements[offset..offset + size]);
        offset += size;
    }

    let root_iri = format!("{base}{ROOT_FILE}");
    let mut root_triples = Vec::new();
    let mut leaves = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    for (i, chunk) in chunks.iter().enumerate() {
        let leaf_iri = format!("{base}{}", leaf_file_name(i));
        let lower = chunk[0].0;
        let max = chunk[chunk.len() - 1].0;
        let leaf_bounds = match chunks.get(i + 1) {
            Some(next) if next[0].0 != max => LeafBounds {
                lower,
                upper: next[0].0,
                upper_inclusive: false,
            },
            _ => LeafBounds {
                lower,
                upper: max,
                upper_inclusive: true,
            },
        };
        let relation = |kind, boundary| TreeRelation {
            source_doc: root_iri.clone(),
            target: leaf_iri.clone(),
            kind,
            path: Some(path.to_string()),
            boundary: Some(boundary),
        };
        root_triples.extend(
            relation(RelationKind::GreaterThanOrEqualTo, leaf_bounds.lower)
                .to_triples(Term::blank(format!("r{}", 2 * i))),
        );
        let upper_kind = if leaf_bounds.upper_inclusive {
            RelationKind::LessThanOrEqualTo
        } else {
            RelationKind::LessThan
        };
        root_triples.extend(
            relation(upper_kind, leaf_bounds.upper)
                .to_triples(Term::blank(format!("r{}", 2 * i + 1))),
        );

        let triples = chunk
            .iter()
            .flat_map(|(_, subject)| groups[subject].iter().map(|t| (*t).clone()))
            .collect();
        leaves.push(Fragment {
            iri: leaf_iri,
            triples,
        });
        bounds.push(leaf_bounds);
    }

    Ok(FragmentSet {
        root: Fragment {
            iri: root_iri,
            triples: root_triples,
        },
        leaves,
        bounds,
        path: path.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub iri: String,
    pub file: String,
}

/// `iri<TAB>filename` per line; the root document comes first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\n", e.iri, e.file))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, FragmentError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (iri, file) = line
                .split_once('\t')
                .ok_or_else(|| FragmentError::Manifest {
                    line: i + 1,
                    content: line.to_string(),
                })?;
            entries.push(ManifestEntry {
                iri: iri.to_string(),
                file: file.to_string(),
            });
        }
        Ok(Manifest { entries })
    }

    pub fn read(dir: &Path) -> Result<Self, FragmentError> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        Manifest::parse(&text)
    }

    pub fn leaf_count(&self) -> usize {
        self.entries.iter().filter(|e| e.file != ROOT_FILE).count()
    }
}

/// Write one Turtle file per document plus the manifest. Links between
/// documents are written as relative IRIs. Same input, same bytes.
pub fn write_fragments(fs_set: &FragmentSet, dir: &Path) -> Result<Manifest, FragmentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = Manifest::default();
    for doc in fs_set.documents() {
        let file = doc.file_name().to_string();
        let path = dir.join(&file);
        fs::write(&path, serialize_turtle(&doc.triples, &doc.iri)).map_err(io_err(&path))?;
        manifest.entries.push(ManifestEntry {
            iri: doc.iri.clone(),
            file,
        });
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_text()).map_err(io_err(&path))?;
    Ok(manifest)
}
