use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::report::{BenchReport, BenchRow};
use super::server::{serve, ServeOptions};
use super::HarnessError;
use crate::fragmenter::{Manifest, ROOT_FILE};
use crate::query::{parse_query, Query};
use crate::solver::ReachabilityCriterion;
use crate::traversal::{traverse_and_query, Fetcher, TraversalOptions, TraversalResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Rule,
    Predicate,
}

impl CriterionKind {
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Rule => "rule",
            CriterionKind::Predicate => "predicate",
        }
    }

    pub fn build(self, query: &Query) -> ReachabilityCriterion {
        match self {
            CriterionKind::Rule => ReachabilityCriterion::RuleBased(Arc::new(query.clone())),
            CriterionKind::Predicate => ReachabilityCriterion::PredicateBased,
        }
    }
}

impl FromStr for CriterionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule" => Ok(CriterionKind::Rule),
            "predicate" => Ok(CriterionKind::Predicate),
            other => Err(format!(
                "unknown criterion {other:?} (expected rule or predicate)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentDir {
    pub n: usize,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySource {
    pub id: String,
    pub file: Option<PathBuf>,
    pub text: Option<String>,
}

fn default_criteria() -> Vec<CriterionKind> {
    vec![CriterionKind::Rule, CriterionKind::Predicate]
}

fn default_timeout_secs() -> f64 {
    120.0
}

fn default_request_timeout_secs() -> f64 {
    30.0
}

fn default_repetitions() -> usize {
    5
}

fn default_parallelism() -> usize {
    1
}

/// Benchmark configuration, read from TOML. Relative paths are resolved
/// against the configuration file's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub fragments: Vec<FragmentDir>,
    pub queries: Vec<QuerySource>,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<CriterionKind>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_request_timeout_secs")]
    pub request_timeout_secs: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub port: u16,
    #[serde(default)]
    pub delay_ms: u64,
    #[serde(default = "default_parallelism")]
    pub fetch_parallelism: usize,
}

impl BenchConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, HarnessError> {
        let mut cfg: BenchConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for f in &mut cfg.fragments {
            f.dir = base_dir.join(&f.dir);
        }
        for q in &mut cfg.queries {
            if let Some(file) = &q.file {
                q.file = Some(base_dir.join(file));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        BenchConfig::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        if self.fragments.is_empty() {
            return fail("no fragment directories configured");
        }
        if self.queries.is_empty() {
            return fail("no queries configured");
        }
        if self.criteria.is_empty() {
            return fail("no criteria configured");
        }
        if !(self.timeout_secs > 0.0 && self.request_timeout_secs > 0.0) {
            return fail("timeouts must be positive");
        }
        for q in &self.queries {
            if q.file.is_some() == q.text.is_some() {
                return Err(HarnessError::Config(format!(
                    "query {} needs exactly one of `file` or `text`",
                    q.id
                )));
            }
        }
        Ok(())
    }

    fn load_queries(&self) -> Result<Vec<(String, Query)>, HarnessError> {
        self.queries
            .iter()
            .map(|src| {
                let text = match (&src.file, &src.text) {
                    (Some(path), _) => {
                        fs::read_to_string(path).map_err(|source| HarnessError::Io {
                            path: path.clone(),
                            source,
                        })?
                    }
                    (None, Some(text)) => text.clone(),
                    (None, None) => unreachable!("validated"),
                };
                let q = parse_query(&text)
                    .map_err(|e| HarnessError::Config(format!("query {}: {e}", src.id)))?;
                Ok((src.id.clone(), q))
            })
            .collect()
    }
}

/// Run every (fragment set, query, criterion) cell `repetitions` times over
/// HTTP, one fragment set served at a time. Cells run sequentially.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, HarnessError> {
    cfg.validate()?;
    let queries = cfg.load_queries()?;
    let options = TraversalOptions {
        timeout: Duration::from_secs_f64(cfg.timeout_secs),
        fetch_parallelism: cfg.fetch_parallelism.max(1),
    };
    let request_timeout = Duration::from_secs_f64(cfg.request_timeout_secs);
    let mut rows = Vec::new();

    for frag in &cfg.fragments {
        let manifest = Manifest::read(&frag.dir)?;
        if manifest.leaf_count() != frag.n {
            return Err(HarnessError::Config(format!(
                "{} holds {} leaves, configured n = {}",
                frag.dir.display(),
                manifest.leaf_count(),
                frag.n
            )));
        }
        let server = serve(
            &frag.dir,
            cfg.port,
            ServeOptions {
                delay: Duration::from_millis(cfg.delay_ms),
                ..ServeOptions::default()
            },
        )?;
        let seed = vec![server.url_of(ROOT_FILE)];

        for (id, query) in &queries {
            for &kind in &cfg.criteria {
                let criterion = kind.build(query);
                let mut runs: Vec<(Duration, TraversalResult, usize)> = Vec::new();
                let mut error = None;
                for _ in 0..cfg.repetitions {
                    let fetcher = Fetcher::http(request_timeout);
                    let before = server.total_requests();
                    let started = Instant::now();
                    let outcome = traverse_and_query(&seed, query, &criterion, &fetcher, options);
                    let elapsed = started.elapsed();
                    let served = server.total_requests() - before;
                    match outcome {
                        Ok(result) => {
                            if served != fetcher.requests() {
                                error = Some(format!(
                                    "server counted {served} requests, client {}",
                                    fetcher.requests()
                                ));
                            }
                            runs.push((elapsed, result, served));
                        }
                        Err(e) => {
                            error = Some(e.to_string());
                            break;
                        }
                    }
                }
                rows.push(summarize(frag.n, id, kind, &runs, error));
            }
        }
        server.shutdown();
    }
    Ok(BenchReport { rows })
}

fn summarize(
    n: usize,
    id: &str,
    kind: CriterionKind,
    runs: &[(Duration, TraversalResult, usize)],
    error: Option<String>,
) -> BenchRow {
    let mut times: Vec<f64> = runs.iter().map(|(t, _, _)| t.as_secs_f64() * 1e3).collect();
    times.sort_by(f64::total_cmp);
    let median_ms = match times.len() {
        0 => 0.0,
        len if len % 2 == 1 => times[len / 2],
        len => (times[len / 2 - 1] + times[len / 2]) / 2.0,
    };
    let first = runs.first().map(|(_, r, served)| (&r.metrics, *served));
    let stable = runs.windows(2).all(|w| {
        w[0].1.metrics.requests == w[1].1.metrics.requests && w[0].1.bindings == w[1].1.bindings
    });
    BenchRow {
        criterion: kind.name().to_string(),
        error,
        median_ms,
        n,
        peak_store: first.map_or(0, |(m, _)| m.peak_store_size()),
        pruned: first.map_or(0, |(m, _)| m.pruned_links),
        query: id.to_string(),
        requests: first.map_or(0, |(m, _)| m.requests),
        results: first.map_or(0, |(m, _)| m.result_count),
        server_requests: first.map_or(0, |(_, s)| s),
        stable,
        timed_out: runs.iter().any(|(_, r, _)| r.metrics.timed_out),
    }
}
