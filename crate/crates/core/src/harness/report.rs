use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// One benchmark cell. Fields are declared in alphabetical order so the CSV
/// columns come out sorted like the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub criterion: String,
    pub error: Option<String>,
    pub median_ms: f64,
    pub n: usize,
    pub peak_store: usize,
    pub pruned: usize,
    pub query: String,
    pub requests: usize,
    pub results: usize,
    pub server_requests: usize,
    /// Requests and results identical across repetitions.
    pub stable: bool,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

type RulePredicatePair<'a> = (Option<&'a BenchRow>, Option<&'a BenchRow>);

const TABLE_HEADER: [&str; 9] = [
    "n",
    "Query",
    "Criterion",
    "Time (ms)",
    "HTTP requests",
    "Results",
    "Pruned",
    "Peak store",
    "Timed out",
];

impl BenchReport {
    /// `(n, query)` pairs where the rule-based row loads more documents or
    /// returns different results than the predicate-based one. Cells that
    /// timed out or failed are skipped.
    pub fn dominance_violations(&self) -> Vec<(usize, String)> {
        let mut cells: BTreeMap<(usize, &str), RulePredicatePair> = BTreeMap::new();
        for row in &self.rows {
            let entry = cells.entry((row.n, row.query.as_str())).or_default();
            match row.criterion.as_str() {
                "rule" => entry.0 = Some(row),
                "predicate" => entry.1 = Some(row),
                _ => {}
            }
        }
        cells
            .into_iter()
            .filter_map(|((n, q), pair)| match pair {
                (Some(r), Some(p))
                    if !r.timed_out
                        && !p.timed_out
                        && r.error.is_none()
                        && p.error.is_none()
                        && (r.requests > p.requests || r.results != p.results) =>
                {
                    Some((n, q.to_string()))
                }
                _ => None,
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Report(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self, HarnessError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let rows = reader
            .deserialize()
            .collect::<Result<Vec<BenchRow>, _>>()
            .map_err(|e| HarnessError::Report(e.to_string()))?;
        Ok(BenchReport { rows })
    }
}

pub fn report(r: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => table(r),
        ReportFormat::Json => {
            let value = serde_json::to_value(r).expect("report is serializable");
            let mut out = serde_json::to_string_pretty(&value).expect("value is serializable");
            out.push('\n');
            out
        }
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            if r.rows.is_empty() {
                writer.write_record(csv_columns()).expect("in-memory write");
            }
            for row in &r.rows {
                writer.serialize(row).expect("in-memory write");
            }
            String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
        }
    }
}

fn csv_columns() -> Vec<String> {
    let probe = serde_json::to_value(BenchRow {
        criterion: String::new(),
        error: None,
        median_ms: 0.0,
        n: 0,
        peak_store: 0,
        pruned: 0,
        query: String::new(),
        requests: 0,
        results: 0,
        server_requests: 0,
        stable: true,
        timed_out: false,
    })
    .expect("row is serializable");
    probe
        .as_object()
        .expect("row is an object")
        .keys()
        .cloned()
        .collect()
}

fn table(r: &BenchReport) -> String {
    let cells: Vec<[String; 9]> = r
        .rows
        .iter()
        .map(|row| {
            let time = match &row.error {
                Some(_) => "error".to_string(),
                None if row.timed_out => format!("x ({:.1})", row.median_ms),
                None => format!("{:.1}", row.median_ms),
            };
            [
                row.n.to_string(),
                row.query.clone(),
                row.criterion.clone(),
                time,
                row.requests.to_string(),
                row.results.to_string(),
                row.pruned.to_string(),
                row.peak_store.to_string(),
                if row.timed_out { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    let mut widths = TABLE_HEADER.map(str::len);
    for line in &cells {
        for (w, c) in widths.iter_mut().zip(line) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let render = |out: &mut String, fields: &[&str]| {
        let padded: Vec<String> = fields
            .iter()
            .zip(widths)
            .map(|(f, w)| format!("{f:<w$}"))
            .collect();
        let _ = writeln!(out, "| {} |", padded.join(" | "));
    };
    render(&mut out, &TABLE_HEADER);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
    for line in &cells {
        let fields: Vec<&str> = line.iter().map(String::as_str).collect();
        render(&mut out, &fields);
    }
    out
}
