use crate::fragmenter::SensorDataSpec;
use crate::value::format_date_time_micros;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAnalog {
    pub id: &'static str,
    pub text: String,
    /// Result count on the dataset the analog was built for.
    pub expected_results: usize,
}

const PROLOGUE: &str = "PREFIX saref: <https://saref.etsi.org/core/>
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>
SELECT ?m ?t ?v ?s WHERE {
  ?m saref:hasTimestamp ?t .
  ?m saref:hasValue ?v .
  ?m saref:measurementMadeBy ?s .
}
";

fn dt(micros: i64) -> String {
    format!("\"{}\"^^xsd:dateTime", format_date_time_micros(micros))
}

/// The four benchmark query shapes for a generated dataset.
///
/// * Q1: the window just below measurement `count/2`, plus a value bound no
///   measurement reaches. No results.
/// * Q2: the same window without the value bound. Exactly one result.
/// * Q3: `count/20` consecutive measurements starting at `2·count/5`.
/// * Q4: everything from measurement `count/100` on.
///
/// When `count/2` falls on a leaf boundary the Q1/Q2 window touches exactly
/// two leaves. Needs at least 40 measurements.
pub fn query_analogs(spec: &SensorDataSpec) -> Vec<QueryAnalog> {
    assert!(
        spec.count >= 40,
        "query analogs need at least 40 measurements"
    );
    let n = spec.count;
    let half_step = spec.step_micros() / 2;
    let c = n / 2;
    let narrow_lo = spec.timestamp_micros(c - 1) + half_step;
    let narrow_hi = spec.timestamp_micros(c);
    let narrow = format!("?t > {} && ?t <= {}", dt(narrow_lo), dt(narrow_hi));

    let a = 2 * n / 5;
    let width = n / 20;
    let first = n / 100;

    vec![
        QueryAnalog {
            id: "Q1",
            text: format!("{PROLOGUE}FILTER({narrow} && ?v > 1000)\n"),
            expected_results: 0,
        },
        QueryAnalog {
            id: "Q2",
            text: format!("{PROLOGUE}FILTER({narrow})\n"),
            expected_results: 1,
        },
        QueryAnalog {
            id: "Q3",
            text: format!(
                "{PROLOGUE}FILTER(?t >= {} && ?t < {})\n",
                dt(spec.timestamp_micros(a)),
                dt(spec.timestamp_micros(a + width))
            ),
            expected_results: width,
        },
        QueryAnalog {
            id: "Q4",
            text: format!(
                "{PROLOGUE}FILTER(?t >= {})\n",
                dt(spec.timestamp_micros(first))
            ),
            expected_results: n - first,
        },
    ]
}
