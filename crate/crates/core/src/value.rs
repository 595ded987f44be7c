//! Typed literal values on a totally ordered axis.

use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, FixedOffset, NaiveDateTime, TimeZone, Utc};

use crate::rdf::{vocab, Literal, Term};

/// Fixed-point scale used for decimals: 18 fractional digits.
pub(crate) const DECIMAL_SCALE: i128 = 1_000_000_000_000_000_000;
const DECIMAL_DIGITS: usize = 18;
/// Decimals are limited to |x| < 1e20 so scaled values stay well inside i128.
const DECIMAL_INT_LIMIT: i128 = 100_000_000_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    DateTime,
    Decimal,
    Integer,
}

impl ValueKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, ValueKind::DateTime)
    }

    pub fn datatype(self) -> &'static str {
        match self {
            ValueKind::DateTime => vocab::XSD_DATE_TIME,
            ValueKind::Decimal => vocab::XSD_DECIMAL,
            ValueKind::Integer => vocab::XSD_INTEGER,
        }
    }
}

/// A dateTime (microseconds since the Unix epoch, UTC), an integer, or a
/// decimal (scaled by 10^18).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TypedValue {
    kind: ValueKind,
    magnitude: i128,
}

impl TypedValue {
    pub fn integer(v: i64) -> Self {
        TypedValue {
            kind: ValueKind::Integer,
            magnitude: v as i128,
        }
    }

    pub fn date_time_micros(micros: i64) -> Self {
        TypedValue {
            kind: ValueKind::DateTime,
            magnitude: micros as i128,
        }
    }

    /// A decimal from its fixed-point representation (units of 10^-18).
    pub fn decimal_scaled(scaled: i128) -> Option<Self> {
        (scaled.abs() < DECIMAL_INT_LIMIT * DECIMAL_SCALE).then_some(TypedValue {
            kind: ValueKind::Decimal,
            magnitude: scaled,
        })
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    /// Raw magnitude in kind-specific units.
    pub fn magnitude(&self) -> i128 {
        self.magnitude
    }

    /// Position on a decimal axis (integers scaled up).
    pub(crate) fn as_scaled_decimal(&self) -> Option<i128> {
        match self.kind {
            ValueKind::Integer => Some(self.magnitude * DECIMAL_SCALE),
            ValueKind::Decimal => Some(self.magnitude),
            ValueKind::DateTime => None,
        }
    }

    pub fn parse_date_time(lexical: &str) -> Option<Self> {
        parse_date_time_micros(lexical).map(TypedValue::date_time_micros)
    }

    pub fn parse_integer(lexical: &str) -> Option<Self> {
        lexical.trim().parse::<i64>().ok().map(TypedValue::integer)
    }

    pub fn parse_decimal(lexical: &str) -> Option<Self> {
        parse_decimal_scaled(lexical.trim()).and_then(TypedValue::decimal_scaled)
    }

    pub fn from_literal(lit: &Literal) -> Option<Self> {
        match lit.datatype()? {
            vocab::XSD_DATE_TIME => Self::parse_date_time(lit.lexical()),
            vocab::XSD_INTEGER => Self::parse_integer(lit.lexical()),
            vocab::XSD_DECIMAL => Self::parse_decimal(lit.lexical()),
            _ => None,
        }
    }

    pub fn from_term(term: &Term) -> Option<Self> {
        term.as_literal().and_then(Self::from_literal)
    }

    /// Canonical lexical form.
    pub fn lexical(&self) -> String {
        self.to_string()
    }

    pub fn to_term(&self) -> Term {
        Term::typed_literal(self.lexical(), self.kind.datatype())
    }

    pub fn comparable(&self, other: &Self) -> bool {
        self.kind.is_numeric() == other.kind.is_numeric()
    }
}

/// Numeric kinds compare by value; dateTime against a number is `None`.
impl PartialOrd for TypedValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.kind == other.kind {
            return Some(self.magnitude.cmp(&other.magnitude));
        }
        Some(self.as_scaled_decimal()?.cmp(&other.as_scaled_decimal()?))
    }
}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ValueKind::Integer => write!(f, "{}", self.magnitude),
            ValueKind::Decimal => {
                let sign = if self.magnitude < 0 { "-" } else { "" };
                let abs = self.magnitude.unsigned_abs();
                let int = abs / DECIMAL_SCALE as u128;
                let frac = abs % DECIMAL_SCALE as u128;
                let mut frac = format!("{frac:018}");
                while frac.len() > 1 && frac.ends_with('0') {
                    frac.pop();
                }
                write!(f, "{sign}{int}.{frac}")
            }
            ValueKind::DateTime => f.write_str(&format_date_time_micros(self.magnitude as i64)),
        }
    }
}

fn parse_decimal_scaled(s: &str) -> Option<i128> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit())
        || !frac_part.bytes().all(|b| b.is_ascii_digit())
        || frac_part.len() > DECIMAL_DIGITS
    {
        return None;
    }
    let int: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    if int >= DECIMAL_INT_LIMIT {
        return None;
    }
    let mut frac: i128 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    for _ in frac_part.len()..DECIMAL_DIGITS {
        frac *= 10;
    }
    let scaled = int * DECIMAL_SCALE + frac;
    Some(if negative { -scaled } else { scaled })
}

/// `YYYY-MM-DDTHH:MM:SS[.ffffff][Z|±HH:MM]`; no offset means UTC.
fn parse_date_time_micros(s: &str) -> Option<i64> {
    let s = s.trim();
    let (body, offset) = split_offset(s)?;
    if let Some((_, frac)) = body.split_once('.') {
        if frac.is_empty() || frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    let naive = NaiveDateTime::parse_from_str(body, "%Y-%m-%dT%H:%M:%S%.f").ok()?;
    let utc = match offset {
        Some(off) => off
            .from_local_datetime(&naive)
            .single()?
            .with_timezone(&Utc),
        None => Utc.from_utc_datetime(&naive),
    };
    Some(utc.timestamp_micros())
}

fn split_offset(s: &str) -> Option<(&str, Option<FixedOffset>)> {
    if let Some(body) = s.strip_suffix('Z') {
        return Some((body, FixedOffset::east_opt(0)));
    }
    // An offset is the trailing "+HH:MM" / "-HH:MM" after the time part.
    if s.len() > 6 {
        let (body, tail) = s.split_at(s.len() - 6);
        let bytes = tail.as_bytes();
        if (bytes[0] == b'+' || bytes[0] == b'-') && bytes[3] == b':' && body.contains('T') {
            let hours: i32 = tail[1..3].parse().ok()?;
            let minutes: i32 = tail[4..6].parse().ok()?;
            let secs = (hours * 3600 + minutes * 60) * if bytes[0] == b'-' { -1 } else { 1 };
            return Some((body, Some(FixedOffset::east_opt(secs)?)));
        }
    }
    Some((s, None))
}

/// Six fractional digits, no offset (UTC implied).
pub(crate) fn format_date_time_micros(micros: i64) -> String {
    match DateTime::<Utc>::from_timestamp_micros(micros) {
        Some(dt) => dt.format("%Y-%m-%dT%H:%M:%S%.6f").to_string(),
        None => micros.to_string(),
    }
}
