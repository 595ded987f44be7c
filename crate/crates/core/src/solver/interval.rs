use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use super::expr::{Comparator, ConstraintExpr};
use crate::value::{format_date_time_micros, TypedValue, ValueKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("constants of incomparable kinds (dateTime and numeric) in one expression")]
    IncomparableKinds,
    #[error("expression mentions more than one variable: {0:?}")]
    MultipleVariables(Vec<String>),
}

/// The ordered axis an expression's constants live on.
///
/// Integer and dateTime axes are discrete (step 1 and 1µs); the decimal axis
/// is treated as dense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Integer,
    Decimal,
    DateTime,
}

impl Axis {
    pub fn is_discrete(self) -> bool {
        !matches!(self, Axis::Decimal)
    }

    /// Infer the axis from the constants of the given expressions: all
    /// integers give the integer axis, any decimal the decimal axis, and
    /// dateTimes the dateTime axis. Expressions without constants default
    /// to the decimal axis.
    pub fn infer<'a>(
        exprs: impl IntoIterator<Item = &'a ConstraintExpr>,
    ) -> Result<Axis, SolverError> {
        let mut axis: Option<Axis> = None;
        for expr in exprs {
            for atom in expr.atoms() {
                let here = match atom.value.kind() {
                    ValueKind::Integer => Axis::Integer,
                    ValueKind::Decimal => Axis::Decimal,
                    ValueKind::DateTime => Axis::DateTime,
                };
                axis = Some(match (axis, here) {
                    (None, a) => a,
                    (Some(a), b) if a == b => a,
                    (Some(Axis::DateTime), _) | (Some(_), Axis::DateTime) => {
                        return Err(SolverError::IncomparableKinds)
                    }
                    _ => Axis::Decimal,
                });
            }
        }
        Ok(axis.unwrap_or(Axis::Decimal))
    }

    /// Position of a value on this axis, `None` if the kinds are incomparable.
    pub fn position(self, value: &TypedValue) -> Option<i128> {
        match (self, value.kind()) {
            (Axis::DateTime, ValueKind::DateTime) => Some(value.magnitude()),
            (Axis::DateTime, _) | (_, ValueKind::DateTime) => None,
            (Axis::Integer, ValueKind::Integer) => Some(value.magnitude()),
            (Axis::Integer, ValueKind::Decimal) => None,
            (Axis::Decimal, _) => value.as_scaled_decimal(),
        }
    }

    fn show(self, position: i128) -> String {
        match self {
            Axis::Integer => position.to_string(),
            Axis::Decimal => TypedValue::decimal_scaled(position)
                .map(|v| v.to_string())
                .unwrap_or_else(|| format!("{}e-18", position)),
            Axis::DateTime => format_date_time_micros(position as i64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Unbounded,
    Closed(i128),
    Open(i128),
}

impl Endpoint {
    fn flipped(self) -> Endpoint {
        match self {
            Endpoint::Closed(v) => Endpoint::Open(v),
            Endpoint::Open(v) => Endpoint::Closed(v),
            Endpoint::Unbounded => Endpoint::Unbounded,
        }
    }
}

/// Compare two lower endpoints: which one admits smaller values.
fn cmp_lower(a: Endpoint, b: Endpoint) -> Ordering {
    let key = |e: Endpoint| match e {
        Endpoint::Unbounded => (i128::MIN, 0),
        Endpoint::Closed(v) => (v, 1),
        Endpoint::Open(v) => (v, 2),
    };
    key(a).cmp(&key(b))
}

fn cmp_upper(a: Endpoint, b: Endpoint) -> Ordering {
    let key = |e: Endpoint| match e {
        Endpoint::Unbounded => (i128::MAX, 2),
        Endpoint::Closed(v) => (v, 1),
        Endpoint::Open(v) => (v, 0),
    };
    key(a).cmp(&key(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lower: Endpoint,
    pub upper: Endpoint,
}

impl Interval {
    pub fn new(lower: Endpoint, upper: Endpoint) -> Self {
        Interval { lower, upper }
    }

    pub fn full() -> Self {
        Interval::new(Endpoint::Unbounded, Endpoint::Unbounded)
    }

    pub fn point(v: i128) -> Self {
        Interval::new(Endpoint::Closed(v), Endpoint::Closed(v))
    }

    fn is_empty(&self) -> bool {
        match (self.lower, self.upper) {
            (Endpoint::Closed(a), Endpoint::Closed(b)) => a > b,
            (Endpoint::Closed(a) | Endpoint::Open(a), Endpoint::Closed(b) | Endpoint::Open(b)) => {
                a >= b
            }
            _ => false,
        }
    }

    fn contains(&self, x: i128) -> bool {
        let above = match self.lower {
            Endpoint::Unbounded => true,
            Endpoint::Closed(a) => x >= a,
            Endpoint::Open(a) => x > a,
        };
        let below = match self.upper {
            Endpoint::Unbounded => true,
            Endpoint::Closed(b) => x <= b,
            Endpoint::Open(b) => x < b,
        };
        above && below
    }

    /// On a discrete axis open ends become closed ends one step inward.
    fn discretized(self) -> Self {
        let lower = match self.lower {
            Endpoint::Open(a) => Endpoint::Closed(a + 1),
            other => other,
        };
        let upper = match self.upper {
            Endpoint::Open(b) => Endpoint::Closed(b - 1),
            other => other,
        };
        Interval { lower, upper }
    }
}

/// Sorted list of disjoint, non-adjacent, non-empty intervals over one axis.
/// The empty list is the unsatisfiable set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntervalSet {
    axis: Axis,
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty(axis: Axis) -> Self {
        IntervalSet {
            axis,
            intervals: Vec::new(),
        }
    }

    pub fn full(axis: Axis) -> Self {
        IntervalSet {
            axis,
            intervals: vec![Interval::full()],
        }
    }

    /// Build a normalized set from arbitrary (possibly overlapping or empty)
    /// intervals.
    pub fn from_intervals(axis: Axis, intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut items: Vec<Interval> = intervals
            .into_iter()
            .map(|i| {
                if axis.is_discrete() {
                    i.discretized()
                } else {
                    i
                }
            })
            .filter(|i| !i.is_empty())
            .collect();
        items.sort_by(|a, b| cmp_lower(a.lower, b.lower));
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for next in items {
            if let Some(last) = merged.last_mut() {
                if touches(axis, last.upper, next.lower) {
                    if cmp_upper(next.upper, last.upper).is_gt() {
                        last.upper = next.upper;
                    }
                    continue;
                }
            }
            merged.push(next);
        }
        IntervalSet {
            axis,
            intervals: merged,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains_position(&self, x: i128) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// `false` for values not on this axis.
    pub fn contains(&self, value: &TypedValue) -> bool {
        self.axis
            .position(value)
            .is_some_and(|x| self.contains_position(x))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::from_intervals(
            self.axis,
            self.intervals.iter().chain(&other.intervals).copied(),
        )
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                let lower = if cmp_lower(a.lower, b.lower).is_ge() {
                    a.lower
                } else {
                    b.lower
                };
                let upper = if cmp_upper(a.upper, b.upper).is_le() {
                    a.upper
                } else {
                    b.upper
                };
                out.push(Interval { lower, upper });
            }
        }
        IntervalSet::from_intervals(self.axis, out)
    }

    pub fn complement(&self) -> IntervalSet {
        let mut gaps = Vec::new();
        let mut lower = Endpoint::Unbounded;
        let mut open_start = true;
        for i in &self.intervals {
            if i.lower != Endpoint::Unbounded {
                gaps.push(Interval::new(
                    if open_start { lower } else { lower.flipped() },
                    i.lower.flipped(),
                ));
            }
            lower = i.upper;
            open_start = false;
        }
        if open_start {
            gaps.push(Interval::full());
        } else if lower != Endpoint::Unbounded {
            gaps.push(Interval::new(lower.flipped(), Endpoint::Unbounded));
        }
        IntervalSet::from_intervals(self.axis, gaps)
    }
}

fn touches(axis: Axis, upper: Endpoint, lower: Endpoint) -> bool {
    match (upper, lower) {
        (Endpoint::Unbounded, _) | (_, Endpoint::Unbounded) => true,
        (Endpoint::Closed(b), Endpoint::Closed(a)) if axis.is_discrete() => {
            a <= b.saturating_add(1)
        }
        (Endpoint::Closed(b) | Endpoint::Open(b), Endpoint::Closed(a) | Endpoint::Open(a)) => {
            a < b
                || (a == b
                    && (matches!(upper, Endpoint::Closed(_))
                        || matches!(lower, Endpoint::Closed(_))))
        }
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return f.write_str("∅");
        }
        for (n, i) in self.intervals.iter().enumerate() {
            if n > 0 {
                f.write_str(" ∪ ")?;
            }
            match i.lower {
                Endpoint::Unbounded => f.write_str("(-∞")?,
                Endpoint::Closed(a) => write!(f, "[{}", self.axis.show(a))?,
                Endpoint::Open(a) => write!(f, "({}", self.axis.show(a))?,
            }
            f.write_str(", ")?;
            match i.upper {
                Endpoint::Unbounded => f.write_str("+∞)")?,
                Endpoint::Closed(b) => write!(f, "{}]", self.axis.show(b))?,
                Endpoint::Open(b) => write!(f, "{})", self.axis.show(b))?,
            }
        }
        Ok(())
    }
}

/// Exact set of values satisfying a single-variable expression.
pub fn to_interval_set(expr: &ConstraintExpr) -> Result<IntervalSet, SolverError> {
    let vars = expr.variables();
    if vars.len() > 1 {
        return Err(SolverError::MultipleVariables(
            vars.into_iter().map(str::to_string).collect(),
        ));
    }
    let axis = Axis::infer([expr])?;
    interval_set_on(expr, axis)
}

/// Interval set of `expr` on a given axis, ignoring variable names.
pub(crate) fn interval_set_on(
    expr: &ConstraintExpr,
    axis: Axis,
) -> Result<IntervalSet, SolverError> {
    Ok(match expr {
        ConstraintExpr::True => IntervalSet::full(axis),
        ConstraintExpr::False => IntervalSet::empty(axis),
        ConstraintExpr::Atom(atom) => {
            let v = axis
                .position(&atom.value)
                .ok_or(SolverError::IncomparableKinds)?;
            let u = Endpoint::Unbounded;
            let pieces = match atom.comparator {
                Comparator::Lt => vec![Interval::new(u, Endpoint::Open(v))],
                Comparator::Le => vec![Interval::new(u, Endpoint::Closed(v))],
                Comparator::Gt => vec![Interval::new(Endpoint::Open(v), u)],
                Comparator::Ge => vec![Interval::new(Endpoint::Closed(v), u)],
                Comparator::Eq => vec![Interval::point(v)],
                Comparator::Ne => vec![
                    Interval::new(u, Endpoint::Open(v)),
                    Interval::new(Endpoint::Open(v), u),
                ],
            };
            IntervalSet::from_intervals(axis, pieces)
        }
        ConstraintExpr::And(items) => {
            let mut acc = IntervalSet::full(axis);
            for item in items {
                acc = acc.intersection(&interval_set_on(item, axis)?);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        ConstraintExpr::Or(items) => {
            let mut acc = IntervalSet::empty(axis);
            for item in items {
                acc = acc.union(&interval_set_on(item, axis)?);
            }
            acc
        }
        ConstraintExpr::Not(inner) => interval_set_on(inner, axis)?.complement(),
    })
}
