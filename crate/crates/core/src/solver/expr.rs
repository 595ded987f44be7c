use std::collections::BTreeSet;
use std::fmt;

use crate::value::TypedValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
        Comparator::Eq,
        Comparator::Ne,
    ];

    /// `x op c` rewritten as `c op' x`.
    pub fn flipped(self) -> Self {
        match self {
            Comparator::Lt => Comparator::Gt,
            Comparator::Le => Comparator::Ge,
            Comparator::Gt => Comparator::Lt,
            Comparator::Ge => Comparator::Le,
            other => other,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
        }
    }

    /// `None` when the operands are incomparable.
    pub fn holds(self, lhs: &TypedValue, rhs: &TypedValue) -> Option<bool> {
        let ord = lhs.partial_cmp(rhs)?;
        Some(match self {
            Comparator::Lt => ord.is_lt(),
            Comparator::Le => ord.is_le(),
            Comparator::Gt => ord.is_gt(),
            Comparator::Ge => ord.is_ge(),
            Comparator::Eq => ord.is_eq(),
            Comparator::Ne => ord.is_ne(),
        })
    }
}

/// `variable comparator value`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub variable: String,
    pub comparator: Comparator,
    pub value: TypedValue,
}

/// Boolean combination of single-variable comparisons against constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstraintExpr {
    True,
    False,
    Atom(Atom),
    And(Vec<ConstraintExpr>),
    Or(Vec<ConstraintExpr>),
    Not(Box<ConstraintExpr>),
}

impl ConstraintExpr {
    pub fn atom(variable: impl Into<String>, comparator: Comparator, value: TypedValue) -> Self {
        ConstraintExpr::Atom(Atom {
            variable: variable.into(),
            comparator,
            value,
        })
    }

    pub fn and(self, other: ConstraintExpr) -> Self {
        match self {
            ConstraintExpr::And(mut items) => {
                items.push(other);
                ConstraintExpr::And(items)
            }
            first => ConstraintExpr::And(vec![first, other]),
        }
    }

    pub fn or(self, other: ConstraintExpr) -> Self {
        match self {
            ConstraintExpr::Or(mut items) => {
                items.push(other);
                ConstraintExpr::Or(items)
            }
            first => ConstraintExpr::Or(vec![first, other]),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        ConstraintExpr::Not(Box::new(self))
    }

    pub fn conjunction(items: impl IntoIterator<Item = ConstraintExpr>) -> Self {
        let items: Vec<_> = items.into_iter().collect();
        match items.len() {
            0 => ConstraintExpr::True,
            1 => items.into_iter().next().unwrap(),
            _ => ConstraintExpr::And(items),
        }
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ConstraintExpr::Atom(a) => {
                out.insert(a.variable.as_str());
            }
            ConstraintExpr::And(items) | ConstraintExpr::Or(items) => {
                items.iter().for_each(|i| i.collect_variables(out))
            }
            ConstraintExpr::Not(inner) => inner.collect_variables(out),
            ConstraintExpr::True | ConstraintExpr::False => {}
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            ConstraintExpr::Atom(a) => out.push(a),
            ConstraintExpr::And(items) | ConstraintExpr::Or(items) => {
                items.iter().for_each(|i| i.collect_atoms(out))
            }
            ConstraintExpr::Not(inner) => inner.collect_atoms(out),
            ConstraintExpr::True | ConstraintExpr::False => {}
        }
    }

    /// Three-valued evaluation: `None` is an error (unbound variable or
    /// incomparable operands). `&&`, `||` and `!` follow SPARQL's
    /// error-propagation tables.
    pub fn evaluate(&self, lookup: &impl Fn(&str) -> Option<TypedValue>) -> Option<bool> {
        match self {
            ConstraintExpr::True => Some(true),
            ConstraintExpr::False => Some(false),
            ConstraintExpr::Atom(a) => a.comparator.holds(&lookup(&a.variable)?, &a.value),
            ConstraintExpr::And(items) => {
                let mut result = Some(true);
                for item in items {
                    match item.evaluate(lookup) {
                        Some(false) => return Some(false),
                        None => result = None,
                        Some(true) => {}
                    }
                }
                result
            }
            ConstraintExpr::Or(items) => {
                let mut result = Some(false);
                for item in items {
                    match item.evaluate(lookup) {
                        Some(true) => return Some(true),
                        None => result = None,
                        Some(false) => {}
                    }
                }
                result
            }
            ConstraintExpr::Not(inner) => inner.evaluate(lookup).map(|b| !b),
        }
    }

    /// Evaluate with every variable bound to `x`.
    pub fn evaluate_at(&self, x: &TypedValue) -> Option<bool> {
        self.evaluate(&|_| Some(*x))
    }

    /// Negation normal form: negations only directly above atoms.
    pub fn to_nnf(&self) -> ConstraintExpr {
        self.nnf(false)
    }

    fn nnf(&self, negate: bool) -> ConstraintExpr {
        match (self, negate) {
            (ConstraintExpr::True, false) | (ConstraintExpr::False, true) => ConstraintExpr::True,
            (ConstraintExpr::True, true) | (ConstraintExpr::False, false) => ConstraintExpr::False,
            (ConstraintExpr::Atom(a), false) => ConstraintExpr::Atom(a.clone()),
            (ConstraintExpr::Atom(a), true) => ConstraintExpr::Atom(a.clone()).not(),
            (ConstraintExpr::Not(inner), _) => inner.nnf(!negate),
            (ConstraintExpr::And(items), false) | (ConstraintExpr::Or(items), true) => {
                ConstraintExpr::And(items.iter().map(|i| i.nnf(negate)).collect())
            }
            (ConstraintExpr::Or(items), false) | (ConstraintExpr::And(items), true) => {
                ConstraintExpr::Or(items.iter().map(|i| i.nnf(negate)).collect())
            }
        }
    }

    /// Weaken the expression to the given variables: after conversion to
    /// negation normal form, every literal over another variable becomes
    /// TRUE. The result is implied by the original expression.
    pub fn restrict_to(&self, keep: &BTreeSet<&str>) -> ConstraintExpr {
        fn go(e: &ConstraintExpr, keep: &BTreeSet<&str>) -> ConstraintExpr {
            match e {
                ConstraintExpr::Atom(a) if !keep.contains(a.variable.as_str()) => {
                    ConstraintExpr::True
                }
                ConstraintExpr::Not(inner) => match inner.as_ref() {
                    ConstraintExpr::Atom(a) if !keep.contains(a.variable.as_str()) => {
                        ConstraintExpr::True
                    }
                    other => go(other, keep).not(),
                },
                ConstraintExpr::And(items) => {
                    ConstraintExpr::And(items.iter().map(|i| go(i, keep)).collect())
                }
                ConstraintExpr::Or(items) => {
                    ConstraintExpr::Or(items.iter().map(|i| go(i, keep)).collect())
                }
                other => other.clone(),
            }
        }
        go(&self.to_nnf(), keep)
    }

    /// Constant folding of TRUE/FALSE through the connectives.
    pub fn simplify(&self) -> ConstraintExpr {
        match self {
            ConstraintExpr::And(items) => {
                let mut kept = Vec::new();
                for item in items.iter().map(ConstraintExpr::simplify) {
                    match item {
                        ConstraintExpr::True => {}
                        ConstraintExpr::False => return ConstraintExpr::False,
                        other => kept.push(other),
                    }
                }
                ConstraintExpr::conjunction(kept)
            }
            ConstraintExpr::Or(items) => {
                let mut kept = Vec::new();
                for item in items.iter().map(ConstraintExpr::simplify) {
                    match item {
                        ConstraintExpr::False => {}
                        ConstraintExpr::True => return ConstraintExpr::True,
                        other => kept.push(other),
                    }
                }
                match kept.len() {
                    0 => ConstraintExpr::False,
                    1 => kept.pop().unwrap(),
                    _ => ConstraintExpr::Or(kept),
                }
            }
            ConstraintExpr::Not(inner) => match inner.simplify() {
                ConstraintExpr::True => ConstraintExpr::False,
                ConstraintExpr::False => ConstraintExpr::True,
                other => other.not(),
            },
            other => other.clone(),
        }
    }

    /// Rename every variable to `name`.
    pub fn rename_all(&self, name: &str) -> ConstraintExpr {
        match self {
            ConstraintExpr::Atom(a) => ConstraintExpr::atom(name, a.comparator, a.value),
            ConstraintExpr::And(items) => {
                ConstraintExpr::And(items.iter().map(|i| i.rename_all(name)).collect())
            }
            ConstraintExpr::Or(items) => {
                ConstraintExpr::Or(items.iter().map(|i| i.rename_all(name)).collect())
            }
            ConstraintExpr::Not(inner) => inner.rename_all(name).not(),
            other => other.clone(),
        }
    }
}

impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, items: &[ConstraintExpr], op: &str| {
            f.write_str("(")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{item}")?;
            }
            f.write_str(")")
        };
        match self {
            ConstraintExpr::True => f.write_str("TRUE"),
            ConstraintExpr::False => f.write_str("FALSE"),
            ConstraintExpr::Atom(a) => {
                write!(f, "?{} {} {}", a.variable, a.comparator.symbol(), a.value)
            }
            ConstraintExpr::And(items) => join(f, items, "&&"),
            ConstraintExpr::Or(items) => join(f, items, "||"),
            ConstraintExpr::Not(inner) => write!(f, "!{inner}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> TypedValue {
        TypedValue::integer(v)
    }

    #[test]
    fn kleene_tables() {
        let lookup = |v: &str| (v == "x").then_some(int(3));
        let unbound = ConstraintExpr::atom("y", Comparator::Eq, int(1));
        let yes = ConstraintExpr::atom("x", Comparator::Eq, int(3));
        let no = ConstraintExpr::atom("x", Comparator::Eq, int(4));
        assert_eq!(unbound.evaluate(&lookup), None);
        assert_eq!(
            unbound.clone().and(no.clone()).evaluate(&lookup),
            Some(false)
        );
        assert_eq!(unbound.clone().and(yes.clone()).evaluate(&lookup), None);
        assert_eq!(unbound.clone().or(yes).evaluate(&lookup), Some(true));
        assert_eq!(unbound.clone().or(no).evaluate(&lookup), None);
        assert_eq!(unbound.not().evaluate(&lookup), None);
    }

    #[test]
    fn nnf_pushes_negation_to_atoms() {
        let a = ConstraintExpr::atom("x", Comparator::Lt, int(1));
        let b = ConstraintExpr::atom("x", Comparator::Gt, int(5));
        let e = a.clone().and(b.clone().not()).not();
        assert_eq!(e.to_nnf(), ConstraintExpr::Or(vec![a.not(), b]));
    }

    #[test]
    fn restriction_replaces_foreign_literals_with_true() {
        let t = ConstraintExpr::atom("t", Comparator::Ge, int(1));
        let v = ConstraintExpr::atom("v", Comparator::Eq, int(5));
        let keep: BTreeSet<&str> = ["t"].into();
        assert_eq!(
            t.clone().and(v.clone()).restrict_to(&keep),
            ConstraintExpr::And(vec![t.clone(), ConstraintExpr::True])
        );
        // A negated foreign atom is weakened, not strengthened.
        assert_eq!(t.clone().and(v.not()).restrict_to(&keep).simplify(), t);
    }

    #[test]
    fn simplify_folds_constants() {
        let t = ConstraintExpr::atom("t", Comparator::Ge, int(1));
        assert_eq!(
            ConstraintExpr::Or(vec![ConstraintExpr::False, t.clone()]).simplify(),
            t
        );
        assert_eq!(
            ConstraintExpr::And(vec![ConstraintExpr::False, t]).simplify(),
            ConstraintExpr::False
        );
        assert_eq!(ConstraintExpr::True.not().simplify(), ConstraintExpr::False);
    }
}
