use std::collections::HashMap;

use super::{PatternTerm, Query, QueryError, TriplePattern};
use crate::rdf::lexer::{tokenize, Spanned, Tok};
use crate::rdf::turtle::resolve_iri;
use crate::rdf::{vocab, Literal, Term};
use crate::solver::{Comparator, ConstraintExpr};
use crate::value::TypedValue;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "OPTIONAL",
    "UNION",
    "MINUS",
    "GRAPH",
    "SERVICE",
    "BIND",
    "VALUES",
    "ORDER",
    "GROUP",
    "HAVING",
    "LIMIT",
    "OFFSET",
    "CONSTRUCT",
    "ASK",
    "DESCRIBE",
    "DISTINCT",
    "REDUCED",
    "FROM",
];

/// Parse `PREFIX* SELECT (vars|*) WHERE { patterns [FILTER(...)] } [FILTER(...)]`.
/// Several FILTERs are conjoined.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let tokens = tokenize(text).map_err(|e| QueryError::Syntax {
        line: e.line,
        column: e.column,
        message: e.message,
    })?;
    let mut p = QueryParser {
        tokens,
        pos: 0,
        prefixes: HashMap::new(),
        base: String::new(),
    };
    p.query()
}

struct QueryParser {
    tokens: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    base: String,
}

impl QueryParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn syntax(&self, message: impl Into<String>) -> QueryError {
        let (line, column) = self
            .tokens
            .get(self.pos)
            .or(self.tokens.last())
            .map(|s| (s.line, s.column))
            .unwrap_or((1, 1));
        QueryError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Tok, QueryError> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| self.syntax("unexpected end of query"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: Tok) -> Result<(), QueryError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.syntax(format!("expected '{want}', found '{t}'"))),
            None => Err(self.syntax(format!("expected '{want}', found end of query"))),
        }
    }

    fn keyword(&self) -> Option<String> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w.to_ascii_uppercase()),
            _ => None,
        }
    }

    fn check_unsupported(&self) -> Result<(), QueryError> {
        if let Some(k) = self.keyword() {
            if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) {
                return Err(QueryError::Unsupported(k));
            }
        }
        Ok(())
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            match self.keyword().as_deref() {
                Some("PREFIX") => {
                    self.pos += 1;
                    let name = match self.next()? {
                        Tok::PName(p, l) if l.is_empty() => p,
                        other => {
                            return Err(self.syntax(format!("expected prefix, found '{other}'")))
                        }
                    };
                    let iri = match self.next()? {
                        Tok::IriRef(iri) => iri,
                        other => return Err(self.syntax(format!("expected IRI, found '{other}'"))),
                    };
                    self.prefixes.insert(name, iri);
                }
                Some("BASE") => {
                    self.pos += 1;
                    match self.next()? {
                        Tok::IriRef(iri) => self.base = iri,
                        other => return Err(self.syntax(format!("expected IRI, found '{other}'"))),
                    }
                }
                _ => break,
            }
        }

        self.check_unsupported()?;
        if self.keyword().as_deref() != Some("SELECT") {
            return Err(self.syntax("expected SELECT"));
        }
        self.pos += 1;
        self.check_unsupported()?;

        let projected = if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            None
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.pos += 1;
            }
            if vars.is_empty() {
                return Err(self.syntax("expected '*' or variables after SELECT"));
            }
            Some(vars)
        };

        self.check_unsupported()?;
        if self.keyword().as_deref() == Some("WHERE") {
            self.pos += 1;
        }
        self.expect(Tok::LBrace)?;
        let mut bgp = Vec::new();
        let mut filters = Vec::new();
        self.group(&mut bgp, &mut filters)?;
        self.expect(Tok::RBrace)?;

        while self.keyword().as_deref() == Some("FILTER") {
            self.pos += 1;
            filters.push(self.filter_body()?);
        }
        self.check_unsupported()?;
        if let Some(t) = self.peek() {
            return Err(self.syntax(format!("unexpected '{t}' after query")));
        }

        let filter = (!filters.is_empty()).then(|| ConstraintExpr::conjunction(filters));
        Query::new(projected, bgp, filter)
    }

    fn group(
        &mut self,
        bgp: &mut Vec<TriplePattern>,
        filters: &mut Vec<ConstraintExpr>,
    ) -> Result<(), QueryError> {
        loop {
            self.check_unsupported()?;
            match self.peek() {
                Some(Tok::RBrace) | None => return Ok(()),
                Some(Tok::LBrace) => {
                    return Err(QueryError::Unsupported("nested group patterns".into()))
                }
                Some(Tok::Dot) => self.pos += 1,
                _ if self.keyword().as_deref() == Some("FILTER") => {
                    self.pos += 1;
                    filters.push(self.filter_body()?);
                }
                _ if self.keyword().as_deref() == Some("SELECT") => {
                    return Err(QueryError::Unsupported("subqueries".into()))
                }
                _ => self.triples_block(bgp)?,
            }
        }
    }

    fn triples_block(&mut self, bgp: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let subject = self.pattern_term(false)?;
        loop {
            let predicate = match self.peek() {
                Some(Tok::Word(w)) if w == "a" => {
                    self.pos += 1;
                    PatternTerm::Term(Term::iri(vocab::RDF_TYPE))
                }
                _ => self.pattern_term(false)?,
            };
            if matches!(predicate, PatternTerm::Term(ref t) if !matches!(t, Term::Iri(_))) {
                return Err(self.syntax("predicate must be an IRI or variable"));
            }
            loop {
                let object = self.pattern_term(true)?;
                bgp.push(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                });
                if self.peek() != Some(&Tok::Comma) {
                    break;
                }
                self.pos += 1;
            }
            if self.peek() != Some(&Tok::Semicolon) {
                return Ok(());
            }
            self.pos += 1;
            if matches!(self.peek(), Some(Tok::Dot | Tok::RBrace)) {
                return Ok(());
            }
        }
    }

    fn iri_token(&mut self) -> Result<String, QueryError> {
        match self.next()? {
            Tok::IriRef(iri) => Ok(if self.base.is_empty() {
                iri
            } else {
                resolve_iri(&self.base, &iri)
            }),
            Tok::PName(prefix, local) => self
                .prefixes
                .get(&prefix)
                .map(|ns| format!("{ns}{local}"))
                .ok_or_else(|| {
                    self.pos -= 1;
                    self.syntax(format!("undeclared prefix '{prefix}:'"))
                }),
            other => {
                self.pos -= 1;
                Err(self.syntax(format!("expected IRI, found '{other}'")))
            }
        }
    }

    fn pattern_term(&mut self, allow_literal: bool) -> Result<PatternTerm, QueryError> {
        match self.peek() {
            Some(Tok::Var(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(PatternTerm::Var(v))
            }
            Some(Tok::IriRef(_) | Tok::PName(..)) => {
                Ok(PatternTerm::Term(Term::Iri(self.iri_token()?)))
            }
            Some(Tok::BlankLabel(l)) => {
                // Blank nodes in patterns act as variables.
                let v = format!("_:{l}");
                self.pos += 1;
                Ok(PatternTerm::Var(v))
            }
            Some(Tok::LBracket | Tok::LParen) => Err(QueryError::Unsupported(
                "blank node property lists and collections".into(),
            )),
            Some(_) if allow_literal => Ok(PatternTerm::Term(self.literal()?)),
            Some(t) => Err(self.syntax(format!("unexpected '{t}' in triple pattern"))),
            None => Err(self.syntax("unexpected end of query in triple pattern")),
        }
    }

    fn literal(&mut self) -> Result<Term, QueryError> {
        match self.next()? {
            Tok::Str(lexical) => match self.peek() {
                Some(Tok::AtWord(_)) => {
                    let Tok::AtWord(lang) = self.next()? else {
                        unreachable!()
                    };
                    Ok(Term::Literal(Literal::lang(lexical, lang)))
                }
                Some(Tok::DoubleCaret) => {
                    self.pos += 1;
                    let dt = self.iri_token()?;
                    Ok(Term::typed_literal(lexical, dt))
                }
                _ => Ok(Term::plain_literal(lexical)),
            },
            Tok::Integer(s) => Ok(Term::typed_literal(s, vocab::XSD_INTEGER)),
            Tok::Decimal(s) => Ok(Term::typed_literal(s, vocab::XSD_DECIMAL)),
            Tok::Double(s) => Ok(Term::typed_literal(s, vocab::XSD_DOUBLE)),
            Tok::Word(w) if w == "true" || w == "false" => {
                Ok(Term::typed_literal(w, vocab::XSD_BOOLEAN))
            }
            other => {
                self.pos -= 1;
                Err(self.syntax(format!("expected a literal, found '{other}'")))
            }
        }
    }

    fn filter_body(&mut self) -> Result<ConstraintExpr, QueryError> {
        self.expect(Tok::LParen)?;
        let e = self.or_expr()?;
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<ConstraintExpr, QueryError> {
        let mut items = vec![self.and_expr()?];
        while self.peek() == Some(&Tok::OrOr) {
            self.pos += 1;
            items.push(self.and_expr()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ConstraintExpr::Or(items)
        })
    }

    fn and_expr(&mut self) -> Result<ConstraintExpr, QueryError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::AndAnd) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            ConstraintExpr::And(items)
        })
    }

    fn unary(&mut self) -> Result<ConstraintExpr, QueryError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or_expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                let value = w == "true";
                self.pos += 1;
                Ok(if value {
                    ConstraintExpr::True
                } else {
                    ConstraintExpr::False
                })
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> Result<ConstraintExpr, QueryError> {
        let lhs = self.operand()?;
        let comparator = match self.next()? {
            Tok::Lt => Comparator::Lt,
            Tok::Le => Comparator::Le,
            Tok::Gt => Comparator::Gt,
            Tok::Ge => Comparator::Ge,
            Tok::Eq => Comparator::Eq,
            Tok::Ne => Comparator::Ne,
            other => {
                self.pos -= 1;
                return Err(self.syntax(format!("expected a comparison operator, found '{other}'")));
            }
        };
        let rhs = self.operand()?;
        match (lhs, rhs) {
            (Operand::Var(v), Operand::Const(c)) => Ok(ConstraintExpr::atom(v, comparator, c)),
            (Operand::Const(c), Operand::Var(v)) => {
                Ok(ConstraintExpr::atom(v, comparator.flipped(), c))
            }
            (Operand::Var(_), Operand::Var(_)) => Err(QueryError::Unsupported(
                "comparisons between two variables".into(),
            )),
            (Operand::Const(_), Operand::Const(_)) => Err(QueryError::Unsupported(
                "comparisons between two constants".into(),
            )),
        }
    }

    fn operand(&mut self) -> Result<Operand, QueryError> {
        if let Some(Tok::Var(v)) = self.peek() {
            let v = v.clone();
            self.pos += 1;
            return Ok(Operand::Var(v));
        }
        if let Some(Tok::Word(w)) = self.peek() {
            return Err(QueryError::Unsupported(format!("filter function {w}")));
        }
        let term = self.literal()?;
        let lit = term.as_literal().expect("literal() returns literals");
        TypedValue::from_literal(lit)
            .map(Operand::Const)
            .ok_or_else(|| {
                QueryError::Unsupported(format!(
                    "filter constant {term} (only xsd:dateTime, xsd:integer and xsd:decimal)"
                ))
            })
    }
}

enum Operand {
    Var(String),
    Const(TypedValue),
}
