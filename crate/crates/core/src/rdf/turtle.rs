use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use thiserror::Error;
use url::Url;

use super::lexer::{tokenize, LexError, Spanned, Tok};
use super::vocab;
use super::{Literal, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported Turtle feature at {line}:{column}: {feature}")]
    Unsupported {
        line: usize,
        column: usize,
        feature: String,
    },
}

impl From<LexError> for RdfError {
    fn from(e: LexError) -> Self {
        RdfError::Syntax {
            line: e.line,
            column: e.column,
            message: e.message,
        }
    }
}

/// Parse a document in the supported Turtle subset.
///
/// Relative IRIs are resolved against `base`. Blank node labels are scoped
/// to this document: `_:x` and every `[...]` get fresh `b{n}` labels.
pub fn parse_turtle(text: &str, base: &str) -> Result<Vec<Triple>, RdfError> {
    let tokens = tokenize(text)?;
    let mut parser = TurtleParser {
        tokens,
        pos: 0,
        base: base.to_string(),
        prefixes: HashMap::new(),
        labels: HashMap::new(),
        next_blank: 0,
        out: Vec::new(),
    };
    parser.document()?;
    Ok(parser.out)
}

pub(crate) fn resolve_iri(base: &str, reference: &str) -> String {
    if reference.is_empty() {
        return base.to_string();
    }
    match Url::parse(reference) {
        Ok(abs) => abs.to_string(),
        Err(_) => match Url::parse(base).and_then(|b| b.join(reference)) {
            Ok(resolved) => resolved.to_string(),
            Err(_) => reference.to_string(),
        },
    }
}

struct TurtleParser {
    tokens: Vec<Spanned>,
    pos: usize,
    base: String,
    prefixes: HashMap<String, String>,
    labels: HashMap<String, String>,
    next_blank: usize,
    out: Vec<Triple>,
}

impl TurtleParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|s| &s.tok)
    }

    fn position(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or(self.tokens.last()) {
            Some(s) => (s.line, s.column),
            None => (1, 1),
        }
    }

    fn syntax(&self, message: impl Into<String>) -> RdfError {
        let (line, column) = self.position();
        RdfError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn unsupported(&self, feature: impl Into<String>) -> RdfError {
        let (line, column) = self.position();
        RdfError::Unsupported {
            line,
            column,
            feature: feature.into(),
        }
    }

    fn next(&mut self) -> Result<Tok, RdfError> {
        let tok = self
            .tokens
            .get(self.pos)
            .map(|s| s.tok.clone())
            .ok_or_else(|| self.syntax("unexpected end of document"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: Tok) -> Result<(), RdfError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.syntax(format!("expected '{want}', found '{t}'"))),
            None => Err(self.syntax(format!("expected '{want}', found end of document"))),
        }
    }

    fn fresh_blank(&mut self) -> Term {
        let label = format!("b{}", self.next_blank);
        self.next_blank += 1;
        Term::Blank(label)
    }

    fn emit(&mut self, subject: Term, predicate: Term, object: Term) {
        self.out.push(Triple {
            subject,
            predicate,
            object,
        });
    }

    fn document(&mut self) -> Result<(), RdfError> {
        while let Some(tok) = self.peek() {
            match tok {
                Tok::AtWord(w) if w == "prefix" => {
                    self.pos += 1;
                    self.prefix_decl()?;
                    self.expect(Tok::Dot)?;
                }
                Tok::AtWord(w) if w == "base" => {
                    self.pos += 1;
                    self.base_decl()?;
                    self.expect(Tok::Dot)?;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("prefix") => {
                    self.pos += 1;
                    self.prefix_decl()?;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("base") => {
                    self.pos += 1;
                    self.base_decl()?;
                }
                Tok::Word(w) if w.eq_ignore_ascii_case("graph") => {
                    return Err(self.unsupported("named graphs"));
                }
                Tok::LBrace => return Err(self.unsupported("named graphs")),
                _ => {
                    self.triples()?;
                    self.expect(Tok::Dot)?;
                }
            }
        }
        Ok(())
    }

    fn prefix_decl(&mut self) -> Result<(), RdfError> {
        let name = match self.next()? {
            Tok::PName(p, l) if l.is_empty() => p,
            other => return Err(self.syntax(format!("expected prefix name, found '{other}'"))),
        };
        let iri = match self.next()? {
            Tok::IriRef(iri) => resolve_iri(&self.base, &iri),
            other => return Err(self.syntax(format!("expected IRI, found '{other}'"))),
        };
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn base_decl(&mut self) -> Result<(), RdfError> {
        match self.next()? {
            Tok::IriRef(iri) => {
                self.base = resolve_iri(&self.base, &iri);
                Ok(())
            }
            other => Err(self.syntax(format!("expected IRI, found '{other}'"))),
        }
    }

    fn triples(&mut self) -> Result<(), RdfError> {
        if self.peek() == Some(&Tok::LBracket) {
            let subject = self.blank_property_list()?;
            if self.peek() != Some(&Tok::Dot) {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some(Tok::LParen) => Err(self.unsupported("collections")),
            Some(Tok::IriRef(_) | Tok::PName(..)) => self.iri(),
            Some(Tok::BlankLabel(_)) => self.blank_label(),
            Some(other) => Err(self.syntax(format!("expected subject, found '{other}'"))),
            None => Err(self.syntax("expected subject")),
        }
    }

    fn iri(&mut self) -> Result<Term, RdfError> {
        match self.next()? {
            Tok::IriRef(iri) => Ok(Term::Iri(resolve_iri(&self.base, &iri))),
            Tok::PName(prefix, local) => {
                self.pos -= 1;
                let ns = self
                    .prefixes
                    .get(&prefix)
                    .cloned()
                    .ok_or_else(|| self.syntax(format!("undeclared prefix '{prefix}:'")))?;
                self.pos += 1;
                Ok(Term::Iri(format!("{ns}{local}")))
            }
            other => Err(self.syntax(format!("expected IRI, found '{other}'"))),
        }
    }

    fn blank_label(&mut self) -> Result<Term, RdfError> {
        match self.next()? {
            Tok::BlankLabel(label) => {
                if let Some(mapped) = self.labels.get(&label) {
                    return Ok(Term::Blank(mapped.clone()));
                }
                let fresh = self.fresh_blank();
                if let Term::Blank(l) = &fresh {
                    self.labels.insert(label, l.clone());
                }
                Ok(fresh)
            }
            other => Err(self.syntax(format!("expected blank node, found '{other}'"))),
        }
    }

    fn blank_property_list(&mut self) -> Result<Term, RdfError> {
        self.expect(Tok::LBracket)?;
        let node = self.fresh_blank();
        if self.peek() != Some(&Tok::RBracket) {
            self.predicate_object_list(&node)?;
        }
        self.expect(Tok::RBracket)?;
        Ok(node)
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), RdfError> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            if self.peek() != Some(&Tok::Semicolon) {
                return Ok(());
            }
            while self.peek() == Some(&Tok::Semicolon) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(Tok::Dot | Tok::RBracket) | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> Result<Term, RdfError> {
        if let Some(Tok::Word(w)) = self.peek() {
            if w == "a" {
                self.pos += 1;
                return Ok(Term::iri(vocab::RDF_TYPE));
            }
        }
        match self.peek() {
            Some(Tok::IriRef(_) | Tok::PName(..)) => self.iri(),
            Some(other) => Err(self.syntax(format!("expected predicate, found '{other}'"))),
            None => Err(self.syntax("expected predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> Result<(), RdfError> {
        loop {
            let object = self.object()?;
            self.emit(subject.clone(), predicate.clone(), object);
            if self.peek() != Some(&Tok::Comma) {
                return Ok(());
            }
            self.pos += 1;
        }
    }

    fn object(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some(Tok::IriRef(_) | Tok::PName(..)) => self.iri(),
            Some(Tok::BlankLabel(_)) => self.blank_label(),
            Some(Tok::LBracket) => self.blank_property_list(),
            Some(Tok::LParen) => Err(self.unsupported("collections")),
            Some(Tok::Str(_)) => self.string_literal(),
            Some(Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_)) => {
                let (lexical, datatype) = match self.next()? {
                    Tok::Integer(s) => (s, vocab::XSD_INTEGER),
                    Tok::Decimal(s) => (s, vocab::XSD_DECIMAL),
                    Tok::Double(s) => (s, vocab::XSD_DOUBLE),
                    _ => unreachable!(),
                };
                Ok(Term::typed_literal(lexical, datatype))
            }
            Some(Tok::Word(w)) if w == "true" || w == "false" => {
                let w = w.clone();
                self.pos += 1;
                Ok(Term::typed_literal(w, vocab::XSD_BOOLEAN))
            }
            Some(other) => Err(self.syntax(format!("expected object, found '{other}'"))),
            None => Err(self.syntax("expected object")),
        }
    }

    fn string_literal(&mut self) -> Result<Term, RdfError> {
        let Tok::Str(lexical) = self.next()? else {
            unreachable!()
        };
        match self.peek() {
            Some(Tok::AtWord(_)) => {
                let Tok::AtWord(lang) = self.next()? else {
                    unreachable!()
                };
                Ok(Term::Literal(Literal::lang(lexical, lang)))
            }
            Some(Tok::DoubleCaret) => {
                self.pos += 1;
                let datatype = match self.iri()? {
                    Term::Iri(iri) => iri,
                    _ => unreachable!(),
                };
                Ok(Term::Literal(Literal::typed(lexical, datatype)))
            }
            _ => Ok(Term::Literal(Literal::plain(lexical))),
        }
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn is_safe_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn is_safe_relative(rest: &str) -> bool {
    !rest.is_empty()
        && rest
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !rest.starts_with('.')
}

struct Writer<'a> {
    base_dir: &'a str,
    blank_names: BTreeMap<&'a str, usize>,
}

impl<'a> Writer<'a> {
    fn iri(&self, iri: &str) -> String {
        if let Some(rest) = iri.strip_prefix(self.base_dir) {
            if is_safe_relative(rest) {
                return format!("<{rest}>");
            }
        }
        for (prefix, ns) in vocab::WELL_KNOWN_PREFIXES {
            if let Some(local) = iri.strip_prefix(ns) {
                if is_safe_local(local) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{iri}>")
    }

    fn term(&self, term: &'a Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Blank(label) => format!("_:b{}", self.blank_names[label.as_str()]),
            Term::Literal(lit) => {
                let mut s = format!("\"{}\"", escape_string(lit.lexical()));
                if let Some(lang) = lit.language() {
                    s.push('@');
                    s.push_str(lang);
                } else if let Some(dt) = lit.datatype() {
                    s.push_str("^^");
                    s.push_str(&self.iri(dt));
                }
                s
            }
        }
    }

    fn predicate(&self, term: &'a Term) -> String {
        match term {
            Term::Iri(iri) if iri == vocab::RDF_TYPE => "a".to_string(),
            other => self.term(other),
        }
    }
}

/// Serialize triples as Turtle. Output is deterministic: subjects appear in
/// first-occurrence order, IRIs in the same directory as `base` are written
/// relative, and blank nodes are relabeled `_:b0`, `_:b1`, ...
pub fn serialize_turtle(triples: &[Triple], base: &str) -> String {
    let base_dir = match base.rfind('/') {
        Some(i) => &base[..=i],
        None => "",
    };
    let mut writer = Writer {
        base_dir,
        blank_names: BTreeMap::new(),
    };
    let mut next = 0;
    for t in triples {
        for term in [&t.subject, &t.object] {
            if let Term::Blank(label) = term {
                writer.blank_names.entry(label.as_str()).or_insert_with(|| {
                    next += 1;
                    next - 1
                });
            }
        }
    }

    let mut out = String::new();
    for (prefix, ns) in vocab::WELL_KNOWN_PREFIXES {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }

    // Group by subject, keeping first-occurrence order.
    let mut order: Vec<&Term> = Vec::new();
    let mut groups: HashMap<&Term, Vec<&Triple>> = HashMap::new();
    for t in triples {
        groups
            .entry(&t.subject)
            .or_insert_with(|| {
                order.push(&t.subject);
                Vec::new()
            })
            .push(t);
    }
    for subject in order {
        out.push('\n');
        out.push_str(&writer.term(subject));
        let group = &groups[subject];
        for (i, t) in group.iter().enumerate() {
            let sep = if i == 0 { " " } else { " ;\n    " };
            out.push_str(sep);
            out.push_str(&writer.predicate(&t.predicate));
            out.push(' ');
            out.push_str(&writer.term(&t.object));
        }
        out.push_str(" .\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::isomorphic;

    const BASE: &str = "http://example.org/data/root.ttl";

    const FIGURE_RELATION: &str = r#"
@prefix tree: <https://w3id.org/tree#> .
@prefix saref: <https://saref.etsi.org/core/> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
@prefix ex: <http://example.org/> .

<> tree:relation [
    a tree:GreaterThanOrEqualToRelation ;
    tree:path saref:hasTimestamp ;
    tree:value "2022-01-03T09:47:59.000000"^^xsd:dateTime ;
    tree:node ex:nextNode
] .
"#;

    #[test]
    fn figure_relation_yields_five_triples() {
        let triples = parse_turtle(FIGURE_RELATION, BASE).unwrap();
        assert_eq!(triples.len(), 5);
        let rel: Vec<_> = triples
            .iter()
            .filter(|t| t.predicate == Term::iri(vocab::TREE_RELATION))
            .collect();
        assert_eq!(rel.len(), 1);
        assert_eq!(rel[0].subject, Term::iri(BASE));
        assert!(rel[0].object.is_blank());
        let off_blank = triples
            .iter()
            .filter(|t| t.subject == rel[0].object)
            .count();
        assert_eq!(off_blank, 4);
        assert!(triples.contains(&Triple::new(
            rel[0].object.clone(),
            Term::iri(vocab::TREE_NODE),
            Term::iri("http://example.org/nextNode"),
        )));
    }

    #[test]
    fn empty_document() {
        assert!(parse_turtle("", BASE).unwrap().is_empty());
        assert!(parse_turtle("# only a comment\n", BASE).unwrap().is_empty());
    }

    #[test]
    fn object_list_expands() {
        let doc = "@prefix ex: <http://example.org/> .\n\
                   @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n\
                   ex:s ex:p \"5\"^^xsd:integer , \"6\"^^xsd:integer .";
        let triples = parse_turtle(doc, BASE).unwrap();
        assert_eq!(triples.len(), 2);
        assert_eq!(triples[0].subject, triples[1].subject);
        assert_eq!(triples[0].predicate, triples[1].predicate);
        assert_eq!(
            triples[1].object,
            Term::typed_literal("6", vocab::XSD_INTEGER)
        );
    }

    #[test]
    fn relative_iris_resolve_against_base() {
        let triples = parse_turtle("<a> <p> <../b> .", BASE).unwrap();
        assert_eq!(triples[0].subject, Term::iri("http://example.org/data/a"));
        assert_eq!(triples[0].object, Term::iri("http://example.org/b"));
    }

    #[test]
    fn blank_labels_are_document_scoped() {
        let triples = parse_turtle("_:x <p> _:y . _:x <q> _:y .", BASE).unwrap();
        assert_eq!(triples[0].subject, triples[1].subject);
        assert_eq!(triples[0].object, triples[1].object);
        assert_ne!(triples[0].subject, triples[0].object);
    }

    #[test]
    fn literals_of_every_form() {
        let doc = "@prefix ex: <http://example.org/> .\n\
                   ex:s ex:p \"hi\"@en, \"plain\", 12, 1.5, 2e3, true .";
        let objs: Vec<Term> = parse_turtle(doc, BASE)
            .unwrap()
            .into_iter()
            .map(|t| t.object)
            .collect();
        assert_eq!(
            objs,
            vec![
                Term::Literal(Literal::lang("hi", "en")),
                Term::plain_literal("plain"),
                Term::typed_literal("12", vocab::XSD_INTEGER),
                Term::typed_literal("1.5", vocab::XSD_DECIMAL),
                Term::typed_literal("2e3", vocab::XSD_DOUBLE),
                Term::typed_literal("true", vocab::XSD_BOOLEAN),
            ]
        );
    }

    #[test]
    fn sparql_style_prefix_and_trailing_semicolon() {
        let doc = "PREFIX ex: <http://example.org/>\nex:s ex:p ex:o ; .";
        assert_eq!(parse_turtle(doc, BASE).unwrap().len(), 1);
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_turtle("<a> <b> <c>\n<d> <e> .", BASE).unwrap_err();
        match err {
            RdfError::Syntax { line, column, .. } => assert_eq!((line, column), (2, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_turtle("ex:s <p> <o> .", BASE),
            Err(RdfError::Syntax { .. })
        ));
    }

    #[test]
    fn unsupported_constructs() {
        assert!(matches!(
            parse_turtle("<a> <b> ( 1 2 ) .", BASE),
            Err(RdfError::Unsupported { .. })
        ));
        assert!(matches!(
            parse_turtle("GRAPH <g> { <a> <b> <c> }", BASE),
            Err(RdfError::Unsupported { .. })
        ));
        assert!(matches!(
            parse_turtle("<g> { <a> <b> <c> }", BASE),
            Err(RdfError::Syntax { .. }) | Err(RdfError::Unsupported { .. })
        ));
    }

    #[test]
    fn serialize_empty_is_prefixes_only() {
        let text = serialize_turtle(&[], BASE);
        assert!(text.lines().all(|l| l.starts_with("@prefix")));
        assert!(parse_turtle(&text, BASE).unwrap().is_empty());
    }

    #[test]
    fn single_triple_round_trip() {
        let t = Triple::new(
            Term::iri("http://example.org/m1"),
            Term::iri(vocab::SAREF_HAS_VALUE),
            Term::typed_literal("a \"quoted\"\nvalue", "http://example.org/dt"),
        );
        let text = serialize_turtle(std::slice::from_ref(&t), BASE);
        assert_eq!(parse_turtle(&text, BASE).unwrap(), vec![t]);
    }

    #[test]
    fn figure_relation_round_trip_is_isomorphic() {
        let triples = parse_turtle(FIGURE_RELATION, BASE).unwrap();
        let text = serialize_turtle(&triples, BASE);
        let again = parse_turtle(&text, BASE).unwrap();
        assert!(isomorphic(&triples, &again));
    }

    #[test]
    fn sibling_documents_are_written_relative() {
        let t = Triple::new(
            Term::blank("r"),
            Term::iri(vocab::TREE_NODE),
            Term::iri("http://example.org/data/leaf-0001.ttl"),
        );
        let text = serialize_turtle(std::slice::from_ref(&t), BASE);
        assert!(text.contains("tree:node <leaf-0001.ttl>"), "{text}");
        let moved = parse_turtle(&text, "file:///tmp/x/root.ttl").unwrap();
        assert_eq!(moved[0].object, Term::iri("file:///tmp/x/leaf-0001.ttl"));
    }
}
