//! Tokenizer shared by the Turtle reader and the query parser.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// `<...>` with the brackets stripped, escapes not processed.
    IriRef(String),
    /// `prefix:local`; the prefix may be empty.
    PName(String, String),
    /// `_:label`
    BlankLabel(String),
    /// `?name` or `$name`
    Var(String),
    Str(String),
    /// `@en`, `@prefix`, `@base`
    AtWord(String),
    Integer(String),
    Decimal(String),
    Double(String),
    /// Bare word: `a`, `true`, `PREFIX`, `SELECT`, ...
    Word(String),
    DoubleCaret,
    Dot,
    Semicolon,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Star,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Bang,
    AndAnd,
    OrOr,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::IriRef(s) => write!(f, "<{s}>"),
            Tok::PName(p, l) => write!(f, "{p}:{l}"),
            Tok::BlankLabel(l) => write!(f, "_:{l}"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::AtWord(w) => write!(f, "@{w}"),
            Tok::Integer(s) | Tok::Decimal(s) | Tok::Double(s) | Tok::Word(s) => f.write_str(s),
            Tok::DoubleCaret => f.write_str("^^"),
            Tok::Dot => f.write_str("."),
            Tok::Semicolon => f.write_str(";"),
            Tok::Comma => f.write_str(","),
            Tok::LBracket => f.write_str("["),
            Tok::RBracket => f.write_str("]"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::Star => f.write_str("*"),
            Tok::Lt => f.write_str("<"),
            Tok::Le => f.write_str("<="),
            Tok::Gt => f.write_str(">"),
            Tok::Ge => f.write_str(">="),
            Tok::Eq => f.write_str("="),
            Tok::Ne => f.write_str("!="),
            Tok::Bang => f.write_str("!"),
            Tok::AndAnd => f.write_str("&&"),
            Tok::OrOr => f.write_str("||"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, LexError> {
    Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

impl Lexer {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> LexError {
        LexError {
            line,
            column,
            message: message.into(),
        }
    }

    fn run(mut self) -> Result<Vec<Spanned>, LexError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else { break };
            let tok = self.next_token(c, line, column)?;
            out.push(Spanned { tok, line, column });
        }
        Ok(out)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self, c: char, line: usize, column: usize) -> Result<Tok, LexError> {
        let single = |lexer: &mut Self, tok: Tok| {
            lexer.bump();
            Ok(tok)
        };
        match c {
            '<' => {
                if let Some(iri) = self.scan_iri() {
                    Ok(Tok::IriRef(iri))
                } else if self.peek_at(1) == Some('=') {
                    self.bump();
                    single(self, Tok::Le)
                } else {
                    single(self, Tok::Lt)
                }
            }
            '>' => {
                if self.peek_at(1) == Some('=') {
                    self.bump();
                    single(self, Tok::Ge)
                } else {
                    single(self, Tok::Gt)
                }
            }
            '=' => single(self, Tok::Eq),
            '!' => {
                if self.peek_at(1) == Some('=') {
                    self.bump();
                    single(self, Tok::Ne)
                } else {
                    single(self, Tok::Bang)
                }
            }
            '&' if self.peek_at(1) == Some('&') => {
                self.bump();
                single(self, Tok::AndAnd)
            }
            '|' if self.peek_at(1) == Some('|') => {
                self.bump();
                single(self, Tok::OrOr)
            }
            '^' if self.peek_at(1) == Some('^') => {
                self.bump();
                single(self, Tok::DoubleCaret)
            }
            ';' => single(self, Tok::Semicolon),
            ',' => single(self, Tok::Comma),
            '[' => single(self, Tok::LBracket),
            ']' => single(self, Tok::RBracket),
            '(' => single(self, Tok::LParen),
            ')' => single(self, Tok::RParen),
            '{' => single(self, Tok::LBrace),
            '}' => single(self, Tok::RBrace),
            '*' => single(self, Tok::Star),
            '"' | '\'' => self.scan_string(c, line, column),
            '@' => {
                self.bump();
                let word = self.take_while(|c| c.is_alphanumeric() || c == '-');
                if word.is_empty() {
                    Err(self.error(line, column, "expected a word after '@'"))
                } else {
                    Ok(Tok::AtWord(word))
                }
            }
            '?' | '$' => {
                self.bump();
                let name = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    Err(self.error(line, column, "empty variable name"))
                } else {
                    Ok(Tok::Var(name))
                }
            }
            '_' if self.peek_at(1) == Some(':') => {
                self.bump();
                self.bump();
                let label = self.take_name();
                if label.is_empty() {
                    Err(self.error(line, column, "empty blank node label"))
                } else {
                    Ok(Tok::BlankLabel(label))
                }
            }
            '.' if !self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) => single(self, Tok::Dot),
            c if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => {
                self.scan_number(line, column)
            }
            ':' => {
                self.bump();
                Ok(Tok::PName(String::new(), self.take_name()))
            }
            c if is_name_start(c) => {
                let word = self.take_name();
                if self.peek() == Some(':') {
                    self.bump();
                    let local = self.take_local();
                    Ok(Tok::PName(word, local))
                } else {
                    Ok(Tok::Word(word))
                }
            }
            other => Err(self.error(line, column, format!("unexpected character {other:?}"))),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Names may contain '.', but never end with one.
    fn take_name(&mut self) -> String {
        self.take_name_with(is_name_char)
    }

    fn take_local(&mut self) -> String {
        self.take_name_with(|c| is_name_char(c) || c == ':' || c == '%')
    }

    fn take_name_with(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut end = self.pos;
        while end < self.chars.len() && pred(self.chars[end]) {
            end += 1;
        }
        while end > self.pos && self.chars[end - 1] == '.' {
            end -= 1;
        }
        let mut s = String::new();
        while self.pos < end {
            s.push(self.bump().unwrap());
        }
        s
    }

    /// An IRI reference has no whitespace, quotes, or angle brackets between
    /// its delimiters; anything else starting with '<' is a comparison.
    fn scan_iri(&mut self) -> Option<String> {
        let mut end = self.pos + 1;
        loop {
            let c = *self.chars.get(end)?;
            match c {
                '>' => break,
                '<' | '"' | '{' | '}' | '|' | '^' | '`' => return None,
                c if c.is_whitespace() => return None,
                _ => end += 1,
            }
        }
        let iri: String = self.chars[self.pos + 1..end].iter().collect();
        while self.pos <= end {
            self.bump();
        }
        Some(iri)
    }

    fn scan_string(&mut self, quote: char, line: usize, column: usize) -> Result<Tok, LexError> {
        let long = self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote);
        let open = if long { 3 } else { 1 };
        for _ in 0..open {
            self.bump();
        }
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error(line, column, "unterminated string"));
            };
            match c {
                '\\' => s.push(self.scan_escape(line, column)?),
                c if c == quote => {
                    if !long {
                        return Ok(Tok::Str(s));
                    }
                    if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                        self.bump();
                        self.bump();
                        return Ok(Tok::Str(s));
                    }
                    s.push(c);
                }
                '\n' | '\r' if !long => {
                    return Err(self.error(line, column, "newline in short string"));
                }
                c => s.push(c),
            }
        }
    }

    fn scan_escape(&mut self, line: usize, column: usize) -> Result<char, LexError> {
        let c = self
            .bump()
            .ok_or_else(|| self.error(line, column, "unterminated escape"))?;
        Ok(match c {
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            'b' => '\u{8}',
            'f' => '\u{c}',
            '"' => '"',
            '\'' => '\'',
            '\\' => '\\',
            'u' | 'U' => {
                let width = if c == 'u' { 4 } else { 8 };
                let mut code = 0u32;
                for _ in 0..width {
                    let d = self
                        .bump()
                        .and_then(|d| d.to_digit(16))
                        .ok_or_else(|| self.error(line, column, "bad unicode escape"))?;
                    code = code * 16 + d;
                }
                char::from_u32(code)
                    .ok_or_else(|| self.error(line, column, "invalid unicode scalar"))?
            }
            other => return Err(self.error(line, column, format!("unknown escape \\{other}"))),
        })
    }

    fn scan_number(&mut self, line: usize, column: usize) -> Result<Tok, LexError> {
        let mut s = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            s.push(sign);
            self.bump();
        }
        s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        let mut decimal = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            decimal = true;
            s.push('.');
            self.bump();
            s.push_str(&self.take_while(|c| c.is_ascii_digit()));
        }
        if matches!(self.peek(), Some('e' | 'E')) {
            s.push('e');
            self.bump();
            if let Some(sign @ ('+' | '-')) = self.peek() {
                s.push(sign);
                self.bump();
            }
            let exp = self.take_while(|c| c.is_ascii_digit());
            if exp.is_empty() {
                return Err(self.error(line, column, "malformed exponent"));
            }
            s.push_str(&exp);
            return Ok(Tok::Double(s));
        }
        if !s.chars().any(|c| c.is_ascii_digit()) {
            return Err(self.error(line, column, format!("malformed number {s:?}")));
        }
        Ok(if decimal {
            Tok::Decimal(s)
        } else {
            Tok::Integer(s)
        })
    }
}
