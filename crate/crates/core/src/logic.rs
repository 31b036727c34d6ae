//! Ground atoms, background rules and a small Prolog-like text format.
//!
//! Programs look like
//!
//! ```text
//! :- target(fly).
//! bird(X) :- penguin(X).
//! bird(tweety).
//! -thal(7,3).
//! pos(fly(tweety)).
//! neg(fly(polly)).
//! ```
//!
//! A `-` prefix is classical negation, `not` is negation as failure and `%`
//! starts a comment.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A constant. Ordering is numeric when both sides are numbers, numbers sort
/// before names, and names sort lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sym(String);

impl Sym {
    pub fn new(s: impl Into<String>) -> Self {
        Sym(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<f64> {
        is_number(&self.0).then(|| self.0.parse().ok()).flatten()
    }
}

impl From<u64> for Sym {
    fn from(v: u64) -> Self {
        Sym(v.to_string())
    }
}

impl From<usize> for Sym {
    fn from(v: usize) -> Self {
        Sym(v.to_string())
    }
}

impl From<&str> for Sym {
    fn from(v: &str) -> Self {
        Sym(v.to_owned())
    }
}

impl Ord for Sym {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.total_cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Sym {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, &self.0)
    }
}

fn is_number(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

fn is_plain_name(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b'a'..=b'z'))
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

fn write_name(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    if is_plain_name(s) || is_number(s) {
        return f.write_str(s);
    }
    f.write_str("'")?;
    for c in s.chars() {
        match c {
            '\'' => f.write_str("\\'")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("'")
}

struct Name<'a>(&'a str);

impl fmt::Display for Name<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_name(f, self.0)
    }
}

/// Renders a predicate name, quoting it when needed.
pub fn predicate_name(name: &str) -> impl fmt::Display + '_ {
    Name(name)
}

/// A ground atom, optionally classically negated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Sym>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub negated: bool,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Sym>) -> Self {
        Self {
            predicate: predicate.into(),
            args,
            negated: false,
        }
    }

    pub fn negated(predicate: impl Into<String>, args: Vec<Sym>) -> Self {
        Self {
            negated: true,
            ..Self::new(predicate, args)
        }
    }

    /// The same atom with the opposite classical sign.
    pub fn complement(&self) -> Self {
        Self {
            negated: !self.negated,
            ..self.clone()
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        write_name(f, &self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(Sym),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// An atom that may contain variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("-")?;
        }
        write_name(f, &self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BodyLiteral {
    pub pattern: Pattern,
    /// Negation as failure.
    pub naf: bool,
}

/// A background rule `head :- body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BkRule {
    pub head: Pattern,
    pub body: Vec<BodyLiteral>,
}

impl fmt::Display for BkRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                if l.naf {
                    f.write_str("not ")?;
                }
                write!(f, "{}", l.pattern)?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// One statement of a program file.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Target(String),
    Fact(Atom),
    Rule(BkRule),
    Positive(Atom),
    Negative(Atom),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Name(String),
    Var(String),
    Number(String),
    Quoted(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Minus,
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            message: message.into(),
        }
    }

    fn skip_blank(&mut self) {
        while let Some(&b) = self.src.get(self.pos) {
            match b {
                b'\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                b' ' | b'\t' | b'\r' => self.pos += 1,
                b'%' => {
                    while self.src.get(self.pos).is_some_and(|&c| c != b'\n') {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|&b| f(b)) {
            self.pos += 1;
        }
        &self.text[start..self.pos]
    }

    fn number(&mut self) -> String {
        let mut s = String::from(self.take_while(|b| b.is_ascii_digit()));
        if self.src.get(self.pos) == Some(&b'.')
            && self.src.get(self.pos + 1).is_some_and(|b| b.is_ascii_digit())
        {
            self.pos += 1;
            s.push('.');
            s.push_str(self.take_while(|b| b.is_ascii_digit()));
        }
        s
    }

    /// Returns the token and the line it started on.
    fn next(&mut self) -> Result<Option<(Token, usize)>, ParseError> {
        self.skip_blank();
        let line = self.line;
        let Some(&b) = self.src.get(self.pos) else {
            return Ok(None);
        };
        let ident = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
        let token = match b {
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            b',' => {
                self.pos += 1;
                Token::Comma
            }
            b'.' => {
                self.pos += 1;
                Token::Dot
            }
            b'-' => {
                self.pos += 1;
                Token::Minus
            }
            b':' if self.src.get(self.pos + 1) == Some(&b'-') => {
                self.pos += 2;
                Token::Neck
            }
            b'0'..=b'9' => Token::Number(self.number()),
            b'a'..=b'z' => Token::Name(self.take_while(ident).to_owned()),
            b'A'..=b'Z' | b'_' => Token::Var(self.take_while(ident).to_owned()),
            b'\'' => {
                self.pos += 1;
                let mut s = String::new();
                loop {
                    let rest = &self.text[self.pos..];
                    let Some(c) = rest.chars().next() else {
                        return Err(self.error("unterminated quoted name"));
                    };
                    self.pos += c.len_utf8();
                    match c {
                        '\'' => break,
                        '\\' => {
                            let Some(e) = self.text[self.pos..].chars().next() else {
                                return Err(self.error("unterminated quoted name"));
                            };
                            self.pos += e.len_utf8();
                            s.push(match e {
                                'n' => '\n',
                                other => other,
                            });
                        }
                        '\n' => return Err(self.error("newline inside quoted name")),
                        c => s.push(c),
                    }
                }
                Token::Quoted(s)
            }
            _ => {
                let c = self.text[self.pos..].chars().next().unwrap_or('?');
                return Err(self.error(format!("unexpected character '{c}'")));
            }
        };
        Ok(Some((token, line)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(Token, usize)>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&Token>, ParseError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next()?;
        }
        Ok(self.peeked.as_ref().map(|(t, _)| t))
    }

    fn bump(&mut self) -> Result<Option<Token>, ParseError> {
        self.peek()?;
        Ok(self.peeked.take().map(|(t, line)| {
            self.line = line;
            t
        }))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        match self.bump()? {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(self.error(format!("expected {what}, found {}", describe(&t)))),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.bump()? {
            Some(Token::Name(n)) | Some(Token::Quoted(n)) => Ok(n),
            Some(t) => Err(self.error(format!("expected a predicate name, found {}", describe(&t)))),
            None => Err(self.error("expected a predicate name, found end of input")),
        }
    }

    fn term(&mut self) -> Result<Raw, ParseError> {
        match self.peek()?.cloned() {
            Some(Token::Var(v)) => {
                self.bump()?;
                Ok(Raw::Var(v))
            }
            Some(Token::Number(n)) => {
                self.bump()?;
                Ok(Raw::Const(Sym(n)))
            }
            Some(Token::Minus) => {
                self.bump()?;
                match self.peek()?.cloned() {
                    Some(Token::Number(n)) => {
                        self.bump()?;
                        Ok(Raw::Const(Sym(format!("-{n}"))))
                    }
                    _ => {
                        let mut inner = self.compound()?;
                        inner.negated = true;
                        Ok(Raw::Compound(inner))
                    }
                }
            }
            Some(Token::Name(_)) | Some(Token::Quoted(_)) => {
                let c = self.compound()?;
                if c.args.is_empty() {
                    Ok(Raw::Const(Sym(c.name)))
                } else {
                    Ok(Raw::Compound(c))
                }
            }
            Some(t) => {
                self.bump()?;
                Err(self.error(format!("expected an argument, found {}", describe(&t))))
            }
            None => Err(self.error("expected an argument, found end of input")),
        }
    }

    fn compound(&mut self) -> Result<Compound, ParseError> {
        let name = self.name()?;
        let mut args = Vec::new();
        if self.peek()? == Some(&Token::LParen) {
            self.bump()?;
            loop {
                args.push(self.term()?);
                match self.bump()? {
                    Some(Token::Comma) => continue,
                    Some(Token::RParen) => break,
                    _ => return Err(self.error("expected ',' or ')' in argument list")),
                }
            }
        }
        Ok(Compound {
            name,
            args,
            negated: false,
        })
    }

    fn literal(&mut self) -> Result<Compound, ParseError> {
        let negated = if self.peek()? == Some(&Token::Minus) {
            self.bump()?;
            true
        } else {
            false
        };
        let mut c = self.compound()?;
        c.negated = negated;
        Ok(c)
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        let c = self.literal()?;
        c.into_pattern().map_err(|m| self.error(m))
    }

    fn statement(&mut self) -> Result<Option<Statement>, ParseError> {
        let Some(first) = self.peek()?.cloned() else {
            return Ok(None);
        };
        if first == Token::Neck {
            self.bump()?;
            let directive = self.name()?;
            if directive != "target" {
                return Err(self.error(format!("unknown directive '{directive}'")));
            }
            self.expect(Token::LParen, "'('")?;
            let target = self.name()?;
            self.expect(Token::RParen, "')'")?;
            self.expect(Token::Dot, "'.'")?;
            return Ok(Some(Statement::Target(target)));
        }
        let head = self.literal()?;
        match self.bump()? {
            Some(Token::Dot) => {
                let example = !head.negated
                    && matches!(head.name.as_str(), "pos" | "neg")
                    && matches!(head.args.as_slice(), [Raw::Compound(_)]);
                if example {
                    let positive = head.name == "pos";
                    let Some(Raw::Compound(inner)) = head.args.into_iter().next() else {
                        unreachable!()
                    };
                    let atom = inner.into_atom().map_err(|m| self.error(m))?;
                    if atom.negated {
                        return Err(self.error("examples cannot be classically negated"));
                    }
                    return Ok(Some(if positive {
                        Statement::Positive(atom)
                    } else {
                        Statement::Negative(atom)
                    }));
                }
                let atom = head.into_atom().map_err(|m| self.error(m))?;
                Ok(Some(Statement::Fact(atom)))
            }
            Some(Token::Neck) => {
                let head = head.into_pattern().map_err(|m| self.error(m))?;
                let mut body = Vec::new();
                loop {
                    let naf = matches!(self.peek()?, Some(Token::Name(n)) if n == "not");
                    if naf {
                        self.bump()?;
                    }
                    body.push(BodyLiteral {
                        pattern: self.pattern()?,
                        naf,
                    });
                    match self.bump()? {
                        Some(Token::Comma) => continue,
                        Some(Token::Dot) => break,
                        _ => return Err(self.error("expected ',' or '.' after body literal")),
                    }
                }
                Ok(Some(Statement::Rule(BkRule { head, body })))
            }
            Some(t) => Err(self.error(format!("expected '.' or ':-', found {}", describe(&t)))),
            None => Err(self.error("missing '.' at end of input")),
        }
    }
}

#[derive(Debug, Clone)]
struct Compound {
    name: String,
    args: Vec<Raw>,
    negated: bool,
}

#[derive(Debug, Clone)]
enum Raw {
    Var(String),
    Const(Sym),
    Compound(Compound),
}

impl Compound {
    fn into_pattern(self) -> Result<Pattern, &'static str> {
        let args = self
            .args
            .into_iter()
            .map(|a| match a {
                Raw::Var(v) => Ok(Term::Var(v)),
                Raw::Const(c) => Ok(Term::Const(c)),
                Raw::Compound(_) => Err("nested terms are not supported"),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Pattern {
            predicate: self.name,
            args,
            negated: self.negated,
        })
    }

    fn into_atom(self) -> Result<Atom, &'static str> {
        let p = self.into_pattern()?;
        let args = p
            .args
            .into_iter()
            .map(|t| match t {
                Term::Const(c) => Ok(c),
                Term::Var(_) => Err("facts must be ground"),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Atom {
            predicate: p.predicate,
            args,
            negated: p.negated,
        })
    }
}

fn describe(t: &Token) -> String {
    match t {
        Token::Name(n) | Token::Var(n) | Token::Number(n) => format!("'{n}'"),
        Token::Quoted(n) => format!("'{n}'"),
        Token::LParen => "'('".into(),
        Token::RParen => "')'".into(),
        Token::Comma => "','".into(),
        Token::Dot => "'.'".into(),
        Token::Neck => "':-'".into(),
        Token::Minus => "'-'".into(),
    }
}

/// Parses a program into statements, in file order.
pub fn parse_statements(text: &str) -> Result<Vec<Statement>, ParseError> {
    let mut parser = Parser {
        lexer: Lexer {
            src: text.as_bytes(),
            text,
            pos: 0,
            line: 1,
        },
        peeked: None,
        line: 1,
    };
    let mut out = Vec::new();
    while let Some(s) = parser.statement()? {
        out.push(s);
    }
    Ok(out)
}
