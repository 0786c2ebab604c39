//! Formula AST, concrete-syntax parser, and normalization of derived
//! operators.
//!
//! Concrete syntax: operator tokens are uppercase (`EX`, `AX`, `EF`, `AF`,
//! `EG`, `AG`, and synchronized prefixes matching `[FG]+[AE]` such as `FA`
//! or `GFE`), atoms are lowercase identifiers. Until forms are bracketed:
//! `E[p U q]`, `A[p U q]` for the path-quantified versions and `[p UA q]`,
//! `[p UE q]` for the synchronized versions.

use std::fmt;

use thiserror::Error;

/// F or G in a synchronized temporal prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalOp {
    Eventually,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ExistsNext(Box<Formula>),
    ForallNext(Box<Formula>),
    ExistsUntil(Box<Formula>, Box<Formula>),
    ForallUntil(Box<Formula>, Box<Formula>),
    UntilExists(Box<Formula>, Box<Formula>),
    UntilForall(Box<Formula>, Box<Formula>),
    /// A synchronized temporal prefix: a nonempty F/G sequence followed by a
    /// path quantifier, e.g. `FA p` or `GFE p`.
    SeqSync(Vec<TemporalOp>, Quant, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn or(self, other: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn and(self, other: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(other))
    }

    /// Largest number of nested operators; atoms and constants count zero.
    pub fn nesting_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a)
            | Formula::ExistsNext(a)
            | Formula::ForallNext(a)
            | Formula::SeqSync(_, _, a) => 1 + a.nesting_depth(),
            Formula::Or(a, b)
            | Formula::And(a, b)
            | Formula::Implies(a, b)
            | Formula::ExistsUntil(a, b)
            | Formula::ForallUntil(a, b)
            | Formula::UntilExists(a, b)
            | Formula::UntilForall(a, b) => 1 + a.nesting_depth().max(b.nesting_depth()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bang,
    Amp,
    Pipe,
    Arrow,
    TrueLit,
    FalseLit,
    Ident(String),
    ExistsNext,
    ForallNext,
    ExistsFinally,
    ForallFinally,
    ExistsGlobally,
    ForallGlobally,
    SyncSeq(Vec<TemporalOp>, Quant),
    ExistsQ,
    ForallQ,
    Until,
    UntilForall,
    UntilExists,
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::LParen => write!(f, "'('"),
            Token::RParen => write!(f, "')'"),
            Token::LBracket => write!(f, "'['"),
            Token::RBracket => write!(f, "']'"),
            Token::Bang => write!(f, "'!'"),
            Token::Amp => write!(f, "'&'"),
            Token::Pipe => write!(f, "'|'"),
            Token::Arrow => write!(f, "'->'"),
            Token::TrueLit => write!(f, "'true'"),
            Token::FalseLit => write!(f, "'false'"),
            Token::Ident(s) => write!(f, "identifier '{s}'"),
            Token::ExistsNext => write!(f, "'EX'"),
            Token::ForallNext => write!(f, "'AX'"),
            Token::ExistsFinally => write!(f, "'EF'"),
            Token::ForallFinally => write!(f, "'AF'"),
            Token::ExistsGlobally => write!(f, "'EG'"),
            Token::ForallGlobally => write!(f, "'AG'"),
            Token::SyncSeq(seq, q) => {
                for op in seq {
                    write!(f, "{}", if *op == TemporalOp::Eventually { 'F' } else { 'G' })?;
                }
                write!(f, "{}", if *q == Quant::Exists { 'E' } else { 'A' })
            }
            Token::ExistsQ => write!(f, "'E'"),
            Token::ForallQ => write!(f, "'A'"),
            Token::Until => write!(f, "'U'"),
            Token::UntilForall => write!(f, "'UA'"),
            Token::UntilExists => write!(f, "'UE'"),
            Token::Eof => write!(f, "end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    _text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            column: 1,
            _text: text,
        }
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

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn error(&self, line: usize, column: usize, message: String) -> ParseError {
        ParseError {
            line,
            column,
            message,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Token, usize, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(c) if c.is_whitespace()) {
                self.bump();
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push((Token::Eof, line, column));
                return Ok(out);
            };
            let tok = match c {
                '(' => {
                    self.bump();
                    Token::LParen
                }
                ')' => {
                    self.bump();
                    Token::RParen
                }
                '[' => {
                    self.bump();
                    Token::LBracket
                }
                ']' => {
                    self.bump();
                    Token::RBracket
                }
                '!' => {
                    self.bump();
                    Token::Bang
                }
                '&' => {
                    self.bump();
                    Token::Amp
                }
                '|' => {
                    self.bump();
                    Token::Pipe
                }
                '-' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        Token::Arrow
                    } else {
                        return Err(self.error(line, column, "expected '->'".to_string()));
                    }
                }
                c if c.is_ascii_lowercase() => {
                    let mut word = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
                    {
                        word.push(self.bump().unwrap());
                    }
                    match word.as_str() {
                        "true" => Token::TrueLit,
                        "false" => Token::FalseLit,
                        _ => Token::Ident(word),
                    }
                }
                c if c.is_ascii_uppercase() => {
                    let mut word = String::new();
                    while matches!(self.peek(), Some(c) if c.is_ascii_uppercase()) {
                        word.push(self.bump().unwrap());
                    }
                    match Self::classify_upper(&word) {
                        Some(tok) => tok,
                        None => {
                            return Err(self.error(
                                line,
                                column,
                                format!(
                                    "unknown operator token '{word}'; expected EX, AX, EF, AF, \
                                     EG, AG, E, A, U, UA, UE, or a synchronized prefix \
                                     matching [FG]+[AE]"
                                ),
                            ))
                        }
                    }
                }
                other => {
                    return Err(self.error(line, column, format!("unexpected character '{other}'")))
                }
            };
            out.push((tok, line, column));
        }
    }

    fn classify_upper(word: &str) -> Option<Token> {
        match word {
            "EX" => return Some(Token::ExistsNext),
            "AX" => return Some(Token::ForallNext),
            "EF" => return Some(Token::ExistsFinally),
            "AF" => return Some(Token::ForallFinally),
            "EG" => return Some(Token::ExistsGlobally),
            "AG" => return Some(Token::ForallGlobally),
            "E" => return Some(Token::ExistsQ),
            "A" => return Some(Token::ForallQ),
            "U" => return Some(Token::Until),
            "UA" => return Some(Token::UntilForall),
            "UE" => return Some(Token::UntilExists),
            _ => {}
        }
        // Synchronized prefix: one or more F/G followed by a quantifier.
        let (body, quant) = word.split_at(word.len().checked_sub(1)?);
        if body.is_empty() || !body.chars().all(|c| c == 'F' || c == 'G') {
            return None;
        }
        let seq = body
            .chars()
            .map(|c| {
                if c == 'F' {
                    TemporalOp::Eventually
                } else {
                    TemporalOp::Always
                }
            })
            .collect();
        match quant {
            "E" => Some(Token::SyncSeq(seq, Quant::Exists)),
            "A" => Some(Token::SyncSeq(seq, Quant::Forall)),
            _ => None,
        }
    }
}

struct Parser {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.tokens[self.pos];
        (l, c)
    }

    fn expect(&mut self, want: &Token) -> Result<(), ParseError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            let (line, column) = self.here();
            Err(ParseError {
                line,
                column,
                message: format!("expected {want}, found {}", self.peek()),
            })
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Token::Arrow {
            self.bump();
            let rhs = self.implication()?;
            Ok(Formula::Implies(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Token::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Bang => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Token::ExistsNext => {
                self.bump();
                Ok(Formula::ExistsNext(Box::new(self.unary()?)))
            }
            Token::ForallNext => {
                self.bump();
                Ok(Formula::ForallNext(Box::new(self.unary()?)))
            }
            // EF/AF/EG/AG are plain CTL sugar with no AST node of their own.
            Token::ExistsFinally => {
                self.bump();
                Ok(Formula::ExistsUntil(
                    Box::new(Formula::True),
                    Box::new(self.unary()?),
                ))
            }
            Token::ForallFinally => {
                self.bump();
                Ok(Formula::ForallUntil(
                    Box::new(Formula::True),
                    Box::new(self.unary()?),
                ))
            }
            Token::ExistsGlobally => {
                self.bump();
                Ok(Formula::ForallUntil(
                    Box::new(Formula::True),
                    Box::new(self.unary()?.not()),
                )
                .not())
            }
            Token::ForallGlobally => {
                self.bump();
                Ok(Formula::ExistsUntil(
                    Box::new(Formula::True),
                    Box::new(self.unary()?.not()),
                )
                .not())
            }
            Token::SyncSeq(seq, quant) => {
                self.bump();
                Ok(Formula::SeqSync(seq, quant, Box::new(self.unary()?)))
            }
            Token::ExistsQ => {
                self.bump();
                self.expect(&Token::LBracket)?;
                let a = self.implication()?;
                self.expect(&Token::Until)?;
                let b = self.implication()?;
                self.expect(&Token::RBracket)?;
                Ok(Formula::ExistsUntil(Box::new(a), Box::new(b)))
            }
            Token::ForallQ => {
                self.bump();
                self.expect(&Token::LBracket)?;
                let a = self.implication()?;
                self.expect(&Token::Until)?;
                let b = self.implication()?;
                self.expect(&Token::RBracket)?;
                Ok(Formula::ForallUntil(Box::new(a), Box::new(b)))
            }
            Token::LBracket => {
                self.bump();
                let a = self.implication()?;
                let kind = self.bump();
                let b = self.implication()?;
                self.expect(&Token::RBracket)?;
                match kind {
                    Token::UntilForall => Ok(Formula::UntilForall(Box::new(a), Box::new(b))),
                    Token::UntilExists => Ok(Formula::UntilExists(Box::new(a), Box::new(b))),
                    other => {
                        let (line, column) = self.here();
                        Err(ParseError {
                            line,
                            column,
                            message: format!("expected 'UA' or 'UE', found {other}"),
                        })
                    }
                }
            }
            _ => self.atom_expr(),
        }
    }

    fn atom_expr(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::TrueLit => {
                self.bump();
                Ok(Formula::True)
            }
            Token::FalseLit => {
                self.bump();
                Ok(Formula::False)
            }
            Token::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Token::LParen => {
                self.bump();
                let f = self.implication()?;
                self.expect(&Token::RParen)?;
                Ok(f)
            }
            other => {
                let (line, column) = self.here();
                Err(ParseError {
                    line,
                    column,
                    message: format!(
                        "expected 'true', 'false', an atom, '(', '[', '!', or a temporal \
                         prefix, found {other}"
                    ),
                })
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.implication()?;
    if *parser.peek() != Token::Eof {
        let (line, column) = parser.here();
        return Err(ParseError {
            line,
            column,
            message: format!("expected end of input, found {}", parser.peek()),
        });
    }
    Ok(f)
}

// Precedence levels used for printing with minimal parentheses.
const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Implies(_, _) => PREC_IMPLIES,
        Formula::Or(_, _) => PREC_OR,
        Formula::And(_, _) => PREC_AND,
        Formula::Not(_)
        | Formula::ExistsNext(_)
        | Formula::ForallNext(_)
        | Formula::SeqSync(_, _, _) => PREC_UNARY,
        _ => PREC_ATOM,
    }
}

fn fmt_prec(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(f);
    if p < min {
        write!(out, "(")?;
        fmt_prec(f, 0, out)?;
        return write!(out, ")");
    }
    match f {
        Formula::True => write!(out, "true"),
        Formula::False => write!(out, "false"),
        Formula::Atom(name) => write!(out, "{name}"),
        Formula::Not(a) => {
            write!(out, "!")?;
            fmt_prec(a, PREC_UNARY, out)
        }
        Formula::Or(a, b) => {
            fmt_prec(a, PREC_OR, out)?;
            write!(out, " | ")?;
            fmt_prec(b, PREC_OR + 1, out)
        }
        Formula::And(a, b) => {
            fmt_prec(a, PREC_AND, out)?;
            write!(out, " & ")?;
            fmt_prec(b, PREC_AND + 1, out)
        }
        Formula::Implies(a, b) => {
            fmt_prec(a, PREC_IMPLIES + 1, out)?;
            write!(out, " -> ")?;
            fmt_prec(b, PREC_IMPLIES, out)
        }
        Formula::ExistsNext(a) => {
            write!(out, "EX ")?;
            fmt_prec(a, PREC_UNARY, out)
        }
        Formula::ForallNext(a) => {
            write!(out, "AX ")?;
            fmt_prec(a, PREC_UNARY, out)
        }
        Formula::ExistsUntil(a, b) => {
            write!(out, "E[")?;
            fmt_prec(a, 0, out)?;
            write!(out, " U ")?;
            fmt_prec(b, 0, out)?;
            write!(out, "]")
        }
        Formula::ForallUntil(a, b) => {
            write!(out, "A[")?;
            fmt_prec(a, 0, out)?;
            write!(out, " U ")?;
            fmt_prec(b, 0, out)?;
            write!(out, "]")
        }
        Formula::UntilExists(a, b) => {
            write!(out, "[")?;
            fmt_prec(a, 0, out)?;
            write!(out, " UE ")?;
            fmt_prec(b, 0, out)?;
            write!(out, "]")
        }
        Formula::UntilForall(a, b) => {
            write!(out, "[")?;
            fmt_prec(a, 0, out)?;
            write!(out, " UA ")?;
            fmt_prec(b, 0, out)?;
            write!(out, "]")
        }
        Formula::SeqSync(seq, quant, a) => {
            for op in seq {
                write!(out, "{}", if *op == TemporalOp::Eventually { 'F' } else { 'G' })?;
            }
            write!(out, "{} ", if *quant == Quant::Exists { 'E' } else { 'A' })?;
            fmt_prec(a, PREC_UNARY, out)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

/// Collapses an F/G sequence with the identities FGF = GF and GFG = FG:
/// after removing adjacent duplicates, any sequence of length three or more
/// equals its final two letters.
pub(crate) fn collapse_seq(seq: &[TemporalOp]) -> Vec<TemporalOp> {
    let mut dedup: Vec<TemporalOp> = Vec::new();
    for &op in seq {
        if dedup.last() != Some(&op) {
            dedup.push(op);
        }
    }
    if dedup.len() > 2 {
        dedup.split_off(dedup.len() - 2)
    } else {
        dedup
    }
}

/// Rewrites a formula into the kernel the checker evaluates: atoms, `true`,
/// negation, disjunction, both Next operators, both plain untils, both
/// synchronized untils, and the recurrent prefixes `GFE`/`GFA`.
///
/// The single-letter synchronized prefixes become until forms (`FA p` is
/// `[true UA p]`, `FE p` is `E[true U p]`, `GA p` is `!E[true U !p]`,
/// `GE p` is `![true UA !p]`), and `FGA`/`FGE` become negated recurrent
/// prefixes of the dual quantifier.
pub fn normalize(phi: &Formula) -> Formula {
    match phi {
        Formula::True => Formula::True,
        Formula::False => Formula::True.not(),
        Formula::Atom(name) => Formula::Atom(name.clone()),
        Formula::Not(a) => normalize(a).not(),
        Formula::Or(a, b) => normalize(a).or(normalize(b)),
        Formula::And(a, b) => normalize(a).not().or(normalize(b).not()).not(),
        Formula::Implies(a, b) => normalize(a).not().or(normalize(b)),
        Formula::ExistsNext(a) => Formula::ExistsNext(Box::new(normalize(a))),
        Formula::ForallNext(a) => Formula::ForallNext(Box::new(normalize(a))),
        Formula::ExistsUntil(a, b) => {
            Formula::ExistsUntil(Box::new(normalize(a)), Box::new(normalize(b)))
        }
        Formula::ForallUntil(a, b) => {
            Formula::ForallUntil(Box::new(normalize(a)), Box::new(normalize(b)))
        }
        Formula::UntilExists(a, b) => {
            Formula::UntilExists(Box::new(normalize(a)), Box::new(normalize(b)))
        }
        Formula::UntilForall(a, b) => {
            Formula::UntilForall(Box::new(normalize(a)), Box::new(normalize(b)))
        }
        Formula::SeqSync(seq, quant, a) => {
            let a = normalize(a);
            let seq = collapse_seq(seq);
            use Quant::*;
            use TemporalOp::*;
            match (seq.as_slice(), quant) {
                ([Eventually], Exists) => {
                    Formula::ExistsUntil(Box::new(Formula::True), Box::new(a))
                }
                ([Eventually], Forall) => {
                    Formula::UntilForall(Box::new(Formula::True), Box::new(a))
                }
                ([Always], Forall) => {
                    Formula::ExistsUntil(Box::new(Formula::True), Box::new(a.not()))
                        .not()
                }
                ([Always], Exists) => {
                    Formula::UntilForall(Box::new(Formula::True), Box::new(a.not()))
                        .not()
                }
                ([Always, Eventually], q) => Formula::SeqSync(seq.clone(), *q, Box::new(a)),
                ([Eventually, Always], Forall) => {
                    Formula::SeqSync(vec![Always, Eventually], Exists, Box::new(a.not())).not()
                }
                ([Eventually, Always], Exists) => {
                    Formula::SeqSync(vec![Always, Eventually], Forall, Box::new(a.not())).not()
                }
                _ => unreachable!("collapsed sequences have length one or two"),
            }
        }
    }
}
