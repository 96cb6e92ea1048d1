//! Parser for the inequality DSL.
//!
//! Grammar sketch:
//!
//! ```text
//! ineq     := expr ('>=' | '=') expr
//! expr     := '0' | term ('+' term)*
//! term     := [coeff '*'] resource | coeff '*' resource
//! coeff    := rational | [rational '*'] atom | '(' sum ')'
//! sum      := ['-'] part (('+' | '-') part)*
//! part     := [rational '*'] atom | rational
//! atom     := 'H(' labels ')' | 'H(' labels '|' labels ')' | 'I(' labels ';' labels ')'
//! resource := '[q->q]' | '[q<-q]' | '[qq]' | '[c->c]' | '[c<-c]' | '[cc]'
//!           | '[q->qq]' | '[qq<-q]'
//!           | '<' name '{' labels '->' labels '}' [':' name] '>'
//!           | '<' name '@' labels '>'
//! ```
//!
//! Multi-summand coefficients must be parenthesized. A bare `0` denotes the
//! empty resource bundle.

use num_rational::Rational64;

use super::entexpr::{labelset, EntExpr, LabelSet};
use super::inequality::{Inequality, Relation};
use super::resource::{Direction, ResourceExpr, ResourceTerm};
use crate::{Error, Result};

type Rat = Rational64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    Semi,
    Pipe,
    Ge,
    Equal,
    /// Contents of a bracketed unit, whitespace stripped: `q->q`, `qq`, ...
    Unit(String),
    /// Raw contents of an angle-bracketed resource: `U{A'->A,B}:rho`.
    Angle(String),
}

pub struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    pub line: usize,
    pub col: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str, line: usize) -> Self {
        Lexer { src, chars: src.char_indices().peekable(), line, col: 1 }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col, msg)
    }

    pub fn tokenize(mut self) -> Result<Vec<(Token, usize, usize)>> {
        let mut out = Vec::new();
        while let Some(&(i, c)) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                ' ' | '\t' | '\r' | '\n' => {
                    self.bump();
                }
                '#' => break,
                '+' => {
                    self.bump();
                    out.push((Token::Plus, line, col));
                }
                '-' => {
                    self.bump();
                    out.push((Token::Minus, line, col));
                }
                '*' => {
                    self.bump();
                    out.push((Token::Star, line, col));
                }
                '/' => {
                    self.bump();
                    out.push((Token::Slash, line, col));
                }
                '(' => {
                    self.bump();
                    out.push((Token::LParen, line, col));
                }
                ')' => {
                    self.bump();
                    out.push((Token::RParen, line, col));
                }
                ',' => {
                    self.bump();
                    out.push((Token::Comma, line, col));
                }
                ';' => {
                    self.bump();
                    out.push((Token::Semi, line, col));
                }
                '|' => {
                    self.bump();
                    out.push((Token::Pipe, line, col));
                }
                '=' => {
                    self.bump();
                    out.push((Token::Equal, line, col));
                }
                '\u{2265}' => {
                    self.bump();
                    out.push((Token::Ge, line, col));
                }
                '>' => {
                    self.bump();
                    if matches!(self.chars.peek(), Some((_, '='))) {
                        self.bump();
                        out.push((Token::Ge, line, col));
                    } else {
                        return Err(self.err("expected `>=`"));
                    }
                }
                '[' => {
                    self.bump();
                    let start = i + 1;
                    #[allow(unused_assignments)]
                    let mut end = start;
                    loop {
                        match self.bump() {
                            Some((j, ']')) => {
                                end = j;
                                break;
                            }
                            Some(_) => {}
                            None => return Err(self.err("unterminated `[`")),
                        }
                    }
                    let inner: String =
                        self.src[start..end].chars().filter(|c| !c.is_whitespace()).collect();
                    out.push((Token::Unit(inner), line, col));
                }
                '<' => {
                    // A resource term ends at the first `>` that is not part
                    // of an `->` arrow.
                    self.bump();
                    let start = i + 1;
                    let mut end = None;
                    let mut prev = ' ';
                    while let Some((j, ch)) = self.bump() {
                        if ch == '>' && prev != '-' {
                            end = Some(j);
                            break;
                        }
                        prev = ch;
                    }
                    let end = end.ok_or_else(|| self.err("unterminated `<`"))?;
                    let inner: String =
                        self.src[start..end].chars().filter(|c| !c.is_whitespace()).collect();
                    out.push((Token::Angle(inner), line, col));
                }
                _ if c.is_ascii_digit() => {
                    let start = i;
                    let mut end = i;
                    while let Some(&(j, d)) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            end = j;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let text = &self.src[start..=end];
                    let v: i64 = text
                        .parse()
                        .map_err(|_| self.err(format!("integer `{text}` out of range")))?;
                    out.push((Token::Int(v), line, col));
                }
                _ if c.is_alphabetic() || c == '_' => {
                    let start = i;
                    let mut end = i;
                    while let Some(&(j, d)) = self.chars.peek() {
                        if d.is_alphanumeric() || d == '_' || d == '\'' {
                            end = j;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    out.push((Token::Ident(self.src[start..=end].to_string()), line, col));
                }
                _ => return Err(self.err(format!("unexpected character `{c}`"))),
            }
        }
        Ok(out)
    }
}

pub struct Parser {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    pub fn new(src: &str, line: usize) -> Result<Self> {
        let tokens = Lexer::new(src, line).tokenize()?;
        let end = tokens
            .last()
            .map(|(_, l, c)| (*l, *c + 1))
            .unwrap_or((line, 1));
        Ok(Parser { tokens, pos: 0, end })
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::parse(line, col, msg)
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(self.err(format!("expected {what}, found {t:?}"))),
            None => Err(self.err(format!("expected {what}, found end of input"))),
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.next() {
            Some(Token::Ident(s)) => Ok(s),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn rational(&mut self) -> Result<Rat> {
        let n = match self.next() {
            Some(Token::Int(n)) => n,
            _ => return Err(self.err("expected a number")),
        };
        if matches!(self.peek(), Some(Token::Slash)) {
            self.next();
            match self.next() {
                Some(Token::Int(d)) if d != 0 => Ok(Rat::new(n, d)),
                Some(Token::Int(_)) => Err(self.err("zero denominator")),
                _ => Err(self.err("expected a denominator")),
            }
        } else {
            Ok(Rat::from_integer(n))
        }
    }

    fn labels(&mut self) -> Result<LabelSet> {
        let mut out = vec![self.ident("a system label")?];
        while matches!(self.peek(), Some(Token::Comma)) {
            self.next();
            out.push(self.ident("a system label")?);
        }
        Ok(labelset(out))
    }

    /// `H(...)`, `H(...|...)` or `I(...;...)`.
    fn atom(&mut self) -> Result<EntExpr> {
        let head = self.ident("`H` or `I`")?;
        self.expect(Token::LParen, "`(`")?;
        let first = self.labels()?;
        let expr = match (head.as_str(), self.peek()) {
            ("H", Some(Token::Pipe)) => {
                self.next();
                let given = self.labels()?;
                EntExpr::conditional(first, given)
            }
            ("H", _) => EntExpr::entropy(first),
            ("I", Some(Token::Semi)) => {
                self.next();
                let second = self.labels()?;
                if first.intersection(&second).next().is_some() {
                    return Err(self.err("mutual information between overlapping systems"));
                }
                EntExpr::mutual(first, second)
            }
            ("I", _) => return Err(self.err("expected `;` in I(...)")),
            _ => return Err(self.err(format!("unknown functional `{head}`"))),
        };
        self.expect(Token::RParen, "`)`")?;
        Ok(expr)
    }

    /// `[rational *] atom | rational`, one summand of a parenthesized sum.
    fn sum_part(&mut self) -> Result<EntExpr> {
        if matches!(self.peek(), Some(Token::Int(_))) {
            let r = self.rational()?;
            if matches!(self.peek(), Some(Token::Star)) {
                self.next();
                Ok(self.atom()?.scale(r))
            } else {
                Ok(EntExpr::constant(r))
            }
        } else {
            self.atom()
        }
    }

    /// Parenthesized signed sum, `(` already consumed.
    fn paren_sum(&mut self) -> Result<EntExpr> {
        let mut neg = false;
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            neg = true;
        }
        let mut acc = self.sum_part()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.next();
                    let p = self.sum_part()?;
                    acc = acc.add(&p);
                }
                Some(Token::Minus) => {
                    self.next();
                    let p = self.sum_part()?;
                    acc = acc.sub(&p);
                }
                Some(Token::RParen) => {
                    self.next();
                    return Ok(acc);
                }
                _ => return Err(self.err("expected `+`, `-` or `)`")),
            }
        }
    }

    fn unit_resource(&self, text: &str) -> Result<ResourceTerm> {
        Ok(match text {
            "q->q" => ResourceTerm::Qubit(Direction::Forward),
            "q<-q" => ResourceTerm::Qubit(Direction::Backward),
            "qq" => ResourceTerm::Ebit,
            "c->c" => ResourceTerm::Cbit(Direction::Forward),
            "c<-c" => ResourceTerm::Cbit(Direction::Backward),
            "cc" => ResourceTerm::Randomness,
            "q->qq" => ResourceTerm::Cobit(Direction::Forward),
            "qq<-q" => ResourceTerm::Cobit(Direction::Backward),
            other => return Err(self.err(format!("unknown unit resource `[{other}]`"))),
        })
    }

    fn angle_resource(&self, raw: &str) -> Result<ResourceTerm> {
        let bad = |msg: &str| {
            let (line, col) = self.here();
            Error::parse(line, col, format!("malformed resource `<{raw}>`: {msg}"))
        };
        if let Some(brace) = raw.find('{') {
            let name = &raw[..brace];
            let close = raw.rfind('}').ok_or_else(|| bad("missing `}`"))?;
            let sig = &raw[brace + 1..close];
            let rest = &raw[close + 1..];
            let relative = if rest.is_empty() {
                None
            } else if let Some(rel) = rest.strip_prefix(':') {
                Some(rel.to_string())
            } else {
                return Err(bad("unexpected text after `}`"));
            };
            let (ins, outs) = sig.split_once("->").ok_or_else(|| bad("missing `->`"))?;
            let split = |s: &str| -> Vec<String> {
                s.split(',').filter(|p| !p.is_empty()).map(str::to_string).collect()
            };
            let (ins, outs) = (split(ins), split(outs));
            if name.is_empty() || ins.is_empty() || outs.is_empty() {
                return Err(bad("empty name or signature"));
            }
            Ok(ResourceTerm::Channel {
                name: name.to_string(),
                ins,
                outs,
                relative,
            })
        } else if let Some(at) = raw.find('@') {
            let name = &raw[..at];
            let parties: Vec<String> = raw[at + 1..]
                .split(',')
                .filter(|p| !p.is_empty())
                .map(str::to_string)
                .collect();
            if name.is_empty() || parties.is_empty() {
                return Err(bad("empty name or party list"));
            }
            Ok(ResourceTerm::State { name: name.to_string(), parties })
        } else {
            Err(bad("expected `{...}` or `@...`"))
        }
    }

    /// A single resource term, possibly with a coefficient.
    pub fn resource_term(&mut self) -> Result<(EntExpr, ResourceTerm)> {
        let coeff = match self.peek() {
            Some(Token::Unit(_)) | Some(Token::Angle(_)) => EntExpr::one(),
            Some(Token::LParen) => {
                self.next();
                let c = self.paren_sum()?;
                self.expect(Token::Star, "`*` after a parenthesized coefficient")?;
                c
            }
            Some(Token::Int(_)) => {
                let r = self.rational()?;
                self.expect(Token::Star, "`*` after a coefficient")?;
                if matches!(self.peek(), Some(Token::Ident(_))) {
                    let a = self.atom()?.scale(r);
                    self.expect(Token::Star, "`*` after a coefficient")?;
                    a
                } else {
                    EntExpr::constant(r)
                }
            }
            Some(Token::Ident(_)) => {
                let a = self.atom()?;
                self.expect(Token::Star, "`*` after a coefficient")?;
                a
            }
            _ => return Err(self.err("expected a resource term")),
        };
        let term = match self.next() {
            Some(Token::Unit(s)) => self.unit_resource(&s)?,
            Some(Token::Angle(s)) => self.angle_resource(&s)?,
            _ => return Err(self.err("expected `[...]` or `<...>`")),
        };
        Ok((coeff, term))
    }

    /// A full side: `0` or a `+`-separated list of terms.
    pub fn resource_expr(&mut self) -> Result<ResourceExpr> {
        if matches!(self.peek(), Some(Token::Int(0))) {
            // bare zero only when not the start of `0*...` or a fraction
            let ahead = self.tokens.get(self.pos + 1).map(|(t, _, _)| t);
            if !matches!(ahead, Some(Token::Star) | Some(Token::Slash)) {
                self.next();
                return Ok(ResourceExpr::empty());
            }
        }
        let mut terms = vec![self.resource_term()?];
        while matches!(self.peek(), Some(Token::Plus)) {
            self.next();
            terms.push(self.resource_term()?);
        }
        Ok(ResourceExpr::new(terms))
    }

    pub fn inequality(&mut self) -> Result<Inequality> {
        let lhs = self.resource_expr()?;
        let relation = match self.next() {
            Some(Token::Ge) => Relation::Ge,
            Some(Token::Equal) => Relation::Eq,
            _ => return Err(self.err("expected `>=` or `=`")),
        };
        let rhs = self.resource_expr()?;
        Ok(Inequality::new(lhs, rhs, relation, LabelSet::new()))
    }

    /// A standalone coefficient expression (used by `cancel`).
    pub fn coefficient(&mut self) -> Result<EntExpr> {
        match self.peek() {
            Some(Token::LParen) => {
                self.next();
                self.paren_sum()
            }
            Some(Token::Int(_)) => {
                let r = self.rational()?;
                if matches!(self.peek(), Some(Token::Star)) {
                    self.next();
                    Ok(self.atom()?.scale(r))
                } else {
                    Ok(EntExpr::constant(r))
                }
            }
            Some(Token::Ident(_)) => self.atom(),
            _ => Err(self.err("expected a coefficient")),
        }
    }
}

/// Parses a single inequality with no purity context.
pub fn parse_inequality(src: &str) -> Result<Inequality> {
    parse_inequality_at(src, 1)
}

pub fn parse_inequality_at(src: &str, line: usize) -> Result<Inequality> {
    let mut p = Parser::new(src, line)?;
    let ineq = p.inequality()?;
    p.expect_end()?;
    Ok(ineq)
}

/// Parses a single resource term (used by `cancel` and `relabel`).
pub fn parse_term_at(src: &str, line: usize) -> Result<ResourceTerm> {
    let mut p = Parser::new(src, line)?;
    let (coeff, term) = p.resource_term()?;
    p.expect_end()?;
    if coeff != EntExpr::one() {
        return Err(Error::parse(line, 1, "expected a bare resource term"));
    }
    Ok(term)
}

pub fn parse_coefficient_at(src: &str, line: usize) -> Result<EntExpr> {
    let mut p = Parser::new(src, line)?;
    let coeff = p.coefficient()?;
    p.expect_end()?;
    Ok(coeff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        for s in ["[q->q]", "[q<-q]", "[qq]", "[c->c]", "[c<-c]", "[cc]", "[q->qq]", "[qq<-q]"] {
            let t = parse_term_at(s, 1).unwrap();
            assert_eq!(t.to_string(), s);
        }
    }

    #[test]
    fn parses_channel_and_state_terms() {
        let t = parse_term_at("<U{A'->A,B}:rho>", 1).unwrap();
        assert_eq!(
            t,
            ResourceTerm::channel("U", ["A'"], ["A", "B"], Some("rho"))
        );
        let s = parse_term_at("<phi@A,B>", 1).unwrap();
        assert_eq!(s, ResourceTerm::state("phi", ["A", "B"]));
    }

    #[test]
    fn parses_coefficients() {
        let i = parse_inequality("1/2*I(R;B)*[q->q] + 1/2*I(A;B)*[qq] >= <U{A'->A,B}:rho>")
            .unwrap();
        assert_eq!(i.lhs.terms.len(), 2);
        assert_eq!(i.relation, Relation::Ge);
    }

    #[test]
    fn parses_parenthesized_sums() {
        let i = parse_inequality("(H(R) - 1/2*I(R;B))*[q->q] >= 0").unwrap();
        assert_eq!(i.rhs.terms.len(), 0);
        let printed = i.to_string();
        let again = parse_inequality(printed.split("  [pure").next().unwrap()).unwrap();
        assert!(i.canon_eq(&again));
    }

    #[test]
    fn print_parse_fixed_point() {
        let srcs = [
            "H(B)*[qq] + I(R;B)*[c->c] >= <N{A'->B}:rho>",
            "2*[q->qq] = [q->q] + [qq]",
            "<phi@A,B> >= H(A)*[qq]",
            "<V{S->X,Y}> + H(X|Y)*[c->c] >= <id{S->Y'}>",
        ];
        for s in srcs {
            let i = parse_inequality(s).unwrap();
            let printed = i.to_string();
            let j = parse_inequality(&printed).unwrap();
            assert_eq!(printed, j.to_string(), "fixed point for `{s}`");
            assert!(i.canon_eq(&j));
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_inequality("[q->q] >=").is_err());
        assert!(parse_inequality("[zz] >= 0").is_err());
        assert!(parse_inequality("<U{A'}> >= 0").is_err());
        assert!(parse_inequality("H(R)*[q->q]").is_err());
        assert!(parse_inequality("I(A;A)*[qq] >= 0").is_err());
    }

    #[test]
    fn error_positions_are_reported() {
        let e = parse_inequality("[q->q] >= [xy]").unwrap_err();
        match e {
            crate::Error::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col > 9);
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
