//! Recursive-descent parser for the concrete CSP grammar.
//!
//! ```text
//! P   ::= "STOP" | "DIV" | "SUCCESS" | P "[|" "{" names "}" "|]" P
//!       | P "|~|" P | Sum | P "\" name | P "[[" ren {"," ren} "]]"
//!       | "mu" VAR "." P | VAR | "(" P ")"
//! Sum ::= name "->" P {"[]" name "->" P}
//! ```
//!
//! Precedence, loosest to tightest: `[|…|]`, `|~|`, `[]`, postfix `\` and
//! `[[…]]`, prefix `->`. Names are lowercase identifiers, process variables
//! start uppercase.

use std::collections::BTreeSet;
use std::fmt;

use super::{CspTerm, Summand};
use crate::names::{Name, OccGen};

#[derive(Debug, Clone, thiserror::Error)]
pub struct CspParseError {
    pub msg: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for CspParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Stop,
    Div,
    Success,
    Mu,
    LName(String),
    UName(String),
    ParOpen,  // [|
    ParClose, // |]
    LBrace,
    RBrace,
    Comma,
    IntChoice, // |~|
    ExtChoice, // []
    Backslash,
    RenOpen,  // [[
    RenClose, // ]]
    Assign,   // :=
    Arrow,    // ->
    LParen,
    RParen,
    Dot,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

type Spanned = (Tok, usize);

impl<'a> Lexer<'a> {
    fn err(&self, pos: usize, msg: impl Into<String>) -> CspParseError {
        let (line, col) = line_col(self.src, pos);
        CspParseError { msg: msg.into(), line, col }
    }

    fn lex(mut self) -> Result<Vec<Spanned>, CspParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos] as char;
            let at = self.pos;
            match c {
                ' ' | '\t' | '\n' | '\r' => {
                    self.pos += 1;
                }
                '(' => {
                    out.push((Tok::LParen, at));
                    self.pos += 1;
                }
                ')' => {
                    out.push((Tok::RParen, at));
                    self.pos += 1;
                }
                '{' => {
                    out.push((Tok::LBrace, at));
                    self.pos += 1;
                }
                '}' => {
                    out.push((Tok::RBrace, at));
                    self.pos += 1;
                }
                ',' => {
                    out.push((Tok::Comma, at));
                    self.pos += 1;
                }
                '.' => {
                    out.push((Tok::Dot, at));
                    self.pos += 1;
                }
                '\\' => {
                    out.push((Tok::Backslash, at));
                    self.pos += 1;
                }
                '[' => {
                    if self.peek(1) == Some('|') {
                        out.push((Tok::ParOpen, at));
                        self.pos += 2;
                    } else if self.peek(1) == Some('[') {
                        out.push((Tok::RenOpen, at));
                        self.pos += 2;
                    } else if self.peek(1) == Some(']') {
                        out.push((Tok::ExtChoice, at));
                        self.pos += 2;
                    } else {
                        return Err(self.err(at, "expected `[|`, `[[` or `[]`"));
                    }
                }
                ']' => {
                    if self.peek(1) == Some(']') {
                        out.push((Tok::RenClose, at));
                        self.pos += 2;
                    } else {
                        return Err(self.err(at, "stray `]`"));
                    }
                }
                '|' => {
                    if self.peek(1) == Some('~') && self.peek(2) == Some('|') {
                        out.push((Tok::IntChoice, at));
                        self.pos += 3;
                    } else if self.peek(1) == Some(']') {
                        out.push((Tok::ParClose, at));
                        self.pos += 2;
                    } else {
                        return Err(self.err(at, "expected `|~|` or `|]`"));
                    }
                }
                ':' => {
                    if self.peek(1) == Some('=') {
                        out.push((Tok::Assign, at));
                        self.pos += 2;
                    } else {
                        return Err(self.err(at, "expected `:=`"));
                    }
                }
                '-' => {
                    if self.peek(1) == Some('>') {
                        out.push((Tok::Arrow, at));
                        self.pos += 2;
                    } else {
                        return Err(self.err(at, "expected `->`"));
                    }
                }
                c if c.is_ascii_alphabetic() => {
                    let start = self.pos;
                    while self.pos < self.src.len() {
                        let d = self.src[self.pos] as char;
                        if d.is_ascii_alphanumeric() || d == '_' {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let tok = match word {
                        "STOP" => Tok::Stop,
                        "DIV" => Tok::Div,
                        "SUCCESS" => Tok::Success,
                        "mu" => Tok::Mu,
                        w if w.chars().next().unwrap().is_ascii_lowercase() => {
                            Tok::LName(w.to_string())
                        }
                        w => Tok::UName(w.to_string()),
                    };
                    out.push((tok, start));
                }
                _ => return Err(self.err(at, format!("unexpected character `{c}`"))),
            }
        }
        Ok(out)
    }

    fn peek(&self, off: usize) -> Option<char> {
        self.src.get(self.pos + off).map(|&b| b as char)
    }
}

fn line_col(src: &[u8], pos: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for &b in &src[..pos.min(src.len())] {
        if b == b'\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

struct Parser<'a> {
    src: &'a [u8],
    toks: Vec<Spanned>,
    pos: usize,
    gen: OccGen,
}

impl<'a> Parser<'a> {
    fn err_at(&self, pos: usize, msg: impl Into<String>) -> CspParseError {
        let (line, col) = line_col(self.src, pos);
        CspParseError { msg: msg.into(), line, col }
    }

    fn err_here(&self, msg: impl Into<String>) -> CspParseError {
        let pos = self
            .toks
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or(self.src.len());
        self.err_at(pos, msg)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), CspParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn name(&mut self, what: &str) -> Result<Name, CspParseError> {
        match self.bump() {
            Some(Tok::LName(s)) => Ok(Name::source(&s)),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err_here(format!("expected {what}")))
            }
        }
    }

    // Level 0: parallel composition, left associative.
    fn p_par(&mut self) -> Result<CspTerm, CspParseError> {
        let mut acc = self.p_ic()?;
        while self.peek() == Some(&Tok::ParOpen) {
            self.bump();
            self.expect(Tok::LBrace, "`{` opening the synchronisation set")?;
            let mut sync = BTreeSet::new();
            if self.peek() != Some(&Tok::RBrace) {
                loop {
                    sync.insert(self.name("a name in the synchronisation set")?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RBrace, "`}` closing the synchronisation set")?;
            self.expect(Tok::ParClose, "`|]`")?;
            let rhs = self.p_ic()?;
            acc = CspTerm::Parallel {
                left: Box::new(acc),
                right: Box::new(rhs),
                sync,
            };
        }
        Ok(acc)
    }

    // Level 1: internal choice, left associative.
    fn p_ic(&mut self) -> Result<CspTerm, CspParseError> {
        let mut acc = self.p_sum()?;
        while self.peek() == Some(&Tok::IntChoice) {
            self.bump();
            let rhs = self.p_sum()?;
            acc = CspTerm::InternalChoice(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    // Level 2: external choice over sums. Operands must themselves be sums
    // (prefixes or parenthesised sums); nested sums flatten.
    fn p_sum(&mut self) -> Result<CspTerm, CspParseError> {
        let first_pos = self.toks.get(self.pos).map(|t| t.1).unwrap_or(0);
        let first = self.p_post()?;
        if self.peek() != Some(&Tok::ExtChoice) {
            return Ok(first);
        }
        let mut summands = match first {
            CspTerm::ExtSum(s) => s,
            _ => {
                return Err(self.err_at(
                    first_pos,
                    "external choice `[]` combines action prefixes only",
                ))
            }
        };
        while self.peek() == Some(&Tok::ExtChoice) {
            self.bump();
            let at = self.toks.get(self.pos).map(|t| t.1).unwrap_or(0);
            match self.p_post()? {
                CspTerm::ExtSum(mut s) => summands.append(&mut s),
                _ => {
                    return Err(
                        self.err_at(at, "external choice `[]` combines action prefixes only")
                    )
                }
            }
        }
        Ok(CspTerm::ExtSum(summands))
    }

    // Level 3: postfix concealment and renaming.
    fn p_post(&mut self) -> Result<CspTerm, CspParseError> {
        let mut acc = self.p_prefix()?;
        loop {
            match self.peek() {
                Some(Tok::Backslash) => {
                    self.bump();
                    let n = self.name("a name to conceal")?;
                    acc = CspTerm::Conceal { body: Box::new(acc), name: n };
                }
                Some(Tok::RenOpen) => {
                    let open_at = self.toks[self.pos].1;
                    self.bump();
                    let mut map: Vec<(Name, Name)> = Vec::new();
                    loop {
                        let from = self.name("a renaming domain name")?;
                        self.expect(Tok::Assign, "`:=`")?;
                        let to = self.name("a renaming target name")?;
                        if map.iter().any(|(x, _)| *x == from) {
                            return Err(self.err_at(
                                open_at,
                                format!("duplicate domain entry `{from}` in renaming"),
                            ));
                        }
                        map.push((from, to));
                        if self.peek() == Some(&Tok::Comma) {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    self.expect(Tok::RenClose, "`]]`")?;
                    map.sort_by_key(|(x, _)| *x);
                    acc = CspTerm::Rename { body: Box::new(acc), map };
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // Level 4: action prefix, right recursive.
    fn p_prefix(&mut self) -> Result<CspTerm, CspParseError> {
        if let (Some(Tok::LName(a)), Some(Tok::Arrow)) = (self.peek(), self.peek2()) {
            let action = Name::source(a);
            self.bump();
            self.bump();
            let occ = self.gen.next();
            let cont = self.p_prefix()?;
            return Ok(CspTerm::ExtSum(vec![Summand { action, cont, occ }]));
        }
        self.p_atom()
    }

    fn p_atom(&mut self) -> Result<CspTerm, CspParseError> {
        match self.bump() {
            Some(Tok::Stop) => Ok(CspTerm::Stop),
            Some(Tok::Div) => Ok(CspTerm::Div),
            Some(Tok::Success) => Ok(CspTerm::Success),
            Some(Tok::UName(x)) => Ok(CspTerm::Var(x)),
            Some(Tok::Mu) => {
                let var = match self.bump() {
                    Some(Tok::UName(x)) => x,
                    _ => return Err(self.err_here("expected a process variable after `mu`")),
                };
                self.expect(Tok::Dot, "`.` after the recursion variable")?;
                let body = self.p_par()?;
                Ok(CspTerm::Rec { var, body: Box::new(body) })
            }
            Some(Tok::LParen) => {
                let t = self.p_par()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::LName(n)) => {
                self.pos -= 1;
                Err(self.err_here(format!("name `{n}` must be prefixed with `->`")))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err_here("expected a process term"))
            }
        }
    }
}

/// Parse a CSP term. Occurrence ids are assigned left to right starting at 0.
pub fn parse_csp(text: &str) -> Result<CspTerm, CspParseError> {
    let toks = Lexer { src: text.as_bytes(), pos: 0 }.lex()?;
    let mut p = Parser {
        src: text.as_bytes(),
        toks,
        pos: 0,
        gen: OccGen::default(),
    };
    let t = p.p_par()?;
    if p.pos != p.toks.len() {
        return Err(p.err_here("trailing input after term"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms() {
        assert_eq!(parse_csp("STOP").unwrap(), CspTerm::Stop);
        assert_eq!(parse_csp("DIV").unwrap(), CspTerm::Div);
        assert_eq!(parse_csp("SUCCESS").unwrap(), CspTerm::Success);
        assert_eq!(parse_csp("X").unwrap(), CspTerm::Var("X".into()));
    }

    #[test]
    fn binary_sum() {
        let t = parse_csp("a -> STOP [] b -> STOP").unwrap();
        match &t {
            CspTerm::ExtSum(s) => {
                assert_eq!(s.len(), 2);
                assert_eq!(s[0].action, Name::source("a"));
                assert_eq!(s[1].action, Name::source("b"));
                assert_eq!(s[0].cont, CspTerm::Stop);
                assert_ne!(s[0].occ, s[1].occ);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn example_e_shape() {
        let t = parse_csp(
            "(o -> P1 [] p -> P2) [|{o,p}|] (o -> P3 [] (p -> P4 [] q -> P5))",
        )
        .unwrap();
        match &t {
            CspTerm::Parallel { left, right, sync } => {
                assert_eq!(
                    sync.iter().copied().collect::<Vec<_>>(),
                    vec![Name::source("o"), Name::source("p")]
                );
                match (left.as_ref(), right.as_ref()) {
                    (CspTerm::ExtSum(l), CspTerm::ExtSum(r)) => {
                        assert_eq!(l.len(), 2);
                        assert_eq!(r.len(), 3);
                        assert_eq!(r[2].cont, CspTerm::Var("P5".into()));
                    }
                    other => panic!("unexpected {other:?}"),
                }
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_postfix() {
        // `\` applies to the whole prefix, prefix binds tighter.
        let t = parse_csp("a -> STOP \\ b").unwrap();
        assert!(matches!(t, CspTerm::Conceal { .. }));
        // Renaming chains.
        let t = parse_csp("a -> STOP[[a := b]][[b := c]]").unwrap();
        match t {
            CspTerm::Rename { body, map } => {
                assert_eq!(map, vec![(Name::source("b"), Name::source("c"))]);
                assert!(matches!(*body, CspTerm::Rename { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
        // Parallel is loosest.
        let t = parse_csp("a -> STOP [|{}|] b -> STOP |~| STOP").unwrap();
        assert!(matches!(t, CspTerm::Parallel { .. }));
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_csp("a -> ").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.col >= 5);
        assert!(parse_csp("STOP [] a -> STOP").is_err(), "non-prefix in sum");
        assert!(parse_csp("P [[a := b, a := c]]").is_err(), "duplicate domain");
        assert!(parse_csp("(a -> STOP").is_err());
        assert!(parse_csp("").is_err());
    }

    #[test]
    fn parenthesised_sum_flattens() {
        let t = parse_csp("a -> STOP [] (b -> STOP [] c -> STOP)").unwrap();
        match t {
            CspTerm::ExtSum(s) => assert_eq!(s.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn print_parse_roundtrip() {
        let cases = [
            "STOP",
            "a -> STOP [] b -> a -> DIV",
            "(o -> P1 [] p -> P2) [|{o, p}|] (o -> P3 [] p -> P4 [] q -> P5)",
            "mu X . a -> X",
            "(a -> STOP |~| b -> STOP) \\ a",
            "a -> STOP [|{a, b}|] (b -> STOP \\ c)[[a := b]]",
            "mu X . (a -> X [] b -> STOP) |~| SUCCESS",
        ];
        for src in cases {
            let t1 = parse_csp(src).unwrap();
            let printed = t1.to_string();
            let t2 = parse_csp(&printed).unwrap_or_else(|e| panic!("reparse `{printed}`: {e}"));
            assert!(t1.same_term(&t2), "`{src}` -> `{printed}` changed shape");
        }
    }
}
