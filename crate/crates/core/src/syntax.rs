//! Concrete syntax for formulas.
//!
//! Precedence, loosest first: `<->`, `->` (right), `|` (right), `&` (right),
//! then prefixes `~`, `K i`, `E {..}`, `E^n {..}`, `C {..}`, `[*]`, `[.]`,
//! `[name]`, `[!name]`, optionally `[*]^k`. Atoms are `mu i`, `lambda j`,
//! `eps j`, `TRUE`, `FALSE`, `@name` (physical) and `@!name` (not physical).
//! `<->`, `E^n` and `[a]^k` are expanded while parsing.

use std::fmt;

use thiserror::Error;

use crate::formula::{iter_box, iter_e, Agent, AtomKind, EventKind, EventSym, Formula, Group};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(u32),
    Ident(String),
    Arrow,
    Iff,
    Bar,
    Amp,
    Tilde,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Caret,
    LBrack,
    RBrack,
    Star,
    Dot,
    Currency,
    At,
    Bang,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, ch)) = it.peek() {
        let simple = match ch {
            c if c.is_whitespace() => {
                it.next();
                continue;
            }
            '|' => Some(Tok::Bar),
            '&' => Some(Tok::Amp),
            '~' => Some(Tok::Tilde),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            ',' => Some(Tok::Comma),
            '^' => Some(Tok::Caret),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '*' => Some(Tok::Star),
            '.' => Some(Tok::Dot),
            '¤' => Some(Tok::Currency),
            '@' => Some(Tok::At),
            '!' => Some(Tok::Bang),
            _ => None,
        };
        if let Some(t) = simple {
            it.next();
            out.push((pos, t));
            continue;
        }
        if src[pos..].starts_with("<->") {
            for _ in 0..3 {
                it.next();
            }
            out.push((pos, Tok::Iff));
        } else if src[pos..].starts_with("->") {
            it.next();
            it.next();
            out.push((pos, Tok::Arrow));
        } else if ch.is_ascii_digit() {
            let mut end = pos;
            while let Some(&(p, c)) = it.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                end = p + c.len_utf8();
                it.next();
            }
            let n = src[pos..end].parse().map_err(|_| ParseError {
                pos,
                message: "integer out of range".into(),
            })?;
            out.push((pos, Tok::Int(n)));
        } else if ch.is_alphabetic() || ch == '_' {
            let mut end = pos;
            while let Some(&(p, c)) = it.peek() {
                if !(c.is_alphanumeric() || c == '_' || c == '\'') {
                    break;
                }
                end = p + c.len_utf8();
                it.next();
            }
            out.push((pos, Tok::Ident(src[pos..end].to_string())));
        } else {
            return Err(ParseError { pos, message: format!("unexpected character {ch:?}") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), message: message.into() })
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn int(&mut self, what: &str) -> Result<u32, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.at += 1;
                Ok(n)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.at += 1;
                Ok(s)
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.formula()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            return Ok(Formula::imp(lhs, self.imp()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.and()?;
        if self.eat(&Tok::Bar) {
            return Ok(Formula::or(lhs, self.or()?));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Amp) {
            return Ok(Formula::and(lhs, self.and()?));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<usize, ParseError> {
        if self.eat(&Tok::Caret) {
            Ok(self.int("an exponent after `^`")? as usize)
        } else {
            Ok(1)
        }
    }

    fn group(&mut self) -> Result<Group, ParseError> {
        let pos = self.pos();
        self.expect(&Tok::LBrace, "`{`")?;
        let mut members = vec![Agent(self.int("an agent")?)];
        while self.eat(&Tok::Comma) {
            members.push(Agent(self.int("an agent")?));
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Group::new(members).map_err(|e| ParseError { pos, message: e.to_string() })
    }

    fn event(&mut self) -> Result<EventSym, ParseError> {
        let ev = match self.bump() {
            Some(Tok::Star) => EventSym::star(),
            Some(Tok::Dot) | Some(Tok::Currency) => EventSym::point(),
            Some(Tok::Bang) => EventSym::new(&self.ident("an event name")?, EventKind::Ontic),
            Some(Tok::Ident(name)) => EventSym::epistemic(&name),
            _ => {
                self.at -= 1;
                return self.err("expected an event");
            }
        };
        self.expect(&Tok::RBrack, "`]`")?;
        Ok(ev)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("unexpected end of formula"),
        };
        match tok {
            Tok::Tilde => {
                self.at += 1;
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.at += 1;
                let f = self.formula()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::LBrack => {
                self.at += 1;
                let ev = self.event()?;
                let k = self.power()?;
                Ok(iter_box(&ev, k, self.unary()?))
            }
            Tok::At => {
                self.at += 1;
                let physical = !self.eat(&Tok::Bang);
                let name = self.ident("an atom name")?;
                Ok(Formula::named(&name, physical))
            }
            Tok::Ident(word) => {
                self.at += 1;
                match word.as_str() {
                    "TRUE" => Ok(Formula::True),
                    "FALSE" => Ok(Formula::False),
                    "mu" => Ok(Formula::mu(self.int("a child index")?)),
                    "lambda" => Ok(Formula::lambda(self.int("a count")?)),
                    "eps" => Ok(Formula::eps(self.int("a count")?)),
                    "K" => {
                        let i = Agent(self.int("an agent")?);
                        Ok(Formula::k(i, self.unary()?))
                    }
                    "E" => {
                        let n = self.power()?;
                        let g = self.group()?;
                        Ok(iter_e(&g, n, self.unary()?))
                    }
                    "C" => {
                        let g = self.group()?;
                        Ok(Formula::c(g, self.unary()?))
                    }
                    _ => {
                        self.at -= 1;
                        self.err(format!("unknown word `{word}`"))
                    }
                }
            }
            _ => self.err("expected a formula"),
        }
    }
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0, end: src.len() };
    let f = p.formula()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Parses an event in brackets, such as `[*]`, `[.]` or `[!paint]`.
pub fn parse_event(src: &str) -> Result<EventSym, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0, end: src.len() };
    p.expect(&Tok::LBrack, "`[`")?;
    let ev = p.event()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(ev)
}

/// Parses a group such as `{1,2,3}`.
pub fn parse_group(src: &str) -> Result<Group, ParseError> {
    let mut p = Parser { toks: lex(src)?, at: 0, end: src.len() };
    let g = p.group()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(g)
}

const IMP: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const UNARY: u8 = 4;

fn event_text(ev: &EventSym) -> String {
    match (ev.name(), ev.kind()) {
        (EventSym::STAR, EventKind::Epistemic) => "[*]".into(),
        (EventSym::POINT, EventKind::Epistemic) => "[.]".into(),
        (name, EventKind::Epistemic) => format!("[{name}]"),
        (name, EventKind::Ontic) => format!("[!{name}]"),
    }
}

fn write_formula(f: &Formula, ctx: u8, out: &mut String) {
    let (prec, wrap) = match f {
        Formula::Imp(..) => (IMP, ctx > IMP),
        Formula::Or(..) => (OR, ctx > OR),
        Formula::And(..) => (AND, ctx > AND),
        _ => (UNARY, false),
    };
    if wrap {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("TRUE"),
        Formula::False => out.push_str("FALSE"),
        Formula::Atom(AtomKind::Mu(i)) => out.push_str(&format!("mu {i}")),
        Formula::Atom(AtomKind::Lambda(j)) => out.push_str(&format!("lambda {j}")),
        Formula::Atom(AtomKind::Eps(j)) => out.push_str(&format!("eps {j}")),
        Formula::Atom(AtomKind::Named { name, physical }) => {
            out.push('@');
            if !physical {
                out.push('!');
            }
            out.push_str(name);
        }
        Formula::Not(a) => {
            out.push('~');
            write_formula(a, UNARY, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            write_formula(a, prec + 1, out);
            out.push_str(match f {
                Formula::And(..) => " & ",
                Formula::Or(..) => " | ",
                _ => " -> ",
            });
            write_formula(b, prec, out);
        }
        Formula::K(i, a) => {
            out.push_str(&format!("K {i} "));
            write_formula(a, UNARY, out);
        }
        Formula::C(g, a) => {
            out.push_str(&format!("C {g} "));
            write_formula(a, UNARY, out);
        }
        Formula::E(g, a) => {
            let mut n = 1;
            let mut body: &Formula = a;
            while let Formula::E(h, inner) = body {
                if h != g {
                    break;
                }
                n += 1;
                body = inner;
            }
            if n == 1 {
                out.push_str(&format!("E {g} "));
            } else {
                out.push_str(&format!("E^{n} {g} "));
            }
            write_formula(body, UNARY, out);
        }
        Formula::Box(ev, a) => {
            let mut n = 1;
            let mut body: &Formula = a;
            while let Formula::Box(e2, inner) = body {
                if e2 != ev {
                    break;
                }
                n += 1;
                body = inner;
            }
            out.push_str(&event_text(ev));
            if n > 1 {
                out.push_str(&format!("^{n}"));
            }
            out.push(' ');
            write_formula(body, UNARY, out);
        }
    }
    if wrap {
        out.push(')');
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, 0, &mut s);
    s
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for EventSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&event_text(self))
    }
}
