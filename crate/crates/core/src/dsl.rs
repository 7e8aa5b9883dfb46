//! Let-expression programs: AST, parser and printer.
//!
//! Concrete syntax, one instruction per line or separated by `;`, `#` starts a
//! comment:
//!
//! ```text
//! seed 7 0
//! movey 3
//! tile a            # name the current tile
//! moveN; moveE
//! let x             # core `let`
//! from x
//! bind N a
//! rewindTo a
//! rewindBy 1
//! next b b0         # b0 := tile created right after b
//! prev d d0         # d0 := tile created right before d
//! eraseAfter c
//! repeat 20 { movey 2; movex 1 }
//! pump { color blue; vect 16 237 }
//! move c1           # explicit side key, for non-grid geometries
//! ```
//!
//! Numeric arguments are integer literals or closed arithmetic without spaces
//! (`3^7+8`, `(40-1)/2`), folded at parse time.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::geometry::Compass;

/// Side named by a move or bind.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Compass(Compass),
    /// A geometry side key such as `g1+` or `c0`.
    Key(String),
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Compass(c) => write!(f, "{}", c.letter()),
            Side::Key(k) => f.write_str(k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instr {
    Move(Side),
    Let(String),
    Bind(Side, String),
    From(String),
    Seed(i64, i64),
    MoveX(i64),
    MoveY(i64),
    CurrentTile(String),
    RewindTo(String),
    RewindBy(u64),
    NextTile { of: String, name: String },
    PrevTile { of: String, name: String },
    EraseAfter(String),
    Repeat(u64, Vec<Stmt>),
    Pump(Vec<Stmt>),
    DiscreteVect(i64, i64),
    SetColor(String),
}

impl Instr {
    /// Instructions of the core language (moves, let, bind, from).
    pub fn is_core(&self) -> bool {
        matches!(self, Instr::Move(_) | Instr::Let(_) | Instr::Bind(..) | Instr::From(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

/// An instruction with its source position. Equality ignores the span.
#[derive(Clone, Debug)]
pub struct Stmt {
    pub instr: Instr,
    pub span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.instr == other.instr
    }
}

impl Eq for Stmt {}

impl From<Instr> for Stmt {
    fn from(instr: Instr) -> Self {
        Stmt { instr, span: Span::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Program {
    pub fn new(instrs: impl IntoIterator<Item = Instr>) -> Self {
        Program { stmts: instrs.into_iter().map(Stmt::from).collect() }
    }

    pub fn push(&mut self, instr: Instr) {
        self.stmts.push(instr.into());
    }

    pub fn len(&self) -> usize {
        self.stmts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }

    pub fn instrs(&self) -> impl Iterator<Item = &Instr> {
        self.stmts.iter().map(|s| &s.instr)
    }

    /// `true` when no sugar instruction other than `seed` occurs.
    pub fn is_core(&self) -> bool {
        self.instrs().all(|i| i.is_core() || matches!(i, Instr::Seed(..)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DslErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("negative repeat count {0}")]
    NegativeRepeat(i64),
    #[error("unknown direction `{0}`")]
    UnknownDirection(String),
    #[error("bad number `{0}`: {1}")]
    Number(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub kind: DslErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Open,
    Close,
    Sep,
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, DslError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = Span { line: li + 1, col: i + 1 };
            match c {
                '#' => break,
                c if c.is_whitespace() => i += 1,
                '{' => {
                    out.push((Tok::Open, span));
                    i += 1;
                }
                '}' => {
                    out.push((Tok::Close, span));
                    i += 1;
                }
                ';' => {
                    out.push((Tok::Sep, span));
                    i += 1;
                }
                _ => {
                    let mut word = String::new();
                    let mut depth = 0i32;
                    while i < chars.len() {
                        let c = chars[i];
                        if depth == 0 && (c.is_whitespace() || matches!(c, '{' | '}' | ';' | '#')) {
                            break;
                        }
                        match c {
                            '(' => depth += 1,
                            ')' => depth -= 1,
                            _ => {}
                        }
                        if !c.is_whitespace() {
                            word.push(c);
                        }
                        i += 1;
                    }
                    if depth != 0 {
                        return Err(DslError {
                            line: span.line,
                            col: span.col,
                            kind: DslErrorKind::Syntax("unbalanced parentheses".into()),
                        });
                    }
                    out.push((Tok::Word(word), span));
                }
            }
        }
        out.push((Tok::Sep, Span { line: li + 1, col: chars.len() + 1 }));
    }
    Ok(out)
}

/// Integer arithmetic: `+ - * / ^`, unary minus, parentheses. `/` truncates.
pub fn eval_int(expr: &str) -> Result<i64, String> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
    }
    impl P<'_> {
        fn peek(&self) -> Option<u8> {
            self.s.get(self.i).copied()
        }
        fn expr(&mut self) -> Result<i64, String> {
            let mut v = self.term()?;
            while let Some(c @ (b'+' | b'-')) = self.peek() {
                self.i += 1;
                let r = self.term()?;
                v = if c == b'+' { v.checked_add(r) } else { v.checked_sub(r) }.ok_or("overflow")?;
            }
            Ok(v)
        }
        fn term(&mut self) -> Result<i64, String> {
            let mut v = self.unary()?;
            while let Some(c @ (b'*' | b'/')) = self.peek() {
                self.i += 1;
                let r = self.unary()?;
                v = if c == b'*' {
                    v.checked_mul(r).ok_or("overflow")?
                } else if r == 0 {
                    return Err("division by zero".into());
                } else {
                    v / r
                };
            }
            Ok(v)
        }
        fn unary(&mut self) -> Result<i64, String> {
            if self.peek() == Some(b'-') {
                self.i += 1;
                return Ok(-self.unary()?);
            }
            if self.peek() == Some(b'+') {
                self.i += 1;
            }
            self.power()
        }
        fn power(&mut self) -> Result<i64, String> {
            let base = self.atom()?;
            if self.peek() == Some(b'^') {
                self.i += 1;
                let e = self.unary()?;
                let e = u32::try_from(e).map_err(|_| "negative exponent".to_string())?;
                return base.checked_pow(e).ok_or_else(|| "overflow".to_string());
            }
            Ok(base)
        }
        fn atom(&mut self) -> Result<i64, String> {
            match self.peek() {
                Some(b'(') => {
                    self.i += 1;
                    let v = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err("expected `)`".into());
                    }
                    self.i += 1;
                    Ok(v)
                }
                Some(c) if c.is_ascii_digit() => {
                    let start = self.i;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.i += 1;
                    }
                    std::str::from_utf8(&self.s[start..self.i])
                        .unwrap()
                        .parse::<i64>()
                        .map_err(|e| e.to_string())
                }
                Some(c) => Err(format!("unexpected `{}`", c as char)),
                None => Err("unexpected end".into()),
            }
        }
    }
    let mut p = P { s: expr.as_bytes(), i: 0 };
    let v = p.expr()?;
    if p.i != expr.len() {
        return Err(format!("trailing input at offset {}", p.i));
    }
    Ok(v)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    bound: HashSet<String>,
}

impl Parser {
    fn err(span: Span, kind: DslErrorKind) -> DslError {
        DslError { line: span.line, col: span.col, kind }
    }

    fn end_span(&self) -> Span {
        self.toks.last().map(|t| t.1).unwrap_or(Span { line: 1, col: 1 })
    }

    fn skip_seps(&mut self) {
        while matches!(self.toks.get(self.pos), Some((Tok::Sep, _))) {
            self.pos += 1;
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Span), DslError> {
        match self.toks.get(self.pos) {
            Some((Tok::Word(w), sp)) => {
                self.pos += 1;
                Ok((w.clone(), *sp))
            }
            Some((_, sp)) => Err(Self::err(*sp, DslErrorKind::Syntax(format!("expected {what}")))),
            None => Err(Self::err(self.end_span(), DslErrorKind::Syntax(format!("expected {what}")))),
        }
    }

    fn number(&mut self) -> Result<(i64, Span), DslError> {
        let (w, sp) = self.word("a number")?;
        eval_int(&w).map(|v| (v, sp)).map_err(|e| Self::err(sp, DslErrorKind::Number(w, e)))
    }

    fn ident(&mut self) -> Result<(String, Span), DslError> {
        let (w, sp) = self.word("an identifier")?;
        if !is_ident(&w) {
            return Err(Self::err(sp, DslErrorKind::Syntax(format!("`{w}` is not an identifier"))));
        }
        Ok((w, sp))
    }

    fn use_ident(&mut self) -> Result<String, DslError> {
        let (w, sp) = self.ident()?;
        if !self.bound.contains(&w) {
            return Err(Self::err(sp, DslErrorKind::Unbound(w)));
        }
        Ok(w)
    }

    fn def_ident(&mut self) -> Result<String, DslError> {
        let (w, _) = self.ident()?;
        self.bound.insert(w.clone());
        Ok(w)
    }

    fn side(&mut self) -> Result<Side, DslError> {
        let (w, sp) = self.word("a direction")?;
        parse_side(&w).ok_or_else(|| Self::err(sp, DslErrorKind::UnknownDirection(w)))
    }

    fn block(&mut self) -> Result<Vec<Stmt>, DslError> {
        match self.toks.get(self.pos) {
            Some((Tok::Open, _)) => self.pos += 1,
            Some((_, sp)) => return Err(Self::err(*sp, DslErrorKind::Syntax("expected `{`".into()))),
            None => return Err(Self::err(self.end_span(), DslErrorKind::Syntax("expected `{`".into()))),
        }
        let body = self.stmts(true)?;
        Ok(body)
    }

    fn stmts(&mut self, in_block: bool) -> Result<Vec<Stmt>, DslError> {
        let mut out = Vec::new();
        loop {
            self.skip_seps();
            match self.toks.get(self.pos) {
                None if in_block => {
                    return Err(Self::err(self.end_span(), DslErrorKind::Syntax("unclosed `{`".into())));
                }
                None => return Ok(out),
                Some((Tok::Close, sp)) => {
                    if in_block {
                        self.pos += 1;
                        return Ok(out);
                    }
                    return Err(Self::err(*sp, DslErrorKind::Syntax("unexpected `}`".into())));
                }
                Some((Tok::Open, sp)) => {
                    return Err(Self::err(*sp, DslErrorKind::Syntax("unexpected `{`".into())));
                }
                _ => {}
            }
            out.push(self.stmt()?);
            match self.toks.get(self.pos) {
                None | Some((Tok::Sep, _)) | Some((Tok::Close, _)) => {}
                Some((_, sp)) => {
                    return Err(Self::err(*sp, DslErrorKind::Syntax("expected end of instruction".into())));
                }
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, DslError> {
        let (kw, span) = self.word("an instruction")?;
        let instr = match kw.as_str() {
            "moveN" | "moveE" | "moveS" | "moveW" => Instr::Move(Side::Compass(Compass::from_letter(&kw[4..]).unwrap())),
            "move" => Instr::Move(self.side()?),
            "let" => Instr::Let(self.def_ident()?),
            "tile" => Instr::CurrentTile(self.def_ident()?),
            "bind" => {
                let side = self.side()?;
                Instr::Bind(side, self.use_ident()?)
            }
            "from" => Instr::From(self.use_ident()?),
            "rewindTo" => Instr::RewindTo(self.use_ident()?),
            "eraseAfter" => Instr::EraseAfter(self.use_ident()?),
            "seed" => {
                let (x, _) = self.number()?;
                let (y, _) = self.number()?;
                Instr::Seed(x, y)
            }
            "movex" => Instr::MoveX(self.number()?.0),
            "movey" => Instr::MoveY(self.number()?.0),
            "vect" => {
                let (dx, _) = self.number()?;
                let (dy, _) = self.number()?;
                Instr::DiscreteVect(dx, dy)
            }
            "rewindBy" => {
                let (k, sp) = self.number()?;
                let k = u64::try_from(k).map_err(|_| {
                    Self::err(sp, DslErrorKind::Number(k.to_string(), "rewind count must be nonnegative".into()))
                })?;
                Instr::RewindBy(k)
            }
            "next" | "prev" => {
                let of = self.use_ident()?;
                let name = self.def_ident()?;
                if kw == "next" {
                    Instr::NextTile { of, name }
                } else {
                    Instr::PrevTile { of, name }
                }
            }
            "repeat" => {
                let (k, sp) = self.number()?;
                let k = u64::try_from(k).map_err(|_| Self::err(sp, DslErrorKind::NegativeRepeat(k)))?;
                Instr::Repeat(k, self.block()?)
            }
            "pump" => Instr::Pump(self.block()?),
            "color" => {
                let (c, sp) = self.word("a color")?;
                if !is_ident(&c) {
                    return Err(Self::err(sp, DslErrorKind::Syntax(format!("bad color `{c}`"))));
                }
                Instr::SetColor(c)
            }
            other => return Err(Self::err(span, DslErrorKind::Syntax(format!("unknown instruction `{other}`")))),
        };
        Ok(Stmt { instr, span })
    }
}

fn is_ident(w: &str) -> bool {
    let mut chars = w.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn parse_side(w: &str) -> Option<Side> {
    if let Some(c) = Compass::from_letter(w) {
        return Some(Side::Compass(c));
    }
    let key_like = matches!(w, "up" | "ring+" | "ring-")
        || (w.starts_with('c') && w.len() > 1 && w[1..].chars().all(|c| c.is_ascii_digit()))
        || (w.starts_with('g')
            && (w.ends_with('+') || w.ends_with('-'))
            && w.len() > 2
            && w[1..w.len() - 1].chars().all(|c| c.is_ascii_digit()));
    key_like.then(|| Side::Key(w.to_string()))
}

pub fn parse(text: &str) -> Result<Program, DslError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, bound: HashSet::new() };
    let stmts = p.stmts(false)?;
    Ok(Program { stmts })
}

fn write_stmts(out: &mut String, stmts: &[Stmt], indent: usize) {
    for s in stmts {
        let pad = "  ".repeat(indent);
        let _ = match &s.instr {
            Instr::Move(Side::Compass(c)) => writeln!(out, "{pad}move{}", c.letter()),
            Instr::Move(side) => writeln!(out, "{pad}move {side}"),
            Instr::Let(x) => writeln!(out, "{pad}let {x}"),
            Instr::Bind(side, x) => writeln!(out, "{pad}bind {side} {x}"),
            Instr::From(x) => writeln!(out, "{pad}from {x}"),
            Instr::Seed(x, y) => writeln!(out, "{pad}seed {x} {y}"),
            Instr::MoveX(n) => writeln!(out, "{pad}movex {n}"),
            Instr::MoveY(n) => writeln!(out, "{pad}movey {n}"),
            Instr::CurrentTile(x) => writeln!(out, "{pad}tile {x}"),
            Instr::RewindTo(x) => writeln!(out, "{pad}rewindTo {x}"),
            Instr::RewindBy(k) => writeln!(out, "{pad}rewindBy {k}"),
            Instr::NextTile { of, name } => writeln!(out, "{pad}next {of} {name}"),
            Instr::PrevTile { of, name } => writeln!(out, "{pad}prev {of} {name}"),
            Instr::EraseAfter(x) => writeln!(out, "{pad}eraseAfter {x}"),
            Instr::DiscreteVect(dx, dy) => writeln!(out, "{pad}vect {dx} {dy}"),
            Instr::SetColor(c) => writeln!(out, "{pad}color {c}"),
            Instr::Repeat(k, body) => {
                let _ = writeln!(out, "{pad}repeat {k} {{");
                write_stmts(out, body, indent + 1);
                writeln!(out, "{pad}}}")
            }
            Instr::Pump(body) => {
                let _ = writeln!(out, "{pad}pump {{");
                write_stmts(out, body, indent + 1);
                writeln!(out, "{pad}}}")
            }
        };
    }
}

pub fn unparse(p: &Program) -> String {
    let mut out = String::new();
    write_stmts(&mut out, &p.stmts, 0);
    out
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&unparse(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_and_two_moves() {
        let p = parse("seed 0 0\nmoveN\nmoveN").unwrap();
        assert_eq!(
            p,
            Program::new([
                Instr::Seed(0, 0),
                Instr::Move(Side::Compass(Compass::N)),
                Instr::Move(Side::Compass(Compass::N))
            ])
        );
        assert_eq!(p.stmts[2].span, Span { line: 3, col: 1 });
    }

    #[test]
    fn repeat_block() {
        let p = parse("repeat 20 { movey 2; movex 1 }").unwrap();
        assert_eq!(
            p,
            Program::new([Instr::Repeat(20, vec![Instr::MoveY(2).into(), Instr::MoveX(1).into()])])
        );
    }

    #[test]
    fn unknown_direction() {
        let e = parse("let x\nbind Q x").unwrap_err();
        assert_eq!(e.kind, DslErrorKind::UnknownDirection("Q".into()));
        assert_eq!((e.line, e.col), (2, 6));
    }

    #[test]
    fn unbound_and_negative_repeat() {
        assert_eq!(parse("from x").unwrap_err().kind, DslErrorKind::Unbound("x".into()));
        assert_eq!(parse("repeat -2 { moveN }").unwrap_err().kind, DslErrorKind::NegativeRepeat(-2));
        assert!(matches!(parse("repeat 2 { moveN").unwrap_err().kind, DslErrorKind::Syntax(_)));
        assert!(matches!(parse("moveN moveN").unwrap_err().kind, DslErrorKind::Syntax(_)));
    }

    #[test]
    fn arithmetic_is_folded() {
        assert_eq!(eval_int("-3^7+8").unwrap(), -2179);
        assert_eq!(eval_int("(274-15)/3-15").unwrap(), 71);
        assert_eq!(eval_int("2*3^(8-2)").unwrap(), 1458);
        let p = parse("movex (2*3^6)").unwrap();
        assert_eq!(p, Program::new([Instr::MoveX(1458)]));
        assert!(eval_int("1/0").is_err());
    }

    #[test]
    fn names_from_blocks_stay_visible() {
        let p = parse("repeat 1 { tile a }\nbind N a\nnext a b; prev b c; from c");
        assert!(p.is_ok());
    }

    #[test]
    fn empty_program() {
        assert_eq!(unparse(&Program::default()), "");
        assert_eq!(parse("  # nothing\n").unwrap(), Program::default());
    }

    #[test]
    fn round_trip_nested() {
        let text = "seed 1 -2\ntile a\npump {\n  color red\n  vect 3 -4\n}\nrepeat 2 {\n  moveW\n  move g1+\n}\nbind S a\n";
        let p = parse(text).unwrap();
        assert_eq!(unparse(&p), text);
        assert_eq!(parse(&unparse(&p)).unwrap(), p);
    }
}
