//! Expression grammar and index-letter validation.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::lexer::{Tok, Token};
use super::{Diagnostic, Pos};

/// An index slot: a letter to be expanded or a fixed component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Idx {
    Letter(String),
    Fixed(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymHead {
    Plain(String),
    Sbar(String),
    CbarName(String),
    CbarStage(u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt),
    Sym {
        head: SymHead,
        comps: Vec<Idx>,
        jet: Vec<u32>,
        pos: Pos,
    },
    Eps(Vec<Idx>, Pos),
    Delta(Idx, Idx),
    /// Total derivative along the listed directions.
    D(Vec<Idx>, Box<Expr>),
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>, Pos),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32, Pos),
}

pub const RESERVED: &[&str] = &[
    "d", "eps", "delta", "sbar", "cbar", "L", "dim", "field", "stage", "option", "antisym",
];

pub struct Cursor<'a> {
    toks: &'a [Token],
    i: usize,
    end: Pos,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], end: Pos) -> Self {
        Cursor { toks, i: 0, end }
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    pub fn pos(&self) -> Pos {
        self.toks.get(self.i).map_or(self.end, |t| t.pos)
    }

    pub fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.i).map(|t| &t.tok);
        self.i += 1;
        t
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), Diagnostic> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == w) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn unexpected(&self, wanted: &str) -> Diagnostic {
        let found = match self.peek() {
            None => "end of statement".to_string(),
            Some(Tok::Int(v)) => format!("`{v}`"),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::JetOpen) => "`_(`".to_string(),
            Some(Tok::Punct(c)) => format!("`{c}`"),
        };
        Diagnostic::new(
            "E-SYNTAX",
            self.pos(),
            format!("expected {wanted}, found {found}"),
        )
    }

    pub fn name(&mut self) -> Result<String, Diagnostic> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn small_int(&mut self) -> Result<u32, Diagnostic> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.to_u32().ok_or_else(|| {
                    Diagnostic::new("E-RANGE", pos, "integer too large".to_string())
                })?;
                self.i += 1;
                Ok(v)
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    /// `idx (, idx)*`, possibly empty, up to the closing bracket.
    pub fn index_list(&mut self, close: char) -> Result<Vec<Idx>, Diagnostic> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            match self.peek() {
                Some(Tok::Int(_)) => out.push(Idx::Fixed(self.small_int()?)),
                Some(Tok::Ident(s)) if !RESERVED.contains(&s.as_str()) => {
                    out.push(Idx::Letter(self.name()?))
                }
                _ => return Err(self.unexpected("an index letter or integer")),
            }
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn int_list(&mut self) -> Result<Vec<u32>, Diagnostic> {
        let mut out = Vec::new();
        if self.eat(')') {
            return Ok(out);
        }
        loop {
            out.push(self.small_int()?);
            if self.eat(')') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    pub fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut terms = Vec::new();
        let mut neg = false;
        loop {
            terms.push((neg, self.term()?));
            if self.eat('+') {
                neg = false;
            } else if self.eat('-') {
                neg = true;
            } else {
                break;
            }
        }
        if terms.len() == 1 && !terms[0].0 {
            Ok(terms.pop().unwrap().1)
        } else {
            Ok(Expr::Sum(terms))
        }
    }

    fn term(&mut self) -> Result<Expr, Diagnostic> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat('*') {
                factors.push(self.factor()?);
            } else if matches!(self.peek(), Some(Tok::Punct('/'))) {
                let pos = self.pos();
                self.bump();
                let den = self.factor()?;
                let num = if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    Expr::Product(std::mem::take(&mut factors))
                };
                factors = vec![Expr::Div(Box::new(num), Box::new(den), pos)];
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, Diagnostic> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if matches!(self.peek(), Some(Tok::Punct('^'))) {
            let pos = self.pos();
            self.bump();
            let k = self.small_int()?;
            return Ok(Expr::Pow(Box::new(base), k, pos));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, Diagnostic> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Some(Tok::Punct('(')) => {
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(w)) => {
                self.bump();
                match w.as_str() {
                    "d" => {
                        self.expect('[')?;
                        let dirs = self.index_list(']')?;
                        if dirs.is_empty() {
                            return Err(Diagnostic::new(
                                "E-SYNTAX",
                                pos,
                                "d[...] needs at least one direction".into(),
                            ));
                        }
                        self.expect('(')?;
                        let e = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::D(dirs, Box::new(e)))
                    }
                    "eps" => {
                        self.expect('[')?;
                        Ok(Expr::Eps(self.index_list(']')?, pos))
                    }
                    "delta" => {
                        self.expect('[')?;
                        let l = self.index_list(']')?;
                        if l.len() != 2 {
                            return Err(Diagnostic::new(
                                "E-SYNTAX",
                                pos,
                                "delta takes exactly two indices".into(),
                            ));
                        }
                        let mut it = l.into_iter();
                        Ok(Expr::Delta(it.next().unwrap(), it.next().unwrap()))
                    }
                    "sbar" => {
                        self.expect('(')?;
                        let n = self.name()?;
                        self.expect(')')?;
                        self.symbol_tail(SymHead::Sbar(n), pos)
                    }
                    "cbar" => {
                        self.expect('(')?;
                        let head = match self.peek() {
                            Some(Tok::Int(_)) => SymHead::CbarStage(self.small_int()?),
                            _ => SymHead::CbarName(self.name()?),
                        };
                        self.expect(')')?;
                        self.symbol_tail(head, pos)
                    }
                    w if RESERVED.contains(&w) => Err(Diagnostic::new(
                        "E-SYNTAX",
                        pos,
                        format!("`{w}` is reserved"),
                    )),
                    _ => self.symbol_tail(SymHead::Plain(w), pos),
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn symbol_tail(&mut self, head: SymHead, pos: Pos) -> Result<Expr, Diagnostic> {
        let comps = if self.eat('[') {
            self.index_list(']')?
        } else {
            Vec::new()
        };
        let jet = if matches!(self.peek(), Some(Tok::JetOpen)) {
            self.bump();
            self.int_list()?
        } else {
            Vec::new()
        };
        Ok(Expr::Sym {
            head,
            comps,
            jet,
            pos,
        })
    }
}

/// Letters left free by an expression, and letters summed somewhere inside it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Letters {
    pub free: BTreeSet<String>,
    pub bound: BTreeSet<String>,
}

fn letters_of(idx: &[Idx]) -> impl Iterator<Item = &String> {
    idx.iter().filter_map(|i| match i {
        Idx::Letter(l) => Some(l),
        Idx::Fixed(_) => None,
    })
}

/// Validates the index-letter discipline at `pos` and returns the letter sets.
pub fn analyze(e: &Expr, pos: Pos) -> Result<Letters, Diagnostic> {
    match e {
        Expr::Num(_) => Ok(Letters::default()),
        Expr::Sym { comps, pos, .. } => {
            product_letters(letters_of(comps).cloned().collect(), &[], *pos)
        }
        Expr::Eps(l, p) => product_letters(letters_of(l).cloned().collect(), &[], *p),
        Expr::Delta(a, b) => {
            let v = [a.clone(), b.clone()];
            product_letters(letters_of(&v).cloned().collect(), &[], pos)
        }
        Expr::D(dirs, inner) => {
            let a = analyze(inner, pos)?;
            let mut occ: Vec<String> = letters_of(dirs).cloned().collect();
            occ.extend(a.free.iter().cloned());
            product_letters(occ, &[a], pos)
        }
        Expr::Product(fs) => {
            let mut occ = Vec::new();
            let mut kids = Vec::new();
            for f in fs {
                let a = analyze(f, pos)?;
                occ.extend(a.free.iter().cloned());
                kids.push(a);
            }
            product_letters(occ, &kids, pos)
        }
        Expr::Sum(ts) => {
            let mut out: Option<Letters> = None;
            for (_, t) in ts {
                let a = analyze(t, pos)?;
                match &mut out {
                    None => out = Some(a),
                    Some(o) => {
                        if o.free != a.free {
                            return Err(Diagnostic::new(
                                "E-IDX-MISMATCH",
                                pos,
                                format!(
                                    "terms of a sum have different free letters {{{}}} and {{{}}}",
                                    join(&o.free),
                                    join(&a.free)
                                ),
                            ));
                        }
                        o.bound.extend(a.bound);
                    }
                }
            }
            Ok(out.unwrap_or_default())
        }
        Expr::Neg(inner) => analyze(inner, pos),
        Expr::Div(num, den, p) => {
            let a = analyze(num, pos)?;
            let b = analyze(den, pos)?;
            if !b.free.is_empty() {
                return Err(Diagnostic::new(
                    "E-FREE-INDEX",
                    *p,
                    "a divisor may not carry free index letters".into(),
                ));
            }
            product_letters(a.free.iter().cloned().collect(), &[a, b], pos)
        }
        Expr::Pow(base, _, p) => {
            let a = analyze(base, pos)?;
            if !a.free.is_empty() {
                return Err(Diagnostic::new(
                    "E-FREE-INDEX",
                    *p,
                    "a power base may not carry free index letters".into(),
                ));
            }
            Ok(a)
        }
    }
}

fn join(s: &BTreeSet<String>) -> String {
    s.iter().cloned().collect::<Vec<_>>().join(",")
}

fn product_letters(occ: Vec<String>, kids: &[Letters], pos: Pos) -> Result<Letters, Diagnostic> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in occ {
        *counts.entry(l).or_default() += 1;
    }
    let mut out = Letters::default();
    for k in kids {
        out.bound.extend(k.bound.iter().cloned());
    }
    for (l, c) in counts {
        if c > 2 || out.bound.contains(&l) {
            return Err(Diagnostic::new(
                "E-IDX-ARITY",
                pos,
                format!("index letter `{l}` appears more than twice"),
            ));
        }
        if c == 1 {
            out.free.insert(l);
        } else {
            out.bound.insert(l);
        }
    }
    Ok(out)
}

/// Letters summed directly at a product-like node.
pub fn summed_here(e: &Expr) -> Vec<String> {
    let free = |x: &Expr| {
        analyze(x, Pos::default())
            .map(|a| a.free.into_iter().collect::<Vec<_>>())
            .unwrap_or_default()
    };
    let occ: Vec<String> = match e {
        Expr::Sym { comps, .. } => letters_of(comps).cloned().collect(),
        Expr::Eps(l, _) => letters_of(l).cloned().collect(),
        Expr::Delta(a, b) => letters_of(&[a.clone(), b.clone()]).cloned().collect(),
        Expr::D(dirs, inner) => {
            let mut v: Vec<String> = letters_of(dirs).cloned().collect();
            v.extend(free(inner));
            v
        }
        Expr::Product(fs) => fs.iter().flat_map(free).collect(),
        _ => Vec::new(),
    };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for l in occ {
        *counts.entry(l).or_default() += 1;
    }
    counts
        .into_iter()
        .filter(|(_, c)| *c == 2)
        .map(|(l, _)| l)
        .collect()
}
