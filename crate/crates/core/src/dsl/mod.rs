//! Text format for models: declarations, a Lagrangian and generator
//! families written in index notation with implicit summation.
//!
//! ```text
//! dim 3
//! field A
//! field B[2 antisym]
//! L = 1/6*A*eps[m,a,b]*d[m](B[a,b])
//! stage 0: D0[a] antisym = d[m](sbar(B)[m,a])
//! stage 1: D1[] antisym = d[m](cbar(D0)[m])
//! option jet-order 1
//! ```
//!
//! A line that does not start with a statement keyword continues the
//! previous statement. `#` starts a comment.

mod expand;
mod lexer;
mod parser;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::algebra::{GradedPoly, Index, IndexBlock, Parity};
use crate::error::Error;
use crate::model::{ModelBuilder, ModelSpec};

pub use parser::{Expr, Idx, SymHead};
pub use render::render_model;

use expand::Expander;
use lexer::{lex_line, Token};
use parser::{analyze, Cursor, RESERVED};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

/// A positioned error with a stable code such as `E-SYNTAX`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &'static str, pos: Pos, message: String) -> Self {
        Diagnostic { code, pos, message }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.pos.line, self.pos.column, self.code, self.message
        )
    }
}

impl std::error::Error for Diagnostic {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub parity: Parity,
    pub block: IndexBlock,
    pub pos: Pos,
}

/// One `NAME[idx] = expr` clause of a `stage` statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorClause {
    pub stage: u32,
    pub name: String,
    pub head: Vec<Idx>,
    pub antisym: bool,
    pub body: Expr,
    pub pos: Pos,
}

/// Window and stage settings a model file may carry.
pub const OPTION_KEYS: &[&str] = &["jet-order", "poly-degree", "sector", "stage"];

/// A syntactically valid model file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub dimension: usize,
    pub fields: Vec<FieldDecl>,
    pub lagrangian: Option<(Expr, Pos)>,
    pub generators: Vec<GeneratorClause>,
    pub options: BTreeMap<String, i64>,
}

const KEYWORDS: &[&str] = &["dim", "field", "odd-field", "stage", "option"];

fn is_statement_start(line: &str) -> bool {
    let t = line.trim_start();
    let word = t.split(|c: char| c.is_whitespace()).next().unwrap_or("");
    if KEYWORDS.contains(&word) {
        return true;
    }
    t.strip_prefix('L')
        .is_some_and(|rest| rest.trim_start().starts_with('='))
}

struct Statement {
    keyword: String,
    pos: Pos,
    tokens: Vec<Token>,
    /// Raw text after the keyword, for `option`.
    raw: String,
    end: Pos,
}

fn split_statements(text: &str) -> (Vec<Statement>, Vec<Diagnostic>) {
    let mut out: Vec<Statement> = Vec::new();
    let mut diags = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let ln = ln + 1;
        let content = line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let (rest, col0) = if is_statement_start(content) {
            let t = content.trim_start();
            let kw_len = if t.starts_with('L') {
                1
            } else {
                t.find(char::is_whitespace).unwrap_or(t.len())
            };
            out.push(Statement {
                keyword: t[..kw_len].to_string(),
                pos: Pos {
                    line: ln,
                    column: indent + 1,
                },
                tokens: Vec::new(),
                raw: String::new(),
                end: Pos::default(),
            });
            (&t[kw_len..], indent + kw_len + 1)
        } else if out.is_empty() {
            diags.push(Diagnostic::new(
                "E-SYNTAX",
                Pos {
                    line: ln,
                    column: indent + 1,
                },
                "expected a statement keyword (dim, field, odd-field, L, stage, option)".into(),
            ));
            continue;
        } else {
            (content, 1)
        };
        let st = out.last_mut().unwrap();
        st.raw.push(' ');
        st.raw.push_str(rest);
        st.end = Pos {
            line: ln,
            column: col0 + rest.chars().count(),
        };
        match lex_line(rest, ln, col0) {
            Ok(t) => st.tokens.extend(t),
            Err(d) => diags.push(d),
        }
    }
    (out, diags)
}

fn check_name(name: &str, pos: Pos) -> Result<(), Diagnostic> {
    if RESERVED.contains(&name) {
        return Err(Diagnostic::new(
            "E-SYNTAX",
            pos,
            format!("`{name}` is reserved"),
        ));
    }
    Ok(())
}

fn finish_statement(c: &Cursor) -> Result<(), Diagnostic> {
    if c.at_end() {
        Ok(())
    } else {
        Err(c.unexpected("end of statement"))
    }
}

/// Parses a model file into a document, or every diagnostic found.
pub fn parse_model(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let (statements, mut diags) = split_statements(text);
    if statements.is_empty() && diags.is_empty() {
        return Err(vec![Diagnostic::new(
            "E-EMPTY",
            Pos { line: 1, column: 1 },
            "the model file is empty".into(),
        )]);
    }
    let mut dimension: Option<usize> = None;
    let mut fields: Vec<FieldDecl> = Vec::new();
    let mut lagrangian: Option<(Expr, Pos)> = None;
    let mut generators: Vec<GeneratorClause> = Vec::new();
    let mut options = BTreeMap::new();
    let mut seen_fields = BTreeSet::new();

    for st in &statements {
        let mut c = Cursor::new(&st.tokens, st.end);
        let r: Result<(), Diagnostic> = (|| {
            match st.keyword.as_str() {
                "dim" => {
                    let pos = c.pos();
                    let n = c.small_int()? as usize;
                    finish_statement(&c)?;
                    if dimension.is_some() {
                        return Err(Diagnostic::new(
                            "E-DUP-DECL",
                            st.pos,
                            "`dim` given twice".into(),
                        ));
                    }
                    if !(1..=255).contains(&n) {
                        return Err(Diagnostic::new(
                            "E-RANGE",
                            pos,
                            format!("dimension must be between 1 and 255, got {n}"),
                        ));
                    }
                    dimension = Some(n);
                }
                "field" | "odd-field" => {
                    let pos = c.pos();
                    let name = c.name()?;
                    check_name(&name, pos)?;
                    let mut block = IndexBlock::scalar();
                    if c.eat('[') {
                        let arity = c.small_int()? as usize;
                        block = if c.eat_word("antisym") {
                            IndexBlock::antisymmetric(arity)
                        } else {
                            IndexBlock::plain(arity)
                        };
                        c.expect(']')?;
                    }
                    finish_statement(&c)?;
                    if !seen_fields.insert(name.clone()) {
                        return Err(Diagnostic::new(
                            "E-DUP-DECL",
                            pos,
                            format!("field `{name}` declared twice"),
                        ));
                    }
                    let parity = Parity::from_odd(st.keyword == "odd-field");
                    fields.push(FieldDecl {
                        name,
                        parity,
                        block,
                        pos,
                    });
                }
                "L" => {
                    c.expect('=')?;
                    let e = c.expr()?;
                    finish_statement(&c)?;
                    let a = analyze(&e, st.pos)?;
                    if let Some(l) = a.free.iter().next() {
                        return Err(Diagnostic::new(
                            "E-FREE-INDEX",
                            st.pos,
                            format!("the Lagrangian has the free index letter `{l}`"),
                        ));
                    }
                    if lagrangian.is_some() {
                        return Err(Diagnostic::new(
                            "E-DUP-DECL",
                            st.pos,
                            "`L` given twice".into(),
                        ));
                    }
                    lagrangian = Some((e, st.pos));
                }
                "stage" => {
                    let stage = c.small_int()?;
                    c.expect(':')?;
                    loop {
                        generators.push(generator_clause(&mut c, stage)?);
                        if !c.eat(';') {
                            break;
                        }
                    }
                    finish_statement(&c)?;
                }
                "option" => {
                    let words: Vec<&str> = st.raw.split_whitespace().collect();
                    let [key, value] = words.as_slice() else {
                        return Err(Diagnostic::new(
                            "E-SYNTAX",
                            st.pos,
                            "expected `option KEY VALUE`".into(),
                        ));
                    };
                    if !OPTION_KEYS.contains(key) {
                        return Err(Diagnostic::new(
                            "E-OPTION",
                            st.pos,
                            format!("unknown option `{key}`; known: {}", OPTION_KEYS.join(", ")),
                        ));
                    }
                    let v: i64 = value.parse().map_err(|_| {
                        Diagnostic::new("E-OPTION", st.pos, format!("`{value}` is not an integer"))
                    })?;
                    options.insert(key.to_string(), v);
                }
                _ => unreachable!("statement keywords are filtered"),
            }
            Ok(())
        })();
        if let Err(d) = r {
            diags.push(d);
        }
    }
    if dimension.is_none() && diags.is_empty() {
        diags.push(Diagnostic::new(
            "E-SYNTAX",
            Pos { line: 1, column: 1 },
            "missing `dim` statement".into(),
        ));
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| d.pos);
        return Err(diags);
    }
    Ok(ModelDocument {
        dimension: dimension.unwrap(),
        fields,
        lagrangian,
        generators,
        options,
    })
}

fn generator_clause(c: &mut Cursor, stage: u32) -> Result<GeneratorClause, Diagnostic> {
    let pos = c.pos();
    let name = c.name()?;
    check_name(&name, pos)?;
    let head = if c.eat('[') {
        c.index_list(']')?
    } else {
        Vec::new()
    };
    let antisym = c.eat_word("antisym");
    c.expect('=')?;
    let body = c.expr()?;
    let mut head_letters = BTreeSet::new();
    for i in &head {
        if let Idx::Letter(l) = i {
            if !head_letters.insert(l.clone()) {
                return Err(Diagnostic::new(
                    "E-IDX-ARITY",
                    pos,
                    format!("index letter `{l}` repeated in the head of `{name}`"),
                ));
            }
        }
    }
    let a = analyze(&body, pos)?;
    if let Some(l) = a.free.difference(&head_letters).next() {
        return Err(Diagnostic::new(
            "E-IDX-UNKNOWN",
            pos,
            format!("free index letter `{l}` does not occur in the head of `{name}`"),
        ));
    }
    if let Some(l) = head_letters.difference(&a.free).next() {
        return Err(Diagnostic::new(
            "E-IDX-MISMATCH",
            pos,
            format!("head letter `{l}` of `{name}` is not free in its value"),
        ));
    }
    if let Some(l) = head_letters.intersection(&a.bound).next() {
        return Err(Diagnostic::new(
            "E-IDX-ARITY",
            pos,
            format!("head letter `{l}` of `{name}` is also summed in its value"),
        ));
    }
    Ok(GeneratorClause {
        stage,
        name,
        head,
        antisym,
        body,
        pos,
    })
}

fn model_error(code: &'static str, pos: Pos, e: Error) -> Diagnostic {
    let code = match e {
        Error::MissingStage(_) => "E-STAGE",
        Error::GradingMismatch(_) => "E-PARITY",
        Error::DuplicateDeclaration(_) => "E-DUP-DECL",
        Error::FreeIndexInScalar(_) => "E-FREE-INDEX",
        _ => code,
    };
    Diagnostic::new(code, pos, e.to_string())
}

struct Family {
    stage: u32,
    block: IndexBlock,
    pos: Pos,
}

impl ModelDocument {
    /// Expands every expression and assembles the model.
    pub fn build(&self) -> Result<ModelSpec, Vec<Diagnostic>> {
        self.build_inner().map_err(|d| vec![d])
    }

    fn build_inner(&self) -> Result<ModelSpec, Diagnostic> {
        let n = self.dimension;
        let start = Pos { line: 1, column: 1 };
        let mut families: BTreeMap<String, Family> = BTreeMap::new();
        for g in &self.generators {
            let block = if g.antisym {
                IndexBlock::antisymmetric(g.head.len())
            } else {
                IndexBlock::plain(g.head.len())
            };
            match families.get(&g.name) {
                None => {
                    if self.fields.iter().any(|f| f.name == g.name) {
                        return Err(Diagnostic::new(
                            "E-DUP-DECL",
                            g.pos,
                            format!("`{}` is both a field and a generator", g.name),
                        ));
                    }
                    families.insert(
                        g.name.clone(),
                        Family {
                            stage: g.stage,
                            block,
                            pos: g.pos,
                        },
                    );
                }
                Some(f) if f.stage != g.stage => {
                    return Err(Diagnostic::new(
                        "E-STAGE",
                        g.pos,
                        format!("`{}` already belongs to stage {}", g.name, f.stage),
                    ))
                }
                Some(f) if f.block != block => {
                    return Err(Diagnostic::new(
                        "E-ANTISYM",
                        g.pos,
                        format!("`{}` was declared with a different index shape", g.name),
                    ))
                }
                _ => {}
            }
        }
        let mut b = ModelBuilder::new(n).map_err(|e| model_error("E-RANGE", start, e))?;
        for f in &self.fields {
            b.field(&f.name, f.parity, f.block);
        }
        for (name, f) in &families {
            b.family(name, f.stage, f.block);
        }
        let mut draft = b
            .freeze()
            .map_err(|e| model_error("E-DUP-DECL", start, e))?;
        let mut by_stage: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for (name, f) in &families {
            by_stage.entry(f.stage).or_default().push(name.clone());
        }
        for (k, (stage, _)) in by_stage.iter().enumerate() {
            if *stage != k as u32 {
                let pos = families
                    .values()
                    .filter(|f| f.stage == *stage)
                    .map(|f| f.pos)
                    .min()
                    .unwrap();
                return Err(Diagnostic::new(
                    "E-STAGE",
                    pos,
                    format!("stage {stage} declared but stage {k} is missing"),
                ));
            }
        }

        if let Some((l, pos)) = &self.lagrangian {
            let ex = Expander {
                reg: draft.registry(),
                families: &by_stage,
                pos: *pos,
            };
            let v = ex.eval(l, &BTreeMap::new())?;
            draft.set_lagrangian(v);
        }

        for names in by_stage.values() {
            for name in names {
                let fam = &families[name];
                let mut comps: BTreeMap<Vec<Index>, (GradedPoly, Pos)> = BTreeMap::new();
                for g in self.generators.iter().filter(|g| &g.name == name) {
                    let ex = Expander {
                        reg: draft.registry(),
                        families: &by_stage,
                        pos: g.pos,
                    };
                    let letters: Vec<String> = g
                        .head
                        .iter()
                        .filter_map(|i| match i {
                            Idx::Letter(l) => Some(l.clone()),
                            Idx::Fixed(_) => None,
                        })
                        .collect();
                    for assignment in assignments(letters.len(), n) {
                        let env: BTreeMap<String, Index> = letters
                            .iter()
                            .cloned()
                            .zip(assignment.iter().copied())
                            .collect();
                        let mut tuple = Vec::new();
                        for i in &g.head {
                            tuple.push(match i {
                                Idx::Letter(l) => env[l],
                                Idx::Fixed(v) if (*v as usize) < n => *v as Index,
                                Idx::Fixed(v) => {
                                    return Err(Diagnostic::new(
                                        "E-RANGE",
                                        g.pos,
                                        format!("index {v} out of range for dimension {n}"),
                                    ))
                                }
                            });
                        }
                        let value = ex.eval(&g.body, &env)?;
                        record_component(name, fam.block, tuple, value, g.pos, &mut comps)?;
                    }
                }
                let list = comps.into_iter().map(|(c, (v, _))| (c, v)).collect();
                draft
                    .set_generator(name, list)
                    .map_err(|e| model_error("E-MODEL", fam.pos, e))?;
            }
        }
        let lpos = self.lagrangian.as_ref().map_or(start, |(_, p)| *p);
        draft.finish().map_err(|e| {
            let pos = match &e {
                Error::InvalidModel(m) if m.contains("Lagrangian") => lpos,
                Error::UnsupportedCorrection(name) | Error::UnknownVariable(name) => {
                    families.get(name).map_or(start, |f| f.pos)
                }
                _ => start,
            };
            model_error("E-MODEL", pos, e)
        })
    }
}

/// Stores one expanded component under its canonical tuple, checking
/// antisymmetry against components already seen.
fn record_component(
    name: &str,
    block: IndexBlock,
    tuple: Vec<Index>,
    value: GradedPoly,
    pos: Pos,
    comps: &mut BTreeMap<Vec<Index>, (GradedPoly, Pos)>,
) -> Result<(), Diagnostic> {
    let Some((neg, canon)) = block.canonicalize(&tuple) else {
        if value.is_zero() {
            return Ok(());
        }
        return Err(Diagnostic::new(
            "E-ANTISYM",
            pos,
            format!("`{name}` is nonzero on the repeated index tuple {tuple:?}"),
        ));
    };
    let value = if neg { -value } else { value };
    match comps.get(canon.as_slice()) {
        None => {
            comps.insert(canon.to_vec(), (value, pos));
            Ok(())
        }
        Some((prev, p)) if *p == pos => {
            if *prev == value {
                Ok(())
            } else {
                Err(Diagnostic::new(
                    "E-ANTISYM",
                    pos,
                    format!("`{name}` is not antisymmetric at {tuple:?}"),
                ))
            }
        }
        Some(_) => Err(Diagnostic::new(
            "E-DUP-DECL",
            pos,
            format!(
                "component {:?} of `{name}` is given twice",
                canon.as_slice()
            ),
        )),
    }
}

fn assignments(k: usize, n: usize) -> Vec<Vec<Index>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n as Index).map(move |i| {
                    let mut b = a.clone();
                    b.push(i);
                    b
                })
            })
            .collect();
    }
    out
}

/// A model together with the options written in its file.
#[derive(Clone, Debug)]
pub struct LoadedModel {
    pub model: ModelSpec,
    pub options: BTreeMap<String, i64>,
}

/// Parses and builds in one step.
pub fn load_model(text: &str) -> Result<LoadedModel, Vec<Diagnostic>> {
    let doc = parse_model(text)?;
    Ok(LoadedModel {
        model: doc.build()?,
        options: doc.options,
    })
}

/// Expands a single scalar expression against a model's symbols.
pub fn expand_expression(m: &ModelSpec, text: &str) -> Result<GradedPoly, Diagnostic> {
    let end = Pos {
        line: 1,
        column: text.chars().count() + 1,
    };
    let toks = lex_line(text, 1, 1)?;
    let mut c = Cursor::new(&toks, end);
    let e = c.expr()?;
    if !c.at_end() {
        return Err(c.unexpected("end of expression"));
    }
    let start = Pos { line: 1, column: 1 };
    let a = analyze(&e, start)?;
    if let Some(l) = a.free.iter().next() {
        return Err(model_error(
            "E-FREE-INDEX",
            start,
            Error::FreeIndexInScalar(l.clone()),
        ));
    }
    let mut by_stage: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    for g in m.generators() {
        by_stage
            .entry(g.stage())
            .or_default()
            .push(g.name().to_string());
    }
    Expander {
        reg: m.registry(),
        families: &by_stage,
        pos: start,
    }
    .eval(&e, &BTreeMap::new())
}
