//! Variables, jet coordinates and the per-model symbol table.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Base-space index in `0..n`.
pub type Index = u8;

/// Component tuple of an indexed variable.
pub type Components = SmallVec<[Index; 4]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn from_odd(odd: bool) -> Self {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn flip(self) -> Self {
        Parity::from_odd(!self.is_odd())
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_odd(self.is_odd() ^ rhs.is_odd())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Field,
    Antifield,
    Ghost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    None,
    Antisymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexBlock {
    pub arity: usize,
    pub symmetry: Symmetry,
}

impl IndexBlock {
    pub fn scalar() -> Self {
        IndexBlock {
            arity: 0,
            symmetry: Symmetry::None,
        }
    }

    pub fn plain(arity: usize) -> Self {
        IndexBlock {
            arity,
            symmetry: Symmetry::None,
        }
    }

    pub fn antisymmetric(arity: usize) -> Self {
        IndexBlock {
            arity,
            symmetry: Symmetry::Antisymmetric,
        }
    }

    /// Canonical representative of a component tuple with its sign, or `None`
    /// when an antisymmetric tuple repeats an index.
    pub fn canonicalize(&self, comps: &[Index]) -> Option<(bool, Components)> {
        let mut c: Components = comps.iter().copied().collect();
        if self.symmetry == Symmetry::None {
            return Some((false, c));
        }
        let mut negative = false;
        for i in 1..c.len() {
            let mut j = i;
            while j > 0 && c[j - 1] > c[j] {
                c.swap(j - 1, j);
                negative = !negative;
                j -= 1;
            }
        }
        if c.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((negative, c))
    }

    /// All canonical component tuples over a base of dimension `n`.
    pub fn enumerate(&self, n: usize) -> Vec<Components> {
        let mut out = Vec::new();
        let mut cur = Components::new();
        fn rec(block: &IndexBlock, n: usize, cur: &mut Components, out: &mut Vec<Components>) {
            if cur.len() == block.arity {
                out.push(cur.clone());
                return;
            }
            let start = match (block.symmetry, cur.last()) {
                (Symmetry::Antisymmetric, Some(&l)) => l as usize + 1,
                _ => 0,
            };
            for i in start..n {
                cur.push(i as Index);
                rec(block, n, cur, out);
                cur.pop();
            }
        }
        rec(self, n, &mut cur, &mut out);
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedVariableDecl {
    pub name: String,
    pub kind: VarKind,
    pub parity: Parity,
    pub antifield_number: u32,
    pub ghost_number: i32,
    /// −1 for dynamical fields and their antifields.
    pub stage: i32,
    pub index_block: IndexBlock,
}

impl GradedVariableDecl {
    pub fn field(name: &str, parity: Parity, index_block: IndexBlock) -> Self {
        GradedVariableDecl {
            name: name.to_string(),
            kind: VarKind::Field,
            parity,
            antifield_number: 0,
            ghost_number: 0,
            stage: -1,
            index_block,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseSpace {
    n: usize,
}

impl BaseSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > Index::MAX as usize {
            return Err(Error::InvalidDimension { min: 1, got: n });
        }
        Ok(BaseSpace { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Symmetric derivative multi-index, stored as a sorted multiset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(SmallVec<[Index; 4]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    pub fn new(entries: &[Index]) -> Self {
        let mut v: SmallVec<[Index; 4]> = entries.iter().copied().collect();
        v.sort_unstable();
        MultiIndex(v)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[Index] {
        &self.0
    }

    pub fn raised(&self, lambda: Index) -> Self {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&x| x <= lambda);
        v.insert(pos, lambda);
        MultiIndex(v)
    }

    pub fn union(&self, other: &MultiIndex) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        MultiIndex(v)
    }

    /// `self − other` as multisets, if `other ⊆ self`.
    pub fn difference(&self, other: &MultiIndex) -> Option<Self> {
        let mut v = self.0.clone();
        for &x in other.0.iter() {
            let pos = v.iter().position(|&y| y == x)?;
            v.remove(pos);
        }
        Some(MultiIndex(v))
    }

    /// Pairs (direction, multiplicity), ascending by direction.
    pub fn multiplicities(&self) -> Vec<(Index, usize)> {
        let mut out: Vec<(Index, usize)> = Vec::new();
        for &x in self.0.iter() {
            match out.last_mut() {
                Some((d, m)) if *d == x => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// Every sub-multiset, each listed once.
    pub fn sub_multisets(&self) -> Vec<MultiIndex> {
        let mult = self.multiplicities();
        let mut out = vec![MultiIndex::empty()];
        for (d, m) in mult {
            let mut next = Vec::with_capacity(out.len() * (m + 1));
            for base in &out {
                for k in 0..=m {
                    let mut v = base.0.clone();
                    v.extend(std::iter::repeat_n(d, k));
                    next.push(MultiIndex(v));
                }
            }
            out = next;
        }
        out
    }

    /// All multisets over `0..n` of exactly `order` elements.
    pub fn all_of_order(n: usize, order: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur: SmallVec<[Index; 4]> = SmallVec::new();
        fn rec(n: usize, order: usize, cur: &mut SmallVec<[Index; 4]>, out: &mut Vec<MultiIndex>) {
            if cur.len() == order {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            let start = cur.last().map_or(0, |&l| l as usize);
            for i in start..n {
                cur.push(i as Index);
                rec(n, order, cur, out);
                cur.pop();
            }
        }
        rec(n, order, &mut cur, &mut out);
        out
    }

    /// All multisets over `0..n` of order at most `max_order`, by order.
    pub fn up_to_order(n: usize, max_order: usize) -> Vec<MultiIndex> {
        (0..=max_order)
            .flat_map(|k| MultiIndex::all_of_order(n, k))
            .collect()
    }
}

/// Position of a declaration in its registry. Ids follow the global symbol
/// order `(stage, kind, name)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u16);

/// One jet coordinate: a variable component with a derivative multi-index.
#[derive(Clone, Debug)]
pub struct JetSymbol {
    var: VarId,
    components: Components,
    derivative: MultiIndex,
    odd: bool,
}

impl JetSymbol {
    pub fn var(&self) -> VarId {
        self.var
    }

    pub fn components(&self) -> &[Index] {
        &self.components
    }

    pub fn derivative(&self) -> &MultiIndex {
        &self.derivative
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn parity(&self) -> Parity {
        Parity::from_odd(self.odd)
    }

    pub fn jet_order(&self) -> usize {
        self.derivative.order()
    }

    /// The same component with no derivatives.
    pub fn base(&self) -> JetSymbol {
        self.with_derivative(MultiIndex::empty())
    }

    pub fn with_derivative(&self, derivative: MultiIndex) -> JetSymbol {
        JetSymbol {
            var: self.var,
            components: self.components.clone(),
            derivative,
            odd: self.odd,
        }
    }

    pub fn raised(&self, lambda: Index) -> JetSymbol {
        self.with_derivative(self.derivative.raised(lambda))
    }

    /// True when both name the same variable component, ignoring derivatives.
    pub fn same_base(&self, other: &JetSymbol) -> bool {
        self.var == other.var && self.components == other.components
    }
}

impl PartialEq for JetSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var
            && self.components == other.components
            && self.derivative == other.derivative
    }
}

impl Eq for JetSymbol {}

impl Hash for JetSymbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.var.hash(state);
        self.components.hash(state);
        self.derivative.hash(state);
    }
}

impl Ord for JetSymbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.var
            .cmp(&other.var)
            .then_with(|| self.components.cmp(&other.components))
            .then_with(|| self.derivative.cmp(&other.derivative))
    }
}

impl PartialOrd for JetSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Symbol table of one model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Registry {
    base: BaseSpace,
    decls: Vec<GradedVariableDecl>,
    by_name: HashMap<String, VarId>,
}

impl Registry {
    pub fn new(base: BaseSpace, mut decls: Vec<GradedVariableDecl>) -> Result<Self> {
        decls.sort_by(|a, b| (a.stage, a.kind, &a.name).cmp(&(b.stage, b.kind, &b.name)));
        let mut by_name = HashMap::new();
        for (i, d) in decls.iter().enumerate() {
            if by_name.insert(d.name.clone(), VarId(i as u16)).is_some() {
                return Err(Error::DuplicateDeclaration(d.name.clone()));
            }
        }
        Ok(Registry {
            base,
            decls,
            by_name,
        })
    }

    pub fn base(&self) -> BaseSpace {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn decl(&self, id: VarId) -> &GradedVariableDecl {
        &self.decls[id.0 as usize]
    }

    pub fn decls(&self) -> impl Iterator<Item = (VarId, &GradedVariableDecl)> {
        self.decls
            .iter()
            .enumerate()
            .map(|(i, d)| (VarId(i as u16), d))
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub(crate) fn set_parity(&mut self, id: VarId, parity: Parity) {
        self.decls[id.0 as usize].parity = parity;
    }

    fn check_index(&self, i: Index) -> Result<()> {
        if (i as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i as usize,
                n: self.n(),
            })
        }
    }

    /// Builds the canonical symbol for `var[comps]_(deriv)`. Returns the sign
    /// picked up by reordering antisymmetric components, or `None` when the
    /// component vanishes by antisymmetry.
    pub fn symbol(
        &self,
        var: VarId,
        comps: &[Index],
        deriv: &[Index],
    ) -> Result<Option<(bool, JetSymbol)>> {
        let decl = self.decl(var);
        if comps.len() != decl.index_block.arity {
            return Err(Error::ComponentArity {
                name: decl.name.clone(),
                expected: decl.index_block.arity,
                got: comps.len(),
            });
        }
        for &i in comps.iter().chain(deriv) {
            self.check_index(i)?;
        }
        Ok(decl.index_block.canonicalize(comps).map(|(neg, c)| {
            (
                neg,
                JetSymbol {
                    var,
                    components: c,
                    derivative: MultiIndex::new(deriv),
                    odd: decl.parity.is_odd(),
                },
            )
        }))
    }

    pub fn symbol_by_name(
        &self,
        name: &str,
        comps: &[Index],
        deriv: &[Index],
    ) -> Result<Option<(bool, JetSymbol)>> {
        let id = self
            .lookup(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        self.symbol(id, comps, deriv)
    }

    /// Zero-order symbol for an already canonical component tuple.
    pub fn base_symbol(&self, var: VarId, comps: &[Index]) -> JetSymbol {
        JetSymbol {
            var,
            components: comps.iter().copied().collect(),
            derivative: MultiIndex::empty(),
            odd: self.decl(var).parity.is_odd(),
        }
    }

    /// Every zero-order symbol of a variable, one per canonical component.
    pub fn base_symbols(&self, var: VarId) -> Vec<JetSymbol> {
        self.decl(var)
            .index_block
            .enumerate(self.n())
            .into_iter()
            .map(|c| self.base_symbol(var, &c))
            .collect()
    }

    /// Zero-order symbols of every variable of the given kind.
    pub fn base_symbols_of_kind(&self, kind: VarKind) -> Vec<JetSymbol> {
        self.decls()
            .filter(|(_, d)| d.kind == kind)
            .flat_map(|(id, _)| self.base_symbols(id))
            .collect()
    }

    pub fn render_symbol(&self, s: &JetSymbol) -> String {
        let mut out = self.decl(s.var).name.clone();
        if !s.components.is_empty() {
            out.push('[');
            push_list(&mut out, &s.components);
            out.push(']');
        }
        if !s.derivative.is_empty() {
            out.push_str("_(");
            push_list(&mut out, s.derivative.entries());
            out.push(')');
        }
        out
    }
}

fn push_list(out: &mut String, items: &[Index]) {
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&x.to_string());
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_odd() { "odd" } else { "even" })
    }
}
