//! Canonical graded-commutative polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::symbol::{Index, JetSymbol, Parity, Registry, VarId};
use crate::error::Result;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Factor list in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<JetSymbol>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// Sorts arbitrary factors into canonical order. Returns the Koszul sign
    /// (`true` = negative), or `None` when an odd factor repeats.
    pub fn from_factors(mut factors: Vec<JetSymbol>) -> Option<(bool, Monomial)> {
        let negative = sort_with_sign(&mut factors)?;
        Some((negative, Monomial(factors)))
    }

    pub fn factors(&self) -> &[JetSymbol] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::from_odd(odd_count(&self.0) % 2 == 1)
    }

    pub fn jet_order(&self) -> usize {
        self.0.iter().map(|s| s.jet_order()).max().unwrap_or(0)
    }

    /// Product of two canonical monomials with its Koszul sign.
    pub fn mul(&self, other: &Monomial) -> Option<(bool, Monomial)> {
        let (a, b) = (&self.0, &other.0);
        let mut negative = false;
        let mut out = Vec::with_capacity(a.len() + b.len());
        let mut i = 0;
        // odd factors of `a` not yet emitted
        let mut odd_left = odd_count(a);
        for y in b {
            while i < a.len() && a[i] <= *y {
                if a[i] == *y && y.is_odd() {
                    return None;
                }
                if a[i].is_odd() {
                    odd_left -= 1;
                }
                out.push(a[i].clone());
                i += 1;
            }
            if y.is_odd() && odd_left % 2 == 1 {
                negative = !negative;
            }
            out.push(y.clone());
        }
        out.extend_from_slice(&a[i..]);
        Some((negative, Monomial(out)))
    }
}

fn odd_count(f: &[JetSymbol]) -> usize {
    f.iter().filter(|s| s.is_odd()).count()
}

fn sort_with_sign(f: &mut [JetSymbol]) -> Option<bool> {
    let mut negative = false;
    for i in 1..f.len() {
        let mut j = i;
        while j > 0 && f[j - 1] > f[j] {
            if f[j - 1].is_odd() && f[j].is_odd() {
                negative = !negative;
            }
            f.swap(j - 1, j);
            j -= 1;
        }
    }
    if f.windows(2).any(|w| w[0] == w[1] && w[0].is_odd()) {
        return None;
    }
    Some(negative)
}

/// Gradings of a homogeneous polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grading {
    pub parity: Parity,
    pub antifield_number: u32,
    pub ghost_number: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradingReport {
    /// The zero polynomial is homogeneous of every grading.
    Zero,
    Homogeneous(Grading),
    Inhomogeneous,
}

/// A polynomial in canonical form: sorted monomials, no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GradedPoly {
    terms: BTreeMap<Monomial, Q>,
}

/// A jet symbol given by name, for [`normalize`].
#[derive(Clone, Debug)]
pub struct RawSymbol {
    pub name: String,
    pub components: Vec<Index>,
    pub derivative: Vec<Index>,
}

impl RawSymbol {
    pub fn new(name: &str, components: &[Index], derivative: &[Index]) -> Self {
        RawSymbol {
            name: name.to_string(),
            components: components.to_vec(),
            derivative: derivative.to_vec(),
        }
    }
}

/// Brings a list of named, unordered terms into canonical form.
pub fn normalize(reg: &Registry, raw: &[(Q, Vec<RawSymbol>)]) -> Result<GradedPoly> {
    let mut out = GradedPoly::zero();
    'terms: for (c, syms) in raw {
        let mut coef = c.clone();
        let mut factors = Vec::with_capacity(syms.len());
        for s in syms {
            match reg.symbol_by_name(&s.name, &s.components, &s.derivative)? {
                Some((neg, sym)) => {
                    if neg {
                        coef = -coef;
                    }
                    factors.push(sym);
                }
                None => continue 'terms,
            }
        }
        out.add_raw(coef, factors);
    }
    Ok(out)
}

impl GradedPoly {
    pub fn zero() -> Self {
        GradedPoly::default()
    }

    pub fn one() -> Self {
        GradedPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        let mut p = GradedPoly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn from_symbol(s: JetSymbol) -> Self {
        let mut p = GradedPoly::zero();
        p.add_term(Monomial(vec![s]), Q::one());
        p
    }

    pub fn from_term(c: Q, m: Monomial) -> Self {
        let mut p = GradedPoly::zero();
        p.add_term(m, c);
        p
    }

    /// Canonical polynomial from unordered terms.
    pub fn from_raw<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = (Q, Vec<JetSymbol>)>,
    {
        let mut p = GradedPoly::zero();
        for (c, f) in raw {
            p.add_raw(c, f);
        }
        p
    }

    pub fn add_raw(&mut self, c: Q, factors: Vec<JetSymbol>) {
        if let Some((neg, m)) = Monomial::from_factors(factors) {
            self.add_term(m, if neg { -c } else { c });
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += c · p`.
    pub fn add_scaled(&mut self, p: &GradedPoly, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (m, k) in &p.terms {
            self.add_term(m.clone(), k * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Q)> {
        self.terms.into_iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    /// The value when the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> GradedPoly {
        let mut out = GradedPoly::zero();
        out.add_scaled(self, c);
        out
    }

    pub fn max_jet_order(&self) -> usize {
        self.terms.keys().map(|m| m.jet_order()).max().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<JetSymbol> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().cloned())
            .collect()
    }

    /// Zero-order versions of every symbol that occurs.
    pub fn base_symbols(&self) -> BTreeSet<JetSymbol> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|s| s.base()))
            .collect()
    }

    pub fn mentions(&self, var: VarId) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.iter().any(|s| s.var() == var))
    }

    /// Parity when every monomial agrees; `None` for zero or mixed parity.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity());
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    pub fn grading_of(&self, reg: &Registry) -> GradingReport {
        let mut seen: Option<Grading> = None;
        for m in self.terms.keys() {
            let mut g = Grading {
                parity: Parity::Even,
                antifield_number: 0,
                ghost_number: 0,
            };
            for s in &m.0 {
                let d = reg.decl(s.var());
                g.parity = g.parity + s.parity();
                g.antifield_number += d.antifield_number;
                g.ghost_number += d.ghost_number;
            }
            match seen {
                None => seen = Some(g),
                Some(prev) if prev != g => return GradingReport::Inhomogeneous,
                _ => {}
            }
        }
        seen.map_or(GradingReport::Zero, GradingReport::Homogeneous)
    }

    /// Applies `f` to each monomial and sums the results with coefficients.
    pub fn map_monomials<F>(&self, mut f: F) -> GradedPoly
    where
        F: FnMut(&Monomial) -> GradedPoly,
    {
        let mut out = GradedPoly::zero();
        for (m, c) in &self.terms {
            out.add_scaled(&f(m), c);
        }
        out
    }

    /// Canonical text: `coef*f1*f2 + ...`, with `^k` for repeated even factors.
    pub fn render(&self, reg: &Registry) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let a = c.abs();
            let mut parts: Vec<String> = Vec::new();
            if m.is_one() || !a.is_one() {
                parts.push(a.to_string());
            }
            let f = &m.0;
            let mut j = 0;
            while j < f.len() {
                let mut k = j + 1;
                while k < f.len() && f[k] == f[j] {
                    k += 1;
                }
                let name = reg.render_symbol(&f[j]);
                if k - j > 1 {
                    parts.push(format!("{}^{}", name, k - j));
                } else {
                    parts.push(name);
                }
                j = k;
            }
            out.push_str(&parts.join("*"));
        }
        out
    }
}

impl Add for &GradedPoly {
    type Output = GradedPoly;
    fn add(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &Q::one());
        out
    }
}

impl Add for GradedPoly {
    type Output = GradedPoly;
    fn add(mut self, rhs: GradedPoly) -> GradedPoly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Sub for &GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Q::one());
        out
    }
}

impl Sub for GradedPoly {
    type Output = GradedPoly;
    fn sub(self, rhs: GradedPoly) -> GradedPoly {
        &self - &rhs
    }
}

impl Neg for &GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        self.scale(&-Q::one())
    }
}

impl Neg for GradedPoly {
    type Output = GradedPoly;
    fn neg(self) -> GradedPoly {
        -&self
    }
}

impl Mul for &GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: &GradedPoly) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if let Some((neg, m)) = ma.mul(mb) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }
}

impl Mul for GradedPoly {
    type Output = GradedPoly;
    fn mul(self, rhs: GradedPoly) -> GradedPoly {
        &self * &rhs
    }
}

/// Graded product; same as `&a * &b`.
pub fn graded_mul(a: &GradedPoly, b: &GradedPoly) -> GradedPoly {
    a * b
}
