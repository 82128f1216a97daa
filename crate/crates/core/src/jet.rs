//! Density-level operators of the variational bicomplex.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::One;

use crate::algebra::{
    GradedPoly, Index, JetSymbol, Monomial, MultiIndex, Parity, Registry, VarKind, Q,
};
use crate::error::{Error, Result};

/// A horizontal density `P ω`; the volume form stays implicit.
pub type Density = GradedPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

fn odd_parity(f: &[JetSymbol]) -> bool {
    f.iter().filter(|s| s.is_odd()).count() % 2 == 1
}

/// Graded partial derivative with respect to one jet symbol.
pub fn partial_derivative(f: &GradedPoly, x: &JetSymbol, side: Side) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for (m, c) in f.terms() {
        let fs = m.factors();
        let Some(i) = fs.iter().position(|s| s == x) else {
            continue;
        };
        if x.is_odd() {
            let sign = match side {
                Side::Left => odd_parity(&fs[..i]),
                Side::Right => odd_parity(&fs[i + 1..]),
            };
            let mut rest = fs.to_vec();
            rest.remove(i);
            out.add_raw(if sign { -c.clone() } else { c.clone() }, rest);
        } else {
            let k = fs[i..].iter().take_while(|s| *s == x).count();
            let mut rest = fs.to_vec();
            rest.remove(i);
            out.add_raw(c * Q::from_integer(BigInt::from(k)), rest);
        }
    }
    out
}

/// `d_λ` without range checking.
pub(crate) fn d(f: &GradedPoly, lambda: Index) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for (m, c) in f.terms() {
        let fs = m.factors();
        for i in 0..fs.len() {
            let mut g = fs.to_vec();
            g[i] = g[i].raised(lambda);
            out.add_raw(c.clone(), g);
        }
    }
    out
}

pub(crate) fn d_multi(f: &GradedPoly, lambda: &MultiIndex) -> GradedPoly {
    let mut out = f.clone();
    for &l in lambda.entries() {
        if out.is_zero() {
            break;
        }
        out = d(&out, l);
    }
    out
}

fn check_index(reg: &Registry, lambda: Index) -> Result<()> {
    if (lambda as usize) < reg.n() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: lambda as usize,
            n: reg.n(),
        })
    }
}

/// Total derivative `d_λ`.
pub fn total_derivative(reg: &Registry, f: &GradedPoly, lambda: Index) -> Result<GradedPoly> {
    check_index(reg, lambda)?;
    Ok(d(f, lambda))
}

/// `d_Λ = d_{λ1} ⋯ d_{λk}`.
pub fn multi_total_derivative(
    reg: &Registry,
    f: &GradedPoly,
    lambda: &MultiIndex,
) -> Result<GradedPoly> {
    for &l in lambda.entries() {
        check_index(reg, l)?;
    }
    Ok(d_multi(f, lambda))
}

/// `Σ_Λ (−1)^{|Λ|} d_Λ(∂^Λ P)` for a zero-order target symbol.
pub fn variational_derivative(p: &GradedPoly, target: &JetSymbol, side: Side) -> GradedPoly {
    let base = target.base();
    let mut derivs: Vec<MultiIndex> = p
        .symbols()
        .into_iter()
        .filter(|s| s.same_base(&base))
        .map(|s| s.derivative().clone())
        .collect();
    derivs.dedup();
    let mut out = GradedPoly::zero();
    for lam in derivs {
        let part = partial_derivative(p, &base.with_derivative(lam.clone()), side);
        let term = d_multi(&part, &lam);
        let sign = if lam.order() % 2 == 1 {
            -Q::one()
        } else {
            Q::one()
        };
        out.add_scaled(&term, &sign);
    }
    out
}

/// Euler–Lagrange expressions for every component of every dynamical field.
pub fn euler_lagrange(reg: &Registry, l: &Density) -> BTreeMap<JetSymbol, GradedPoly> {
    reg.base_symbols_of_kind(VarKind::Field)
        .into_iter()
        .map(|a| {
            let e = variational_derivative(l, &a, Side::Left);
            (a, e)
        })
        .collect()
}

/// Density is a total divergence iff every variational derivative vanishes.
pub fn is_dh_exact(p: &Density) -> bool {
    p.base_symbols()
        .iter()
        .all(|s| variational_derivative(p, s, Side::Left).is_zero())
}

/// Finitely supported family `Λ ↦ f^Λ`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoefficientFamily(BTreeMap<MultiIndex, GradedPoly>);

impl CoefficientFamily {
    pub fn new() -> Self {
        CoefficientFamily::default()
    }

    pub fn insert(&mut self, lambda: MultiIndex, f: GradedPoly) {
        if f.is_zero() {
            self.0.remove(&lambda);
        } else {
            self.0.insert(lambda, f);
        }
    }

    pub fn add(&mut self, lambda: MultiIndex, f: &GradedPoly) {
        let cur = self.0.remove(&lambda).unwrap_or_default();
        self.insert(lambda, &cur + f);
    }

    pub fn get(&self, lambda: &MultiIndex) -> Option<&GradedPoly> {
        self.0.get(lambda)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &GradedPoly)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_order(&self) -> usize {
        self.0.keys().map(|k| k.order()).max().unwrap_or(0)
    }
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// The integration-by-parts involution on coefficient families, over
/// multiset indices: `η(f)^Λ = Σ_Σ (−1)^{|Σ+Λ|} Π_λ C(m_λ(Σ+Λ), m_λ(Σ)) d_Σ f^{Σ+Λ}`.
pub fn eta(f: &CoefficientFamily) -> CoefficientFamily {
    let mut acc: BTreeMap<MultiIndex, GradedPoly> = BTreeMap::new();
    for (m, g) in f.iter() {
        let mult = m.multiplicities();
        for lam in m.sub_multisets() {
            let sigma = m.difference(&lam).expect("sub-multiset");
            let smult = sigma.multiplicities();
            let mut coef = BigInt::one();
            for (dir, total) in &mult {
                let k = smult.iter().find(|(x, _)| x == dir).map_or(0, |(_, k)| *k);
                coef *= binomial(*total, k);
            }
            if m.order() % 2 == 1 {
                coef = -coef;
            }
            let term = d_multi(g, &sigma);
            acc.entry(lam)
                .or_default()
                .add_scaled(&term, &Q::from_integer(coef));
        }
    }
    let mut out = CoefficientFamily::new();
    for (k, v) in acc {
        out.insert(k, v);
    }
    out
}

/// Vertical graded derivation given by its values on zero-order symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerticalDerivation {
    parity: Parity,
    side: Side,
    components: BTreeMap<JetSymbol, GradedPoly>,
    antifield_shift: i32,
    ghost_shift: i32,
}

impl VerticalDerivation {
    pub fn new(parity: Parity, side: Side) -> Self {
        VerticalDerivation {
            parity,
            side,
            components: BTreeMap::new(),
            antifield_shift: 0,
            ghost_shift: 0,
        }
    }

    pub fn with_shifts(mut self, antifield_shift: i32, ghost_shift: i32) -> Self {
        self.antifield_shift = antifield_shift;
        self.ghost_shift = ghost_shift;
        self
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn antifield_shift(&self) -> i32 {
        self.antifield_shift
    }

    pub fn ghost_shift(&self) -> i32 {
        self.ghost_shift
    }

    /// Sets `υ(target) = value`. Zero values are not stored.
    pub fn set_component(&mut self, target: JetSymbol, value: GradedPoly) -> Result<()> {
        if target.jet_order() != 0 {
            return Err(Error::GradingMismatch(
                "derivation components live on zero-order symbols".into(),
            ));
        }
        if value.is_zero() {
            self.components.remove(&target);
            return Ok(());
        }
        let expected = self.parity + target.parity();
        match value.parity() {
            Some(p) if p == expected => {}
            _ => {
                return Err(Error::GradingMismatch(format!(
                    "component parity must be {expected}"
                )))
            }
        }
        self.components.insert(target, value);
        Ok(())
    }

    pub fn component(&self, target: &JetSymbol) -> Option<&GradedPoly> {
        self.components.get(target)
    }

    pub fn components(&self) -> impl Iterator<Item = (&JetSymbol, &GradedPoly)> {
        self.components.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Caching evaluator for the prolonged action.
    pub fn prolonged(&self) -> Prolongation<'_> {
        Prolongation {
            der: self,
            cache: HashMap::new(),
        }
    }

    pub fn apply(&self, p: &GradedPoly) -> GradedPoly {
        self.prolonged().apply(p)
    }
}

pub struct Prolongation<'a> {
    der: &'a VerticalDerivation,
    cache: HashMap<JetSymbol, GradedPoly>,
}

impl Prolongation<'_> {
    /// `d_Λ υ^A` for the symbol `s^A_Λ`.
    fn value(&mut self, s: &JetSymbol) -> Option<GradedPoly> {
        let base = s.base();
        let root = self.der.components.get(&base)?;
        if s.jet_order() == 0 {
            return Some(root.clone());
        }
        if let Some(v) = self.cache.get(s) {
            return Some(v.clone());
        }
        let entries = s.derivative().entries();
        let last = entries[entries.len() - 1];
        let lower = s.with_derivative(MultiIndex::new(&entries[..entries.len() - 1]));
        let v = d(&self.value(&lower)?, last);
        self.cache.insert(s.clone(), v.clone());
        Some(v)
    }

    pub fn apply(&mut self, p: &GradedPoly) -> GradedPoly {
        let odd = self.der.parity.is_odd();
        let side = self.der.side;
        let mut out = GradedPoly::zero();
        for (m, c) in p.terms() {
            let fs = m.factors();
            for i in 0..fs.len() {
                // repeated even factors are handled once per occurrence
                let Some(v) = self.value(&fs[i]) else {
                    continue;
                };
                let negative = odd
                    && match side {
                        Side::Left => odd_parity(&fs[..i]),
                        Side::Right => odd_parity(&fs[i + 1..]),
                    };
                for (vm, vc) in v.terms() {
                    let mut g = Vec::with_capacity(fs.len() + vm.degree());
                    g.extend_from_slice(&fs[..i]);
                    g.extend_from_slice(vm.factors());
                    g.extend_from_slice(&fs[i + 1..]);
                    let k = c * vc;
                    out.add_raw(if negative { -k } else { k }, g);
                }
            }
        }
        out
    }
}

/// `υ(L) − Σ_A υ^A 𝓔_A` (left) or `υ(L) − Σ_A 𝓔_A υ^A` (right); always a
/// total divergence.
pub fn first_variation_residual(l: &Density, v: &VerticalDerivation) -> Density {
    let mut out = v.apply(l);
    for (a, va) in v.components() {
        let e = variational_derivative(l, a, v.side());
        let t = match v.side() {
            Side::Left => va * &e,
            Side::Right => &e * va,
        };
        out = out - t;
    }
    out
}

/// Single-monomial helper used by tests and builders.
pub fn monomial_poly(c: Q, factors: Vec<JetSymbol>) -> GradedPoly {
    match Monomial::from_factors(factors) {
        Some((neg, m)) => GradedPoly::from_term(if neg { -c } else { c }, m),
        None => GradedPoly::zero(),
    }
}
