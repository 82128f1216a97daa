//! Koszul–Tate differentials, Noether identities at every stage, the
//! extended Lagrangian and the ascent operator.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::algebra::{Components, GradedPoly, JetSymbol, Monomial, MultiIndex, Parity, VarKind, Q};
use crate::error::{Error, Result};
use crate::jet::{
    d_multi, eta, is_dh_exact, variational_derivative, Density, Side, VerticalDerivation,
};
use crate::linalg::Echelon;
use crate::model::{ModelSpec, NoetherGenerator};

/// Outcome of a nilpotency check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nilpotency {
    Ok,
    /// First component `A` with `υ(υ^A) ≠ 0`, and that value.
    Witness {
        symbol: JetSymbol,
        value: GradedPoly,
    },
}

impl Nilpotency {
    pub fn is_ok(&self) -> bool {
        matches!(self, Nilpotency::Ok)
    }
}

/// Outcome of an identity check: the first failing component, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityOutcome {
    pub witness: Option<(Components, GradedPoly)>,
}

impl IdentityOutcome {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

fn check_stage(m: &ModelSpec, n: i32) -> Result<()> {
    if n < -1 {
        return Err(Error::MissingStage(n));
    }
    if n > m.max_stage() {
        return Err(Error::MissingStage(m.max_stage() + 1));
    }
    Ok(())
}

/// `δ_N`: right, odd, antifield number −1; `s̄_A ↦ 𝓔_A`, `c̄_{r_k} ↦ Δ_{r_k}`
/// for `k ≤ N`. `N = −1` gives `δ̄`.
pub fn build_stage_differential(m: &ModelSpec, n: i32) -> Result<VerticalDerivation> {
    check_stage(m, n)?;
    let mut v = VerticalDerivation::new(Parity::Odd, Side::Right).with_shifts(-1, 0);
    for (a, e) in m.euler_lagrange() {
        let sbar = m.antifield_of_field(a).expect("field antifield");
        v.set_component(sbar, e.clone())?;
    }
    for g in m.generators().iter().filter(|g| g.stage() as i32 <= n) {
        for (comps, delta) in g.components() {
            let target = m.registry().base_symbol(g.antifield(), comps);
            v.set_component(target, delta.clone())?;
        }
    }
    Ok(v)
}

/// Applies `υ` to each of its own components; nilpotent iff all vanish.
pub fn check_nilpotency(v: &VerticalDerivation) -> Result<Nilpotency> {
    if !v.parity().is_odd() {
        return Err(Error::EvenDerivation);
    }
    Ok(nilpotency_of(v))
}

fn nilpotency_of(v: &VerticalDerivation) -> Nilpotency {
    let mut pro = v.prolonged();
    for (target, comp) in v.components() {
        let value = pro.apply(comp);
        if !value.is_zero() {
            return Nilpotency::Witness {
                symbol: target.clone(),
                value,
            };
        }
    }
    Nilpotency::Ok
}

/// `Σ_{A,Λ} Δ_r^{A,Λ} d_Λ 𝓔_A = 0` for every component of a stage-0 family.
pub fn verify_noether_identity(m: &ModelSpec, g: &NoetherGenerator) -> Result<IdentityOutcome> {
    if g.stage() != 0 {
        return Err(Error::InvalidModel(format!(
            "`{}` is a stage-{} family, not stage 0",
            g.name(),
            g.stage()
        )));
    }
    for (comps, _) in g.components() {
        let parts = m.generator_parts(g, comps)?;
        let mut total = GradedPoly::zero();
        for (sbar, fam) in &parts.coefficients {
            let field = m.field_of_antifield(sbar).ok_or_else(|| {
                Error::InvalidModel("stage-0 coefficient on a non-field antifield".into())
            })?;
            let e = &m.euler_lagrange()[&field];
            for (lam, c) in fam.iter() {
                total = total + c * &d_multi(e, lam);
            }
        }
        if !total.is_zero() {
            return Ok(IdentityOutcome {
                witness: Some((comps.clone(), total)),
            });
        }
    }
    Ok(IdentityOutcome { witness: None })
}

/// Stage-`k` identity: `Σ Δ_{r_k}^{r_{k−1},Λ} d_Λ G_{r_{k−1}} + δ̄(h_{r_k}) = 0`,
/// where `G` is the part of the previous-stage generator linear in antifields.
pub fn verify_stage_identity(m: &ModelSpec, g: &NoetherGenerator) -> Result<IdentityOutcome> {
    let k = g.stage();
    if k == 0 {
        return Err(Error::InvalidModel(format!(
            "`{}` is a stage-0 family; use the Noether identity check",
            g.name()
        )));
    }
    if m.generators_at(k - 1).next().is_none() {
        return Err(Error::MissingStage(k as i32 - 1));
    }
    let dbar = build_stage_differential(m, -1)?;
    let mut linear_cache: BTreeMap<JetSymbol, GradedPoly> = BTreeMap::new();
    for (comps, _) in g.components() {
        let parts = m.generator_parts(g, comps)?;
        let mut total = dbar.apply(&parts.correction);
        for (x, fam) in &parts.coefficients {
            if !linear_cache.contains_key(x) {
                let prev = m.generator_of_antifield(x.var()).ok_or_else(|| {
                    Error::InvalidModel("coefficient on an unknown antifield".into())
                })?;
                let lin = m.generator_parts(prev, x.components())?.linear_part();
                linear_cache.insert(x.clone(), lin);
            }
            let lin = &linear_cache[x];
            for (lam, c) in fam.iter() {
                total = total + c * &d_multi(lin, lam);
            }
        }
        if !total.is_zero() {
            return Ok(IdentityOutcome {
                witness: Some((comps.clone(), total)),
            });
        }
    }
    Ok(IdentityOutcome { witness: None })
}

fn ghost_symbol(m: &ModelSpec, g: &NoetherGenerator, comps: &[crate::algebra::Index]) -> JetSymbol {
    m.registry().base_symbol(g.ghost(), comps)
}

/// `L_e = L + Σ_{k ≤ N} c^{r_k} Δ_{r_k}`.
pub fn extended_lagrangian(m: &ModelSpec, n: i32) -> Result<Density> {
    check_stage(m, n)?;
    let mut out = m.lagrangian().clone();
    for g in m.generators().iter().filter(|g| g.stage() as i32 <= n) {
        for (comps, delta) in g.components() {
            let c = GradedPoly::from_symbol(ghost_symbol(m, g, comps));
            out = out + &c * delta;
        }
    }
    Ok(out)
}

/// Ascent operator `u_e`: left, odd, ghost number +1, with
/// `u^A = Σ c^r_Λ η(Δ_r^A)^Λ` on fields and
/// `u^{r_{k−1}} = Σ c^{r_k}_Λ η(Δ_{r_k}^{r_{k−1}})^Λ` on ghosts.
pub fn ascent_operator(m: &ModelSpec, n: i32) -> Result<VerticalDerivation> {
    check_stage(m, n)?;
    let reg = m.registry();
    let mut acc: BTreeMap<JetSymbol, GradedPoly> = BTreeMap::new();
    for g in m.generators().iter().filter(|g| g.stage() as i32 <= n) {
        for (comps, _) in g.components() {
            let parts = m.generator_parts(g, comps)?;
            let ghost = ghost_symbol(m, g, comps);
            for (x, fam) in &parts.coefficients {
                let target = if g.stage() == 0 {
                    m.field_of_antifield(x).expect("field antifield")
                } else {
                    let prev = m.generator_of_antifield(x.var()).expect("previous stage");
                    reg.base_symbol(prev.ghost(), x.components())
                };
                let e = eta(fam);
                let entry = acc.entry(target).or_default();
                for (lam, coef) in e.iter() {
                    let c = GradedPoly::from_symbol(ghost.with_derivative(lam.clone()));
                    *entry = &*entry + &(&c * coef);
                }
            }
        }
    }
    let mut u = VerticalDerivation::new(Parity::Odd, Side::Left).with_shifts(0, 1);
    for (t, v) in acc {
        u.set_component(t, v)?;
    }
    Ok(u)
}

/// `Σ_A u^A 𝓔_A` (or `Σ 𝓔_A u^A` for right derivations) is a total divergence.
pub fn verify_variational_supersymmetry(u: &VerticalDerivation, l: &Density) -> bool {
    let mut total = GradedPoly::zero();
    for (a, ua) in u.components() {
        let e = variational_derivative(l, a, u.side());
        total = total
            + match u.side() {
                Side::Left => ua * &e,
                Side::Right => &e * ua,
            };
    }
    is_dh_exact(&total)
}

/// Same algorithm as [`check_nilpotency`]; failure is a report, not an error.
pub fn check_ascent_nilpotency(u: &VerticalDerivation) -> Nilpotency {
    nilpotency_of(u)
}

/// Left-hand sides `Σ_Σ d_Σ u^{r} ∂/∂c^r_Σ u^X` of the on-shell relations of
/// the ascent operator, one per field or ghost component `X` of `u`.
pub fn ascent_relations(m: &ModelSpec, u: &VerticalDerivation) -> Vec<(JetSymbol, GradedPoly)> {
    let reg = m.registry();
    let mut ghost_part = VerticalDerivation::new(u.parity(), u.side());
    for (t, v) in u.components() {
        if reg.decl(t.var()).kind == VarKind::Ghost {
            ghost_part
                .set_component(t.clone(), v.clone())
                .expect("component copied from a valid derivation");
        }
    }
    let mut pro = ghost_part.prolonged();
    u.components()
        .map(|(t, v)| (t.clone(), pro.apply(v)))
        .collect()
}

/// Truncation of the shell-ideal search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShellWindow {
    pub jet_order: usize,
    pub multiplier_degree: usize,
}

impl ShellWindow {
    /// Jet order of `p` plus the highest jet order among the equations, and
    /// multiplier degree 2.
    pub fn default_for(m: &ModelSpec, p: &GradedPoly) -> Self {
        let e_order = m
            .euler_lagrange()
            .values()
            .map(|e| e.max_jet_order())
            .max()
            .unwrap_or(0);
        ShellWindow {
            jet_order: p.max_jet_order() + e_order,
            multiplier_degree: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShellReduction {
    pub residual: GradedPoly,
    pub in_ideal: bool,
    pub window: ShellWindow,
}

/// Decides whether `p` lies in the span of `q · d_Λ 𝓔_A` with multipliers `q`
/// of bounded degree over jets of bounded order. A negative answer only
/// means "not found in this window".
pub fn on_shell_reduce(
    m: &ModelSpec,
    p: &GradedPoly,
    window: Option<ShellWindow>,
) -> ShellReduction {
    let w = window.unwrap_or_else(|| ShellWindow::default_for(m, p));
    let reg = m.registry();
    let n = m.n();
    let mut bases: BTreeSet<JetSymbol> = p.base_symbols();
    for a in m.euler_lagrange().keys() {
        bases.insert(a.clone());
    }
    let jets = MultiIndex::up_to_order(n, w.jet_order);
    let pool: Vec<JetSymbol> = bases
        .iter()
        .flat_map(|b| jets.iter().map(move |l| b.with_derivative(l.clone())))
        .collect();
    let multipliers = monomials_up_to(&pool, w.multiplier_degree);

    let key = |mono: &Monomial| -> (bool, u32, i32) {
        let mut ant = 0;
        let mut gh = 0;
        for s in mono.factors() {
            let dcl = reg.decl(s.var());
            ant += dcl.antifield_number;
            gh += dcl.ghost_number;
        }
        (mono.parity().is_odd(), ant, gh)
    };
    let target_key = match p
        .terms()
        .map(|(mono, _)| key(mono))
        .collect::<BTreeSet<_>>()
    {
        s if s.len() == 1 => s.into_iter().next(),
        _ => None,
    };

    let mut spanning: Vec<GradedPoly> = Vec::new();
    for e in m.euler_lagrange().values() {
        if e.is_zero() {
            continue;
        }
        let eo = e.max_jet_order();
        if eo > w.jet_order {
            continue;
        }
        for lam in MultiIndex::up_to_order(n, w.jet_order - eo) {
            let de = d_multi(e, &lam);
            let de_key = de.terms().next().map(|(mono, _)| key(mono));
            for q in &multipliers {
                if let (Some(t), Some(dk)) = (target_key, de_key) {
                    let qk = key(q);
                    if (qk.0 ^ dk.0, qk.1 + dk.1, qk.2 + dk.2) != t {
                        continue;
                    }
                }
                let qp = GradedPoly::from_term(Q::one(), q.clone());
                let prod = &qp * &de;
                if !prod.is_zero() {
                    spanning.push(prod);
                }
            }
        }
    }

    let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut ech = Echelon::new();
    for s in &spanning {
        let v = coords(s, &mut index);
        ech.insert(&v);
    }
    let pv = coords(p, &mut index);
    let rem = ech.reduce(&pv);
    let monos: BTreeMap<usize, Monomial> = index.into_iter().map(|(mono, i)| (i, mono)).collect();
    let mut residual = GradedPoly::zero();
    for (i, c) in rem {
        residual.add_term(monos[&i].clone(), c);
    }
    ShellReduction {
        in_ideal: residual.is_zero(),
        residual,
        window: w,
    }
}

/// Monomials of degree at most `deg` in the pool, odd symbols at most once.
pub(crate) fn monomials_up_to(pool: &[JetSymbol], deg: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur: Vec<JetSymbol> = Vec::new();
    fn rec(
        pool: &[JetSymbol],
        start: usize,
        deg: usize,
        cur: &mut Vec<JetSymbol>,
        out: &mut Vec<Monomial>,
    ) {
        out.push(
            Monomial::from_factors(cur.clone())
                .expect("distinct odd factors")
                .1,
        );
        if cur.len() == deg {
            return;
        }
        for i in start..pool.len() {
            let s = &pool[i];
            cur.push(s.clone());
            let next = if s.is_odd() { i + 1 } else { i };
            rec(pool, next, deg, cur, out);
            cur.pop();
        }
    }
    let mut sorted = pool.to_vec();
    sorted.sort();
    sorted.dedup();
    rec(&sorted, 0, deg, &mut cur, &mut out);
    out
}

/// Sparse coordinates of `poly`, assigning fresh column numbers to unseen
/// monomials.
pub(crate) fn coords(poly: &GradedPoly, index: &mut BTreeMap<Monomial, usize>) -> Vec<(usize, Q)> {
    let mut v: Vec<(usize, Q)> = poly
        .terms()
        .map(|(mono, c)| {
            let next = index.len();
            (*index.entry(mono.clone()).or_insert(next), c.clone())
        })
        .collect();
    v.sort_by_key(|(i, _)| *i);
    v
}
