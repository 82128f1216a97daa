//! Shared helpers for the integration suites: a sandbox model with mixed
//! parities and seeded random polynomials over its jet symbols.
#![allow(dead_code)]

use noether_core::algebra::{
    q_frac, GradedPoly, JetSymbol, Monomial, MultiIndex, Parity, Registry, VarKind, Q,
};
use noether_core::dsl::load_model;
use noether_core::jet::{CoefficientFamily, Side, VerticalDerivation};
use noether_core::model::ModelSpec;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

/// Two even and two odd scalar fields, `L = 0`.
pub fn sandbox(n: usize) -> ModelSpec {
    let text = format!("dim {n}\nfield x\nfield y\nodd-field psi\nodd-field chi\nL = 0\n");
    load_model(&text).expect("sandbox model").model
}

/// Jet symbols of every variable of the given kinds up to `order`.
pub fn jet_pool(reg: &Registry, kinds: &[VarKind], order: usize) -> Vec<JetSymbol> {
    let jets = MultiIndex::up_to_order(reg.n(), order);
    let mut out = Vec::new();
    for (id, d) in reg.decls() {
        if !kinds.contains(&d.kind) {
            continue;
        }
        for s in reg.base_symbols(id) {
            for l in &jets {
                out.push(s.with_derivative(l.clone()));
            }
        }
    }
    out
}

pub fn random_q<R: Rng>(rng: &mut R) -> Q {
    let mut num: i64 = rng.gen_range(-9..=9);
    if num == 0 {
        num = 1;
    }
    q_frac(num, rng.gen_range(1..=4))
}

/// Random polynomial with up to `terms` monomials of degree at most `deg`.
/// With `parity` set, only monomials of that parity are kept.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    pool: &[JetSymbol],
    deg: usize,
    terms: usize,
    parity: Option<Parity>,
) -> GradedPoly {
    let mut p = GradedPoly::zero();
    let mut tries = 0;
    let mut made = 0;
    while made < terms && tries < 50 * terms.max(1) {
        tries += 1;
        let k = rng.gen_range(0..=deg);
        let factors: Vec<JetSymbol> = (0..k)
            .map(|_| pool.choose(rng).expect("nonempty pool").clone())
            .collect();
        let Some((neg, m)) = Monomial::from_factors(factors) else {
            continue;
        };
        if parity.is_some_and(|par| m.parity() != par) {
            continue;
        }
        let c = random_q(rng);
        p.add_term(m, if neg { -c } else { c });
        made += 1;
    }
    p
}

/// Random family with indices of order at most `order`.
pub fn random_family<R: Rng>(
    rng: &mut R,
    n: usize,
    pool: &[JetSymbol],
    order: usize,
    deg: usize,
) -> CoefficientFamily {
    let mut f = CoefficientFamily::new();
    let all = MultiIndex::up_to_order(n, order);
    let count = rng.gen_range(1..=4);
    for _ in 0..count {
        let lam = all.choose(rng).unwrap().clone();
        let parity = if rng.gen_bool(0.5) {
            Parity::Odd
        } else {
            Parity::Even
        };
        f.insert(lam, random_poly(rng, pool, deg, 3, Some(parity)));
    }
    f
}

/// Random vertical derivation on the zero-order field symbols, with
/// component parities fixed by the derivation's parity.
pub fn random_derivation<R: Rng>(
    rng: &mut R,
    reg: &Registry,
    pool: &[JetSymbol],
    deg: usize,
) -> VerticalDerivation {
    let parity = if rng.gen_bool(0.5) {
        Parity::Odd
    } else {
        Parity::Even
    };
    let side = if rng.gen_bool(0.5) {
        Side::Left
    } else {
        Side::Right
    };
    let mut v = VerticalDerivation::new(parity, side);
    for target in reg.base_symbols_of_kind(VarKind::Field) {
        if rng.gen_bool(0.3) {
            continue;
        }
        let want = parity + target.parity();
        let value = random_poly(rng, pool, deg, 3, Some(want));
        v.set_component(target, value)
            .expect("parity chosen to match");
    }
    v
}

/// Ways to corrupt one term of a generator component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    FlipSign,
    DropTerm,
    DoubleTerm,
    /// Raise every factor of the term by the next direction.
    RaiseDerivative,
    /// Multiply the term by the first dynamical field.
    FieldFactor,
}

pub const MUTATIONS: [Mutation; 5] = [
    Mutation::FlipSign,
    Mutation::DropTerm,
    Mutation::DoubleTerm,
    Mutation::RaiseDerivative,
    Mutation::FieldFactor,
];

fn mutate_poly(reg: &Registry, p: &GradedPoly, term: usize, kind: Mutation) -> GradedPoly {
    let mut terms: Vec<(Monomial, Q)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    let (mono, c) = terms.remove(term);
    let mut out = GradedPoly::zero();
    for (m, c) in terms {
        out.add_term(m, c);
    }
    let n = reg.n() as u8;
    let replacement = match kind {
        Mutation::FlipSign => GradedPoly::from_term(-c, mono),
        Mutation::DropTerm => GradedPoly::zero(),
        Mutation::DoubleTerm => GradedPoly::from_term(c * Q::from_integer(2.into()), mono),
        Mutation::RaiseDerivative => {
            let factors: Vec<JetSymbol> = mono
                .factors()
                .iter()
                .map(|s| {
                    let dir = s.derivative().entries().first().map_or(0, |d| (d + 1) % n);
                    s.with_derivative(MultiIndex::new(&[dir]))
                })
                .collect();
            let mut r = GradedPoly::zero();
            r.add_raw(c, factors);
            r
        }
        Mutation::FieldFactor => {
            let field = reg.base_symbols_of_kind(VarKind::Field)[0].clone();
            &GradedPoly::from_symbol(field) * &GradedPoly::from_term(c, mono)
        }
    };
    out + replacement
}

/// Rebuilds `m` with one generator component replaced.
pub fn rebuild_with(
    m: &ModelSpec,
    family: &str,
    comps: &[u8],
    value: GradedPoly,
) -> noether_core::Result<ModelSpec> {
    use noether_core::model::ModelBuilder;
    let reg = m.registry();
    let mut b = ModelBuilder::new(m.n())?;
    for (_, d) in reg.decls().filter(|(_, d)| d.kind == VarKind::Field) {
        b.field(&d.name, d.parity, d.index_block);
    }
    for g in m.generators() {
        b.family(g.name(), g.stage(), g.index_block());
    }
    let mut draft = b.freeze()?;
    draft.set_lagrangian(m.lagrangian().clone());
    for g in m.generators() {
        let list = g
            .components()
            .map(|(c, v)| {
                let v = if g.name() == family && c.as_slice() == comps {
                    value.clone()
                } else {
                    v.clone()
                };
                (c.to_vec(), v)
            })
            .collect();
        draft.set_generator(g.name(), list)?;
    }
    draft.finish()
}

/// A mutant of `m`: term `term` of component `comps` of `family`
/// corrupted by `kind`. `None` when the result is not a valid model.
pub fn mutant(
    m: &ModelSpec,
    family: &str,
    comps: &[u8],
    term: usize,
    kind: Mutation,
) -> Option<ModelSpec> {
    let g = m.generator(family)?;
    let value = g.component(comps);
    if term >= value.len() {
        return None;
    }
    let mutated = mutate_poly(m.registry(), &value, term, kind);
    rebuild_with(m, family, comps, mutated).ok()
}

/// Up to `count` distinct valid mutants, spread over every family,
/// component, term and mutation kind.
pub fn mutants(m: &ModelSpec, count: usize) -> Vec<(String, ModelSpec)> {
    let mut candidates = Vec::new();
    for kind in MUTATIONS {
        for g in m.generators() {
            for (c, v) in g.components() {
                for t in 0..v.len() {
                    candidates.push((g.name().to_string(), c.to_vec(), t, kind));
                }
            }
        }
    }
    let mut out: Vec<(String, ModelSpec)> = Vec::new();
    for (name, c, t, kind) in candidates {
        if out.len() == count {
            break;
        }
        if let Some(mm) = mutant(m, &name, &c, t, kind) {
            if mm != *m && out.iter().all(|(_, o)| *o != mm) {
                out.push((format!("{name}{c:?} term {t} {kind:?}"), mm));
            }
        }
    }
    out
}

/// Rank by dense Gaussian elimination over the rationals.
pub fn dense_rank(mut rows: Vec<Vec<Q>>) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        let prow = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = row[col].clone() / &pivot;
            for (x, y) in row.iter_mut().zip(&prow) {
                *x -= &f * y;
            }
        }
        rank += 1;
    }
    rank
}
