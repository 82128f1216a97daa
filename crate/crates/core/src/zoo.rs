//! Built-in models.

use crate::algebra::{q, q_frac, GradedPoly, Index, IndexBlock, Parity, Registry};
use crate::error::{Error, Result};
use crate::model::{field_antifield_name, generator_antifield_name, ModelBuilder, ModelSpec};

/// Sign of `seq` as a permutation of `0..n`, or 0.
pub fn levi_civita(seq: &[Index], n: usize) -> i64 {
    if seq.len() != n {
        return 0;
    }
    let mut seen = vec![false; n];
    for &x in seq {
        if x as usize >= n || seen[x as usize] {
            return 0;
        }
        seen[x as usize] = true;
    }
    let mut sign = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Name of the stage-`k` generator family of the BF model.
pub fn bf_family(k: usize) -> String {
    format!("D{k}")
}

/// `Σ_ν d_ν X[ν, J]` for an antisymmetric antifield `X`, in canonical form.
fn divergence(reg: &Registry, antifield: &str, rest: &[Index]) -> GradedPoly {
    let mut out = GradedPoly::zero();
    for nu in 0..reg.n() as Index {
        let mut comps = vec![nu];
        comps.extend_from_slice(rest);
        if let Some((neg, s)) = reg
            .symbol_by_name(antifield, &comps, &[nu])
            .expect("declared")
        {
            let c = if neg { q(-1) } else { q(1) };
            out = out + GradedPoly::from_symbol(s).scale(&c);
        }
    }
    out
}

/// Topological BF theory `L = (1/n) A ε^{μμ₁…} d_μ B_{μ₁…}` on an
/// `n`-dimensional base, with its reducible generator tower up to stage `n−2`.
pub fn bf_model(n: usize) -> Result<ModelSpec> {
    if n < 2 {
        return Err(Error::InvalidDimension { min: 2, got: n });
    }
    let mut b = ModelBuilder::new(n)?;
    b.field("A", Parity::Even, IndexBlock::scalar());
    b.field("B", Parity::Even, IndexBlock::antisymmetric(n - 1));
    for k in 0..=n - 2 {
        b.family(
            &bf_family(k),
            k as u32,
            IndexBlock::antisymmetric(n - 2 - k),
        );
    }
    let mut draft = b.freeze()?;

    let reg = draft.registry();
    let a = reg.symbol_by_name("A", &[], &[])?.expect("scalar").1;
    let mut l = GradedPoly::zero();
    for comps in IndexBlock::antisymmetric(n - 1).enumerate(n) {
        for mu in 0..n as Index {
            let mut seq = vec![mu];
            seq.extend_from_slice(&comps);
            let eps = levi_civita(&seq, n);
            if eps == 0 {
                continue;
            }
            let db = reg
                .symbol_by_name("B", &comps, &[mu])?
                .expect("increasing")
                .1;
            let term = &GradedPoly::from_symbol(a.clone()) * &GradedPoly::from_symbol(db);
            l = l + term.scale(&q_frac(eps, n as i64));
        }
    }
    draft.set_lagrangian(l);

    for k in 0..=n - 2 {
        let source = if k == 0 {
            field_antifield_name("B")
        } else {
            generator_antifield_name(&bf_family(k - 1))
        };
        let comps: Vec<(Vec<Index>, GradedPoly)> = IndexBlock::antisymmetric(n - 2 - k)
            .enumerate(n)
            .into_iter()
            .map(|j| {
                let value = divergence(draft.registry(), &source, &j);
                (j.to_vec(), value)
            })
            .collect();
        draft.set_generator(&bf_family(k), comps)?;
    }
    draft.finish()
}

/// Variationally trivial model `L = 0` with generators `Δ_A = s̄_A`, one
/// family `T_X` per field `X`.
pub fn trivial_model(n: usize, fields: &[(&str, Parity, IndexBlock)]) -> Result<ModelSpec> {
    let mut b = ModelBuilder::new(n)?;
    for (name, parity, block) in fields {
        b.field(name, *parity, *block);
        b.family(&format!("T_{name}"), 0, *block);
    }
    let mut draft = b.freeze()?;
    for (name, _, block) in fields {
        let comps: Vec<(Vec<Index>, GradedPoly)> = block
            .enumerate(n)
            .into_iter()
            .map(|c| {
                let s = draft
                    .registry()
                    .symbol_by_name(&field_antifield_name(name), &c, &[])
                    .expect("declared")
                    .expect("canonical")
                    .1;
                (c.to_vec(), GradedPoly::from_symbol(s))
            })
            .collect();
        draft.set_generator(&format!("T_{name}"), comps)?;
    }
    draft.finish()
}

/// Free massless scalar `L = ½ Σ_λ s_λ²`, no generators.
pub fn free_scalar_model(n: usize) -> Result<ModelSpec> {
    let mut b = ModelBuilder::new(n)?;
    b.field("s", Parity::Even, IndexBlock::scalar());
    let mut draft = b.freeze()?;
    let mut l = GradedPoly::zero();
    for lam in 0..n as Index {
        let s = GradedPoly::from_symbol(
            draft
                .registry()
                .symbol_by_name("s", &[], &[lam])?
                .expect("scalar")
                .1,
        );
        l = l + (&s * &s).scale(&q_frac(1, 2));
    }
    draft.set_lagrangian(l);
    draft.finish()
}

/// A zoo entry selected by name: `bf:N`, `trivial`, `trivial:N` or `scalar:N`.
pub fn by_name(name: &str) -> Result<ModelSpec> {
    let (kind, arg) = match name.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (name, None),
    };
    let dim = |default: Option<usize>| -> Result<usize> {
        match arg {
            Some(a) => a
                .parse()
                .map_err(|_| Error::InvalidModel(format!("bad dimension `{a}`"))),
            None => {
                default.ok_or_else(|| Error::InvalidModel(format!("`{kind}` needs a dimension")))
            }
        }
    };
    match kind {
        "bf" => bf_model(dim(None)?),
        "trivial" => trivial_model(dim(Some(2))?, &[("s", Parity::Even, IndexBlock::scalar())]),
        "scalar" => free_scalar_model(dim(None)?),
        _ => Err(Error::InvalidModel(format!("unknown zoo model `{name}`"))),
    }
}
