//! Truncated chain spaces and window-relative homology of Koszul–Tate
//! differentials over the rationals.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::algebra::{GradedPoly, GradingReport, JetSymbol, Monomial, MultiIndex, VarKind, Q};
use crate::error::{Error, Result};
use crate::jet::VerticalDerivation;
use crate::koszul::build_stage_differential;
use crate::linalg::{Echelon, SparseQ};
use crate::model::ModelSpec;

/// Finite probe of a chain space: densities of antifield number `sector`,
/// jet order at most `max_jet_order`, at most `max_poly_degree` factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationWindow {
    pub max_jet_order: usize,
    pub max_poly_degree: usize,
    pub sector: u32,
    /// Highest antifield stage allowed in the chains; `None` means every
    /// declared antifield.
    pub max_stage: Option<i32>,
}

impl TruncationWindow {
    pub fn new(max_jet_order: usize, max_poly_degree: usize, sector: u32) -> Self {
        TruncationWindow {
            max_jet_order,
            max_poly_degree,
            sector,
            max_stage: None,
        }
    }

    pub fn with_max_stage(mut self, stage: i32) -> Self {
        self.max_stage = Some(stage);
        self
    }
}

/// Monomial densities spanning the window, in canonical order.
pub fn chain_basis(m: &ModelSpec, w: &TruncationWindow) -> Vec<Monomial> {
    let reg = m.registry();
    let jets = MultiIndex::up_to_order(m.n(), w.max_jet_order);
    let mut pool: Vec<(JetSymbol, u32)> = Vec::new();
    for (id, d) in reg.decls() {
        let allowed = match d.kind {
            VarKind::Field => true,
            VarKind::Antifield => {
                d.antifield_number <= w.sector && w.max_stage.is_none_or(|s| d.stage <= s)
            }
            VarKind::Ghost => false,
        };
        if !allowed {
            continue;
        }
        for s in reg.base_symbols(id) {
            for l in &jets {
                pool.push((s.with_derivative(l.clone()), d.antifield_number));
            }
        }
    }
    pool.sort();
    let mut out = Vec::new();
    let mut cur: Vec<JetSymbol> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        pool: &[(JetSymbol, u32)],
        start: usize,
        left_deg: usize,
        left_ant: u32,
        cur: &mut Vec<JetSymbol>,
        out: &mut Vec<Monomial>,
    ) {
        if left_ant == 0 {
            out.push(
                Monomial::from_factors(cur.clone())
                    .expect("distinct odd factors")
                    .1,
            );
        }
        if left_deg == 0 {
            return;
        }
        for i in start..pool.len() {
            let (s, a) = &pool[i];
            if *a > left_ant {
                continue;
            }
            cur.push(s.clone());
            let next = if s.is_odd() { i + 1 } else { i };
            rec(pool, next, left_deg - 1, left_ant - a, cur, out);
            cur.pop();
        }
    }
    rec(&pool, 0, w.max_poly_degree, w.sector, &mut cur, &mut out);
    out.sort();
    out
}

/// Matrix of a differential on a window, column by column.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    pub source: Vec<Monomial>,
    /// Monomials occurring in the images, canonical order.
    pub target: Vec<Monomial>,
    /// Column `j` is the image of `source[j]` in `target` coordinates.
    pub columns: Vec<SparseQ>,
}

impl BoundaryMatrix {
    pub fn rank(&self) -> usize {
        crate::linalg::rank(&self.columns)
    }
}

fn images(delta: &VerticalDerivation, basis: &[Monomial]) -> Vec<GradedPoly> {
    basis
        .par_iter()
        .map_init(
            || delta.prolonged(),
            |pro, mono| {
                pro.apply(&GradedPoly::from_term(
                    Q::from_integer(1.into()),
                    mono.clone(),
                ))
            },
        )
        .collect()
}

fn check_lowering(delta: &VerticalDerivation) -> Result<()> {
    if delta.antifield_shift() != -1 {
        return Err(Error::GradingMismatch(format!(
            "boundary maps lower the antifield number by 1, this one shifts it by {}",
            delta.antifield_shift()
        )));
    }
    Ok(())
}

/// Matrix of `δ` from the sector-`k` window to the monomials its images reach.
pub fn boundary_matrix(
    delta: &VerticalDerivation,
    m: &ModelSpec,
    w: &TruncationWindow,
) -> Result<BoundaryMatrix> {
    check_lowering(delta)?;
    let source = chain_basis(m, w);
    let imgs = images(delta, &source);
    let mut target_set: BTreeSet<Monomial> = BTreeSet::new();
    for img in &imgs {
        match img.grading_of(m.registry()) {
            GradingReport::Zero => {}
            GradingReport::Homogeneous(g) if g.antifield_number + 1 == w.sector => {}
            _ => {
                return Err(Error::GradingMismatch(
                    "image does not have antifield number one less than its source".into(),
                ))
            }
        }
        target_set.extend(img.terms().map(|(mono, _)| mono.clone()));
    }
    let target: Vec<Monomial> = target_set.into_iter().collect();
    let pos: BTreeMap<&Monomial, usize> = target.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let columns = imgs
        .iter()
        .map(|img| {
            img.terms()
                .map(|(mono, c)| (pos[mono], c.clone()))
                .collect()
        })
        .collect();
    Ok(BoundaryMatrix {
        source,
        target,
        columns,
    })
}

/// Window-relative homology at one sector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyReport {
    pub sector: u32,
    pub max_jet_order: usize,
    pub max_poly_degree: usize,
    /// Chains in the sector (source of the outgoing map).
    pub source_dim: usize,
    /// Chains one sector up (source of the incoming map).
    pub upper_dim: usize,
    pub rank_out: usize,
    pub kernel_dim: usize,
    pub rank_in: usize,
    /// Dimension of the incoming image that lies inside the window.
    pub boundary_dim: usize,
    pub homology_dim: usize,
    /// Homology representatives, reduced modulo window boundaries.
    pub generators: Vec<GradedPoly>,
}

/// Highest antifield stage on which a derivation acts; −1 when it acts on
/// field antifields only.
pub fn derivation_stage(m: &ModelSpec, delta: &VerticalDerivation) -> i32 {
    delta
        .components()
        .filter_map(|(t, _)| m.antifield_stage(t.var()))
        .max()
        .unwrap_or(-1)
}

fn poly_from(coords: &SparseQ, basis: &[Monomial]) -> GradedPoly {
    let mut p = GradedPoly::zero();
    for (j, c) in coords {
        p.add_term(basis[*j].clone(), c.clone());
    }
    p
}

/// `dim H_k = dim Ker(δ_out on W_k) − dim(Im δ_in(W_{k+1}) ∩ W_k)`.
///
/// `W_k` holds antifields up to `w.max_stage` (default: the stage of
/// `δ_out`), `W_{k+1}` those up to the stage of `δ_in`.
pub fn homology_dimension(
    m: &ModelSpec,
    delta_in: &VerticalDerivation,
    delta_out: &VerticalDerivation,
    w: &TruncationWindow,
) -> Result<HomologyReport> {
    check_lowering(delta_in)?;
    check_lowering(delta_out)?;
    let src_w = TruncationWindow {
        max_stage: Some(
            w.max_stage
                .unwrap_or_else(|| derivation_stage(m, delta_out)),
        ),
        ..*w
    };
    let out = boundary_matrix(delta_out, m, &src_w)?;
    let source = &out.source;
    let kernel = crate::linalg::kernel(&out.columns);

    let up_w = TruncationWindow {
        sector: w.sector + 1,
        max_stage: Some(derivation_stage(m, delta_in)),
        ..*w
    };
    let upper = chain_basis(m, &up_w);
    let imgs = images(delta_in, &upper);
    let in_window: BTreeMap<&Monomial, usize> =
        source.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let outside: BTreeSet<&Monomial> = imgs
        .iter()
        .flat_map(|p| p.terms().map(|(mono, _)| mono))
        .filter(|mono| !in_window.contains_key(mono))
        .collect();
    let offset = outside.len();
    let outside_pos: BTreeMap<&Monomial, usize> = outside
        .into_iter()
        .enumerate()
        .map(|(i, x)| (x, i))
        .collect();
    let mut ech = Echelon::new();
    for img in &imgs {
        let mut v: SparseQ = img
            .terms()
            .map(|(mono, c)| {
                let col = match in_window.get(mono) {
                    Some(i) => offset + i,
                    None => outside_pos[mono],
                };
                (col, c.clone())
            })
            .collect();
        v.sort_by_key(|(i, _)| *i);
        ech.insert(&v);
    }
    let rank_in = ech.rank();
    let boundaries: Vec<SparseQ> = ech
        .rows()
        .filter(|(lead, _)| *lead >= offset)
        .map(|(_, r)| {
            r.iter()
                .map(|(i, c)| (i - offset, Q::from_integer(c.clone())))
                .collect()
        })
        .collect();

    for b in &boundaries {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for (j, c) in b {
            for (t, x) in &out.columns[*j] {
                *acc.entry(*t).or_default() += c * x;
            }
        }
        if acc.values().any(|x| *x != Q::default()) {
            return Err(Error::NotAComplex(format!(
                "the outgoing map does not annihilate the boundary {}",
                poly_from(b, source).render(m.registry())
            )));
        }
    }

    let mut bech = Echelon::new();
    for b in &boundaries {
        bech.insert(b);
    }
    let mut rep = Echelon::new();
    for k in &kernel {
        rep.insert(&bech.reduce(k));
    }
    let generators: Vec<GradedPoly> = rep
        .reduced_rows()
        .iter()
        .map(|r| poly_from(r, source))
        .collect();

    Ok(HomologyReport {
        sector: w.sector,
        max_jet_order: w.max_jet_order,
        max_poly_degree: w.max_poly_degree,
        source_dim: source.len(),
        upper_dim: upper.len(),
        rank_out: source.len() - kernel.len(),
        kernel_dim: kernel.len(),
        rank_in,
        boundary_dim: boundaries.len(),
        homology_dim: kernel.len() - boundaries.len(),
        generators,
    })
}

/// Homology of the differential that declared generators of stage
/// `sector − 2` should resolve: candidates for new generators at that stage.
pub fn generator_candidates(m: &ModelSpec, w: &TruncationWindow) -> Result<Vec<GradedPoly>> {
    let stage = (w.sector as i32 - 2).clamp(-1, m.max_stage());
    let delta = build_stage_differential(m, stage)?;
    Ok(homology_dimension(m, &delta, &delta, w)?.generators)
}

/// Regularity probe at level `k`: homology of `δ_k` on sector-`(k+3)` chains
/// built from antifields of stage at most `k`, modulo `δ_{k+1}`-boundaries.
/// The condition holds in the window iff the reported dimension is 0.
pub fn regularity_probe(
    m: &ModelSpec,
    k: i32,
    max_jet_order: usize,
    max_poly_degree: usize,
) -> Result<HomologyReport> {
    let lower = build_stage_differential(m, k)?;
    let upper = build_stage_differential(m, k + 1)?;
    let w = TruncationWindow::new(max_jet_order, max_poly_degree, (k + 3) as u32).with_max_stage(k);
    homology_dimension(m, &upper, &lower, &w)
}
