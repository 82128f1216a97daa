//! Model specifications: fields, Lagrangian and Noether generator towers.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{
    BaseSpace, Components, GradedPoly, GradedVariableDecl, GradingReport, IndexBlock, JetSymbol,
    Parity, Registry, VarId, VarKind,
};
use crate::error::{Error, Result};
use crate::jet::{euler_lagrange, partial_derivative, CoefficientFamily, Density, Side};

/// Name of the antifield paired with a dynamical field.
pub fn field_antifield_name(field: &str) -> String {
    format!("sbar({field})")
}

/// Name of the antifield paired with a generator family.
pub fn generator_antifield_name(family: &str) -> String {
    format!("cbar({family})")
}

/// Name of the ghost paired with a generator family.
pub fn ghost_name(family: &str) -> String {
    format!("c({family})")
}

/// One family of Noether generators `Δ_{r_k}` of a fixed stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoetherGenerator {
    name: String,
    stage: u32,
    index_block: IndexBlock,
    parity: Parity,
    antifield: VarId,
    ghost: VarId,
    components: BTreeMap<Components, GradedPoly>,
}

/// Split of one generator component into its part linear in previous-stage
/// antifields and its correction term.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneratorParts {
    /// Previous-stage antifield (zero order) ↦ coefficient family over jets.
    pub coefficients: BTreeMap<JetSymbol, CoefficientFamily>,
    pub correction: GradedPoly,
}

impl GeneratorParts {
    /// Rebuilds `Σ Δ^{X,Λ} X_Λ`.
    pub fn linear_part(&self) -> GradedPoly {
        let mut out = GradedPoly::zero();
        for (x, fam) in &self.coefficients {
            for (lam, c) in fam.iter() {
                out = out + c * &GradedPoly::from_symbol(x.with_derivative(lam.clone()));
            }
        }
        out
    }
}

impl NoetherGenerator {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn index_block(&self) -> IndexBlock {
        self.index_block
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn antifield(&self) -> VarId {
        self.antifield
    }

    pub fn ghost(&self) -> VarId {
        self.ghost
    }

    /// Nonzero components only.
    pub fn components(&self) -> impl Iterator<Item = (&Components, &GradedPoly)> {
        self.components.iter()
    }

    pub fn component(&self, comps: &[crate::algebra::Index]) -> GradedPoly {
        self.components
            .iter()
            .find(|(k, _)| k.as_slice() == comps)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }
}

/// A Lagrangian system with its declared tower of Noether identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    registry: Registry,
    lagrangian: Density,
    generators: Vec<NoetherGenerator>,
    field_antifields: BTreeMap<VarId, VarId>,
    euler_lagrange: BTreeMap<JetSymbol, GradedPoly>,
}

impl ModelSpec {
    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn n(&self) -> usize {
        self.registry.n()
    }

    pub fn lagrangian(&self) -> &Density {
        &self.lagrangian
    }

    pub fn generators(&self) -> &[NoetherGenerator] {
        &self.generators
    }

    pub fn generators_at(&self, stage: u32) -> impl Iterator<Item = &NoetherGenerator> {
        self.generators.iter().filter(move |g| g.stage == stage)
    }

    pub fn generator(&self, name: &str) -> Option<&NoetherGenerator> {
        self.generators.iter().find(|g| g.name == name)
    }

    /// Highest declared stage, −1 without generators.
    pub fn max_stage(&self) -> i32 {
        self.generators
            .iter()
            .map(|g| g.stage as i32)
            .max()
            .unwrap_or(-1)
    }

    /// `𝓔_A` for every field component.
    pub fn euler_lagrange(&self) -> &BTreeMap<JetSymbol, GradedPoly> {
        &self.euler_lagrange
    }

    /// Dynamical field variables with their antifields.
    pub fn fields(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.field_antifields.iter().map(|(f, a)| (*f, *a))
    }

    /// `s̄_A` for a zero-order field symbol `s^A`.
    pub fn antifield_of_field(&self, field: &JetSymbol) -> Option<JetSymbol> {
        let a = *self.field_antifields.get(&field.var())?;
        Some(self.registry.base_symbol(a, field.components()))
    }

    /// The field paired with a zero-order field antifield.
    pub fn field_of_antifield(&self, antifield: &JetSymbol) -> Option<JetSymbol> {
        self.field_antifields
            .iter()
            .find(|(_, a)| **a == antifield.var())
            .map(|(f, _)| self.registry.base_symbol(*f, antifield.components()))
    }

    pub fn generator_of_antifield(&self, var: VarId) -> Option<&NoetherGenerator> {
        self.generators.iter().find(|g| g.antifield == var)
    }

    pub fn generator_of_ghost(&self, var: VarId) -> Option<&NoetherGenerator> {
        self.generators.iter().find(|g| g.ghost == var)
    }

    /// Stage of an antifield variable: −1 for field antifields.
    pub fn antifield_stage(&self, var: VarId) -> Option<i32> {
        let d = self.registry.decl(var);
        (d.kind == VarKind::Antifield).then_some(d.stage)
    }

    /// Splits a generator component into `Σ Δ^{X,Λ} X_Λ` and the correction.
    pub fn generator_parts(
        &self,
        g: &NoetherGenerator,
        comps: &[crate::algebra::Index],
    ) -> Result<GeneratorParts> {
        split_generator(&self.registry, g.stage as i32, &g.name, &g.component(comps))
    }
}

fn split_generator(
    reg: &Registry,
    stage: i32,
    name: &str,
    delta: &GradedPoly,
) -> Result<GeneratorParts> {
    let mut parts = GeneratorParts::default();
    let mut linear_syms: BTreeSet<JetSymbol> = BTreeSet::new();
    for (m, c) in delta.terms() {
        let anti: Vec<&JetSymbol> = m
            .factors()
            .iter()
            .filter(|s| reg.decl(s.var()).kind != VarKind::Field)
            .collect();
        let stages: Vec<(VarKind, i32)> = anti
            .iter()
            .map(|s| {
                let d = reg.decl(s.var());
                (d.kind, d.stage)
            })
            .collect();
        let is_anti = |k: &(VarKind, i32), st: i32| k.0 == VarKind::Antifield && k.1 == st;
        match stages.as_slice() {
            [a] if is_anti(a, stage - 1) => {
                linear_syms.insert(anti[0].clone());
            }
            [a, b]
                if stage >= 1
                    && ((is_anti(a, stage - 2) && is_anti(b, -1))
                        || (is_anti(a, -1) && is_anti(b, stage - 2))) =>
            {
                parts.correction.add_term(m.clone(), c.clone());
            }
            _ => return Err(Error::UnsupportedCorrection(name.to_string())),
        }
    }
    for x in linear_syms {
        let coef = partial_derivative(delta, &x, Side::Right);
        // drop correction-term contributions: coefficients are field-only
        let mut field_only = GradedPoly::zero();
        for (m, c) in coef.terms() {
            if m.factors()
                .iter()
                .all(|s| reg.decl(s.var()).kind == VarKind::Field)
            {
                field_only.add_term(m.clone(), c.clone());
            }
        }
        parts
            .coefficients
            .entry(x.base())
            .or_default()
            .add(x.derivative().clone(), &field_only);
    }
    Ok(parts)
}

/// Declares fields and generator families before any polynomial is built.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    base: BaseSpace,
    fields: Vec<(String, Parity, IndexBlock)>,
    families: Vec<(String, u32, IndexBlock)>,
}

impl ModelBuilder {
    pub fn new(n: usize) -> Result<Self> {
        Ok(ModelBuilder {
            base: BaseSpace::new(n)?,
            fields: Vec::new(),
            families: Vec::new(),
        })
    }

    pub fn field(&mut self, name: &str, parity: Parity, block: IndexBlock) -> &mut Self {
        self.fields.push((name.to_string(), parity, block));
        self
    }

    pub fn family(&mut self, name: &str, stage: u32, block: IndexBlock) -> &mut Self {
        self.families.push((name.to_string(), stage, block));
        self
    }

    /// Fixes the symbol table. Generator-family parities are resolved later,
    /// stage by stage, as their components are supplied.
    pub fn freeze(&self) -> Result<ModelDraft> {
        let mut decls = Vec::new();
        for (name, parity, block) in &self.fields {
            decls.push(GradedVariableDecl::field(name, *parity, *block));
            decls.push(GradedVariableDecl {
                name: field_antifield_name(name),
                kind: VarKind::Antifield,
                parity: parity.flip(),
                antifield_number: 1,
                ghost_number: 0,
                stage: -1,
                index_block: *block,
            });
        }
        for (name, stage, block) in &self.families {
            decls.push(GradedVariableDecl {
                name: generator_antifield_name(name),
                kind: VarKind::Antifield,
                parity: Parity::Even,
                antifield_number: stage + 2,
                ghost_number: 0,
                stage: *stage as i32,
                index_block: *block,
            });
            decls.push(GradedVariableDecl {
                name: ghost_name(name),
                kind: VarKind::Ghost,
                parity: Parity::Even,
                antifield_number: 0,
                ghost_number: *stage as i32 + 1,
                stage: *stage as i32,
                index_block: *block,
            });
        }
        let registry = Registry::new(self.base, decls)?;
        let field_antifields = self
            .fields
            .iter()
            .map(|(name, _, _)| {
                (
                    registry.lookup(name).unwrap(),
                    registry.lookup(&field_antifield_name(name)).unwrap(),
                )
            })
            .collect();
        let mut families: Vec<FamilyDraft> = self
            .families
            .iter()
            .map(|(name, stage, block)| FamilyDraft {
                name: name.clone(),
                stage: *stage,
                block: *block,
                antifield: registry.lookup(&generator_antifield_name(name)).unwrap(),
                ghost: registry.lookup(&ghost_name(name)).unwrap(),
                parity: None,
                components: BTreeMap::new(),
            })
            .collect();
        families.sort_by(|a, b| (a.stage, &a.name).cmp(&(b.stage, &b.name)));
        Ok(ModelDraft {
            registry,
            lagrangian: GradedPoly::zero(),
            families,
            field_antifields,
        })
    }
}

#[derive(Clone, Debug)]
struct FamilyDraft {
    name: String,
    stage: u32,
    block: IndexBlock,
    antifield: VarId,
    ghost: VarId,
    parity: Option<Parity>,
    components: BTreeMap<Components, GradedPoly>,
}

/// A model whose symbol table is fixed and whose polynomials are being filled in.
#[derive(Clone, Debug)]
pub struct ModelDraft {
    registry: Registry,
    lagrangian: Density,
    families: Vec<FamilyDraft>,
    field_antifields: BTreeMap<VarId, VarId>,
}

impl ModelDraft {
    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn set_lagrangian(&mut self, l: Density) {
        self.lagrangian = l;
    }

    /// Supplies the components of one family. Every family of a lower stage
    /// must already be set, since this fixes the parity of the family's
    /// antifield and ghost.
    pub fn set_generator(
        &mut self,
        name: &str,
        components: Vec<(Vec<crate::algebra::Index>, GradedPoly)>,
    ) -> Result<()> {
        let idx = self
            .families
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let stage = self.families[idx].stage;
        if let Some(f) = self
            .families
            .iter()
            .find(|f| f.stage < stage && f.parity.is_none())
        {
            return Err(Error::MissingStage(f.stage as i32));
        }
        let block = self.families[idx].block;
        let n = self.registry.n();
        let mut comps_map: BTreeMap<Components, GradedPoly> = BTreeMap::new();
        for (comps, value) in components {
            if comps.len() != block.arity {
                return Err(Error::ComponentArity {
                    name: name.to_string(),
                    expected: block.arity,
                    got: comps.len(),
                });
            }
            if let Some(&bad) = comps.iter().find(|&&i| i as usize >= n) {
                return Err(Error::IndexOutOfRange {
                    index: bad as usize,
                    n,
                });
            }
            let Some((neg, canon)) = block.canonicalize(&comps) else {
                if value.is_zero() {
                    continue;
                }
                return Err(Error::InvalidModel(format!(
                    "`{name}` has a nonzero value on a repeated antisymmetric index"
                )));
            };
            let v = if neg { -value } else { value };
            let cur = comps_map.remove(&canon).unwrap_or_default();
            let sum = cur + v;
            if !sum.is_zero() {
                comps_map.insert(canon, sum);
            }
        }
        let mut parity = None;
        for v in comps_map.values() {
            match (parity, v.parity()) {
                (_, None) => {
                    return Err(Error::GradingMismatch(format!(
                        "generator `{name}` mixes parities"
                    )))
                }
                (None, Some(p)) => parity = Some(p),
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::GradingMismatch(format!(
                        "generator `{name}` mixes parities"
                    )))
                }
                _ => {}
            }
        }
        let parity = parity.ok_or_else(|| {
            Error::InvalidModel(format!("generator `{name}` has no nonzero component"))
        })?;
        let f = &mut self.families[idx];
        f.parity = Some(parity);
        f.components = comps_map;
        let (a, g) = (f.antifield, f.ghost);
        self.registry.set_parity(a, parity.flip());
        self.registry.set_parity(g, parity);
        Ok(())
    }

    /// Validates gradings and shapes and computes the Euler–Lagrange map.
    pub fn finish(self) -> Result<ModelSpec> {
        let reg = &self.registry;
        for (m, _) in self.lagrangian.terms() {
            if m.factors()
                .iter()
                .any(|s| reg.decl(s.var()).kind != VarKind::Field)
            {
                return Err(Error::InvalidModel(
                    "the Lagrangian may only contain dynamical fields".into(),
                ));
            }
        }
        if !self.lagrangian.is_zero() && self.lagrangian.parity() != Some(Parity::Even) {
            return Err(Error::InvalidModel("the Lagrangian must be even".into()));
        }
        let mut stages: Vec<u32> = self.families.iter().map(|f| f.stage).collect();
        stages.dedup();
        for (i, s) in stages.iter().enumerate() {
            if *s != i as u32 {
                return Err(Error::MissingStage(i as i32));
            }
        }
        let mut generators = Vec::new();
        for f in &self.families {
            let parity = f.parity.ok_or(Error::MissingStage(f.stage as i32))?;
            for (comps, v) in &f.components {
                for s in v.symbols() {
                    if s.parity() != reg.decl(s.var()).parity {
                        return Err(Error::InvalidModel(format!(
                            "generator `{}` was built before the parities it uses were fixed",
                            f.name
                        )));
                    }
                }
                match v.grading_of(reg) {
                    GradingReport::Homogeneous(g)
                        if g.antifield_number == f.stage + 1 && g.ghost_number == 0 => {}
                    _ => {
                        return Err(Error::GradingMismatch(format!(
                            "component {:?} of `{}` must have antifield number {} and no ghosts",
                            comps.as_slice(),
                            f.name,
                            f.stage + 1
                        )))
                    }
                }
                split_generator(reg, f.stage as i32, &f.name, v)?;
            }
            generators.push(NoetherGenerator {
                name: f.name.clone(),
                stage: f.stage,
                index_block: f.block,
                parity,
                antifield: f.antifield,
                ghost: f.ghost,
                components: f.components.clone(),
            });
        }
        let euler_lagrange = euler_lagrange(reg, &self.lagrangian);
        Ok(ModelSpec {
            registry: self.registry,
            lagrangian: self.lagrangian,
            generators,
            field_antifields: self.field_antifields,
            euler_lagrange,
        })
    }
}
