//! Einstein-summation expansion of validated expressions into polynomials.

use std::collections::BTreeMap;

use num_traits::Zero;

use super::parser::{summed_here, Expr, Idx, SymHead};
use super::{Diagnostic, Pos};
use crate::algebra::{GradedPoly, Index, MultiIndex, Registry, Q};
use crate::error::Error;
use crate::jet::d_multi;
use crate::model::{field_antifield_name, generator_antifield_name};
use crate::zoo::levi_civita;

pub struct Expander<'a> {
    pub reg: &'a Registry,
    /// Generator families by stage, for `cbar(INT)`.
    pub families: &'a BTreeMap<u32, Vec<String>>,
    /// Statement position, used for nodes without their own.
    pub pos: Pos,
}

type Env = BTreeMap<String, Index>;

impl Expander<'_> {
    fn index(&self, i: &Idx, env: &Env, pos: Pos) -> Result<Index, Diagnostic> {
        match i {
            Idx::Letter(l) => env.get(l).copied().ok_or_else(|| {
                Diagnostic::new(
                    "E-IDX-UNKNOWN",
                    pos,
                    format!("index letter `{l}` is not bound"),
                )
            }),
            Idx::Fixed(v) => {
                if (*v as usize) < self.reg.n() {
                    Ok(*v as Index)
                } else {
                    Err(Diagnostic::new(
                        "E-RANGE",
                        pos,
                        format!("index {v} out of range for dimension {}", self.reg.n()),
                    ))
                }
            }
        }
    }

    fn indices(&self, l: &[Idx], env: &Env, pos: Pos) -> Result<Vec<Index>, Diagnostic> {
        l.iter().map(|i| self.index(i, env, pos)).collect()
    }

    fn var_name(&self, head: &SymHead, pos: Pos) -> Result<String, Diagnostic> {
        Ok(match head {
            SymHead::Plain(n) => n.clone(),
            SymHead::Sbar(n) => field_antifield_name(n),
            SymHead::CbarName(n) => generator_antifield_name(n),
            SymHead::CbarStage(k) => match self.families.get(k).map(Vec::as_slice) {
                Some([one]) => generator_antifield_name(one),
                Some([]) | None => {
                    return Err(Diagnostic::new(
                        "E-UNKNOWN-VAR",
                        pos,
                        format!("no generator family at stage {k}"),
                    ))
                }
                Some(_) => {
                    return Err(Diagnostic::new(
                        "E-UNKNOWN-VAR",
                        pos,
                        format!("stage {k} has several families; name one with cbar(NAME)"),
                    ))
                }
            },
        })
    }

    /// Expands `e` with the letters of `env` fixed.
    pub fn eval(&self, e: &Expr, env: &Env) -> Result<GradedPoly, Diagnostic> {
        match e {
            Expr::Num(v) => Ok(GradedPoly::constant(Q::from_integer(v.clone()))),
            Expr::Sum(ts) => {
                let mut out = GradedPoly::zero();
                for (neg, t) in ts {
                    let v = self.eval(t, env)?;
                    out = if *neg { out - v } else { out + v };
                }
                Ok(out)
            }
            Expr::Neg(inner) => Ok(-self.eval(inner, env)?),
            Expr::Pow(base, k, _) => {
                let b = self.eval(base, env)?;
                let mut out = GradedPoly::one();
                for _ in 0..*k {
                    out = &out * &b;
                }
                Ok(out)
            }
            Expr::Div(num, den, p) => {
                let d = self.eval(den, env)?;
                let c = d.as_constant().ok_or_else(|| {
                    Diagnostic::new("E-SYNTAX", *p, "division by a non-constant".into())
                })?;
                if c.is_zero() {
                    return Err(Diagnostic::new("E-SYNTAX", *p, "division by zero".into()));
                }
                Ok(self.eval(num, env)?.scale(&(Q::from_integer(1.into()) / c)))
            }
            _ => self.summed(e, env, &|env| self.eval_product_like(e, env)),
        }
    }

    /// Sums `f` over every value of the letters contracted at `e`.
    fn summed(
        &self,
        e: &Expr,
        env: &Env,
        f: &dyn Fn(&Env) -> Result<GradedPoly, Diagnostic>,
    ) -> Result<GradedPoly, Diagnostic> {
        let letters: Vec<String> = summed_here(e)
            .into_iter()
            .filter(|l| !env.contains_key(l))
            .collect();
        if letters.is_empty() {
            return f(env);
        }
        let n = self.reg.n();
        let mut out = GradedPoly::zero();
        let mut vals = vec![0usize; letters.len()];
        let mut local = env.clone();
        loop {
            for (l, v) in letters.iter().zip(&vals) {
                local.insert(l.clone(), *v as Index);
            }
            out = out + f(&local)?;
            let mut k = 0;
            while k < vals.len() {
                vals[k] += 1;
                if vals[k] < n {
                    break;
                }
                vals[k] = 0;
                k += 1;
            }
            if k == vals.len() {
                return Ok(out);
            }
        }
    }

    fn eval_product_like(&self, e: &Expr, env: &Env) -> Result<GradedPoly, Diagnostic> {
        match e {
            Expr::Sym {
                head,
                comps,
                jet,
                pos,
            } => {
                let name = self.var_name(head, *pos)?;
                let comps = self.indices(comps, env, *pos)?;
                let jet: Vec<Idx> = jet.iter().map(|v| Idx::Fixed(*v)).collect();
                let jet = self.indices(&jet, env, *pos)?;
                match self.reg.symbol_by_name(&name, &comps, &jet) {
                    Ok(None) => Ok(GradedPoly::zero()),
                    Ok(Some((neg, s))) => {
                        let p = GradedPoly::from_symbol(s);
                        Ok(if neg { -p } else { p })
                    }
                    Err(Error::UnknownVariable(v)) => Err(Diagnostic::new(
                        "E-UNKNOWN-VAR",
                        *pos,
                        format!("unknown variable `{v}`"),
                    )),
                    Err(other) => Err(Diagnostic::new("E-COMPONENTS", *pos, other.to_string())),
                }
            }
            Expr::Eps(l, p) => {
                let idx = self.indices(l, env, *p)?;
                if idx.len() != self.reg.n() {
                    return Err(Diagnostic::new(
                        "E-COMPONENTS",
                        *p,
                        format!("eps needs {} indices, got {}", self.reg.n(), idx.len()),
                    ));
                }
                Ok(GradedPoly::constant(Q::from_integer(
                    levi_civita(&idx, self.reg.n()).into(),
                )))
            }
            Expr::Delta(a, b) => {
                let a = self.index(a, env, self.pos)?;
                let b = self.index(b, env, self.pos)?;
                Ok(if a == b {
                    GradedPoly::one()
                } else {
                    GradedPoly::zero()
                })
            }
            Expr::D(dirs, inner) => {
                let dirs = self.indices(dirs, env, self.pos)?;
                let v = self.eval(inner, env)?;
                Ok(d_multi(&v, &MultiIndex::new(&dirs)))
            }
            Expr::Product(fs) => {
                let mut out = GradedPoly::one();
                for f in fs {
                    out = &out * &self.eval(f, env)?;
                }
                Ok(out)
            }
            _ => self.eval(e, env),
        }
    }
}
