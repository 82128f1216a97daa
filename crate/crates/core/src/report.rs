//! Command results as deterministic JSON reports.

use serde_json::{json, Map, Value};

use crate::algebra::{GradedPoly, Registry};
use crate::error::Result;
use crate::homology::{homology_dimension, HomologyReport, TruncationWindow};
use crate::koszul::{
    ascent_operator, ascent_relations, build_stage_differential, check_ascent_nilpotency,
    check_nilpotency, extended_lagrangian, on_shell_reduce, verify_noether_identity,
    verify_stage_identity, verify_variational_supersymmetry, IdentityOutcome, Nilpotency,
    ShellWindow,
};
use crate::model::ModelSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Nothing found within a finite search window.
    Inconclusive,
    /// Reported but never fails a run.
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "window-inconclusive",
            Status::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub tag: &'static str,
    pub status: Status,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub model: String,
    pub command: String,
    pub checks: Vec<Check>,
    pub homology: Vec<Value>,
    pub gauge: Vec<(String, String)>,
}

impl Report {
    fn new(model: &str, command: &str) -> Self {
        Report {
            model: model.to_string(),
            command: command.to_string(),
            checks: Vec::new(),
            homology: Vec::new(),
            gauge: Vec::new(),
        }
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                let mut o = Map::new();
                o.insert("name".into(), json!(c.name));
                o.insert("paper_eq".into(), json!(c.tag));
                o.insert("status".into(), json!(c.status.as_str()));
                if let Some(w) = &c.witness {
                    o.insert("witness".into(), json!(w));
                }
                Value::Object(o)
            })
            .collect();
        let mut o = Map::new();
        o.insert("model".into(), json!(self.model));
        o.insert("command".into(), json!(self.command));
        o.insert("checks".into(), Value::Array(checks));
        if self.command == "homology" {
            o.insert("homology".into(), Value::Array(self.homology.clone()));
        }
        if self.command == "gauge" {
            let comps: Vec<Value> = self
                .gauge
                .iter()
                .map(|(t, v)| json!({"target": t, "value": v}))
                .collect();
            o.insert("gauge".into(), Value::Array(comps));
        }
        Value::Object(o)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("plain JSON");
        s.push('\n');
        s
    }

    /// One line per check plus a verdict.
    pub fn summary(&self) -> String {
        let mut out = format!("{} on {}\n", self.command, self.model);
        for c in &self.checks {
            out.push_str(&format!("  {:<20} {}\n", c.status.as_str(), c.name));
            if let Some(w) = &c.witness {
                out.push_str(&format!("      witness: {w}\n"));
            }
        }
        for (t, v) in &self.gauge {
            out.push_str(&format!("  u({t}) = {v}\n"));
        }
        for h in &self.homology {
            out.push_str(&format!(
                "  sector {}: window homology dimension {} (window-relative)\n",
                h["sector"], h["dims"]["homology"]
            ));
            if let Some(gs) = h["generators"].as_array() {
                for g in gs {
                    out.push_str(&format!("      {}\n", g.as_str().unwrap_or_default()));
                }
            }
        }
        out.push_str(if self.failed() { "FAILED\n" } else { "OK\n" });
        out
    }
}

fn identity_check(name: String, tag: &'static str, reg: &Registry, o: IdentityOutcome) -> Check {
    Check {
        name,
        tag,
        status: if o.holds() {
            Status::Pass
        } else {
            Status::Fail
        },
        witness: o
            .witness
            .map(|(comps, v)| format!("component {:?}: {}", comps.as_slice(), v.render(reg))),
    }
}

fn nilpotency_witness(reg: &Registry, n: &Nilpotency) -> Option<String> {
    match n {
        Nilpotency::Ok => None,
        Nilpotency::Witness { symbol, value } => Some(format!(
            "on {}: {}",
            reg.render_symbol(symbol),
            value.render(reg)
        )),
    }
}

fn stage_or_top(m: &ModelSpec, stage: Option<i32>) -> i32 {
    stage.unwrap_or_else(|| m.max_stage())
}

/// Identities, nilpotency, extended-Lagrangian closure and the gauge
/// supersymmetry of the ascent operator, up to stage `stage` (default: all).
pub fn run_check(
    m: &ModelSpec,
    label: &str,
    stage: Option<i32>,
    shell: Option<ShellWindow>,
) -> Result<Report> {
    let reg = m.registry();
    let top = stage_or_top(m, stage);
    let mut r = Report::new(label, "check");
    for g in m.generators().iter().filter(|g| g.stage() as i32 <= top) {
        if g.stage() == 0 {
            let o = verify_noether_identity(m, g)?;
            r.checks.push(identity_check(
                format!("noether-identity:{}", g.name()),
                "noether-identity",
                reg,
                o,
            ));
        } else {
            let o = verify_stage_identity(m, g)?;
            r.checks.push(identity_check(
                format!("stage-identity:{}", g.name()),
                "higher-stage-identity",
                reg,
                o,
            ));
        }
    }
    let delta = build_stage_differential(m, top)?;
    let nil = check_nilpotency(&delta)?;
    r.checks.push(Check {
        name: format!("koszul-tate-nilpotency:{top}"),
        tag: "koszul-tate-nilpotency",
        status: if nil.is_ok() {
            Status::Pass
        } else {
            Status::Fail
        },
        witness: nilpotency_witness(reg, &nil),
    });
    let le = extended_lagrangian(m, top)?;
    let closure = delta.apply(&le);
    r.checks.push(Check {
        name: format!("extended-lagrangian-closure:{top}"),
        tag: "extended-lagrangian-closure",
        status: if closure.is_zero() {
            Status::Pass
        } else {
            Status::Fail
        },
        witness: (!closure.is_zero()).then(|| closure.render(reg)),
    });
    let u = ascent_operator(m, top)?;
    let susy = verify_variational_supersymmetry(&u, m.lagrangian());
    r.checks.push(Check {
        name: "gauge-supersymmetry".into(),
        tag: "gauge-supersymmetry",
        status: if susy { Status::Pass } else { Status::Fail },
        witness: None,
    });
    let mut open: Vec<String> = Vec::new();
    for (target, rel) in ascent_relations(m, &u) {
        if rel.is_zero() {
            continue;
        }
        let red = on_shell_reduce(m, &rel, shell);
        if !red.in_ideal {
            open.push(format!(
                "{}: {}",
                reg.render_symbol(&target),
                red.residual.render(reg)
            ));
        }
    }
    r.checks.push(Check {
        name: "ascent-relations".into(),
        tag: "ascent-relations",
        status: if open.is_empty() {
            Status::Pass
        } else {
            Status::Inconclusive
        },
        witness: (!open.is_empty()).then(|| open.join("; ")),
    });
    let an = check_ascent_nilpotency(&u);
    r.checks.push(Check {
        name: "ascent-nilpotency".into(),
        tag: "ascent-nilpotency",
        status: if an.is_ok() {
            Status::Pass
        } else {
            Status::Info
        },
        witness: nilpotency_witness(reg, &an),
    });
    Ok(r)
}

/// Components of the ascent operator built from generators up to `stage`.
pub fn run_gauge(m: &ModelSpec, label: &str, stage: Option<i32>) -> Result<Report> {
    let reg = m.registry();
    let top = stage_or_top(m, stage);
    let u = ascent_operator(m, top)?;
    let mut r = Report::new(label, "gauge");
    r.gauge = u
        .components()
        .map(|(t, v)| (reg.render_symbol(t), v.render(reg)))
        .collect();
    let susy = verify_variational_supersymmetry(&u, m.lagrangian());
    r.checks.push(Check {
        name: "gauge-supersymmetry".into(),
        tag: "gauge-supersymmetry",
        status: if susy { Status::Pass } else { Status::Fail },
        witness: None,
    });
    Ok(r)
}

pub fn homology_json(reg: &Registry, h: &HomologyReport, max_stage: i32) -> Value {
    let generators: Vec<Value> = h
        .generators
        .iter()
        .map(|g: &GradedPoly| json!(g.render(reg)))
        .collect();
    json!({
        "sector": h.sector,
        "window": {
            "max_jet_order": h.max_jet_order,
            "max_poly_degree": h.max_poly_degree,
            "max_stage": max_stage,
        },
        "dims": {
            "source": h.source_dim,
            "upper": h.upper_dim,
            "rank_out": h.rank_out,
            "kernel": h.kernel_dim,
            "rank_in": h.rank_in,
            "boundary": h.boundary_dim,
            "homology": h.homology_dim,
        },
        "generators": generators,
        "window_relative": true,
        "result": if h.homology_dim == 0 { "none-within-window" } else { "generators-found" },
    })
}

/// Window homology of `δ_N` at one sector. `N` defaults to `sector − 2`,
/// clamped to the declared stages.
pub fn run_homology(
    m: &ModelSpec,
    label: &str,
    stage: Option<i32>,
    window: TruncationWindow,
) -> Result<Report> {
    let n = stage.unwrap_or_else(|| (window.sector as i32 - 2).clamp(-1, m.max_stage()));
    let delta = build_stage_differential(m, n)?;
    let h = homology_dimension(m, &delta, &delta, &window)?;
    let mut r = Report::new(label, "homology");
    r.homology.push(homology_json(
        m.registry(),
        &h,
        window.max_stage.unwrap_or(n),
    ));
    Ok(r)
}
