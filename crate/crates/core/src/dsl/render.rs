use std::fmt::Write;

use crate::algebra::{IndexBlock, Symmetry, VarKind};
use crate::model::ModelSpec;

fn block_suffix(b: IndexBlock) -> String {
    match (b.arity, b.symmetry) {
        (0, Symmetry::None) => String::new(),
        (k, Symmetry::None) => format!("[{k}]"),
        (k, Symmetry::Antisymmetric) => format!("[{k} antisym]"),
    }
}

/// Component-form text of a model; `load_model` of the result rebuilds it.
pub fn render_model(m: &ModelSpec) -> String {
    let reg = m.registry();
    let mut out = String::new();
    writeln!(out, "dim {}", m.n()).unwrap();
    for (_, d) in reg.decls().filter(|(_, d)| d.kind == VarKind::Field) {
        let kw = if d.parity.is_odd() {
            "odd-field"
        } else {
            "field"
        };
        writeln!(out, "{kw} {}{}", d.name, block_suffix(d.index_block)).unwrap();
    }
    writeln!(out, "L = {}", m.lagrangian().render(reg)).unwrap();
    for g in m.generators() {
        let b = g.index_block();
        for (comps, v) in g.components() {
            let head = if b.arity == 0 && b.symmetry == Symmetry::None {
                String::new()
            } else {
                let list: Vec<String> = comps.iter().map(|i| i.to_string()).collect();
                format!("[{}]", list.join(","))
            };
            let anti = if b.symmetry == Symmetry::Antisymmetric {
                " antisym"
            } else {
                ""
            };
            writeln!(
                out,
                "stage {}: {}{head}{anti} = {}",
                g.stage(),
                g.name(),
                v.render(reg)
            )
            .unwrap();
        }
    }
    out
}
