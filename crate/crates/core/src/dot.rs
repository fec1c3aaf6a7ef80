//! Graphviz export.

use std::fmt::Write;

use crate::graph::Graph;
use crate::mult::Mult;

/// Bundles up to this multiplicity are drawn as separate arrows.
pub const MAX_DRAWN_ARROWS: u64 = 4;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One arrow per edge for bundles of multiplicity at most 4, otherwise a
/// single arrow labelled with the multiplicity (`∞` for infinite bundles).
/// Frontier vertices of a truncated graph get a dashed border.
pub fn to_dot(g: &Graph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in g.vertices() {
        if g.frontier().contains_key(v) {
            writeln!(out, "  {} [style=dashed];", quote(v)).unwrap();
        } else {
            writeln!(out, "  {};", quote(v)).unwrap();
        }
    }
    for b in g.bundles() {
        let arrow = format!("  {} -> {}", quote(&b.src), quote(&b.rng));
        match b.mult {
            Mult::Fin(k) if k <= MAX_DRAWN_ARROWS => {
                for _ in 0..k {
                    writeln!(out, "{arrow};").unwrap();
                }
            }
            Mult::Fin(k) => writeln!(out, "{arrow} [label=\"{k}\"];").unwrap(),
            Mult::Inf => writeln!(out, "{arrow} [label=\"∞\"];").unwrap(),
        }
    }
    out.push_str("}\n");
    out
}
