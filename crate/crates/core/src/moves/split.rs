//! Out-splittings `E_s(P)` and in-splittings `E_r(P)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Bundle, BundleSet, Graph, NameSet};
use crate::moves::partition::{in_report, out_report, InPartition, OutPartition, Resolved};
use crate::mult::Mult;

/// Result of checking one structural identity a construction must satisfy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        let (expected, actual) = (expected.to_string(), actual.to_string());
        IdentityCheck { name: name.into(), ok: expected == actual, expected, actual }
    }
}

pub(crate) fn up(v: &str, i: impl std::fmt::Display) -> String {
    format!("{v}^{i}")
}

pub(crate) fn down(v: &str, i: impl std::fmt::Display) -> String {
    format!("{v}_{i}")
}

fn bundle_base(id: &str, cell: usize, split_across_cells: bool) -> String {
    if split_across_cells {
        format!("{id}.{cell}")
    } else {
        id.to_string()
    }
}

/// Copies of each vertex in a split graph, for carrying truncation flags.
fn carry_frontier(g: &Graph, out: Graph, images: impl Fn(&str) -> Vec<String>) -> Result<Graph> {
    if !g.is_truncated() {
        return Ok(out);
    }
    let mut frontier = BTreeMap::new();
    for (v, cut) in g.frontier() {
        for image in images(v) {
            frontier.insert(image, *cut);
        }
    }
    out.with_truncation(frontier)
}

/// Builds the out-split graph. Improper partitions are accepted so the
/// resulting graphs can be compared; invalid ones are rejected.
pub fn out_split(g: &Graph, p: &OutPartition) -> Result<Graph> {
    let r = p.resolve(g)?;
    let report = out_report(g, &r);
    if !report.valid {
        return Err(Error::InvalidPartition(report.diagnostics));
    }
    out_split_resolved(g, &r)
}

pub(crate) fn out_split_resolved(g: &Graph, r: &Resolved) -> Result<Graph> {
    let vertex_name = |vi: usize, i: usize| -> String {
        let v = &g.vertices()[vi];
        if r.m(vi) == 0 {
            v.clone()
        } else {
            up(v, i)
        }
    };
    let mut names = NameSet::default();
    for (vi, v) in g.vertices().iter().enumerate() {
        match r.m(vi) {
            0 => names.push(v.clone())?,
            m => {
                for i in 1..=m {
                    names.push(up(v, i))?;
                }
            }
        }
    }
    let spread = r.bundle_cell_counts(g.bundles().len());
    let mut bundles = BundleSet::default();
    for (vi, cells) in r.per_vertex.iter().enumerate() {
        for (ci, cell) in cells.iter().enumerate() {
            let i = ci + 1;
            for &(b, amount) in cell {
                let bundle = &g.bundles()[b];
                let base = bundle_base(&bundle.id, i, spread[b] > 1);
                let ri = g.vertex_index(&bundle.rng)?;
                let src = vertex_name(vi, i);
                match r.m(ri) {
                    0 => bundles.push(Bundle::new(base, src, bundle.rng.clone(), amount)),
                    q => {
                        for j in 1..=q {
                            bundles.push(Bundle::new(up(&base, j), src.clone(), up(&bundle.rng, j), amount));
                        }
                    }
                }
            }
        }
    }
    let out = Graph::new(names.into_vec(), bundles.into_vec())?;
    carry_frontier(g, out, |v| {
        let vi = g.vertex_index(v).expect("frontier vertex exists");
        match r.m(vi) {
            0 => vec![v.to_string()],
            m => (1..=m).map(|i| up(v, i)).collect(),
        }
    })
}

/// Builds the in-split graph. Improper partitions are accepted; invalid ones
/// are rejected.
pub fn in_split(g: &Graph, p: &InPartition) -> Result<Graph> {
    let r = p.resolve(g)?;
    let report = in_report(g, &r);
    if !report.valid {
        return Err(Error::InvalidPartition(report.diagnostics));
    }
    in_split_resolved(g, &r)
}

pub(crate) fn in_split_resolved(g: &Graph, r: &Resolved) -> Result<Graph> {
    let mut names = NameSet::default();
    for (vi, v) in g.vertices().iter().enumerate() {
        match r.m(vi) {
            0 => names.push(v.clone())?,
            m => {
                for i in 1..=m {
                    names.push(down(v, i))?;
                }
            }
        }
    }
    let spread = r.bundle_cell_counts(g.bundles().len());
    let mut bundles = BundleSet::default();
    for (ri, cells) in r.per_vertex.iter().enumerate() {
        let rng = &g.vertices()[ri];
        for (ci, cell) in cells.iter().enumerate() {
            let i = ci + 1;
            for &(b, amount) in cell {
                let bundle = &g.bundles()[b];
                let base = bundle_base(&bundle.id, i, spread[b] > 1);
                let si = g.vertex_index(&bundle.src)?;
                match r.m(si) {
                    0 => bundles.push(Bundle::new(base, bundle.src.clone(), down(rng, i), amount)),
                    q => {
                        for j in 1..=q {
                            bundles.push(Bundle::new(down(&base, j), down(&bundle.src, j), down(rng, i), amount));
                        }
                    }
                }
            }
        }
    }
    let out = Graph::new(names.into_vec(), bundles.into_vec())?;
    carry_frontier(g, out, |v| {
        let vi = g.vertex_index(v).expect("frontier vertex exists");
        match r.m(vi) {
            0 => vec![v.to_string()],
            m => (1..=m).map(|i| down(v, i)).collect(),
        }
    })
}

/// Edges a copy gets from one cell: each edge is repeated once per copy of
/// its far end.
fn copied_mass(g: &Graph, r: &Resolved, cell: &[(usize, Mult)], far: fn(&Bundle) -> &str) -> Mult {
    cell.iter()
        .map(|&(b, a)| {
            let q = r.m(g.vertex_index(far(&g.bundles()[b])).expect("resolved")).max(1);
            a * Mult::Fin(q as u64)
        })
        .sum()
}

/// Count identities of an out-split: vertex count, in-degree of every copy
/// and out-degree of every copy.
pub fn out_split_identities(g: &Graph, p: &OutPartition, split: &Graph) -> Result<Vec<IdentityCheck>> {
    let r = p.resolve(g)?;
    let mut checks = Vec::new();
    let expected_vertices: usize = (0..g.vertex_count()).map(|vi| r.m(vi).max(1)).sum();
    checks.push(IdentityCheck::new("vertex count", expected_vertices, split.vertex_count()));
    for (vi, v) in g.vertices().iter().enumerate() {
        let m = r.m(vi);
        if m == 0 {
            checks.push(IdentityCheck::new(format!("in_degree({v})"), g.in_degree(v), split.in_degree(v)));
            continue;
        }
        for (ci, cell) in r.per_vertex[vi].iter().enumerate() {
            let copy = up(v, ci + 1);
            checks.push(IdentityCheck::new(format!("in_degree({copy})"), g.in_degree(v), split.in_degree(&copy)));
            let expected = copied_mass(g, &r, cell, |b| &b.rng);
            checks.push(IdentityCheck::new(format!("out_degree({copy})"), expected, split.out_degree(&copy)));
        }
    }
    Ok(checks)
}

/// Count identities of an in-split: vertex count, out-degree of every copy
/// and in-degree of every copy.
pub fn in_split_identities(g: &Graph, p: &InPartition, split: &Graph) -> Result<Vec<IdentityCheck>> {
    let r = p.resolve(g)?;
    let mut checks = Vec::new();
    let expected_vertices: usize = (0..g.vertex_count()).map(|vi| r.m(vi).max(1)).sum();
    checks.push(IdentityCheck::new("vertex count", expected_vertices, split.vertex_count()));
    for (vi, v) in g.vertices().iter().enumerate() {
        let m = r.m(vi);
        if m == 0 {
            checks.push(IdentityCheck::new(format!("out_degree({v})"), g.out_degree(v), split.out_degree(v)));
            continue;
        }
        for (ci, cell) in r.per_vertex[vi].iter().enumerate() {
            let copy = down(v, ci + 1);
            checks.push(IdentityCheck::new(format!("out_degree({copy})"), g.out_degree(v), split.out_degree(&copy)));
            let expected = copied_mass(g, &r, cell, |b| &b.src);
            checks.push(IdentityCheck::new(format!("in_degree({copy})"), expected, split.in_degree(&copy)));
        }
    }
    Ok(checks)
}
