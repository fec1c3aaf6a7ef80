//! Constructions built on top of the basic moves: the dual graph, the
//! maximal out-splitting, desingularization, conversion to a locally finite
//! graph, and the range vector induced by an in-partition.

use crate::error::{Error, Result};
use crate::graph::{Bundle, BundleSet, Graph, NameSet};
use crate::moves::delay::{
    in_delay, out_delay, BundleDelays, DelayClass, DrinenRangeVector, DrinenSourceVector, Enumeration, TruncationSpec,
};
use crate::moves::partition::{in_report, InPartition, OutPartition, Share};
use crate::moves::split::out_split;
use crate::mult::Mult;

/// Names of the individual edges of a finite bundle: the bundle id itself
/// for a single edge, `b#1 … b#k` otherwise.
fn edge_names(b: &Bundle, k: u64) -> Vec<String> {
    if k == 1 {
        vec![b.id.clone()]
    } else {
        (1..=k).map(|j| format!("{}#{j}", b.id)).collect()
    }
}

/// The dual graph: one vertex per edge of `g` and one edge `e.f` per path
/// `ef` of length two.
pub fn dual_graph(g: &Graph) -> Result<Graph> {
    if let Some(b) = g.bundles().iter().find(|b| b.mult.is_inf()) {
        return Err(Error::Precondition(format!(
            "dual graph needs finitely many edges, but bundle `{}` is infinite",
            b.id
        )));
    }
    if let Some(v) = g.sinks().first() {
        return Err(Error::Precondition(format!("dual graph needs a graph without sinks, but `{v}` is a sink")));
    }
    let edges: Vec<(&Bundle, Vec<String>)> = g
        .bundles()
        .iter()
        .map(|b| (b, edge_names(b, b.mult.finite().expect("checked finite"))))
        .collect();
    let mut names = NameSet::default();
    for (_, es) in &edges {
        for e in es {
            names.push(e.clone())?;
        }
    }
    let mut bundles = BundleSet::default();
    for (b, es) in &edges {
        for (_, fs) in edges.iter().filter(|(c, _)| c.src == b.rng) {
            for e in es {
                for f in fs {
                    bundles.push(Bundle::new(format!("{e}.{f}"), e.clone(), f.clone(), Mult::ONE));
                }
            }
        }
    }
    Graph::new(names.into_vec(), bundles.into_vec())
}

/// The out-partition with one edge per cell.
pub fn singleton_out_partition(g: &Graph) -> Result<OutPartition> {
    let mut p = OutPartition::trivial();
    for v in g.vertices() {
        let mut cells = Vec::new();
        for b in g.out_bundles(v) {
            let k = b.mult.finite().ok_or_else(|| {
                Error::Precondition(format!(
                    "`{v}` is an infinite emitter, so its edges cannot be split into singletons"
                ))
            })?;
            cells.extend((0..k).map(|_| vec![Share::new(b.id.clone(), Mult::ONE)]));
        }
        if !cells.is_empty() {
            p = p.with_cells(v.clone(), cells);
        }
    }
    Ok(p)
}

/// The out-split by the partition admitting no refinement.
pub fn maximal_out_split(g: &Graph) -> Result<Graph> {
    out_split(g, &singleton_out_partition(g)?)
}

/// The source vector of the Drinen-Tomforde desingularization: sinks and
/// infinite emitters get delay ∞, every other vertex 0. At an infinite
/// emitter the edges of finite bundles take delays 0, 1, 2, … in
/// declaration order; the edges of its `K` infinite bundles then share the
/// remaining delays round-robin, so bundle `t` takes `F+t, F+t+K, …`.
pub fn desingularizing_vector(g: &Graph) -> DrinenSourceVector {
    let mut d = DrinenSourceVector::zero();
    for v in g.vertices() {
        if g.is_sink(v) {
            d = d.with_vertex(v.clone(), Mult::Inf);
        } else if g.is_infinite_emitter(v) {
            d = d.with_vertex(v.clone(), Mult::Inf);
            let mut next = 0u64;
            for b in g.out_bundles(v).filter(|b| !b.mult.is_inf()) {
                let k = b.mult.finite().expect("finite bundle");
                let classes = (next..next + k).map(|delay| DelayClass { delay, count: Mult::ONE }).collect();
                next += k;
                d = d.with_bundle(b.id.clone(), BundleDelays { classes, enumerate: None });
            }
            let infinite: Vec<&Bundle> = g.out_bundles(v).filter(|b| b.mult.is_inf()).collect();
            let step = infinite.len() as u64;
            for (t, b) in infinite.into_iter().enumerate() {
                let en = Enumeration { from: next + t as u64, step };
                d = d.with_bundle(b.id.clone(), BundleDelays { classes: vec![], enumerate: Some(en) });
            }
        }
    }
    d
}

/// Replaces sinks and infinite emitters by infinite tails, cut at depth `t`.
pub fn desingularize(g: &Graph, t: TruncationSpec) -> Result<Graph> {
    out_delay(g, &desingularizing_vector(g), t)
}

/// The range vector turning a row-finite graph locally finite: sources and
/// infinite receivers get delay ∞, the edges into an infinite receiver are
/// enumerated `0, 1, 2, …`, and everything else stays at 0.
///
/// In a finite presentation an infinite receiver is always fed by an
/// infinite emitter, so on row-finite input only the sources move.
pub fn locally_finite_vector(g: &Graph) -> Result<DrinenRangeVector> {
    if let Some(v) = g.vertices().iter().find(|v| g.is_infinite_emitter(v)) {
        return Err(Error::Precondition(format!("graph is not row-finite: `{v}` is an infinite emitter")));
    }
    let mut d = DrinenRangeVector::zero();
    for v in g.vertices() {
        if g.is_source(v) {
            d = d.with_vertex(v.clone(), Mult::Inf);
        }
    }
    Ok(d)
}

/// Attaches an infinite head to every source of a row-finite graph, cut at
/// depth `t`.
pub fn make_locally_finite(g: &Graph, t: TruncationSpec) -> Result<Graph> {
    in_delay(g, &locally_finite_vector(g)?, t)
}

/// The range vector `d_{r,P}`: `d(v) = m(v) − 1` (0 when `m(v) = 0`) and an
/// edge in cell `i` of its range gets delay `i − 1`.
pub fn drinen_from_in_split(g: &Graph, p: &InPartition) -> Result<DrinenRangeVector> {
    let r = p.resolve(g)?;
    let report = in_report(g, &r);
    if !report.valid {
        return Err(Error::InvalidPartition(report.diagnostics));
    }
    let mut classes: Vec<Vec<DelayClass>> = vec![Vec::new(); g.bundles().len()];
    let mut d = DrinenRangeVector::zero();
    for (vi, v) in g.vertices().iter().enumerate() {
        let m = r.m(vi) as u64;
        if m > 1 {
            d = d.with_vertex(v.clone(), Mult::Fin(m - 1));
        }
        for (i, cell) in r.per_vertex[vi].iter().enumerate() {
            for &(b, amount) in cell {
                classes[b].push(DelayClass { delay: i as u64, count: amount });
            }
        }
    }
    for (b, cs) in g.bundles().iter().zip(classes) {
        if cs.iter().any(|c| c.delay > 0) {
            d = d.with_bundle(b.id.clone(), BundleDelays { classes: cs, enumerate: None });
        }
    }
    Ok(d)
}
