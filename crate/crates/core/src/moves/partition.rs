//! Partitions of `s⁻¹(v)` (out-partitions) and `r⁻¹(v)` (in-partitions)
//! into ordered cells of bundle shares, with their validators.

use std::collections::{BTreeMap, BTreeSet};
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::mult::Mult;

/// A sub-family of a bundle's parallel edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share {
    pub bundle: String,
    pub amount: Mult,
}

impl Share {
    pub fn new(bundle: impl Into<String>, amount: Mult) -> Self {
        Share { bundle: bundle.into(), amount }
    }

    pub fn all(bundle: impl Into<String>) -> Self {
        Share { bundle: bundle.into(), amount: Mult::Inf }
    }
}

pub type Cell = Vec<Share>;

/// Which edge set of a vertex a partition splits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `s⁻¹(v)`, the edges a vertex emits.
    Out,
    /// `r⁻¹(v)`, the edges a vertex receives.
    In,
}

pub trait PartitionSide {
    const SIDE: Side;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutSide;
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InSide;

impl PartitionSide for OutSide {
    const SIDE: Side = Side::Out;
}
impl PartitionSide for InSide {
    const SIDE: Side = Side::In;
}

/// Ordered cells per vertex. Vertices without an entry get the trivial
/// partition: one cell holding every edge on that side, or no cell at all
/// when there is no such edge.
///
/// Cell order is significant: cell `i` becomes the copy `v^i` (out) or `v_i`
/// (in).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition<S> {
    cells: BTreeMap<String, Vec<Cell>>,
    _side: PhantomData<S>,
}

pub type OutPartition = Partition<OutSide>;
pub type InPartition = Partition<InSide>;

impl<S: PartitionSide> Default for Partition<S> {
    fn default() -> Self {
        Partition { cells: BTreeMap::new(), _side: PhantomData }
    }
}

impl<S: PartitionSide> Partition<S> {
    /// The trivial partition.
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn with_cells(mut self, vertex: impl Into<String>, cells: Vec<Cell>) -> Self {
        self.cells.insert(vertex.into(), cells);
        self
    }

    pub fn side(&self) -> Side {
        S::SIDE
    }

    pub fn explicit_cells(&self) -> &BTreeMap<String, Vec<Cell>> {
        &self.cells
    }

    /// Parses `{"vertex":..,"cells":[[share,..],..]}` or an array of such
    /// objects. `"cells": "inf"` asks for infinitely many cells and is
    /// rejected as unrepresentable.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let entries: Vec<Value> = match v {
            Value::Array(items) => items.clone(),
            Value::Object(map) if map.contains_key("partitions") => match &map["partitions"] {
                Value::Array(items) => items.clone(),
                _ => return Err(Error::Parse("`partitions` must be an array".into())),
            },
            Value::Object(_) => vec![v.clone()],
            _ => return Err(Error::Parse("partition must be an object or an array".into())),
        };
        let mut p = Self::default();
        for entry in entries {
            let parsed: VertexCellsJson = serde_json::from_value(entry)?;
            let cells = match parsed.cells {
                CellsJson::Cells(c) => c,
                CellsJson::Count(s) => {
                    return match s.as_str() {
                        "inf" | "Inf" | "∞" | "infinite" => Err(Error::UnrepresentableInfinitePartition(parsed.vertex)),
                        other => Err(Error::Parse(format!("unexpected cell specification {other:?}"))),
                    }
                }
            };
            if p.cells.insert(parsed.vertex.clone(), cells).is_some() {
                return Err(Error::Parse(format!("vertex `{}` partitioned twice", parsed.vertex)));
            }
        }
        Ok(p)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }

    pub fn to_json_value(&self) -> Value {
        let items: Vec<VertexCellsJson> = self
            .cells
            .iter()
            .map(|(v, c)| VertexCellsJson { vertex: v.clone(), cells: CellsJson::Cells(c.clone()) })
            .collect();
        serde_json::to_value(items).expect("partition serializes")
    }

    /// Resolves the partition against `g`: cells of bundle positions per
    /// vertex (indexed like `g.vertices()`). Structural mismatches are errors.
    pub(crate) fn resolve(&self, g: &Graph) -> Result<Resolved> {
        for v in self.cells.keys() {
            g.vertex_index(v)?;
        }
        let mut per_vertex = Vec::with_capacity(g.vertex_count());
        for v in g.vertices() {
            let cells = match self.cells.get(v) {
                Some(cells) => {
                    let mut out = Vec::with_capacity(cells.len());
                    for cell in cells {
                        let mut rc = Vec::with_capacity(cell.len());
                        for share in cell {
                            let pos = g.bundle_position(&share.bundle)?;
                            let b = &g.bundles()[pos];
                            let end = match S::SIDE {
                                Side::Out => &b.src,
                                Side::In => &b.rng,
                            };
                            if end != v {
                                let rel = match S::SIDE {
                                    Side::Out => "emitted by",
                                    Side::In => "received by",
                                };
                                return Err(Error::PartitionMismatch(format!(
                                    "bundle `{}` is not {rel} `{v}`",
                                    share.bundle
                                )));
                            }
                            rc.push((pos, share.amount));
                        }
                        out.push(rc);
                    }
                    out
                }
                None => {
                    let cell: Vec<(usize, Mult)> = side_bundles(g, v, S::SIDE).map(|p| (p, g.bundles()[p].mult)).collect();
                    if cell.is_empty() {
                        Vec::new()
                    } else {
                        vec![cell]
                    }
                }
            };
            per_vertex.push(cells);
        }
        Ok(Resolved { per_vertex })
    }
}

pub(crate) fn side_bundles<'a>(g: &'a Graph, v: &'a str, side: Side) -> impl Iterator<Item = usize> + 'a {
    g.bundles().iter().enumerate().filter_map(move |(i, b)| {
        let end = match side {
            Side::Out => &b.src,
            Side::In => &b.rng,
        };
        (end == v).then_some(i)
    })
}

#[derive(Serialize, Deserialize)]
struct VertexCellsJson {
    vertex: String,
    cells: CellsJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CellsJson {
    Cells(Vec<Cell>),
    Count(String),
}

/// A partition checked against a graph: `per_vertex[i]` are the cells of
/// `g.vertices()[i]` as `(bundle position, amount)` shares.
#[derive(Clone, Debug)]
pub(crate) struct Resolved {
    pub per_vertex: Vec<Vec<Vec<(usize, Mult)>>>,
}

impl Resolved {
    pub fn m(&self, v: usize) -> usize {
        self.per_vertex[v].len()
    }

    /// How many distinct cells mention each bundle.
    pub fn bundle_cell_counts(&self, bundles: usize) -> Vec<usize> {
        let mut counts = vec![0; bundles];
        for cells in &self.per_vertex {
            for cell in cells {
                let distinct: BTreeSet<usize> = cell.iter().map(|&(b, _)| b).collect();
                for b in distinct {
                    counts[b] += 1;
                }
            }
        }
        counts
    }
}

/// Verdict of a partition validator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub valid: bool,
    pub proper: bool,
    /// Cell count `m(v)` of every vertex.
    pub cell_counts: BTreeMap<String, usize>,
    pub diagnostics: Vec<String>,
}

fn check_axioms(g: &Graph, side: Side, r: &Resolved) -> Vec<String> {
    let mut diags = Vec::new();
    let what = match side {
        Side::Out => "emits",
        Side::In => "receives",
    };
    for (vi, cells) in r.per_vertex.iter().enumerate() {
        let v = &g.vertices()[vi];
        let owned: Vec<usize> = side_bundles(g, v, side).collect();
        if owned.is_empty() && !cells.is_empty() {
            diags.push(format!("`{v}` {what} no edges, so it takes no cells"));
            continue;
        }
        if !owned.is_empty() && cells.is_empty() {
            diags.push(format!("`{v}` {what} edges but has no cells"));
            continue;
        }
        let mut totals: BTreeMap<usize, Mult> = BTreeMap::new();
        for (ci, cell) in cells.iter().enumerate() {
            if cell.is_empty() {
                diags.push(format!("cell {} of `{v}` is empty", ci + 1));
            }
            let mut seen = BTreeSet::new();
            for &(b, amount) in cell {
                let id = &g.bundles()[b].id;
                if amount.is_zero() {
                    diags.push(format!("cell {} of `{v}` takes 0 edges of `{id}`", ci + 1));
                }
                if !seen.insert(b) {
                    diags.push(format!("cell {} of `{v}` mentions `{id}` twice", ci + 1));
                }
                let t = totals.entry(b).or_insert(Mult::ZERO);
                *t = *t + amount;
            }
        }
        for b in owned {
            let bundle = &g.bundles()[b];
            let total = totals.get(&b).copied().unwrap_or(Mult::ZERO);
            match bundle.mult {
                Mult::Fin(k) => {
                    let has_inf = cells.iter().flatten().any(|&(x, a)| x == b && a.is_inf());
                    if has_inf {
                        diags.push(format!("finite bundle `{}` cannot carry an infinite share", bundle.id));
                    } else if total != Mult::Fin(k) {
                        diags.push(format!("shares of `{}` sum to {total}, expected {k}", bundle.id));
                    }
                }
                Mult::Inf => {
                    if !total.is_inf() {
                        diags.push(format!("infinite bundle `{}` needs an infinite share", bundle.id));
                    }
                }
            }
        }
    }
    diags
}

fn cell_counts(g: &Graph, r: &Resolved) -> BTreeMap<String, usize> {
    g.vertices().iter().enumerate().map(|(i, v)| (v.clone(), r.m(i))).collect()
}

/// Checks an out-partition: `valid` when the cells partition every `s⁻¹(v)`,
/// `proper` when in addition each infinite emitter has exactly one infinite
/// cell.
pub fn validate_out_partition(g: &Graph, p: &OutPartition) -> Result<PartitionReport> {
    let r = p.resolve(g)?;
    Ok(out_report(g, &r))
}

pub(crate) fn out_report(g: &Graph, r: &Resolved) -> PartitionReport {
    let mut diagnostics = check_axioms(g, Side::Out, r);
    let valid = diagnostics.is_empty();
    let mut proper = valid;
    if valid {
        for (vi, cells) in r.per_vertex.iter().enumerate() {
            let v = &g.vertices()[vi];
            if !g.is_infinite_emitter(v) {
                continue;
            }
            let infinite = cells.iter().filter(|c| c.iter().any(|&(_, a)| a.is_inf())).count();
            if infinite != 1 {
                proper = false;
                diagnostics.push(format!("infinite emitter `{v}` has {infinite} infinite cells; proper needs exactly 1"));
            }
        }
    }
    PartitionReport { valid, proper, cell_counts: cell_counts(g, r), diagnostics }
}

/// Checks an in-partition: `valid` when the cells partition every `r⁻¹(v)`,
/// `proper` when no sink and no infinite emitter is split into two or more
/// cells.
pub fn validate_in_partition(g: &Graph, p: &InPartition) -> Result<PartitionReport> {
    let r = p.resolve(g)?;
    Ok(in_report(g, &r))
}

pub(crate) fn in_report(g: &Graph, r: &Resolved) -> PartitionReport {
    let mut diagnostics = check_axioms(g, Side::In, r);
    let valid = diagnostics.is_empty();
    let mut proper = valid;
    if valid {
        for (vi, v) in g.vertices().iter().enumerate() {
            let m = r.m(vi);
            if m <= 1 {
                continue;
            }
            if g.is_sink(v) {
                proper = false;
                diagnostics.push(format!("in-split at sink `{v}` into {m} cells"));
            } else if g.is_infinite_emitter(v) {
                proper = false;
                diagnostics.push(format!("in-split at infinite emitter `{v}` into {m} cells"));
            }
        }
    }
    PartitionReport { valid, proper, cell_counts: cell_counts(g, r), diagnostics }
}
