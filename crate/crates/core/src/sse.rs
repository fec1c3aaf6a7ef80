//! Elementary strong shift equivalence of graphs: bipartite bridge graphs
//! whose paths of length two reproduce the edges of the two graphs.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{Bundle, BundleSet, Graph, GraphJson};
use crate::matrixlab::IntMatrix;
use crate::moves::partition::{in_report, out_report, InPartition, OutPartition};
use crate::moves::split::{down, up};
use crate::mult::Mult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromOutSplit,
    FromInSplit,
    User,
}

/// A vertex of `g_i` and the bridge node standing for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartEntry {
    pub vertex: String,
    pub node: String,
}

impl PartEntry {
    pub fn same(name: impl Into<String>) -> Self {
        let name = name.into();
        PartEntry { vertex: name.clone(), node: name }
    }
}

/// A bridge graph `E_3` with its vertices split into the copy of `g_1`
/// (`part1`) and the copy of `g_2` (`part2`).
#[derive(Clone, Debug)]
pub struct EsseWitness {
    pub graph: Graph,
    pub part1: Vec<PartEntry>,
    pub part2: Vec<PartEntry>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PartEntryJson {
    Name(String),
    Entry(PartEntry),
}

#[derive(Serialize, Deserialize)]
struct WitnessJson {
    part1: Vec<PartEntryJson>,
    part2: Vec<PartEntryJson>,
    graph: GraphJson,
    #[serde(default = "user")]
    provenance: Provenance,
}

fn user() -> Provenance {
    Provenance::User
}

fn entries_to_json(part: &[PartEntry]) -> Vec<PartEntryJson> {
    part.iter()
        .map(|e| if e.vertex == e.node { PartEntryJson::Name(e.node.clone()) } else { PartEntryJson::Entry(e.clone()) })
        .collect()
}

fn entries_from_json(part: Vec<PartEntryJson>) -> Vec<PartEntry> {
    part.into_iter()
        .map(|e| match e {
            PartEntryJson::Name(n) => PartEntry::same(n),
            PartEntryJson::Entry(e) => e,
        })
        .collect()
}

impl EsseWitness {
    /// `{"part1":[..],"part2":[..],"graph":{..},"provenance":".."}`. A part
    /// entry is a vertex name shared by `g_i` and the bridge, or
    /// `{"vertex":..,"node":..}` when they differ.
    pub fn from_json_value(v: &Value) -> Result<Self> {
        let j: WitnessJson = serde_json::from_value(v.clone())?;
        Ok(EsseWitness {
            graph: Graph::try_from(j.graph)?,
            part1: entries_from_json(j.part1),
            part2: entries_from_json(j.part2),
            provenance: j.provenance,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }

    pub fn to_json_value(&self) -> Value {
        let j = WitnessJson {
            part1: entries_to_json(&self.part1),
            part2: entries_to_json(&self.part2),
            graph: GraphJson::from(&self.graph),
            provenance: self.provenance,
        };
        serde_json::to_value(j).expect("witness serializes")
    }

    /// The same bridge read from the other side.
    pub fn swapped(&self) -> Self {
        EsseWitness {
            graph: self.graph.clone(),
            part1: self.part2.clone(),
            part2: self.part1.clone(),
            provenance: self.provenance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EsseReport {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

/// Adjacency blocks of a verified layout: `a1`, `a2` are the adjacency
/// matrices of `g_1`, `g_2` in part order, `r` the `part1 → part2` block and
/// `s` the `part2 → part1` block of the bridge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgeBlocks {
    pub a1: IntMatrix,
    pub a2: IntMatrix,
    pub r: IntMatrix,
    pub s: IntMatrix,
}

fn check_standing(g: &Graph, which: &str) -> Result<()> {
    if let Some(b) = g.bundles().iter().find(|b| b.mult.is_inf()) {
        return Err(Error::Precondition(format!("{which} has an infinite bundle `{}`", b.id)));
    }
    if let Some(v) = g.sinks().first() {
        return Err(Error::Precondition(format!("{which} has a sink `{v}`")));
    }
    Ok(())
}

/// Node indices of a part, after checking it lists each vertex of `g` once.
fn part_layout(g: &Graph, part: &[PartEntry], bridge: &Graph, which: &str) -> Result<Vec<(usize, usize)>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(part.len());
    for e in part {
        if !seen.insert(e.vertex.as_str()) {
            return Err(Error::Precondition(format!("{which} lists vertex `{}` twice", e.vertex)));
        }
        let gi = g
            .vertex_index(&e.vertex)
            .map_err(|_| Error::Precondition(format!("{which} names `{}`, which is not a vertex of its graph", e.vertex)))?;
        let ni = bridge
            .vertex_index(&e.node)
            .map_err(|_| Error::Precondition(format!("{which} names bridge node `{}`, which does not exist", e.node)))?;
        out.push((gi, ni));
    }
    if out.len() != g.vertex_count() {
        return Err(Error::Precondition(format!(
            "{which} covers {} of the graph's {} vertices",
            out.len(),
            g.vertex_count()
        )));
    }
    Ok(out)
}

/// `(vertex index in its graph, node index in the bridge)` per part entry.
type Layout = Vec<(usize, usize)>;

fn layouts(g1: &Graph, g2: &Graph, w: &EsseWitness) -> Result<(Layout, Layout)> {
    check_standing(g1, "first graph")?;
    check_standing(g2, "second graph")?;
    if let Some(b) = w.graph.bundles().iter().find(|b| b.mult.is_inf()) {
        return Err(Error::Precondition(format!("bridge has an infinite bundle `{}`", b.id)));
    }
    let p1 = part_layout(g1, &w.part1, &w.graph, "part1")?;
    let p2 = part_layout(g2, &w.part2, &w.graph, "part2")?;
    let mut owner = vec![0u8; w.graph.vertex_count()];
    for (k, part) in [(1u8, &p1), (2u8, &p2)] {
        for &(_, ni) in part.iter() {
            if owner[ni] != 0 {
                return Err(Error::Precondition(format!(
                    "bridge node `{}` is in both parts",
                    w.graph.vertices()[ni]
                )));
            }
            owner[ni] = k;
        }
    }
    if let Some(ni) = owner.iter().position(|&o| o == 0) {
        return Err(Error::Precondition(format!("bridge node `{}` is in neither part", w.graph.vertices()[ni])));
    }
    Ok((p1, p2))
}

/// Checks the bridge conditions: the parts split the bridge's vertices and
/// match the two vertex sets, every bridge edge crosses between the parts,
/// and for each ordered pair `(x, y)` in part `i` the number of edges
/// `x → y` of `g_i` equals the number of paths of length two from `x` to
/// `y` in the bridge, counted with multiplicity.
pub fn esse_verify(g1: &Graph, g2: &Graph, w: &EsseWitness) -> Result<EsseReport> {
    let (p1, p2) = layouts(g1, g2, w)?;
    let mut diagnostics = Vec::new();
    let mut part_of = vec![0u8; w.graph.vertex_count()];
    for &(_, ni) in &p1 {
        part_of[ni] = 1;
    }
    for &(_, ni) in &p2 {
        part_of[ni] = 2;
    }
    for b in w.graph.bundles() {
        let s = w.graph.vertex_index(&b.src)?;
        let r = w.graph.vertex_index(&b.rng)?;
        if part_of[s] == part_of[r] {
            diagnostics.push(format!("bridge edge `{}` stays inside part{}", b.id, part_of[s]));
        }
    }
    let e3 = w.graph.finite_adjacency().expect("checked finite");
    let counts = |from: &[(usize, usize)], via: &[(usize, usize)], g: &Graph, k: u8, diags: &mut Vec<String>| {
        let a = g.finite_adjacency().expect("checked finite");
        for &(gx, nx) in from {
            for &(gy, ny) in from {
                let paths: u64 = via.iter().map(|&(_, nz)| e3[nx][nz] * e3[nz][ny]).sum();
                if paths != a[gx][gy] {
                    diags.push(format!(
                        "part{k} ({}, {}): graph has {} edges, bridge has {} paths of length 2",
                        g.vertices()[gx],
                        g.vertices()[gy],
                        a[gx][gy],
                        paths
                    ));
                }
            }
        }
    };
    counts(&p1, &p2, g1, 1, &mut diagnostics);
    counts(&p2, &p1, g2, 2, &mut diagnostics);
    Ok(EsseReport { ok: diagnostics.is_empty(), diagnostics })
}

/// Splits the bridge into its two crossing blocks, ordered as the parts are.
pub fn bridge_blocks(g1: &Graph, g2: &Graph, w: &EsseWitness) -> Result<BridgeBlocks> {
    let (p1, p2) = layouts(g1, g2, w)?;
    let e3 = w.graph.finite_adjacency().expect("checked finite");
    let block = |rows: &[(usize, usize)], cols: &[(usize, usize)], a: &[Vec<u64>], pick: fn(&(usize, usize)) -> usize| {
        let data = rows
            .iter()
            .map(|x| cols.iter().map(|y| BigInt::from(a[pick(x)][pick(y)])).collect())
            .collect();
        IntMatrix::from_rows(data).expect("rectangular block")
    };
    let node = |e: &(usize, usize)| e.1;
    let vertex = |e: &(usize, usize)| e.0;
    let a1 = g1.finite_adjacency().expect("checked finite");
    let a2 = g2.finite_adjacency().expect("checked finite");
    Ok(BridgeBlocks {
        a1: block(&p1, &p1, &a1, vertex),
        a2: block(&p2, &p2, &a2, vertex),
        r: block(&p1, &p2, &e3, node),
        s: block(&p2, &p1, &e3, node),
    })
}

/// Bridge node names: `g` keeps its vertex names, the split copies keep
/// theirs unless that clashes, in which case primes are appended.
struct Nodes {
    taken: HashSet<String>,
    part1: Vec<PartEntry>,
    part2: Vec<PartEntry>,
}

impl Nodes {
    fn new(g: &Graph) -> Self {
        Nodes {
            taken: g.vertices().iter().cloned().collect(),
            part1: g.vertices().iter().map(|v| PartEntry::same(v.clone())).collect(),
            part2: Vec::new(),
        }
    }

    fn add(&mut self, vertex: String) -> String {
        let mut node = vertex.clone();
        while self.taken.contains(&node) {
            node.push('\'');
        }
        self.taken.insert(node.clone());
        self.part2.push(PartEntry { vertex, node: node.clone() });
        node
    }

    fn finish(self, bundles: BundleSet, provenance: Provenance) -> Result<EsseWitness> {
        let vertices = self.part1.iter().chain(&self.part2).map(|e| e.node.clone()).collect();
        Ok(EsseWitness {
            graph: Graph::new(vertices, bundles.into_vec())?,
            part1: self.part1,
            part2: self.part2,
            provenance,
        })
    }
}

/// The bridge between `g` and its out-split: an edge `v → v^i` for every
/// cell, and an edge `v^i → r(e)` for every edge `e` in cell `i` of `v`.
pub fn esse_bridge_out_split(g: &Graph, p: &OutPartition) -> Result<EsseWitness> {
    check_standing(g, "graph")?;
    let r = p.resolve(g)?;
    let report = out_report(g, &r);
    if !report.valid {
        return Err(Error::InvalidPartition(report.diagnostics));
    }
    let mut nodes = Nodes::new(g);
    let mut bundles = BundleSet::default();
    for (vi, cells) in r.per_vertex.iter().enumerate() {
        let v = &g.vertices()[vi];
        for (ci, cell) in cells.iter().enumerate() {
            let copy = nodes.add(up(v, ci + 1));
            bundles.push(Bundle::new(format!("{v}->{copy}"), v.clone(), copy.clone(), Mult::ONE));
            for &(b, amount) in cell {
                let e = &g.bundles()[b];
                bundles.push(Bundle::new(format!("{}@{copy}", e.id), copy.clone(), e.rng.clone(), amount));
            }
        }
    }
    nodes.finish(bundles, Provenance::FromOutSplit)
}

/// The bridge between `g` and its in-split: an edge `s(e) → r(e)_i` for every
/// edge `e` in cell `i` of its range, and an edge `v_i → v` for every cell. A
/// source keeps a single copy.
pub fn esse_bridge_in_split(g: &Graph, p: &InPartition) -> Result<EsseWitness> {
    check_standing(g, "graph")?;
    let r = p.resolve(g)?;
    let report = in_report(g, &r);
    if !report.valid {
        return Err(Error::InvalidPartition(report.diagnostics));
    }
    let mut nodes = Nodes::new(g);
    let mut bundles = BundleSet::default();
    let mut copies: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (vi, cells) in r.per_vertex.iter().enumerate() {
        let v = &g.vertices()[vi];
        let names: Vec<String> = if cells.is_empty() {
            vec![nodes.add(v.clone())]
        } else {
            (1..=cells.len()).map(|i| nodes.add(down(v, i))).collect()
        };
        for copy in &names {
            bundles.push(Bundle::new(format!("{copy}->{v}"), copy.clone(), v.clone(), Mult::ONE));
        }
        copies.insert(vi, names);
    }
    for (vi, cells) in r.per_vertex.iter().enumerate() {
        for (ci, cell) in cells.iter().enumerate() {
            let copy = &copies[&vi][ci];
            for &(b, amount) in cell {
                let e = &g.bundles()[b];
                bundles.push(Bundle::new(format!("{}@{copy}", e.id), e.src.clone(), copy.clone(), amount));
            }
        }
    }
    nodes.finish(bundles, Provenance::FromInSplit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moves::partition::Share;
    use crate::moves::split::{in_split, out_split};

    fn lp() -> Graph {
        Graph::from_edge_list(&["v"], [("v", "v", Mult::ONE)]).unwrap()
    }

    fn b2() -> Graph {
        Graph::from_edge_list(&["v"], [("v", "v", Mult::ONE), ("v", "v", Mult::ONE)]).unwrap()
    }

    fn two_cycle() -> Graph {
        Graph::from_edge_list(&["u", "v"], [("u", "v", Mult::ONE), ("v", "u", Mult::ONE)]).unwrap()
    }

    fn check_factorization(g1: &Graph, g2: &Graph, w: &EsseWitness) {
        let b = bridge_blocks(g1, g2, w).unwrap();
        assert_eq!(b.r.mul(&b.s).unwrap(), b.a1);
        assert_eq!(b.s.mul(&b.r).unwrap(), b.a2);
    }

    #[test]
    fn loop_with_itself() {
        let bridge =
            Graph::from_edge_list(&["a", "b"], [("a", "b", Mult::ONE), ("b", "a", Mult::ONE)]).unwrap();
        let w = EsseWitness {
            graph: bridge,
            part1: vec![PartEntry { vertex: "v".into(), node: "a".into() }],
            part2: vec![PartEntry { vertex: "v".into(), node: "b".into() }],
            provenance: Provenance::User,
        };
        assert!(esse_verify(&lp(), &lp(), &w).unwrap().ok);
        let t = esse_bridge_out_split(&lp(), &OutPartition::trivial()).unwrap();
        assert_eq!(t.graph.vertex_count(), 2);
        assert!(esse_verify(&lp(), &out_split(&lp(), &OutPartition::trivial()).unwrap(), &t).unwrap().ok);
    }

    #[test]
    fn out_split_bridges() {
        let p = OutPartition::trivial()
            .with_cells("v", vec![vec![Share::new("e1", Mult::ONE)], vec![Share::new("e2", Mult::ONE)]]);
        let h = out_split(&b2(), &p).unwrap();
        let w = esse_bridge_out_split(&b2(), &p).unwrap();
        assert_eq!(w.graph.out_degree("v"), Mult::Fin(2));
        assert_eq!(w.graph.edge_mass(), Mult::Fin(4));
        assert!(esse_verify(&b2(), &h, &w).unwrap().ok);
        check_factorization(&b2(), &h, &w);

        let c = two_cycle();
        let w = esse_bridge_out_split(&c, &OutPartition::trivial()).unwrap();
        assert_eq!(w.graph.vertex_count(), 4);
        let h = out_split(&c, &OutPartition::trivial()).unwrap();
        assert!(esse_verify(&c, &h, &w).unwrap().ok);
        assert!(esse_verify(&h, &c, &w.swapped()).unwrap().ok);
    }

    #[test]
    fn deleting_a_crossing_edge_breaks_the_bridge() {
        let c = two_cycle();
        let w = esse_bridge_out_split(&c, &OutPartition::trivial()).unwrap();
        let h = out_split(&c, &OutPartition::trivial()).unwrap();
        let kept: Vec<Bundle> = w.graph.bundles()[1..].to_vec();
        let broken = EsseWitness { graph: Graph::new(w.graph.vertices().to_vec(), kept).unwrap(), ..w.clone() };
        let r = esse_verify(&c, &h, &broken).unwrap();
        assert!(!r.ok);
        assert!(r.diagnostics.iter().any(|d| d.contains("paths of length 2")), "{r:?}");
    }

    #[test]
    fn in_split_bridges() {
        let c = two_cycle();
        let w = esse_bridge_in_split(&c, &InPartition::trivial()).unwrap();
        let h = in_split(&c, &InPartition::trivial()).unwrap();
        assert!(esse_verify(&c, &h, &w).unwrap().ok);
        check_factorization(&c, &h, &w);

        let p = InPartition::trivial()
            .with_cells("v", vec![vec![Share::new("e1", Mult::ONE)], vec![Share::new("e2", Mult::ONE)]]);
        let h = in_split(&b2(), &p).unwrap();
        let w = esse_bridge_in_split(&b2(), &p).unwrap();
        assert!(esse_verify(&b2(), &h, &w).unwrap().ok);
        check_factorization(&b2(), &h, &w);
    }

    #[test]
    fn in_split_bridge_with_a_source() {
        let g = Graph::from_edge_list(&["s", "v"], [("s", "v", Mult::ONE), ("v", "v", Mult::Fin(2))]).unwrap();
        let p = InPartition::trivial().with_cells(
            "v",
            vec![vec![Share::new("e1", Mult::ONE), Share::new("e2", Mult::ONE)], vec![Share::new("e2", Mult::ONE)]],
        );
        let h = in_split(&g, &p).unwrap();
        let w = esse_bridge_in_split(&g, &p).unwrap();
        assert!(w.part2.iter().any(|e| e.vertex == "s" && e.node == "s'"));
        assert!(esse_verify(&g, &h, &w).unwrap().ok);
        check_factorization(&g, &h, &w);
    }

    #[test]
    fn structural_errors() {
        let path = Graph::from_edge_list(&["u", "v"], [("u", "v", Mult::ONE)]).unwrap();
        assert!(esse_bridge_out_split(&path, &OutPartition::trivial()).is_err());
        let w = esse_bridge_out_split(&lp(), &OutPartition::trivial()).unwrap();
        assert!(esse_verify(&lp(), &two_cycle(), &w).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = esse_bridge_in_split(&two_cycle(), &InPartition::trivial()).unwrap();
        let back = EsseWitness::from_json_value(&w.to_json_value()).unwrap();
        assert_eq!(back.part1, w.part1);
        assert_eq!(back.part2, w.part2);
        assert_eq!(back.provenance, Provenance::FromInSplit);
        let h = in_split(&two_cycle(), &InPartition::trivial()).unwrap();
        assert!(esse_verify(&two_cycle(), &h, &back).unwrap().ok);
    }
}
