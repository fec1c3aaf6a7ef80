//! Finite presentations of directed graphs whose parallel edges are grouped
//! into bundles with multiplicity in ℕ ∪ {∞}.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mult::Mult;

/// A family of parallel edges sharing source and range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub id: String,
    pub src: String,
    pub rng: String,
    pub mult: Mult,
}

impl Bundle {
    pub fn new(id: impl Into<String>, src: impl Into<String>, rng: impl Into<String>, mult: Mult) -> Self {
        Bundle { id: id.into(), src: src.into(), rng: rng.into(), mult }
    }
}

/// Which side of a frontier vertex was cut away by truncation.
///
/// A `Tail` frontier vertex had outgoing edges dropped (the end of a
/// truncated out-delay tail); a `Head` frontier vertex had incoming edges
/// dropped (the end of a truncated in-delay head).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cut {
    Tail,
    Head,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexProfile {
    pub is_sink: bool,
    pub is_source: bool,
    pub is_infinite_emitter: bool,
    pub is_infinite_receiver: bool,
    pub out_degree: Mult,
    pub in_degree: Mult,
}

/// An immutable directed graph with finitely many vertices and bundles.
#[derive(Clone, Debug)]
pub struct Graph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    bundles: Vec<Bundle>,
    bundle_index: HashMap<String, usize>,
    truncated: bool,
    frontier: BTreeMap<String, Cut>,
}

impl Graph {
    pub fn new(vertices: Vec<String>, bundles: Vec<Bundle>) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(v.clone()));
            }
        }
        let mut bundle_index = HashMap::with_capacity(bundles.len());
        for (i, b) in bundles.iter().enumerate() {
            if bundle_index.insert(b.id.clone(), i).is_some() {
                return Err(Error::DuplicateBundle(b.id.clone()));
            }
            if b.mult.is_zero() {
                return Err(Error::ZeroMultiplicity(b.id.clone()));
            }
            for end in [&b.src, &b.rng] {
                if !index.contains_key(end) {
                    return Err(Error::UnknownVertex(end.clone()));
                }
            }
        }
        Ok(Graph { vertices, index, bundles, bundle_index, truncated: false, frontier: BTreeMap::new() })
    }

    /// Builds a graph from `(src, rng, mult)` triples; bundles are named
    /// `e1`, `e2`, … in order.
    pub fn from_edge_list<'a>(
        vertices: &[&str],
        edges: impl IntoIterator<Item = (&'a str, &'a str, Mult)>,
    ) -> Result<Self> {
        let bundles = edges
            .into_iter()
            .enumerate()
            .map(|(i, (s, r, m))| Bundle::new(format!("e{}", i + 1), s, r, m))
            .collect();
        Graph::new(vertices.iter().map(|v| v.to_string()).collect(), bundles)
    }

    /// Marks the graph as a truncation of an infinite graph.
    pub fn with_truncation(mut self, frontier: BTreeMap<String, Cut>) -> Result<Self> {
        for v in frontier.keys() {
            if !self.index.contains_key(v) {
                return Err(Error::UnknownVertex(v.clone()));
            }
        }
        self.truncated = true;
        self.frontier = frontier;
        Ok(self)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn frontier(&self) -> &BTreeMap<String, Cut> {
        &self.frontier
    }

    pub fn has_vertex(&self, v: &str) -> bool {
        self.index.contains_key(v)
    }

    pub fn vertex_index(&self, v: &str) -> Result<usize> {
        self.index.get(v).copied().ok_or_else(|| Error::UnknownVertex(v.to_string()))
    }

    pub fn bundle(&self, id: &str) -> Result<&Bundle> {
        self.bundle_index
            .get(id)
            .map(|&i| &self.bundles[i])
            .ok_or_else(|| Error::UnknownBundle(id.to_string()))
    }

    pub fn bundle_position(&self, id: &str) -> Result<usize> {
        self.bundle_index.get(id).copied().ok_or_else(|| Error::UnknownBundle(id.to_string()))
    }

    /// Bundles with source `v`, in declaration order.
    pub fn out_bundles<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a Bundle> + 'a {
        self.bundles.iter().filter(move |b| b.src == v)
    }

    /// Bundles with range `v`, in declaration order.
    pub fn in_bundles<'a>(&'a self, v: &'a str) -> impl Iterator<Item = &'a Bundle> + 'a {
        self.bundles.iter().filter(move |b| b.rng == v)
    }

    pub fn out_degree(&self, v: &str) -> Mult {
        self.out_bundles(v).map(|b| b.mult).sum()
    }

    pub fn in_degree(&self, v: &str) -> Mult {
        self.in_bundles(v).map(|b| b.mult).sum()
    }

    /// Total number of edges, counted with multiplicity.
    pub fn edge_mass(&self) -> Mult {
        self.bundles.iter().map(|b| b.mult).sum()
    }

    pub fn classify(&self, v: &str) -> Result<VertexProfile> {
        self.vertex_index(v)?;
        let out_degree = self.out_degree(v);
        let in_degree = self.in_degree(v);
        Ok(VertexProfile {
            is_sink: out_degree.is_zero(),
            is_source: in_degree.is_zero(),
            is_infinite_emitter: out_degree.is_inf(),
            is_infinite_receiver: in_degree.is_inf(),
            out_degree,
            in_degree,
        })
    }

    pub fn is_sink(&self, v: &str) -> bool {
        self.out_bundles(v).next().is_none()
    }

    pub fn is_source(&self, v: &str) -> bool {
        self.in_bundles(v).next().is_none()
    }

    pub fn is_infinite_emitter(&self, v: &str) -> bool {
        self.out_bundles(v).any(|b| b.mult.is_inf())
    }

    pub fn is_infinite_receiver(&self, v: &str) -> bool {
        self.in_bundles(v).any(|b| b.mult.is_inf())
    }

    pub fn sinks(&self) -> Vec<&str> {
        self.vertices.iter().map(String::as_str).filter(|v| self.is_sink(v)).collect()
    }

    pub fn sources(&self) -> Vec<&str> {
        self.vertices.iter().map(String::as_str).filter(|v| self.is_source(v)).collect()
    }

    pub fn has_infinite_bundle(&self) -> bool {
        self.bundles.iter().any(|b| b.mult.is_inf())
    }

    /// Every vertex emits finitely many edges.
    pub fn is_row_finite(&self) -> bool {
        !self.has_infinite_bundle()
    }

    /// Every vertex emits and receives finitely many edges. In a finite
    /// presentation this coincides with row-finiteness, since an infinite
    /// bundle makes both of its endpoints infinite.
    pub fn is_locally_finite(&self) -> bool {
        !self.vertices.iter().any(|v| self.is_infinite_emitter(v) || self.is_infinite_receiver(v))
    }

    /// Entry `(i, j)` is the number of edges from `order[i]` to `order[j]`.
    pub fn adjacency_matrix(&self, order: &[&str]) -> Result<Vec<Vec<Mult>>> {
        if order.len() != self.vertices.len() {
            return Err(Error::NotAPermutation);
        }
        let mut pos = HashMap::with_capacity(order.len());
        for (i, v) in order.iter().enumerate() {
            if !self.index.contains_key(*v) || pos.insert(*v, i).is_some() {
                return Err(Error::NotAPermutation);
            }
        }
        let n = order.len();
        let mut m = vec![vec![Mult::ZERO; n]; n];
        for b in &self.bundles {
            let (i, j) = (pos[b.src.as_str()], pos[b.rng.as_str()]);
            m[i][j] = m[i][j] + b.mult;
        }
        Ok(m)
    }

    /// Adjacency matrix in declaration order.
    pub fn adjacency(&self) -> Vec<Vec<Mult>> {
        let order: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        self.adjacency_matrix(&order).expect("declaration order is a permutation")
    }

    /// Finite adjacency matrix in declaration order, or `None` if some
    /// bundle is infinite.
    pub fn finite_adjacency(&self) -> Option<Vec<Vec<u64>>> {
        self.adjacency()
            .into_iter()
            .map(|row| row.into_iter().map(Mult::finite).collect::<Option<Vec<_>>>())
            .collect()
    }
}

/// Collects generated vertex names, rejecting duplicates.
#[derive(Default)]
pub(crate) struct NameSet {
    seen: HashSet<String>,
    order: Vec<String>,
}

impl NameSet {
    pub(crate) fn push(&mut self, name: String) -> Result<()> {
        if !self.seen.insert(name.clone()) {
            return Err(Error::NameCollision(name));
        }
        self.order.push(name);
        Ok(())
    }

    pub(crate) fn into_vec(self) -> Vec<String> {
        self.order
    }
}

/// Bundle ids of a construction, made unique when two generated ids clash.
#[derive(Default)]
pub(crate) struct BundleSet {
    ids: HashSet<String>,
    bundles: Vec<Bundle>,
}

impl BundleSet {
    pub(crate) fn push(&mut self, mut b: Bundle) {
        if self.ids.contains(&b.id) {
            let base = b.id.clone();
            let mut k = 2;
            while self.ids.contains(&format!("{base}~{k}")) {
                k += 1;
            }
            b.id = format!("{base}~{k}");
        }
        self.ids.insert(b.id.clone());
        self.bundles.push(b);
    }

    pub(crate) fn into_vec(self) -> Vec<Bundle> {
        self.bundles
    }
}

/// Serialized graph: `{"vertices":[..],"edges":[{"id","src","rng","mult"}]}`
/// with optional truncation flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub frontier: BTreeMap<String, Cut>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub src: String,
    pub rng: String,
    #[serde(default = "one")]
    pub mult: Mult,
}

fn one() -> Mult {
    Mult::ONE
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            vertices: g.vertices.clone(),
            edges: g
                .bundles
                .iter()
                .map(|b| EdgeJson { id: Some(b.id.clone()), src: b.src.clone(), rng: b.rng.clone(), mult: b.mult })
                .collect(),
            truncated: g.truncated,
            frontier: g.frontier.clone(),
        }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        let bundles = j
            .edges
            .into_iter()
            .enumerate()
            .map(|(i, e)| Bundle {
                id: e.id.unwrap_or_else(|| format!("e{}", i + 1)),
                src: e.src,
                rng: e.rng,
                mult: e.mult,
            })
            .collect();
        let g = Graph::new(j.vertices, bundles)?;
        if j.truncated || !j.frontier.is_empty() {
            g.with_truncation(j.frontier)
        } else {
            Ok(g)
        }
    }
}

impl Graph {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: GraphJson = serde_json::from_str(s)?;
        Graph::try_from(j)
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let j: GraphJson = serde_json::from_value(v.clone())?;
        Graph::try_from(j)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(GraphJson::from(self)).expect("graph serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.bundles.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -{}-> {}", b.src, b.mult, b.rng)?;
        }
        let isolated: Vec<&String> =
            self.vertices.iter().filter(|v| self.is_sink(v) && self.is_source(v)).collect();
        for v in isolated {
            write!(f, ", {v}")?;
        }
        write!(f, "}}")
    }
}
