//! Drinen source/range vectors and the out-delayed `d_s(E)` and in-delayed
//! `d_r(E)` graphs they produce.

use std::collections::BTreeMap;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{Bundle, BundleSet, Cut, Graph, NameSet};
use crate::moves::partition::{side_bundles, InSide, OutSide, PartitionSide, Side};
use crate::moves::split::{down, up, IdentityCheck};
use crate::mult::Mult;

/// A delay in ℕ ∪ {∞}; only vertices may carry `Inf`.
pub type Delay = Mult;

/// Depth at which infinite tails and heads are cut off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    depth: u64,
}

impl TruncationSpec {
    pub const DEFAULT_DEPTH: u64 = 8;

    pub fn new(depth: u64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Precondition("truncation depth must be at least 1".into()));
        }
        Ok(TruncationSpec { depth })
    }

    pub fn depth(self) -> u64 {
        self.depth
    }
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec { depth: Self::DEFAULT_DEPTH }
    }
}

/// `count` edges of a bundle sharing one delay value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayClass {
    pub delay: u64,
    pub count: Mult,
}

/// The remaining (infinitely many) edges of an infinite bundle, one edge per
/// delay value `from`, `from + step`, `from + 2·step`, ….
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumeration {
    pub from: u64,
    #[serde(default = "unit_step")]
    pub step: u64,
}

fn unit_step() -> u64 {
    1
}

/// Delay data for the edges of one bundle.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDelays {
    #[serde(default, rename = "delays")]
    pub classes: Vec<DelayClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enumerate: Option<Enumeration>,
}

impl BundleDelays {
    pub fn uniform(delay: u64, count: Mult) -> Self {
        BundleDelays { classes: vec![DelayClass { delay, count }], enumerate: None }
    }

    /// Supremum of the delays of this bundle's edges.
    pub fn sup(&self) -> Delay {
        if self.enumerate.is_some() {
            return Mult::Inf;
        }
        Mult::Fin(self.classes.iter().map(|c| c.delay).max().unwrap_or(0))
    }

    fn total(&self) -> Mult {
        let listed: Mult = self.classes.iter().map(|c| c.count).sum();
        if self.enumerate.is_some() {
            Mult::Inf
        } else {
            listed
        }
    }

    /// Edge counts per delay value up to and including `limit`, plus the
    /// number of edges beyond it.
    fn levels(&self, limit: u64) -> (BTreeMap<u64, Mult>, Mult) {
        let mut kept: BTreeMap<u64, Mult> = BTreeMap::new();
        let mut dropped = Mult::ZERO;
        for c in &self.classes {
            if c.delay <= limit {
                let e = kept.entry(c.delay).or_insert(Mult::ZERO);
                *e = *e + c.count;
            } else {
                dropped = dropped + c.count;
            }
        }
        if let Some(en) = self.enumerate {
            let mut k = en.from;
            while k <= limit {
                let e = kept.entry(k).or_insert(Mult::ZERO);
                *e = *e + Mult::ONE;
                k = match k.checked_add(en.step) {
                    Some(next) => next,
                    None => break,
                };
            }
            dropped = Mult::Inf;
        }
        (kept, dropped)
    }
}

/// A map from vertices and edges to delays. Vertices without an entry get
/// delay 0; bundles without an entry have all their edges at delay 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelayVector<S> {
    vertices: BTreeMap<String, Delay>,
    edges: BTreeMap<String, BundleDelays>,
    _side: PhantomData<S>,
}

/// Governs out-delays: axioms are stated on `s⁻¹(v)`.
pub type DrinenSourceVector = DelayVector<OutSide>;
/// Governs in-delays: axioms are stated on `r⁻¹(v)`.
pub type DrinenRangeVector = DelayVector<InSide>;

impl<S> Default for DelayVector<S> {
    fn default() -> Self {
        DelayVector { vertices: BTreeMap::new(), edges: BTreeMap::new(), _side: PhantomData }
    }
}

#[derive(Serialize, Deserialize)]
struct DelayVectorJson {
    #[serde(default)]
    vertices: BTreeMap<String, Delay>,
    #[serde(default)]
    edges: Vec<BundleDelaysJson>,
}

#[derive(Serialize, Deserialize)]
struct BundleDelaysJson {
    bundle: String,
    #[serde(flatten)]
    delays: BundleDelays,
}

impl<S: PartitionSide> DelayVector<S> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn with_vertex(mut self, v: impl Into<String>, d: Delay) -> Self {
        self.vertices.insert(v.into(), d);
        self
    }

    pub fn with_bundle(mut self, bundle: impl Into<String>, delays: BundleDelays) -> Self {
        self.edges.insert(bundle.into(), delays);
        self
    }

    pub fn vertex_delay(&self, v: &str) -> Delay {
        self.vertices.get(v).copied().unwrap_or(Mult::ZERO)
    }

    pub fn bundle_delays(&self, b: &Bundle) -> BundleDelays {
        self.edges.get(&b.id).cloned().unwrap_or_else(|| BundleDelays::uniform(0, b.mult))
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let j: DelayVectorJson = serde_json::from_value(v.clone())?;
        let mut out = DelayVector { vertices: j.vertices, ..Self::default() };
        for e in j.edges {
            if out.edges.insert(e.bundle.clone(), e.delays).is_some() {
                return Err(Error::Parse(format!("bundle `{}` listed twice", e.bundle)));
            }
        }
        Ok(out)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json_value(&serde_json::from_str(s)?)
    }

    pub fn to_json_value(&self) -> Value {
        let j = DelayVectorJson {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|(b, d)| BundleDelaysJson { bundle: b.clone(), delays: d.clone() })
                .collect(),
        };
        serde_json::to_value(j).expect("delay vector serializes")
    }

    /// True when every vertex and edge has delay 0 on `g`.
    pub fn is_zero_on(&self, g: &Graph) -> bool {
        g.vertices().iter().all(|v| self.vertex_delay(v).is_zero())
            && g.bundles().iter().all(|b| self.bundle_delays(b).sup().is_zero())
    }

    fn check_refs(&self, g: &Graph) -> Result<()> {
        for v in self.vertices.keys() {
            g.vertex_index(v)?;
        }
        for b in self.edges.keys() {
            g.bundle(b)?;
        }
        Ok(())
    }
}

/// Verdict of a delay-vector validator. `strictly_proper` is only decided
/// for source vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DelayReport {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strictly_proper: Option<bool>,
    pub diagnostics: Vec<String>,
}

fn check_axioms<S: PartitionSide>(g: &Graph, d: &DelayVector<S>) -> Vec<String> {
    let mut diags = Vec::new();
    for b in g.bundles() {
        let bd = d.bundle_delays(b);
        if bd.classes.iter().any(|c| c.count.is_zero()) {
            diags.push(format!("bundle `{}` lists a delay class with count 0", b.id));
        }
        if let Some(en) = bd.enumerate {
            if en.step == 0 {
                diags.push(format!("bundle `{}` enumerates with step 0", b.id));
            }
        }
        match b.mult {
            Mult::Fin(k) => {
                if bd.enumerate.is_some() || bd.classes.iter().any(|c| c.count.is_inf()) {
                    diags.push(format!("finite bundle `{}` cannot carry infinitely many delays", b.id));
                } else if bd.total() != Mult::Fin(k) {
                    diags.push(format!("delay classes of `{}` cover {} edges, expected {k}", b.id, bd.total()));
                }
            }
            Mult::Inf => {
                if !bd.total().is_inf() {
                    diags.push(format!("infinite bundle `{}` has delays for only {} edges", b.id, bd.total()));
                }
            }
        }
    }
    for v in g.vertices() {
        let dv = d.vertex_delay(v);
        let incident: Vec<usize> = side_bundles(g, v, S::SIDE).collect();
        let (rule, exempt, singular) = match S::SIDE {
            Side::Out => ("a sink or an infinite emitter", g.is_sink(v), g.is_infinite_emitter(v)),
            Side::In => ("a source or an infinite receiver", g.is_source(v), g.is_infinite_receiver(v)),
        };
        if !incident.is_empty() {
            let sup = incident.iter().map(|&b| d.bundle_delays(&g.bundles()[b]).sup()).max().unwrap_or(Mult::ZERO);
            if sup != dv {
                diags.push(format!("delay of `{v}` is {dv} but the supremum over its edges is {sup}"));
            }
        }
        if dv.is_inf() && !(exempt || singular) {
            diags.push(format!("`{v}` has infinite delay but is not {rule}"));
        }
    }
    diags
}

/// Checks the Drinen source-vector axioms and strict properness: no copy
/// `v^i` of an infinite emitter may have infinite valency unless
/// `i = d(v) < ∞`.
pub fn validate_source_vector(g: &Graph, d: &DrinenSourceVector) -> Result<DelayReport> {
    d.check_refs(g)?;
    let mut diagnostics = check_axioms(g, d);
    let valid = diagnostics.is_empty();
    let mut strictly_proper = valid;
    if valid {
        for v in g.vertices() {
            if !g.is_infinite_emitter(v) {
                continue;
            }
            let dv = d.vertex_delay(v);
            for b in g.out_bundles(v) {
                for c in d.bundle_delays(b).classes.iter().filter(|c| c.count.is_inf()) {
                    let below_top = match dv {
                        Mult::Inf => true,
                        Mult::Fin(top) => c.delay < top,
                    };
                    if below_top {
                        strictly_proper = false;
                        diagnostics.push(format!(
                            "`{}` has infinite valency: infinitely many edges of `{}` leave it with delay {}",
                            up(v, c.delay),
                            b.id,
                            c.delay
                        ));
                    }
                }
            }
        }
    }
    Ok(DelayReport { valid, strictly_proper: Some(strictly_proper), diagnostics })
}

/// Checks the Drinen range-vector axioms.
pub fn validate_range_vector(g: &Graph, d: &DrinenRangeVector) -> Result<DelayReport> {
    d.check_refs(g)?;
    let diagnostics = check_axioms(g, d);
    Ok(DelayReport { valid: diagnostics.is_empty(), strictly_proper: None, diagnostics })
}

/// A delayed graph plus what truncation removed.
#[derive(Clone, Debug)]
pub struct Delayed {
    pub graph: Graph,
    /// Edges whose delay exceeds the truncation depth, per original bundle.
    pub dropped: BTreeMap<String, Mult>,
}

impl Delayed {
    pub fn dropped_total(&self) -> Mult {
        self.dropped.values().copied().sum()
    }
}

fn top(d: Delay, t: TruncationSpec) -> u64 {
    match d {
        Mult::Fin(k) => k,
        Mult::Inf => t.depth(),
    }
}

fn delayed<S: PartitionSide>(g: &Graph, d: &DelayVector<S>, t: TruncationSpec) -> Result<Delayed> {
    let side = S::SIDE;
    let copy = |v: &str, i: u64| match side {
        Side::Out => up(v, i),
        Side::In => down(v, i),
    };
    let mut names = NameSet::default();
    let mut bundles = BundleSet::default();
    let mut frontier = BTreeMap::new();
    for v in g.vertices() {
        let dv = d.vertex_delay(v);
        let n = top(dv, t);
        for i in 0..=n {
            names.push(copy(v, i))?;
        }
        for i in 1..=n {
            let (s, r) = match side {
                Side::Out => (copy(v, i - 1), copy(v, i)),
                Side::In => (copy(v, i), copy(v, i - 1)),
            };
            bundles.push(Bundle::new(copy(&format!("f({v})"), i), s, r, Mult::ONE));
        }
        if dv.is_inf() {
            let cut = match side {
                Side::Out => Cut::Tail,
                Side::In => Cut::Head,
            };
            frontier.insert(copy(v, n), cut);
        }
    }
    let mut dropped = BTreeMap::new();
    for b in g.bundles() {
        let anchor = match side {
            Side::Out => &b.src,
            Side::In => &b.rng,
        };
        let limit = top(d.vertex_delay(anchor), t);
        let (levels, lost) = d.bundle_delays(b).levels(limit);
        if !lost.is_zero() {
            dropped.insert(b.id.clone(), lost);
        }
        let single = levels.len() == 1;
        for (k, count) in levels {
            let id = if single { b.id.clone() } else { format!("{}@{k}", b.id) };
            let (s, r) = match side {
                Side::Out => (copy(&b.src, k), copy(&b.rng, 0)),
                Side::In => (copy(&b.src, 0), copy(&b.rng, k)),
            };
            bundles.push(Bundle::new(id, s, r, count));
        }
    }
    for (v, cut) in g.frontier() {
        for i in 0..=top(d.vertex_delay(v), t) {
            frontier.entry(copy(v, i)).or_insert(*cut);
        }
    }
    let mut graph = Graph::new(names.into_vec(), bundles.into_vec())?;
    if g.is_truncated() || !frontier.is_empty() {
        graph = graph.with_truncation(frontier)?;
    }
    Ok(Delayed { graph, dropped })
}

/// Builds `d_s(E)`, cutting infinite tails at depth `t`.
pub fn out_delay(g: &Graph, d: &DrinenSourceVector, t: TruncationSpec) -> Result<Graph> {
    Ok(out_delay_detailed(g, d, t)?.graph)
}

pub fn out_delay_detailed(g: &Graph, d: &DrinenSourceVector, t: TruncationSpec) -> Result<Delayed> {
    let report = validate_source_vector(g, d)?;
    if !report.valid {
        return Err(Error::InvalidDelayVector(report.diagnostics));
    }
    delayed(g, d, t)
}

/// Builds `d_r(E)`, cutting infinite heads at depth `t`.
pub fn in_delay(g: &Graph, d: &DrinenRangeVector, t: TruncationSpec) -> Result<Graph> {
    Ok(in_delay_detailed(g, d, t)?.graph)
}

pub fn in_delay_detailed(g: &Graph, d: &DrinenRangeVector, t: TruncationSpec) -> Result<Delayed> {
    let report = validate_range_vector(g, d)?;
    if !report.valid {
        return Err(Error::InvalidDelayVector(report.diagnostics));
    }
    delayed(g, d, t)
}

/// Count identities of a delay with all vertex delays finite: the vertex
/// count is `Σ (d(v) + 1)` and the edge mass grows by `Σ d(v)`.
pub fn delay_identities<S: PartitionSide>(g: &Graph, d: &DelayVector<S>, delayed: &Graph) -> Vec<IdentityCheck> {
    let delays: Vec<Delay> = g.vertices().iter().map(|v| d.vertex_delay(v)).collect();
    if delays.iter().any(|x| x.is_inf()) {
        return Vec::new();
    }
    let extra: Mult = delays.iter().copied().sum();
    let vertices = Mult::Fin(g.vertex_count() as u64) + extra;
    vec![
        IdentityCheck::new("vertex count", vertices, delayed.vertex_count()),
        IdentityCheck::new("edge mass", g.edge_mass() + extra, delayed.edge_mass()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iso::are_isomorphic;

    fn inf_edge() -> Graph {
        Graph::new(vec!["v".into(), "w".into()], vec![Bundle::new("b1", "v", "w", Mult::Inf)]).unwrap()
    }

    fn enumerate_from(k: u64) -> BundleDelays {
        BundleDelays { classes: vec![], enumerate: Some(Enumeration { from: k, step: 1 }) }
    }

    fn one_then_many() -> DrinenSourceVector {
        DrinenSourceVector::zero().with_vertex("v", Mult::Inf).with_bundle(
            "b1",
            BundleDelays {
                classes: vec![DelayClass { delay: 0, count: Mult::ONE }, DelayClass { delay: 1, count: Mult::Inf }],
                enumerate: Some(Enumeration { from: 2, step: 1 }),
            },
        )
    }

    #[test]
    fn desingularizing_vector_is_strictly_proper() {
        let d = DrinenSourceVector::zero()
            .with_vertex("v", Mult::Inf)
            .with_vertex("w", Mult::Inf)
            .with_bundle("b1", enumerate_from(0));
        let r = validate_source_vector(&inf_edge(), &d).unwrap();
        assert!(r.valid && r.strictly_proper == Some(true), "{r:?}");
    }

    #[test]
    fn infinite_class_below_top_is_not_strictly_proper() {
        let r = validate_source_vector(&inf_edge(), &one_then_many()).unwrap();
        assert!(r.valid && r.strictly_proper == Some(false), "{r:?}");
        assert!(r.diagnostics[0].contains("v^1"));
    }

    #[test]
    fn zero_vector_on_row_finite_graph() {
        let g = Graph::from_edge_list(&["a", "b"], [("a", "b", Mult::Fin(2)), ("b", "a", Mult::ONE)]).unwrap();
        let r = validate_source_vector(&g, &DrinenSourceVector::zero()).unwrap();
        assert!(r.valid && r.strictly_proper == Some(true));
        assert!(are_isomorphic(&g, &out_delay(&g, &DrinenSourceVector::zero(), TruncationSpec::default()).unwrap())
            .unwrap());
    }

    #[test]
    fn axiom_violations() {
        let g = Graph::from_edge_list(&["a", "b"], [("a", "b", Mult::Fin(2))]).unwrap();
        // sup mismatch
        let d = DrinenSourceVector::zero().with_vertex("a", Mult::Fin(3));
        assert!(!validate_source_vector(&g, &d).unwrap().valid);
        // infinite delay at a finite emitter
        let d = DrinenSourceVector::zero().with_vertex("a", Mult::Inf).with_bundle("e1", enumerate_from(0));
        assert!(!validate_source_vector(&g, &d).unwrap().valid);
        // counts must cover the bundle
        let d = DrinenSourceVector::zero().with_bundle("e1", BundleDelays::uniform(0, Mult::ONE));
        assert!(!validate_source_vector(&g, &d).unwrap().valid);
        // sinks may take any delay
        let d = DrinenSourceVector::zero().with_vertex("b", Mult::Inf);
        assert!(validate_source_vector(&g, &d).unwrap().valid);
        // unknown ids are errors
        let d = DrinenSourceVector::zero().with_vertex("zz", Mult::ONE);
        assert!(validate_source_vector(&g, &d).is_err());
    }

    #[test]
    fn out_delay_of_one_then_many() {
        let t = TruncationSpec::new(3).unwrap();
        let out = out_delay_detailed(&inf_edge(), &one_then_many(), t).unwrap();
        let h = &out.graph;
        assert!(h.is_truncated());
        assert_eq!(h.frontier().get("v^3"), Some(&Cut::Tail));
        let want = Graph::from_edge_list(
            &["v^0", "v^1", "v^2", "v^3", "w^0"],
            [
                ("v^0", "v^1", Mult::ONE),
                ("v^1", "v^2", Mult::ONE),
                ("v^2", "v^3", Mult::ONE),
                ("v^0", "w^0", Mult::ONE),
                ("v^1", "w^0", Mult::Inf),
                ("v^2", "w^0", Mult::ONE),
                ("v^3", "w^0", Mult::ONE),
            ],
        )
        .unwrap();
        assert!(are_isomorphic(h, &want).unwrap());
        assert_eq!(out.dropped_total(), Mult::Inf);
    }

    #[test]
    fn finite_delays_count_identities() {
        let g = Graph::from_edge_list(&["a", "b"], [("a", "b", Mult::Fin(2)), ("b", "a", Mult::ONE)]).unwrap();
        let d = DrinenSourceVector::zero().with_vertex("a", Mult::Fin(2)).with_bundle(
            "e1",
            BundleDelays {
                classes: vec![DelayClass { delay: 0, count: Mult::ONE }, DelayClass { delay: 2, count: Mult::ONE }],
                enumerate: None,
            },
        );
        let h = out_delay(&g, &d, TruncationSpec::default()).unwrap();
        assert!(!h.is_truncated());
        let checks = delay_identities(&g, &d, &h);
        assert_eq!(checks.len(), 2);
        assert!(checks.iter().all(|c| c.ok), "{checks:?}");
        assert_eq!(h.out_degree("a^0"), Mult::Fin(2));
        assert_eq!(h.out_degree("a^2"), Mult::ONE);
    }

    #[test]
    fn in_delay_spreads_infinite_bundle() {
        let d = DrinenRangeVector::zero().with_vertex("w", Mult::Inf).with_bundle("b1", enumerate_from(0));
        assert!(validate_range_vector(&inf_edge(), &d).unwrap().valid);
        let h = in_delay(&inf_edge(), &d, TruncationSpec::new(3).unwrap()).unwrap();
        let want = Graph::from_edge_list(
            &["v_0", "w_0", "w_1", "w_2", "w_3"],
            [
                ("w_3", "w_2", Mult::ONE),
                ("w_2", "w_1", Mult::ONE),
                ("w_1", "w_0", Mult::ONE),
                ("v_0", "w_0", Mult::ONE),
                ("v_0", "w_1", Mult::ONE),
                ("v_0", "w_2", Mult::ONE),
                ("v_0", "w_3", Mult::ONE),
            ],
        )
        .unwrap();
        assert!(are_isomorphic(&h, &want).unwrap());
        assert_eq!(h.frontier().get("w_3"), Some(&Cut::Head));
    }

    #[test]
    fn range_vector_axioms() {
        assert!(validate_range_vector(&inf_edge(), &DrinenRangeVector::zero()).unwrap().valid);
        // infinite delay at a vertex receiving finitely many edges
        let g = Graph::from_edge_list(&["a", "b"], [("a", "b", Mult::ONE)]).unwrap();
        let d = DrinenRangeVector::zero().with_vertex("b", Mult::Inf);
        assert!(!validate_range_vector(&g, &d).unwrap().valid);
        // sources may take an infinite delay
        let d = DrinenRangeVector::zero().with_vertex("a", Mult::Inf);
        assert!(validate_range_vector(&g, &d).unwrap().valid);
    }

    #[test]
    fn json_round_trip() {
        let d = one_then_many();
        let back = DrinenSourceVector::from_json_value(&d.to_json_value()).unwrap();
        assert_eq!(back, d);
        let parsed = DrinenSourceVector::from_json_str(
            r#"{"vertices":{"v":"inf","w":0},"edges":[{"bundle":"b1","delays":[{"delay":0,"count":1},{"delay":1,"count":"inf"}],"enumerate":{"from":2}}]}"#,
        )
        .unwrap();
        assert_eq!(parsed.vertex_delay("v"), Mult::Inf);
        assert_eq!(parsed.bundle_delays(&Bundle::new("b1", "v", "w", Mult::Inf)), d.bundle_delays(&Bundle::new("b1", "v", "w", Mult::Inf)));
    }
}
