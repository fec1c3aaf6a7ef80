//! Saturated hereditary vertex subsets and the graph-level invariants used to
//! tell two graphs apart.
//!
//! On a truncated graph, a vertex on a cut tail (`Cut::Tail`) is missing
//! the rest of its tail, so it is never forced into a set by the saturation
//! rule. Heads cut off at the frontier only remove incoming edges and change
//! nothing.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::{Cut, Graph};
use crate::matrixlab::{cokernel_invariant, CokernelInvariant};
use crate::mult::Mult;

pub type VertexSet = BTreeSet<String>;

/// Vertex count up to which `enumerate_sat_her` checks every subset.
pub const EXHAUSTIVE_LIMIT: usize = 20;
/// Default cap on the number of lattice members built by closure generation.
pub const DEFAULT_MEMBER_BUDGET: u64 = 100_000;

/// Index-based view of a graph for the closure rules. Sets are flag vectors
/// indexed like `g.vertices()`, which keeps bulk work free of allocation.
pub struct Closure {
    n: usize,
    succ: Vec<Vec<usize>>,
    /// `0 < |s⁻¹(w)| < ∞` and `w` not on a cut tail.
    forced: Vec<bool>,
}

impl Closure {
    pub fn new(g: &Graph) -> Self {
        let n = g.vertex_count();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        for b in g.bundles() {
            let s = g.vertex_index(&b.src).expect("bundle source exists");
            let r = g.vertex_index(&b.rng).expect("bundle range exists");
            succ[s].push(r);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        let forced = g
            .vertices()
            .iter()
            .map(|v| {
                matches!(g.out_degree(v), Mult::Fin(k) if k > 0) && g.frontier().get(v) != Some(&Cut::Tail)
            })
            .collect();
        Closure { n, succ, forced }
    }

    /// Least saturated hereditary superset of `set`.
    pub fn saturate(&self, mut set: Vec<bool>) -> Vec<bool> {
        let mut queue: VecDeque<usize> = (0..self.n).filter(|&v| set[v]).collect();
        loop {
            while let Some(v) = queue.pop_front() {
                for &w in &self.succ[v] {
                    if !set[w] {
                        set[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            // a newly forced vertex has all its successors inside already
            let mut grew = false;
            for w in 0..self.n {
                if !set[w] && self.forced[w] && self.succ[w].iter().all(|&x| set[x]) {
                    set[w] = true;
                    grew = true;
                }
            }
            if !grew {
                return set;
            }
        }
    }

    pub fn is_hereditary(&self, set: &[bool]) -> bool {
        (0..self.n).filter(|&v| set[v]).all(|v| self.succ[v].iter().all(|&w| set[w]))
    }

    pub fn is_saturated(&self, set: &[bool]) -> bool {
        (0..self.n).all(|w| set[w] || !self.forced[w] || self.succ[w].iter().any(|&x| !set[x]))
    }
}

fn to_flags(g: &Graph, s: &VertexSet) -> Result<Vec<bool>> {
    let mut flags = vec![false; g.vertex_count()];
    for v in s {
        flags[g.vertex_index(v)?] = true;
    }
    Ok(flags)
}

fn to_set(g: &Graph, flags: &[bool]) -> VertexSet {
    g.vertices().iter().zip(flags).filter(|(_, &f)| f).map(|(v, _)| v.clone()).collect()
}

/// The saturation `ΣH(S)`: close `S` under reachability, then keep adding
/// every vertex that emits finitely many (and at least one) edges all
/// landing inside, until nothing changes.
pub fn saturate(g: &Graph, s: &VertexSet) -> Result<VertexSet> {
    let c = Closure::new(g);
    Ok(to_set(g, &c.saturate(to_flags(g, s)?)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetFlags {
    pub hereditary: bool,
    pub saturated: bool,
}

pub fn classify_subset(g: &Graph, h: &VertexSet) -> Result<SubsetFlags> {
    let c = Closure::new(g);
    let flags = to_flags(g, h)?;
    Ok(SubsetFlags { hereditary: c.is_hereditary(&flags), saturated: c.is_saturated(&flags) })
}

/// True when `ΣH(S)` is every vertex.
pub fn is_full_corner_set(g: &Graph, s: &VertexSet) -> Result<bool> {
    Ok(saturate(g, s)?.len() == g.vertex_count())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Exhaustive up to `EXHAUSTIVE_LIMIT` vertices, closure generation above.
    Auto,
    /// Test every subset.
    Exhaustive,
    /// Saturate `X ∪ {v}` starting from `∅` until no new set appears.
    Closure,
}

/// The saturated hereditary subsets of a graph, ordered by size and then
/// lexicographically by their sorted vertex names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SatHerLattice {
    pub members: Vec<VertexSet>,
    pub total: usize,
    /// Members other than `∅` and the full vertex set.
    pub proper_nontrivial: usize,
    /// Indices of members other than the full set that meet the truncation
    /// frontier; their status may be an effect of the cut.
    pub suspect: Vec<usize>,
}

impl SatHerLattice {
    fn new(g: &Graph, mut members: Vec<VertexSet>) -> Self {
        members.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        let n = g.vertex_count();
        let total = members.len();
        let proper_nontrivial = members.iter().filter(|m| !m.is_empty() && m.len() != n).count();
        let suspect = members
            .iter()
            .enumerate()
            .filter(|(_, m)| m.len() != n && m.iter().any(|v| g.frontier().contains_key(v)))
            .map(|(i, _)| i)
            .collect();
        SatHerLattice { members, total, proper_nontrivial, suspect }
    }

    pub fn contains(&self, s: &VertexSet) -> bool {
        self.members.iter().any(|m| m == s)
    }
}

pub fn enumerate_sat_her(g: &Graph) -> Result<SatHerLattice> {
    enumerate_sat_her_with(g, Strategy::Auto, DEFAULT_MEMBER_BUDGET)
}

/// `budget` caps the number of members closure generation may build; the
/// exhaustive strategy refuses graphs above `EXHAUSTIVE_LIMIT` vertices.
pub fn enumerate_sat_her_with(g: &Graph, strategy: Strategy, budget: u64) -> Result<SatHerLattice> {
    let c = Closure::new(g);
    let n = g.vertex_count();
    let exhaustive = match strategy {
        Strategy::Auto => n <= EXHAUSTIVE_LIMIT,
        Strategy::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::Budget { what: "exhaustive subset enumeration", limit: EXHAUSTIVE_LIMIT as u64 });
            }
            true
        }
        Strategy::Closure => false,
    };
    let members = if exhaustive { exhaustive_members(g, &c) } else { closure_members(g, &c, budget)? };
    Ok(SatHerLattice::new(g, members))
}

fn exhaustive_members(g: &Graph, c: &Closure) -> Vec<VertexSet> {
    let n = c.n;
    let succ: Vec<u32> = c.succ.iter().map(|s| s.iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let inside = |v: usize| mask >> v & 1 == 1;
        let hereditary = (0..n).all(|v| !inside(v) || succ[v] & !mask == 0);
        if !hereditary {
            continue;
        }
        let saturated = (0..n).all(|w| inside(w) || !c.forced[w] || succ[w] & !mask != 0);
        if saturated {
            let flags: Vec<bool> = (0..n).map(inside).collect();
            out.push(to_set(g, &flags));
        }
    }
    out
}

fn closure_members(g: &Graph, c: &Closure, budget: u64) -> Result<Vec<VertexSet>> {
    let empty = c.saturate(vec![false; c.n]);
    let mut seen: HashSet<Vec<bool>> = HashSet::from([empty.clone()]);
    let mut queue = VecDeque::from([empty]);
    while let Some(x) = queue.pop_front() {
        for v in (0..c.n).filter(|&v| !x[v]) {
            let mut y = x.clone();
            y[v] = true;
            let y = c.saturate(y);
            if seen.insert(y.clone()) {
                if seen.len() as u64 > budget {
                    return Err(Error::Budget { what: "saturated hereditary enumeration", limit: budget });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.iter().map(|s| to_set(g, s)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub vertices: usize,
    pub edges: Mult,
    pub sinks: usize,
    pub sources: usize,
    pub infinite_emitters: usize,
    pub infinite_receivers: usize,
    pub row_finite: bool,
    pub locally_finite: bool,
    pub sat_her_total: usize,
    pub sat_her_proper_nontrivial: usize,
    pub sat_her_suspect: usize,
    /// Cokernel of `I − Aᵗ`, for untruncated sink-free graphs with finitely
    /// many edges.
    pub cokernel: Option<CokernelInvariant>,
    /// Set for truncated graphs: the numbers describe the truncation.
    pub approximate: bool,
}

impl InvariantReport {
    /// Canonical JSON with sorted keys.
    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn cokernel_applies(g: &Graph) -> bool {
    !g.is_truncated() && !g.has_infinite_bundle() && g.sinks().is_empty()
}

pub fn invariant_report(g: &Graph) -> Result<InvariantReport> {
    invariant_report_with_budget(g, DEFAULT_MEMBER_BUDGET)
}

pub fn invariant_report_with_budget(g: &Graph, budget: u64) -> Result<InvariantReport> {
    let lattice = enumerate_sat_her_with(g, Strategy::Auto, budget)?;
    let vs = g.vertices();
    Ok(InvariantReport {
        vertices: vs.len(),
        edges: g.edge_mass(),
        sinks: g.sinks().len(),
        sources: g.sources().len(),
        infinite_emitters: vs.iter().filter(|v| g.is_infinite_emitter(v)).count(),
        infinite_receivers: vs.iter().filter(|v| g.is_infinite_receiver(v)).count(),
        row_finite: g.is_row_finite(),
        locally_finite: g.is_locally_finite(),
        sat_her_total: lattice.total,
        sat_her_proper_nontrivial: lattice.proper_nontrivial,
        sat_her_suspect: lattice.suspect.len(),
        cokernel: if cokernel_applies(g) { Some(cokernel_invariant(g)?) } else { None },
        approximate: g.is_truncated(),
    })
}

/// One invariant on which two graphs disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Distinction {
    pub invariant: String,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Distinction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} vs {}", self.invariant, self.left, self.right)
    }
}

/// Outcome of comparing two graphs. An empty `distinctions` list means the
/// graphs were not told apart, not that they are equivalent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MoritaDiff {
    pub distinctions: Vec<Distinction>,
    /// Invariants that were compared.
    pub compared: Vec<String>,
    pub approximate: bool,
    pub left: InvariantReport,
    pub right: InvariantReport,
}

impl MoritaDiff {
    pub fn distinguished(&self) -> bool {
        !self.distinctions.is_empty()
    }
}

/// Compares the saturated hereditary subset count and, when both graphs
/// admit it, the cokernel of `I − Aᵗ`.
///
/// Members flagged as suspect on truncated inputs are counted: dropping them
/// would make a truncated tail look unlike the graph it came from. The
/// result is marked approximate instead.
pub fn morita_diff(g: &Graph, h: &Graph) -> Result<MoritaDiff> {
    morita_diff_with_budget(g, h, DEFAULT_MEMBER_BUDGET)
}

pub fn morita_diff_with_budget(g: &Graph, h: &Graph, budget: u64) -> Result<MoritaDiff> {
    let left = invariant_report_with_budget(g, budget)?;
    let right = invariant_report_with_budget(h, budget)?;
    let mut compared = vec!["sat_her_count".to_string()];
    let mut distinctions = Vec::new();
    if left.sat_her_total != right.sat_her_total {
        distinctions.push(Distinction {
            invariant: "sat_her_count".into(),
            left: left.sat_her_total.to_string(),
            right: right.sat_her_total.to_string(),
        });
    }
    if let (Some(a), Some(b)) = (&left.cokernel, &right.cokernel) {
        compared.push("cokernel".into());
        if a != b {
            distinctions.push(Distinction { invariant: "cokernel".into(), left: a.to_string(), right: b.to_string() });
        }
    }
    let approximate = left.approximate || right.approximate;
    Ok(MoritaDiff { distinctions, compared, approximate, left, right })
}
