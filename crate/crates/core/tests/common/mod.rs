//! Helpers shared by the integration tests: fixture loading, isomorphism up
//! to truncation flags, and seeded random graphs, partitions and delays.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use gm_core::moves::{
    desingularize, drinen_from_in_split, in_delay, in_split, out_delay, out_split, BundleDelays, Cell, DelayClass,
    DelayVector, DrinenRangeVector, DrinenSourceVector, InPartition, OutPartition, Partition, PartitionSide, Share,
    TruncationSpec,
};
use gm_core::{isomorphic_with_frontier, Bundle, Graph, Mult};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub struct Fixture {
    pub name: String,
    pub raw: Value,
}

impl Fixture {
    pub fn op(&self) -> &str {
        self.raw["op"].as_str().expect("fixture op")
    }

    pub fn input(&self) -> Graph {
        Graph::from_json_value(&self.raw["input"]).expect("fixture input parses")
    }

    pub fn expected(&self) -> Option<Graph> {
        self.raw.get("expected").map(|v| Graph::from_json_value(v).expect("fixture expected parses"))
    }

    pub fn depth(&self) -> TruncationSpec {
        let d = self.raw.get("depth").and_then(Value::as_u64).unwrap_or(TruncationSpec::DEFAULT_DEPTH);
        TruncationSpec::new(d).unwrap()
    }

    pub fn args(&self) -> &Value {
        &self.raw["args"]
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        self.raw.get(key).and_then(Value::as_bool)
    }

    /// Runs the fixture's construction on its input.
    pub fn run(&self) -> gm_core::Result<Graph> {
        let g = self.input();
        let t = self.depth();
        match self.op() {
            "out_split" => out_split(&g, &OutPartition::from_json_value(self.args())?),
            "in_split" => in_split(&g, &InPartition::from_json_value(self.args())?),
            "out_delay" => out_delay(&g, &DrinenSourceVector::from_json_value(self.args())?, t),
            "in_delay" => in_delay(&g, &DrinenRangeVector::from_json_value(self.args())?, t),
            "in_delay_from_in_split" => {
                let d = drinen_from_in_split(&g, &InPartition::from_json_value(self.args())?)?;
                in_delay(&g, &d, t)
            }
            "desingularize" => desingularize(&g, t),
            other => panic!("unknown fixture op {other}"),
        }
    }
}

pub fn load_fixtures() -> Vec<Fixture> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures_dir())
        .expect("fixtures directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| Fixture {
            name: p.file_stem().unwrap().to_string_lossy().into_owned(),
            raw: serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).expect("fixture is JSON"),
        })
        .collect()
}

/// Every graph appearing in the fixtures, inputs and expected outputs alike.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for f in load_fixtures() {
        out.push((format!("{}/input", f.name), f.input()));
        if let Some(e) = f.expected() {
            out.push((format!("{}/expected", f.name), e));
        }
    }
    out
}

/// Isomorphic, with the frontier carried onto the frontier.
pub fn same_graph(a: &Graph, b: &Graph) -> bool {
    let Some(map) = isomorphic_with_frontier(a, b).expect("isomorphism search fits its budget") else {
        return false;
    };
    let image: BTreeMap<String, _> = a.frontier().iter().map(|(v, c)| (map[v].clone(), *c)).collect();
    assert_eq!(&image, b.frontier(), "returned bijection must respect the frontier");
    true
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// A sink-free finite graph with `1..=max_v` vertices and at most `max_e`
/// edges counted with multiplicity.
pub fn random_sink_free(rng: &mut ChaCha8Rng, max_v: usize, max_e: u64) -> Graph {
    let n = rng.gen_range(1..=max_v.min(max_e as usize));
    let vs = names(n);
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for s in 0..n {
        *counts.entry((s, rng.gen_range(0..n))).or_default() += 1;
    }
    let extra = rng.gen_range(0..=max_e - n as u64);
    for _ in 0..extra {
        *counts.entry((rng.gen_range(0..n), rng.gen_range(0..n))).or_default() += 1;
    }
    let refs: Vec<&str> = vs.iter().map(String::as_str).collect();
    Graph::from_edge_list(&refs, counts.iter().map(|(&(s, r), &k)| (refs[s], refs[r], Mult::Fin(k)))).unwrap()
}

/// Deals the unit edges of `bundles` into at most `k` nonempty cells.
fn random_cells(rng: &mut ChaCha8Rng, bundles: &[(String, u64)], k: usize) -> Vec<Cell> {
    let mut cells: Vec<BTreeMap<String, u64>> = vec![BTreeMap::new(); k];
    for (id, m) in bundles {
        for _ in 0..*m {
            *cells[rng.gen_range(0..k)].entry(id.clone()).or_default() += 1;
        }
    }
    cells
        .into_iter()
        .filter(|c| !c.is_empty())
        .map(|c| c.into_iter().map(|(b, a)| Share::new(b, Mult::Fin(a))).collect())
        .collect()
}

fn random_partition<S: PartitionSide>(
    rng: &mut ChaCha8Rng,
    g: &Graph,
    incident: impl Fn(&Graph, &str) -> Vec<(String, u64)>,
) -> Partition<S> {
    let mut p = Partition::<S>::default();
    for v in g.vertices() {
        let bundles = incident(g, v);
        let edges: u64 = bundles.iter().map(|b| b.1).sum();
        if edges == 0 || rng.gen_bool(0.3) {
            continue;
        }
        let k = rng.gen_range(1..=edges.min(3) as usize);
        p = p.with_cells(v.clone(), random_cells(rng, &bundles, k));
    }
    p
}

fn finite(m: Mult) -> u64 {
    match m {
        Mult::Fin(k) => k,
        Mult::Inf => panic!("random helpers expect finite graphs"),
    }
}

pub fn random_out_partition(rng: &mut ChaCha8Rng, g: &Graph) -> OutPartition {
    random_partition(rng, g, |g, v| g.out_bundles(v).map(|b| (b.id.clone(), finite(b.mult))).collect())
}

pub fn random_in_partition(rng: &mut ChaCha8Rng, g: &Graph) -> InPartition {
    random_partition(rng, g, |g, v| g.in_bundles(v).map(|b| (b.id.clone(), finite(b.mult))).collect())
}

/// Edge delays in `0..=3`; each vertex gets the largest delay on its side.
fn random_delays<S: PartitionSide>(
    rng: &mut ChaCha8Rng,
    g: &Graph,
    key: impl Fn(&Bundle) -> &str,
) -> DelayVector<S> {
    let mut d = DelayVector::<S>::zero();
    let mut top: BTreeMap<String, u64> = BTreeMap::new();
    for b in g.bundles() {
        let mut per: BTreeMap<u64, u64> = BTreeMap::new();
        for _ in 0..finite(b.mult) {
            let x = if rng.gen_bool(0.4) { 0 } else { rng.gen_range(0..=3) };
            *per.entry(x).or_default() += 1;
        }
        let t = top.entry(key(b).to_string()).or_default();
        *t = (*t).max(*per.keys().last().unwrap());
        let classes = per.into_iter().map(|(delay, c)| DelayClass { delay, count: Mult::Fin(c) }).collect();
        d = d.with_bundle(b.id.clone(), BundleDelays { classes, enumerate: None });
    }
    for (v, t) in top {
        d = d.with_vertex(v, Mult::Fin(t));
    }
    d
}

pub fn random_source_vector(rng: &mut ChaCha8Rng, g: &Graph) -> DrinenSourceVector {
    random_delays(rng, g, |b| &b.src)
}

pub fn random_range_vector(rng: &mut ChaCha8Rng, g: &Graph) -> DrinenRangeVector {
    random_delays(rng, g, |b| &b.rng)
}

pub fn shuffled<T: Clone>(rng: &mut ChaCha8Rng, xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.shuffle(rng);
    v
}
