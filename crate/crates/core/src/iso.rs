//! Isomorphism testing for small graphs by backtracking over vertex
//! bijections, pruned by colour refinement.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph::{Cut, Graph};
use crate::mult::Mult;

/// Default number of search nodes before giving up.
pub const DEFAULT_NODE_LIMIT: u64 = 2_000_000;

/// A bijection from the vertices of the first graph onto the second.
pub type VertexMap = BTreeMap<String, String>;

pub fn isomorphic(g: &Graph, h: &Graph) -> Result<Option<VertexMap>> {
    isomorphic_with_limit(g, h, DEFAULT_NODE_LIMIT)
}

/// Finds the first multiplicity-preserving vertex bijection `g -> h`,
/// ignoring truncation flags.
///
/// The vertices of `g` are assigned in lexicographic order of their names and
/// the candidates in `h` are tried in lexicographic order, so the answer is
/// deterministic. Exceeding `node_limit` search nodes is an error rather than
/// a guess.
pub fn isomorphic_with_limit(g: &Graph, h: &Graph, node_limit: u64) -> Result<Option<VertexMap>> {
    search(g, h, node_limit, |_| 0)
}

/// Like [`isomorphic`], but the bijection must also carry the truncation
/// frontier of `g` onto that of `h`, cut kind included.
pub fn isomorphic_with_frontier(g: &Graph, h: &Graph) -> Result<Option<VertexMap>> {
    if g.is_truncated() != h.is_truncated() {
        return Ok(None);
    }
    search(g, h, DEFAULT_NODE_LIMIT, |cut| match cut {
        None => 0,
        Some(Cut::Tail) => 1,
        Some(Cut::Head) => 2,
    })
}

fn search(g: &Graph, h: &Graph, node_limit: u64, mark: impl Fn(Option<&Cut>) -> usize) -> Result<Option<VertexMap>> {
    let n = g.vertex_count();
    if n != h.vertex_count() || g.edge_mass() != h.edge_mass() {
        return Ok(None);
    }
    let ag = g.adjacency();
    let ah = h.adjacency();
    let seed: Vec<usize> = [g, h]
        .iter()
        .flat_map(|x| x.vertices().iter().map(|v| mark(x.frontier().get(v))))
        .collect();
    let Some((cg, ch)) = refine_colours(&ag, &ah, seed) else {
        return Ok(None);
    };

    let mut g_order: Vec<usize> = (0..n).collect();
    g_order.sort_by(|&a, &b| g.vertices()[a].cmp(&g.vertices()[b]));
    let mut h_sorted: Vec<usize> = (0..n).collect();
    h_sorted.sort_by(|&a, &b| h.vertices()[a].cmp(&h.vertices()[b]));

    let mut search = Search {
        ag: &ag,
        ah: &ah,
        cg: &cg,
        ch: &ch,
        g_order: &g_order,
        h_sorted: &h_sorted,
        map: vec![usize::MAX; n],
        used: vec![false; n],
        nodes: 0,
        limit: node_limit,
    };
    if !search.extend(0)? {
        return Ok(None);
    }
    Ok(Some(
        (0..n)
            .map(|i| (g.vertices()[i].clone(), h.vertices()[search.map[i]].clone()))
            .collect(),
    ))
}

/// Convenience wrapper: `true` when an isomorphism exists.
pub fn are_isomorphic(g: &Graph, h: &Graph) -> Result<bool> {
    Ok(isomorphic(g, h)?.is_some())
}

struct Search<'a> {
    ag: &'a [Vec<Mult>],
    ah: &'a [Vec<Mult>],
    cg: &'a [usize],
    ch: &'a [usize],
    g_order: &'a [usize],
    h_sorted: &'a [usize],
    map: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    limit: u64,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> Result<bool> {
        if depth == self.g_order.len() {
            return Ok(true);
        }
        let x = self.g_order[depth];
        for &c in self.h_sorted {
            if self.used[c] || self.cg[x] != self.ch[c] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.limit {
                return Err(Error::Budget { what: "isomorphism search", limit: self.limit });
            }
            if !self.consistent(depth, x, c) {
                continue;
            }
            self.map[x] = c;
            self.used[c] = true;
            if self.extend(depth + 1)? {
                return Ok(true);
            }
            self.used[c] = false;
            self.map[x] = usize::MAX;
        }
        Ok(false)
    }

    fn consistent(&self, depth: usize, x: usize, c: usize) -> bool {
        if self.ag[x][x] != self.ah[c][c] {
            return false;
        }
        self.g_order[..depth].iter().all(|&a| {
            let fa = self.map[a];
            self.ag[a][x] == self.ah[fa][c] && self.ag[x][a] == self.ah[c][fa]
        })
    }
}

/// Joint colour refinement of two graphs. Returns `None` when the colour
/// histograms differ, which rules out an isomorphism.
fn refine_colours(ag: &[Vec<Mult>], ah: &[Vec<Mult>], seed: Vec<usize>) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = ag.len();
    let mut colours = seed;
    let mut classes = 0;
    loop {
        let mut palette: BTreeMap<Vec<(usize, Mult, Mult)>, usize> = BTreeMap::new();
        let mut sigs = Vec::with_capacity(2 * n);
        for side in 0..2 {
            let (a, off) = if side == 0 { (ag, 0) } else { (ah, n) };
            for v in 0..n {
                let mut sig: Vec<(usize, Mult, Mult)> = Vec::with_capacity(n + 1);
                sig.push((colours[off + v], a[v][v], Mult::ZERO));
                let mut nb: Vec<(usize, Mult, Mult)> = (0..n)
                    .filter(|&u| u != v && (!a[v][u].is_zero() || !a[u][v].is_zero()))
                    .map(|u| (colours[off + u], a[v][u], a[u][v]))
                    .collect();
                nb.sort();
                sig.extend(nb);
                sigs.push(sig);
            }
        }
        for s in &sigs {
            let next = palette.len();
            palette.entry(s.clone()).or_insert(next);
        }
        let next: Vec<usize> = sigs.iter().map(|s| palette[s]).collect();
        let count = palette.len();
        colours = next;
        if count == classes {
            break;
        }
        classes = count;
    }
    let mut hist: HashMap<usize, i64> = HashMap::new();
    for &c in &colours[..n] {
        *hist.entry(c).or_default() += 1;
    }
    for &c in &colours[n..] {
        *hist.entry(c).or_default() -= 1;
    }
    if hist.values().any(|&d| d != 0) {
        return None;
    }
    Some((colours[..n].to_vec(), colours[n..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(vs: &[&str], es: &[(&'static str, &'static str, u64)]) -> Graph {
        Graph::from_edge_list(vs, es.iter().map(|&(s, r, m)| (s, r, Mult::Fin(m)))).unwrap()
    }

    #[test]
    fn identity_on_itself() {
        let a = g(&["u", "v", "w"], &[("u", "v", 1), ("v", "w", 2), ("w", "u", 1)]);
        let m = isomorphic(&a, &a).unwrap().unwrap();
        assert!(m.iter().all(|(x, y)| x == y));
    }

    #[test]
    fn two_cycles_map_lexicographically() {
        let a = g(&["u", "v"], &[("u", "v", 1), ("v", "u", 1)]);
        let b = g(&["a", "b"], &[("a", "b", 1), ("b", "a", 1)]);
        let m = isomorphic(&a, &b).unwrap().unwrap();
        assert_eq!(m["u"], "a");
        assert_eq!(m["v"], "b");
    }

    #[test]
    fn multiplicity_mismatch() {
        let a = g(&["u", "v"], &[("u", "v", 1)]);
        let b = g(&["u", "v"], &[("u", "v", 2)]);
        assert_eq!(isomorphic(&a, &b).unwrap(), None);
    }

    #[test]
    fn direction_matters() {
        let a = g(&["u", "v", "w"], &[("u", "v", 1), ("w", "v", 1)]);
        let b = g(&["u", "v", "w"], &[("v", "u", 1), ("v", "w", 1)]);
        assert_eq!(isomorphic(&a, &b).unwrap(), None);
    }

    #[test]
    fn infinite_bundles_compared_exactly() {
        let a = Graph::from_edge_list(&["v", "w"], [("v", "w", Mult::Inf)]).unwrap();
        let b = Graph::from_edge_list(&["x", "y"], [("y", "x", Mult::Inf)]).unwrap();
        let c = Graph::from_edge_list(&["x", "y"], [("y", "x", Mult::Fin(5))]).unwrap();
        assert!(are_isomorphic(&a, &b).unwrap());
        assert!(!are_isomorphic(&a, &c).unwrap());
    }

    #[test]
    fn budget_is_an_error() {
        // A 10-cycle against two 5-cycles: colour refinement cannot tell
        // them apart, so only the backtracking search can.
        let n = 10;
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let cycle: Vec<(&str, &str, Mult)> = (0..n).map(|i| (refs[i], refs[(i + 1) % n], Mult::ONE)).collect();
        let two: Vec<(&str, &str, Mult)> = (0..n)
            .map(|i| {
                let j = if i < n / 2 { (i + 1) % (n / 2) } else { n / 2 + (i + 1 - n / 2) % (n / 2) };
                (refs[i], refs[j], Mult::ONE)
            })
            .collect();
        let a = Graph::from_edge_list(&refs, cycle).unwrap();
        let b = Graph::from_edge_list(&refs, two).unwrap();
        assert!(matches!(isomorphic_with_limit(&a, &b, 5), Err(Error::Budget { .. })));
        assert_eq!(isomorphic(&a, &b).unwrap(), None);
    }

    #[test]
    fn frontier_picks_among_automorphic_images() {
        let path = |tail: &str| {
            g(&["a", "b", "c"], &[("b", "a", 1), ("b", "c", 1)])
                .with_truncation(BTreeMap::from([(tail.to_string(), Cut::Tail)]))
                .unwrap()
        };
        let m = isomorphic_with_frontier(&path("a"), &path("c")).unwrap().unwrap();
        assert_eq!(m["a"], "c");
        assert_eq!(isomorphic(&path("a"), &path("c")).unwrap().unwrap()["a"], "a");
        let plain = g(&["a", "b", "c"], &[("b", "a", 1), ("b", "c", 1)]);
        assert_eq!(isomorphic_with_frontier(&plain, &path("a")).unwrap(), None);
    }
}
