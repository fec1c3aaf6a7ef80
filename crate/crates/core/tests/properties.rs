mod common;

use std::collections::BTreeMap;

use common::{
    random_in_partition, random_out_partition, random_range_vector, random_sink_free, random_source_vector,
    same_graph,
};
use gm_core::invariants::{classify_subset, enumerate_sat_her, enumerate_sat_her_with, saturate, Strategy, VertexSet};
use gm_core::matrixlab::{cokernel_invariant, esse_matrix_search, esse_matrix_verify, smith_normal_form, EsseSearch, IntMatrix};
use gm_core::moves::{
    delay_identities, in_delay, in_split, in_split_identities, out_delay, out_split, out_split_identities,
    TruncationSpec,
};
use gm_core::{Bundle, Cut, Graph, Mult};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Any graph on up to six vertices, with infinite bundles, sinks and
/// sometimes a tail frontier.
fn wild_graph(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let vs: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut seen = BTreeMap::new();
    for _ in 0..rng.gen_range(0..=9) {
        let m = if rng.gen_bool(0.15) { Mult::Inf } else { Mult::Fin(rng.gen_range(1..=2)) };
        seen.insert((rng.gen_range(0..n), rng.gen_range(0..n)), m);
    }
    let bundles = seen
        .into_iter()
        .enumerate()
        .map(|(i, ((s, r), m))| Bundle::new(format!("e{i}"), vs[s].clone(), vs[r].clone(), m))
        .collect();
    let g = Graph::new(vs.clone(), bundles).unwrap();
    if rng.gen_bool(0.3) {
        let cut = BTreeMap::from([(vs[rng.gen_range(0..n)].clone(), Cut::Tail)]);
        g.with_truncation(cut).unwrap()
    } else {
        g
    }
}

fn relabel(g: &Graph, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = common::shuffled(&mut rng, g.vertices());
    let name: BTreeMap<&String, String> = g.vertices().iter().zip(&order).map(|(v, w)| (v, format!("{w}'"))).collect();
    let bundles = g.bundles().iter().map(|b| Bundle::new(b.id.clone(), name[&b.src].clone(), name[&b.rng].clone(), b.mult)).collect();
    let frontier = g.frontier().iter().map(|(v, c)| (name[v].clone(), *c)).collect();
    let h = Graph::new(common::shuffled(&mut rng, &name.values().cloned().collect::<Vec<_>>()), bundles).unwrap();
    if g.is_truncated() {
        h.with_truncation(frontier).unwrap()
    } else {
        h
    }
}

fn subset(g: &Graph, bits: u32) -> VertexSet {
    g.vertices().iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, v)| v.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn saturation_is_a_closure(seed in any::<u64>(), a in 0u32..64, b in 0u32..64) {
        let g = wild_graph(seed);
        let (s, t) = (subset(&g, a), subset(&g, a | b));
        let ss = saturate(&g, &s).unwrap();
        prop_assert!(ss.is_superset(&s));
        prop_assert_eq!(&saturate(&g, &ss).unwrap(), &ss);
        prop_assert!(saturate(&g, &t).unwrap().is_superset(&ss));
        let flags = classify_subset(&g, &ss).unwrap();
        prop_assert!(flags.hereditary && flags.saturated);
    }

    #[test]
    fn closure_generation_matches_exhaustive_enumeration(seed in any::<u64>()) {
        let g = wild_graph(seed);
        let a = enumerate_sat_her_with(&g, Strategy::Exhaustive, 1 << 20).unwrap();
        let b = enumerate_sat_her_with(&g, Strategy::Closure, 1 << 20).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn invariants_ignore_vertex_names(seed in any::<u64>(), perm in any::<u64>()) {
        let g = wild_graph(seed);
        let h = relabel(&g, perm);
        prop_assert!(same_graph(&g, &h));
        prop_assert_eq!(enumerate_sat_her(&g).unwrap().total, enumerate_sat_her(&h).unwrap().total);
        prop_assert_eq!(cokernel_invariant(&g).ok(), cokernel_invariant(&h).ok());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let g = wild_graph(seed);
        let back = Graph::from_json_str(&g.to_json_string()).unwrap();
        prop_assert_eq!(back.to_json_value(), g.to_json_value());
    }

    #[test]
    fn split_count_identities_hold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_sink_free(&mut rng, 6, 10);
        let po = random_out_partition(&mut rng, &g);
        let h = out_split(&g, &po).unwrap();
        for c in out_split_identities(&g, &po, &h).unwrap() {
            prop_assert!(c.ok, "{:?}", c);
        }
        let pi = random_in_partition(&mut rng, &g);
        let h = in_split(&g, &pi).unwrap();
        for c in in_split_identities(&g, &pi, &h).unwrap() {
            prop_assert!(c.ok, "{:?}", c);
        }
    }

    #[test]
    fn finite_delays_add_one_edge_per_level(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_sink_free(&mut rng, 6, 10);
        let t = TruncationSpec::default();
        let ds = random_source_vector(&mut rng, &g);
        let h = out_delay(&g, &ds, t).unwrap();
        prop_assert!(!h.is_truncated());
        for c in delay_identities(&g, &ds, &h) {
            prop_assert!(c.ok, "{:?}", c);
        }
        let levels: u64 = g.vertices().iter().map(|v| ds.vertex_delay(v).finite().unwrap()).sum();
        prop_assert_eq!(h.edge_mass(), g.edge_mass() + Mult::Fin(levels));
        let dr = random_range_vector(&mut rng, &g);
        let h = in_delay(&g, &dr, t).unwrap();
        for c in delay_identities(&g, &dr, &h) {
            prop_assert!(c.ok, "{:?}", c);
        }
    }

    #[test]
    fn smith_form_is_a_unimodular_diagonalization(rows in prop::collection::vec(prop::collection::vec(-20i64..=20, 4), 1..=5)) {
        let m = IntMatrix::from_i64(&rows).unwrap();
        let f = smith_normal_form(&m);
        prop_assert_eq!(f.u.mul(&m).unwrap().mul(&f.v).unwrap(), f.d.clone());
        prop_assert_eq!(f.rank(), f.invariant_factors.len());
        prop_assert_eq!(smith_normal_form(&m.transpose()).invariant_factors, f.invariant_factors);
    }

    #[test]
    fn search_finds_planted_factorizations(n in 1usize..=2, m in 1usize..=2, r_bits in any::<u8>(), s_bits in any::<u8>()) {
        let bit = |x: u8, k: usize| i64::from(x >> k & 1);
        let r = IntMatrix::from_i64(&(0..n).map(|i| (0..m).map(|j| bit(r_bits, i * m + j)).collect()).collect::<Vec<_>>()).unwrap();
        let s = IntMatrix::from_i64(&(0..m).map(|i| (0..n).map(|j| bit(s_bits, i * n + j)).collect()).collect::<Vec<_>>()).unwrap();
        let (a, b) = (r.mul(&s).unwrap(), s.mul(&r).unwrap());
        prop_assume!(a.is_zero_one() && b.is_zero_one());
        prop_assert!(esse_matrix_verify(&a, &b, &r, &s).unwrap());
        match esse_matrix_search(&a, &b, 2, 1 << 20).unwrap() {
            EsseSearch::Found { r, s, .. } => prop_assert!(esse_matrix_verify(&a, &b, &r, &s).unwrap()),
            other => prop_assert!(false, "planted pair missed: {:?}", other),
        }
    }
}
