mod common;

use common::{load_fixtures, same_graph};
use gm_core::moves::{
    validate_in_partition, validate_out_partition, validate_source_vector, DrinenSourceVector, InPartition,
    OutPartition,
};
use gm_core::Error;

#[test]
fn every_construction_reproduces_its_figure() {
    let fixtures = load_fixtures();
    let with_output = fixtures.iter().filter(|f| f.expected().is_some()).count();
    assert!(with_output >= 9, "only {with_output} figure fixtures");
    for f in &fixtures {
        match f.raw.get("expected_error").and_then(|v| v.as_str()) {
            Some("unrepresentable") => {
                assert!(
                    matches!(f.run(), Err(Error::UnrepresentableInfinitePartition(_))),
                    "{}: expected an unrepresentable partition",
                    f.name
                );
            }
            Some(other) => panic!("{}: unknown expected error {other}", f.name),
            None => {
                let got = f.run().unwrap_or_else(|e| panic!("{}: {e}", f.name));
                let want = f.expected().unwrap();
                assert!(same_graph(&got, &want), "{}: got {got}, want {want}", f.name);
            }
        }
    }
}

#[test]
fn validators_agree_with_the_figures() {
    let mut checked = 0;
    for f in load_fixtures() {
        let g = f.input();
        if let Some(proper) = f.flag("proper") {
            let r = match f.op() {
                "out_split" => validate_out_partition(&g, &OutPartition::from_json_value(f.args()).unwrap()).unwrap(),
                "in_split" => validate_in_partition(&g, &InPartition::from_json_value(f.args()).unwrap()).unwrap(),
                other => panic!("{}: properness flag on {other}", f.name),
            };
            assert!(r.valid, "{}: {:?}", f.name, r.diagnostics);
            assert_eq!(r.proper, proper, "{}: {:?}", f.name, r.diagnostics);
            checked += 1;
        }
        if let Some(strict) = f.flag("strictly_proper") {
            let r = validate_source_vector(&g, &DrinenSourceVector::from_json_value(f.args()).unwrap()).unwrap();
            assert!(r.valid, "{}: {:?}", f.name, r.diagnostics);
            assert_eq!(r.strictly_proper, Some(strict), "{}: {:?}", f.name, r.diagnostics);
            checked += 1;
        }
    }
    assert!(checked >= 6);
}

#[test]
fn desingularized_figure_is_row_finite_and_sink_free_before_the_cut() {
    for f in load_fixtures().into_iter().filter(|f| f.flag("row_finite") == Some(true)) {
        let g = f.run().unwrap();
        assert!(g.is_row_finite(), "{}", f.name);
        for v in g.vertices() {
            assert!(!g.is_sink(v) || g.frontier().contains_key(v), "{}: sink {v}", f.name);
        }
    }
}

#[test]
fn fixtures_round_trip_through_json() {
    for (name, g) in common::corpus() {
        let back = gm_core::Graph::from_json_str(&g.to_json_string()).unwrap();
        assert!(same_graph(&g, &back), "{name}");
        assert_eq!(back.to_json_value(), g.to_json_value(), "{name}");
    }
}
