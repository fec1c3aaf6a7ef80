//! Move plans: an ordered list of moves applied to one graph, with a JSON
//! trail recording what each validator said.

use std::collections::BTreeMap;
use std::path::Path;

use gm_core::moves::{
    delay_identities, desingularize, dual_graph, in_delay_detailed, in_split, in_split_identities,
    make_locally_finite, maximal_out_split, out_delay_detailed, out_split, out_split_identities,
    validate_in_partition, validate_out_partition, validate_range_vector, validate_source_vector, Delayed,
    DrinenRangeVector, DrinenSourceVector, IdentityCheck, InPartition, OutPartition, TruncationSpec,
};
use gm_core::{Error, Graph, Mult, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::input::read_json_file;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    OutSplit,
    InSplit,
    OutDelay,
    InDelay,
    Dual,
    MaximalOutSplit,
    Desingularize,
    MakeLocallyFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub op: Op,
    /// Partition or delay vector, inline or as `{"file": path}`. Missing
    /// means the trivial partition or the zero vector.
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub args: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MovePlan {
    pub steps: Vec<Step>,
}

/// Step arguments after parsing, before any move runs.
enum Parsed {
    Out(OutPartition),
    In(InPartition),
    Source(DrinenSourceVector),
    Range(DrinenRangeVector),
    Nothing,
}

impl MovePlan {
    /// Parses a plan, loading `{"file": ..}` arguments relative to `base`.
    pub fn from_json_str(s: &str, base: Option<&Path>) -> Result<Self> {
        let mut plan: MovePlan = serde_json::from_str(s)?;
        for step in &mut plan.steps {
            if let Some(file) = step.args.get("file").and_then(Value::as_str) {
                let path = match base {
                    Some(b) => b.join(file),
                    None => file.into(),
                };
                step.args = read_json_file(&path)?;
            }
        }
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, path.parent())
    }

    fn parse_args(&self) -> Result<Vec<Parsed>> {
        self.steps
            .iter()
            .enumerate()
            .map(|(i, step)| {
                let at = |e: Error| match e {
                    Error::Parse(m) => Error::Parse(format!("step {}: {m}", i + 1)),
                    other => other,
                };
                if step.depth == Some(0) {
                    return Err(Error::Parse(format!("step {}: depth must be at least 1", i + 1)));
                }
                let a = &step.args;
                Ok(match step.op {
                    Op::OutSplit if a.is_null() => Parsed::Out(OutPartition::trivial()),
                    Op::OutSplit => Parsed::Out(OutPartition::from_json_value(a).map_err(at)?),
                    Op::InSplit if a.is_null() => Parsed::In(InPartition::trivial()),
                    Op::InSplit => Parsed::In(InPartition::from_json_value(a).map_err(at)?),
                    Op::OutDelay if a.is_null() => Parsed::Source(DrinenSourceVector::zero()),
                    Op::OutDelay => Parsed::Source(DrinenSourceVector::from_json_value(a).map_err(at)?),
                    Op::InDelay if a.is_null() => Parsed::Range(DrinenRangeVector::zero()),
                    Op::InDelay => Parsed::Range(DrinenRangeVector::from_json_value(a).map_err(at)?),
                    _ => Parsed::Nothing,
                })
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlanOptions {
    pub depth: u64,
    pub allow_improper: bool,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions { depth: TruncationSpec::DEFAULT_DEPTH, allow_improper: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Proper,
    Improper,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationReport {
    pub depth: u64,
    pub frontier: Vec<String>,
    /// Edges beyond the depth, per original bundle.
    pub dropped: BTreeMap<String, Mult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub op: Op,
    pub verdict: Verdict,
    pub validator: Value,
    pub identities: Vec<IdentityCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationReport>,
    pub vertices: usize,
    pub edges: Mult,
}

#[derive(Clone, Debug)]
pub struct PlanOutcome {
    pub graph: Graph,
    pub trail: Vec<StepReport>,
}

impl PlanOutcome {
    /// `{"graph": .., "trail": [..]}` with sorted keys.
    pub fn to_json_value(&self) -> Value {
        serde_json::json!({
            "graph": self.graph.to_json_value(),
            "trail": serde_json::to_value(&self.trail).expect("trail serializes"),
        })
    }
}

fn verdict(proper: bool, allow_improper: bool, step: usize, diagnostics: &[String]) -> Result<Verdict> {
    if proper {
        Ok(Verdict::Proper)
    } else if allow_improper {
        Ok(Verdict::Improper)
    } else {
        Err(Error::Improper(format!("step {step}: {}", diagnostics.join("; "))))
    }
}

fn to_value<T: Serialize>(r: &T) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

fn truncation_report(d: &Delayed, depth: u64) -> Option<TruncationReport> {
    if !d.graph.is_truncated() {
        return None;
    }
    Some(TruncationReport {
        depth,
        frontier: d.graph.frontier().keys().cloned().collect(),
        dropped: d.dropped.clone(),
    })
}

/// Runs every step in order. Any invalid step, or an improper one without
/// `allow_improper`, aborts the whole plan.
pub fn run_plan(plan: &MovePlan, input: &Graph, opts: PlanOptions) -> Result<PlanOutcome> {
    let parsed = plan.parse_args()?;
    let mut g = input.clone();
    let mut trail = Vec::with_capacity(plan.steps.len());
    for (i, (step, args)) in plan.steps.iter().zip(&parsed).enumerate() {
        let n = i + 1;
        let depth = step.depth.unwrap_or(opts.depth);
        let t = TruncationSpec::new(depth)?;
        let (next, verdict, validator, identities, truncation) = match (step.op, args) {
            (Op::OutSplit, Parsed::Out(p)) => {
                let r = validate_out_partition(&g, p)?;
                if !r.valid {
                    return Err(Error::InvalidPartition(r.diagnostics));
                }
                let v = verdict(r.proper, opts.allow_improper, n, &r.diagnostics)?;
                let h = out_split(&g, p)?;
                let ids = out_split_identities(&g, p, &h)?;
                (h, v, to_value(&r), ids, None)
            }
            (Op::InSplit, Parsed::In(p)) => {
                let r = validate_in_partition(&g, p)?;
                if !r.valid {
                    return Err(Error::InvalidPartition(r.diagnostics));
                }
                let v = verdict(r.proper, opts.allow_improper, n, &r.diagnostics)?;
                let h = in_split(&g, p)?;
                let ids = in_split_identities(&g, p, &h)?;
                (h, v, to_value(&r), ids, None)
            }
            (Op::OutDelay, Parsed::Source(d)) => {
                let r = validate_source_vector(&g, d)?;
                if !r.valid {
                    return Err(Error::InvalidDelayVector(r.diagnostics));
                }
                let v = verdict(r.strictly_proper == Some(true), opts.allow_improper, n, &r.diagnostics)?;
                let out = out_delay_detailed(&g, d, t)?;
                let ids = delay_identities(&g, d, &out.graph);
                let tr = truncation_report(&out, depth);
                (out.graph, v, to_value(&r), ids, tr)
            }
            (Op::InDelay, Parsed::Range(d)) => {
                let r = validate_range_vector(&g, d)?;
                if !r.valid {
                    return Err(Error::InvalidDelayVector(r.diagnostics));
                }
                let out = in_delay_detailed(&g, d, t)?;
                let ids = delay_identities(&g, d, &out.graph);
                let tr = truncation_report(&out, depth);
                (out.graph, Verdict::Proper, to_value(&r), ids, tr)
            }
            (Op::Dual, _) => {
                let h = dual_graph(&g)?;
                let paths: Mult = g.bundles().iter().map(|b| b.mult * g.out_degree(&b.rng)).sum();
                let ids = vec![
                    IdentityCheck::new("vertex count", g.edge_mass(), h.vertex_count()),
                    IdentityCheck::new("edge mass", paths, h.edge_mass()),
                ];
                (h, Verdict::Proper, Value::Null, ids, None)
            }
            (Op::MaximalOutSplit, _) => (maximal_out_split(&g)?, Verdict::Proper, Value::Null, vec![], None),
            (Op::Desingularize, _) => {
                let h = desingularize(&g, t)?;
                let tr = h.is_truncated().then(|| TruncationReport {
                    depth,
                    frontier: h.frontier().keys().cloned().collect(),
                    dropped: BTreeMap::new(),
                });
                (h, Verdict::Proper, Value::Null, vec![], tr)
            }
            (Op::MakeLocallyFinite, _) => {
                let h = make_locally_finite(&g, t)?;
                let tr = h.is_truncated().then(|| TruncationReport {
                    depth,
                    frontier: h.frontier().keys().cloned().collect(),
                    dropped: BTreeMap::new(),
                });
                (h, Verdict::Proper, Value::Null, vec![], tr)
            }
            _ => unreachable!("arguments are parsed per op"),
        };
        trail.push(StepReport {
            step: n,
            op: step.op,
            verdict,
            validator,
            identities,
            truncation,
            vertices: next.vertex_count(),
            edges: next.edge_mass(),
        });
        g = next;
    }
    Ok(PlanOutcome { graph: g, trail })
}
