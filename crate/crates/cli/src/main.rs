use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gm_cli::input::{read_graph, read_json_arg};
use gm_cli::{run_plan, MovePlan, PlanOptions};
use gm_core::dot::to_dot;
use gm_core::error::{EXIT_BUDGET, EXIT_DISTINGUISHED};
use gm_core::invariants::{invariant_report_with_budget, morita_diff_with_budget, DEFAULT_MEMBER_BUDGET};
use gm_core::matrixlab::{esse_matrix_search, smith_normal_form, EsseSearch, IntMatrix};
use gm_core::moves::{
    desingularize, dual_graph, validate_in_partition, validate_out_partition, validate_range_vector,
    validate_source_vector, DrinenRangeVector, DrinenSourceVector, InPartition, OutPartition, TruncationSpec,
};
use gm_core::sse::{esse_bridge_in_split, esse_bridge_out_split, esse_verify, EsseWitness};
use gm_core::{Error, Result};
use serde_json::{json, Value};

/// Graph moves, validators and invariants.
#[derive(Parser)]
#[command(name = "gm", version)]
struct Cli {
    /// Depth at which infinite tails and heads are cut.
    #[arg(long, global = true, default_value_t = TruncationSpec::DEFAULT_DEPTH)]
    depth: u64,
    /// Cap on search nodes, enumerated sets or candidate pairs.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Seed for randomized commands; every current command is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Run improper moves instead of refusing them.
    #[arg(long, global = true)]
    allow_improper: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Validators {
    #[arg(long, conflicts_with_all = ["in_partition", "source_vector", "range_vector"])]
    out_partition: Option<String>,
    #[arg(long, conflicts_with_all = ["source_vector", "range_vector"])]
    in_partition: Option<String>,
    #[arg(long, conflicts_with = "range_vector")]
    source_vector: Option<String>,
    #[arg(long)]
    range_vector: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a graph and optionally validate a partition or delay vector.
    Validate {
        graph: String,
        #[command(flatten)]
        with: Validators,
    },
    /// Run a move plan and print the final graph with its trail.
    Apply {
        graph: String,
        plan: PathBuf,
    },
    /// Print the invariant report of a graph.
    Invariants { graph: String },
    /// Compare two graphs; exit 3 when an invariant tells them apart.
    Diff { left: String, right: String },
    /// Print the dual graph.
    Dual { graph: String },
    /// Print the desingularized graph.
    Desingularize { graph: String },
    /// Check a bridge graph between two graphs; exit 3 when it fails.
    SseVerify { left: String, right: String, witness: String },
    /// Build the bridge between a graph and one of its splittings.
    SseBridge {
        graph: String,
        #[arg(long, conflicts_with = "in_partition", required_unless_present = "in_partition")]
        out_partition: Option<String>,
        #[arg(long)]
        in_partition: Option<String>,
    },
    /// Smith normal form of an integer matrix.
    Snf { matrix: String },
    /// Search for A = RS, B = SR; exit 3 when none exists, 4 on budget.
    EsseSearch {
        a: String,
        b: String,
        #[arg(long, default_value_t = 4)]
        m_max: usize,
    },
    /// Print a graph in Graphviz format.
    ExportDot { graph: String },
}

enum Output {
    Json(Value),
    Text(String),
}

fn print(out: Output) {
    let text = match out {
        Output::Json(v) => serde_json::to_string_pretty(&v).expect("json prints") + "\n",
        Output::Text(t) => t,
    };
    // a closed pipe is not worth a panic
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("value serializes")
}

fn run(cli: &Cli) -> Result<(Output, u8)> {
    let t = TruncationSpec::new(cli.depth)?;
    let members = cli.budget.unwrap_or(DEFAULT_MEMBER_BUDGET);
    Ok(match &cli.cmd {
        Cmd::Validate { graph, with } => {
            let g = read_graph(graph)?;
            let (report, valid) = if let Some(p) = &with.out_partition {
                let r = validate_out_partition(&g, &OutPartition::from_json_value(&read_json_arg(p)?)?)?;
                (to_json(&r), r.valid)
            } else if let Some(p) = &with.in_partition {
                let r = validate_in_partition(&g, &InPartition::from_json_value(&read_json_arg(p)?)?)?;
                (to_json(&r), r.valid)
            } else if let Some(d) = &with.source_vector {
                let r = validate_source_vector(&g, &DrinenSourceVector::from_json_value(&read_json_arg(d)?)?)?;
                (to_json(&r), r.valid)
            } else if let Some(d) = &with.range_vector {
                let r = validate_range_vector(&g, &DrinenRangeVector::from_json_value(&read_json_arg(d)?)?)?;
                (to_json(&r), r.valid)
            } else {
                let profiles: serde_json::Map<String, Value> = g
                    .vertices()
                    .iter()
                    .map(|v| (v.clone(), to_json(&g.classify(v).expect("own vertex"))))
                    .collect();
                (json!({ "valid": true, "vertices": profiles }), true)
            };
            (Output::Json(report), if valid { 0 } else { 2 })
        }
        Cmd::Apply { graph, plan } => {
            let g = read_graph(graph)?;
            let plan = MovePlan::from_file(plan)?;
            let opts = PlanOptions { depth: cli.depth, allow_improper: cli.allow_improper };
            (Output::Json(run_plan(&plan, &g, opts)?.to_json_value()), 0)
        }
        Cmd::Invariants { graph } => {
            let r = invariant_report_with_budget(&read_graph(graph)?, members)?;
            (Output::Json(r.to_json_value()), 0)
        }
        Cmd::Diff { left, right } => {
            let d = morita_diff_with_budget(&read_graph(left)?, &read_graph(right)?, members)?;
            for line in &d.distinctions {
                eprintln!("{line}");
            }
            let code = if d.distinguished() { EXIT_DISTINGUISHED as u8 } else { 0 };
            (Output::Json(to_json(&d)), code)
        }
        Cmd::Dual { graph } => (Output::Json(dual_graph(&read_graph(graph)?)?.to_json_value()), 0),
        Cmd::Desingularize { graph } => (Output::Json(desingularize(&read_graph(graph)?, t)?.to_json_value()), 0),
        Cmd::SseVerify { left, right, witness } => {
            let w = EsseWitness::from_json_value(&read_json_arg(witness)?)?;
            let r = esse_verify(&read_graph(left)?, &read_graph(right)?, &w)?;
            let code = if r.ok { 0 } else { EXIT_DISTINGUISHED as u8 };
            (Output::Json(to_json(&r)), code)
        }
        Cmd::SseBridge { graph, out_partition, in_partition } => {
            let g = read_graph(graph)?;
            let w = match (out_partition, in_partition) {
                (Some(p), _) => esse_bridge_out_split(&g, &OutPartition::from_json_value(&read_json_arg(p)?)?)?,
                (None, Some(p)) => esse_bridge_in_split(&g, &InPartition::from_json_value(&read_json_arg(p)?)?)?,
                (None, None) => unreachable!("clap requires one partition"),
            };
            (Output::Json(w.to_json_value()), 0)
        }
        Cmd::Snf { matrix } => {
            let m = IntMatrix::from_json_value(&read_json_arg(matrix)?)?;
            (Output::Json(to_json(&smith_normal_form(&m))), 0)
        }
        Cmd::EsseSearch { a, b, m_max } => {
            let a = IntMatrix::from_json_value(&read_json_arg(a)?)?;
            let b = IntMatrix::from_json_value(&read_json_arg(b)?)?;
            let outcome = esse_matrix_search(&a, &b, *m_max, cli.budget.unwrap_or(1 << 20))?;
            let code = match outcome {
                EsseSearch::Found { .. } => 0,
                EsseSearch::ProvenNone { .. } => EXIT_DISTINGUISHED as u8,
                EsseSearch::BudgetExhausted { .. } => EXIT_BUDGET as u8,
            };
            (Output::Json(to_json(&outcome)), code)
        }
        Cmd::ExportDot { graph } => (Output::Text(to_dot(&read_graph(graph)?)), 0),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            print(out);
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
