//! Library side of the `gm` command line tool.

pub mod input;
pub mod plan;

pub use plan::{run_plan, MovePlan, Op, PlanOptions, PlanOutcome, StepReport, Verdict};
