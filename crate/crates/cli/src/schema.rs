//! JSON schemas for the reports this tool writes.

pub const RESULT: &str = include_str!("../schemas/result.schema.json");
pub const GRID_REPORT: &str = include_str!("../schemas/grid_report.schema.json");
pub const PATH_REPORT: &str = include_str!("../schemas/path.schema.json");
pub const SIM_TRUTH: &str = include_str!("../schemas/sim_truth.schema.json");
pub const EVALUATION: &str = include_str!("../schemas/evaluation.schema.json");
