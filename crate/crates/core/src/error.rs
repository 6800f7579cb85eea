use thiserror::Error;

/// Failures surfaced by the analysis operations.
///
/// Enumeration-based operations refuse inputs past their configured caps
/// instead of silently burning CPU, and the LP path reports an iteration-cap
/// stall explicitly — a stall is never converted into an infeasibility
/// verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("{what}: {size} users exceeds the enumeration cap of {cap}")]
    SizeLimit {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("solver hit the iteration cap after {iterations} iterations without a verdict")]
    SolverStall { iterations: usize },
    #[error("not applicable: {reason}")]
    NotApplicable { reason: String },
    #[error("partition is over {partition_users} users but the scenario has {scenario_users}")]
    PartitionMismatch {
        partition_users: usize,
        scenario_users: usize,
    },
}
