//! Coalitional-game analysis for wireless multicast cost sharing.
//!
//! A transmitter multicasts a file to a set of users; any coalition of users
//! downloads together at the slowest member's rate and shares the
//! transmitter's energy and bandwidth costs. This crate evaluates the
//! resulting transferable-utility game and decides its stability questions:
//!
//! - [`value`] — the characteristic function v(S) and collection values;
//! - [`core_analysis`] — core membership and non-emptiness (LP-backed),
//!   convexity, the explicit symmetric core profile, and the analytical
//!   non-emptiness / emptiness conditions;
//! - [`dc_stability`] — partition stability, its analytical sufficient
//!   conditions, and an exhaustive optimal-partition search;
//! - [`lp`] — the phase-1 simplex feasibility solver behind the core LP;
//! - [`sweep`] — the parameter sweeps of the numerical study, with CSV and
//!   JSON-lines emission;
//! - [`scenario`] / [`model`] — validated game instances, coalitions,
//!   partitions, and the seeded scenario generator.
//!
//! Everything is deterministic: fixed seeds reproduce scenarios bit-for-bit
//! and identical inputs reproduce identical verdicts and witnesses.

pub mod core_analysis;
pub mod dc_stability;
pub mod error;
pub mod exact;
pub mod limits;
pub mod lp;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod sweep;
pub mod value;

pub use core_analysis::{
    check_max_min_empty, check_rate_ratio_nonempty, check_second_min_empty, check_uniform_nonempty,
    core_nonempty, is_convex, is_in_core, screen_core, symmetric_core_profile, ConditionReport,
    CoreCondition, CoreMethod, CoreScreen, CoreVerdict, PayoffProfile,
};
pub use dc_stability::{
    best_partition_bruteforce, check_banded_partition_stable, check_singleton_partition_stable,
    is_dc_stable, restrict_collection, BestPartition, DcVerdict,
};
pub use error::AnalysisError;
pub use limits::EnumLimits;
pub use model::{Coalition, Collection, ModelError, Partition};
pub use scenario::{
    derive_constants, generate_scenario, load_scenario, reference_scenario, scenario_from_json,
    DerivedConstants, GeneratorSpec, RateRule, Scenario, ScenarioFile, ScenarioParams,
};
pub use sweep::{
    emit_results, mode_sum, run_sweep, Mode, ModeSpec, SweepAxis, SweepFormat, SweepRow, SweepSpec,
};
pub use value::{
    coalition_rate, coalition_value, coalition_value_raw, collection_value, ValueTable,
};
