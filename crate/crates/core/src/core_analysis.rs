//! Core analysis: membership, non-emptiness, convexity, and the analytical
//! sufficient conditions.
//!
//! Non-emptiness reduces to linear feasibility of
//!
//! ```text
//! sum_N x = v(N),   sum_S x >= v(S)  for every proper non-empty S
//! ```
//!
//! The full system has 2^n - 2 inequality rows, so [`core_nonempty`] never
//! materializes it. It works with a small active set, scanning all subsets in
//! bitmask order against the current LP witness and pulling in the most
//! violated rows until either the witness clears every subset or the active
//! set itself is infeasible (a subset of an infeasible system proves the
//! whole system infeasible). Singleton rows enter as variable lower bounds.
//!
//! The analytical condition checkers report their inequality sides as
//! diagnostics rather than bare booleans so parameter sweeps can plot
//! condition margins. A sufficient condition that does not fire is
//! *inconclusive*, never the opposite verdict.

use crate::error::AnalysisError;
use crate::limits::EnumLimits;
use crate::lp::{solve_feasibility, FeasStatus, LinearSystem};
use crate::model::Coalition;
use crate::scenario::{derive_constants, Scenario};
use crate::value::ValueTable;
use serde::Serialize;

/// One payoff per user; a candidate core element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffProfile(Vec<f64>);

impl PayoffProfile {
    pub fn new(payoffs: Vec<f64>) -> Self {
        assert!(payoffs.iter().all(|x| x.is_finite()));
        Self(payoffs)
    }

    pub fn payoffs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// How a core verdict was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreMethod {
    /// Direct check of a given profile against every subset.
    Enumeration,
    /// Linear-feasibility decision.
    Lp,
    /// One of the analytical sufficient conditions.
    Condition(CoreCondition),
}

/// The analytical core conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreCondition {
    /// Uniform rates and receive powers imply a non-empty core.
    UniformSymmetric,
    /// Bounded max/min rate ratio implies a non-empty core.
    RateRatioBound,
    /// A large second-minimum/minimum rate gap implies an empty core.
    SecondMinGap,
    /// A large maximum/minimum rate spread implies an empty core.
    MaxMinSpread,
}

impl CoreCondition {
    pub fn label(self) -> &'static str {
        match self {
            CoreCondition::UniformSymmetric => "uniform-rates",
            CoreCondition::RateRatioBound => "rate-ratio-bound",
            CoreCondition::SecondMinGap => "second-min-gap",
            CoreCondition::MaxMinSpread => "max-min-spread",
        }
    }
}

/// Outcome of a core decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreVerdict {
    pub feasible: bool,
    /// Present whenever `feasible`; passes [`is_in_core`] at the caller's
    /// tolerance.
    pub witness: Option<PayoffProfile>,
    /// For membership checks: the first violating coalition in bitmask
    /// order. `None` when only efficiency is violated, and for
    /// whole-game infeasibility verdicts.
    pub violated: Option<Coalition>,
    pub method: CoreMethod,
}

/// Tolerance at which LP witnesses are independently re-verified.
pub const WITNESS_RECHECK_TOL: f64 = 1e-7;

/// Subset sums of `x` for every bitmask over `x.len()` items.
fn subset_sums(x: &[f64]) -> Vec<f64> {
    let size = 1usize << x.len();
    let mut sums = vec![0.0f64; size];
    for mask in 1..size {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + x[low];
    }
    sums
}

/// Is `x` in the core? Efficiency and every coalition's rationality are
/// checked to `tol * scale` with `scale = max(1, |v(N)|)`.
pub fn is_in_core(
    s: &Scenario,
    x: &PayoffProfile,
    tol: f64,
    limits: &EnumLimits,
) -> Result<CoreVerdict, AnalysisError> {
    assert!(tol >= 0.0);
    assert_eq!(x.len(), s.n(), "profile length must match user count");
    let table = ValueTable::with_cap(s, "core membership", limits.membership_cap)?;
    Ok(is_in_core_with_table(&table, x, tol))
}

fn is_in_core_with_table(table: &ValueTable, x: &PayoffProfile, tol: f64) -> CoreVerdict {
    let n = table.n();
    let grand = table.grand_value();
    let scale = grand.abs().max(1.0);
    let slack = tol * scale;

    let sums = subset_sums(x.payoffs());
    let efficient = (x.total() - grand).abs() <= slack;
    let mut violated = None;
    for mask in 1u32..(1 << n) {
        if sums[mask as usize] < table.value_of_mask(mask) - slack {
            violated = Coalition::from_mask(mask);
            break;
        }
    }

    let feasible = efficient && violated.is_none();
    CoreVerdict {
        feasible,
        witness: feasible.then(|| x.clone()),
        violated,
        method: CoreMethod::Enumeration,
    }
}

/// LP iteration cap per active-set solve.
const LP_ITER_CAP: usize = 50_000;
/// Cap on active-set growth rounds.
const ACTIVE_SET_ROUNDS: usize = 4_096;
/// Most-violated rows pulled in per round.
const ROWS_PER_ROUND: usize = 16;

/// Decide core non-emptiness by linear feasibility.
///
/// A feasible verdict carries a witness that has been re-verified against
/// every subset at [`WITNESS_RECHECK_TOL`]. An iteration-cap stall surfaces
/// as [`AnalysisError::SolverStall`].
pub fn core_nonempty(s: &Scenario, limits: &EnumLimits) -> Result<CoreVerdict, AnalysisError> {
    let n = s.n();
    if n > limits.lp_cap {
        return Err(AnalysisError::SizeLimit {
            what: "core LP",
            size: n,
            cap: limits.lp_cap,
        });
    }
    let table = ValueTable::new(s);
    let grand = table.grand_value();
    let scale = grand.abs().max(1.0);
    // Strictly between the LP's internal tolerance (1e-9) and the final
    // witness check (1e-7), so a row the LP already satisfies can never be
    // re-flagged as violated.
    let violation_slack = 1e-8 * scale;

    let full = Coalition::full(n).mask();
    let bounds: Vec<f64> = (0..n).map(|i| table.value_of_mask(1 << i)).collect();

    let mut active: Vec<u32> = Vec::new();
    let mut lp_iterations = 0usize;
    for _ in 0..ACTIVE_SET_ROUNDS {
        let mut sys = LinearSystem::new(n);
        sys.lower_bounds = Some(bounds.clone());
        sys.push_eq(vec![1.0; n], grand);
        for &mask in &active {
            let coeffs = (0..n)
                .map(|i| if mask & (1 << i) != 0 { 1.0 } else { 0.0 })
                .collect();
            sys.push_ge(coeffs, table.value_of_mask(mask));
        }

        let result = solve_feasibility(&sys, LP_ITER_CAP);
        lp_iterations += result.iterations;
        let x = match result.status {
            FeasStatus::Infeasible => {
                // The active rows are a subset of the full system.
                return Ok(CoreVerdict {
                    feasible: false,
                    witness: None,
                    violated: None,
                    method: CoreMethod::Lp,
                });
            }
            FeasStatus::Stalled => {
                return Err(AnalysisError::SolverStall {
                    iterations: result.iterations,
                })
            }
            FeasStatus::Feasible(x) => x,
        };

        // Scan every subset in bitmask order for rows the witness violates.
        let sums = subset_sums(&x);
        let mut worst: Vec<(f64, u32)> = Vec::new();
        for mask in 1..full {
            let deficit = table.value_of_mask(mask) - sums[mask as usize];
            if deficit > violation_slack {
                worst.push((deficit, mask));
            }
        }
        if worst.is_empty() {
            let profile = PayoffProfile::new(x);
            let verdict = is_in_core_with_table(&table, &profile, WITNESS_RECHECK_TOL);
            if verdict.feasible {
                return Ok(CoreVerdict {
                    feasible: true,
                    witness: Some(profile),
                    violated: None,
                    method: CoreMethod::Lp,
                });
            }
            // The independent recheck is looser than the scan, so this
            // branch only triggers on an efficiency drift; re-running with
            // the active set intact cannot fix that.
            return Err(AnalysisError::SolverStall {
                iterations: lp_iterations,
            });
        }
        // Largest deficits first; ties resolve to the lower mask, keeping
        // the scan order canonical.
        worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, mask) in worst.iter().take(ROWS_PER_ROUND) {
            active.push(mask);
        }
    }
    Err(AnalysisError::SolverStall {
        iterations: lp_iterations,
    })
}

/// Convexity check outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub convex: bool,
    /// First violating pair in scan order (ascending mask pairs).
    pub counterexample: Option<(Coalition, Coalition)>,
}

/// Is the game convex? Checks `v(S1) + v(S2) <= v(S1 u S2) + v(S1 n S2)`
/// over all subset pairs (with `v(empty) = 0`), to a relative slack of
/// 1e-9 so exact-equality cases are not misreported.
pub fn is_convex(s: &Scenario, limits: &EnumLimits) -> Result<ConvexityReport, AnalysisError> {
    let table = ValueTable::with_cap(s, "convexity check", limits.convexity_cap)?;
    let n = s.n();
    let size = 1u32 << n;
    let slack = 1e-9 * table.grand_value().abs().max(1.0);

    for m1 in 1..size {
        let v1 = table.value_of_mask(m1);
        for m2 in (m1 + 1)..size {
            let inter = m1 & m2;
            // Nested pairs satisfy the inequality with equality; skip.
            if inter == m1 || inter == m2 {
                continue;
            }
            let lhs = v1 + table.value_of_mask(m2);
            let rhs = table.value_of_mask(m1 | m2) + table.value_of_mask(inter);
            if lhs > rhs + slack {
                return Ok(ConvexityReport {
                    convex: false,
                    counterexample: Some((
                        Coalition::from_mask(m1).unwrap(),
                        Coalition::from_mask(m2).unwrap(),
                    )),
                });
            }
        }
    }
    Ok(ConvexityReport {
        convex: true,
        counterexample: None,
    })
}

fn rates_uniform(s: &Scenario) -> bool {
    s.rates().windows(2).all(|w| w[0] == w[1])
}

fn rx_uniform(s: &Scenario) -> bool {
    s.rx_powers().windows(2).all(|w| w[0] == w[1])
}

/// Lowest-index argmin of the rates.
fn argmin_rate(s: &Scenario) -> usize {
    let mut best = 0;
    for i in 1..s.n() {
        if s.rate(i) < s.rate(best) {
            best = i;
        }
    }
    best
}

/// Lowest-index argmax of the rates.
fn argmax_rate(s: &Scenario) -> usize {
    let mut best = 0;
    for i in 1..s.n() {
        if s.rate(i) > s.rate(best) {
            best = i;
        }
    }
    best
}

/// The explicit core profile of the uniform case:
/// `x_i = U_i - alpha/R_0 - (beta+gamma)/(n R_0)`, i.e. the transmitter-side
/// cost split evenly.
pub fn symmetric_core_profile(s: &Scenario) -> Result<PayoffProfile, AnalysisError> {
    if !rates_uniform(s) {
        return Err(AnalysisError::NotApplicable {
            reason: "rates are not uniform".into(),
        });
    }
    if !rx_uniform(s) {
        return Err(AnalysisError::NotApplicable {
            reason: "receive powers are not uniform".into(),
        });
    }
    let d = derive_constants(s);
    let n = s.n() as f64;
    let rate = s.rate(0);
    let alpha = d.alphas[0];
    let shared = d.shared_cost();
    let payoffs = (0..s.n())
        .map(|i| s.valuation(i) - alpha / rate - shared / (n * rate))
        .collect();
    Ok(PayoffProfile::new(payoffs))
}

/// A core profile for scenarios satisfying the rate-ratio bound: start every
/// user at `U_i - (alpha_max n + beta + gamma)/(n R_min)` and split the
/// remaining surplus evenly to restore efficiency. In the core whenever
/// [`check_rate_ratio_nonempty`] holds.
pub fn rate_ratio_core_profile(s: &Scenario) -> PayoffProfile {
    let d = derive_constants(s);
    let n = s.n() as f64;
    let r_min = s.rate(argmin_rate(s));
    let pooled = (d.alpha_max() * n + d.shared_cost()) / (n * r_min);
    let base_total: f64 = s.valuations().iter().sum::<f64>() - pooled * n;
    let grand = crate::value::coalition_value(s, Coalition::full(s.n()));
    let correction = (grand - base_total) / n; // >= 0
    let payoffs = (0..s.n())
        .map(|i| s.valuation(i) - pooled + correction)
        .collect();
    PayoffProfile::new(payoffs)
}

/// Whether an inequality compares with `<=`, `>=`, or strict `>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    LessEq,
    GreaterEq,
    Greater,
}

impl Relation {
    pub fn eval(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::LessEq => lhs <= rhs,
            Relation::GreaterEq => lhs >= rhs,
            Relation::Greater => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::LessEq => "<=",
            Relation::GreaterEq => ">=",
            Relation::Greater => ">",
        }
    }
}

/// One inequality of a condition, with both sides reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub satisfied: bool,
}

impl InequalityCheck {
    pub(crate) fn new(label: String, lhs: f64, rhs: f64, relation: Relation) -> Self {
        let satisfied = relation.eval(lhs, rhs);
        Self {
            label,
            lhs,
            rhs,
            relation,
            satisfied,
        }
    }
}

/// Applicability and outcome of one analytical condition, with the binding
/// inequality's sides as diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Do the condition's hypotheses hold for this scenario?
    pub applicable: bool,
    /// Defined only when applicable.
    pub holds: Option<bool>,
    /// Binding (smallest-margin) inequality sides; falls back to the first
    /// failed check when the condition does not hold.
    pub lhs: f64,
    pub rhs: f64,
    pub checks: Vec<InequalityCheck>,
}

impl ConditionReport {
    pub(crate) fn not_applicable(checks: Vec<InequalityCheck>) -> Self {
        Self {
            applicable: false,
            holds: None,
            lhs: f64::NAN,
            rhs: f64::NAN,
            checks,
        }
    }

    pub(crate) fn from_checks(checks: Vec<InequalityCheck>) -> Self {
        // An empty check list holds vacuously.
        let holds = checks.iter().all(|c| c.satisfied);
        // Binding = the failed check if any, else the smallest-margin check.
        let binding = checks.iter().find(|c| !c.satisfied).or_else(|| {
            checks
                .iter()
                .min_by(|a, b| margin(a).partial_cmp(&margin(b)).unwrap())
        });
        let (lhs, rhs) = match binding {
            Some(c) => (c.lhs, c.rhs),
            None => (f64::NAN, f64::NAN),
        };
        Self {
            applicable: true,
            holds: Some(holds),
            lhs,
            rhs,
            checks,
        }
    }
}

fn margin(c: &InequalityCheck) -> f64 {
    match c.relation {
        Relation::LessEq => c.rhs - c.lhs,
        Relation::GreaterEq | Relation::Greater => c.lhs - c.rhs,
    }
}

/// Uniform rates and receive powers guarantee a non-empty core (the game is
/// then convex). Applicable exactly when both are uniform; holds whenever
/// applicable.
pub fn check_uniform_nonempty(s: &Scenario) -> ConditionReport {
    let r_spread = s.rate(argmax_rate(s)) / s.rate(argmin_rate(s));
    let p_max = s
        .rx_powers()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let p_min = s.rx_powers().iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![
        InequalityCheck::new(
            "rate spread R_max/R_min".into(),
            r_spread,
            1.0,
            Relation::LessEq,
        ),
        InequalityCheck::new(
            "receive-power spread P_max/P_min".into(),
            p_max / p_min,
            1.0,
            Relation::LessEq,
        ),
    ];
    if rates_uniform(s) && rx_uniform(s) {
        ConditionReport::from_checks(checks)
    } else {
        ConditionReport::not_applicable(checks)
    }
}

/// Core non-emptiness from the rate-ratio bound:
/// `R_max/R_min <= (n/(n-1)) * (alpha_min (n-1) + beta + gamma) / (alpha_max n + beta + gamma)`.
pub fn check_rate_ratio_nonempty(s: &Scenario) -> ConditionReport {
    if s.n() < 2 {
        return ConditionReport::not_applicable(Vec::new());
    }
    let d = derive_constants(s);
    let n = s.n() as f64;
    let shared = d.shared_cost();
    let lhs = s.rate(argmax_rate(s)) / s.rate(argmin_rate(s));
    let rhs =
        (n / (n - 1.0)) * ((d.alpha_min() * (n - 1.0) + shared) / (d.alpha_max() * n + shared));
    ConditionReport::from_checks(vec![InequalityCheck::new(
        "R_max/R_min vs ratio bound".into(),
        lhs,
        rhs,
        Relation::LessEq,
    )])
}

/// Core emptiness from the second-minimum rate gap: with uniform receive
/// power, `lambda = R_second_min / R_min > 1 + (beta+gamma)/(alpha (n-1))`
/// empties the core. Argmin ties break to the lowest index, making
/// `lambda = 1` (and the condition vacuously false) under tied minima.
pub fn check_second_min_empty(s: &Scenario) -> ConditionReport {
    if s.n() < 2 || !rx_uniform(s) {
        return ConditionReport::not_applicable(Vec::new());
    }
    let d = derive_constants(s);
    let alpha = d.alphas[0];
    let k = argmin_rate(s);
    let j = (0..s.n())
        .filter(|&i| i != k)
        .min_by(|&a, &b| s.rate(a).partial_cmp(&s.rate(b)).unwrap())
        .expect("n >= 2");
    let lambda = s.rate(j) / s.rate(k);
    let threshold = 1.0 + d.shared_cost() / (alpha * (s.n() as f64 - 1.0));
    ConditionReport::from_checks(vec![InequalityCheck::new(
        "lambda vs gap threshold".into(),
        lambda,
        threshold,
        Relation::Greater,
    )])
}

/// Core emptiness from the max/min rate spread: with uniform receive power,
/// `mu = R_max / R_min > 1 + (beta+gamma)/alpha` empties the core.
pub fn check_max_min_empty(s: &Scenario) -> ConditionReport {
    if s.n() < 2 || !rx_uniform(s) {
        return ConditionReport::not_applicable(Vec::new());
    }
    let d = derive_constants(s);
    let alpha = d.alphas[0];
    let mu = s.rate(argmax_rate(s)) / s.rate(argmin_rate(s));
    let threshold = 1.0 + d.shared_cost() / alpha;
    ConditionReport::from_checks(vec![InequalityCheck::new(
        "mu vs spread threshold".into(),
        mu,
        threshold,
        Relation::Greater,
    )])
}

/// First definitive analytical verdict, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CoreScreen {
    NonEmpty {
        condition: CoreCondition,
        report: ConditionReport,
    },
    Empty {
        condition: CoreCondition,
        report: ConditionReport,
    },
    /// No sufficient condition fired; says nothing about the core.
    Inconclusive,
}

/// Run the four analytical conditions in order (the two non-emptiness
/// conditions first) and return the first that fires.
pub fn screen_core(s: &Scenario) -> CoreScreen {
    let uniform = check_uniform_nonempty(s);
    if uniform.holds == Some(true) {
        return CoreScreen::NonEmpty {
            condition: CoreCondition::UniformSymmetric,
            report: uniform,
        };
    }
    let ratio = check_rate_ratio_nonempty(s);
    if ratio.holds == Some(true) {
        return CoreScreen::NonEmpty {
            condition: CoreCondition::RateRatioBound,
            report: ratio,
        };
    }
    let second = check_second_min_empty(s);
    if second.holds == Some(true) {
        return CoreScreen::Empty {
            condition: CoreCondition::SecondMinGap,
            report: second,
        };
    }
    let spread = check_max_min_empty(s);
    if spread.holds == Some(true) {
        return CoreScreen::Empty {
            condition: CoreCondition::MaxMinSpread,
            report: spread,
        };
    }
    CoreScreen::Inconclusive
}
