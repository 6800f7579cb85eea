//! Parameter sweeps: the grand-coalition / partition / individual-download
//! comparison across one varying axis, emitted as CSV or JSON lines.
//!
//! Stochastic scenario fields are realized once from the base (seeded
//! generator or inline scenario) and held fixed across the whole sweep, so
//! the per-mode curves stay commensurate. Rows are computed in grid order
//! and the output order equals the grid order.

use crate::core_analysis::{screen_core, CoreScreen};
use crate::dc_stability::is_dc_stable;
use crate::error::AnalysisError;
use crate::limits::EnumLimits;
use crate::model::Collection;
use crate::model::{Coalition, Partition};
use crate::scenario::{
    banded_rates, generate_scenario, GeneratorError, GeneratorSpec, InvalidScenario, Scenario,
    ScenarioParams,
};
use crate::value::{coalition_value, collection_value};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

/// The three comparison modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// All users in one coalition.
    Grand,
    /// A fixed partition of the users.
    FixedPartition(Partition),
    /// Every user downloads alone.
    Singletons,
}

/// Sum of utilities of all users under a mode.
pub fn mode_sum(s: &Scenario, mode: &Mode) -> Result<f64, AnalysisError> {
    match mode {
        Mode::Grand => Ok(coalition_value(s, Coalition::full(s.n()))),
        Mode::FixedPartition(p) => {
            if p.n() != s.n() {
                return Err(AnalysisError::PartitionMismatch {
                    partition_users: p.n(),
                    scenario_users: s.n(),
                });
            }
            Ok(collection_value(s, &Collection::from(p)))
        }
        Mode::Singletons => Ok((0..s.n())
            .map(|i| coalition_value(s, Coalition::singleton(i)))
            .sum()),
    }
}

/// Mode as written in sweep-spec files. `sequential_blocks` resolves to
/// index-order chunks per grid point, which is what the user-count axis
/// needs (the partition must grow with n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Grand,
    Singletons,
    /// Explicit 1-based blocks, e.g. `[[1,2,3],[4,5]]`.
    Partition {
        blocks: Vec<Vec<usize>>,
    },
    SequentialBlocks {
        size: usize,
    },
}

impl ModeSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ModeSpec::Grand => "grand",
            ModeSpec::Singletons => "singletons",
            ModeSpec::Partition { .. } | ModeSpec::SequentialBlocks { .. } => "partition",
        }
    }

    fn resolve(&self, n: usize) -> Result<Mode, SweepError> {
        match self {
            ModeSpec::Grand => Ok(Mode::Grand),
            ModeSpec::Singletons => Ok(Mode::Singletons),
            ModeSpec::Partition { blocks } => {
                let p = Partition::from_one_based(blocks, n)
                    .map_err(|e| SweepError::BadPartition(e.to_string()))?;
                Ok(Mode::FixedPartition(p))
            }
            ModeSpec::SequentialBlocks { size } => {
                if *size == 0 {
                    return Err(SweepError::BadPartition(
                        "block size must be positive".into(),
                    ));
                }
                Ok(Mode::FixedPartition(Partition::sequential_blocks(n, *size)))
            }
        }
    }
}

/// The swept parameter.
///
/// - `min_rate`: rate of the base scenario's minimum-rate user; grid values
///   may not exceed the second-lowest rate (the swept user must stay the
///   minimum-rate user).
/// - `rx_power`: every user's receive power set to the grid value.
/// - `tx_power`: transmitter power.
/// - `max_rate`: rate of the base scenario's maximum-rate user; grid values
///   may not drop below the lowest rate among the other users (the identity
///   of the minimum-rate user must not change), but may drop below other
///   rates — the swept user is positional, as in the reference study.
/// - `num_users`: user count; rates regenerate through the banded rule,
///   receive power is pinned to 0.5 W, valuations are the base's first n.
/// - `file_size`: the shared file size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    MinRate,
    #[serde(rename = "rx_power")]
    RxPowerUniform,
    TxPower,
    MaxRate,
    NumUsers,
    FileSize,
}

impl SweepAxis {
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::MinRate => "min_rate",
            SweepAxis::RxPowerUniform => "rx_power",
            SweepAxis::TxPower => "tx_power",
            SweepAxis::MaxRate => "max_rate",
            SweepAxis::NumUsers => "num_users",
            SweepAxis::FileSize => "file_size",
        }
    }
}

/// Where the base scenario comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    Scenario(Scenario),
    Generator(GeneratorSpec),
}

impl ScenarioSource {
    pub fn realize(&self) -> Result<Scenario, SweepError> {
        match self {
            ScenarioSource::Scenario(s) => Ok(s.clone()),
            ScenarioSource::Generator(g) => Ok(generate_scenario(g.seed, g.n, &g.rate_rule)?),
        }
    }
}

fn default_annotate() -> bool {
    false
}

/// A declarative sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: ScenarioSource,
    pub axis: SweepAxis,
    /// Strictly increasing, non-empty.
    pub grid: Vec<f64>,
    pub modes: Vec<ModeSpec>,
    /// Attach a core screen and (for partition modes) a stability verdict to
    /// each row.
    #[serde(default = "default_annotate")]
    pub annotate: bool,
}

/// Stability annotations for one row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowAnnotations {
    /// Analytical core screen: "non-empty", "empty", or "inconclusive".
    pub core: &'static str,
    /// Stability of the row's partition mode, when one exists and fits the
    /// enumeration caps.
    pub dc_stable: Option<bool>,
}

/// One grid point: the axis value and one sum per requested mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub sums: Vec<f64>,
    pub annotations: Option<RowAnnotations>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("grid must be non-empty and strictly increasing")]
    Grid,
    #[error("grid value {value} out of the axis domain: {reason}")]
    GridDomain { value: f64, reason: String },
    #[error("bad partition mode: {0}")]
    BadPartition(String),
    #[error("user-count sweep needs at least {needed} base valuations, have {available}")]
    ShortBase { needed: usize, available: usize },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Invalid(#[from] InvalidScenario),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("writing results failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Run a sweep; one row per grid value, in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    let base = spec.base.realize()?;
    if spec.grid.is_empty() || spec.grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SweepError::Grid);
    }
    let limits = EnumLimits::from_env();

    let mut rows = Vec::with_capacity(spec.grid.len());
    for &value in &spec.grid {
        let scenario = scenario_at(&base, spec.axis, value)?;
        let modes: Vec<Mode> = spec
            .modes
            .iter()
            .map(|m| m.resolve(scenario.n()))
            .collect::<Result<_, _>>()?;
        let sums = modes
            .iter()
            .map(|m| mode_sum(&scenario, m))
            .collect::<Result<Vec<_>, _>>()?;
        let annotations = if spec.annotate {
            Some(annotate(&scenario, &modes, &limits))
        } else {
            None
        };
        rows.push(SweepRow {
            axis_value: value,
            sums,
            annotations,
        });
    }
    Ok(rows)
}

fn annotate(s: &Scenario, modes: &[Mode], limits: &EnumLimits) -> RowAnnotations {
    let core = match screen_core(s) {
        CoreScreen::NonEmpty { .. } => "non-empty",
        CoreScreen::Empty { .. } => "empty",
        CoreScreen::Inconclusive => "inconclusive",
    };
    let dc_stable = modes.iter().find_map(|m| match m {
        Mode::FixedPartition(p) => is_dc_stable(s, p, limits).ok().map(|v| v.stable),
        _ => None,
    });
    RowAnnotations { core, dc_stable }
}

fn scenario_at(base: &Scenario, axis: SweepAxis, value: f64) -> Result<Scenario, SweepError> {
    let reject = |reason: String| SweepError::GridDomain { value, reason };
    match axis {
        SweepAxis::MinRate => {
            let target = argmin(base.rates());
            let others_from_min = min_excluding(base.rates(), target);
            if value <= 0.0 {
                return Err(reject("rates must be positive".into()));
            }
            if value > others_from_min {
                return Err(reject(format!(
                    "{value} exceeds the second-lowest rate {others_from_min}; the swept user would no longer have the minimum rate"
                )));
            }
            Ok(base.with_rate(target, value)?)
        }
        SweepAxis::RxPowerUniform => {
            if value <= 0.0 {
                return Err(reject("receive power must be positive".into()));
            }
            Ok(base.with_uniform_rx_power(value)?)
        }
        SweepAxis::TxPower => {
            if value <= 0.0 {
                return Err(reject("transmit power must be positive".into()));
            }
            Ok(base.with_tx_power(value)?)
        }
        SweepAxis::MaxRate => {
            let target = argmax(base.rates());
            if value <= 0.0 {
                return Err(reject("rates must be positive".into()));
            }
            if base.n() > 1 {
                let floor = min_excluding(base.rates(), target);
                if value < floor {
                    return Err(reject(format!(
                        "{value} is below the lowest other rate {floor}; the minimum-rate user would change"
                    )));
                }
            }
            Ok(base.with_rate(target, value)?)
        }
        SweepAxis::NumUsers => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(reject("user counts must be positive integers".into()));
            }
            let n = value as usize;
            if n > base.n() {
                return Err(SweepError::ShortBase {
                    needed: n,
                    available: base.n(),
                });
            }
            let params = ScenarioParams {
                n,
                rates: banded_rates(n)?,
                valuations: base.valuations()[..n].to_vec(),
                rx_powers: vec![0.5; n],
                tx_power: base.tx_power(),
                a: base.user_energy_cost(),
                b: base.tx_energy_cost(),
                w: base.bandwidth_cost(),
                file_size: base.file_size(),
            };
            Ok(Scenario::new(params)?)
        }
        SweepAxis::FileSize => {
            if value <= 0.0 {
                return Err(reject("file size must be positive".into()));
            }
            Ok(base.with_file_size(value)?)
        }
    }
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x < xs[best] {
            best = i;
        }
    }
    best
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

fn min_excluding(xs: &[f64], skip: usize) -> f64 {
    xs.iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &x)| x)
        .fold(f64::INFINITY, f64::min)
}

/// Output format of [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFormat {
    Csv,
    Jsonl,
}

/// Render `value` with six significant digits in plain decimal notation.
/// The rendering is stable: parsing and re-rendering reproduces the bytes.
pub fn format_sig6(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

/// Write rows as CSV (`axis,<mode columns>[,core,dc_stable]`, values at six
/// significant digits) or as JSON lines with full-precision values.
pub fn emit_results<W: Write>(
    spec: &SweepSpec,
    rows: &[SweepRow],
    format: SweepFormat,
    out: &mut W,
) -> std::io::Result<()> {
    let labels = mode_labels(&spec.modes);
    match format {
        SweepFormat::Csv => {
            let mut header = vec!["axis".to_string()];
            header.extend(labels.iter().cloned());
            if spec.annotate {
                header.push("core".to_string());
                header.push("dc_stable".to_string());
            }
            writeln!(out, "{}", header.join(","))?;
            for row in rows {
                let mut fields = vec![format_sig6(row.axis_value)];
                fields.extend(row.sums.iter().map(|&v| format_sig6(v)));
                if let Some(ann) = &row.annotations {
                    fields.push(ann.core.to_string());
                    fields.push(match ann.dc_stable {
                        Some(b) => b.to_string(),
                        None => String::new(),
                    });
                }
                writeln!(out, "{}", fields.join(","))?;
            }
        }
        SweepFormat::Jsonl => {
            for row in rows {
                let mut object = serde_json::Map::new();
                object.insert("axis".into(), serde_json::json!(row.axis_value));
                for (label, &sum) in labels.iter().zip(&row.sums) {
                    object.insert(label.clone(), serde_json::json!(sum));
                }
                if let Some(ann) = &row.annotations {
                    object.insert("core".into(), serde_json::json!(ann.core));
                    object.insert("dc_stable".into(), serde_json::json!(ann.dc_stable));
                }
                writeln!(out, "{}", serde_json::Value::Object(object))?;
            }
        }
    }
    Ok(())
}

/// Column labels for the modes, disambiguating repeated labels by suffix.
fn mode_labels(modes: &[ModeSpec]) -> Vec<String> {
    let mut labels = Vec::with_capacity(modes.len());
    for mode in modes {
        let base = mode.label().to_string();
        let mut label = base.clone();
        let mut k = 2;
        while labels.contains(&label) {
            label = format!("{base}{k}");
            k += 1;
        }
        labels.push(label);
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::reference_scenario;

    fn reference_spec(axis: SweepAxis, grid: Vec<f64>) -> SweepSpec {
        SweepSpec {
            base: ScenarioSource::Scenario(reference_scenario()),
            axis,
            grid,
            modes: vec![
                ModeSpec::Grand,
                ModeSpec::SequentialBlocks { size: 5 },
                ModeSpec::Singletons,
            ],
            annotate: false,
        }
    }

    #[test]
    fn reference_mode_sums() {
        let s = reference_scenario();
        let grand = mode_sum(&s, &Mode::Grand).unwrap();
        assert!((grand - 1883.25).abs() < 1e-9);
        let partition = mode_sum(
            &s,
            &Mode::FixedPartition(Partition::sequential_blocks(20, 5)),
        )
        .unwrap();
        assert!((partition - 1892.1166666667).abs() < 1e-3);
        let singles = mode_sum(&s, &Mode::Singletons).unwrap();
        assert!((singles - 1886.115).abs() < 1e-2);
        assert!(partition > singles && singles > grand);
    }

    #[test]
    fn partition_mode_must_match_user_count() {
        let s = reference_scenario();
        let p = Partition::singletons(5);
        assert!(matches!(
            mode_sum(&s, &Mode::FixedPartition(p)),
            Err(AnalysisError::PartitionMismatch { .. })
        ));
    }

    #[test]
    fn file_size_sweep_is_affine() {
        let spec = reference_spec(SweepAxis::FileSize, vec![5.0, 10.0, 15.0]);
        let rows = run_sweep(&spec).unwrap();
        for col in 0..3 {
            let y: Vec<f64> = rows.iter().map(|r| r.sums[col]).collect();
            let interpolated = (y[0] + y[2]) / 2.0;
            assert!(
                (y[1] - interpolated).abs() <= 1e-9 * y[1].abs(),
                "column {col} not affine: {y:?}"
            );
        }
    }

    #[test]
    fn min_rate_domain_enforced() {
        // Second-lowest reference rate is 25.
        let spec = reference_spec(SweepAxis::MinRate, vec![10.0, 26.0]);
        assert!(matches!(
            run_sweep(&spec),
            Err(SweepError::GridDomain { .. })
        ));
        let ok = reference_spec(SweepAxis::MinRate, vec![10.0, 25.0]);
        assert!(run_sweep(&ok).is_ok());
    }

    #[test]
    fn max_rate_domain_enforced() {
        // Keeping the minimum-rate user fixed floors the grid at 20.
        let spec = reference_spec(SweepAxis::MaxRate, vec![10.0, 100.0]);
        assert!(matches!(
            run_sweep(&spec),
            Err(SweepError::GridDomain { .. })
        ));
        let ok = reference_spec(SweepAxis::MaxRate, vec![20.0, 100.0, 230.0]);
        assert!(run_sweep(&ok).is_ok());
    }

    #[test]
    fn grid_must_increase() {
        let spec = reference_spec(SweepAxis::FileSize, vec![10.0, 10.0]);
        assert!(matches!(run_sweep(&spec), Err(SweepError::Grid)));
        let empty = reference_spec(SweepAxis::FileSize, vec![]);
        assert!(matches!(run_sweep(&empty), Err(SweepError::Grid)));
    }

    #[test]
    fn num_users_sweep_regenerates_banded_rates() {
        let spec = reference_spec(SweepAxis::NumUsers, vec![2.0, 7.0, 20.0]);
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 3);
        // All of the base's valuations are 95 and rx is pinned to 0.5, so
        // the n=2 grand value is 190 - (2*25 + 35)/20.
        let expected = 190.0 - 85.0 / 20.0;
        assert!((rows[0].sums[0] - expected).abs() < 1e-9);

        let fractional = reference_spec(SweepAxis::NumUsers, vec![2.5]);
        assert!(matches!(
            run_sweep(&fractional),
            Err(SweepError::GridDomain { .. })
        ));
        let oversize = reference_spec(SweepAxis::NumUsers, vec![21.0]);
        assert!(matches!(
            run_sweep(&oversize),
            Err(SweepError::ShortBase { .. })
        ));
    }

    #[test]
    fn csv_roundtrip_is_stable() {
        let mut spec = reference_spec(SweepAxis::TxPower, vec![1.0, 2.0, 4.0]);
        spec.annotate = true;
        let rows = run_sweep(&spec).unwrap();
        let mut first = Vec::new();
        emit_results(&spec, &rows, SweepFormat::Csv, &mut first).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();

        // Parse back and re-render: byte-identical.
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("axis,grand,partition,singletons"));
        for (line, row) in lines.zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            for (field, &sum) in fields[1..=3].iter().zip(&row.sums) {
                let parsed: f64 = field.parse().unwrap();
                assert_eq!(format_sig6(parsed), *field);
                assert!((parsed - sum).abs() <= 1e-4 * sum.abs());
            }
        }
    }

    #[test]
    fn jsonl_rows_parse() {
        let spec = reference_spec(SweepAxis::RxPowerUniform, vec![0.2, 0.3]);
        let rows = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        emit_results(&spec, &rows, SweepFormat::Jsonl, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for (line, row) in text.lines().zip(&rows) {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["axis"].as_f64().unwrap(), row.axis_value);
            assert_eq!(v["grand"].as_f64().unwrap(), row.sums[0]);
        }
    }

    #[test]
    fn grand_only_emission_has_two_columns() {
        let spec = SweepSpec {
            base: ScenarioSource::Scenario(reference_scenario()),
            axis: SweepAxis::FileSize,
            grid: vec![10.0],
            modes: vec![ModeSpec::Grand],
            annotate: false,
        };
        let rows = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        emit_results(&spec, &rows, SweepFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "axis,grand");
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 2);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(1892.1166666667), "1892.12");
        assert_eq!(format_sig6(0.0123456789), "0.0123457");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(-35.0), "-35.0000");
        assert_eq!(format_sig6(123456.0), "123456");
    }
}
