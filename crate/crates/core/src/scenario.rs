//! Game scenarios: per-user rates, valuations and receive powers, plus the
//! global cost parameters, with strict validation at construction.
//!
//! A scenario is immutable once built, so it can be shared read-only across
//! threads. Derived cost constants come out of [`derive_constants`]:
//! `alpha_i = a * P_rx_i * X`, `beta = b * P_tx * X`, `gamma = w * X`.

use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Default cost parameters used by the scenario generator and the shipped
/// example files: transmit power 2 W, a = 5, b = 1.5, w = 0.5, file size 10.
pub mod defaults {
    pub const TX_POWER: f64 = 2.0;
    pub const USER_ENERGY_COST: f64 = 5.0;
    pub const TX_ENERGY_COST: f64 = 1.5;
    pub const BANDWIDTH_COST: f64 = 0.5;
    pub const FILE_SIZE: f64 = 10.0;
    /// Base rates of the banded rate rule; band k spans 5 users at
    /// `BASES[k] + 5*j` for j in 0..5.
    pub const BANDED_BASES: [f64; 4] = [20.0, 100.0, 150.0, 200.0];
    pub const BANDED_STEP: f64 = 5.0;
    pub const BANDED_BLOCK: usize = 5;
    pub const VALUATION_RANGE: (f64, f64) = (90.0, 100.0);
    pub const RX_POWER_RANGE: (f64, f64) = (0.2, 0.4);
}

/// One violation found while validating raw scenario fields. Validation
/// reports *all* violations, not just the first.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("rates[{index}] = {value} must be strictly positive")]
    NonPositiveRate { index: usize, value: f64 },
    #[error("valuations[{index}] = {value} must be non-negative")]
    NegativeValuation { index: usize, value: f64 },
    #[error("rx_powers[{index}] = {value} must be strictly positive")]
    NonPositiveRxPower { index: usize, value: f64 },
    #[error("{field} = {value} must be strictly positive")]
    NonPositiveParameter { field: &'static str, value: f64 },
    #[error("{field} has length {actual}, expected n = {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{field} contains a non-finite value")]
    NonFinite { field: &'static str },
    #[error("n must be at least 1")]
    NoUsers,
}

/// All violations from one validation pass.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid scenario: {}", .violations.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
pub struct InvalidScenario {
    pub violations: Vec<ScenarioError>,
}

/// Raw, unvalidated scenario fields. This is what scenario files deserialize
/// into before validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n: usize,
    pub rates: Vec<f64>,
    pub valuations: Vec<f64>,
    pub rx_powers: Vec<f64>,
    pub tx_power: f64,
    pub a: f64,
    pub b: f64,
    pub w: f64,
    pub file_size: f64,
}

/// A validated game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ScenarioParams", try_from = "ScenarioParams")]
pub struct Scenario {
    n: usize,
    rates: Vec<f64>,
    valuations: Vec<f64>,
    rx_powers: Vec<f64>,
    tx_power: f64,
    a: f64,
    b: f64,
    w: f64,
    file_size: f64,
}

impl From<Scenario> for ScenarioParams {
    fn from(s: Scenario) -> Self {
        ScenarioParams {
            n: s.n,
            rates: s.rates,
            valuations: s.valuations,
            rx_powers: s.rx_powers,
            tx_power: s.tx_power,
            a: s.a,
            b: s.b,
            w: s.w,
            file_size: s.file_size,
        }
    }
}

impl TryFrom<ScenarioParams> for Scenario {
    type Error = InvalidScenario;

    fn try_from(params: ScenarioParams) -> Result<Self, Self::Error> {
        Scenario::new(params)
    }
}

impl Scenario {
    /// Validate raw fields into a scenario, or report the complete list of
    /// violations.
    pub fn new(params: ScenarioParams) -> Result<Self, InvalidScenario> {
        let mut violations = Vec::new();
        let n = params.n;
        if n == 0 {
            violations.push(ScenarioError::NoUsers);
        }

        let check_len = |violations: &mut Vec<ScenarioError>, field, actual| {
            if n != 0 && actual != n {
                violations.push(ScenarioError::LengthMismatch {
                    field,
                    expected: n,
                    actual,
                });
            }
        };
        check_len(&mut violations, "rates", params.rates.len());
        check_len(&mut violations, "valuations", params.valuations.len());
        check_len(&mut violations, "rx_powers", params.rx_powers.len());

        for (index, &value) in params.rates.iter().enumerate() {
            if !value.is_finite() {
                violations.push(ScenarioError::NonFinite { field: "rates" });
            } else if value <= 0.0 {
                violations.push(ScenarioError::NonPositiveRate { index, value });
            }
        }
        for (index, &value) in params.valuations.iter().enumerate() {
            if !value.is_finite() {
                violations.push(ScenarioError::NonFinite {
                    field: "valuations",
                });
            } else if value < 0.0 {
                violations.push(ScenarioError::NegativeValuation { index, value });
            }
        }
        for (index, &value) in params.rx_powers.iter().enumerate() {
            if !value.is_finite() {
                violations.push(ScenarioError::NonFinite { field: "rx_powers" });
            } else if value <= 0.0 {
                violations.push(ScenarioError::NonPositiveRxPower { index, value });
            }
        }

        let mut check_param = |field, value: f64| {
            if !value.is_finite() {
                violations.push(ScenarioError::NonFinite { field });
            } else if value <= 0.0 {
                violations.push(ScenarioError::NonPositiveParameter { field, value });
            }
        };
        check_param("tx_power", params.tx_power);
        check_param("a", params.a);
        check_param("b", params.b);
        check_param("w", params.w);
        check_param("file_size", params.file_size);

        if !violations.is_empty() {
            return Err(InvalidScenario { violations });
        }
        Ok(Self {
            n,
            rates: params.rates,
            valuations: params.valuations,
            rx_powers: params.rx_powers,
            tx_power: params.tx_power,
            a: params.a,
            b: params.b,
            w: params.w,
            file_size: params.file_size,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    pub fn rx_powers(&self) -> &[f64] {
        &self.rx_powers
    }

    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    pub fn valuation(&self, i: usize) -> f64 {
        self.valuations[i]
    }

    pub fn rx_power(&self, i: usize) -> f64 {
        self.rx_powers[i]
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn user_energy_cost(&self) -> f64 {
        self.a
    }

    pub fn tx_energy_cost(&self) -> f64 {
        self.b
    }

    pub fn bandwidth_cost(&self) -> f64 {
        self.w
    }

    pub fn file_size(&self) -> f64 {
        self.file_size
    }

    /// Copy with one user's rate replaced. Used by parameter sweeps.
    pub fn with_rate(&self, index: usize, rate: f64) -> Result<Self, InvalidScenario> {
        let mut params = ScenarioParams::from(self.clone());
        params.rates[index] = rate;
        Self::new(params)
    }

    /// Copy with every receive power set to `rx`.
    pub fn with_uniform_rx_power(&self, rx: f64) -> Result<Self, InvalidScenario> {
        let mut params = ScenarioParams::from(self.clone());
        params.rx_powers = vec![rx; self.n];
        Self::new(params)
    }

    pub fn with_tx_power(&self, tx: f64) -> Result<Self, InvalidScenario> {
        let mut params = ScenarioParams::from(self.clone());
        params.tx_power = tx;
        Self::new(params)
    }

    pub fn with_file_size(&self, x: f64) -> Result<Self, InvalidScenario> {
        let mut params = ScenarioParams::from(self.clone());
        params.file_size = x;
        Self::new(params)
    }
}

/// The derived cost constants of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedConstants {
    /// Per-user reception cost `alpha_i = a * P_rx_i * X`.
    pub alphas: Vec<f64>,
    /// Transmitter energy cost `beta = b * P_tx * X`.
    pub beta: f64,
    /// Bandwidth cost `gamma = w * X`.
    pub gamma: f64,
}

impl DerivedConstants {
    pub fn alpha_min(&self) -> f64 {
        self.alphas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn alpha_max(&self) -> f64 {
        self.alphas
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `beta + gamma`, the per-transmission cost numerator shared by a
    /// coalition.
    pub fn shared_cost(&self) -> f64 {
        self.beta + self.gamma
    }
}

pub fn derive_constants(s: &Scenario) -> DerivedConstants {
    let scale = s.user_energy_cost() * s.file_size();
    DerivedConstants {
        alphas: s.rx_powers().iter().map(|p| scale * p).collect(),
        beta: s.tx_energy_cost() * s.tx_power() * s.file_size(),
        gamma: s.bandwidth_cost() * s.file_size(),
    }
}

/// How the generator assigns per-user rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateRule {
    /// Rates given outright; length must equal n.
    Explicit(Vec<f64>),
    /// Banded rates: user i (1-based) gets `bases[ceil(i/block)] + step*((i-1) mod block)`.
    /// With the default bases/step/block and n = 20 this yields
    /// 20,25,...,40, 100,...,120, 150,...,170, 200,...,220.
    Banded {
        #[serde(default = "banded_bases_default")]
        bases: Vec<f64>,
        #[serde(default = "banded_step_default")]
        step: f64,
        #[serde(default = "banded_block_default")]
        block: usize,
    },
}

fn banded_bases_default() -> Vec<f64> {
    defaults::BANDED_BASES.to_vec()
}

fn banded_step_default() -> f64 {
    defaults::BANDED_STEP
}

fn banded_block_default() -> usize {
    defaults::BANDED_BLOCK
}

impl RateRule {
    pub fn banded_default() -> Self {
        RateRule::Banded {
            bases: banded_bases_default(),
            step: banded_step_default(),
            block: banded_block_default(),
        }
    }
}

/// The default 20-user rate list produced by the banded rule.
pub fn default_rate_list() -> Vec<f64> {
    banded_rates(20).expect("20 users fit the default bands")
}

/// Rates for `n` users under the default banded rule.
pub fn banded_rates(n: usize) -> Result<Vec<f64>, GeneratorError> {
    rates_for_rule(&RateRule::banded_default(), n)
}

fn rates_for_rule(rule: &RateRule, n: usize) -> Result<Vec<f64>, GeneratorError> {
    match rule {
        RateRule::Explicit(rates) => {
            if rates.len() != n {
                return Err(GeneratorError::RateListLength {
                    expected: n,
                    actual: rates.len(),
                });
            }
            Ok(rates.clone())
        }
        RateRule::Banded { bases, step, block } => {
            if *block == 0 {
                return Err(GeneratorError::EmptyBand);
            }
            if n > bases.len() * block {
                return Err(GeneratorError::UnsupportedN {
                    n,
                    max: bases.len() * block,
                });
            }
            Ok((0..n)
                .map(|i| bases[i / block] + step * (i % block) as f64)
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    #[error("banded rate rule supports at most {max} users, requested {n}; extend the bases")]
    UnsupportedN { n: usize, max: usize },
    #[error("explicit rate list has length {actual}, expected {expected}")]
    RateListLength { expected: usize, actual: usize },
    #[error("banded rate rule needs a positive block size")]
    EmptyBand,
    #[error(transparent)]
    Invalid(#[from] InvalidScenario),
}

/// Generator block of a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub n: usize,
    pub rate_rule: RateRule,
}

/// Generate a scenario from a seed: valuations uniform in `[90, 100]`,
/// receive powers uniform in `[0.2, 0.4]` W, rates per `rate_rule`, cost
/// parameters at their defaults.
///
/// Draws come from SplitMix64 keyed by `seed`, in user-index order with each
/// user's valuation drawn before its receive power. The prefix of the stream
/// therefore only depends on the user index, so `generate_scenario(seed, m,
/// ...)` and `generate_scenario(seed, n, ...)` agree on the first `min(m, n)`
/// users.
pub fn generate_scenario(
    seed: u64,
    n: usize,
    rate_rule: &RateRule,
) -> Result<Scenario, GeneratorError> {
    let rates = rates_for_rule(rate_rule, n)?;
    let mut rng = SplitMix64::new(seed);
    let mut valuations = Vec::with_capacity(n);
    let mut rx_powers = Vec::with_capacity(n);
    for _ in 0..n {
        let (ulo, uhi) = defaults::VALUATION_RANGE;
        valuations.push(rng.uniform(ulo, uhi));
        let (plo, phi) = defaults::RX_POWER_RANGE;
        rx_powers.push(rng.uniform(plo, phi));
    }
    let scenario = Scenario::new(ScenarioParams {
        n,
        rates,
        valuations,
        rx_powers,
        tx_power: defaults::TX_POWER,
        a: defaults::USER_ENERGY_COST,
        b: defaults::TX_ENERGY_COST,
        w: defaults::BANDWIDTH_COST,
        file_size: defaults::FILE_SIZE,
    })?;
    Ok(scenario)
}

/// On-disk scenario document: either the explicit fields of
/// [`ScenarioParams`] or a `generator` block, not both.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_powers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_size: Option<f64>,
}

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("scenario document mixes a generator block with explicit fields")]
    MixedSource,
    #[error("scenario document is missing field {0}")]
    MissingField(&'static str),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Invalid(#[from] InvalidScenario),
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, ScenarioFileError> {
        if let Some(generator) = self.generator {
            let explicit = self.n.is_some()
                || self.rates.is_some()
                || self.valuations.is_some()
                || self.rx_powers.is_some()
                || self.tx_power.is_some()
                || self.a.is_some()
                || self.b.is_some()
                || self.w.is_some()
                || self.file_size.is_some();
            if explicit {
                return Err(ScenarioFileError::MixedSource);
            }
            return Ok(generate_scenario(
                generator.seed,
                generator.n,
                &generator.rate_rule,
            )?);
        }
        let params = ScenarioParams {
            n: self.n.ok_or(ScenarioFileError::MissingField("n"))?,
            rates: self.rates.ok_or(ScenarioFileError::MissingField("rates"))?,
            valuations: self
                .valuations
                .ok_or(ScenarioFileError::MissingField("valuations"))?,
            rx_powers: self
                .rx_powers
                .ok_or(ScenarioFileError::MissingField("rx_powers"))?,
            tx_power: self
                .tx_power
                .ok_or(ScenarioFileError::MissingField("tx_power"))?,
            a: self.a.ok_or(ScenarioFileError::MissingField("a"))?,
            b: self.b.ok_or(ScenarioFileError::MissingField("b"))?,
            w: self.w.ok_or(ScenarioFileError::MissingField("w"))?,
            file_size: self
                .file_size
                .ok_or(ScenarioFileError::MissingField("file_size"))?,
        };
        Ok(Scenario::new(params)?)
    }
}

/// The deterministic 20-user reference instance: every valuation 95, every
/// receive power 0.3 W, the default rate list, and the default costs. With
/// these numbers `alpha_i = 15`, `beta = 30`, `gamma = 5`, which makes the
/// expected analysis results hand-checkable; the test suite leans on it.
pub fn reference_scenario() -> Scenario {
    let n = 20;
    Scenario::new(ScenarioParams {
        n,
        rates: default_rate_list(),
        valuations: vec![95.0; n],
        rx_powers: vec![0.3; n],
        tx_power: defaults::TX_POWER,
        a: defaults::USER_ENERGY_COST,
        b: defaults::TX_ENERGY_COST,
        w: defaults::BANDWIDTH_COST,
        file_size: defaults::FILE_SIZE,
    })
    .expect("reference instance is valid")
}

/// Parse a scenario from JSON text.
pub fn scenario_from_json(text: &str) -> Result<Scenario, ScenarioFileError> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    file.into_scenario()
}

/// Load a scenario from a JSON file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    scenario_from_json(&text)
}
