//! The characteristic function.
//!
//! A coalition downloads at its bottleneck rate `R_S = min_{i in S} R_i` and
//! its value is
//!
//! ```text
//! v(S) = sum_{i in S} U_i - sum_{i in S} alpha_i / R_S - (beta + gamma) / R_S
//! ```
//!
//! i.e. total valuation minus reception energy cost minus the transmitter
//! energy and bandwidth costs of one multicast at the bottleneck rate.
//! [`coalition_value`] evaluates the derived-constant form above;
//! [`coalition_value_raw`] evaluates the power/cost form it was folded from.
//! The two agree to relative 1e-12 and the tests hold them to it.

use crate::error::AnalysisError;
use crate::model::{Coalition, Collection};
use crate::scenario::{derive_constants, Scenario};

/// Bottleneck rate of a coalition: the minimum member rate.
pub fn coalition_rate(s: &Scenario, c: Coalition) -> f64 {
    c.members().map(|i| s.rate(i)).fold(f64::INFINITY, f64::min)
}

/// v(S) in the alpha/beta/gamma form.
pub fn coalition_value(s: &Scenario, c: Coalition) -> f64 {
    let rate = coalition_rate(s, c);
    let scale = s.user_energy_cost() * s.file_size();
    let mut utilities = 0.0;
    let mut alpha_sum = 0.0;
    for i in c.members() {
        utilities += s.valuation(i);
        alpha_sum += scale * s.rx_power(i);
    }
    let beta = s.tx_energy_cost() * s.tx_power() * s.file_size();
    let gamma = s.bandwidth_cost() * s.file_size();
    utilities - alpha_sum / rate - (beta + gamma) / rate
}

/// v(S) evaluated directly from powers, unit costs, and download time
/// `X / R_S`, without the derived constants.
pub fn coalition_value_raw(s: &Scenario, c: Coalition) -> f64 {
    let rate = coalition_rate(s, c);
    let time = s.file_size() / rate;
    let mut value = 0.0;
    for i in c.members() {
        value += s.valuation(i);
        value -= s.user_energy_cost() * s.rx_power(i) * time;
    }
    value -= s.tx_energy_cost() * s.tx_power() * time;
    value -= s.bandwidth_cost() * time;
    value
}

/// Value of a collection: the sum of its parts' values.
pub fn collection_value(s: &Scenario, col: &Collection) -> f64 {
    col.parts().iter().map(|&p| coalition_value(s, p)).sum()
}

/// Precomputed v(S) for every non-empty subset, indexed by bitmask.
///
/// Built once per scenario and then immutable, so it can be shared freely.
/// Construction is O(2^n) time and memory; callers gate n with
/// [`crate::limits::EnumLimits`] before building.
pub struct ValueTable {
    n: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(s: &Scenario) -> Self {
        let n = s.n();
        assert!(n <= 26, "value table would need 2^{n} entries");
        let d = derive_constants(s);
        let shared = d.shared_cost();
        let size = 1usize << n;

        // Lowest-set-bit recurrences over the subset lattice.
        let mut utility = vec![0.0f64; size];
        let mut alpha = vec![0.0f64; size];
        let mut rate = vec![f64::INFINITY; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            utility[mask] = utility[rest] + s.valuation(low);
            alpha[mask] = alpha[rest] + d.alphas[low];
            rate[mask] = rate[rest].min(s.rate(low));
        }

        let mut values = vec![0.0f64; size];
        for mask in 1..size {
            values[mask] = utility[mask] - (alpha[mask] + shared) / rate[mask];
        }
        Self { n, values }
    }

    /// Same as [`ValueTable::new`] but refusing scenarios past `cap` users.
    pub fn with_cap(s: &Scenario, what: &'static str, cap: usize) -> Result<Self, AnalysisError> {
        if s.n() > cap {
            return Err(AnalysisError::SizeLimit {
                what,
                size: s.n(),
                cap,
            });
        }
        Ok(Self::new(s))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// v for a subset given as a bitmask; v(empty) = 0 by convention.
    pub fn value_of_mask(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    pub fn value(&self, c: Coalition) -> f64 {
        self.value_of_mask(c.mask())
    }

    /// v of the grand coalition.
    pub fn grand_value(&self) -> f64 {
        self.value_of_mask(Coalition::full(self.n).mask())
    }
}
