//! Shared scenario builders for the benchmark targets.

use mcoal_core::rng::SplitMix64;
use mcoal_core::scenario::{defaults, Scenario, ScenarioParams};

/// A seeded instance with rates spread over [20, 400] and mixed receive
/// powers; representative of the hard inputs for the LP and stability scans.
pub fn spread_scenario(seed: u64, n: usize) -> Scenario {
    let mut rng = SplitMix64::new(seed);
    let rates = (0..n).map(|_| rng.uniform(20.0, 400.0)).collect();
    let valuations = (0..n).map(|_| rng.uniform(90.0, 100.0)).collect();
    let rx_powers = (0..n).map(|_| rng.uniform(0.2, 0.4)).collect();
    Scenario::new(ScenarioParams {
        n,
        rates,
        valuations,
        rx_powers,
        tx_power: defaults::TX_POWER,
        a: defaults::USER_ENERGY_COST,
        b: defaults::TX_ENERGY_COST,
        w: defaults::BANDWIDTH_COST,
        file_size: defaults::FILE_SIZE,
    })
    .expect("generated instances are valid")
}

/// Uniform-rate instance; the convex case.
pub fn uniform_scenario(n: usize) -> Scenario {
    Scenario::new(ScenarioParams {
        n,
        rates: vec![100.0; n],
        valuations: vec![95.0; n],
        rx_powers: vec![0.3; n],
        tx_power: defaults::TX_POWER,
        a: defaults::USER_ENERGY_COST,
        b: defaults::TX_ENERGY_COST,
        w: defaults::BANDWIDTH_COST,
        file_size: defaults::FILE_SIZE,
    })
    .expect("uniform instances are valid")
}
