//! Exact-rational evaluation of the characteristic function.
//!
//! Every scenario field is an f64 and therefore an exact dyadic rational, so
//! v(S) is an exact rational number. This path exists to settle tolerance
//! disputes in tests: when the f64 evaluator and an oracle disagree near a
//! threshold, the rational value decides who is right. It is not used on any
//! production code path.

use crate::model::Coalition;
use crate::scenario::Scenario;
use num::rational::BigRational;
use num::{FromPrimitive, Zero};

/// Exact conversion; panics on non-finite input, which validated scenarios
/// never contain.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite by scenario validation")
}

/// Bottleneck rate as an exact rational.
pub fn coalition_rate_exact(s: &Scenario, c: Coalition) -> BigRational {
    c.members()
        .map(|i| rational_from_f64(s.rate(i)))
        .min()
        .expect("coalition is non-empty")
}

/// v(S) evaluated in exact rational arithmetic.
pub fn coalition_value_exact(s: &Scenario, c: Coalition) -> BigRational {
    let rate = coalition_rate_exact(s, c);
    let x = rational_from_f64(s.file_size());
    let a = rational_from_f64(s.user_energy_cost());
    let mut utilities = BigRational::zero();
    let mut rx_sum = BigRational::zero();
    for i in c.members() {
        utilities += rational_from_f64(s.valuation(i));
        rx_sum += rational_from_f64(s.rx_power(i));
    }
    let beta = rational_from_f64(s.tx_energy_cost()) * rational_from_f64(s.tx_power()) * &x;
    let gamma = rational_from_f64(s.bandwidth_cost()) * &x;
    utilities - (a * rx_sum * &x + beta + gamma) / rate
}

/// Closest f64 to a rational, for comparing exact and float routes.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    num::ToPrimitive::to_f64(r).expect("rationals from finite f64 stay finite")
}
