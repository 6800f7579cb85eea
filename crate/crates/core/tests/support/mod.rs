//! Shared oracles and generators for the integration suites.
//!
//! Everything here recomputes results from first principles — raw value
//! formula, definition-level stability, exact-rational elimination — so the
//! library paths under test are checked against genuinely independent
//! routes.

#![allow(dead_code)] // each test binary uses a subset

use mcoal_core::lp::{LinearRow, LinearSystem};
use mcoal_core::model::{Coalition, Partition};
use mcoal_core::rng::SplitMix64;
use mcoal_core::scenario::{defaults, Scenario, ScenarioParams};
use num::rational::BigRational;
use num::{FromPrimitive, Signed, Zero};
use std::collections::HashMap;

/// v(S) from the raw power/cost formula, bypassing the library evaluators.
pub fn raw_value(s: &Scenario, members: &[usize]) -> f64 {
    assert!(!members.is_empty());
    let rate = members
        .iter()
        .map(|&i| s.rate(i))
        .fold(f64::INFINITY, f64::min);
    let time = s.file_size() / rate;
    let mut v = 0.0;
    for &i in members {
        v += s.valuation(i) - s.user_energy_cost() * s.rx_power(i) * time;
    }
    v - s.tx_energy_cost() * s.tx_power() * time - s.bandwidth_cost() * time
}

/// All partitions of `items` into non-empty blocks, by direct recursion.
pub fn partitions_of(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    match items.split_first() {
        None => vec![vec![]],
        Some((&first, rest)) => {
            let mut out = Vec::new();
            for sub in partitions_of(rest) {
                for i in 0..sub.len() {
                    let mut with = sub.clone();
                    with[i].push(first);
                    out.push(with);
                }
                let mut alone = sub;
                alone.push(vec![first]);
                out.push(alone);
            }
            out
        }
    }
}

/// Definition-level stability oracle: enumerate every collection (every
/// partition of every non-empty subset), regroup it along `p` by definition,
/// and compare total values. Only sensible for small n.
pub fn dc_stable_by_definition(s: &Scenario, p: &Partition) -> bool {
    let n = s.n();
    assert!(n <= 8, "definition oracle is exponential twice over");
    let scale = raw_value(s, &(0..n).collect::<Vec<_>>()).abs().max(1.0);
    let slack = 1e-9 * scale;
    let block_sets: Vec<Vec<usize>> = p.blocks().iter().map(|b| b.members().collect()).collect();

    for subset_mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| subset_mask & (1 << i) != 0).collect();
        for collection in partitions_of(&members) {
            if collection.is_empty() {
                continue;
            }
            let value: f64 = collection.iter().map(|part| raw_value(s, part)).sum();

            // S[P]: regroup the union along the partition blocks.
            let mut regrouped_value = 0.0;
            for block in &block_sets {
                let piece: Vec<usize> = block
                    .iter()
                    .copied()
                    .filter(|i| members.contains(i))
                    .collect();
                if !piece.is_empty() {
                    regrouped_value += raw_value(s, &piece);
                }
            }
            if regrouped_value < value - slack {
                return false;
            }
        }
    }
    true
}

/// Exact-rational Fourier-Motzkin feasibility oracle.
///
/// Equalities split into opposing inequalities and lower bounds join as
/// rows; variables are eliminated in the order that generates the fewest
/// combined rows. Two classical prunings keep the row count in check:
/// parallel rows collapse to the strongest right-hand side, and a derived
/// row is dropped as redundant when its set of ancestor rows exceeds the
/// number of eliminated variables plus one (Kohler's criterion). Infeasible
/// exactly when a contradictory constant row `0 >= b` with `b > 0` survives.
pub fn fourier_motzkin_feasible(sys: &LinearSystem) -> bool {
    #[derive(Clone, Debug)]
    struct Entry {
        rhs: BigRational,
        ancestors: u64, // bitset over the original rows
    }
    // coeffs . x >= rhs entries, keyed by normalized coeffs. Parallel rows
    // form a small frontier: an entry may only displace another when it is
    // at least as strong AND derives from an ancestor subset — dropping on
    // rhs alone is unsound once Kohler pruning is in play, because a weaker
    // parallel row with better-overlapping ancestors can be the one whose
    // later combinations pass the ancestor bound.
    type RowMap = HashMap<Vec<BigRational>, Vec<Entry>>;

    fn insert(rows: &mut RowMap, coeffs: Vec<BigRational>, rhs: BigRational, ancestors: u64) {
        let (coeffs, rhs) = normalize(coeffs, rhs);
        let entries = rows.entry(coeffs).or_default();
        let subset = |a: u64, b: u64| a & b == a;
        if entries
            .iter()
            .any(|e| e.rhs >= rhs && subset(e.ancestors, ancestors))
        {
            return; // dominated
        }
        entries.retain(|e| !(rhs >= e.rhs && subset(ancestors, e.ancestors)));
        entries.push(Entry { rhs, ancestors });
    }

    let rat = |x: f64| BigRational::from_f64(x).expect("finite");
    let lift = |coeffs: &[f64]| coeffs.iter().map(|&c| rat(c)).collect::<Vec<_>>();
    let mut rows: RowMap = HashMap::new();
    let mut n_original = 0u32;
    {
        let mut add_original = |rows: &mut RowMap, coeffs: Vec<BigRational>, rhs: BigRational| {
            let tag = 1u64 << n_original;
            n_original += 1;
            insert(rows, coeffs, rhs, tag);
        };
        for LinearRow { coeffs, rhs } in &sys.ge_rows {
            add_original(&mut rows, lift(coeffs), rat(*rhs));
        }
        for LinearRow { coeffs, rhs } in &sys.eq_rows {
            add_original(&mut rows, lift(coeffs), rat(*rhs));
            let negated: Vec<f64> = coeffs.iter().map(|c| -c).collect();
            add_original(&mut rows, lift(&negated), rat(-rhs));
        }
        if let Some(bounds) = &sys.lower_bounds {
            for (j, &lb) in bounds.iter().enumerate() {
                let mut coeffs = vec![0.0; sys.n_vars];
                coeffs[j] = 1.0;
                add_original(&mut rows, lift(&coeffs), rat(lb));
            }
        }
    }
    assert!(n_original <= 64, "ancestor bitset too small");

    let contradiction = |rows: &RowMap| {
        rows.iter().any(|(c, entries)| {
            c.iter().all(Zero::is_zero) && entries.iter().any(|e| e.rhs.is_positive())
        })
    };

    let mut remaining: Vec<usize> = (0..sys.n_vars).collect();
    let mut eliminated = 0u32;
    while !remaining.is_empty() {
        if contradiction(&rows) {
            return false;
        }
        // Pick the variable generating the fewest lower-upper combinations.
        let var = *remaining
            .iter()
            .min_by_key(|&&v| {
                let mut pos = 0usize;
                let mut neg = 0usize;
                for (c, entries) in &rows {
                    if c[v].is_positive() {
                        pos += entries.len();
                    } else if c[v].is_negative() {
                        neg += entries.len();
                    }
                }
                (pos * neg, v)
            })
            .unwrap();
        remaining.retain(|&v| v != var);
        eliminated += 1;

        let mut lowers: Vec<(Vec<BigRational>, Entry)> = Vec::new();
        let mut uppers: Vec<(Vec<BigRational>, Entry)> = Vec::new();
        let mut next: RowMap = HashMap::new();
        for (coeffs, entries) in rows {
            if coeffs[var].is_positive() {
                lowers.extend(entries.into_iter().map(|e| (coeffs.clone(), e)));
            } else if coeffs[var].is_negative() {
                uppers.extend(entries.into_iter().map(|e| (coeffs.clone(), e)));
            } else {
                next.insert(coeffs, entries);
            }
        }
        let mut produced = 0usize;
        for (lc, le) in &lowers {
            for (uc, ue) in &uppers {
                let ancestors = le.ancestors | ue.ancestors;
                if ancestors.count_ones() > eliminated + 1 {
                    continue; // redundant by Kohler's criterion
                }
                // Scale so var's coefficients cancel; both scales positive.
                let pos = lc[var].clone();
                let neg = -uc[var].clone();
                let coeffs: Vec<BigRational> = lc
                    .iter()
                    .zip(uc)
                    .map(|(a, b)| a * &neg + b * &pos)
                    .collect();
                let rhs = &le.rhs * &neg + &ue.rhs * &pos;
                insert(&mut next, coeffs, rhs, ancestors);
                produced += 1;
                assert!(
                    produced < 2_000_000,
                    "oracle blow-up eliminating variable {var}"
                );
            }
        }
        rows = next;
    }

    !contradiction(&rows)
}

fn normalize(coeffs: Vec<BigRational>, rhs: BigRational) -> (Vec<BigRational>, BigRational) {
    let lead = coeffs.iter().find(|c| !c.is_zero()).cloned();
    match lead {
        None => (coeffs, rhs),
        Some(lead) => {
            let scale = lead.abs();
            (
                coeffs.into_iter().map(|c| c / &scale).collect(),
                rhs / &scale,
            )
        }
    }
}

/// Families of random scenarios exercised by the fuzz suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Equal rates and receive powers.
    Symmetric,
    /// Uniform receive power, rates within a few percent.
    TightRates,
    /// Uniform receive power, rates spread over a wide range.
    WideRates,
    /// Heterogeneous receive powers and rates.
    Heterogeneous,
    /// Well-separated rate bands with tiny within-band spread.
    Banded,
    /// Each rate several times the previous one.
    Geometric,
}

pub const ALL_STYLES: [Style; 6] = [
    Style::Symmetric,
    Style::TightRates,
    Style::WideRates,
    Style::Heterogeneous,
    Style::Banded,
    Style::Geometric,
];

/// A seeded random scenario of `n` users in the given style. Table-default
/// cost parameters; valuations uniform in [90, 100].
pub fn random_scenario(rng: &mut SplitMix64, n: usize, style: Style) -> Scenario {
    let valuations: Vec<f64> = (0..n).map(|_| rng.uniform(90.0, 100.0)).collect();
    let (rates, rx_powers) = match style {
        Style::Symmetric => {
            let rate = rng.uniform(15.0, 300.0);
            let rx = rng.uniform(0.2, 0.4);
            (vec![rate; n], vec![rx; n])
        }
        Style::TightRates => {
            let base = rng.uniform(50.0, 200.0);
            let rates = (0..n).map(|_| base * rng.uniform(1.0, 1.03)).collect();
            let rx = rng.uniform(0.2, 0.4);
            (rates, vec![rx; n])
        }
        Style::WideRates => {
            let rates = (0..n)
                .map(|_| 10.0 * (rng.uniform(0.0, 1.0) * 5.0).exp2())
                .collect();
            let rx = rng.uniform(0.2, 0.4);
            (rates, vec![rx; n])
        }
        Style::Heterogeneous => {
            let rates = (0..n).map(|_| rng.uniform(10.0, 400.0)).collect();
            let rx_powers = (0..n).map(|_| rng.uniform(0.2, 0.4)).collect();
            (rates, rx_powers)
        }
        Style::Banded => {
            let n_bands = 2 + (rng.below(3) as usize).min(n - 1);
            let gap = rng.uniform(6.0, 10.0);
            let mut base = rng.uniform(10.0, 20.0);
            let mut bases = Vec::new();
            for _ in 0..n_bands {
                bases.push(base);
                base *= gap;
            }
            let rates = (0..n)
                .map(|i| bases[i * n_bands / n] * rng.uniform(1.0, 1.01))
                .collect();
            let rx_powers = (0..n).map(|_| rng.uniform(0.25, 0.35)).collect();
            (rates, rx_powers)
        }
        Style::Geometric => {
            let ratio = rng.uniform(5.0, 8.0);
            let mut rate = rng.uniform(5.0, 15.0);
            let rates = (0..n)
                .map(|_| {
                    let r = rate;
                    rate *= ratio;
                    r
                })
                .collect();
            let rx_powers = (0..n).map(|_| rng.uniform(0.2, 0.4)).collect();
            (rates, rx_powers)
        }
    };
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
    .expect("random scenarios are valid")
}

/// A random partition of `0..n` via a uniform-ish restricted growth string.
pub fn random_partition(rng: &mut SplitMix64, n: usize) -> Partition {
    let mut labels = vec![0usize; n];
    let mut max = 0usize;
    for label in labels.iter_mut().skip(1) {
        let pick = rng.below(max as u64 + 2) as usize;
        *label = pick;
        max = max.max(pick);
    }
    let mut masks = vec![0u32; max + 1];
    for (i, &label) in labels.iter().enumerate() {
        masks[label] |= 1 << i;
    }
    let blocks = masks
        .into_iter()
        .filter(|&m| m != 0)
        .map(|m| Coalition::from_mask(m).unwrap())
        .collect();
    Partition::new(blocks, n).expect("labels cover every user")
}

/// The partition whose blocks are the banded style's rate bands; with
/// `Style::Banded` this is the natural candidate for stability.
pub fn band_partition(s: &Scenario) -> Partition {
    // Group users whose rates fall within a factor of 2 of the block minimum.
    let n = s.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.rate(a).partial_cmp(&s.rate(b)).unwrap());
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_min = f64::NEG_INFINITY;
    for &i in &order {
        if blocks.is_empty() || s.rate(i) > 2.0 * block_min {
            blocks.push(vec![i]);
            block_min = s.rate(i);
        } else {
            blocks.last_mut().unwrap().push(i);
        }
    }
    let coalitions = blocks
        .into_iter()
        .map(|b| Coalition::from_members(b, n).unwrap())
        .collect();
    Partition::new(coalitions, n).expect("bands partition the users")
}

/// A seeded random small feasibility system with integer data. Roughly a
/// third get variable lower bounds.
pub fn random_system(rng: &mut SplitMix64) -> LinearSystem {
    let n_vars = 1 + rng.below(6) as usize;
    let n_rows = 1 + rng.below(12) as usize;
    let n_eq = rng.below(3).min(n_rows as u64) as usize;
    let mut sys = LinearSystem::new(n_vars);
    let coeff = |rng: &mut SplitMix64| (rng.below(11) as f64) - 5.0;
    for r in 0..n_rows {
        let coeffs: Vec<f64> = (0..n_vars).map(|_| coeff(rng)).collect();
        let rhs = (rng.below(21) as f64) - 10.0;
        if coeffs.iter().all(|&c| c == 0.0) {
            continue; // skip degenerate all-zero rows
        }
        if r < n_eq {
            sys.push_eq(coeffs, rhs);
        } else {
            sys.push_ge(coeffs, rhs);
        }
    }
    if rng.below(3) == 0 {
        sys.lower_bounds = Some((0..n_vars).map(|_| (rng.below(9) as f64) - 4.0).collect());
    }
    sys
}
