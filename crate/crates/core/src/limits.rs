//! Enumeration caps for the exponential-cost operations.
//!
//! Every cap bounds the number of *users*; the work behind it is 2^n or
//! worse. Defaults are sized so the full test suite stays fast on a laptop.
//! Two environment variables override them at the CLI boundary:
//!
//! - `MCOAL_ENUM_CAP` — subset-enumeration cap (core membership checks and
//!   the cross-block coalition scan of the partition-stability check).
//! - `MCOAL_LP_CAP` — user cap for the LP core-feasibility path.

/// Environment variable overriding [`EnumLimits::membership_cap`] and
/// [`EnumLimits::dc_coalition_cap`].
pub const ENUM_CAP_VAR: &str = "MCOAL_ENUM_CAP";
/// Environment variable overriding [`EnumLimits::lp_cap`].
pub const LP_CAP_VAR: &str = "MCOAL_LP_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumLimits {
    /// Core membership (`is_in_core`) and value-table construction: 2^n subsets.
    pub membership_cap: usize,
    /// LP core-feasibility path: constraint rows are drawn from 2^n - 2 subsets.
    pub lp_cap: usize,
    /// Convexity check: all subset pairs.
    pub convexity_cap: usize,
    /// Cross-block coalition scan of the partition-stability check: 2^n subsets.
    pub dc_coalition_cap: usize,
    /// Within-block split scan: 3^k splits for a block of k users.
    pub dc_block_cap: usize,
    /// Exhaustive partition search: Bell(n) partitions.
    pub partition_cap: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        Self {
            membership_cap: 24,
            lp_cap: 16,
            convexity_cap: 14,
            dc_coalition_cap: 20,
            dc_block_cap: 12,
            partition_cap: 12,
        }
    }
}

impl EnumLimits {
    /// Defaults, with `MCOAL_ENUM_CAP` / `MCOAL_LP_CAP` applied when set to a
    /// positive integer. Malformed values are ignored.
    pub fn from_env() -> Self {
        let mut limits = Self::default();
        if let Some(cap) = read_cap(ENUM_CAP_VAR) {
            limits.membership_cap = cap;
            limits.dc_coalition_cap = cap;
        }
        if let Some(cap) = read_cap(LP_CAP_VAR) {
            limits.lp_cap = cap;
        }
        limits
    }

    /// Copy of `self` with the LP cap raised to at least `n` users.
    pub fn with_lp_cap(mut self, cap: usize) -> Self {
        self.lp_cap = cap;
        self
    }
}

fn read_cap(var: &str) -> Option<usize> {
    std::env::var(var)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&cap| cap > 0)
}
