//! Enumeration limits. Every exponential search in the crate takes a
//! [`Budget`] and fails with an explicit error instead of truncating.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Upper bound on `|Y|^|X|` for brute-force map enumeration.
    pub max_candidates: u128,
    /// Upper bound on the number of maps returned by a pruned enumeration.
    pub max_maps: usize,
    /// Upper bound on the number of open sets materialized for one space.
    pub max_opens: usize,
    /// Largest probe-catalog size that may be requested.
    pub probe_cap: usize,
    /// Per-point limit on family elements offering more than one selector value.
    pub max_branching_elements: usize,
    /// Upper bound on the number of selectors at a single point.
    pub max_selectors: usize,
    /// Upper bound on the size of a closed element family.
    pub max_family: usize,
}

impl Budget {
    pub const DEFAULT: Budget = Budget {
        max_candidates: 50_000_000,
        max_maps: 2_000_000,
        max_opens: 1 << 20,
        probe_cap: 4,
        max_branching_elements: 12,
        max_selectors: 4096,
        max_family: 1 << 18,
    };

    /// Default limits with the size-5 probe catalog unlocked.
    pub fn with_probe_cap(self, cap: usize) -> Self {
        Budget {
            probe_cap: cap,
            ..self
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}
