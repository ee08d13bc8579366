//! Memory budgets for ball growth and Dijkstra floods.

/// Environment variable capping ball memory, in mebibytes.
pub const BUDGET_ENV_VAR: &str = "CONEGROWTH_BUDGET_MB";

/// Rough per-element footprint of a stored ball node (packed coordinates,
/// hash-table slot, predecessor byte, norm).
const BYTES_PER_ELEMENT: usize = 128;

/// Caps on how large an exploration is allowed to grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of distinct elements any single ball or flood may hold.
    pub max_elements: usize,
    /// Hard cap on word-metric radii, mostly a guard against runaway caps.
    pub max_radius: u32,
}

impl Budget {
    pub const fn new(max_elements: usize, max_radius: u32) -> Self {
        Budget {
            max_elements,
            max_radius,
        }
    }

    /// Budget holding roughly `mb` mebibytes of ball storage.
    pub fn from_mb(mb: usize) -> Self {
        Budget {
            max_elements: (mb * (1 << 20)) / BYTES_PER_ELEMENT,
            max_radius: 8192,
        }
    }

    /// Reads `CONEGROWTH_BUDGET_MB`, falling back to 3072 MiB.
    pub fn from_env() -> Self {
        let mb = std::env::var(BUDGET_ENV_VAR)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(3072);
        Budget::from_mb(mb)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::from_env()
    }
}
