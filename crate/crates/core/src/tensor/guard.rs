use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Default cap on the number of elements any materializing operation may allocate.
pub const DEFAULT_SIZE_GUARD: usize = 1 << 24;

/// Environment variable overriding [`DEFAULT_SIZE_GUARD`].
pub const SIZE_GUARD_ENV: &str = "TSKIT_SIZE_GUARD";

static MATERIALIZED: AtomicU64 = AtomicU64::new(0);
static MATERIALIZATIONS: AtomicU64 = AtomicU64::new(0);

/// Upper bound on the element count of materialized tensors and explicit matrices.
///
/// Only oracle paths (`self_tensor`, `kron_matrix`, `explicit_matrix`, dense-tensor
/// inputs) go through a guard. Every admitted request is recorded so callers can
/// assert that a fast path never materialized anything.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeGuard {
    limit: usize,
}

impl SizeGuard {
    pub fn new(limit: usize) -> Self {
        Self { limit }
    }

    /// Reads [`SIZE_GUARD_ENV`], falling back to the default on absence or parse failure.
    pub fn from_env() -> Self {
        let limit = std::env::var(SIZE_GUARD_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(DEFAULT_SIZE_GUARD);
        Self { limit }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Admits a materialization of `elements` values or refuses it.
    pub fn admit(&self, elements: u128) -> Result<usize> {
        if elements > self.limit as u128 {
            return Err(Error::SizeGuard {
                requested: elements,
                limit: self.limit,
            });
        }
        MATERIALIZED.fetch_add(elements as u64, Ordering::Relaxed);
        MATERIALIZATIONS.fetch_add(1, Ordering::Relaxed);
        Ok(elements as usize)
    }
}

impl Default for SizeGuard {
    fn default() -> Self {
        Self::from_env()
    }
}

/// Counters of guarded materializations since process start: (count, total elements).
pub fn materialization_stats() -> (u64, u64) {
    (
        MATERIALIZATIONS.load(Ordering::Relaxed),
        MATERIALIZED.load(Ordering::Relaxed),
    )
}

/// `base^exp` as u128, saturating.
pub(crate) fn checked_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admits_up_to_limit() {
        let g = SizeGuard::new(16);
        assert_eq!(g.admit(16).unwrap(), 16);
        assert!(matches!(g.admit(17), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn pow_saturates() {
        assert_eq!(checked_pow(3, 4), 81);
        assert_eq!(checked_pow(usize::MAX, 10), u128::MAX);
    }
}
