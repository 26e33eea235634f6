//! Cutset lower bound on the rate of demands with `L` distinct requests.

use crate::{DemandVector, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub value: f64,
    /// Cut size attaining the maximum.
    pub argmax_s: usize,
    pub caches: usize,
    pub distinct: usize,
    pub library: usize,
    /// Cache size in files.
    pub cache_files: f64,
}

/// `max_{1≤s≤L} (s - s·M / ⌊N/s⌋)`, clamped at zero. `cache_files` is `M`
/// in file units, not the ratio.
pub fn cutset_bound(
    caches: usize,
    distinct: usize,
    library: usize,
    cache_files: f64,
) -> BoundReport {
    debug_assert!(distinct >= 1 && distinct <= caches && caches <= library);
    let mut value = f64::NEG_INFINITY;
    let mut argmax_s = 1;
    for s in 1..=distinct {
        let copies = (library / s) as f64;
        let cand = s as f64 - s as f64 * cache_files / copies;
        if cand > value {
            value = cand;
            argmax_s = s;
        }
    }
    BoundReport {
        value: value.max(0.0),
        argmax_s,
        caches,
        distinct,
        library,
        cache_files,
    }
}

/// Mean of the per-demand cutset bounds.
pub fn average_bound(
    samples: &[DemandVector],
    library: usize,
    cache_files: f64,
    caches: usize,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("demand samples"));
    }
    let total: f64 = samples
        .iter()
        .map(|d| cutset_bound(caches, d.distinct_count(), library, cache_files).value)
        .sum();
    Ok(total / samples.len() as f64)
}
