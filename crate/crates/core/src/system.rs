//! System configuration, demand vectors and redundancy patterns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::{Error, Result, MAX_CACHES};

/// Exact binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or(Error::BinomialOverflow { n, k })?
            / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::BinomialOverflow { n, k });
        }
    }
    Ok(acc as u64)
}

/// `C(n, k)` as a float, for use in rate formulas.
pub(crate) fn choose(n: usize, k: usize) -> f64 {
    binomial(n as u64, k as u64).expect("binomial within u64 for supported cache counts") as f64
}

/// The static parameters of a caching network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Number of caches `K`.
    pub caches: usize,
    /// Library size `N`.
    pub library: usize,
    /// Cache size relative to the library, `M / N`.
    pub m_ratio: f64,
    /// File length `F` in symbols; only needed for bit-level simulation.
    pub file_len: Option<usize>,
}

impl SystemConfig {
    pub fn new(caches: usize, library: usize, m_ratio: f64) -> Result<Self> {
        let cfg = SystemConfig {
            caches,
            library,
            m_ratio,
            file_len: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_file_len(mut self, file_len: usize) -> Result<Self> {
        if file_len == 0 {
            return Err(Error::InvalidConfig(
                "file length F must be at least 1".into(),
            ));
        }
        self.file_len = Some(file_len);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.caches == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.library < self.caches {
            return Err(Error::InvalidConfig(format!(
                "library size N = {} is smaller than K = {}",
                self.library, self.caches
            )));
        }
        check_m_ratio(self.m_ratio)?;
        if self.file_len == Some(0) {
            return Err(Error::InvalidConfig(
                "file length F must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Cache size in files, `M = m_ratio * N`.
    pub fn cache_files(&self) -> f64 {
        self.m_ratio * self.library as f64
    }

    /// Rejects cache counts above the subset-enumeration cap.
    pub fn require_enumerable(&self) -> Result<()> {
        if self.caches > MAX_CACHES {
            return Err(Error::TooManyCaches {
                caches: self.caches,
                max: MAX_CACHES,
            });
        }
        Ok(())
    }
}

pub(crate) fn check_m_ratio(m_ratio: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m_ratio) {
        return Err(Error::InvalidConfig(format!(
            "m_ratio = {m_ratio} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// The files requested by caches `1..=K`, as 1-based file indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DemandVector {
    requests: Vec<usize>,
}

impl DemandVector {
    /// Validates every request against a library of `library` files.
    pub fn new(requests: Vec<usize>, library: usize) -> Result<Self> {
        if requests.is_empty() {
            return Err(Error::InvalidDemand("demand vector is empty".into()));
        }
        if let Some((k, &d)) = requests
            .iter()
            .enumerate()
            .find(|(_, &d)| d == 0 || d > library)
        {
            return Err(Error::InvalidDemand(format!(
                "cache {} requests file {d}, outside 1..={library}",
                k + 1
            )));
        }
        Ok(DemandVector { requests })
    }

    /// Canonical realization of a pattern: file `i` is requested by the next
    /// `k_i` caches in index order.
    pub fn from_pattern(pattern: &RedundancyPattern) -> Self {
        let requests = pattern
            .counts()
            .iter()
            .enumerate()
            .flat_map(|(i, &count)| std::iter::repeat(i + 1).take(count))
            .collect();
        DemandVector { requests }
    }

    pub fn requests(&self) -> &[usize] {
        &self.requests
    }

    pub fn caches(&self) -> usize {
        self.requests.len()
    }

    /// File requested by cache `k` (1-based).
    pub fn file_of(&self, cache: usize) -> usize {
        self.requests[cache - 1]
    }

    pub fn distinct_files(&self) -> BTreeSet<usize> {
        self.requests.iter().copied().collect()
    }

    pub fn distinct_count(&self) -> usize {
        self.distinct_files().len()
    }

    pub fn redundancy(&self) -> Redundancy {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in &self.requests {
            *counts.entry(d).or_default() += 1;
        }
        let distinct: BTreeSet<usize> = counts.keys().copied().collect();
        let mut pattern: Vec<usize> = counts.into_values().collect();
        pattern.sort_unstable_by(|a, b| b.cmp(a));
        Redundancy {
            pattern: RedundancyPattern(pattern),
            distinct,
        }
    }
}

impl fmt::Display for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.requests.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

/// Request multiplicities sorted in non-increasing order, `(k_1, ..., k_L)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RedundancyPattern(Vec<usize>);

impl RedundancyPattern {
    pub fn new(mut counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::InvalidDemand(
                "redundancy pattern needs at least one positive count".into(),
            ));
        }
        counts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(RedundancyPattern(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    /// Number of distinct files `L`.
    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    /// Number of caches `K`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    /// Dash-joined form used in CSV output, e.g. `7-1-1`.
    pub fn dashed(&self) -> String {
        self.0
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for RedundancyPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Redundancy pattern together with the set of distinct requested files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Redundancy {
    pub pattern: RedundancyPattern,
    pub distinct: BTreeSet<usize>,
}

impl Redundancy {
    pub fn distinct_count(&self) -> usize {
        self.distinct.len()
    }
}

/// All partitions of `total` into exactly `parts` positive non-increasing
/// parts, largest first part first.
pub fn partitions_into_parts(total: usize, parts: usize) -> Vec<RedundancyPattern> {
    let mut out = Vec::new();
    if parts == 0 || parts > total {
        return out;
    }
    let mut prefix = Vec::with_capacity(parts);
    fill_partitions(total, parts, total, &mut prefix, &mut out);
    out
}

fn fill_partitions(
    remaining: usize,
    parts: usize,
    max_part: usize,
    prefix: &mut Vec<usize>,
    out: &mut Vec<RedundancyPattern>,
) {
    if parts == 0 {
        if remaining == 0 {
            out.push(RedundancyPattern(prefix.clone()));
        }
        return;
    }
    // every later part is at least 1 and at most this one
    let hi = max_part.min(remaining - (parts - 1));
    let lo = remaining.div_ceil(parts);
    for part in (lo..=hi).rev() {
        prefix.push(part);
        fill_partitions(remaining - part, parts - 1, part, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(c: &[usize]) -> RedundancyPattern {
        RedundancyPattern::new(c.to_vec()).unwrap()
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(9, 2).unwrap(), 36);
        assert_eq!(binomial(5, 0).unwrap(), 1);
        assert_eq!(binomial(4, 7).unwrap(), 0);
        assert_eq!(binomial(62, 31).unwrap(), 465428353255261088);
    }

    #[test]
    fn binomial_overflow_reported() {
        assert!(matches!(
            binomial(200, 100),
            Err(Error::BinomialOverflow { .. })
        ));
        // the result fits even though n is large
        assert_eq!(binomial(1 << 40, 1).unwrap(), 1 << 40);
    }

    #[test]
    fn redundancy_examples() {
        let d = DemandVector::new(vec![1, 1, 1, 2, 2, 2, 3, 3, 3], 10).unwrap();
        let r = d.redundancy();
        assert_eq!(r.pattern, pat(&[3, 3, 3]));
        assert_eq!(r.distinct_count(), 3);
        assert_eq!(r.distinct, BTreeSet::from([1, 2, 3]));

        let d = DemandVector::new(vec![5; 9], 10).unwrap();
        let r = d.redundancy();
        assert_eq!(r.pattern, pat(&[9]));
        assert_eq!(r.distinct, BTreeSet::from([5]));

        let d = DemandVector::new(vec![7, 1, 1, 1, 1, 1, 1, 1, 4], 10).unwrap();
        let r = d.redundancy();
        assert_eq!(r.pattern.counts(), &[7, 1, 1]);
        assert_eq!(r.distinct, BTreeSet::from([1, 4, 7]));
    }

    #[test]
    fn demand_rejects_out_of_range() {
        assert!(DemandVector::new(vec![1, 0], 5).is_err());
        assert!(DemandVector::new(vec![1, 6], 5).is_err());
        assert!(DemandVector::new(vec![], 5).is_err());
    }

    #[test]
    fn config_invariants() {
        assert!(SystemConfig::new(9, 1000, 0.1).is_ok());
        assert!(SystemConfig::new(0, 10, 0.1).is_err());
        assert!(SystemConfig::new(11, 10, 0.1).is_err());
        assert!(SystemConfig::new(3, 10, 1.5).is_err());
        assert!(SystemConfig::new(3, 10, 0.5)
            .unwrap()
            .with_file_len(0)
            .is_err());
    }

    /// Brute force: every non-increasing sequence of `parts` values drawn
    /// from `1..=total` that sums to `total`.
    fn brute_force_partitions(total: usize, parts: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![1usize; parts];
        loop {
            if cur.iter().sum::<usize>() == total && cur.windows(2).all(|w| w[0] >= w[1]) {
                out.push(cur.clone());
            }
            let mut i = 0;
            loop {
                if i == parts {
                    return out;
                }
                cur[i] += 1;
                if cur[i] <= total {
                    break;
                }
                cur[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn partitions_of_nine_into_three() {
        let got: Vec<Vec<usize>> = partitions_into_parts(9, 3)
            .into_iter()
            .map(|p| p.counts().to_vec())
            .collect();
        let want = vec![
            vec![7, 1, 1],
            vec![6, 2, 1],
            vec![5, 3, 1],
            vec![5, 2, 2],
            vec![4, 4, 1],
            vec![4, 3, 2],
            vec![3, 3, 3],
        ];
        assert_eq!(got, want);
        let mut brute = brute_force_partitions(9, 3);
        brute.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(got, brute);
    }

    #[test]
    fn partition_edge_cases() {
        assert_eq!(partitions_into_parts(6, 6), vec![pat(&[1; 6])]);
        assert_eq!(partitions_into_parts(4, 1), vec![pat(&[4])]);
        assert!(partitions_into_parts(3, 4).is_empty());
        for total in 1..=7 {
            for parts in 1..=total {
                let ps = partitions_into_parts(total, parts);
                assert_eq!(ps.len(), brute_force_partitions(total, parts).len());
                assert!(ps
                    .iter()
                    .all(|p| p.total() == total && p.distinct() == parts));
            }
        }
        // p(n, k) = p(n - 1, k - 1) + p(n - k, k)
        let mut count = vec![vec![0usize; 13]; 13];
        count[0][0] = 1;
        for n in 1..=12 {
            for k in 1..=n {
                count[n][k] = count[n - 1][k - 1] + count[n - k][k];
            }
        }
        for total in 8..=12 {
            for parts in 1..=total {
                let ps = partitions_into_parts(total, parts);
                assert_eq!(ps.len(), count[total][parts]);
                assert!(ps
                    .iter()
                    .all(|p| p.total() == total && p.distinct() == parts));
            }
        }
    }

    #[test]
    fn canonical_realization() {
        let d = DemandVector::from_pattern(&pat(&[2, 3, 1]));
        assert_eq!(d.requests(), &[1, 1, 1, 2, 2, 3]);
        assert_eq!(d.redundancy().pattern, pat(&[3, 2, 1]));
    }
}
