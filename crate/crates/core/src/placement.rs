//! Placement profiles and their bit-level realization.
//!
//! A profile gives `x_s`, the fraction of every file stored exclusively at
//! each particular subset of `s` caches. Profiles are symmetric: `x_s` does
//! not depend on the file or on which caches form the subset.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::{self, LinearProgram};
use crate::subset::{all_subsets, CacheSubset};
use crate::system::{check_m_ratio, choose};
use crate::{Error, Result, SystemConfig, MAX_CACHES};

const PROFILE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Centralized,
    Decentralized,
    Lp,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Centralized => "centralized",
            Scheme::Decentralized => "decentralized",
            Scheme::Lp => "lp",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "centralized" => Ok(Scheme::Centralized),
            "decentralized" => Ok(Scheme::Decentralized),
            "lp" => Ok(Scheme::Lp),
            other => Err(Error::InvalidConfig(format!(
                "unknown placement scheme `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementProfile {
    pub scheme: Scheme,
    pub caches: usize,
    pub m_ratio: f64,
    /// `x[s]` for `s = 0..=K`.
    pub x: Vec<f64>,
}

impl PlacementProfile {
    /// Builds a profile from explicit fractions without validating them.
    pub fn from_fractions(scheme: Scheme, m_ratio: f64, x: Vec<f64>) -> Self {
        PlacementProfile {
            scheme,
            caches: x.len() - 1,
            m_ratio,
            x,
        }
    }

    pub fn fraction(&self, size: usize) -> f64 {
        self.x[size]
    }

    /// Peak (all-distinct demand) rate of the classic coded delivery,
    /// `Σ_{s<K} C(K, s+1) x_s`.
    pub fn worst_case_rate(&self) -> f64 {
        let k = self.caches;
        (0..k).map(|s| choose(k, s + 1) * self.x[s]).sum()
    }

    pub fn csv_header(caches: usize) -> String {
        let mut h = String::from("scheme,K,m_ratio");
        for s in 0..=caches {
            h.push_str(&format!(",x_{s}"));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!("{},{},{}", self.scheme, self.caches, self.m_ratio);
        for x in &self.x {
            row.push_str(&format!(",{x}"));
        }
        row
    }
}

/// Optimal worst-case placement in closed form. For integer `t = K·m` a
/// single size class `t` is used; otherwise the two neighbouring classes
/// share the capacity.
pub fn centralized_profile(caches: usize, m_ratio: f64) -> Result<PlacementProfile> {
    check_m_ratio(m_ratio)?;
    if caches == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let t = caches as f64 * m_ratio;
    let mut x = vec![0.0; caches + 1];
    let nearest = t.round();
    if (t - nearest).abs() <= 1e-12 * caches as f64 {
        let s = nearest as usize;
        x[s] = 1.0 / choose(caches, s);
    } else {
        let lo = t.floor() as usize;
        let hi = lo + 1;
        x[lo] = (hi as f64 - t) / choose(caches, lo);
        x[hi] = (t - lo as f64) / choose(caches, hi);
    }
    Ok(PlacementProfile {
        scheme: Scheme::Centralized,
        caches,
        m_ratio,
        x,
    })
}

/// Expected fractions when each cache independently stores each bit with
/// probability `q = m_ratio`: `x_s = q^s (1-q)^(K-s)`.
pub fn decentralized_profile(caches: usize, m_ratio: f64) -> Result<PlacementProfile> {
    check_m_ratio(m_ratio)?;
    if caches == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let q = m_ratio;
    let x = (0..=caches)
        .map(|s| q.powi(s as i32) * (1.0 - q).powi((caches - s) as i32))
        .collect();
    Ok(PlacementProfile {
        scheme: Scheme::Decentralized,
        caches,
        m_ratio,
        x,
    })
}

/// Minimizes the worst-case coded-delivery rate over all symmetric profiles
/// with the simplex solver.
pub fn solve_placement_lp(caches: usize, m_ratio: f64) -> Result<(PlacementProfile, f64)> {
    check_m_ratio(m_ratio)?;
    if caches == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    let k = caches;
    let mut prog = LinearProgram::new();
    let vars: Vec<usize> = (0..=k)
        .map(|s| {
            let cost = if s < k { choose(k, s + 1) } else { 0.0 };
            prog.add_var(cost, 0.0, f64::INFINITY)
        })
        .collect();
    prog.add_eq(
        vars.iter()
            .enumerate()
            .map(|(s, &v)| (v, choose(k, s)))
            .collect(),
        1.0,
    );
    prog.add_le(
        vars.iter()
            .enumerate()
            .skip(1)
            .map(|(s, &v)| (v, choose(k - 1, s - 1)))
            .collect(),
        m_ratio,
    );
    let sol = lp::solve(&prog)?.into_optimal()?;
    let profile = PlacementProfile {
        scheme: Scheme::Lp,
        caches,
        m_ratio,
        x: sol.assignment,
    };
    Ok((profile, sol.value))
}

/// Per-constraint residuals of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileReport {
    /// `Σ C(K,s) x_s - 1`
    pub partition_residual: f64,
    /// `Σ C(K-1,s-1) x_s - m_ratio`; positive means over capacity.
    pub capacity_residual: f64,
    /// Smallest `x_s`.
    pub min_fraction: f64,
    pub partition_ok: bool,
    pub capacity_ok: bool,
    pub nonnegative_ok: bool,
}

impl ProfileReport {
    pub fn passed(&self) -> bool {
        self.partition_ok && self.capacity_ok && self.nonnegative_ok
    }
}

pub fn validate_profile(p: &PlacementProfile, caches: usize, m_ratio: f64) -> ProfileReport {
    let k = caches;
    let x = |s: usize| p.x.get(s).copied().unwrap_or(0.0);
    let sum: f64 = (0..=k).map(|s| choose(k, s) * x(s)).sum();
    let stored: f64 = (1..=k).map(|s| choose(k - 1, s - 1) * x(s)).sum();
    let min_fraction = p.x.iter().copied().fold(f64::INFINITY, f64::min);
    let partition_residual = sum - 1.0;
    let capacity_residual = stored - m_ratio;
    ProfileReport {
        partition_residual,
        capacity_residual,
        min_fraction,
        partition_ok: p.x.len() == k + 1 && partition_residual.abs() <= PROFILE_TOL,
        capacity_ok: capacity_residual <= PROFILE_TOL,
        nonnegative_ok: min_fraction >= 0.0,
    }
}

/// Largest-remainder apportionment of real `targets` into integers summing
/// to `total`. Ties go to the lower index.
pub(crate) fn apportion(targets: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = targets
        .iter()
        .map(|t| t.max(0.0).floor() as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    let rem = |i: usize| targets[i].max(0.0) - counts[i] as f64;
    let mut order: Vec<usize> = (0..targets.len()).collect();
    if assigned < total {
        order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
        for &i in order.iter().cycle().take(total - assigned) {
            counts[i] += 1;
        }
    } else if assigned > total {
        order.retain(|&i| counts[i] > 0);
        order.sort_by(|&a, &b| rem(a).total_cmp(&rem(b)).then(a.cmp(&b)));
        let mut excess = assigned - total;
        for &i in order.iter().cycle() {
            if excess == 0 {
                break;
            }
            if counts[i] > 0 {
                counts[i] -= 1;
                excess -= 1;
            }
        }
    }
    counts
}

/// Symbol indices of each materialized file, split by the exact subset of
/// caches that stores them.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMap {
    caches: usize,
    file_len: usize,
    /// file -> mask -> symbol indices (ascending)
    parts: BTreeMap<usize, Vec<Vec<u32>>>,
}

impl PartitionMap {
    pub fn caches(&self) -> usize {
        self.caches
    }

    pub fn file_len(&self) -> usize {
        self.file_len
    }

    pub fn files(&self) -> impl Iterator<Item = usize> + '_ {
        self.parts.keys().copied()
    }

    pub fn contains_file(&self, file: usize) -> bool {
        self.parts.contains_key(&file)
    }

    /// Symbols of `file` stored exactly at `subset`.
    pub fn symbols(&self, file: usize, subset: CacheSubset) -> &[u32] {
        &self.parts[&file][subset.index()]
    }

    /// Symbols of `file` held by `cache`.
    pub fn cached_symbols(&self, cache: usize, file: usize) -> Vec<u32> {
        let mut out: Vec<u32> = self.parts[&file]
            .iter()
            .enumerate()
            .filter(|(mask, _)| CacheSubset::from_mask(*mask as u32).contains(cache))
            .flat_map(|(_, syms)| syms.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Number of symbols, across all materialized files, held by `cache`.
    pub fn stored_count(&self, cache: usize) -> usize {
        self.parts
            .values()
            .flat_map(|by_mask| {
                by_mask
                    .iter()
                    .enumerate()
                    .filter(move |(mask, _)| CacheSubset::from_mask(*mask as u32).contains(cache))
                    .map(|(_, syms)| syms.len())
            })
            .sum()
    }
}

/// Splits each of `files` into exclusive subsets according to `profile`.
///
/// Centralized and LP profiles are laid out deterministically: subset
/// lengths are `x_|S|·F` rounded by largest remainder and assigned as
/// contiguous runs in ascending subset order. Decentralized profiles store
/// every symbol at every cache independently with probability `m_ratio`,
/// drawing from a ChaCha8 stream keyed by `(seed, file)`.
pub fn materialize_partition(
    config: &SystemConfig,
    profile: &PlacementProfile,
    files: &[usize],
    seed: u64,
) -> Result<PartitionMap> {
    let k = config.caches;
    if k > MAX_CACHES {
        return Err(Error::TooManyCaches {
            caches: k,
            max: MAX_CACHES,
        });
    }
    let file_len = match config.file_len {
        Some(f) if f > 0 => f,
        _ => {
            return Err(Error::InvalidConfig(
                "file length F must be at least 1".into(),
            ))
        }
    };
    if profile.caches != k {
        return Err(Error::InvalidProfile(format!(
            "profile is for {} caches, config has {k}",
            profile.caches
        )));
    }
    if let Some(&bad) = files.iter().find(|&&n| n == 0 || n > config.library) {
        return Err(Error::InvalidConfig(format!(
            "file {bad} outside 1..={}",
            config.library
        )));
    }
    if file_len > u32::MAX as usize {
        return Err(Error::InvalidConfig("file length exceeds u32 range".into()));
    }

    let subsets = 1usize << k;
    let mut parts = BTreeMap::new();
    match profile.scheme {
        Scheme::Centralized | Scheme::Lp => {
            let targets: Vec<f64> = all_subsets(k)
                .map(|s| profile.x[s.len()] * file_len as f64)
                .collect();
            let lengths = apportion(&targets, file_len);
            let mut layout = Vec::with_capacity(subsets);
            let mut next = 0u32;
            for len in lengths {
                layout.push((next..next + len as u32).collect::<Vec<u32>>());
                next += len as u32;
            }
            for &n in files {
                parts.insert(n, layout.clone());
            }
        }
        Scheme::Decentralized => {
            let q = profile.m_ratio;
            for &n in files {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(n as u64);
                let mut by_mask = vec![Vec::new(); subsets];
                for sym in 0..file_len as u32 {
                    let mut mask = 0usize;
                    for cache in 0..k {
                        if rng.gen_bool(q) {
                            mask |= 1 << cache;
                        }
                    }
                    by_mask[mask].push(sym);
                }
                parts.insert(n, by_mask);
            }
        }
    }
    Ok(PartitionMap {
        caches: k,
        file_len,
        parts,
    })
}
