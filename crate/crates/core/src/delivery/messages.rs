//! Symbol-level message construction and decoding.
//!
//! Files are sequences of byte symbols. A [`MessageSchedule`] carries, next
//! to each payload, the symbol indices of every constituent so that a
//! receiver can tell which of its cached symbols to XOR out. Only payload
//! bytes count towards the rate.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TransferPlan;
use crate::placement::{apportion, PartitionMap};
use crate::subset::{all_subsets, subsets_of_size, CacheSubset};
use crate::{DemandVector, Error, Result};

/// Contents of the library files taking part in a delivery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStore {
    file_len: usize,
    files: BTreeMap<usize, Vec<u8>>,
}

impl FileStore {
    /// Pseudo-random contents, one ChaCha8 stream per file.
    pub fn random(files: &[usize], file_len: usize, seed: u64) -> Self {
        let files = files
            .iter()
            .map(|&n| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(n as u64);
                let mut data = vec![0u8; file_len];
                rng.fill_bytes(&mut data);
                (n, data)
            })
            .collect();
        FileStore { file_len, files }
    }

    pub fn from_contents(file_len: usize, files: BTreeMap<usize, Vec<u8>>) -> Result<Self> {
        if let Some((n, _)) = files.iter().find(|(_, d)| d.len() != file_len) {
            return Err(Error::PlanMismatch(format!(
                "file {n} does not have {file_len} symbols"
            )));
        }
        Ok(FileStore { file_len, files })
    }

    pub fn file_len(&self) -> usize {
        self.file_len
    }

    pub fn content(&self, file: usize) -> Option<&[u8]> {
        self.files.get(&file).map(Vec::as_slice)
    }

    /// Compares a decoded file against the original.
    pub fn check(&self, cache: usize, file: usize, decoded: &[u8]) -> Result<()> {
        let original = self
            .content(file)
            .ok_or_else(|| Error::PlanMismatch(format!("file {file} not in store")))?;
        if let Some(index) = (0..self.file_len).find(|&i| decoded.get(i) != original.get(i)) {
            return Err(Error::DecodeMismatch { cache, file, index });
        }
        Ok(())
    }
}

/// What one cache holds after placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    cache: usize,
    /// file -> symbol index -> value, for the cached symbols only
    stored: BTreeMap<usize, Vec<Option<u8>>>,
}

impl CacheContents {
    pub fn new(cache: usize, pm: &PartitionMap, store: &FileStore) -> Result<Self> {
        if cache == 0 || cache > pm.caches() {
            return Err(Error::PlanMismatch(format!("no cache {cache}")));
        }
        let mut stored = BTreeMap::new();
        for n in pm.files() {
            let data = store
                .content(n)
                .ok_or_else(|| Error::PlanMismatch(format!("file {n} not in store")))?;
            let mut held = vec![None; pm.file_len()];
            for sym in pm.cached_symbols(cache, n) {
                held[sym as usize] = Some(data[sym as usize]);
            }
            stored.insert(n, held);
        }
        Ok(CacheContents { cache, stored })
    }

    pub fn cache(&self) -> usize {
        self.cache
    }

    pub fn get(&self, file: usize, symbol: u32) -> Option<u8> {
        self.stored
            .get(&file)?
            .get(symbol as usize)
            .copied()
            .flatten()
    }
}

/// One constituent of a coded message: symbols of `file` meant for
/// `receiver`, taken from the part stored exactly at `subset`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub receiver: usize,
    pub file: usize,
    pub subset: CacheSubset,
    pub symbols: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedMessage {
    pub subset: CacheSubset,
    pub segments: Vec<Segment>,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UncodedMessage {
    pub file: usize,
    pub symbols: Vec<u32>,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MessageSchedule {
    pub uncoded: Vec<UncodedMessage>,
    pub coded: Vec<CodedMessage>,
}

impl MessageSchedule {
    pub fn total_symbols(&self) -> usize {
        self.uncoded.iter().map(|m| m.payload.len()).sum::<usize>()
            + self.coded.iter().map(|m| m.payload.len()).sum::<usize>()
    }
}

/// Broadcast length in files.
pub fn rate_of_schedule(schedule: &MessageSchedule, file_len: usize) -> f64 {
    if file_len == 0 {
        return 0.0;
    }
    schedule.total_symbols() as f64 / file_len as f64
}

fn check_consistent(pm: &PartitionMap, plan: &TransferPlan) -> Result<()> {
    if pm.caches() != plan.caches() {
        return Err(Error::PlanMismatch(format!(
            "partition has {} caches, plan has {}",
            pm.caches(),
            plan.caches()
        )));
    }
    if let Some(n) = plan.files().iter().find(|&&n| !pm.contains_file(n)) {
        return Err(Error::PlanMismatch(format!("file {n} was not placed")));
    }
    Ok(())
}

/// Real-valued retained counts `τ^n_S = (y^n_S / x_|S|)·|V^n_S|` for every
/// non-empty `S`, indexed by mask (entry 0 unused).
fn keep_targets(pm: &PartitionMap, plan: &TransferPlan, file: usize) -> Vec<f64> {
    let x = plan.profile_fractions();
    all_subsets(pm.caches())
        .map(|s| {
            if s.is_empty() {
                return 0.0;
            }
            let avail = pm.symbols(file, s).len() as f64;
            let hi = x[s.len()];
            if hi <= 0.0 {
                0.0
            } else {
                (plan.fraction(file, s) / hi * avail).clamp(0.0, avail)
            }
        })
        .collect()
}

/// Integer keep counts per mask; the remainder of the file goes uncoded.
fn keep_counts(pm: &PartitionMap, plan: &TransferPlan, file: usize) -> Vec<usize> {
    let mut targets = keep_targets(pm, plan, file);
    let f = pm.file_len();
    targets[0] = (f as f64 - targets.iter().sum::<f64>()).max(0.0);
    let mut counts = apportion(&targets, f);
    for s in all_subsets(pm.caches()).skip(1) {
        counts[s.index()] = counts[s.index()].min(pm.symbols(file, s).len());
    }
    counts[0] = 0;
    counts
}

/// Rate the schedule of `plan` would have on this partition before
/// rounding symbol counts.
pub fn expected_schedule_rate(pm: &PartitionMap, plan: &TransferPlan) -> Result<f64> {
    check_consistent(pm, plan)?;
    let f = pm.file_len() as f64;
    let demand = plan.demand();
    let targets: BTreeMap<usize, Vec<f64>> = plan
        .files()
        .iter()
        .map(|&n| (n, keep_targets(pm, plan, n)))
        .collect();
    let uncoded: f64 = targets.values().map(|t| f - t.iter().sum::<f64>()).sum();
    let coded: f64 = all_subsets(pm.caches())
        .filter(|s| s.len() >= 2)
        .map(|s| {
            s.members()
                .map(|k| targets[&demand.file_of(k)][s.without(k).index()])
                .fold(0.0, f64::max)
        })
        .sum();
    Ok((uncoded + coded) / f)
}

/// Builds the broadcast for `plan`'s demand. For each requested file the
/// first retained symbols of every `V^n_S` stay in coded delivery and the
/// displaced tails follow `V^n_∅` in one uncoded message. Coded messages are
/// emitted from the largest subsets down, ascending within a size.
pub fn build_messages(
    pm: &PartitionMap,
    store: &FileStore,
    plan: &TransferPlan,
) -> Result<MessageSchedule> {
    check_consistent(pm, plan)?;
    if store.file_len() != pm.file_len() {
        return Err(Error::PlanMismatch(format!(
            "store has {} symbols per file, partition has {}",
            store.file_len(),
            pm.file_len()
        )));
    }
    let k = pm.caches();
    let demand = plan.demand();
    let mut kept: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
    let mut uncoded = Vec::new();
    for &n in plan.files() {
        let data = store
            .content(n)
            .ok_or_else(|| Error::PlanMismatch(format!("file {n} not in store")))?;
        let counts = keep_counts(pm, plan, n);
        let mut symbols = pm.symbols(n, CacheSubset::EMPTY).to_vec();
        let mut per_mask = vec![Vec::new(); 1 << k];
        for s in all_subsets(k).skip(1) {
            let all = pm.symbols(n, s);
            let (keep, moved) = all.split_at(counts[s.index()]);
            per_mask[s.index()] = keep.to_vec();
            symbols.extend_from_slice(moved);
        }
        kept.insert(n, per_mask);
        if !symbols.is_empty() {
            let payload = symbols.iter().map(|&i| data[i as usize]).collect();
            uncoded.push(UncodedMessage {
                file: n,
                symbols,
                payload,
            });
        }
    }

    let mut coded = Vec::new();
    for size in (2..=k).rev() {
        for s in subsets_of_size(k, size) {
            let segments: Vec<Segment> = s
                .members()
                .map(|r| {
                    let file = demand.file_of(r);
                    let subset = s.without(r);
                    Segment {
                        receiver: r,
                        file,
                        subset,
                        symbols: kept[&file][subset.index()].clone(),
                    }
                })
                .collect();
            let len = segments.iter().map(|g| g.symbols.len()).max().unwrap_or(0);
            if len == 0 {
                continue;
            }
            let mut payload = vec![0u8; len];
            for g in &segments {
                let data = store.content(g.file).expect("checked above");
                for (slot, &i) in payload.iter_mut().zip(&g.symbols) {
                    *slot ^= data[i as usize];
                }
            }
            coded.push(CodedMessage {
                subset: s,
                segments,
                payload,
            });
        }
    }
    Ok(MessageSchedule { uncoded, coded })
}

/// Recovers the file requested by `contents.cache()` from its cache and the
/// broadcast. Fails with the first symbol index that nothing supplied.
pub fn decode(
    contents: &CacheContents,
    schedule: &MessageSchedule,
    demand: &DemandVector,
) -> Result<Vec<u8>> {
    let cache = contents.cache();
    let file = demand.file_of(cache);
    let held = contents
        .stored
        .get(&file)
        .ok_or_else(|| Error::PlanMismatch(format!("file {file} not placed at cache {cache}")))?;
    let mut out = held.clone();

    for m in schedule.uncoded.iter().filter(|m| m.file == file) {
        for (&i, &v) in m.symbols.iter().zip(&m.payload) {
            out[i as usize] = Some(v);
        }
    }
    for m in schedule.coded.iter().filter(|m| m.subset.contains(cache)) {
        let mut payload = m.payload.clone();
        let mut mine = None;
        for g in &m.segments {
            if g.receiver == cache {
                mine = Some(g);
                continue;
            }
            for (slot, &i) in payload.iter_mut().zip(&g.symbols) {
                let v = contents.get(g.file, i).ok_or_else(|| {
                    Error::PlanMismatch(format!(
                        "cache {cache} lacks symbol {i} of file {} in message {}",
                        g.file, m.subset
                    ))
                })?;
                *slot ^= v;
            }
        }
        if let Some(g) = mine {
            for (&i, &v) in g.symbols.iter().zip(&payload) {
                out[i as usize] = Some(v);
            }
        }
    }

    out.iter()
        .enumerate()
        .map(|(index, v)| v.ok_or(Error::DecodeMismatch { cache, file, index }))
        .collect()
}
