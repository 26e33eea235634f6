//! Demand-aware message selection by linear programming.
//!
//! For each distinct requested file `n` and subset `S`, `y^n_S` is the
//! fraction of file `n` still delivered through the coded message of
//! `S ∪ {k}` (for a requester `k ∉ S`); whatever is removed from `V^n_S` is
//! sent uncoded. The objective is the total broadcast length
//!
//! ```text
//! Σ_{n∈D} y^n_∅  +  Σ_{|S|≥2} max_{k∈S} y^{d_k}_{S\{k}}
//! ```
//!
//! where the uncoded part of each file is counted once, and each `max` is
//! linearized with an epigraph variable `z_S ≥ y^{d_k}_{S\{k}}`.

use std::collections::BTreeMap;

use crate::lp::{self, LinearProgram};
use crate::placement::PlacementProfile;
use crate::subset::{all_subsets, CacheSubset};
use crate::{DemandVector, Error, RedundancyPattern, Result, MAX_CACHES};

/// Per-file, per-subset retained fractions `y^n_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPlan {
    caches: usize,
    demand: DemandVector,
    /// Profile fractions the plan was derived from; `y^n_S ≤ x[|S|]`.
    x: Vec<f64>,
    /// Distinct requested files, ascending.
    files: Vec<usize>,
    /// `y[file index][mask]`
    y: Vec<Vec<f64>>,
}

impl TransferPlan {
    /// The plan that moves nothing: `y^n_S = x_|S|`.
    pub fn identity(p: &PlacementProfile, demand: &DemandVector) -> Result<Self> {
        Self::uniform(p, demand, &p.x)
    }

    /// A symmetric plan with `y^n_S = y[|S|]` for every file, as produced by
    /// the simplified rule.
    pub fn uniform(p: &PlacementProfile, demand: &DemandVector, y: &[f64]) -> Result<Self> {
        check_dims(p, demand)?;
        if y.len() != p.caches + 1 {
            return Err(Error::PlanMismatch(format!(
                "expected {} size classes, got {}",
                p.caches + 1,
                y.len()
            )));
        }
        let files: Vec<usize> = demand.distinct_files().into_iter().collect();
        let row: Vec<f64> = all_subsets(p.caches).map(|s| y[s.len()]).collect();
        Ok(TransferPlan {
            caches: p.caches,
            demand: demand.clone(),
            x: p.x.clone(),
            files: files.clone(),
            y: vec![row; files.len()],
        })
    }

    pub fn caches(&self) -> usize {
        self.caches
    }

    pub fn demand(&self) -> &DemandVector {
        &self.demand
    }

    pub fn files(&self) -> &[usize] {
        &self.files
    }

    pub fn profile_fractions(&self) -> &[f64] {
        &self.x
    }

    fn file_index(&self, file: usize) -> usize {
        self.files
            .binary_search(&file)
            .unwrap_or_else(|_| panic!("file {file} is not requested"))
    }

    /// `y^file_subset`; `file` must be one of the requested files.
    pub fn fraction(&self, file: usize, subset: CacheSubset) -> f64 {
        self.y[self.file_index(file)][subset.index()]
    }

    /// Broadcast length of the plan in files.
    pub fn rate(&self) -> f64 {
        let uncoded: f64 = self.y.iter().map(|row| row[0]).sum();
        let coded: f64 = all_subsets(self.caches)
            .filter(|s| s.len() >= 2)
            .map(|s| {
                s.members()
                    .map(|k| self.fraction(self.demand.file_of(k), s.without(k)))
                    .fold(0.0, f64::max)
            })
            .sum();
        uncoded + coded
    }

    /// Largest violation of the partition and range constraints.
    pub fn max_violation(&self) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.y {
            let total: f64 = row.iter().sum();
            worst = worst.max((total - 1.0).abs());
            for (mask, &v) in row.iter().enumerate() {
                let hi = if mask == 0 {
                    1.0
                } else {
                    self.x[(mask as u32).count_ones() as usize]
                };
                worst = worst.max(-v).max(v - hi);
            }
        }
        worst
    }
}

fn check_dims(p: &PlacementProfile, demand: &DemandVector) -> Result<()> {
    if p.caches != demand.caches() {
        return Err(Error::PlanMismatch(format!(
            "profile has {} caches, demand has {}",
            p.caches,
            demand.caches()
        )));
    }
    if p.caches > MAX_CACHES {
        return Err(Error::TooManyCaches {
            caches: p.caches,
            max: MAX_CACHES,
        });
    }
    Ok(())
}

/// Solves the message-selection LP for one demand vector and returns the
/// optimal plan with its rate.
///
/// Variables that cannot affect the objective are fixed before solving:
/// `y^n_S` with `x_|S| = 0` is zero, and `y^n_S` where every requester of
/// `n` lies in `S` never enters a coded message, so it keeps its full
/// `x_|S|` (which only relieves the uncoded share).
pub fn adaptive_plan(p: &PlacementProfile, demand: &DemandVector) -> Result<(TransferPlan, f64)> {
    check_dims(p, demand)?;
    let k = p.caches;
    let subsets = 1usize << k;
    let files: Vec<usize> = demand.distinct_files().into_iter().collect();
    let requesters: Vec<CacheSubset> = files
        .iter()
        .map(|&n| CacheSubset::from_members((1..=k).filter(|&c| demand.file_of(c) == n)))
        .collect();

    enum Slot {
        Var(usize),
        Fixed(f64),
    }
    let mut prog = LinearProgram::new();
    let mut slots: Vec<Vec<Slot>> = Vec::with_capacity(files.len());
    for who in &requesters {
        let mut row = Vec::with_capacity(subsets);
        for s in all_subsets(k) {
            let slot = if s.is_empty() {
                Slot::Var(prog.add_var(1.0, 0.0, 1.0))
            } else {
                let hi = p.x[s.len()];
                if hi <= 0.0 {
                    Slot::Fixed(0.0)
                } else if who.mask() & !s.mask() == 0 {
                    Slot::Fixed(hi)
                } else {
                    Slot::Var(prog.add_var(0.0, 0.0, hi))
                }
            };
            row.push(slot);
        }
        slots.push(row);
    }
    for row in &slots {
        let mut coeffs = Vec::new();
        let mut rhs = 1.0;
        for slot in row {
            match *slot {
                Slot::Var(v) => coeffs.push((v, 1.0)),
                Slot::Fixed(c) => rhs -= c,
            }
        }
        prog.add_eq(coeffs, rhs);
    }
    let index_of: BTreeMap<usize, usize> = files.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    for s in all_subsets(k).filter(|s| s.len() >= 2) {
        let members: Vec<usize> = s
            .members()
            .filter_map(
                |c| match slots[index_of[&demand.file_of(c)]][s.without(c).index()] {
                    Slot::Var(v) => Some(v),
                    Slot::Fixed(_) => None,
                },
            )
            .collect();
        if members.is_empty() {
            continue;
        }
        let z = prog.add_var(1.0, 0.0, f64::INFINITY);
        for v in members {
            prog.add_le(vec![(v, 1.0), (z, -1.0)], 0.0);
        }
    }

    let sol = lp::solve(&prog)?.into_optimal()?;
    let y: Vec<Vec<f64>> = slots
        .iter()
        .map(|row| {
            row.iter()
                .map(|slot| match *slot {
                    Slot::Var(v) => sol.assignment[v],
                    Slot::Fixed(c) => c,
                })
                .collect()
        })
        .collect();
    let plan = TransferPlan {
        caches: k,
        demand: demand.clone(),
        x: p.x.clone(),
        files,
        y,
    };
    Ok((plan, sol.value))
}

/// Adaptive rate of the canonical demand realizing `pattern`. The rate is
/// invariant under cache permutations and file relabeling, so this stands
/// for every demand with the same pattern.
pub fn adaptive_rate_for_pattern(p: &PlacementProfile, pattern: &RedundancyPattern) -> Result<f64> {
    let demand = DemandVector::from_pattern(pattern);
    adaptive_plan(p, &demand).map(|(_, rate)| rate)
}
