//! Scenario evaluation: placement tables, rate sweeps and demand
//! simulation. Every result is a pure function of the scenario; parallel
//! work is collected in input order so output does not depend on thread
//! scheduling.

use std::collections::BTreeMap;

use cachenet_core::bounds::cutset_bound;
use cachenet_core::delivery::{
    adaptive_rate_for_pattern, rate_nonadaptive, simplified_plan, DeliveryScheme,
};
use cachenet_core::demand::{empirical_stats, ChainRun, EmpiricalStats};
use cachenet_core::placement::{
    centralized_profile, decentralized_profile, solve_placement_lp, PlacementProfile, Scheme,
};
use cachenet_core::system::partitions_into_parts;
use cachenet_core::{DemandVector, RedundancyPattern};
use rayon::prelude::*;

use crate::config::{DemandSpec, Scenario};
use crate::error::{CliError, CliResult};
use crate::gap::gap_reduction;

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

pub fn profile_for(scheme: Scheme, caches: usize, m_ratio: f64) -> CliResult<PlacementProfile> {
    let p = match scheme {
        Scheme::Centralized => centralized_profile(caches, m_ratio),
        Scheme::Decentralized => decentralized_profile(caches, m_ratio),
        Scheme::Lp => solve_placement_lp(caches, m_ratio).map(|(p, _)| p),
    };
    p.map_err(|e| CliError::from_core("m_ratio", e))
}

pub fn placement_rows(s: &Scenario) -> CliResult<Vec<PlacementProfile>> {
    let grid = s.require_m_grid()?;
    with_threads(s.threads, || {
        grid.par_iter()
            .map(|&m| profile_for(s.placement, s.caches, m))
            .collect()
    })?
}

/// A weighted set of redundancy patterns evaluated together.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandGroup {
    pub label: String,
    pub patterns: Vec<(RedundancyPattern, f64)>,
}

impl DemandGroup {
    fn total_weight(&self) -> f64 {
        self.patterns.iter().map(|(_, w)| w).sum()
    }

    fn average(&self, f: impl Fn(&RedundancyPattern) -> f64) -> f64 {
        self.patterns.iter().map(|(p, w)| w * f(p)).sum::<f64>() / self.total_weight()
    }

    pub fn average_distinct(&self) -> f64 {
        self.average(|p| p.distinct() as f64)
    }

    /// Groups samples by pattern, each weighted by its count.
    pub fn from_samples(label: &str, samples: &[DemandVector]) -> Self {
        let mut counts: BTreeMap<RedundancyPattern, usize> = BTreeMap::new();
        for d in samples {
            *counts.entry(d.redundancy().pattern).or_default() += 1;
        }
        DemandGroup {
            label: label.to_string(),
            patterns: counts.into_iter().map(|(p, c)| (p, c as f64)).collect(),
        }
    }
}

/// The demand groups of a scenario. Gibbs chains are pooled.
pub fn demand_groups(s: &Scenario) -> CliResult<Vec<DemandGroup>> {
    let groups = match s.require_demand()? {
        DemandSpec::Explicit(d) => vec![DemandGroup {
            label: d.redundancy().pattern.dashed(),
            patterns: vec![(d.redundancy().pattern, 1.0)],
        }],
        DemandSpec::Pattern(p) => vec![DemandGroup {
            label: p.dashed(),
            patterns: vec![(p.clone(), 1.0)],
        }],
        DemandSpec::PatternAverage(ls) => ls
            .iter()
            .map(|&l| DemandGroup {
                label: "all".into(),
                patterns: partitions_into_parts(s.caches, l)
                    .into_iter()
                    .map(|p| (p, 1.0))
                    .collect(),
            })
            .collect(),
        DemandSpec::Gibbs => {
            let run = gibbs_run(s)?;
            vec![DemandGroup::from_samples("gibbs", &run.pooled())]
        }
    };
    Ok(groups)
}

pub fn gibbs_run(s: &Scenario) -> CliResult<ChainRun> {
    let g = &s.gibbs;
    with_threads(s.threads, || {
        let chains: Vec<Vec<DemandVector>> = (0..g.chains as u64)
            .into_par_iter()
            .map(|c| cachenet_core::demand::run_chain(&g.model, g.samples, g.burn_in, s.seed, c))
            .collect();
        ChainRun { chains }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub m_ratio: f64,
    pub scheme: DeliveryScheme,
    pub pattern: String,
    /// Mean number of distinct requests of the group.
    pub distinct: f64,
    pub rate: f64,
    pub bound: f64,
    pub gap_reduction: Option<f64>,
}

impl RateRow {
    pub const CSV_HEADER: &'static str = "m_ratio,scheme,pattern,L,rate,bound,gap_reduction";

    pub fn csv_row(&self) -> String {
        let gap = self
            .gap_reduction
            .map(|g| g.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.m_ratio, self.scheme, self.pattern, self.distinct, self.rate, self.bound, gap
        )
    }
}

/// Average rates of every selected scheme for every group and grid point.
/// Within a group the gap reduction is taken between averages.
pub fn evaluate_groups(s: &Scenario, groups: &[DemandGroup]) -> CliResult<Vec<RateRow>> {
    let profiles = placement_rows(s)?;
    let adaptive = s.delivery.contains(&DeliveryScheme::Adaptive);
    let jobs: Vec<(usize, RedundancyPattern)> = if adaptive {
        let mut unique = Vec::new();
        for (mi, _) in profiles.iter().enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for g in groups {
                for (p, _) in &g.patterns {
                    if seen.insert(p.clone()) {
                        unique.push((mi, p.clone()));
                    }
                }
            }
        }
        unique
    } else {
        Vec::new()
    };
    let solved: Vec<f64> = with_threads(s.threads, || {
        jobs.par_iter()
            .map(|(mi, p)| adaptive_rate_for_pattern(&profiles[*mi], p))
            .collect::<Result<Vec<f64>, _>>()
    })?
    .map_err(|e| CliError::from_core("delivery", e))?;
    let memo: BTreeMap<(usize, RedundancyPattern), f64> = jobs.into_iter().zip(solved).collect();

    let mut rows = Vec::new();
    for (mi, p) in profiles.iter().enumerate() {
        let m = s.m_values[mi];
        let cache_files = m * s.library as f64;
        for g in groups {
            let na = g.average(|pat| rate_nonadaptive(p, pat.distinct()));
            let bound = g.average(|pat| {
                cutset_bound(s.caches, pat.distinct(), s.library, cache_files).value
            });
            let distinct = g.average_distinct();
            for &scheme in &s.delivery {
                let rate = match scheme {
                    DeliveryScheme::NonAdaptive => na,
                    DeliveryScheme::Simplified => {
                        g.average(|pat| simplified_plan(p, pat.distinct()).rate)
                    }
                    DeliveryScheme::Adaptive => g.average(|pat| memo[&(mi, pat.clone())]),
                };
                rows.push(RateRow {
                    m_ratio: m,
                    scheme,
                    pattern: g.label.clone(),
                    distinct,
                    rate,
                    bound,
                    gap_reduction: gap_reduction(na, rate, bound),
                });
            }
        }
    }
    Ok(rows)
}

pub fn rate_rows(s: &Scenario) -> CliResult<Vec<RateRow>> {
    let groups = demand_groups(s)?;
    evaluate_groups(s, &groups)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub m_ratio: f64,
    pub pattern: String,
    pub distinct: usize,
    pub bound: f64,
    pub argmax_s: usize,
}

impl BoundRow {
    pub const CSV_HEADER: &'static str = "m_ratio,pattern,L,bound,argmax_s";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.m_ratio, self.pattern, self.distinct, self.bound, self.argmax_s
        )
    }
}

/// Cutset bound for each distinct-request count the scenario's demand
/// covers (all `L` when no demand is given).
pub fn bound_rows(s: &Scenario) -> CliResult<Vec<BoundRow>> {
    let targets: Vec<(String, usize)> = match &s.demand {
        Some(DemandSpec::Explicit(d)) => {
            vec![(d.redundancy().pattern.dashed(), d.distinct_count())]
        }
        Some(DemandSpec::Pattern(p)) => vec![(p.dashed(), p.distinct())],
        Some(DemandSpec::PatternAverage(ls)) => {
            ls.iter().map(|&l| ("all".to_string(), l)).collect()
        }
        Some(DemandSpec::Gibbs) | None => (1..=s.caches).map(|l| ("all".to_string(), l)).collect(),
    };
    let mut rows = Vec::new();
    for &m in s.require_m_grid()? {
        for (label, l) in &targets {
            let b = cutset_bound(s.caches, *l, s.library, m * s.library as f64);
            rows.push(BoundRow {
                m_ratio: m,
                pattern: label.clone(),
                distinct: *l,
                bound: b.value,
                argmax_s: b.argmax_s,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub run: ChainRun,
    pub stats: EmpiricalStats,
    /// `None` when every chain is constant.
    pub epsr: Option<f64>,
}

pub fn simulate(s: &Scenario) -> CliResult<Simulation> {
    let run = gibbs_run(s)?;
    let pooled = run.pooled();
    let stats = empirical_stats(&pooled).map_err(|e| CliError::from_core("samples", e))?;
    let epsr = if run.chains.len() >= 2 && s.gibbs.samples >= 2 {
        match run.epsr() {
            Ok(v) => Some(v),
            Err(cachenet_core::Error::Degenerate(_)) => None,
            Err(e) => return Err(CliError::from_core("chains", e)),
        }
    } else {
        None
    };
    Ok(Simulation { run, stats, epsr })
}

pub fn csv<T>(header: &str, rows: &[T], row: impl Fn(&T) -> String) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&row(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{MRatioSpec, ScenarioConfig};

    fn scenario(json: &str) -> Scenario {
        ScenarioConfig::from_json(json).unwrap().resolve().unwrap()
    }

    #[test]
    fn pattern_rows() {
        let s = scenario(r#"{"K": 9, "N": 1000, "m_ratio": 0.025, "pattern": [7,1,1]}"#);
        let rows = rate_rows(&s).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].scheme, DeliveryScheme::NonAdaptive);
        assert!((rows[0].rate - 3.225).abs() < 1e-12);
        assert_eq!(rows[0].gap_reduction, Some(0.0));
        assert!((rows[1].gap_reduction.unwrap() - 0.5).abs() < 0.01);
        assert!((rows[2].gap_reduction.unwrap() - 0.78).abs() < 0.01);
        assert_eq!(rows[2].pattern, "7-1-1");
        assert_eq!(rows[2].distinct, 3.0);
    }

    #[test]
    fn explicit_matches_pattern() {
        let a = rate_rows(&scenario(
            r#"{"K": 5, "N": 50, "m_ratio": 0.3, "demands": [4,9,4,4,9]}"#,
        ))
        .unwrap();
        let b = rate_rows(&scenario(
            r#"{"K": 5, "N": 50, "m_ratio": 0.3, "pattern": [3,2]}"#,
        ))
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_average_covers_all_l() {
        let s = scenario(
            r#"{"K": 4, "N": 100, "m_ratio": "0.1:0.1:0.3", "demand_mode": "pattern-average", "delivery": ["adaptive"]}"#,
        );
        let rows = rate_rows(&s).unwrap();
        assert_eq!(rows.len(), 3 * 4);
        // L = 2 averages (3,1) and (2,2)
        let p = centralized_profile(4, 0.1).unwrap();
        let want = (adaptive_rate_for_pattern(&p, &RedundancyPattern::new(vec![3, 1]).unwrap())
            .unwrap()
            + adaptive_rate_for_pattern(&p, &RedundancyPattern::new(vec![2, 2]).unwrap()).unwrap())
            / 2.0;
        assert!((rows[1].rate - want).abs() < 1e-12);
    }

    #[test]
    fn sample_groups_weight_by_count() {
        let ds: Vec<DemandVector> = [[1, 1, 2], [3, 5, 5], [1, 2, 3]]
            .iter()
            .map(|r| DemandVector::new(r.to_vec(), 10).unwrap())
            .collect();
        let g = DemandGroup::from_samples("x", &ds);
        assert_eq!(g.patterns.len(), 2);
        assert!((g.average_distinct() - 7.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_and_placement() {
        let mut cfg =
            ScenarioConfig::from_json(r#"{"K": 5, "N": 1000, "placement": "lp"}"#).unwrap();
        cfg.m_ratio = Some(MRatioSpec::List(vec![0.1, 0.5]));
        let s = cfg.resolve().unwrap();
        let p = placement_rows(&s).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[1].x[2] + p[1].x[3] - 0.1).abs() < 1e-9);
        let b = bound_rows(&s).unwrap();
        assert_eq!(b.len(), 10);
        assert_eq!(b[0].bound, 0.9);
    }

    #[test]
    fn missing_demand_is_config_error() {
        let s = scenario(r#"{"K": 3, "m_ratio": 0.2}"#);
        assert!(matches!(rate_rows(&s), Err(CliError::Config { .. })));
    }
}
