//! Bit-level checks: place real symbols, build every scheme's broadcast,
//! decode it at every cache and compare the broadcast length with the
//! analytic rate.

use cachenet_core::delivery::{
    adaptive_plan, build_messages, decode, expected_schedule_rate, rate_of_schedule,
    simplified_plan, CacheContents, DeliveryScheme, FileStore, MessageSchedule, TransferPlan,
};
use cachenet_core::demand::{sample_demands, zipf_pmf, Adjacency, CorrelationModel};
use cachenet_core::placement::{materialize_partition, PartitionMap, PlacementProfile, Scheme};
use cachenet_core::{DemandVector, Error, SystemConfig};
use rayon::prelude::*;

use crate::config::{DemandSpec, Scenario, DEFAULT_VERIFY_DEMANDS};
use crate::error::{CliError, CliResult};
use crate::run::{gibbs_run, profile_for, with_threads};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRecord {
    pub m_ratio: f64,
    pub scheme: DeliveryScheme,
    pub demand: DemandVector,
    pub schedule_rate: f64,
    /// The plan's rate on the realized partition, before symbol rounding.
    pub analytic_rate: f64,
    /// The plan's rate under the nominal profile fractions.
    pub plan_rate: f64,
    /// Caches that failed to reconstruct their file.
    pub failed_caches: Vec<usize>,
    pub slack: f64,
}

impl VerifyRecord {
    pub const CSV_HEADER: &'static str =
        "m_ratio,scheme,demand,schedule_rate,analytic_rate,plan_rate,decoded,pass";

    pub fn decoded(&self) -> bool {
        self.failed_caches.is_empty()
    }

    pub fn rate_ok(&self) -> bool {
        (self.schedule_rate - self.analytic_rate).abs() <= self.slack
    }

    pub fn passed(&self) -> bool {
        self.decoded() && self.rate_ok()
    }

    pub fn csv_row(&self) -> String {
        let demand: Vec<String> = self
            .demand
            .requests()
            .iter()
            .map(|d| d.to_string())
            .collect();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.m_ratio,
            self.scheme,
            demand.join("-"),
            self.schedule_rate,
            self.analytic_rate,
            self.plan_rate,
            self.decoded(),
            self.passed()
        )
    }
}

/// `2^K·K/F`: the tolerated difference between schedule and analytic rate.
pub fn quantization_slack(caches: usize, file_len: usize) -> f64 {
    (1u64 << caches) as f64 * caches as f64 / file_len as f64
}

pub fn plan_for(
    scheme: DeliveryScheme,
    p: &PlacementProfile,
    d: &DemandVector,
) -> cachenet_core::Result<TransferPlan> {
    match scheme {
        DeliveryScheme::NonAdaptive => TransferPlan::identity(p, d),
        DeliveryScheme::Simplified => {
            let y = simplified_plan(p, d.distinct_count()).y;
            TransferPlan::uniform(p, d, &y)
        }
        DeliveryScheme::Adaptive => adaptive_plan(p, d).map(|(plan, _)| plan),
    }
}

/// Decodes `schedule` at every cache and returns the caches whose result
/// differs from the original file.
pub fn failed_caches(
    pm: &PartitionMap,
    store: &FileStore,
    schedule: &MessageSchedule,
    d: &DemandVector,
) -> cachenet_core::Result<Vec<usize>> {
    let mut failed = Vec::new();
    for cache in 1..=pm.caches() {
        let contents = CacheContents::new(cache, pm, store)?;
        let ok = match decode(&contents, schedule, d) {
            Ok(out) => store.check(cache, d.file_of(cache), &out).is_ok(),
            Err(Error::DecodeMismatch { .. }) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            failed.push(cache);
        }
    }
    Ok(failed)
}

/// Runs one demand through every selected scheme.
pub fn verify_demand(
    config: &SystemConfig,
    profile: &PlacementProfile,
    schemes: &[DeliveryScheme],
    d: &DemandVector,
    seed: u64,
) -> cachenet_core::Result<Vec<VerifyRecord>> {
    let file_len = config.file_len.expect("bit-level config has F");
    let files: Vec<usize> = d.distinct_files().into_iter().collect();
    let pm = materialize_partition(config, profile, &files, seed)?;
    let store = FileStore::random(&files, file_len, seed.wrapping_add(1));
    let mut out = Vec::new();
    for &scheme in schemes {
        let plan = plan_for(scheme, profile, d)?;
        let schedule = build_messages(&pm, &store, &plan)?;
        let analytic_rate = match profile.scheme {
            Scheme::Decentralized => expected_schedule_rate(&pm, &plan)?,
            Scheme::Centralized | Scheme::Lp => plan.rate(),
        };
        out.push(VerifyRecord {
            m_ratio: profile.m_ratio,
            scheme,
            demand: d.clone(),
            schedule_rate: rate_of_schedule(&schedule, file_len),
            analytic_rate,
            plan_rate: plan.rate(),
            failed_caches: failed_caches(&pm, &store, &schedule, d)?,
            slack: quantization_slack(config.caches, file_len),
        });
    }
    Ok(out)
}

/// Demands checked by `verify`: the configured one, or `samples` (default
/// 20) draws. Without a demand mode the draws are independent and uniform.
pub fn verify_demands(s: &Scenario) -> CliResult<Vec<DemandVector>> {
    match &s.demand {
        Some(DemandSpec::Explicit(d)) => Ok(vec![d.clone()]),
        Some(DemandSpec::Pattern(p)) => Ok(vec![DemandVector::from_pattern(p)]),
        Some(DemandSpec::Gibbs) => Ok(gibbs_run(s)?.pooled()),
        Some(DemandSpec::PatternAverage(_)) => Err(CliError::config(
            "demand_mode",
            "verify needs concrete demands, not pattern-average",
        )),
        None => {
            let model = CorrelationModel::new(
                Adjacency::complete(s.caches),
                0.0,
                zipf_pmf(s.library, 0.0).map_err(|e| CliError::from_core("N", e))?,
            )
            .map_err(|e| CliError::from_core("N", e))?;
            let count = s.samples_given.unwrap_or(DEFAULT_VERIFY_DEMANDS);
            sample_demands(&model, count, 0, s.seed).map_err(|e| CliError::from_core("samples", e))
        }
    }
}

pub fn verify(s: &Scenario) -> CliResult<Vec<VerifyRecord>> {
    let file_len = s
        .file_len
        .ok_or_else(|| CliError::config("F", "verify needs a file length"))?;
    let grid = s.require_m_grid()?;
    let demands = verify_demands(s)?;
    let mut records = Vec::new();
    for &m in grid {
        let config = SystemConfig::new(s.caches, s.library, m)
            .and_then(|c| c.with_file_len(file_len))
            .map_err(|e| CliError::from_core("K", e))?;
        let profile = profile_for(s.placement, s.caches, m)?;
        let batch: Vec<Vec<VerifyRecord>> = with_threads(s.threads, || {
            demands
                .par_iter()
                .map(|d| verify_demand(&config, &profile, &s.delivery, d, s.seed))
                .collect::<cachenet_core::Result<Vec<_>>>()
        })?
        .map_err(|e| CliError::from_core("delivery", e))?;
        records.extend(batch.into_iter().flatten());
    }
    Ok(records)
}
