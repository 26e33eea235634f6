//! Demand generation: Zipf popularity, neighbor-correlated requests drawn
//! by Gibbs sampling, a multi-chain convergence diagnostic and the
//! empirical statistics of a sample.

mod diagnostics;
mod gibbs;
mod popularity;

pub use diagnostics::{chain_statistic, empirical_stats, epsr, EmpiricalStats, PairCorrelation};
pub use gibbs::{gibbs_sweep, run_chain, sample_demands, Adjacency, ChainState, CorrelationModel};
pub use popularity::{zipf_pmf, PopularityDist};

use crate::{DemandVector, Result};

/// Samples of several independent chains of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub chains: Vec<Vec<DemandVector>>,
}

impl ChainRun {
    /// Runs `chains` chains on streams `0..chains` of `seed`.
    pub fn sample(
        model: &CorrelationModel,
        chains: usize,
        count: usize,
        burn_in: usize,
        seed: u64,
    ) -> Result<Self> {
        if chains == 0 || count == 0 {
            return Err(crate::Error::InvalidConfig(
                "need at least one chain and one sample".into(),
            ));
        }
        let chains = (0..chains as u64)
            .map(|c| run_chain(model, count, burn_in, seed, c))
            .collect();
        Ok(ChainRun { chains })
    }

    /// All samples, chain after chain.
    pub fn pooled(&self) -> Vec<DemandVector> {
        self.chains.iter().flatten().cloned().collect()
    }

    /// Potential scale reduction of the mean-file-index statistic.
    pub fn epsr(&self) -> Result<f64> {
        let stats: Vec<Vec<f64>> = self
            .chains
            .iter()
            .map(|c| c.iter().map(chain_statistic).collect())
            .collect();
        epsr(&stats)
    }
}

pub const SAMPLES_CSV_PREFIX: &str = "sample_index";

/// `sample_index,d_1,...,d_K`
pub fn samples_csv_header(caches: usize) -> String {
    let mut h = String::from(SAMPLES_CSV_PREFIX);
    for k in 1..=caches {
        h.push_str(&format!(",d_{k}"));
    }
    h
}

pub fn samples_csv_row(index: usize, d: &DemandVector) -> String {
    let mut row = index.to_string();
    for n in d.requests() {
        row.push_str(&format!(",{n}"));
    }
    row
}
