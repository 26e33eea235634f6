use crate::{DemandVector, Error, Result};

/// Estimated potential scale reduction of `m` chains of equal length `T`:
/// `sqrt(((T-1)/T)·W + B/T) / sqrt(W)`, with `W` the mean within-chain
/// sample variance and `B/T` the sample variance of the chain means.
pub fn epsr(chains: &[Vec<f64>]) -> Result<f64> {
    let m = chains.len();
    if m < 2 {
        return Err(Error::InvalidConfig(
            "potential scale reduction needs at least 2 chains".into(),
        ));
    }
    let t = chains[0].len();
    if t < 2 || chains.iter().any(|c| c.len() != t) {
        return Err(Error::InvalidConfig(
            "chains must have equal length of at least 2".into(),
        ));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let within: f64 = chains
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (t - 1) as f64)
        .sum::<f64>()
        / m as f64;
    if within <= 0.0 {
        return Err(Error::Degenerate("all chains are constant".into()));
    }
    let grand = mean(&means);
    let between_over_t = means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>() / (m - 1) as f64;
    let tf = t as f64;
    let pooled = (tf - 1.0) / tf * within + between_over_t;
    Ok((pooled / within).sqrt())
}

/// Scalar summary of a demand vector used for convergence checks: the mean
/// requested file index.
pub fn chain_statistic(d: &DemandVector) -> f64 {
    d.requests().iter().sum::<usize>() as f64 / d.caches() as f64
}

/// Correlation between the requests of caches `i < j`; `None` when either
/// sequence is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub rho_max: f64,
    pub rho_avg: f64,
    pub l_avg: f64,
    pub pairs: Vec<PairCorrelation>,
}

impl EmpiricalStats {
    pub const CSV_HEADER: &'static str = "r,theta,rho_max,rho_avg,L_avg";

    pub fn csv_row(&self, r: f64, theta: f64) -> String {
        format!(
            "{r},{theta},{},{},{}",
            self.rho_max, self.rho_avg, self.l_avg
        )
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Pairwise Pearson correlations of the request sequences and the mean
/// number of distinct requests. Pairs with a constant sequence are listed
/// but left out of `rho_max` and `rho_avg` (which are NaN when no pair is
/// defined).
pub fn empirical_stats(samples: &[DemandVector]) -> Result<EmpiricalStats> {
    if samples.len() < 2 {
        return Err(Error::InvalidConfig("need at least 2 samples".into()));
    }
    let k = samples[0].caches();
    if samples.iter().any(|d| d.caches() != k) {
        return Err(Error::InvalidDemand("samples differ in cache count".into()));
    }
    let columns: Vec<Vec<f64>> = (1..=k)
        .map(|c| samples.iter().map(|d| d.file_of(c) as f64).collect())
        .collect();
    let mut pairs = Vec::new();
    for i in 1..=k {
        for j in i + 1..=k {
            pairs.push(PairCorrelation {
                i,
                j,
                rho: pearson(&columns[i - 1], &columns[j - 1]),
            });
        }
    }
    let defined: Vec<f64> = pairs.iter().filter_map(|p| p.rho).collect();
    let (rho_max, rho_avg) = if defined.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            defined.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean(&defined),
        )
    };
    let l_avg = samples
        .iter()
        .map(|d| d.distinct_count() as f64)
        .sum::<f64>()
        / samples.len() as f64;
    Ok(EmpiricalStats {
        rho_max,
        rho_avg,
        l_avg,
        pairs,
    })
}
