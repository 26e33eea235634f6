//! Delivery rates and message schedules.
//!
//! Three schemes share one placement:
//!
//! * non-adaptive: every coded message `⊕_{k∈S} V^{d_k}_{S\{k}}` is sent and
//!   the uncached part of each distinct file is sent once;
//! * simplified adaptive: depending only on the number of distinct requests
//!   `L`, whole size classes of subfiles are moved to uncoded delivery;
//! * adaptive: a linear program chooses, per file and per subset, how much
//!   of each subfile to deliver uncoded ([`adaptive_plan`]).
//!
//! [`build_messages`] and [`decode`] carry a plan down to actual symbols.

mod adaptive;
mod messages;

use std::fmt;
use std::str::FromStr;

use crate::placement::PlacementProfile;
use crate::system::choose;
use crate::{Error, RedundancyPattern, Result};

pub use adaptive::{adaptive_plan, adaptive_rate_for_pattern, TransferPlan};
pub use messages::{
    build_messages, decode, expected_schedule_rate, rate_of_schedule, CacheContents, CodedMessage,
    FileStore, MessageSchedule, Segment, UncodedMessage,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeliveryScheme {
    NonAdaptive,
    Simplified,
    Adaptive,
}

impl DeliveryScheme {
    pub const ALL: [DeliveryScheme; 3] = [
        DeliveryScheme::NonAdaptive,
        DeliveryScheme::Simplified,
        DeliveryScheme::Adaptive,
    ];
}

impl fmt::Display for DeliveryScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeliveryScheme::NonAdaptive => "nonadaptive",
            DeliveryScheme::Simplified => "simplified",
            DeliveryScheme::Adaptive => "adaptive",
        })
    }
}

impl FromStr for DeliveryScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonadaptive" => Ok(DeliveryScheme::NonAdaptive),
            "simplified" => Ok(DeliveryScheme::Simplified),
            "adaptive" => Ok(DeliveryScheme::Adaptive),
            other => Err(Error::InvalidConfig(format!(
                "unknown delivery scheme `{other}`"
            ))),
        }
    }
}

/// Rate of the classic coded delivery for a demand with `distinct` files:
/// `L·x_0 + Σ_{s=1}^{K-1} C(K, s+1)·x_s`.
pub fn rate_nonadaptive(p: &PlacementProfile, distinct: usize) -> f64 {
    let k = p.caches;
    debug_assert!(distinct >= 1 && distinct <= k);
    distinct as f64 * p.x[0] + (1..k).map(|s| choose(k, s + 1) * p.x[s]).sum::<f64>()
}

/// `K(1-q)/(1+Kq)`; defined only when `t = Kq` is an integer.
pub fn peak_rate_centralized(caches: usize, m_ratio: f64) -> Result<f64> {
    let t = caches as f64 * m_ratio;
    if (t - t.round()).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "K·M/N = {t} is not an integer"
        )));
    }
    let k = caches as f64;
    Ok(k * (1.0 - m_ratio) / (1.0 + k * m_ratio))
}

/// `K(1-q)·(1-(1-q)^K)/(Kq)`, with the `q → 0` limit `K`.
pub fn peak_rate_decentralized(caches: usize, m_ratio: f64) -> f64 {
    let k = caches as f64;
    let q = m_ratio;
    if q <= 0.0 {
        return k;
    }
    k * (1.0 - q) * (1.0 - (1.0 - q).powi(caches as i32)) / (k * q)
}

/// Largest subset size worth converting to uncoded delivery,
/// `⌊(K-L)/(L+1)⌋`.
pub fn shat(caches: usize, distinct: usize) -> usize {
    (caches - distinct) / (distinct + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplifiedPlan {
    /// `y[s]` for `s = 0..=K`.
    pub y: Vec<f64>,
    pub shat: usize,
    pub rate: f64,
}

/// Closed-form message selection that depends only on `L`: subfiles of
/// size `1..=ŝ` are all delivered uncoded, larger ones stay coded.
pub fn simplified_plan(p: &PlacementProfile, distinct: usize) -> SimplifiedPlan {
    let k = p.caches;
    let cut = shat(k, distinct);
    let mut y = p.x.clone();
    for s in 1..=cut {
        y[0] += choose(k, s) * p.x[s];
        y[s] = 0.0;
    }
    let rate = simplified_objective(k, distinct, &y);
    SimplifiedPlan { y, shat: cut, rate }
}

/// `L·y_0 + Σ_{s=1}^{K-1} C(K, s+1)·y_s`
pub fn simplified_objective(caches: usize, distinct: usize, y: &[f64]) -> f64 {
    distinct as f64 * y[0]
        + (1..caches)
            .map(|s| choose(caches, s + 1) * y[s])
            .sum::<f64>()
}

/// One computed rate, as written to the rates CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: DeliveryScheme,
    pub caches: usize,
    pub library: usize,
    pub m_ratio: f64,
    pub pattern: RedundancyPattern,
    pub rate: f64,
}

impl RateReport {
    pub const CSV_HEADER: &'static str = "scheme,K,N,m_ratio,pattern,rate";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.scheme,
            self.caches,
            self.library,
            self.m_ratio,
            self.pattern.dashed(),
            self.rate
        )
    }
}
