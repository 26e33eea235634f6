//! Coded caching with adaptive delivery.
//!
//! A server broadcasts to `K` caches over a shared link. Caches are filled
//! once (placement) and then serve a sequence of demand vectors (delivery).
//! This crate computes placement profiles, the delivery rate of the classic
//! coded delivery, the rate of adaptive message selection that exploits
//! repeated requests, a cutset lower bound, and a bit-level encoder/decoder
//! that checks every schedule is actually decodable. The [`demand`] module
//! generates correlated demand vectors with a Gibbs sampler.

pub mod bounds;
pub mod delivery;
pub mod demand;
mod error;
pub mod lp;
pub mod placement;
pub mod subset;
pub mod system;

pub use error::{Error, Result};
pub use subset::CacheSubset;
pub use system::{binomial, DemandVector, Redundancy, RedundancyPattern, SystemConfig};

/// Largest number of caches for which subsets are enumerated explicitly.
pub const MAX_CACHES: usize = 12;
