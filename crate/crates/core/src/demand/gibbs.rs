use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PopularityDist;
use crate::{DemandVector, Error, Result};

/// Undirected graph over caches; vertex `k` is stored at index `k - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn complete(caches: usize) -> Self {
        let neighbors = (1..=caches)
            .map(|k| (1..=caches).filter(|&j| j != k).collect())
            .collect();
        Adjacency { neighbors }
    }

    /// Builds the graph from 1-based edges; self-loops are rejected and
    /// duplicates ignored.
    pub fn from_edges(caches: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); caches];
        for &(a, b) in edges {
            if a == 0 || b == 0 || a > caches || b > caches {
                return Err(Error::InvalidConfig(format!(
                    "edge ({a},{b}) outside caches 1..={caches}"
                )));
            }
            if a == b {
                return Err(Error::InvalidConfig(format!("self-loop at cache {a}")));
            }
            sets[a - 1].insert(b);
            sets[b - 1].insert(a);
        }
        Ok(Adjacency {
            neighbors: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Parses one edge per line as two whitespace- or comma-separated cache
    /// indices. Blank lines and `#` comments are skipped.
    pub fn parse_edge_list(caches: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::InvalidConfig(format!("edge list line {}: bad index `{s}`", no + 1))
                })
            };
            match fields.as_slice() {
                [a, b] => edges.push((parse(a)?, parse(b)?)),
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "edge list line {}: expected two indices",
                        no + 1
                    )))
                }
            }
        }
        Self::from_edges(caches, &edges)
    }

    pub fn caches(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, cache: usize) -> &[usize] {
        &self.neighbors[cache - 1]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.neighbors(a).contains(&b)
    }
}

/// Correlated requests: with probability `r` a cache copies the request of
/// a neighbor, otherwise it draws from the popularity distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    pub adjacency: Adjacency,
    pub r: f64,
    pub popularity: PopularityDist,
}

impl CorrelationModel {
    pub fn new(adjacency: Adjacency, r: f64, popularity: PopularityDist) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidConfig(format!("r = {r} outside [0, 1]")));
        }
        if adjacency.caches() == 0 {
            return Err(Error::InvalidConfig("graph has no caches".into()));
        }
        if popularity.library() < adjacency.caches() {
            return Err(Error::InvalidConfig(format!(
                "library of {} files is smaller than {} caches",
                popularity.library(),
                adjacency.caches()
            )));
        }
        Ok(CorrelationModel {
            adjacency,
            r,
            popularity,
        })
    }

    pub fn caches(&self) -> usize {
        self.adjacency.caches()
    }

    pub fn library(&self) -> usize {
        self.popularity.library()
    }

    /// Distinct files currently requested by the neighbors of `cache`.
    fn neighbor_files(&self, cache: usize, current: &[usize]) -> BTreeSet<usize> {
        self.adjacency
            .neighbors(cache)
            .iter()
            .map(|&j| current[j - 1])
            .collect()
    }

    /// Probability of `cache` requesting each file given the others:
    /// `r/|N(k)| + p_n(1-r)` for files in the neighbor set `N(k)`,
    /// `p_n(1-r)` otherwise. A cache without neighbors samples
    /// independently.
    pub fn conditional_pmf(&self, cache: usize, current: &DemandVector) -> Vec<f64> {
        let near = self.neighbor_files(cache, current.requests());
        let r = if near.is_empty() { 0.0 } else { self.r };
        let mut pmf: Vec<f64> = self
            .popularity
            .pmf()
            .iter()
            .map(|p| p * (1.0 - r))
            .collect();
        for &n in &near {
            pmf[n - 1] += r / near.len() as f64;
        }
        pmf
    }

    /// Same distribution as [`conditional_pmf`](Self::conditional_pmf),
    /// drawn as a mixture without building the pmf.
    fn draw<R: Rng + ?Sized>(&self, cache: usize, current: &[usize], rng: &mut R) -> usize {
        let near = self.neighbor_files(cache, current);
        if !near.is_empty() && rng.gen_bool(self.r) {
            let pick = rng.gen_range(0..near.len());
            *near.iter().nth(pick).expect("index within set")
        } else {
            self.popularity.sample(rng)
        }
    }
}

/// One Gibbs chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    current: Vec<usize>,
    rng: ChaCha8Rng,
    pub history: Vec<DemandVector>,
}

impl ChainState {
    /// Starts a chain from independent popularity draws. Chain `chain` of
    /// a run with `seed` uses ChaCha8 stream `chain` of that seed.
    pub fn new(model: &CorrelationModel, seed: u64, chain: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chain);
        let current = (0..model.caches())
            .map(|_| model.popularity.sample(&mut rng))
            .collect();
        ChainState {
            current,
            rng,
            history: Vec::new(),
        }
    }

    pub fn current(&self) -> DemandVector {
        DemandVector::new(self.current.clone(), usize::MAX).expect("chain state is valid")
    }
}

/// Resamples every cache's request in ascending cache order, each from its
/// conditional given the latest values, and records the result.
pub fn gibbs_sweep(state: &mut ChainState, model: &CorrelationModel) {
    for cache in 1..=model.caches() {
        let n = model.draw(cache, &state.current, &mut state.rng);
        state.current[cache - 1] = n;
    }
    let d = DemandVector::new(state.current.clone(), model.library()).expect("draws are in range");
    state.history.push(d);
}

/// Runs one chain: `burn_in` discarded sweeps followed by `count` recorded
/// ones.
pub fn run_chain(
    model: &CorrelationModel,
    count: usize,
    burn_in: usize,
    seed: u64,
    chain: u64,
) -> Vec<DemandVector> {
    let mut state = ChainState::new(model, seed, chain);
    for _ in 0..burn_in {
        gibbs_sweep(&mut state, model);
    }
    state.history.clear();
    state.history.reserve(count);
    for _ in 0..count {
        gibbs_sweep(&mut state, model);
    }
    state.history
}

/// Single-chain sampling (stream 0 of `seed`).
pub fn sample_demands(
    model: &CorrelationModel,
    count: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<DemandVector>> {
    if count == 0 {
        return Err(Error::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    Ok(run_chain(model, count, burn_in, seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::zipf_pmf;

    fn model(k: usize, n: usize, r: f64, theta: f64) -> CorrelationModel {
        CorrelationModel::new(Adjacency::complete(k), r, zipf_pmf(n, theta).unwrap()).unwrap()
    }

    #[test]
    fn conditional_examples() {
        let m = model(4, 1000, 0.9, 0.0);
        let d = DemandVector::new(vec![9, 1, 2, 3], 1000).unwrap();
        let pmf = m.conditional_pmf(1, &d);
        assert!((pmf[0] - 0.3001).abs() < 1e-12);
        assert!((pmf[8] - 0.0001).abs() < 1e-12);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let m = model(3, 10, 1.0, 0.0);
        let d = DemandVector::new(vec![1, 5, 5], 10).unwrap();
        let pmf = m.conditional_pmf(1, &d);
        assert_eq!(pmf[4], 1.0);

        let m = model(3, 10, 0.0, 0.8);
        let pmf = m.conditional_pmf(2, &d);
        assert_eq!(pmf, m.popularity.pmf());
    }

    #[test]
    fn neighbor_set_not_multiset() {
        let m = model(4, 10, 0.6, 0.0);
        let d = DemandVector::new(vec![1, 2, 2, 3], 10).unwrap();
        let pmf = m.conditional_pmf(1, &d);
        assert!((pmf[1] - (0.3 + 0.04)).abs() < 1e-12);
        assert!((pmf[2] - (0.3 + 0.04)).abs() < 1e-12);
    }

    #[test]
    fn isolated_vertex_is_independent() {
        let adj = Adjacency::from_edges(3, &[(1, 2)]).unwrap();
        let m = CorrelationModel::new(adj, 0.9, zipf_pmf(5, 0.0).unwrap()).unwrap();
        let d = DemandVector::new(vec![1, 2, 3], 5).unwrap();
        assert!(m
            .conditional_pmf(3, &d)
            .iter()
            .all(|&p| (p - 0.2).abs() < 1e-15));
        assert!((m.conditional_pmf(1, &d)[1] - (0.9 + 0.02)).abs() < 1e-12);
    }

    #[test]
    fn mixture_draw_matches_pmf() {
        let m = model(4, 6, 0.7, 0.5);
        let cur = vec![2, 2, 5, 1];
        let d = DemandVector::new(cur.clone(), 6).unwrap();
        let pmf = m.conditional_pmf(3, &d);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 100_000;
        let mut counts = vec![0usize; 6];
        for _ in 0..trials {
            counts[m.draw(3, &cur, &mut rng) - 1] += 1;
        }
        for (c, p) in counts.iter().zip(&pmf) {
            let sd = (trials as f64 * p * (1.0 - p)).sqrt().max(1.0);
            assert!(
                (*c as f64 - trials as f64 * p).abs() < 4.5 * sd,
                "{c} vs {p}"
            );
        }
    }

    #[test]
    fn copy_only_dynamics_absorb() {
        let m = model(5, 10, 1.0, 0.0);
        let mut state = ChainState::new(&m, 1, 0);
        state.current = vec![4; 5];
        for _ in 0..20 {
            gibbs_sweep(&mut state, &m);
        }
        assert!(state.history.iter().all(|d| d.requests() == [4; 5]));
    }

    #[test]
    fn reproducible_and_stream_separated() {
        let m = model(6, 100, 0.8, 0.3);
        let a = run_chain(&m, 50, 10, 9, 0);
        let b = run_chain(&m, 50, 10, 9, 0);
        let c = run_chain(&m, 50, 10, 9, 1);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(sample_demands(&m, 50, 10, 9).unwrap(), a);
    }

    #[test]
    fn burn_in_zero_gives_one_sweep() {
        let m = model(3, 10, 0.5, 0.0);
        let s = sample_demands(&m, 1, 0, 4).unwrap();
        assert_eq!(s.len(), 1);
        assert!(sample_demands(&m, 0, 0, 4).is_err());
    }

    #[test]
    fn edge_list_parsing() {
        let adj = Adjacency::parse_edge_list(4, "# ring\n1 2\n2,3\n\n3 4\n4 1\n1 2\n").unwrap();
        assert_eq!(adj.neighbors(1), &[2, 4]);
        assert!(adj.has_edge(3, 2));
        assert!(!adj.has_edge(1, 3));
        assert!(Adjacency::parse_edge_list(4, "1 1\n").is_err());
        assert!(Adjacency::parse_edge_list(4, "1 5\n").is_err());
        assert!(Adjacency::parse_edge_list(4, "1 2 3\n").is_err());
        assert_eq!(
            Adjacency::parse_edge_list(3, "1 2\n2 3\n1 3").unwrap(),
            Adjacency::complete(3)
        );
    }
}
