//! Scenario configuration: a JSON file and/or command-line flags resolved
//! into a validated [`Scenario`].

use std::fs;
use std::path::{Path, PathBuf};

use cachenet_core::delivery::DeliveryScheme;
use cachenet_core::demand::{zipf_pmf, Adjacency, CorrelationModel};
use cachenet_core::placement::Scheme;
use cachenet_core::{DemandVector, RedundancyPattern, MAX_CACHES};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_LIBRARY: usize = 1000;
pub const DEFAULT_CHAINS: usize = 5;
pub const DEFAULT_BURN_IN: usize = 150;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_R: f64 = 0.9;
pub const DEFAULT_VERIFY_DEMANDS: usize = 20;

/// `m_ratio` as written in a config file: a number, a `start:step:end`
/// string, or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MRatioSpec {
    Value(f64),
    Grid(String),
    List(Vec<f64>),
}

impl MRatioSpec {
    pub fn values(&self) -> CliResult<Vec<f64>> {
        let values = match self {
            MRatioSpec::Value(v) => vec![*v],
            MRatioSpec::Grid(s) => parse_m_grid(s)?,
            MRatioSpec::List(v) => v.clone(),
        };
        if values.is_empty() {
            return Err(CliError::config("m_ratio", "empty grid"));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(CliError::config("m_ratio", format!("{bad} outside [0, 1]")));
        }
        Ok(values)
    }
}

/// Parses `v` or `start:step:end` (inclusive). Grid points are snapped to
/// 12 decimals so that `0:0.025:0.5` yields exactly `0.025·j`.
pub fn parse_m_grid(s: &str) -> CliResult<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::config("m_ratio", format!("`{t}` is not a number")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if !(step > 0.0) || b < a {
                return Err(CliError::config(
                    "m_ratio",
                    format!("grid `{s}` needs step > 0 and end >= start"),
                ));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n)
                .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(CliError::config("m_ratio", format!("cannot parse `{s}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemandMode {
    Explicit,
    Pattern,
    PatternAverage,
    Gibbs,
}

impl std::str::FromStr for DemandMode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "explicit" => Ok(DemandMode::Explicit),
            "pattern" => Ok(DemandMode::Pattern),
            "pattern-average" => Ok(DemandMode::PatternAverage),
            "gibbs" => Ok(DemandMode::Gibbs),
            other => Err(CliError::config(
                "demand_mode",
                format!("unknown mode `{other}`"),
            )),
        }
    }
}

/// Raw scenario settings. Every field is optional so that a file and the
/// command line can be layered with [`ScenarioConfig::overlay`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "K")]
    pub caches: Option<usize>,
    #[serde(rename = "N")]
    pub library: Option<usize>,
    pub m_ratio: Option<MRatioSpec>,
    pub placement: Option<String>,
    pub delivery: Option<Vec<String>>,
    pub demand_mode: Option<DemandMode>,
    pub demands: Option<Vec<usize>>,
    pub pattern: Option<Vec<usize>>,
    #[serde(rename = "L")]
    pub distinct: Option<usize>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub chains: Option<usize>,
    pub burn_in: Option<usize>,
    pub samples: Option<usize>,
    pub graph: Option<String>,
    pub seed: Option<u64>,
    #[serde(rename = "F")]
    pub file_len: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: ScenarioConfig) -> Self {
        overlay_fields!(
            self,
            top,
            caches,
            library,
            m_ratio,
            placement,
            delivery,
            demand_mode,
            demands,
            pattern,
            distinct,
            r,
            theta,
            chains,
            burn_in,
            samples,
            graph,
            seed,
            file_len,
            out,
            threads
        );
        self
    }

    pub fn resolve(&self) -> CliResult<Scenario> {
        let caches = self
            .caches
            .ok_or_else(|| CliError::config("K", "missing"))?;
        if caches == 0 {
            return Err(CliError::config("K", "must be at least 1"));
        }
        let library = self.library.unwrap_or(DEFAULT_LIBRARY);
        if library < caches {
            return Err(CliError::config(
                "N",
                format!("library of {library} files is smaller than K = {caches}"),
            ));
        }
        let m_values = match &self.m_ratio {
            Some(spec) => spec.values()?,
            None => Vec::new(),
        };
        let placement = match &self.placement {
            Some(s) => s
                .parse::<Scheme>()
                .map_err(|e| CliError::config("placement", e.to_string()))?,
            None => Scheme::Centralized,
        };
        let delivery = match &self.delivery {
            Some(list) if list.is_empty() => {
                return Err(CliError::config("delivery", "no scheme selected"))
            }
            Some(list) => {
                let mut out = Vec::new();
                for s in list {
                    let d = s
                        .parse::<DeliveryScheme>()
                        .map_err(|e| CliError::config("delivery", e.to_string()))?;
                    if !out.contains(&d) {
                        out.push(d);
                    }
                }
                out.sort();
                out
            }
            None if caches > MAX_CACHES => {
                vec![DeliveryScheme::NonAdaptive, DeliveryScheme::Simplified]
            }
            None => DeliveryScheme::ALL.to_vec(),
        };
        if caches > MAX_CACHES && delivery.contains(&DeliveryScheme::Adaptive) {
            return Err(CliError::config(
                "K",
                format!("adaptive delivery supports at most {MAX_CACHES} caches"),
            ));
        }
        if let Some(0) = self.threads {
            return Err(CliError::config("threads", "must be at least 1"));
        }
        if let Some(0) = self.file_len {
            return Err(CliError::config("F", "must be at least 1"));
        }
        let gibbs = self.gibbs_spec(caches, library)?;
        Ok(Scenario {
            caches,
            library,
            m_values,
            placement,
            delivery,
            demand: self.demand_spec(caches, library)?,
            gibbs,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            file_len: self.file_len,
            out: self.out.clone(),
            threads: self.threads,
            samples_given: self.samples,
        })
    }

    fn inferred_mode(&self) -> Option<DemandMode> {
        if let Some(mode) = self.demand_mode {
            return Some(mode);
        }
        if self.demands.is_some() {
            Some(DemandMode::Explicit)
        } else if self.pattern.is_some() {
            Some(DemandMode::Pattern)
        } else if self.distinct.is_some() {
            Some(DemandMode::PatternAverage)
        } else if self.r.is_some() || self.theta.is_some() {
            Some(DemandMode::Gibbs)
        } else {
            None
        }
    }

    fn demand_spec(&self, caches: usize, library: usize) -> CliResult<Option<DemandSpec>> {
        let Some(mode) = self.inferred_mode() else {
            return Ok(None);
        };
        let unexpected = |field: &str, present: bool| {
            if present {
                Err(CliError::config(
                    field,
                    format!("not used by demand mode {mode:?}"),
                ))
            } else {
                Ok(())
            }
        };
        let spec = match mode {
            DemandMode::Explicit => {
                unexpected("pattern", self.pattern.is_some())?;
                unexpected("L", self.distinct.is_some())?;
                let req = self
                    .demands
                    .clone()
                    .ok_or_else(|| CliError::config("demands", "required by explicit mode"))?;
                if req.len() != caches {
                    return Err(CliError::config(
                        "demands",
                        format!("{} entries for K = {caches}", req.len()),
                    ));
                }
                let d = DemandVector::new(req, library)
                    .map_err(|e| CliError::config("demands", e.to_string()))?;
                DemandSpec::Explicit(d)
            }
            DemandMode::Pattern => {
                unexpected("demands", self.demands.is_some())?;
                unexpected("L", self.distinct.is_some())?;
                let counts = self
                    .pattern
                    .clone()
                    .ok_or_else(|| CliError::config("pattern", "required by pattern mode"))?;
                let p = RedundancyPattern::new(counts)
                    .map_err(|e| CliError::config("pattern", e.to_string()))?;
                if p.total() != caches {
                    return Err(CliError::config(
                        "pattern",
                        format!("counts sum to {}, K = {caches}", p.total()),
                    ));
                }
                DemandSpec::Pattern(p)
            }
            DemandMode::PatternAverage => {
                unexpected("demands", self.demands.is_some())?;
                unexpected("pattern", self.pattern.is_some())?;
                match self.distinct {
                    Some(l) if l == 0 || l > caches => {
                        return Err(CliError::config("L", format!("must lie in 1..={caches}")))
                    }
                    Some(l) => DemandSpec::PatternAverage(vec![l]),
                    None => DemandSpec::PatternAverage((1..=caches).collect()),
                }
            }
            DemandMode::Gibbs => {
                unexpected("demands", self.demands.is_some())?;
                unexpected("pattern", self.pattern.is_some())?;
                unexpected("L", self.distinct.is_some())?;
                DemandSpec::Gibbs
            }
        };
        Ok(Some(spec))
    }

    fn gibbs_spec(&self, caches: usize, library: usize) -> CliResult<GibbsSpec> {
        let r = self.r.unwrap_or(DEFAULT_R);
        if !(0.0..=1.0).contains(&r) {
            return Err(CliError::config("r", format!("{r} outside [0, 1]")));
        }
        let theta = self.theta.unwrap_or(0.0);
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(CliError::config("theta", format!("{theta} must be >= 0")));
        }
        let chains = self.chains.unwrap_or(DEFAULT_CHAINS);
        if chains == 0 {
            return Err(CliError::config("chains", "must be at least 1"));
        }
        let samples = self.samples.unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::config("samples", "must be at least 1"));
        }
        let adjacency = match self.graph.as_deref() {
            None | Some("complete") => Adjacency::complete(caches),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.to_string(),
                    source,
                })?;
                Adjacency::parse_edge_list(caches, &text)
                    .map_err(|e| CliError::config("graph", e.to_string()))?
            }
        };
        let popularity =
            zipf_pmf(library, theta).map_err(|e| CliError::config("theta", e.to_string()))?;
        let model = CorrelationModel::new(adjacency, r, popularity)
            .map_err(|e| CliError::config("r", e.to_string()))?;
        Ok(GibbsSpec {
            model,
            chains,
            burn_in: self.burn_in.unwrap_or(DEFAULT_BURN_IN),
            samples,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DemandSpec {
    Explicit(DemandVector),
    Pattern(RedundancyPattern),
    /// One entry per `L` to average over.
    PatternAverage(Vec<usize>),
    Gibbs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsSpec {
    pub model: CorrelationModel,
    pub chains: usize,
    pub burn_in: usize,
    /// Recorded sweeps per chain.
    pub samples: usize,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub caches: usize,
    pub library: usize,
    pub m_values: Vec<f64>,
    pub placement: Scheme,
    pub delivery: Vec<DeliveryScheme>,
    pub demand: Option<DemandSpec>,
    pub gibbs: GibbsSpec,
    pub seed: u64,
    pub file_len: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    /// `samples` exactly as configured, before defaults.
    pub samples_given: Option<usize>,
}

impl Scenario {
    /// The cache-size grid; commands that compute rates need at least one
    /// point.
    pub fn require_m_grid(&self) -> CliResult<&[f64]> {
        if self.m_values.is_empty() {
            return Err(CliError::config("m_ratio", "missing"));
        }
        Ok(&self.m_values)
    }

    pub fn require_demand(&self) -> CliResult<&DemandSpec> {
        self.demand.as_ref().ok_or_else(|| {
            CliError::config(
                "demand_mode",
                "no demand given; set demands, pattern, L or demand_mode",
            )
        })
    }
}
