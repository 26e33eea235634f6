use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cachenet_cli::config::{parse_m_grid, MRatioSpec};
use cachenet_cli::run::{bound_rows, csv, placement_rows, rate_rows, simulate, BoundRow, RateRow};
use cachenet_cli::verify::{verify, VerifyRecord};
use cachenet_cli::{CliError, CliResult, Scenario, ScenarioConfig};
use cachenet_core::demand::{samples_csv_header, samples_csv_row, EmpiricalStats};
use cachenet_core::placement::PlacementProfile;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cachenet",
    version,
    about = "Coded caching delivery-rate simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Placement fractions x_0..x_K for each cache size
    Placement(Flags),
    /// Delivery rates of one demand (or demand group)
    Rate(Flags),
    /// Cutset lower bound
    Bound(Flags),
    /// Rates over an m-ratio grid
    Sweep(Flags),
    /// Gibbs demand samples and their statistics; --out names a directory
    Simulate(Flags),
    /// Bit-level encode/decode round trips
    Verify(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// JSON scenario file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "K")]
    caches: Option<usize>,
    #[arg(long = "N")]
    library: Option<usize>,
    /// Single value or start:step:end
    #[arg(long = "m-ratio")]
    m_ratio: Option<String>,
    /// centralized, decentralized or lp
    #[arg(long)]
    placement: Option<String>,
    /// Comma-separated subset of nonadaptive,simplified,adaptive
    #[arg(long, value_delimiter = ',')]
    delivery: Option<Vec<String>>,
    /// explicit, pattern, pattern-average or gibbs
    #[arg(long = "demand-mode")]
    demand_mode: Option<String>,
    /// Comma-separated file indices, one per cache
    #[arg(long, value_delimiter = ',')]
    demands: Option<Vec<usize>>,
    /// Comma-separated request counts
    #[arg(long, value_delimiter = ',')]
    pattern: Option<Vec<usize>>,
    /// Number of distinct requests for pattern-average
    #[arg(long = "L")]
    distinct: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long = "burn-in")]
    burn_in: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "F")]
    file_len: Option<usize>,
    /// `complete` or a path to an edge list
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    fn scenario(&self) -> CliResult<Scenario> {
        let base = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        let m_ratio = match &self.m_ratio {
            Some(s) => Some(MRatioSpec::List(parse_m_grid(s)?)),
            None => None,
        };
        let top = ScenarioConfig {
            caches: self.caches,
            library: self.library,
            m_ratio,
            placement: self.placement.clone(),
            delivery: self.delivery.clone(),
            demand_mode: self.demand_mode.as_deref().map(str::parse).transpose()?,
            demands: self.demands.clone(),
            pattern: self.pattern.clone(),
            distinct: self.distinct,
            r: self.r,
            theta: self.theta,
            chains: self.chains,
            burn_in: self.burn_in,
            samples: self.samples,
            graph: self.graph.clone(),
            seed: self.seed,
            file_len: self.file_len,
            out: self.out.clone(),
            threads: self.threads,
        };
        base.overlay(top).resolve()
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(s: &Scenario, text: &str) -> CliResult<()> {
    match &s.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Placement(flags) => {
            let s = flags.scenario()?;
            let rows = placement_rows(&s)?;
            emit(
                &s,
                &csv(&PlacementProfile::csv_header(s.caches), &rows, |p| {
                    p.csv_row()
                }),
            )
        }
        Command::Rate(flags) | Command::Sweep(flags) => {
            let s = flags.scenario()?;
            let rows = rate_rows(&s)?;
            emit(&s, &csv(RateRow::CSV_HEADER, &rows, RateRow::csv_row))
        }
        Command::Bound(flags) => {
            let s = flags.scenario()?;
            let rows = bound_rows(&s)?;
            emit(&s, &csv(BoundRow::CSV_HEADER, &rows, BoundRow::csv_row))
        }
        Command::Simulate(flags) => {
            let s = flags.scenario()?;
            let sim = simulate(&s)?;
            let g = &s.gibbs;
            let stats = format!(
                "{}\n{}\n",
                EmpiricalStats::CSV_HEADER,
                sim.stats.csv_row(g.model.r, g.model.popularity.theta())
            );
            match sim.epsr {
                Some(v) => eprintln!("epsr {v:.5} over {} chains", g.chains),
                None => eprintln!("epsr undefined"),
            }
            match &s.out {
                Some(dir) => {
                    let pooled = sim.run.pooled();
                    let indexed: Vec<(usize, &_)> = pooled.iter().enumerate().collect();
                    let samples = csv(&samples_csv_header(s.caches), &indexed, |(i, d)| {
                        samples_csv_row(*i, d)
                    });
                    write_file(&dir.join("samples.csv"), &samples)?;
                    write_file(&dir.join("stats.csv"), &stats)
                }
                None => {
                    print!("{stats}");
                    Ok(())
                }
            }
        }
        Command::Verify(flags) => {
            let s = flags.scenario()?;
            let records = verify(&s)?;
            emit(
                &s,
                &csv(VerifyRecord::CSV_HEADER, &records, VerifyRecord::csv_row),
            )?;
            let failed: Vec<&VerifyRecord> = records.iter().filter(|r| !r.passed()).collect();
            for r in &failed {
                if r.decoded() {
                    eprintln!(
                        "rate mismatch: m={} {} demand {}: schedule {} vs analytic {}",
                        r.m_ratio, r.scheme, r.demand, r.schedule_rate, r.analytic_rate
                    );
                } else {
                    eprintln!(
                        "decode failure: m={} {} demand {} at caches {:?}",
                        r.m_ratio, r.scheme, r.demand, r.failed_caches
                    );
                }
            }
            if failed.is_empty() {
                eprintln!("verified {} schedules", records.len());
                Ok(())
            } else {
                Err(CliError::Verification(format!(
                    "{} of {} schedules failed",
                    failed.len(),
                    records.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
