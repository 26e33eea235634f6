//! Acceptance criteria 1-9. Runs as a plain binary (`harness = false`),
//! prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cachenet_cli::config::{MRatioSpec, ScenarioConfig};
use cachenet_cli::run::rate_rows;
use cachenet_cli::verify::{verify_demand, VerifyRecord};
use cachenet_core::bounds::cutset_bound;
use cachenet_core::delivery::{
    adaptive_plan, adaptive_rate_for_pattern, rate_nonadaptive, simplified_plan, DeliveryScheme,
};
use cachenet_core::demand::{empirical_stats, zipf_pmf, Adjacency, ChainRun, CorrelationModel};
use cachenet_core::placement::{
    centralized_profile, decentralized_profile, solve_placement_lp, PlacementProfile,
};
use cachenet_core::{DemandVector, RedundancyPattern, SystemConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Worst-case rate of the centralized scheme by memory sharing between the
/// integer points `t`, where the rate is `(K - t)/(t + 1)`.
fn memory_sharing_rate(k: usize, m: f64) -> f64 {
    let t = k as f64 * m;
    let lo = t.floor();
    let hi = t.ceil();
    let at = |t: f64| (k as f64 - t) / (t + 1.0);
    if hi == lo {
        at(t)
    } else {
        (hi - t) * at(lo) + (t - lo) * at(hi)
    }
}

fn criterion_1() -> Outcome {
    // m_ratio, x_0..x_5
    let table: [(f64, [f64; 6]); 6] = [
        (0.1, [0.5, 0.1, 0.0, 0.0, 0.0, 0.0]),
        (0.2, [0.0, 0.2, 0.0, 0.0, 0.0, 0.0]),
        (0.3, [0.0, 0.1, 0.05, 0.0, 0.0, 0.0]),
        (0.5, [0.0, 0.0, 0.05, 0.05, 0.0, 0.0]),
        (0.8, [0.0, 0.0, 0.0, 0.0, 0.2, 0.0]),
        (0.9, [0.0, 0.0, 0.0, 0.0, 0.1, 0.5]),
    ];
    let mut worst = 0.0f64;
    for (m, want) in table {
        let p = centralized_profile(5, m).expect("valid profile");
        for (got, want) in p.x.iter().zip(want) {
            worst = worst.max((got - want).abs());
        }
    }
    outcome(worst <= 1e-12, format!("max |x - table| = {worst:.1e}"))
}

fn criterion_2() -> Outcome {
    let cases: Vec<(usize, f64)> = (2..=10)
        .flat_map(|k| (1..=39).map(move |j| (k, 0.025 * j as f64)))
        .collect();
    let worst = cases
        .par_iter()
        .map(|&(k, m)| {
            let (_, obj) = solve_placement_lp(k, m).expect("placement LP solves");
            let closed = centralized_profile(k, m).unwrap().worst_case_rate();
            (obj - closed)
                .abs()
                .max((obj - memory_sharing_rate(k, m)).abs())
        })
        .reduce(|| 0.0, f64::max);
    outcome(
        worst <= 1e-7,
        format!("{} LPs, max |LP - closed form| = {worst:.1e}", cases.len()),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 2..=10 {
        for j in 1..=39 {
            let q = 0.025 * j as f64;
            let d = decentralized_profile(k, q).unwrap();
            let kf = k as f64;
            let eq6 = kf * (1.0 - q) * (1.0 - (1.0 - q).powi(k as i32)) / (kf * q);
            worst = worst.max((rate_nonadaptive(&d, k) - eq6).abs());
            count += 1;
            let t = kf * q;
            if (t - t.round()).abs() < 1e-9 {
                let c = centralized_profile(k, q).unwrap();
                let eq5 = kf * (1.0 - q) / (1.0 + kf * q);
                worst = worst.max((rate_nonadaptive(&c, k) - eq5).abs());
                count += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{count} points, max deviation {worst:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let ms = [0.025, 0.1, 0.15, 0.2];
    // percent per m_ratio, first row is the simplified scheme
    let table: [(&str, [f64; 4]); 5] = [
        ("simplified", [49.0, 52.0, 37.0, 13.0]),
        ("3-3-3", [49.0, 52.0, 37.0, 13.0]),
        ("5-2-2", [61.0, 61.0, 45.0, 17.0]),
        ("4-4-1", [66.0, 66.0, 51.0, 25.0]),
        ("7-1-1", [78.0, 76.0, 64.0, 43.0]),
    ];
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for (label, want) in table {
        let pattern = if label == "simplified" {
            "3-3-3"
        } else {
            label
        };
        let counts: Vec<usize> = pattern.split('-').map(|c| c.parse().unwrap()).collect();
        let scheme = if label == "simplified" {
            "simplified"
        } else {
            "adaptive"
        };
        let cfg = ScenarioConfig {
            caches: Some(9),
            library: Some(1000),
            m_ratio: Some(MRatioSpec::List(ms.to_vec())),
            placement: Some("centralized".into()),
            delivery: Some(vec!["nonadaptive".into(), scheme.into()]),
            pattern: Some(counts),
            ..Default::default()
        };
        let rows = rate_rows(&cfg.resolve().unwrap()).unwrap();
        let got: Vec<f64> = rows
            .iter()
            .filter(|r| r.scheme != DeliveryScheme::NonAdaptive)
            .map(|r| 100.0 * r.gap_reduction.unwrap())
            .collect();
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
            cells.push(format!("{g:.1}"));
        }
        // oracle: the bound and the non-adaptive rate by direct formula
        for (r, m) in rows.iter().zip(ms.iter().flat_map(|m| [*m, *m])) {
            let bound = (1..=3)
                .map(|s| s as f64 - s as f64 * m * 1000.0 / (1000 / s) as f64)
                .fold(0.0, f64::max);
            assert!((r.bound - bound).abs() < 1e-12);
        }
    }
    outcome(
        worst <= 3.0,
        format!("max deviation {worst:.2}pp; gaps % [{}]", cells.join(" ")),
    )
}

fn random_profile(rng: &mut ChaCha8Rng, k: usize, m: f64) -> PlacementProfile {
    match rng.gen_range(0..3) {
        0 => centralized_profile(k, m).unwrap(),
        1 => decentralized_profile(k, m).unwrap(),
        _ => solve_placement_lp(k, m).unwrap().0,
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let configs: Vec<(PlacementProfile, DemandVector, usize)> = (0..200)
        .map(|_| {
            let k = rng.gen_range(2..=9);
            let m: f64 = rng.gen_range(0.0..1.0);
            let library = rng.gen_range(k..=3 * k);
            let p = random_profile(&mut rng, k, m);
            let req = (0..k).map(|_| rng.gen_range(1..=library)).collect();
            (p, DemandVector::new(req, library).unwrap(), library)
        })
        .collect();
    let violations: Vec<String> = configs
        .par_iter()
        .filter_map(|(p, d, library)| {
            let k = p.caches;
            let l = d.distinct_count();
            let bound = cutset_bound(k, l, *library, p.m_ratio * *library as f64).value;
            let ad = adaptive_plan(p, d).unwrap().1;
            let simp = simplified_plan(p, l).rate;
            let na = rate_nonadaptive(p, l);
            let ok = bound <= ad + 1e-7 && ad <= simp + 1e-7 && simp <= na + 1e-7;
            (!ok).then(|| {
                format!(
                    "K={k} m={} {} {d}: {bound} {ad} {simp} {na}",
                    p.m_ratio, p.scheme
                )
            })
        })
        .collect();

    // symmetric patterns: both adaptive variants agree
    let mut sym = Vec::new();
    for k in 2..=9 {
        for l in (1..=k).filter(|l| k % l == 0) {
            for m in [0.05, 0.1, 0.2, 0.35, 0.5, 0.8] {
                sym.push((k, l, m));
            }
        }
    }
    let sym_gaps: Vec<(String, f64)> = sym
        .par_iter()
        .flat_map(|&(k, l, m)| {
            let pattern = RedundancyPattern::new(vec![k / l; l]).unwrap();
            [
                centralized_profile(k, m).unwrap(),
                decentralized_profile(k, m).unwrap(),
            ]
            .into_iter()
            .map(|p| {
                let ad = adaptive_rate_for_pattern(&p, &pattern).unwrap();
                let simp = simplified_plan(&p, l).rate;
                (format!("K={k} {pattern} m={m} {}", p.scheme), simp - ad)
            })
            .collect::<Vec<_>>()
        })
        .collect();
    let asym: Vec<&(String, f64)> = sym_gaps.iter().filter(|(_, g)| g.abs() > 1e-7).collect();
    let worst = asym.iter().map(|(_, g)| g.abs()).fold(0.0, f64::max);
    let mut detail = format!(
        "{} dominance violations in 200; symmetric patterns: {}/{} differ (max {worst:.3e})",
        violations.len(),
        asym.len(),
        sym_gaps.len()
    );
    if let Some(v) = violations.first() {
        detail.push_str(&format!("; first violation {v}"));
    }
    if let Some((case, gap)) = asym.first() {
        detail.push_str(&format!(
            "; first asymmetry {case}: simplified - adaptive = {gap:.4}"
        ));
    }
    outcome(violations.is_empty() && asym.is_empty(), detail)
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for k in 1..=6 {
        for m in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for p in [
                centralized_profile(k, m).unwrap(),
                decentralized_profile(k, m).unwrap(),
            ] {
                for l in 1..=k {
                    let mut best = f64::INFINITY;
                    // bit s-1 set: size class s moves to uncoded delivery
                    for choice in 0u32..(1 << k) {
                        let mut y = p.x.clone();
                        for s in 1..=k {
                            if choice >> (s - 1) & 1 == 1 {
                                y[0] += binom(k, s) * y[s];
                                y[s] = 0.0;
                            }
                        }
                        let obj =
                            l as f64 * y[0] + (1..k).map(|s| binom(k, s + 1) * y[s]).sum::<f64>();
                        best = best.min(obj);
                    }
                    worst = worst.max((simplified_plan(&p, l).rate - best).abs());
                    cases += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{cases} cases, max |closed form - exhaustive| = {worst:.1e}"),
    )
}

fn criterion_7() -> Outcome {
    const F: usize = 10_000;
    const DEMANDS: usize = 100;
    let mut jobs = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 1..=5 {
        for decentralized in [false, true] {
            for m in [0.15, 0.4, 0.7] {
                for i in 0..DEMANDS {
                    // a small library makes repeated requests common
                    let library = k + 1;
                    let req: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=library)).collect();
                    jobs.push((k, decentralized, m, library, req, i as u64));
                }
            }
        }
    }
    let records: Vec<(bool, VerifyRecord)> = jobs
        .par_iter()
        .flat_map(|(k, dec, m, library, req, seed)| {
            let config = SystemConfig::new(*k, *library, *m)
                .unwrap()
                .with_file_len(F)
                .unwrap();
            let p = if *dec {
                decentralized_profile(*k, *m).unwrap()
            } else {
                centralized_profile(*k, *m).unwrap()
            };
            let d = DemandVector::new(req.clone(), *library).unwrap();
            verify_demand(&config, &p, &DeliveryScheme::ALL, &d, *seed)
                .unwrap()
                .into_iter()
                .map(|r| (*dec, r))
                .collect::<Vec<_>>()
        })
        .collect();
    let undecoded = records.iter().filter(|(_, r)| !r.decoded()).count();
    let off_rate = records.iter().filter(|(_, r)| !r.rate_ok()).count();
    let worst_ratio = records
        .iter()
        .map(|(_, r)| (r.schedule_rate - r.analytic_rate).abs() / r.slack)
        .fold(0.0, f64::max);
    let dec_nominal = records
        .iter()
        .filter(|(dec, _)| *dec)
        .map(|(_, r)| (r.schedule_rate - r.plan_rate).abs())
        .fold(0.0, f64::max);
    outcome(
        undecoded == 0 && off_rate == 0,
        format!(
            "{} schedules, {undecoded} decode failures, {off_rate} rate mismatches, \
             max |schedule - analytic| / slack = {worst_ratio:.3}; decentralized max \
             |schedule - nominal plan rate| = {dec_nominal:.4}",
            records.len()
        ),
    )
}

const PAPER_SEED: u64 = 1;

struct GibbsSetting {
    r: f64,
    theta: f64,
    l_avg: f64,
    rho_avg: f64,
}

const SETTINGS: [GibbsSetting; 3] = [
    GibbsSetting {
        r: 0.7,
        theta: 0.0,
        l_avg: 4.80,
        rho_avg: 0.16,
    },
    GibbsSetting {
        r: 0.9,
        theta: 0.0,
        l_avg: 3.41,
        rho_avg: 0.32,
    },
    GibbsSetting {
        r: 0.9,
        theta: 0.75,
        l_avg: 3.18,
        rho_avg: 0.31,
    },
];

fn model(r: f64, theta: f64) -> CorrelationModel {
    CorrelationModel::new(Adjacency::complete(8), r, zipf_pmf(1000, theta).unwrap()).unwrap()
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in &SETTINGS {
        let run = ChainRun::sample(&model(s.r, s.theta), 5, 1000, 150, PAPER_SEED).unwrap();
        let stats = empirical_stats(&run.pooled()).unwrap();
        let epsr = run.epsr().unwrap();
        let ok_l = (stats.l_avg - s.l_avg).abs() <= 0.3;
        let ok_rho = (stats.rho_avg - s.rho_avg).abs() <= 0.05;
        let ok_epsr = (epsr - 1.0).abs() <= 0.01;
        pass &= ok_l && ok_rho && ok_epsr;
        parts.push(format!(
            "r={} theta={}: L_avg {:.3} (target {}{}), rho_avg {:.3} (target {}{}), rho_max {:.3}, epsr {:.4}{}",
            s.r,
            s.theta,
            stats.l_avg,
            s.l_avg,
            if ok_l { "" } else { " OUT" },
            stats.rho_avg,
            s.rho_avg,
            if ok_rho { "" } else { " OUT" },
            stats.rho_max,
            epsr,
            if ok_epsr { "" } else { " OUT" },
        ));
    }
    outcome(pass, parts.join("; "))
}

fn mean_ci(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // two-sided 95% Student t quantile for 4 degrees of freedom
    (mean, 2.776 * (var / n).sqrt())
}

fn criterion_9() -> Outcome {
    // (m_ratio, setting index, adaptive %, simplified %)
    let table = [
        (0.075, 0, 14.0, 5.0),
        (0.075, 1, 41.0, 28.0),
        (0.075, 2, 47.0, 36.0),
        (0.125, 0, 16.0, 5.0),
        (0.125, 1, 41.0, 28.0),
        (0.125, 2, 48.0, 36.0),
    ];
    let seeds: Vec<u64> = (1..=5).collect();
    // gap reductions in percent: [setting][seed] -> (m_ratio, scheme) -> value
    let runs: Vec<Vec<Vec<(f64, DeliveryScheme, f64)>>> = SETTINGS
        .iter()
        .map(|s| {
            seeds
                .iter()
                .map(|&seed| {
                    let cfg = ScenarioConfig {
                        caches: Some(8),
                        library: Some(1000),
                        m_ratio: Some(MRatioSpec::List(vec![0.075, 0.125])),
                        placement: Some("centralized".into()),
                        demand_mode: Some(cachenet_cli::config::DemandMode::Gibbs),
                        r: Some(s.r),
                        theta: Some(s.theta),
                        chains: Some(5),
                        burn_in: Some(150),
                        samples: Some(1000),
                        seed: Some(seed),
                        ..Default::default()
                    };
                    rate_rows(&cfg.resolve().unwrap())
                        .unwrap()
                        .into_iter()
                        .filter(|r| r.scheme != DeliveryScheme::NonAdaptive)
                        .map(|r| (r.m_ratio, r.scheme, 100.0 * r.gap_reduction.unwrap()))
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, si, want_ad, want_simp) in table {
        for (scheme, want) in [
            (DeliveryScheme::Adaptive, want_ad),
            (DeliveryScheme::Simplified, want_simp),
        ] {
            let values: Vec<f64> = runs[si]
                .iter()
                .map(|rows| {
                    rows.iter()
                        .find(|(rm, rs, _)| *rm == m && *rs == scheme)
                        .map(|(_, _, g)| *g)
                        .unwrap()
                })
                .collect();
            let (mean, half) = mean_ci(&values);
            let ok = (mean - want).abs() <= 5.0;
            pass &= ok;
            parts.push(format!(
                "m={m} r={} theta={} {scheme}: {mean:.1}% +/- {half:.1} (target {want}%{})",
                SETTINGS[si].r,
                SETTINGS[si].theta,
                if ok { "" } else { " OUT" }
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 9] = [
        (
            "table I placement",
            criterion_1,
            Some(Duration::from_secs(1)),
        ),
        (
            "placement LP equals closed form",
            criterion_2,
            Some(Duration::from_secs(60)),
        ),
        ("peak rate formulas", criterion_3, None),
        (
            "table II gap reductions",
            criterion_4,
            Some(Duration::from_secs(300)),
        ),
        ("rate dominance", criterion_5, None),
        ("simplified rule optimality", criterion_6, None),
        (
            "bit-level decodability",
            criterion_7,
            Some(Duration::from_secs(120)),
        ),
        (
            "table III demand statistics",
            criterion_8,
            Some(Duration::from_secs(300)),
        ),
        ("table IV average gap reductions", criterion_9, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > *limit {
                out.pass = false;
                out.detail.push_str(&format!("; over time limit {limit:?}"));
            }
        }
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} ({:.2}s) {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
