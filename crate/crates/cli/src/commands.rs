use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;

use chaospi_core::chaos::{self, ChaosReport};
use chaospi_core::eaf::FrontEnsemble;
use chaospi_core::io::{
    self, CaoRow, DivergenceRow, FrontRow, CAO_HEADER, DIVERGENCE_HEADER, EAF_HEADER, FRONT_HEADER,
    INTERVAL_HEADER,
};
use chaospi_core::pipeline::{PipelineError, Prepared};
use chaospi_core::{ExperimentReport, ModelKind, RunOutcome, SummaryStats, TimeSeries};

use crate::{CliError, RunConfig};

fn load(cfg: &RunConfig) -> Result<TimeSeries, CliError> {
    Ok(io::load_series(cfg.input()?, cfg.column.as_deref())?)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Domain(Box::new(e)))?;
    bytes.push(b'\n');
    Ok(io::write_bytes(path, &bytes)?)
}

#[derive(Serialize)]
struct ChaosOutput<'a> {
    observations: usize,
    summary: SummaryStats,
    #[serde(flatten)]
    report: &'a ChaosReport,
}

fn write_chaos(dir: &Path, series: &TimeSeries, report: &ChaosReport) -> Result<(), CliError> {
    write_json(
        &dir.join("chaos.json"),
        &ChaosOutput {
            observations: series.len(),
            summary: series.summary(),
            report,
        },
    )?;
    let div: Vec<DivergenceRow> = report
        .divergence_curve
        .iter()
        .enumerate()
        .map(|(k, &divergence)| DivergenceRow { k, divergence })
        .collect();
    io::write_csv(&dir.join("divergence.csv"), &DIVERGENCE_HEADER, &div)?;
    let cao: Vec<CaoRow> = report
        .e1_curve
        .iter()
        .zip(&report.e2_curve)
        .enumerate()
        .map(|(i, (&e1, &e2))| CaoRow { d: i + 1, e1, e2 })
        .collect();
    io::write_csv(&dir.join("cao.csv"), &CAO_HEADER, &cao)?;
    Ok(())
}

pub fn analyze(cfg: &RunConfig) -> Result<(), CliError> {
    let series = load(cfg)?;
    let report =
        chaos::analyze(series.values(), &cfg.analyze_options()).map_err(PipelineError::from)?;
    ensure_dir(&cfg.out)?;
    write_chaos(&cfg.out, &series, &report)?;
    let lambda = report
        .lambda
        .map_or_else(|| "n/a".to_string(), |l| format!("{l:.6}"));
    println!(
        "tau={} m={} lambda={} chaotic={}",
        report.tau, report.m, lambda, report.chaotic
    );
    Ok(())
}

#[derive(Serialize)]
struct Scores {
    picp: f64,
    piaw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    smape: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ds: Option<f64>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    model: ModelKind,
    seed: u64,
    tau: usize,
    m: usize,
    lambda: Option<f64>,
    chaotic: bool,
    coeffs: &'a [f64],
    r1: f64,
    r2: f64,
    sigma: f64,
    train: Scores,
    test: Scores,
}

impl<'a> RunReport<'a> {
    fn new(r: &'a RunOutcome, chaotic: bool) -> Self {
        Self {
            model: r.model,
            seed: r.seed,
            tau: r.tau,
            m: r.m,
            lambda: r.lambda,
            chaotic,
            coeffs: &r.ar.coeffs,
            r1: r.interval.r1,
            r2: r.interval.r2,
            sigma: r.interval.sigma_train,
            train: Scores {
                picp: r.train.picp,
                piaw: r.train.piaw,
                smape: Some(r.train_smape),
                ds: Some(r.train_ds),
            },
            test: Scores {
                picp: r.test.picp,
                piaw: r.test.piaw,
                smape: None,
                ds: None,
            },
        }
    }
}

pub fn intervals(cfg: &RunConfig) -> Result<(), CliError> {
    let series = load(cfg)?;
    let prepared = Prepared::new(&series, &cfg.pipeline())?;
    let seed = cfg.seeds.seeds()[0];
    let outcome = prepared.run(cfg.model, seed)?;
    ensure_dir(&cfg.out)?;
    write_chaos(&cfg.out, &series, &prepared.chaos)?;
    io::write_csv(
        &cfg.out.join("intervals.csv"),
        &INTERVAL_HEADER,
        &outcome.test.rows(),
    )?;
    write_json(
        &cfg.out.join("report.json"),
        &RunReport::new(&outcome, prepared.chaos.chaotic),
    )?;
    println!(
        "{} seed={} test PICP={:.4} PIAW={:.4}",
        cfg.model.name(),
        seed,
        outcome.test.picp,
        outcome.test.piaw
    );
    Ok(())
}

#[derive(Serialize)]
struct Failure {
    seed: u64,
    error: String,
}

fn front_rows(points: &[[f64; 2]]) -> Vec<FrontRow> {
    points
        .iter()
        .map(|p| FrontRow { f1: p[0], f2: p[1] })
        .collect()
}

/// Removes `seed_*.csv` left over from earlier runs in `dir`.
fn clear_fronts(dir: &Path) -> Result<(), CliError> {
    for entry in fs::read_dir(dir).map_err(|e| CliError::write(dir, e))? {
        let path = entry.map_err(|e| CliError::write(dir, e))?.path();
        if seed_of(&path).is_some() {
            fs::remove_file(&path).map_err(|e| CliError::write(&path, e))?;
        }
    }
    Ok(())
}

pub fn experiment(cfg: &RunConfig) -> Result<(), CliError> {
    let series = load(cfg)?;
    let prepared = Prepared::new(&series, &cfg.pipeline())?;
    let seeds = cfg.seeds.seeds();
    let results = prepared.run_seeds(cfg.model, &seeds, cfg.parallel);

    let fronts_dir = cfg.out.join("fronts");
    ensure_dir(&fronts_dir)?;
    clear_fronts(&fronts_dir)?;
    write_chaos(&cfg.out, &series, &prepared.chaos)?;

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (seed, res) in seeds.iter().zip(results) {
        match res {
            Ok(r) => runs.push(r),
            Err(e) => {
                log::error!("seed {seed}: {e}");
                failures.push(Failure {
                    seed: *seed,
                    error: e.to_string(),
                });
            }
        }
    }

    if !runs.is_empty() {
        let report = ExperimentReport::from_runs(&runs)?;
        for f in &report.fronts {
            let path = fronts_dir.join(format!("seed_{}.csv", f.seed));
            io::write_csv(&path, &FRONT_HEADER, &front_rows(&f.points))?;
        }
        write_json(&cfg.out.join("report.json"), &report)?;
        let ensemble = FrontEnsemble::new(report.fronts.iter().map(|f| f.points.clone()).collect())
            .map_err(|e| CliError::Domain(Box::new(e)))?;
        write_eaf(&cfg.out, &ensemble)?;
        println!(
            "{} over {} seeds: PICP {:.4} ± {:.4}, PIAW {:.4} ± {:.4}",
            cfg.model.name(),
            runs.len(),
            report.picp_mean,
            report.picp_std,
            report.piaw_mean,
            report.piaw_std
        );
    }

    let manifest = cfg.out.join("failures.json");
    if failures.is_empty() {
        if manifest.exists() {
            fs::remove_file(&manifest).map_err(|e| CliError::write(&manifest, e))?;
        }
        return Ok(());
    }
    write_json(&manifest, &failures)?;
    Err(CliError::SeedFailures {
        failed: failures.len(),
        total: seeds.len(),
        manifest,
    })
}

fn write_eaf(dir: &Path, ensemble: &FrontEnsemble) -> Result<(), CliError> {
    for k in ensemble.standard_levels() {
        let surface = ensemble
            .attainment_surface(k)
            .map_err(|e| CliError::Domain(Box::new(e)))?;
        let path = dir.join(format!("eaf_{k}.csv"));
        io::write_csv(&path, &EAF_HEADER, &surface.rows())?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn seed_of(path: &Path) -> Option<u64> {
    let name = path.file_name()?.to_str()?;
    name.strip_prefix("seed_")?
        .strip_suffix(".csv")?
        .parse()
        .ok()
}

pub fn eaf(fronts: &Path, out: &Path) -> Result<(), CliError> {
    let entries = fs::read_dir(fronts).map_err(|e| CliError::read(fronts, e))?;
    let mut files: Vec<(u64, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::read(fronts, e))?.path();
        if let Some(seed) = seed_of(&path) {
            files.push((seed, path));
        }
    }
    if files.is_empty() {
        return Err(CliError::Config(format!(
            "no seed_<s>.csv files in {}",
            fronts.display()
        )));
    }
    files.sort();
    let runs = files
        .iter()
        .map(|(_, p)| {
            io::read_csv::<FrontRow>(p).map(|rows| rows.iter().map(|r| [r.f1, r.f2]).collect())
        })
        .collect::<Result<Vec<Vec<[f64; 2]>>, _>>()?;
    let ensemble = FrontEnsemble::new(runs).map_err(|e| CliError::Domain(Box::new(e)))?;
    ensure_dir(out)?;
    write_eaf(out, &ensemble)?;
    println!(
        "{} runs, levels {:?}",
        ensemble.len(),
        ensemble.standard_levels()
    );
    Ok(())
}
