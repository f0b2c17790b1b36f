//! Scenario runner: JSON config in, CSV tables, a JSON manifest and an
//! optional SVG plot out.
//!
//! Sweep points run on a rayon pool; results are collected in sweep order so
//! output files do not depend on the number of workers.

mod config;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    load_config, load_config_with_overrides, minimal_config, parse_config, parse_override, ConfigError, GridConfig,
    ModeKind, PacketConfig, RunConfig, Scenario,
};
pub use output::{fmt_float, inversion_svg, sha256_hex, AtomicWriter, Table};

use crate::claimed::{resonant_emission_probability, Region};
use crate::coupled::{flux_probabilities, init_wavepacket, propagate, stationary_scatter_with_mode, PropagationOptions};
use crate::error::MazerError;
use crate::model::{Channel, ModelParams};
use crate::observables::{aggregate_inversion, ObservableSeries};
use crate::verifier::{claimed_residual_with, residual_sweep, separability_audit, EnergyConvention};

pub const UNIT_SYSTEM: &str = "hbar = 1, 2M = 1; energies in units of lambda, lengths in 1/gamma with gamma^2 = lambda; \
interaction picture (the sector energy omega*(n + 1/2) is dropped)";

/// Environment variable read when no explicit job count is given.
pub const JOBS_ENV: &str = "MAZERLAB_JOBS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(MazerError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl RunError {
    /// 2 for configuration problems, 3 for everything that fails after the
    /// config was accepted.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<MazerError> for RunError {
    fn from(e: MazerError) -> Self {
        match e {
            MazerError::InvalidParameter { .. }
            | MazerError::InvalidSpec(_)
            | MazerError::InvalidInput(_)
            | MazerError::OutOfValidity(_) => RunError::Config(ConfigError::new(e.to_string())),
            other => RunError::Numerical(other),
        }
    }
}

/// `--jobs` if given, else `MAZERLAB_JOBS`, else the processor count.
pub fn resolve_jobs(cli: Option<usize>) -> usize {
    cli.filter(|&j| j > 0)
        .or_else(|| {
            std::env::var(JOBS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .filter(|&j: &usize| j > 0)
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub rows: Option<usize>,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub modules: Vec<(&'static str, &'static str)>,
    pub status: &'static str,
    pub error: Option<String>,
    pub scenario: Scenario,
    pub config_sha256: String,
    pub config: RunConfig,
    pub unit_system: &'static str,
    pub jobs: usize,
    pub wall_time_seconds: f64,
    pub files: Vec<FileRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub warnings: Vec<String>,
}

#[derive(Debug, Default)]
struct Products {
    tables: Vec<Table>,
    documents: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
}

const MANIFEST: &str = "manifest.json";

fn io_err(path: PathBuf) -> impl FnOnce(std::io::Error) -> RunError {
    move |source| RunError::Io { path, source }
}

/// Run one scenario on a pool of `jobs` workers and write its artifacts.
///
/// On failure every file this run wrote is removed again and a manifest with
/// `status: "failed"` is left behind.
pub fn run(config: &RunConfig, jobs: usize) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let mut writer = AtomicWriter::new(&config.output_dir)
        .map_err(|e| ConfigError::new(format!("output_dir {} is not writable: {e}", config.output_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;

    let computed = pool.install(|| compute(config));
    let mut manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        modules: ["model", "claimed", "coupled", "verifier", "observables", "runner"]
            .into_iter()
            .map(|m| (m, env!("CARGO_PKG_VERSION")))
            .collect(),
        status: "ok",
        error: None,
        scenario: config.scenario,
        config_sha256: sha256_hex(config.canonical_json().as_bytes()),
        config: config.clone(),
        unit_system: UNIT_SYSTEM,
        jobs,
        wall_time_seconds: 0.0,
        files: Vec::new(),
        warnings: Vec::new(),
    };
    let result = computed.and_then(|products| {
        manifest.warnings = products.warnings.clone();
        write_products(&mut writer, products, &mut manifest.files)
    });
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    if let Err(e) = &result {
        writer.rollback();
        manifest.status = "failed";
        manifest.error = Some(e.to_string());
        manifest.files.clear();
    }
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    let manifest_path = writer
        .write(MANIFEST, &bytes)
        .map_err(io_err(config.output_dir.join(MANIFEST)))?;
    result?;
    let files = writer
        .written()
        .iter()
        .filter(|p| **p != manifest_path)
        .cloned()
        .collect();
    Ok(RunOutcome {
        output_dir: config.output_dir.clone(),
        files,
        manifest: manifest_path,
        warnings: manifest.warnings,
    })
}

fn write_products(
    writer: &mut AtomicWriter,
    products: Products,
    records: &mut Vec<FileRecord>,
) -> Result<(), RunError> {
    for t in &products.tables {
        if t.rows.len() != t.expected_rows {
            return Err(RunError::Numerical(MazerError::InvalidInput(format!(
                "{} has {} rows, sweep declares {}",
                t.name,
                t.rows.len(),
                t.expected_rows
            ))));
        }
        let bytes = t.to_csv().map_err(|e| RunError::Io {
            path: writer.dir().join(&t.name),
            source: std::io::Error::other(e),
        })?;
        writer.write(&t.name, &bytes).map_err(io_err(writer.dir().join(&t.name)))?;
        records.push(FileRecord {
            name: t.name.clone(),
            rows: Some(t.rows.len()),
            sha256: sha256_hex(&bytes),
        });
    }
    for (name, bytes) in &products.documents {
        writer.write(name, bytes).map_err(io_err(writer.dir().join(name)))?;
        records.push(FileRecord {
            name: name.clone(),
            rows: None,
            sha256: sha256_hex(bytes),
        });
    }
    Ok(())
}

fn compute(config: &RunConfig) -> Result<Products, RunError> {
    config.validate()?;
    let params = config.params()?;
    match config.scenario {
        Scenario::Residual => residual(config, &params),
        Scenario::ResidualSweep => sweep(config, &params),
        Scenario::Stationary => stationary(config, &params),
        Scenario::Propagate => propagate_sectors(config, &params),
        Scenario::Audit => audit(config, &params),
        Scenario::ResonantProbabilities => resonant(config, &params),
    }
}

fn sector_numbers(config: &RunConfig) -> Result<Vec<u32>, RunError> {
    Ok(config.distribution()?.sectors().iter().map(|s| s.n).collect())
}

fn f(x: f64) -> String {
    fmt_float(x)
}

fn residual(config: &RunConfig, params: &ModelParams) -> Result<Products, RunError> {
    let sectors = sector_numbers(config)?;
    let ks = config.ks();
    let points: Vec<(u32, f64)> = sectors.iter().flat_map(|&n| ks.iter().map(move |&k| (n, k))).collect();
    let conventions = [EnergyConvention::Incident, EnergyConvention::Kinetic];
    let reports = points
        .par_iter()
        .map(|&(n, k)| {
            conventions
                .iter()
                .map(|&c| claimed_residual_with(k, n, params, c))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(
        "residual.csv",
        vec!["n", "k", "energy_convention", "energy", "region", "channel", "residual_norm"],
        points.len() * conventions.len() * 6,
    );
    let mut json = Vec::new();
    for pair in &reports {
        for r in pair {
            let conv = match r.convention {
                EnergyConvention::Incident => "incident",
                EnergyConvention::Kinetic => "kinetic",
            };
            for e in &r.entries {
                table.push(vec![
                    r.n.to_string(),
                    f(r.k),
                    conv.into(),
                    f(r.energy),
                    e.region.label().into(),
                    e.channel.label().into(),
                    f(e.norm),
                ]);
            }
        }
        json.push(&pair[0]);
    }
    Ok(Products {
        tables: vec![table],
        documents: vec![(
            "residual.json".into(),
            serde_json::to_vec_pretty(&json).expect("report serializes"),
        )],
        warnings: Vec::new(),
    })
}

fn sweep(config: &RunConfig, params: &ModelParams) -> Result<Products, RunError> {
    let deltas = config.delta_list();
    let mut tables = Vec::new();
    let mut warnings = Vec::new();
    let k = config.ks()[0];
    if config.ks().len() > 1 {
        warnings.push(format!("residual-sweep uses only the first k ({k})"));
    }
    for n in sector_numbers(config)? {
        let chunks: Vec<_> = deltas
            .par_iter()
            .map(|&d| residual_sweep(k, n, &[d], params))
            .collect::<Result<Vec<_>, _>>()?;
        let mut table = Table::new(
            format!("residual_sweep_n{n}.csv"),
            vec!["delta", "region", "channel", "residual_norm"],
            deltas.len() * 6,
        );
        for point in chunks.into_iter().flatten() {
            match &point.report {
                Some(r) => {
                    for e in &r.entries {
                        table.push(vec![
                            f(point.delta),
                            e.region.label().into(),
                            e.channel.label().into(),
                            f(e.norm),
                        ]);
                    }
                }
                None => {
                    warnings.push(format!(
                        "n = {n}, delta = {}: published wavenumber at threshold, norms reported as NaN",
                        point.delta
                    ));
                    for region in Region::ALL {
                        for ch in Channel::BOTH {
                            table.push(vec![f(point.delta), region.label().into(), ch.label().into(), f(f64::NAN)]);
                        }
                    }
                }
            }
        }
        tables.push(table);
    }
    Ok(Products {
        tables,
        documents: Vec::new(),
        warnings,
    })
}

fn stationary(config: &RunConfig, params: &ModelParams) -> Result<Products, RunError> {
    let mode = config.mode_function()?;
    let sectors = sector_numbers(config)?;
    let deltas = config.delta_list();
    let ks = config.ks();
    let mut points = Vec::new();
    for &n in &sectors {
        for &d in &deltas {
            for &k in &ks {
                points.push((n, d, k));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(n, d, k)| {
            let p = params.with_delta(d)?;
            let sol = stationary_scatter_with_mode(k, n, &p, &mode)?;
            Ok((sol.condition, flux_probabilities(&sol)))
        })
        .collect::<Result<Vec<_>, MazerError>>()?;
    let mut table = Table::new(
        "stationary.csv",
        vec!["n", "delta", "k", "r_e", "r_g", "t_e", "t_g", "emission", "total", "condition"],
        points.len(),
    );
    for (&(n, d, k), (cond, p)) in points.iter().zip(&rows) {
        table.push(vec![
            n.to_string(),
            f(d),
            f(k),
            f(p.r_e),
            f(p.r_g),
            f(p.t_e),
            f(p.t_g),
            f(p.emission()),
            f(p.total()),
            f(*cond),
        ]);
    }
    Ok(Products {
        tables: vec![table],
        ..Default::default()
    })
}

fn propagate_sectors(config: &RunConfig, params: &ModelParams) -> Result<Products, RunError> {
    let dist = config.distribution()?;
    let mode = config.mode_function()?;
    let grid = config.grid(params)?;
    let dt = config.time_step(&grid);
    let steps = config.steps.unwrap_or(0);
    let options = PropagationOptions {
        record_every: config.record_every.unwrap_or((steps / 1000).max(1)),
        absorbing: config.absorbing,
        ..PropagationOptions::new(dt, steps)
    };
    let specs = dist
        .sectors()
        .iter()
        .map(|s| config.packet_spec(s.n))
        .collect::<Result<Vec<_>, _>>()?;
    let runs = specs
        .par_iter()
        .map(|spec| {
            let field = init_wavepacket(spec, &grid, params)?.to_basis(config.basis, params);
            propagate(field, params, &mode, &options)
        })
        .collect::<Result<Vec<_>, MazerError>>()?;
    let records: Vec<&[_]> = runs.iter().map(|r| r.records.as_slice()).collect();
    let weights: Vec<f64> = dist.sectors().iter().map(|s| s.weight).collect();
    let series = aggregate_inversion(&records, &weights)?;
    let mut warnings: Vec<String> = runs.iter().flat_map(|r| r.warnings.iter().cloned()).collect();
    warnings.dedup();
    let mut documents = Vec::new();
    if config.svg {
        documents.push(("inversion.svg".to_string(), inversion_svg(&series).into_bytes()));
    }
    Ok(Products {
        tables: vec![trajectory_table(&series)],
        documents,
        warnings,
    })
}

fn trajectory_table(series: &ObservableSeries) -> Table {
    let mut table = Table::new("trajectory.csv", vec!["t", "norm", "P_e", "P_g", "inversion"], series.len());
    for j in 0..series.len() {
        table.push(vec![
            f(series.time[j]),
            f(series.norm[j]),
            f(series.p_e[j]),
            f(series.p_g[j]),
            f(series.inversion[j]),
        ]);
    }
    table
}

/// 101 points over [−5λ, 5λ] unless `deltas` is set.
fn audit_deltas(config: &RunConfig) -> Vec<f64> {
    config.deltas.clone().unwrap_or_else(|| {
        (0..=100)
            .map(|i| config.lambda * (-5.0 + 0.1 * f64::from(i)))
            .collect()
    })
}

fn audit(config: &RunConfig, params: &ModelParams) -> Result<Products, RunError> {
    let deltas = audit_deltas(config);
    let mut tables = Vec::new();
    for n in sector_numbers(config)? {
        let a = separability_audit(n, params, &deltas)?;
        let mut table = Table::new(
            format!("audit_n{n}.csv"),
            vec!["delta", "dressed_inside", "dressed_outside", "bare_inside", "bare_outside"],
            deltas.len(),
        );
        for r in &a.rows {
            table.push(vec![
                f(r.delta),
                f(r.dressed_inside),
                f(r.dressed_outside),
                f(r.bare_inside),
                f(r.bare_outside),
            ]);
        }
        tables.push(table);
    }
    Ok(Products {
        tables,
        ..Default::default()
    })
}

fn resonant(config: &RunConfig, params: &ModelParams) -> Result<Products, RunError> {
    let sectors = sector_numbers(config)?;
    let ks = config.ks();
    let points: Vec<(u32, f64)> = sectors.iter().flat_map(|&n| ks.iter().map(move |&k| (n, k))).collect();
    let probs = points
        .par_iter()
        .map(|&(n, k)| resonant_emission_probability(k, n, params))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(
        "resonant_probabilities.csv",
        vec!["n", "k", "r_e", "r_g", "t_e", "t_g", "emission"],
        points.len(),
    );
    for (&(n, k), p) in points.iter().zip(&probs) {
        table.push(vec![
            n.to_string(),
            f(k),
            f(p.r_e),
            f(p.r_g),
            f(p.t_e),
            f(p.t_g),
            f(p.emission()),
        ]);
    }
    Ok(Products {
        tables: vec![table],
        ..Default::default()
    })
}
