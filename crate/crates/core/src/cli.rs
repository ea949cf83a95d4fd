//! Command-line front end: `covariance`, `simulate`, `converge`, `bench`.
//!
//! Every subcommand reads its section of an optional TOML file, applies
//! `--set key=value` and the common flags, validates everything before any
//! computation starts, and writes CSV output plus a
//! `<subcommand>.manifest.toml` echoing the resolved configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{
    self, default_initial, from_table, load_section, CovarianceOutput, CovarianceSection, SimulateSection,
    StudySection,
};
use crate::covariance::{assemble_covariance, factorize, CovarianceMatrix};
use crate::error::{Error, Result};
use crate::harness::{
    bench_config, fit_slope_column, run_study, ErrorColumn, ErrorNorm, ErrorTable, ReferencePolicy, SlopeFit,
};
use crate::integrators::{run as run_scheme, SchemeKind, Trajectory};
use crate::noise::{sample_path, NoisePlan};
use crate::spectral::SpectralPlan;

#[derive(Debug, Parser)]
#[command(name = "stochheat", version, about = "Stochastic heat equation solver with Riesz-correlated noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Assemble and factorize the noise covariance matrix.
    Covariance,
    /// Run one scheme on one noise sample and write snapshots.
    Simulate,
    /// Monte Carlo strong-error study against a fine reference.
    Converge,
    /// Error versus wall-clock cost of each scheme.
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Covariance => "covariance",
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::Bench => "bench",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with one section per subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Overrides the section's `seed`.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Size of the worker thread pool.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    /// Overrides one config key, e.g. `--set n=64`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_key_value)]
    pub set: Vec<(String, String)>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected KEY=VALUE, got '{s}'")),
    }
}

/// Files written by a subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

/// Parses arguments and runs the selected subcommand.
pub fn run(cli: &Cli) -> Result<Outputs> {
    let name = cli.command.name();
    let text = match &cli.common.config {
        Some(p) => Some(
            fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut overrides = cli.common.set.clone();
    if let Some(seed) = cli.common.seed {
        if cli.command != Command::Covariance {
            overrides.push(("seed".into(), seed.to_string()));
        }
    }
    let table = load_section(text.as_deref(), name, &overrides)?;
    if cli.common.workers == Some(0) {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let out = cli.common.out.as_path();
    let body = || match cli.command {
        Command::Covariance => covariance(&from_table(table.clone(), name)?, out),
        Command::Simulate => simulate(&from_table(table.clone(), name)?, out),
        Command::Converge => converge(&from_table(table.clone(), name)?, out, cli.common.workers).map(|r| r.outputs),
        Command::Bench => bench(&from_table(table.clone(), name)?, out, cli.common.workers).map(|r| r.outputs),
    };
    match cli.common.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?
            .install(body),
        None => body(),
    }
}

fn create_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_manifest<T: Serialize>(
    out: &Path,
    command: &str,
    section: &T,
    workers: Option<usize>,
    result: Option<toml::Table>,
) -> Result<PathBuf> {
    let mut root = toml::Table::new();
    root.insert("command".into(), command.into());
    root.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    if let Some(w) = workers {
        root.insert("workers".into(), (w as i64).into());
    }
    if let Some(r) = result {
        root.insert("result".into(), r.into());
    }
    let value = toml::Value::try_from(section).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    root.insert(command.into(), value);
    let text = toml::to_string(&root).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    let path = out.join(format!("{command}.manifest.toml"));
    fs::write(&path, text)?;
    Ok(path)
}

fn csv_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Assembles and factorizes the covariance; writes its distinct offsets or
/// every entry.
pub fn covariance(section: &CovarianceSection, out: &Path) -> Result<Outputs> {
    let grid = config::grid(section.d, section.n)?;
    let mode = config::noise_mode(section.noise, section.alpha, section.d)?;
    create_out(out)?;
    eprintln!("covariance: assembling {} x {} matrix", grid.dof(), grid.dof());
    let matrix = assemble_covariance(grid, mode)?;
    let factor = factorize(&matrix)?;
    eprintln!(
        "covariance: Cholesky succeeded with jitter {:e} (max |C_ij| = {:e})",
        factor.jitter(),
        matrix.max_abs()
    );
    let path = match section.output {
        CovarianceOutput::Offsets => {
            let path = out.join("covariance_offsets.csv");
            write_offsets(&matrix, &mut csv_writer(&path)?)?;
            path
        }
        CovarianceOutput::Matrix => {
            let path = out.join("covariance_matrix.csv");
            let mut w = csv_writer(&path)?;
            writeln!(w, "row,col,value")?;
            let c = matrix.entries();
            for i in 0..c.nrows() {
                for j in 0..c.ncols() {
                    writeln!(w, "{i},{j},{}", c[(i, j)])?;
                }
            }
            w.flush()?;
            path
        }
    };
    let manifest = write_manifest(out, "covariance", section, None, None)?;
    Ok(Outputs {
        files: vec![path, manifest],
    })
}

fn write_offsets(matrix: &CovarianceMatrix, w: &mut impl Write) -> Result<()> {
    if matrix.grid().dim() == 1 {
        writeln!(w, "offset,value")?;
        for ((r, _), v) in matrix.distinct_offsets() {
            writeln!(w, "{r},{v}")?;
        }
    } else {
        writeln!(w, "offset1,offset2,value")?;
        for ((a, b), v) in matrix.distinct_offsets() {
            writeln!(w, "{a},{b},{v}")?;
        }
    }
    w.flush()?;
    Ok(())
}

fn record_times(section: &SimulateSection) -> Result<Vec<f64>> {
    match (&section.record_times, section.record_every) {
        (Some(_), Some(_)) => Err(Error::Config("give 'record_times' or 'record_every', not both".into())),
        (Some(t), None) => Ok(t.clone()),
        (None, Some(0)) => Err(Error::Config("'record_every' must be positive".into())),
        (None, Some(k)) => {
            let tau = section.t_final / section.steps as f64;
            let mut steps: Vec<usize> = (0..=section.steps).step_by(k).collect();
            if steps.last() != Some(&section.steps) {
                steps.push(section.steps);
            }
            Ok(steps.into_iter().map(|l| l as f64 * tau).collect())
        }
        (None, None) => Ok(vec![0.0, section.t_final]),
    }
}

/// Runs one scheme on one noise sample; writes `snapshots.csv` with the
/// boundary zeros included.
pub fn simulate(section: &SimulateSection, out: &Path) -> Result<Outputs> {
    let grid = config::grid(section.d, section.n)?;
    let mode = config::noise_mode(section.noise, section.alpha, section.d)?;
    let scheme: SchemeKind = section.scheme.parse()?;
    let coeffs = config::coefficients(
        section.d,
        section.preset.as_deref(),
        section.drift.as_deref(),
        section.diffusion.as_deref(),
        section.initial.as_deref(),
    )?;
    let plan_noise = NoisePlan::new(grid, section.t_final, section.steps, section.seed, section.sample_index)?;
    let times = record_times(section)?;
    crate::integrators::record_steps(&times, section.t_final, section.steps)?;
    create_out(out)?;

    let matrix = assemble_covariance(grid, mode)?;
    let factor = factorize(&matrix)?;
    let path = sample_path(&plan_noise, &factor)?;
    let spectral = SpectralPlan::new(grid);
    eprintln!("simulate: {scheme}, {} steps, {} unknowns", section.steps, grid.dof());
    let traj = run_scheme(scheme, &spectral, &coeffs, &path, section.t_final, &times)?;
    if let Some(l) = traj.diverged_at {
        eprintln!("simulate: diverged at step {l}");
    }

    let mut files = Vec::new();
    let snap = out.join("snapshots.csv");
    write_snapshots(&traj, &mut csv_writer(&snap)?)?;
    files.push(snap);
    if section.dump_noise {
        let bin = out.join("noise.bin");
        let mut w = BufWriter::new(File::create(&bin)?);
        path.write_binary(&mut w)?;
        w.flush()?;
        files.push(bin);
    }
    let mut resolved = section.clone();
    resolved.initial.get_or_insert_with(|| default_initial(section.d).into());
    resolved.record_times = Some(times);
    resolved.record_every = None;
    let mut result = toml::Table::new();
    result.insert("diverged".into(), traj.diverged().into());
    if let Some(l) = traj.diverged_at {
        result.insert("diverged_at_step".into(), (l as i64).into());
    }
    files.push(write_manifest(out, "simulate", &resolved, None, Some(result))?);
    Ok(Outputs { files })
}

fn write_snapshots(traj: &Trajectory, w: &mut impl Write) -> Result<()> {
    let Some((_, first)) = traj.snapshots.first() else {
        writeln!(w, "time,index,x,value")?;
        return Ok(());
    };
    let grid = first.grid();
    let n = grid.n();
    if grid.dim() == 1 {
        writeln!(w, "time,index,x,value")?;
    } else {
        writeln!(w, "time,index,x,y,value")?;
    }
    for (t, field) in &traj.snapshots {
        for (idx, v) in field.with_boundary().iter().enumerate() {
            let i = idx % (n + 1);
            let x = i as f64 / n as f64;
            if grid.dim() == 1 {
                writeln!(w, "{t},{idx},{x},{v}")?;
            } else {
                let y = (idx / (n + 1)) as f64 / n as f64;
                writeln!(w, "{t},{idx},{x},{y},{v}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeSlopes {
    pub scheme: SchemeKind,
    /// Fit of `error_rms` against `tau`.
    pub rms: Option<SlopeFit>,
    /// Fit of `error_sup_meansq` against `tau`.
    pub sup_meansq: Option<SlopeFit>,
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub table: ErrorTable,
    pub slopes: Vec<SchemeSlopes>,
    pub checksums: Vec<u64>,
    pub outputs: Outputs,
}

fn slopes(table: &ErrorTable, schemes: &[SchemeKind], alpha: Option<f64>) -> Vec<SchemeSlopes> {
    schemes
        .iter()
        .map(|&scheme| SchemeSlopes {
            scheme,
            rms: fit_slope_column(table, scheme, ErrorColumn::Rms, alpha).ok(),
            sup_meansq: fit_slope_column(table, scheme, ErrorColumn::SupMeanSq, alpha).ok(),
        })
        .collect()
}

fn progress(label: &'static str) -> impl FnMut(usize, usize) {
    move |done, total| eprintln!("{label}: {done}/{total} samples")
}

/// Strong-error study; writes `errors.csv` and `summary.json`.
pub fn converge(section: &StudySection, out: &Path, workers: Option<usize>) -> Result<StudyReport> {
    let config = section.to_study()?;
    create_out(out)?;
    let (table, checksums) = run_study(&config, progress("converge"))?;
    let csv = out.join("errors.csv");
    let mut w = csv_writer(&csv)?;
    table.write_csv(&mut w)?;
    w.flush()?;
    let slopes = slopes(&table, &config.schemes, config.noise.alpha());
    let summary = out.join("summary.json");
    let json = serde_json::json!({
        "slopes": slopes,
        "noise_checksums": checksums,
    });
    fs::write(&summary, serde_json::to_string_pretty(&json).map_err(|e| Error::Config(e.to_string()))?)?;

    let mut resolved = section.clone();
    resolved.initial.get_or_insert_with(|| default_initial(section.d).into());
    resolved.reference = Some(config.reference);
    resolved.norm = Some(config.norm);
    let manifest = write_manifest(out, "converge", &resolved, workers, None)?;
    Ok(StudyReport {
        table,
        slopes,
        checksums,
        outputs: Outputs {
            files: vec![csv, summary, manifest],
        },
    })
}

#[derive(Debug, Clone, Serialize)]
struct BenchPoint {
    tau: f64,
    error_rms: f64,
    seconds_per_sample: f64,
}

/// Per-scheme error and cost at the final time against each scheme's own
/// fine reference; writes `bench.csv` and `bench_summary.json`.
pub fn bench(section: &StudySection, out: &Path, workers: Option<usize>) -> Result<StudyReport> {
    if section.reference.is_some_and(|r| r != ReferencePolicy::PerScheme)
        || section.norm.is_some_and(|n| n != ErrorNorm::FinalTime)
    {
        return Err(Error::Config(
            "bench always uses reference = \"per_scheme\" and norm = \"final_time\"".into(),
        ));
    }
    let config = bench_config(&section.to_study()?);
    create_out(out)?;
    let (table, checksums) = run_study(&config, progress("bench"))?;
    let csv = out.join("bench.csv");
    let mut w = csv_writer(&csv)?;
    table.write_csv(&mut w)?;
    w.flush()?;

    let slopes = slopes(&table, &config.schemes, config.noise.alpha());
    let per_scheme: Vec<_> = config
        .schemes
        .iter()
        .map(|&s| {
            let points: Vec<BenchPoint> = table
                .rows_for(s)
                .map(|r| BenchPoint {
                    tau: r.tau,
                    error_rms: r.error_rms,
                    seconds_per_sample: r.seconds / r.samples.max(1) as f64,
                })
                .collect();
            serde_json::json!({ "scheme": s, "points": points })
        })
        .collect();
    let summary = out.join("bench_summary.json");
    let json = serde_json::json!({ "schemes": per_scheme, "slopes": slopes });
    fs::write(&summary, serde_json::to_string_pretty(&json).map_err(|e| Error::Config(e.to_string()))?)?;

    let mut resolved = section.clone();
    resolved.initial.get_or_insert_with(|| default_initial(section.d).into());
    resolved.reference = Some(ReferencePolicy::PerScheme);
    resolved.norm = Some(ErrorNorm::FinalTime);
    let manifest = write_manifest(out, "bench", &resolved, workers, None)?;
    Ok(StudyReport {
        table,
        slopes,
        checksums,
        outputs: Outputs {
            files: vec![csv, summary, manifest],
        },
    })
}
