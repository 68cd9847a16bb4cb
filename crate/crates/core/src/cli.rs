//! Command-line front end: `simulate`, `validate`, `diagnose` and `schema`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{parse_override, ConfigError, OutputFormat, RunConfig};
use crate::continuation::ContinuationPath;
use crate::diagnose::{self, DiagnoseError};
use crate::rng::{RngStream, SPECKLE_STREAM, TEXTURE_STREAM};
use crate::sampler::{assemble_cg, SamplerError};
use crate::validate::{self, MonteCarloSetup, ValidateError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PIPELINE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] SamplerError),
    #[error(transparent)]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Diagnose(#[from] DiagnoseError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_CONFIG,
            _ => EXIT_PIPELINE,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Pipeline(_) => "pipeline",
            CliError::Validate(_) => "validate",
            CliError::Diagnose(_) => "diagnose",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable error record written to stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        if let CliError::Pipeline(e) = self {
            v["stage"] = json!(e.stage());
        }
        v
    }
}

#[derive(Debug, Parser)]
#[command(name = "clutter-forge", version, about = "Non-Gaussian correlated texture and clutter synthesis")]
#[command(after_help = "Any config key can be overridden with a dotted flag, e.g. --pade.K=12 or --simulate.length 5000.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one texture (and optionally clutter) sequence.
    Simulate {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix; writes PREFIX.csv or PREFIX.bin plus PREFIX.json.
        #[arg(long, short, default_value = "texture")]
        out: PathBuf,
    },
    /// Monte Carlo PDF and ACF errors against the targets.
    Validate {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output prefix; writes PREFIX.json.
        #[arg(long, short, default_value = "report")]
        out: PathBuf,
        /// Also write PREFIX_pdf.csv and PREFIX_acf.csv for the first trial.
        #[arg(long)]
        plot_data: bool,
    },
    /// Compare both continuation paths for the configured distribution.
    Diagnose {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long, short, default_value = "diagnose")]
        out: PathBuf,
        #[arg(long, default_value_t = 30.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 301)]
        points: usize,
    },
    /// Print the JSON schema of the configuration file.
    Schema,
}

/// Split dotted `--a.b=v` / `--a.b v` overrides from the ordinary arguments.
pub fn split_overrides(args: &[String]) -> Result<(Vec<String>, Vec<String>), CliError> {
    let mut plain = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let body = a.strip_prefix("--").filter(|b| b.split('=').next().is_some_and(|k| k.contains('.')));
        match body {
            Some(b) if b.contains('=') => overrides.push(b.to_owned()),
            Some(b) => {
                let v = it.next().ok_or_else(|| CliError::Usage(format!("override --{b} needs a value")))?;
                overrides.push(format!("{b}={v}"));
            }
            None => plain.push(a.clone()),
        }
    }
    Ok((plain, overrides))
}

fn load(config: &Path, overrides: &[String], seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut parsed = overrides.iter().map(|o| parse_override(o)).collect::<Result<Vec<_>, _>>()?;
    if let Some(s) = seed {
        parsed.push((vec!["simulate".into(), "seed".into()], json!(s)));
    }
    Ok(RunConfig::load(config, &parsed)?)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn to_pretty(v: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Rust's `Display` for `f64` is the shortest round-trip representation.
fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s.into_bytes()
}

fn cmd_simulate(cfg: &RunConfig, overrides: &[String], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let pipeline = cfg.pipeline()?;
    let seed = cfg.simulate.seed;
    let mut rng = RngStream::with_stream(seed, TEXTURE_STREAM);
    let texture = pipeline.simulate(cfg.simulate.length, &mut rng);
    let clutter = if cfg.speckle.enabled {
        let mut srng = RngStream::with_stream(seed, SPECKLE_STREAM);
        Some(assemble_cg(&texture, &cfg.speckle, cfg.simulate.prf_hz, &mut srng)?)
    } else {
        None
    };
    let rows: Vec<Vec<f64>> = texture
        .samples
        .iter()
        .enumerate()
        .map(|(i, &v)| match &clutter {
            Some(c) => vec![v, c.samples[i].re, c.samples[i].im],
            None => vec![v],
        })
        .collect();
    let header: &[&str] = if clutter.is_some() { &["texture", "clutter_re", "clutter_im"] } else { &["texture"] };
    let (data_path, bytes) = match cfg.simulate.format {
        OutputFormat::Csv => (with_suffix(out, ".csv"), csv(header, rows.into_iter())),
        OutputFormat::Binary => (
            with_suffix(out, ".bin"),
            rows.iter().flatten().flat_map(|v| v.to_le_bytes()).collect(),
        ),
    };
    let sidecar = json!({
        "config": cfg,
        "overrides": overrides,
        "seed": seed,
        "samples_file": data_path.file_name().map(|f| f.to_string_lossy().into_owned()),
        "format": cfg.simulate.format,
        "columns": header,
        "length": texture.samples.len(),
        "negative_sample_count": texture.negative_sample_count,
        "clamp_count": clutter.as_ref().map(|c| c.clamp_count),
        "metadata": pipeline.metadata,
    });
    let side_path = with_suffix(out, ".json");
    write(&data_path, &bytes)?;
    write(&side_path, &to_pretty(&sidecar))?;
    Ok(vec![data_path, side_path])
}

fn cmd_validate(cfg: &RunConfig, overrides: &[String], out: &Path, plot_data: bool) -> Result<Vec<PathBuf>, CliError> {
    let pipeline = cfg.pipeline()?;
    let target_acf = cfg.target_acf(&pipeline, cfg.validate.lags)?;
    let setup = MonteCarloSetup { length: cfg.simulate.length, seed: cfg.simulate.seed, target_acf: &target_acf, ilt: &cfg.ilt };
    let report = validate::monte_carlo(&pipeline, &setup, &cfg.validate)?;
    let mut files = Vec::new();
    if plot_data {
        let (_, curves) = validate::evaluate_trial(&pipeline, &setup, &cfg.validate, 0)?;
        let pdf_rows = (0..curves.histogram.centers.len())
            .map(|i| vec![curves.histogram.centers[i], curves.target_pdf[i], curves.histogram.density[i]]);
        let acf_rows = (0..curves.acf.len()).map(|k| vec![k as f64, curves.target_acf[k], curves.acf[k]]);
        let pdf_path = with_suffix(out, "_pdf.csv");
        let acf_path = with_suffix(out, "_acf.csv");
        write(&pdf_path, &csv(&["bin_center", "theoretical", "empirical"], pdf_rows))?;
        write(&acf_path, &csv(&["lag", "theoretical", "empirical"], acf_rows))?;
        files.extend([pdf_path, acf_path]);
    }
    let doc = json!({ "config": cfg, "overrides": overrides, "report": report, "metadata": pipeline.metadata });
    let path = with_suffix(out, ".json");
    write(&path, &to_pretty(&doc))?;
    files.push(path);
    Ok(files)
}

fn cmd_diagnose(cfg: &RunConfig, out: &Path, omega_max: f64, points: usize) -> Result<Vec<PathBuf>, CliError> {
    if !(omega_max > 0.0) || points < 2 {
        return Err(CliError::Usage("need omega_max > 0 and at least 2 points".into()));
    }
    let omegas: Vec<f64> = (0..points).map(|i| omega_max * i as f64 / (points - 1) as f64).collect();
    let mean = cfg.distribution.mean();
    let sd = cfg.distribution.variance().sqrt();
    let u_max = mean + 8.0 * sd;
    let u: Vec<f64> = (1..=400).map(|i| u_max * i as f64 / 400.0).collect();
    let d = diagnose::diagnose(&cfg.distribution, &cfg.pade, &omegas, &u, &cfg.ilt)?;
    for p in &d.paths {
        if let Some(e) = &p.error {
            log::warn!("{:?} failed: {e}", p.path);
        }
    }
    let lt_rows = d.lt_rows.iter().map(|(w, t, m, c)| vec![*w, t.re, t.im, m.re, m.im, c.re, c.im]);
    let pdf_rows = d.pdf_rows.iter().map(|&(u, r, m, c)| vec![u, r, m, c]);
    let lt_path = with_suffix(out, "_lt.csv");
    let pdf_path = with_suffix(out, "_pdf.csv");
    let json_path = with_suffix(out, ".json");
    write(&lt_path, &csv(&["omega", "theo_re", "theo_im", "moment_re", "moment_im", "cumulant_re", "cumulant_im"], lt_rows))?;
    write(&pdf_path, &csv(&["u", "reference", "moment", "cumulant"], pdf_rows))?;
    let summary = json!({
        "config": cfg,
        "paths": d.paths,
        "cumulant_path_ok": d.paths.iter().any(|p| p.path == ContinuationPath::CumulantPath && p.ok),
    });
    write(&json_path, &to_pretty(&summary))?;
    Ok(vec![lt_path, pdf_path, json_path])
}

fn dispatch(args: &[String]) -> Result<Option<String>, CliError> {
    let (plain, overrides) = split_overrides(args)?;
    let cli = match Cli::try_parse_from(&plain) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            return Ok(Some(e.to_string()));
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    let files = match cli.command {
        Command::Schema => return Ok(Some(serde_json::to_string_pretty(&crate::config::schema()).expect("schema"))),
        Command::Simulate { config, seed, out } => cmd_simulate(&load(&config, &overrides, seed)?, &overrides, &out)?,
        Command::Validate { config, seed, out, plot_data } => {
            cmd_validate(&load(&config, &overrides, seed)?, &overrides, &out, plot_data)?
        }
        Command::Diagnose { config, out, omega_max, points } => {
            cmd_diagnose(&load(&config, &overrides, None)?, &out, omega_max, points)?
        }
    };
    Ok(Some(files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join("\n")))
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn run(args: &[String]) -> i32 {
    match dispatch(args) {
        Ok(msg) => {
            if let Some(m) = msg {
                println!("{}", m.trim_end());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
