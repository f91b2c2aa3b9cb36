//! Command-line front end: `fisher-scan`, `simulate` and `sweep-demo`.
//!
//! Settings come from an optional flat TOML file (`--config`) and are
//! overridden by flags.  Every emitted table starts with a metadata block
//! (`#`-prefixed lines for CSV, a `metadata` object for JSON) holding the tool
//! version, the resolved configuration, the seed and the generator.
//!
//! Lengths are in the same unit as `sigma`, except the separation grid, which
//! is given as `d/σ`.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::DetectorGrid;
use crate::estimator::{self, InversionMethod, Protocol, RealizationRecord};
use crate::fisher::{self, BinaryImagingModel, Derivative};
use crate::montecarlo::{self, RNG_DESCRIPTION};
use crate::optics::{Aperture, ApertureModel, BinarySource};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Runtime(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(crate::Error::Format(e.to_string()))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(crate::Error::Format(e.to_string()))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "subrayleigh", version, about = "Fisher information and Monte Carlo estimation for two-point resolution with array homodyne detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the Fisher information over a separation grid.
    FisherScan(Flags),
    /// Run repeated estimation experiments on simulated data.
    Simulate(Flags),
    /// Emit the analytic variance sweep and single-realization curves.
    SweepDemo(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FisherScan(_) => "fisher-scan",
            Command::Simulate(_) => "simulate",
            Command::SweepDemo(_) => "sweep-demo",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Command::FisherScan(f) | Command::Simulate(f) | Command::SweepDemo(f) => f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Aperture model; `fisher-scan` covers both when omitted.
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ApertureModel>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// One or more SNR values, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub snr: Option<Vec<f64>>,
    /// `log:START:STOP:COUNT`, `lin:START:STOP:COUNT` or a comma list, in units of σ.
    #[arg(long)]
    pub d_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub centroid: Option<f64>,
    #[arg(long)]
    pub pixels: Option<usize>,
    #[arg(long)]
    pub pixel_width: Option<f64>,
    /// Realizations per point (`simulate`) or number of empirical curves (`sweep-demo`).
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (`fisher-scan`, `sweep-demo`) or directory (`simulate`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_model(s: &str) -> std::result::Result<ApertureModel, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum GridSpec {
    Text(String),
    Values(Vec<f64>),
}

/// Flat key-value configuration file.  Keys mirror the flags with
/// underscores: `model`, `sigma`, `snr`, `d_grid`, `centroid`, `pixels`,
/// `pixel_width`, `realizations`, `samples`, `seed`, `out`, `format`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<ApertureModel>,
    sigma: Option<f64>,
    snr: Option<OneOrMany>,
    d_grid: Option<GridSpec>,
    centroid: Option<f64>,
    pixels: Option<usize>,
    pixel_width: Option<f64>,
    realizations: Option<usize>,
    samples: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
}

fn read_config(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// Parses a separation grid specification into ascending `d/σ` values.
pub fn parse_d_grid(spec: &str) -> CliResult<Vec<f64>> {
    let spec = spec.trim();
    let values = if let Some(rest) = spec.strip_prefix("log:").or_else(|| spec.strip_prefix("lin:")) {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(config_err(format!("d grid `{spec}`: expected KIND:START:STOP:COUNT")));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| config_err(format!("d grid `{spec}`: {e}")));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| config_err(format!("d grid `{spec}`: {e}")))?;
        if count < 1 || (count == 1 && start != stop) {
            return Err(config_err(format!("d grid `{spec}`: COUNT must be at least 2")));
        }
        let log = spec.starts_with("log:");
        if log && (start <= 0.0 || stop <= 0.0) {
            return Err(config_err(format!("d grid `{spec}`: log grid needs positive bounds")));
        }
        let span = (count.max(2) - 1) as f64;
        (0..count)
            .map(|k| {
                let t = k as f64 / span;
                if log {
                    (start.ln() + t * (stop.ln() - start.ln())).exp()
                } else {
                    start + t * (stop - start)
                }
            })
            .collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| config_err(format!("d grid `{spec}`: {e}"))))
            .collect::<CliResult<Vec<f64>>>()?
    };
    check_d_grid(&values)?;
    Ok(values)
}

fn check_d_grid(values: &[f64]) -> CliResult<()> {
    if values.is_empty() {
        return Err(config_err("d grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(config_err("d grid values must be finite and non-negative"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err("d grid must be strictly ascending"));
    }
    Ok(())
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub models: Vec<ApertureModel>,
    pub sigma: f64,
    pub snr: Vec<f64>,
    pub d_over_sigma: Vec<f64>,
    pub centroid: f64,
    pub pixels: usize,
    pub pixel_width: f64,
    pub realizations: usize,
    pub samples: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub rng: String,
}

impl RunConfig {
    /// Merges defaults, the config file (if any) and flags, in increasing priority.
    pub fn resolve(command: &Command) -> CliResult<Self> {
        let flags = command.flags();
        let file = match &flags.config {
            Some(path) => read_config(path)?,
            None => FileConfig::default(),
        };
        let scan = matches!(command, Command::FisherScan(_));

        let models = match flags.model.or(file.model) {
            Some(m) => vec![m],
            None if scan => vec![ApertureModel::Soft, ApertureModel::Hard],
            None => vec![ApertureModel::Soft],
        };
        let sigma = flags.sigma.or(file.sigma).unwrap_or(1.0);
        let snr = match (&flags.snr, file.snr) {
            (Some(v), _) => v.clone(),
            (None, Some(OneOrMany::One(s))) => vec![s],
            (None, Some(OneOrMany::Many(v))) => v,
            (None, None) if scan => vec![25.0, 100.0, 400.0],
            (None, None) => vec![100.0],
        };
        let d_over_sigma = match (&flags.d_grid, file.d_grid) {
            (Some(s), _) => parse_d_grid(s)?,
            (None, Some(GridSpec::Text(s))) => parse_d_grid(&s)?,
            (None, Some(GridSpec::Values(v))) => {
                check_d_grid(&v)?;
                v
            }
            (None, None) if scan => parse_d_grid("log:0.01:5:60")?,
            (None, None) => vec![0.2],
        };
        let realizations = flags.realizations.or(file.realizations).unwrap_or(match command {
            Command::SweepDemo(_) => 5,
            _ => 1000,
        });
        let config = Self {
            command: command.name().to_string(),
            models,
            sigma,
            snr,
            d_over_sigma,
            centroid: flags.centroid.or(file.centroid).unwrap_or(0.0),
            pixels: flags.pixels.or(file.pixels).unwrap_or(1000),
            pixel_width: flags.pixel_width.or(file.pixel_width).unwrap_or(0.008 * sigma),
            realizations,
            samples: flags.samples.or(file.samples).unwrap_or(500),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or(OutputFormat::Csv),
            rng: RNG_DESCRIPTION.to_string(),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> CliResult<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("pixel_width", self.pixel_width)?;
        if !self.centroid.is_finite() {
            return Err(config_err("centroid must be finite"));
        }
        if self.snr.is_empty() {
            return Err(config_err("at least one SNR value is required"));
        }
        for &s in &self.snr {
            positive("snr", s)?;
        }
        if self.pixels < 2 {
            return Err(config_err("pixels must be at least 2"));
        }
        if self.samples < 2 {
            return Err(config_err("samples must be at least 2"));
        }
        let min_realizations = if self.command == "simulate" { 2 } else { 0 };
        if self.realizations < min_realizations {
            return Err(config_err(format!("realizations must be at least {min_realizations}")));
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<DetectorGrid> {
        DetectorGrid::with_pitch(self.centroid, self.pixel_width, self.pixels).map_err(|e| config_err(e.to_string()))
    }

    fn aperture(&self, model: ApertureModel) -> CliResult<Aperture> {
        Aperture::new(model, self.sigma).map_err(|e| config_err(e.to_string()))
    }

    fn source(&self, d_over_sigma: f64) -> crate::Result<BinarySource> {
        BinarySource::new(d_over_sigma * self.sigma, self.centroid)
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "subrayleigh",
            "version": VERSION,
            "seed": self.seed,
            "rng": RNG_DESCRIPTION,
            "config": self,
        })
    }

    fn csv_header(&self) -> CliResult<String> {
        Ok(format!(
            "# subrayleigh {VERSION}\n# command: {}\n# seed: {}\n# rng: {RNG_DESCRIPTION}\n# config: {}\n",
            self.command,
            self.seed,
            serde_json::to_string(self)?
        ))
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let config = RunConfig::resolve(&cli.command)?;
    log::info!("running {} with seed {}", config.command, config.seed);
    match cli.command {
        Command::FisherScan(_) => fisher_scan(&config),
        Command::Simulate(_) => simulate(&config),
        Command::SweepDemo(_) => sweep_demo(&config),
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_table<R: Serialize>(config: &RunConfig, rows: &[R], mut out: impl Write, format: OutputFormat) -> CliResult<()> {
    match format {
        OutputFormat::Csv => {
            out.write_all(config.csv_header()?.as_bytes())?;
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({ "metadata": config.metadata(), "rows": rows });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherScanRow {
    pub model: ApertureModel,
    #[serde(rename = "S")]
    pub snr: f64,
    pub d_over_sigma: f64,
    #[serde(rename = "F_dd_dense")]
    pub dd_dense: f64,
    #[serde(rename = "F_dd_decomposed")]
    pub dd_decomposed: f64,
    #[serde(rename = "F_d_SR")]
    pub d_sub_rayleigh: f64,
    #[serde(rename = "F_d_R")]
    pub d_rayleigh: f64,
    #[serde(rename = "F_cc_dense")]
    pub cc_dense: f64,
    #[serde(rename = "F_c_SR")]
    pub c_sub_rayleigh: f64,
    #[serde(rename = "F_c_R")]
    pub c_rayleigh: f64,
    #[serde(rename = "approx_d_SR")]
    pub d_sub_rayleigh_approx: f64,
    #[serde(rename = "approx_c_SR")]
    pub c_sub_rayleigh_approx: f64,
}

pub fn fisher_scan_rows(config: &RunConfig) -> CliResult<Vec<FisherScanRow>> {
    let grid = config.grid()?;
    let mut points = Vec::new();
    for &model in &config.models {
        for &snr in &config.snr {
            for &d in &config.d_over_sigma {
                points.push((model, snr, d));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(model, snr, d_rel)| -> CliResult<FisherScanRow> {
            let aperture = config.aperture(model)?;
            let source = config.source(d_rel)?;
            let dense = fisher::fisher_dense(&BinaryImagingModel::new(aperture, grid, snr)?, &source, Derivative::Analytic)?;
            let decomposed = fisher::fisher_decomposed(&aperture, snr, &source)?;
            let d = source.half_separation;
            Ok(FisherScanRow {
                model,
                snr,
                d_over_sigma: d_rel,
                dd_dense: dense.dd(),
                dd_decomposed: decomposed.dd(),
                d_sub_rayleigh: decomposed.sub_rayleigh_d(),
                d_rayleigh: decomposed.rayleigh_d(),
                cc_dense: dense.cc(),
                c_sub_rayleigh: decomposed.sub_rayleigh_c(),
                c_rayleigh: decomposed.rayleigh_c(),
                d_sub_rayleigh_approx: fisher::fisher_d_subrayleigh_approx(snr, d, config.sigma),
                c_sub_rayleigh_approx: fisher::fisher_c_subrayleigh_approx(snr, d, config.sigma),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(rows)
}

fn fisher_scan(config: &RunConfig) -> CliResult<()> {
    let rows = fisher_scan_rows(config)?;
    write_table(config, &rows, open_output(config.out.as_deref())?, config.format)
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizationRow {
    #[serde(rename = "S")]
    pub snr: f64,
    pub d_over_sigma: f64,
    pub realization: usize,
    pub seed: u64,
    pub stream: u64,
    pub centroid_hat: Option<f64>,
    pub halfsep_hat: Option<f64>,
    pub v_min: Option<f64>,
    pub quality_flag: Option<&'static str>,
    pub error: Option<String>,
}

impl RealizationRow {
    fn new(snr: f64, d_over_sigma: f64, r: &RealizationRecord) -> Self {
        let ok = r.outcome.as_ref().ok();
        Self {
            snr,
            d_over_sigma,
            realization: r.realization,
            seed: r.seed,
            stream: r.stream,
            centroid_hat: ok.map(|e| e.centroid_hat),
            halfsep_hat: ok.map(|e| e.halfsep_hat),
            v_min: ok.map(|e| e.v_min),
            quality_flag: ok.map(|e| e.quality_flag.name()),
            error: r.outcome.as_ref().err().cloned(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    #[serde(rename = "S")]
    pub snr: f64,
    pub d_over_sigma: f64,
    pub completed: usize,
    pub failed: usize,
    pub clean_two_lobe: usize,
    pub half_separation: Option<estimator::ParameterStats>,
    pub centroid: Option<estimator::ParameterStats>,
    /// `σ² P / S` for the half-separation estimates.
    pub rescaled_precision_d: Option<f64>,
    pub rescaled_precision_d_error: Option<f64>,
    /// `σ² F_d^SR / S`.
    pub rescaled_fisher_d_sub_rayleigh: f64,
    pub rescaled_precision_c: Option<f64>,
    pub rescaled_precision_c_error: Option<f64>,
    pub rescaled_fisher_c: f64,
    pub error: Option<String>,
}

/// Runs every `(S, d)` point, keeping all records even when a point exceeds
/// the failure threshold.
pub fn simulate_points(config: &RunConfig) -> CliResult<(Vec<RealizationRow>, Vec<PointSummary>)> {
    let model = config.models[0];
    let aperture = config.aperture(model)?;
    let grid = config.grid()?;
    let streams: Vec<u64> = (0..config.realizations as u64).collect();
    let scale = config.sigma * config.sigma;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &snr in &config.snr {
        for &d_rel in &config.d_over_sigma {
            let source = config.source(d_rel)?;
            let protocol = Protocol {
                realizations: config.realizations,
                samples: config.samples,
                grid,
                source,
                aperture,
                snr,
                seed: config.seed,
                method: InversionMethod::ExactInversion,
            };
            let summary = estimator::run_realizations(&protocol, &streams)?;
            let fi = fisher::fisher_decomposed(&aperture, snr, &source)?;
            rows.extend(summary.records.iter().map(|r| RealizationRow::new(snr, d_rel, r)));
            let hs = summary.half_separation;
            let ct = summary.centroid;
            summaries.push(PointSummary {
                snr,
                d_over_sigma: d_rel,
                completed: summary.completed,
                failed: summary.failed,
                clean_two_lobe: summary.clean_two_lobe,
                half_separation: hs,
                centroid: ct,
                rescaled_precision_d: hs.map(|s| scale * s.precision / snr),
                rescaled_precision_d_error: hs.map(|s| scale * s.precision_error / snr),
                rescaled_fisher_d_sub_rayleigh: scale * fi.sub_rayleigh_d() / snr,
                rescaled_precision_c: ct.map(|s| scale * s.precision / snr),
                rescaled_precision_c_error: ct.map(|s| scale * s.precision_error / snr),
                rescaled_fisher_c: scale * fi.cc() / snr,
                error: summary.check().err().map(|e| e.to_string()),
            });
        }
    }
    Ok((rows, summaries))
}

fn simulate(config: &RunConfig) -> CliResult<()> {
    if config.models.len() != 1 {
        return Err(config_err("simulate needs a single aperture model"));
    }
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("simulate-out"));
    fs::create_dir_all(&dir)?;
    let (rows, summaries) = simulate_points(config)?;
    let table = match config.format {
        OutputFormat::Csv => "realizations.csv",
        OutputFormat::Json => "realizations.json",
    };
    write_table(config, &rows, BufWriter::new(File::create(dir.join(table))?), config.format)?;
    let doc = serde_json::json!({ "metadata": config.metadata(), "points": summaries });
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    f.flush()?;
    log::info!("wrote {} realizations to {}", rows.len(), dir.display());
    if let Some(bad) = summaries.iter().find(|s| s.error.is_some()) {
        return Err(CliError::Runtime(crate::Error::ProtocolFailure {
            failed: bad.failed,
            total: bad.failed + bad.completed,
        }));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub xi: f64,
    pub analytic: f64,
    /// Five standard errors of an `N`-sample variance estimate.
    pub band: f64,
    pub empirical: Vec<f64>,
}

pub fn sweep_demo_rows(config: &RunConfig) -> CliResult<Vec<SweepRow>> {
    let aperture = config.aperture(config.models[0])?;
    let grid = config.grid()?;
    let snr = config.snr[0];
    let d_rel = config.d_over_sigma[0];
    if config.snr.len() > 1 || config.d_over_sigma.len() > 1 {
        log::warn!("sweep-demo uses only the first SNR and separation");
    }
    let source = config.source(d_rel)?.to_source_model();
    let xi = estimator::sweep_grid(config.centroid, config.sigma, &grid)?;
    let analytic = estimator::analytic_variance_curve(&source, &aperture, snr, &xi)?;
    let curves = (0..config.realizations as u64)
        .into_par_iter()
        .map(|k| {
            let set = montecarlo::sample_quadratures_stream(&source, &aperture, &grid, snr, config.samples, config.seed, k)?;
            estimator::mode_variance_sweep(&set, &aperture, &xi)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let se = (2.0 / (config.samples as f64 - 1.0)).sqrt();
    Ok(xi
        .iter()
        .enumerate()
        .map(|(i, &x)| SweepRow {
            xi: x,
            analytic: analytic.values[i],
            band: 5.0 * se * analytic.values[i],
            empirical: curves.iter().map(|c| c.values[i]).collect(),
        })
        .collect())
}

fn sweep_demo(config: &RunConfig) -> CliResult<()> {
    let rows = sweep_demo_rows(config)?;
    let mut out = open_output(config.out.as_deref())?;
    match config.format {
        OutputFormat::Csv => {
            out.write_all(config.csv_header()?.as_bytes())?;
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["xi".to_string(), "analytic".into(), "band".into()];
            header.extend((0..config.realizations).map(|k| format!("realization_{k}")));
            w.write_record(&header)?;
            for row in &rows {
                let mut rec = vec![row.xi.to_string(), row.analytic.to_string(), row.band.to_string()];
                rec.extend(row.empirical.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
            w.flush()?;
            Ok(())
        }
        OutputFormat::Json => write_table(config, &rows, out, OutputFormat::Json),
    }
}
