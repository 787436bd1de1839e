//! Command-line front end: argument parsing, run orchestration and CSV output.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_config, parse_config_str, preset_config, RunConfig};
use crate::error::{Error, Result};
use crate::rate::{evaluate_point, optimize_intensity, sweep_distance, KeyMode, KeyRatePoint, PointStatus};
use crate::source::CoefficientSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

pub const CSV_HEADER: [&str; 8] = ["variant", "distance_km", "rate", "mu_opt", "c_lower", "e_zz", "i_eve", "abort_flag"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Asymptotic,
    Finite,
}

impl From<ModeArg> for KeyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Asymptotic => KeyMode::Asymptotic,
            ModeArg::Finite => KeyMode::Finite,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rfiqkd", version, about = "Key rates for reference-frame-independent QKD with imperfect sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Key-rate mode for variants that do not set one.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate of every variant at a single distance.
    Keyrate {
        #[command(flatten)]
        common: CommonArgs,
        /// Channel length in km.
        #[arg(long, default_value_t = 50.0)]
        distance: f64,
    },
    /// Key rate over the configured distance grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Built-in curve families a-f; `--config` fields override the preset.
    Preset {
        #[arg(value_parser = ["a", "b", "c", "d", "e", "f"])]
        id: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load(common: &CommonArgs, preset: Option<&str>) -> Result<RunConfig> {
    let mode = common.mode.map(KeyMode::from);
    match (preset, &common.config) {
        (None, None) => parse_config_str("", mode),
        (None, Some(path)) => parse_config(path, mode),
        (Some(id), None) => preset_config(id, mode),
        (Some(id), Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let mut doc: toml::Table =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            doc.insert("preset".into(), toml::Value::String(id.into()));
            parse_config_str(&toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?, mode)
        }
    }
}

/// Evaluates every variant, in order, at the given distances.
pub fn run_config(cfg: &RunConfig, distances: &[f64]) -> Result<Vec<(String, Vec<KeyRatePoint>)>> {
    cfg.variants
        .iter()
        .map(|v| Ok((v.label.clone(), sweep_distance(&v.curve, distances)?)))
        .collect()
}

/// Single-point evaluation without the parallel sweep machinery.
pub fn keyrate_point(cfg: &RunConfig, distance_km: f64) -> Result<Vec<(String, KeyRatePoint)>> {
    cfg.variants
        .iter()
        .map(|v| {
            let coeffs = CoefficientSet::build(&v.curve.source)?;
            let ch = v.curve.channel.at_distance(distance_km);
            ch.validate()?;
            let p = if v.curve.optimize_mu {
                optimize_intensity(&coeffs, &ch, &v.curve.protocol)?
            } else {
                evaluate_point(&coeffs, &ch, &v.curve.protocol)?
            };
            Ok((v.label.clone(), p))
        })
        .collect()
}

/// Ten significant digits, scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.9e}")
}

fn csv_record(label: &str, p: &KeyRatePoint) -> [String; 8] {
    let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    [
        label.to_string(),
        format_number(p.distance_km),
        format_number(p.rate),
        format_number(p.mu_opt),
        opt(p.summary.as_ref().map(|s| s.c_lower)),
        opt(p.summary.as_ref().map(|s| s.e_zz_upper)),
        opt(p.summary.as_ref().map(|s| s.i_eve_upper())),
        p.status.as_str().to_string(),
    ]
}

pub fn write_csv<W: Write>(out: W, rows: &[(String, Vec<KeyRatePoint>)]) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for (label, points) in rows {
        for p in points {
            w.write_record(csv_record(label, p)).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Config(format!("writing CSV: {e}")))
}

fn emit(common: &CommonArgs, rows: &[(String, Vec<KeyRatePoint>)]) -> Result<()> {
    match &common.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
            write_csv(std::io::BufWriter::new(file), rows)
        }
        None => write_csv(std::io::stdout().lock(), rows),
    }
}

fn execute(cli: &Cli) -> Result<Vec<(String, Vec<KeyRatePoint>)>> {
    let (common, rows) = match &cli.command {
        Command::Keyrate { common, distance } => {
            let cfg = load(common, None)?;
            let rows = keyrate_point(&cfg, *distance)?.into_iter().map(|(l, p)| (l, vec![p])).collect::<Vec<_>>();
            (common, rows)
        }
        Command::Sweep { common } => {
            let cfg = load(common, None)?;
            (common, run_config(&cfg, &cfg.sweep.distances()?)?)
        }
        Command::Preset { id, common } => {
            let cfg = load(common, Some(id))?;
            (common, run_config(&cfg, &cfg.sweep.distances()?)?)
        }
    };
    emit(common, &rows)?;
    Ok(rows)
}

/// Runs the tool and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(rows) => {
            let infeasible = rows.iter().flat_map(|(_, ps)| ps).any(|p| p.status == PointStatus::Infeasible);
            if infeasible {
                eprintln!("error: statistics inconsistent with the source model at one or more points");
                EXIT_INFEASIBLE
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Infeasible(_) => EXIT_INFEASIBLE,
                _ => EXIT_CONFIG,
            }
        }
    }
}
