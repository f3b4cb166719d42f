use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use dbarrier::{BarrierSystem, PrescriptionKind};

use crate::CliError;

pub const DEFAULT_V0: f64 = 10.0;
pub const DEFAULT_W: f64 = 1.5;
pub const DEFAULT_D: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(
    name = "dbarrier",
    version,
    about = "Transmission through a symmetric double rectangular barrier"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Barrier height V0.
    #[arg(long, global = true)]
    pub v0: Option<f64>,

    /// Width of each barrier.
    #[arg(long, global = true)]
    pub w: Option<f64>,

    /// Width of the well between the barriers.
    #[arg(long, global = true)]
    pub d: Option<f64>,

    /// eltschka, aoyama-harano or wkb.
    #[arg(long, global = true)]
    pub prescription: Option<String>,

    /// Add the exact transfer-matrix result to every record.
    #[arg(long, global = true)]
    pub compare_exact: bool,

    /// csv or json.
    #[arg(long, global = true)]
    pub format: Option<String>,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transmission at one energy.
    Transmit(TransmitArgs),
    /// Transmission on an energy grid.
    Sweep(SweepArgs),
    /// Semiclassical resonance energies, optionally paired with exact peaks.
    Resonances(RangeArgs),
    /// Sideband spectrum and quench points of a driven resonance.
    Sidebands(SidebandArgs),
    /// Run the internal consistency checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct TransmitArgs {
    #[arg(long)]
    pub energy: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RangeArgs {
    /// Lower end of the energy window; default 0.05 V0.
    #[arg(long)]
    pub e_min: Option<f64>,
    /// Upper end of the energy window; default 0.95 V0.
    #[arg(long)]
    pub e_max: Option<f64>,
    /// Grid points.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    /// Worker threads; output order does not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SidebandArgs {
    /// A resonance energy, e.g. from `resonances`.
    #[arg(long)]
    pub energy: Option<f64>,
    /// Modulation amplitude V1.
    #[arg(long)]
    pub v1: Option<f64>,
    /// Modulation quantum ħω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Upper end of the quench-point scan in f = V1/ħω.
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Largest |n| reported.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Largest accepted resonance residual at `energy`.
    #[arg(long)]
    pub resonance_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Same as `--format json`.
    #[arg(long)]
    pub json: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "v0",
    "w",
    "d",
    "prescription",
    "compare-exact",
    "format",
    "output",
    "energy",
    "e-min",
    "e-max",
    "points",
    "workers",
    "v1",
    "omega",
    "f-max",
    "n-max",
    "resonance-tol",
];

/// Parsed `key = value` file. Keys use flag spelling; `_` is accepted for `-`.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config: cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config: line {} is not `key = value`", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config: unknown key `{key}` on line {}",
                    i + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Flag value if given, else the file's value for `key`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("{key}: cannot parse `{raw}` from config: {e}"))),
        }
    }

    pub fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        Ok(self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("expected csv or json, got `{other}`")),
        }
    }
}

/// Options shared by every command after merging flags, file and defaults.
#[derive(Debug)]
pub struct Settings {
    pub system: BarrierSystem,
    pub prescription: PrescriptionKind,
    pub compare_exact: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub file: ConfigFile,
}

impl Settings {
    pub fn resolve(common: CommonArgs) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let v0 = file.pick(common.v0, "v0")?.unwrap_or(DEFAULT_V0);
        let w = file.pick(common.w, "w")?.unwrap_or(DEFAULT_W);
        let d = file.pick(common.d, "d")?.unwrap_or(DEFAULT_D);
        let system = BarrierSystem::new(v0, w, d).map_err(|e| CliError::Usage(e.to_string()))?;

        let prescription = match file.pick::<String>(common.prescription, "prescription")? {
            None => PrescriptionKind::Eltschka,
            Some(name) => name
                .parse()
                .map_err(|e: dbarrier::Error| CliError::Usage(e.to_string()))?,
        };
        let format = match file.pick::<String>(common.format, "format")? {
            None => Format::Csv,
            Some(f) => f.parse().map_err(|e| CliError::Usage(format!("format: {e}")))?,
        };
        let compare_exact = file.flag(common.compare_exact, "compare-exact")?;
        let output = file.pick(common.output, "output")?;
        Ok(Self {
            system,
            prescription,
            compare_exact,
            format,
            output,
            file,
        })
    }
}
