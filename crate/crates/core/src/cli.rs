//! Scenario files and command dispatch for the `svwe-channel` binary.
//!
//! Scenarios are TOML:
//!
//! ```toml
//! wavelength = 0.1          # meters
//! units = "wavelength"      # unit of every position: "wavelength" or "meters"
//! power_dbm = 10.0
//! noise_dbm = -20.0
//!
//! [[tx]]
//! position = [0.0, 0.0, 0.0]
//! alpha_deg = 0.0
//! beta_deg = 0.0
//! antenna = "half-wave-dipole"   # or "hertzian-dipole", or { file = "t.csv", raw = false }
//!
//! [[rx]]
//! position = [8.0, 10.0, 8.0]
//! antenna = "half-wave-dipole"
//!
//! [sweep]                   # optional
//! kind = "orientation"      # alpha_deg, start, stop, step in degrees
//! alpha_deg = 20.0
//! start = 0.0
//! stop = 180.0
//! step = 1.0
//! ```
//!
//! A position sweep uses `kind = "position"`, `axis = "x" | "y" | "z"` and
//! `start`/`stop`/`step` in position units.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::antenna::{half_wave_dipole_coefficients, hertzian_dipole_coefficients, load_custom_coefficients, AntennaModel};
use crate::channel::{
    channel_gain, geometry_from_positions, grid, mimo_matrix, normal_from_angles, sweep_orientation, sweep_position, Medium, RxElement, Scenario, SweepTable,
    TxElement,
};
use crate::error::{Error, Result};
use crate::oracle::{random_geometries, run_validation};
use crate::units::dbm_to_watts;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionUnits {
    #[default]
    Wavelength,
    Meters,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AntennaSpec {
    Kind(String),
    File {
        file: PathBuf,
        #[serde(default)]
        raw: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxConfig {
    pub position: [f64; 3],
    #[serde(default)]
    pub alpha_deg: f64,
    #[serde(default)]
    pub beta_deg: f64,
    pub antenna: AntennaSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RxConfig {
    pub position: [f64; 3],
    pub antenna: AntennaSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn vector(self) -> Vector3<f64> {
        match self {
            Axis::X => Vector3::x(),
            Axis::Y => Vector3::y(),
            Axis::Z => Vector3::z(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SweepConfig {
    Orientation { alpha_deg: f64, start: f64, stop: f64, step: f64 },
    Position { axis: Axis, start: f64, stop: f64, step: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub wavelength: f64,
    #[serde(default)]
    pub units: PositionUnits,
    pub power_dbm: f64,
    pub noise_dbm: f64,
    pub tx: Vec<TxConfig>,
    pub rx: Vec<RxConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

const KINDS: [&str; 2] = ["hertzian-dipole", "half-wave-dipole"];

fn check_finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{field}: must be finite, got {v}")))
    }
}

fn check_antenna(field: &str, a: &AntennaSpec) -> Result<()> {
    match a {
        AntennaSpec::Kind(k) if !KINDS.contains(&k.as_str()) => Err(Error::Config(format!(
            "{field}: unknown antenna kind {k:?} (expected one of {KINDS:?} or {{ file = \"...\" }})"
        ))),
        _ => Ok(()),
    }
}

fn check_position(field: &str, p: &[f64; 3]) -> Result<()> {
    for (i, v) in p.iter().enumerate() {
        check_finite(&format!("{field}[{i}]"), *v)?;
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Config(format!("wavelength: must be > 0, got {}", self.wavelength)));
        }
        check_finite("power_dbm", self.power_dbm)?;
        check_finite("noise_dbm", self.noise_dbm)?;
        if self.tx.is_empty() {
            return Err(Error::Config("tx: at least one transmit element is required".into()));
        }
        if self.rx.is_empty() {
            return Err(Error::Config("rx: at least one receive element is required".into()));
        }
        for (i, t) in self.tx.iter().enumerate() {
            check_position(&format!("tx[{i}].position"), &t.position)?;
            check_finite(&format!("tx[{i}].alpha_deg"), t.alpha_deg)?;
            check_finite(&format!("tx[{i}].beta_deg"), t.beta_deg)?;
            check_antenna(&format!("tx[{i}].antenna"), &t.antenna)?;
        }
        for (j, r) in self.rx.iter().enumerate() {
            check_position(&format!("rx[{j}].position"), &r.position)?;
            check_antenna(&format!("rx[{j}].antenna"), &r.antenna)?;
        }
        match &self.sweep {
            Some(SweepConfig::Orientation { alpha_deg, start, stop, step }) => {
                check_finite("sweep.alpha_deg", *alpha_deg)?;
                check_grid(*start, *stop, *step)
            }
            Some(SweepConfig::Position { start, stop, step, .. }) => check_grid(*start, *stop, *step),
            None => Ok(()),
        }
    }

    pub fn medium(&self) -> Result<Medium> {
        Medium::free_space(self.wavelength)
    }

    /// Position in meters.
    pub fn meters(&self, p: &[f64; 3]) -> Vector3<f64> {
        Vector3::from(*p) * self.length_unit()
    }

    /// Meters per position unit.
    pub fn length_unit(&self) -> f64 {
        match self.units {
            PositionUnits::Wavelength => self.wavelength,
            PositionUnits::Meters => 1.0,
        }
    }

    pub fn tx_power_watts(&self) -> f64 {
        dbm_to_watts(self.power_dbm)
    }

    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    /// Builds the SI scenario. Coefficient files are resolved against
    /// `base_dir`.
    pub fn scenario(&self, base_dir: &Path) -> Result<Scenario> {
        let medium = self.medium()?;
        let tx = self
            .tx
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let antenna = build_antenna(&t.antenna, &medium, base_dir)
                    .map_err(|e| Error::Config(format!("tx[{i}].antenna: {e}")))?;
                let normal = normal_from_angles(t.alpha_deg.to_radians(), t.beta_deg.to_radians());
                Ok(TxElement { position: self.meters(&t.position), normal, antenna })
            })
            .collect::<Result<Vec<_>>>()?;
        let rx = self
            .rx
            .iter()
            .enumerate()
            .map(|(j, r)| {
                let antenna = build_antenna(&r.antenna, &medium, base_dir)
                    .map_err(|e| Error::Config(format!("rx[{j}].antenna: {e}")))?;
                Ok(RxElement { position: self.meters(&r.position), antenna })
            })
            .collect::<Result<Vec<_>>>()?;
        let scenario =
            Scenario { medium, tx, rx, tx_power: self.tx_power_watts(), noise_power: self.noise_power_watts() };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

fn check_grid(start: f64, stop: f64, step: f64) -> Result<()> {
    grid(start, stop, step).map(|_| ()).map_err(|e| Error::Config(format!("sweep: {e}")))
}

fn build_antenna(choice: &AntennaSpec, medium: &Medium, base_dir: &Path) -> Result<AntennaModel> {
    match choice {
        AntennaSpec::Kind(k) if k == "hertzian-dipole" => hertzian_dipole_coefficients(medium.k),
        AntennaSpec::Kind(k) if k == "half-wave-dipole" => half_wave_dipole_coefficients(medium.k),
        AntennaSpec::Kind(k) => Err(Error::Config(format!("unknown antenna kind {k:?}"))),
        AntennaSpec::File { file, raw } => {
            let path = base_dir.join(file);
            let text = fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            load_custom_coefficients(&text, *raw)
        }
    }
}

/// Parses and validates a TOML scenario.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "svwe-channel", version, about = "Spherical-wave channel model for movable and rotatable antennas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Gain and rate of the first transmit/receive pair.
    Gain,
    /// Full channel matrix, one row per (rx, tx) entry.
    Matrix,
    /// Rate versus elevation of the first transmit element.
    SweepOrientation,
    /// Rate versus position of the first transmit element.
    SweepPosition,
    /// Compare the closed-form gain with the field-projection oracle on
    /// random geometries.
    Validate {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100.0)]
        kd_min: f64,
        #[arg(long, default_value_t = 1000.0)]
        kd_max: f64,
    },
    /// Per-link rate for every (rx, tx) pair.
    Rate,
}

#[derive(Serialize)]
struct GainOutput {
    re_h: f64,
    im_h: f64,
    abs_h2: f64,
    rate_bps_hz: f64,
}

#[derive(Serialize)]
struct MatrixEntry {
    rx_index: usize,
    tx_index: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct RateEntry {
    rx_index: usize,
    tx_index: usize,
    abs_h2: f64,
    rate_bps_hz: f64,
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    #[serde(flatten)]
    table: &'a SweepTable,
    peak_param: f64,
    improvement: f64,
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Runs one command and returns the text it produced.
pub fn execute(command: &Command, config: &ScenarioConfig, base_dir: &Path, format: Format) -> Result<String> {
    let scenario = config.scenario(base_dir)?;
    match command {
        Command::Gain => {
            let (tx, rx) = (&scenario.tx[0], &scenario.rx[0]);
            let geom = geometry_from_positions(&tx.position, &tx.normal, &rx.position)?;
            let h = channel_gain(&tx.antenna, &rx.antenna, &geom, &scenario.medium);
            let out = GainOutput { re_h: h.re, im_h: h.im, abs_h2: h.norm_sqr(), rate_bps_hz: scenario.rate(h) };
            match format {
                Format::Csv => Ok(format!(
                    "re_h,im_h,abs_h2,rate_bps_hz\n{:e},{:e},{:e},{:e}\n",
                    out.re_h, out.im_h, out.abs_h2, out.rate_bps_hz
                )),
                Format::Json => json(&out),
            }
        }
        Command::Matrix => {
            let h = mimo_matrix(&scenario)?;
            match format {
                Format::Csv => Ok(h.to_csv()),
                Format::Json => {
                    let entries: Vec<MatrixEntry> = (0..h.rx_count())
                        .flat_map(|j| (0..h.tx_count()).map(move |i| (j, i)))
                        .map(|(j, i)| {
                            let z = h.entries[(j, i)];
                            MatrixEntry { rx_index: j, tx_index: i, re: z.re, im: z.im }
                        })
                        .collect();
                    json(&entries)
                }
            }
        }
        Command::Rate => {
            let h = mimo_matrix(&scenario)?;
            let entries: Vec<RateEntry> = (0..h.rx_count())
                .flat_map(|j| (0..h.tx_count()).map(move |i| (j, i)))
                .map(|(j, i)| {
                    let z = h.entries[(j, i)];
                    RateEntry { rx_index: j, tx_index: i, abs_h2: z.norm_sqr(), rate_bps_hz: scenario.rate(z) }
                })
                .collect();
            match format {
                Format::Csv => {
                    let mut s = String::from("rx_index,tx_index,abs_h2,rate_bps_hz\n");
                    for e in &entries {
                        s.push_str(&format!("{},{},{:e},{:e}\n", e.rx_index, e.tx_index, e.abs_h2, e.rate_bps_hz));
                    }
                    Ok(s)
                }
                Format::Json => json(&entries),
            }
        }
        Command::SweepOrientation => {
            let (alpha_deg, start, stop, step) = match &config.sweep {
                Some(SweepConfig::Orientation { alpha_deg, start, stop, step }) => (*alpha_deg, *start, *stop, *step),
                Some(SweepConfig::Position { .. }) => {
                    return Err(Error::Command("sweep-orientation needs [sweep] kind = \"orientation\"".into()))
                }
                None => (config.tx[0].alpha_deg, 0.0, 180.0, 1.0),
            };
            let betas: Vec<f64> = grid(start, stop, step)?.into_iter().map(f64::to_radians).collect();
            let table = sweep_orientation(&scenario, alpha_deg.to_radians(), &betas)?.map_param(f64::to_degrees);
            sweep_output(&table, format)
        }
        Command::SweepPosition => {
            let unit = config.length_unit();
            let (axis, start, stop, step) = match &config.sweep {
                Some(SweepConfig::Position { axis, start, stop, step }) => (*axis, *start, *stop, *step),
                Some(SweepConfig::Orientation { .. }) => {
                    return Err(Error::Command("sweep-position needs [sweep] kind = \"position\"".into()))
                }
                None => {
                    let w = config.wavelength / unit;
                    (Axis::X, -30.0 * w, 30.0 * w, 0.1 * w)
                }
            };
            let offsets: Vec<f64> = grid(start, stop, step)?.into_iter().map(|x| x * unit).collect();
            let table = sweep_position(&scenario, &axis.vector(), &offsets)?.map_param(|x| x / unit);
            sweep_output(&table, format)
        }
        Command::Validate { trials, seed, kd_min, kd_max } => {
            let geoms = random_geometries(*trials, *seed, &scenario.medium, (*kd_min, *kd_max))?;
            let report = run_validation(&scenario.tx[0].antenna, &scenario.rx[0].antenna, &scenario.medium, &geoms)?;
            match format {
                Format::Csv => Ok(report.to_csv()),
                Format::Json => json(&report),
            }
        }
    }
}

fn sweep_output(table: &SweepTable, format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(table.to_csv()),
        Format::Json => json(&SweepOutput { table, peak_param: table.peak().param, improvement: table.improvement() }),
    }
}

/// Parses the config named on the command line, runs the command and
/// writes the result.
pub fn run(cli: &Cli) -> Result<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Command("--config <path> is required".into()))?;
    let config = load_config(path)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let text = execute(&cli.command, &config, base_dir, cli.format)?;
    match &cli.out {
        Some(out) => fs::write(out, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
