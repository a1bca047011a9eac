//! Run configuration: a TOML document with one section per scenario.
//!
//! ```toml
//! scenario = "hfe-scan"
//! units = "lab"
//!
//! [barrier]
//! height = "1 eV"
//! width = "0.5 nm"
//!
//! [hfe_scan]
//! energy = "0.5 eV"
//! widths = ["0.5 nm", "1 nm", "1.5 nm"]
//!
//! [output]
//! format = "csv"
//! path = "scan.csv"
//! ```
//!
//! Plain numbers are taken in the active unit system. Under `units = "lab"`
//! (eV, nm, fs, electron mass) strings carrying a suffix are converted at
//! parse time; suffixes are rejected under `units = "natural"`.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tunneltime::photonic::{FtirBarrier, WaveguideBarrier};
use tunneltime::wavepacket::GaussianPacket;
use tunneltime::{PhysicalConstants, RectangularBarrier, TunnelError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn invalid(message: impl Into<String>) -> ConfigError {
    ConfigError::Validation(message.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Times,
    HfeScan,
    Wavepacket,
    Photonic,
    AbsorptionScan,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Times => "times",
            ScenarioKind::HfeScan => "hfe-scan",
            ScenarioKind::Wavepacket => "wavepacket",
            ScenarioKind::Photonic => "photonic",
            ScenarioKind::AbsorptionScan => "absorption-scan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Natural,
    /// eV, nm, fs and the electron mass.
    Lab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A number in the active units, or a string with a unit suffix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum Quantity {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Energy,
    Length,
    Time,
    Frequency,
    Angle,
}

fn factor(dimension: Dimension, suffix: &str) -> Option<f64> {
    use Dimension::*;
    match (dimension, suffix) {
        (Energy, "eV") => Some(1.0),
        (Energy, "meV") => Some(1e-3),
        (Energy, "keV") => Some(1e3),
        (Length, "nm") => Some(1.0),
        (Length, "A") | (Length, "Å") => Some(0.1),
        (Length, "um") | (Length, "µm") => Some(1e3),
        (Time, "fs") => Some(1.0),
        (Time, "as") => Some(1e-3),
        (Time, "ps") => Some(1e3),
        (Frequency, "1/fs") => Some(1.0),
        (Frequency, "1/ps") => Some(1e-3),
        (Angle, "deg") => Some(std::f64::consts::PI / 180.0),
        (Angle, "rad") => Some(1.0),
        _ => None,
    }
}

impl Quantity {
    fn resolve(&self, key: &str, dimension: Dimension, units: Units) -> Result<f64, ConfigError> {
        let value = match self {
            Quantity::Number(x) => *x,
            Quantity::Text(s) => {
                let s = s.trim();
                let split = s
                    .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
                    .unwrap_or(s.len());
                let (number, suffix) = (s[..split].trim(), s[split..].trim());
                let x: f64 = number
                    .parse()
                    .map_err(|_| invalid(format!("`{key}`: cannot read a number from \"{s}\"")))?;
                if suffix.is_empty() {
                    x
                } else {
                    if units == Units::Natural && dimension != Dimension::Angle {
                        return Err(invalid(format!(
                            "`{key}`: unit suffix \"{suffix}\" requires units = \"lab\""
                        )));
                    }
                    let f = factor(dimension, suffix)
                        .ok_or_else(|| invalid(format!("`{key}`: unit \"{suffix}\" is not a {dimension:?} unit")))?;
                    x * f
                }
            }
        };
        if !value.is_finite() {
            return Err(invalid(format!("`{key}` must be finite")));
        }
        Ok(value)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    hbar: Option<f64>,
    mass: Option<f64>,
    light_speed: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBarrier {
    height: Quantity,
    width: Option<Quantity>,
    #[serde(default)]
    absorption: Option<Quantity>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimes {
    energy: Quantity,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHfeScan {
    energy: Quantity,
    widths: Vec<Quantity>,
    tolerance: Option<f64>,
    #[serde(default)]
    gnuplot: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAbsorptionScan {
    energy: Quantity,
    widths: Vec<Quantity>,
    absorptions: Vec<Quantity>,
    tolerance: Option<f64>,
    threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWavepacket {
    energy: Quantity,
    relative_spread: f64,
    center: Option<Quantity>,
    points_per_wavelength: Option<f64>,
    time_step: Option<Quantity>,
    #[serde(default)]
    flux_series: bool,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawPhotonic {
    Waveguide {
        wavelength: Quantity,
        cutoff_wavelength: Quantity,
        length: Quantity,
    },
    Ftir {
        refractive_index: f64,
        incidence_angle: Quantity,
        vacuum_wavelength: Quantity,
        gap: Quantity,
        rayleigh_frequency: Quantity,
        #[serde(default)]
        loss_time: bool,
        relative_spread: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    format: Format,
    path: PathBuf,
    precision: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: ScenarioKind,
    #[serde(default)]
    units: Units,
    constants: Option<RawConstants>,
    barrier: Option<RawBarrier>,
    times: Option<RawTimes>,
    hfe_scan: Option<RawHfeScan>,
    absorption_scan: Option<RawAbsorptionScan>,
    wavepacket: Option<RawWavepacket>,
    photonic: Option<RawPhotonic>,
    output: RawOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub format: Format,
    pub path: PathBuf,
    pub precision: usize,
}

pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct PacketSpec {
    pub energy: f64,
    pub relative_spread: f64,
    pub center: f64,
    pub points_per_wavelength: f64,
    pub time_step: Option<f64>,
    pub flux_series: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhotonicSpec {
    Waveguide(WaveguideBarrier),
    Ftir {
        barrier: FtirBarrier,
        /// Packet spread for the loss-time run, when requested.
        loss_time_spread: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Times {
        barrier: RectangularBarrier,
        energy: f64,
    },
    HfeScan {
        template: RectangularBarrier,
        energy: f64,
        widths: Vec<f64>,
        tolerance: f64,
        gnuplot: bool,
    },
    AbsorptionScan {
        template: RectangularBarrier,
        energy: f64,
        widths: Vec<f64>,
        absorptions: Vec<f64>,
        tolerance: f64,
        threshold: f64,
    },
    Wavepacket {
        barrier: RectangularBarrier,
        packet: PacketSpec,
    },
    Photonic(PhotonicSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ScenarioKind,
    pub units: Units,
    pub constants: PhysicalConstants,
    pub scenario: Scenario,
    pub output: OutputSpec,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn domain(e: TunnelError) -> ConfigError {
    invalid(e.to_string())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| position(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    validate(raw)
}

fn section<T>(value: Option<T>, name: &str, kind: ScenarioKind) -> Result<T, ConfigError> {
    value.ok_or_else(|| invalid(format!("scenario \"{}\" requires a [{name}] section", kind.name())))
}

fn constants(raw: Option<RawConstants>, units: Units) -> Result<PhysicalConstants, ConfigError> {
    let base = match units {
        Units::Natural => PhysicalConstants::natural(),
        Units::Lab => PhysicalConstants::electron_lab_units(),
    };
    let Some(c) = raw else { return Ok(base) };
    PhysicalConstants::new(
        c.hbar.unwrap_or(base.hbar),
        c.mass.unwrap_or(base.mass),
        c.light_speed.unwrap_or(base.light_speed),
    )
    .map_err(domain)
}

fn list(values: &[Quantity], key: &str, dimension: Dimension, units: Units) -> Result<Vec<f64>, ConfigError> {
    values
        .iter()
        .enumerate()
        .map(|(i, q)| q.resolve(&format!("{key}[{i}]"), dimension, units))
        .collect()
}

fn tunnelling_energy(energy: f64, barrier: &RectangularBarrier) -> Result<(), ConfigError> {
    if !tunneltime::validate_tunnelling_regime(energy, barrier) {
        return Err(invalid(format!(
            "energy {energy} violates the tunnelling regime 0 < E < V0 = {}",
            barrier.height()
        )));
    }
    Ok(())
}

fn unused(raw: &RawConfig) -> BTreeSet<&'static str> {
    let mut present = BTreeSet::new();
    if raw.times.is_some() {
        present.insert("times");
    }
    if raw.hfe_scan.is_some() {
        present.insert("hfe_scan");
    }
    if raw.absorption_scan.is_some() {
        present.insert("absorption_scan");
    }
    if raw.wavepacket.is_some() {
        present.insert("wavepacket");
    }
    if raw.photonic.is_some() {
        present.insert("photonic");
    }
    let own = match raw.scenario {
        ScenarioKind::Times => "times",
        ScenarioKind::HfeScan => "hfe_scan",
        ScenarioKind::AbsorptionScan => "absorption_scan",
        ScenarioKind::Wavepacket => "wavepacket",
        ScenarioKind::Photonic => "photonic",
    };
    present.remove(own);
    present
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let units = raw.units;
    let kind = raw.scenario;
    if let Some(other) = unused(&raw).into_iter().next() {
        return Err(invalid(format!("section [{other}] does not belong to scenario \"{}\"", kind.name())));
    }
    let consts = constants(raw.constants, units)?;
    let barrier = |width_required: bool| -> Result<RectangularBarrier, ConfigError> {
        let b = raw.barrier.as_ref().ok_or_else(|| invalid("a [barrier] section is required"))?;
        let height = b.height.resolve("barrier.height", Dimension::Energy, units)?;
        let width = match &b.width {
            Some(w) => w.resolve("barrier.width", Dimension::Length, units)?,
            None if width_required => return Err(invalid("`barrier.width` is required")),
            None => 1.0,
        };
        let absorption = match &b.absorption {
            Some(v) => v.resolve("barrier.absorption", Dimension::Energy, units)?,
            None => 0.0,
        };
        RectangularBarrier::new(height, width, absorption).map_err(domain)
    };

    let scenario = match kind {
        ScenarioKind::Times => {
            let t = section(raw.times, "times", kind)?;
            let barrier = barrier(true)?;
            let energy = t.energy.resolve("times.energy", Dimension::Energy, units)?;
            tunnelling_energy(energy, &barrier)?;
            Scenario::Times { barrier, energy }
        }
        ScenarioKind::HfeScan => {
            let s = section(raw.hfe_scan, "hfe_scan", kind)?;
            let template = barrier(false)?;
            if raw.barrier.as_ref().is_some_and(|b| b.width.is_some()) {
                return Err(invalid("`barrier.width` is set by `hfe_scan.widths`; remove it"));
            }
            let energy = s.energy.resolve("hfe_scan.energy", Dimension::Energy, units)?;
            tunnelling_energy(energy, &template)?;
            let widths = list(&s.widths, "hfe_scan.widths", Dimension::Length, units)?;
            check_widths(&widths, "hfe_scan.widths")?;
            let tolerance = positive_or(s.tolerance, tunneltime::hfe::DEFAULT_SATURATION_TOLERANCE, "hfe_scan.tolerance")?;
            if s.gnuplot && raw.output.format != Format::Csv {
                return Err(invalid("`hfe_scan.gnuplot` needs csv output"));
            }
            Scenario::HfeScan {
                template,
                energy,
                widths,
                tolerance,
                gnuplot: s.gnuplot,
            }
        }
        ScenarioKind::AbsorptionScan => {
            let s = section(raw.absorption_scan, "absorption_scan", kind)?;
            let template = barrier(false)?;
            if raw.barrier.as_ref().is_some_and(|b| b.width.is_some() || b.absorption.is_some()) {
                return Err(invalid(
                    "`barrier.width` and `barrier.absorption` are set by the scan lists; remove them",
                ));
            }
            let energy = s.energy.resolve("absorption_scan.energy", Dimension::Energy, units)?;
            tunnelling_energy(energy, &template)?;
            let widths = list(&s.widths, "absorption_scan.widths", Dimension::Length, units)?;
            check_widths(&widths, "absorption_scan.widths")?;
            let absorptions = list(&s.absorptions, "absorption_scan.absorptions", Dimension::Energy, units)?;
            if absorptions.is_empty() || absorptions.iter().any(|v| *v < 0.0) {
                return Err(invalid("`absorption_scan.absorptions` must be a non-empty list of values >= 0"));
            }
            Scenario::AbsorptionScan {
                template,
                energy,
                widths,
                absorptions,
                tolerance: positive_or(s.tolerance, tunneltime::hfe::DEFAULT_SATURATION_TOLERANCE, "absorption_scan.tolerance")?,
                threshold: positive_or(s.threshold, tunneltime::hfe::DEFAULT_CRITERION_THRESHOLD, "absorption_scan.threshold")?,
            }
        }
        ScenarioKind::Wavepacket => {
            let w = section(raw.wavepacket, "wavepacket", kind)?;
            let barrier = barrier(true)?;
            let energy = w.energy.resolve("wavepacket.energy", Dimension::Energy, units)?;
            tunnelling_energy(energy, &barrier)?;
            if !(w.relative_spread > 0.0 && w.relative_spread < 1.0) {
                return Err(invalid("`wavepacket.relative_spread` must lie in (0, 1)"));
            }
            let piecewise = barrier.to_piecewise();
            let probe = GaussianPacket::from_energy(-1.0, energy, w.relative_spread, &consts).map_err(domain)?;
            let center = match &w.center {
                Some(c) => c.resolve("wavepacket.center", Dimension::Length, units)?,
                None => GaussianPacket::suggested_start(probe.spatial_width(), &piecewise, energy, &consts)
                    .map_err(domain)?,
            };
            if center > -6.0 * probe.spatial_width() {
                return Err(invalid(format!(
                    "`wavepacket.center` = {center} must lie at least 6 packet widths ({}) left of the barrier",
                    6.0 * probe.spatial_width()
                )));
            }
            let time_step = match &w.time_step {
                Some(t) => Some(t.resolve("wavepacket.time_step", Dimension::Time, units)?),
                None => None,
            };
            let points_per_wavelength = w.points_per_wavelength.unwrap_or(256.0);
            if !(points_per_wavelength >= tunneltime::wavepacket::MIN_POINTS_PER_WAVELENGTH) {
                return Err(invalid(format!(
                    "`wavepacket.points_per_wavelength` must be at least {}",
                    tunneltime::wavepacket::MIN_POINTS_PER_WAVELENGTH
                )));
            }
            Scenario::Wavepacket {
                barrier,
                packet: PacketSpec {
                    energy,
                    relative_spread: w.relative_spread,
                    center,
                    points_per_wavelength,
                    time_step,
                    flux_series: w.flux_series,
                },
            }
        }
        ScenarioKind::Photonic => {
            if raw.barrier.is_some() {
                return Err(invalid("photonic runs take their geometry from [photonic]; remove [barrier]"));
            }
            match section(raw.photonic, "photonic", kind)? {
                RawPhotonic::Waveguide {
                    wavelength,
                    cutoff_wavelength,
                    length,
                } => {
                    let g = WaveguideBarrier::new(
                        wavelength.resolve("photonic.wavelength", Dimension::Length, units)?,
                        cutoff_wavelength.resolve("photonic.cutoff_wavelength", Dimension::Length, units)?,
                        length.resolve("photonic.length", Dimension::Length, units)?,
                    )
                    .map_err(domain)?;
                    tunneltime::photonic::waveguide_kappa(&g).map_err(domain)?;
                    Scenario::Photonic(PhotonicSpec::Waveguide(g))
                }
                RawPhotonic::Ftir {
                    refractive_index,
                    incidence_angle,
                    vacuum_wavelength,
                    gap,
                    rayleigh_frequency,
                    loss_time,
                    relative_spread,
                } => {
                    let b = FtirBarrier::new(
                        refractive_index,
                        incidence_angle.resolve("photonic.incidence_angle", Dimension::Angle, units)?,
                        vacuum_wavelength.resolve("photonic.vacuum_wavelength", Dimension::Length, units)?,
                        gap.resolve("photonic.gap", Dimension::Length, units)?,
                        rayleigh_frequency.resolve("photonic.rayleigh_frequency", Dimension::Frequency, units)?,
                    )
                    .map_err(domain)?;
                    tunneltime::photonic::ftir_kappa(&b).map_err(domain)?;
                    if relative_spread.is_some() && !loss_time {
                        return Err(invalid("`photonic.relative_spread` only applies with loss_time = true"));
                    }
                    let spread = relative_spread.unwrap_or(0.05);
                    if !(spread > 0.0 && spread < 1.0) {
                        return Err(invalid("`photonic.relative_spread` must lie in (0, 1)"));
                    }
                    Scenario::Photonic(PhotonicSpec::Ftir {
                        barrier: b,
                        loss_time_spread: loss_time.then_some(spread),
                    })
                }
            }
        }
    };
    let precision = raw.output.precision.unwrap_or(DEFAULT_PRECISION);
    if !(1..=17).contains(&precision) {
        return Err(invalid(format!("`output.precision` must lie in 1..=17, got {precision}")));
    }
    if raw.output.path.as_os_str().is_empty() {
        return Err(invalid("`output.path` is empty"));
    }
    Ok(RunConfig {
        kind,
        units,
        constants: consts,
        scenario,
        output: OutputSpec {
            format: raw.output.format,
            path: raw.output.path,
            precision,
        },
    })
}

fn positive_or(value: Option<f64>, default: f64, key: &str) -> Result<f64, ConfigError> {
    let v = value.unwrap_or(default);
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid(format!("`{key}` must be positive, got {v}")));
    }
    Ok(v)
}

fn check_widths(widths: &[f64], key: &str) -> Result<(), ConfigError> {
    if widths.is_empty() {
        return Err(invalid(format!("`{key}` is empty")));
    }
    if widths.iter().any(|w| !(*w > 0.0)) {
        return Err(invalid(format!("`{key}` must contain positive lengths")));
    }
    if widths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid(format!("`{key}` must be strictly increasing")));
    }
    Ok(())
}
