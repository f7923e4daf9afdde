//! Experiment description files.
//!
//! A config is a TOML document with one section per domain type. Lab units are
//! spelled out in the key names (`b0_t`, `length_m`, `omega_ev`, ...) and are
//! converted to natural units while the validated [`ExperimentConfig`] is
//! built. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::campaign::Geometry;
use crate::error::{Error, Result};
use crate::kernels::{CavitySpec, MagnetSpec, OpticalPath};
use crate::limits::{GridSpacing, MassGrid};
use crate::statistics::{CampaignTally, DetectorSpec};
use crate::units;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    id: String,
    omega_ev: Option<f64>,
    wavelength_m: Option<f64>,
    confidence_level: Option<f64>,
    psi_limit_rad: Option<f64>,
    #[serde(default)]
    notes: Vec<String>,
    generation_magnet: RawMagnet,
    regeneration_magnet: Option<RawMagnet>,
    optical_path: Option<RawPath>,
    detector: Option<RawDetector>,
    tally: Option<RawTally>,
    cavity: Option<RawCavity>,
    grid: RawGrid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMagnet {
    b0_t: f64,
    length_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    l1_m: f64,
    l2_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    eta_det: f64,
    dark_per_gate: f64,
    gate_ns: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTally {
    pulses_total: u64,
    pulses_with_field: u64,
    photons_per_pulse: f64,
    eta_coupling: f64,
    #[serde(default = "one")]
    extra_loss: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    length_m: f64,
    finesse: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    min_mass_ev: f64,
    max_mass_ev: f64,
    #[serde(default = "default_points")]
    points: usize,
    #[serde(default = "default_spacing")]
    spacing: GridSpacing,
}

fn default_points() -> usize {
    2000
}

fn default_spacing() -> GridSpacing {
    GridSpacing::Logarithmic
}

/// How the photon energy was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonEnergySource {
    Omega,
    Wavelength(f64),
}

/// Validated experiment description. All quantities are already in eV powers.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub omega: f64,
    pub omega_source: PhotonEnergySource,
    pub generation: MagnetSpec,
    pub regeneration: MagnetSpec,
    pub optical_path: Option<OpticalPath>,
    pub detector: Option<DetectorSpec>,
    pub tally: Option<CampaignTally>,
    pub confidence_level: Option<f64>,
    pub cavity: Option<CavitySpec>,
    pub psi_limit: Option<f64>,
    pub grid: MassGrid,
    pub notes: Vec<String>,
}

fn missing(key: &str) -> Error {
    Error::config(key, "required for this command but absent from the config")
}

impl ExperimentConfig {
    pub fn optical_path(&self) -> Result<OpticalPath> {
        self.optical_path.ok_or_else(|| missing("optical_path"))
    }

    pub fn detector(&self) -> Result<DetectorSpec> {
        self.detector.ok_or_else(|| missing("detector"))
    }

    pub fn tally(&self) -> Result<CampaignTally> {
        self.tally.ok_or_else(|| missing("tally"))
    }

    pub fn confidence_level(&self) -> Result<f64> {
        self.confidence_level.ok_or_else(|| missing("confidence_level"))
    }

    pub fn cavity(&self) -> Result<CavitySpec> {
        self.cavity.ok_or_else(|| missing("cavity"))
    }

    pub fn psi_limit(&self) -> Result<f64> {
        self.psi_limit.ok_or_else(|| missing("psi_limit_rad"))
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Ok(Geometry {
            generation: self.generation,
            regeneration: self.regeneration,
            path: self.optical_path()?,
            omega: self.omega,
        })
    }
}

/// Re-labels a domain error with the offending config key.
fn at<T>(key: &str, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(key, other.to_string()),
    })
}

fn magnet(section: &str, raw: &RawMagnet) -> Result<MagnetSpec> {
    at(&format!("{section}.b0_t"), units::tesla_to_ev2(raw.b0_t))?;
    at(
        &format!("{section}.length_m"),
        MagnetSpec::new(raw.b0_t, raw.length_m),
    )
}

fn validate(raw: RawConfig) -> Result<ExperimentConfig> {
    if raw.id.trim().is_empty() {
        return Err(Error::config("id", "must not be empty"));
    }
    let (omega, omega_source) = match (raw.omega_ev, raw.wavelength_m) {
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "omega_ev",
                "give exactly one of omega_ev and wavelength_m, not both",
            ))
        }
        (None, None) => {
            return Err(Error::config(
                "omega_ev",
                "one of omega_ev and wavelength_m is required",
            ))
        }
        (Some(w), None) => {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::config("omega_ev", "must be finite and > 0"));
            }
            (w, PhotonEnergySource::Omega)
        }
        (None, Some(l)) => (
            at("wavelength_m", units::photon_energy_from_wavelength(l))?,
            PhotonEnergySource::Wavelength(l),
        ),
    };

    let generation = magnet("generation_magnet", &raw.generation_magnet)?;
    let regeneration = match &raw.regeneration_magnet {
        Some(r) => magnet("regeneration_magnet", r)?,
        None => generation,
    };

    let optical_path = raw
        .optical_path
        .map(|p| {
            at("optical_path.l1_m", OpticalPath::new(p.l1_m, 1.0))?;
            at("optical_path.l2_m", OpticalPath::new(p.l1_m, p.l2_m))
        })
        .transpose()?;

    let detector = raw
        .detector
        .map(|d| {
            if !(d.eta_det > 0.0 && d.eta_det < 1.0) {
                return Err(Error::config("detector.eta_det", format!("{} must lie in (0, 1)", d.eta_det)));
            }
            if !(0.0..1.0).contains(&d.dark_per_gate) {
                return Err(Error::config(
                    "detector.dark_per_gate",
                    format!("{} must lie in [0, 1)", d.dark_per_gate),
                ));
            }
            at("detector.gate_ns", DetectorSpec::new(d.eta_det, d.dark_per_gate, d.gate_ns))
        })
        .transpose()?;

    let tally = raw
        .tally
        .map(|t| {
            if t.pulses_with_field > t.pulses_total {
                return Err(Error::config(
                    "tally.pulses_with_field",
                    "must not exceed tally.pulses_total",
                ));
            }
            for (key, v, lo_open) in [
                ("tally.photons_per_pulse", t.photons_per_pulse, true),
                ("tally.eta_coupling", t.eta_coupling, false),
                ("tally.extra_loss", t.extra_loss, false),
            ] {
                let ok = if lo_open {
                    v.is_finite() && v > 0.0
                } else {
                    v > 0.0 && v <= 1.0
                };
                if !ok {
                    return Err(Error::config(key, format!("{v} is out of range")));
                }
            }
            at(
                "tally",
                CampaignTally::new(
                    t.pulses_total,
                    t.pulses_with_field,
                    t.photons_per_pulse,
                    t.eta_coupling,
                    t.extra_loss,
                ),
            )
        })
        .transpose()?;

    if let Some(cl) = raw.confidence_level {
        if !(cl > 0.0 && cl < 1.0) {
            return Err(Error::config("confidence_level", format!("{cl} must lie in (0, 1)")));
        }
    }

    let cavity = raw
        .cavity
        .map(|c| {
            at("cavity.length_m", CavitySpec::new(c.length_m, 1.0))?;
            at("cavity.finesse", CavitySpec::new(c.length_m, c.finesse))
        })
        .transpose()?;

    if let Some(psi) = raw.psi_limit_rad {
        if !(psi.is_finite() && psi > 0.0) {
            return Err(Error::config("psi_limit_rad", "must be finite and > 0"));
        }
    }

    let g = raw.grid;
    at("grid.min_mass_ev", MassGrid::new(g.min_mass_ev, f64::MAX, 2, g.spacing))?;
    let grid = at(
        "grid",
        MassGrid::new(g.min_mass_ev, g.max_mass_ev, g.points, g.spacing),
    )?;
    at("grid.points", grid.masses())?;

    Ok(ExperimentConfig {
        id: raw.id,
        omega,
        omega_source,
        generation,
        regeneration,
        optical_path,
        detector,
        tally,
        confidence_level: raw.confidence_level,
        cavity,
        psi_limit: raw.psi_limit_rad,
        grid,
        notes: raw.notes,
    })
}

/// Parses and validates a config document; `origin` only labels error messages.
pub fn parse_config(text: &str, origin: &Path) -> std::result::Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_path_buf(),
        message: e.message().to_string(),
    })?;
    Ok(validate(raw)?)
}

pub fn load_config(path: impl AsRef<Path>) -> std::result::Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}
