//! Exclusion curves.
//!
//! Every probability handled here factors into a power of the coupling times a
//! mass-dependent shape, so each bound is inverted in closed form:
//!
//! * axion-like regeneration, `p_gen · p_regen = (h_g s_g)² (h_r s_r)² / M⁴`, with
//!   `h = B₀L/2` and `s = sinc(Δ_osc L/2)`, gives `M = √(h_g |s_g| h_r |s_r|) / P^¼`;
//! * paraphoton regeneration gives `χ = (P/16)^¼ / √|sin φ₁ sin φ₂|`;
//! * cavity ellipticity gives `M = (B₀/2) √((2F/π) · shape / ψ_limit)`.
//!
//! Where the shape factor falls below [`NODE_THRESHOLD`] (or a mixing bound
//! reaches one) the point is reported as unconstrained and carries no bound.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_open_unit, require_positive, Error, Result};
use crate::kernels::{self, CavitySpec, MagnetSpec, OpticalPath};

/// Shape factors with smaller magnitude leave the coupling unconstrained.
pub const NODE_THRESHOLD: f64 = 1.0e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    Logarithmic,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassGrid {
    min_mass: f64,
    max_mass: f64,
    points: usize,
    spacing: GridSpacing,
}

impl MassGrid {
    pub fn new(min_mass: f64, max_mass: f64, points: usize, spacing: GridSpacing) -> Result<Self> {
        let min_mass = require_positive("grid min mass (eV)", min_mass)?;
        let max_mass = require_positive("grid max mass (eV)", max_mass)?;
        if max_mass <= min_mass {
            return Err(Error::domain(
                "grid max mass (eV)",
                max_mass,
                "must exceed the minimum mass",
            ));
        }
        if points < 2 {
            return Err(Error::domain("grid points", points as f64, "must be at least 2"));
        }
        Ok(Self {
            min_mass,
            max_mass,
            points,
            spacing,
        })
    }

    /// Default grid: 2000 logarithmic points.
    pub fn logarithmic(min_mass: f64, max_mass: f64) -> Result<Self> {
        Self::new(min_mass, max_mass, 2000, GridSpacing::Logarithmic)
    }

    pub fn min_mass(&self) -> f64 {
        self.min_mass
    }

    pub fn max_mass(&self) -> f64 {
        self.max_mass
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    /// Grid masses with both endpoints reproduced exactly.
    pub fn masses(&self) -> Result<Vec<f64>> {
        let last = self.points - 1;
        let step = |i: usize| i as f64 / last as f64;
        let masses: Vec<f64> = (0..self.points)
            .map(|i| match i {
                0 => self.min_mass,
                i if i == last => self.max_mass,
                i => match self.spacing {
                    GridSpacing::Linear => self.min_mass + (self.max_mass - self.min_mass) * step(i),
                    GridSpacing::Logarithmic => {
                        let (a, b) = (self.min_mass.ln(), self.max_mass.ln());
                        (a + (b - a) * step(i)).exp()
                    }
                },
            })
            .collect();
        if masses.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain(
                "grid points",
                self.points as f64,
                "too many points to keep masses strictly increasing",
            ));
        }
        Ok(masses)
    }
}

/// Which search a curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Axion,
    Paraphoton,
    Ellipticity,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Axion => "axion",
            CurveKind::Paraphoton => "paraphoton",
            CurveKind::Ellipticity => "ellipticity",
        }
    }

    /// `true` when a larger bound is a stronger constraint (inverse couplings `M`).
    pub fn larger_is_stronger(self) -> bool {
        !matches!(self, CurveKind::Paraphoton)
    }

    pub fn coupling_name(self) -> &'static str {
        if self.larger_is_stronger() {
            "inverse_coupling_ev"
        } else {
            "mixing"
        }
    }

    /// Orders two bounds from strongest to weakest.
    fn strength_order(self, a: f64, b: f64) -> Ordering {
        if self.larger_is_stronger() {
            b.total_cmp(&a)
        } else {
            a.total_cmp(&b)
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mass: f64,
    /// `None` where the point is unconstrained.
    pub bound: Option<f64>,
}

impl CurvePoint {
    pub fn constrained(&self) -> bool {
        self.bound.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub experiment: String,
    pub kind: CurveKind,
    /// Name of the inverted quantity: `probability` or `psi_limit`.
    pub input_name: String,
    pub input_value: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionCurve {
    pub metadata: CurveMetadata,
    pub points: Vec<CurvePoint>,
}

impl ExclusionCurve {
    pub fn kind(&self) -> CurveKind {
        self.metadata.kind
    }

    pub fn with_experiment(mut self, id: impl Into<String>) -> Self {
        self.metadata.experiment = id.into();
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.metadata.notes.push(note.into());
        self
    }

    pub fn constrained_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .filter_map(|p| p.bound.map(|b| (p.mass, b)))
    }
}

fn keep_bound(bound: f64) -> Option<f64> {
    (bound.is_finite() && bound > 0.0).then_some(bound)
}

fn build_curve(
    kind: CurveKind,
    input_name: &str,
    input_value: f64,
    grid: &MassGrid,
    notes: Vec<String>,
    bound_at: impl Fn(f64) -> Result<Option<f64>> + Sync,
) -> Result<ExclusionCurve> {
    let masses = grid.masses()?;
    let points = masses
        .par_iter()
        .map(|&mass| bound_at(mass).map(|bound| CurvePoint { mass, bound }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExclusionCurve {
        metadata: CurveMetadata {
            experiment: String::new(),
            kind,
            input_name: input_name.to_string(),
            input_value,
            notes,
        },
        points,
    })
}

/// Lower bound on `M` (eV) at one mass, or `None` at an oscillation node.
pub fn axion_bound(
    p_upper: f64,
    gen: &MagnetSpec,
    regen: &MagnetSpec,
    omega: f64,
    mass: f64,
) -> Result<Option<f64>> {
    let p_upper = require_open_unit("upper probability", p_upper)?;
    let s_gen = kernels::axion_shape(gen, mass, omega)?.abs();
    let s_regen = kernels::axion_shape(regen, mass, omega)?.abs();
    if s_gen < NODE_THRESHOLD || s_regen < NODE_THRESHOLD {
        return Ok(None);
    }
    let product = gen.half_field_length() * s_gen * regen.half_field_length() * s_regen;
    Ok(keep_bound(product.sqrt() / p_upper.powf(0.25)))
}

pub fn axion_limit_curve(
    p_upper: f64,
    gen: &MagnetSpec,
    regen: &MagnetSpec,
    omega: f64,
    grid: &MassGrid,
) -> Result<ExclusionCurve> {
    require_open_unit("upper probability", p_upper)?;
    let mut notes = vec!["bound = lower limit on inverse coupling M in eV".to_string()];
    if gen != regen {
        notes.push("distinct generation and regeneration magnets".to_string());
    }
    build_curve(CurveKind::Axion, "probability", p_upper, grid, notes, |m| {
        axion_bound(p_upper, gen, regen, omega, m)
    })
}

/// Mass-independent best mixing bound `(P/16)^¼`, reached where both sines are ±1.
pub fn paraphoton_envelope_bound(p_upper: f64) -> Result<f64> {
    let p_upper = require_open_unit("upper probability", p_upper)?;
    Ok((p_upper / 16.0).powf(0.25))
}

/// Upper bound on `χ` at one mass, or `None` at a node or where it would reach one.
pub fn paraphoton_bound(
    p_upper: f64,
    path: &OpticalPath,
    omega: f64,
    mass: f64,
) -> Result<Option<f64>> {
    let envelope = paraphoton_envelope_bound(p_upper)?;
    let shape = kernels::paraphoton_shape(path, mass, omega)?.abs();
    if shape < NODE_THRESHOLD {
        return Ok(None);
    }
    Ok(keep_bound(envelope / shape.sqrt()).filter(|&chi| chi < 1.0))
}

pub fn paraphoton_limit_curve(
    p_upper: f64,
    path: &OpticalPath,
    omega: f64,
    grid: &MassGrid,
) -> Result<ExclusionCurve> {
    require_open_unit("upper probability", p_upper)?;
    let notes = vec!["bound = upper limit on kinetic mixing chi".to_string()];
    build_curve(CurveKind::Paraphoton, "probability", p_upper, grid, notes, |m| {
        paraphoton_bound(p_upper, path, omega, m)
    })
}

/// Lower bound on `M` (eV) from a null ellipticity measurement at one mass.
pub fn ellipticity_bound(
    psi_limit: f64,
    magnet: &MagnetSpec,
    cavity: &CavitySpec,
    omega: f64,
    mass: f64,
) -> Result<Option<f64>> {
    let psi_limit = require_positive("ellipticity limit (rad)", psi_limit)?;
    let shape = kernels::ellipticity_shape(magnet, mass, omega)?;
    let bound = 0.5 * magnet.field_ev2() * (cavity.enhancement() * shape / psi_limit).sqrt();
    Ok(keep_bound(bound))
}

pub fn ellipticity_limit_curve(
    psi_limit: f64,
    magnet: &MagnetSpec,
    cavity: &CavitySpec,
    omega: f64,
    grid: &MassGrid,
) -> Result<ExclusionCurve> {
    require_positive("ellipticity limit (rad)", psi_limit)?;
    let notes = vec![
        "bound = lower limit on inverse coupling M in eV".to_string(),
        format!("cavity finesse {:e}", cavity.finesse()),
    ];
    build_curve(CurveKind::Ellipticity, "psi_limit", psi_limit, grid, notes, |m| {
        ellipticity_bound(psi_limit, magnet, cavity, omega, m)
    })
}

/// How a band of per-mass bounds is collapsed to one number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BandConvention {
    /// Strongest bound in the band (smallest χ, largest M).
    EnvelopeBest,
    /// Weakest constrained bound (largest χ, smallest M).
    WorstConstrained,
    /// Quantile over bounds ordered strongest first: `q = 0` is
    /// `EnvelopeBest`, `q = 1` is `WorstConstrained`.
    Quantile(f64),
}

impl fmt::Display for BandConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandConvention::EnvelopeBest => f.write_str("envelope_best"),
            BandConvention::WorstConstrained => f.write_str("worst_constrained"),
            BandConvention::Quantile(q) => write!(f, "quantile({q})"),
        }
    }
}

impl FromStr for BandConvention {
    type Err = Error;

    /// Accepts `envelope_best`, `worst_constrained`, `quantile(q)` or `quantile:q`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("convention", format!("unknown band convention `{s}`"));
        match s {
            "envelope_best" => Ok(BandConvention::EnvelopeBest),
            "worst_constrained" => Ok(BandConvention::WorstConstrained),
            _ => {
                let q = s
                    .strip_prefix("quantile(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("quantile:"))
                    .ok_or_else(bad)?
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::config("convention", "quantile must lie in [0, 1]"));
                }
                Ok(BandConvention::Quantile(q))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub kind: CurveKind,
    pub band_min: f64,
    pub band_max: f64,
    pub convention: BandConvention,
    pub bound: f64,
    pub constrained_points: usize,
}

pub fn band_summary(
    curve: &ExclusionCurve,
    band_min: f64,
    band_max: f64,
    convention: BandConvention,
) -> Result<BandSummary> {
    let band_min = require_positive("band min (eV)", band_min)?;
    let band_max = require_positive("band max (eV)", band_max)?;
    if band_max < band_min {
        return Err(Error::domain("band max (eV)", band_max, "must not be below band min"));
    }
    if let (Some(first), Some(last)) = (curve.points.first(), curve.points.last()) {
        if band_min < first.mass * (1.0 - 1e-12) || band_max > last.mass * (1.0 + 1e-12) {
            return Err(Error::domain(
                "band (eV)",
                if band_min < first.mass { band_min } else { band_max },
                "band must lie within the curve's mass range",
            ));
        }
    }
    let kind = curve.kind();
    let mut bounds: Vec<f64> = curve
        .constrained_points()
        .filter(|&(m, _)| m >= band_min && m <= band_max)
        .map(|(_, b)| b)
        .collect();
    if bounds.is_empty() {
        return Err(Error::EmptyBand {
            min: band_min,
            max: band_max,
        });
    }
    bounds.sort_by(|&a, &b| kind.strength_order(a, b));
    let q = match convention {
        BandConvention::EnvelopeBest => 0.0,
        BandConvention::WorstConstrained => 1.0,
        BandConvention::Quantile(q) => {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::domain("quantile", q, "must lie in [0, 1]"));
            }
            q
        }
    };
    Ok(BandSummary {
        kind,
        band_min,
        band_max,
        convention,
        bound: interpolated_quantile(&bounds, q),
        constrained_points: bounds.len(),
    })
}

/// Linear interpolation between order statistics of an already ordered slice.
fn interpolated_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
