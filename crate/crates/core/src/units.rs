//! Conversion between laboratory units and natural units (ħ = c = 1, energies in eV).
//!
//! The two field/length factors are the rounded conventions commonly used in
//! photoregeneration analyses, `1 T ≡ 195 eV²` and `1 m ≡ 5×10⁶ eV⁻¹`. They are
//! treated as exact definitions so that reference numbers reproduce bit for bit.
//! Against full-precision constants (195.35 eV² and 5.0677×10⁶ eV⁻¹) they are
//! low by about 0.2% and 1.3% respectively.
//!
//! Every quantity is converted once, when a domain type is built; kernels only
//! ever see eV powers.

use crate::error::{require_finite, require_non_negative, require_positive, Result};

/// Field conversion: eV² per tesla.
pub const EV2_PER_TESLA: f64 = 195.0;

/// Length conversion: eV⁻¹ per meter.
pub const INV_EV_PER_METER: f64 = 5.0e6;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// ħc in eV·m, full precision. Only used to turn a wavelength into a photon energy.
pub const HBAR_C_EV_M: f64 = 197.326_980_4e-9;

/// Time conversion: eV⁻¹ per second, consistent with [`INV_EV_PER_METER`].
pub const INV_EV_PER_SECOND: f64 = SPEED_OF_LIGHT * INV_EV_PER_METER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabUnit {
    Tesla,
    Meter,
    Second,
    Electronvolt,
    Dimensionless,
}

impl LabUnit {
    /// Multiplicative factor to the natural-unit value.
    pub fn natural_factor(self) -> f64 {
        match self {
            LabUnit::Tesla => EV2_PER_TESLA,
            LabUnit::Meter => INV_EV_PER_METER,
            LabUnit::Second => INV_EV_PER_SECOND,
            LabUnit::Electronvolt | LabUnit::Dimensionless => 1.0,
        }
    }

    /// Natural-unit dimension, for display.
    pub fn natural_dimension(self) -> &'static str {
        match self {
            LabUnit::Tesla => "eV^2",
            LabUnit::Meter | LabUnit::Second => "eV^-1",
            LabUnit::Electronvolt => "eV",
            LabUnit::Dimensionless => "1",
        }
    }
}

/// A finite value tagged with its laboratory unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabQuantity {
    value: f64,
    unit: LabUnit,
}

impl LabQuantity {
    pub fn new(value: f64, unit: LabUnit) -> Result<Self> {
        let value = match unit {
            LabUnit::Tesla => require_non_negative("field", value)?,
            LabUnit::Meter => require_non_negative("length", value)?,
            _ => require_finite("value", value)?,
        };
        Ok(Self { value, unit })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn unit(&self) -> LabUnit {
        self.unit
    }

    pub fn to_natural(&self) -> f64 {
        self.value * self.unit.natural_factor()
    }
}

/// Magnetic field in tesla to eV².
pub fn tesla_to_ev2(b: f64) -> Result<f64> {
    Ok(EV2_PER_TESLA * require_non_negative("field (T)", b)?)
}

/// Length in meters to eV⁻¹.
pub fn meter_to_inv_ev(l: f64) -> Result<f64> {
    Ok(INV_EV_PER_METER * require_non_negative("length (m)", l)?)
}

/// Time in seconds to eV⁻¹.
pub fn second_to_inv_ev(t: f64) -> Result<f64> {
    Ok(INV_EV_PER_SECOND * require_non_negative("time (s)", t)?)
}

/// Photon energy `2πħc/λ` in eV for a vacuum wavelength in meters.
pub fn photon_energy_from_wavelength(lambda: f64) -> Result<f64> {
    let lambda = require_positive("wavelength (m)", lambda)?;
    Ok(2.0 * std::f64::consts::PI * HBAR_C_EV_M / lambda)
}
