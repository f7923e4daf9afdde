//! Null-result counting statistics.
//!
//! With zero observed counts and a detector of efficiency `η`, the largest
//! number of signal photons still compatible with the observation at
//! confidence `CL` satisfies `(1 − η)^(n + 1) = 1 − CL`, i.e.
//! `n_missed = ln(1 − CL)/ln(1 − η) − 1`. Dividing by the number of effective
//! incident photons gives the upper regeneration probability.
//!
//! Dark counts do not enter the bound.

use crate::error::{require_non_negative, require_open_unit, require_positive, Error, Result};

/// Single-photon detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    eta_det: f64,
    dark_per_gate: f64,
    gate_ns: f64,
}

impl DetectorSpec {
    pub fn new(eta_det: f64, dark_per_gate: f64, gate_ns: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&dark_per_gate) {
            return Err(Error::domain(
                "dark count probability per gate",
                dark_per_gate,
                "must lie in [0, 1)",
            ));
        }
        Ok(Self {
            eta_det: require_open_unit("detection efficiency", eta_det)?,
            dark_per_gate,
            gate_ns: require_positive("gate duration (ns)", gate_ns)?,
        })
    }

    pub fn eta_det(&self) -> f64 {
        self.eta_det
    }

    pub fn dark_per_gate(&self) -> f64 {
        self.dark_per_gate
    }

    pub fn gate_ns(&self) -> f64 {
        self.gate_ns
    }
}

/// Which pulses count towards the effective photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseBasis {
    /// Only pulses fired with the magnets on (axion-like searches).
    FieldOn,
    /// Every pulse that reached the wall (paraphotons need no field).
    All,
}

impl PulseBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            PulseBasis::FieldOn => "field",
            PulseBasis::All => "total",
        }
    }
}

/// Campaign bookkeeping: pulse counts and the losses between laser and fibre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignTally {
    pulses_total: u64,
    pulses_with_field: u64,
    photons_per_pulse: f64,
    eta_coupling: f64,
    extra_loss: f64,
}

impl CampaignTally {
    pub fn new(
        pulses_total: u64,
        pulses_with_field: u64,
        photons_per_pulse: f64,
        eta_coupling: f64,
        extra_loss: f64,
    ) -> Result<Self> {
        if pulses_with_field > pulses_total {
            return Err(Error::domain(
                "pulses with field",
                pulses_with_field as f64,
                "must not exceed the total pulse count",
            ));
        }
        let in_unit_half_open = |name, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(v)
            } else {
                Err(Error::domain(name, v, "must lie in (0, 1]"))
            }
        };
        Ok(Self {
            pulses_total,
            pulses_with_field,
            photons_per_pulse: require_positive("photons per pulse", photons_per_pulse)?,
            eta_coupling: in_unit_half_open("fibre coupling efficiency", eta_coupling)?,
            extra_loss: in_unit_half_open("extra loss factor", extra_loss)?,
        })
    }

    pub fn pulses_total(&self) -> u64 {
        self.pulses_total
    }

    pub fn pulses_with_field(&self) -> u64 {
        self.pulses_with_field
    }

    pub fn photons_per_pulse(&self) -> f64 {
        self.photons_per_pulse
    }

    pub fn eta_coupling(&self) -> f64 {
        self.eta_coupling
    }

    pub fn extra_loss(&self) -> f64 {
        self.extra_loss
    }

    /// Photons per pulse that reach the detector fibre if regenerated with probability one.
    pub fn effective_photons_per_pulse(&self) -> f64 {
        self.photons_per_pulse * self.eta_coupling * self.extra_loss
    }

    pub fn pulses(&self, basis: PulseBasis) -> u64 {
        match basis {
            PulseBasis::FieldOn => self.pulses_with_field,
            PulseBasis::All => self.pulses_total,
        }
    }

    pub fn effective_photons_for(&self, basis: PulseBasis) -> f64 {
        self.pulses(basis) as f64 * self.effective_photons_per_pulse()
    }
}

/// Real-valued missed-photon bound, clamped at zero.
pub fn n_missed(confidence: f64, eta_det: f64) -> Result<f64> {
    let cl = require_open_unit("confidence level", confidence)?;
    let eta = require_open_unit("detection efficiency", eta_det)?;
    let n = (-cl).ln_1p() / (-eta).ln_1p() - 1.0;
    Ok(n.max(0.0))
}

/// Integer bound for reporting: the smallest whole count not below `n_missed`.
pub fn n_missed_bound(n_missed: f64) -> u64 {
    n_missed.max(0.0).ceil() as u64
}

/// `N_eff` over the field-on pulses.
pub fn effective_photons(tally: &CampaignTally) -> f64 {
    tally.effective_photons_for(PulseBasis::FieldOn)
}

/// `n_missed / N_eff`.
pub fn upper_probability(n_missed: f64, n_eff: f64) -> Result<f64> {
    let n = require_non_negative("n_missed", n_missed)?;
    let n_eff = require_positive("effective photon count", n_eff)?;
    Ok(n / n_eff)
}

/// Upper probability for a tally, confidence level and detector in one step.
pub fn upper_probability_for(
    tally: &CampaignTally,
    basis: PulseBasis,
    confidence: f64,
    detector: &DetectorSpec,
) -> Result<f64> {
    upper_probability(
        n_missed(confidence, detector.eta_det())?,
        tally.effective_photons_for(basis),
    )
}
