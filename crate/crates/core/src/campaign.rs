//! Monte Carlo model of a pulsed photoregeneration campaign.
//!
//! Each laser pulse carries `N_i` photons, of which `N_i η_c ε` reach the
//! detector fibre if regenerated (`ε` folds in residual losses and timing
//! coincidence). For a particle hypothesis with regeneration probability `P`
//! the expected number of regenerated photons is `λ = N_i η_c ε P`; detected
//! signal counts are Poisson(`λ η_det`) and the single detection gate adds a
//! Bernoulli(`p_dark`) dark count.
//!
//! Randomness comes from ChaCha8 streams keyed by `(seed, pulse index)`, so a
//! record does not depend on the order or parallelism with which pulses are
//! simulated. Poisson variates are drawn by CDF inversion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_open_unit, Error, Result};
use crate::kernels::{self, AxionParams, MagnetSpec, OpticalPath, ParaphotonParams};
use crate::statistics::{CampaignTally, DetectorSpec};

/// Largest Poisson mean drawn with a single inversion; larger means are split.
const POISSON_CHUNK: f64 = 500.0;

/// Expected counts above this are rejected rather than sampled term by term.
const MAX_POISSON_MEAN: f64 = 1.0e8;

/// Trials per RNG stream in [`detection_probability_oracle`].
const ORACLE_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParticleHypothesis {
    Axion(AxionParams),
    Paraphoton(ParaphotonParams),
}

impl ParticleHypothesis {
    pub fn label(&self) -> String {
        match self {
            ParticleHypothesis::Axion(a) => {
                format!("axion mass={:e} eV M={:e} eV", a.mass(), a.inverse_coupling())
            }
            ParticleHypothesis::Paraphoton(p) => {
                format!("paraphoton mass={:e} eV chi={:e}", p.mass(), p.mixing())
            }
        }
    }
}

/// Magnets, free-flight path and photon energy of a light-shining-through-wall setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub generation: MagnetSpec,
    pub regeneration: MagnetSpec,
    pub path: OpticalPath,
    /// Photon energy, eV.
    pub omega: f64,
}

impl Geometry {
    /// Regeneration probability of a hypothesis for a pulse with the magnets on or off.
    pub fn regeneration_probability(
        &self,
        hypothesis: &ParticleHypothesis,
        field_on: bool,
    ) -> Result<f64> {
        match hypothesis {
            ParticleHypothesis::Axion(_) if !field_on => Ok(0.0),
            ParticleHypothesis::Axion(a) => kernels::axion_regeneration_probability(
                &self.generation,
                &self.regeneration,
                a,
                self.omega,
            ),
            ParticleHypothesis::Paraphoton(p) => {
                kernels::paraphoton_regeneration_probability(&self.path, p, self.omega)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignConfig {
    pub detector: DetectorSpec,
    pub tally: CampaignTally,
    pub hypothesis: Option<ParticleHypothesis>,
    pub geometry: Geometry,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub pulse: u64,
    pub field_on: bool,
    pub lambda_expected: f64,
    pub signal_counts: u64,
    pub dark_counts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignTotals {
    pub pulses: u64,
    pub pulses_with_field: u64,
    pub lambda_expected: f64,
    /// `Σ λ η_det`, the expected number of detected signal photons.
    pub expected_signal: f64,
    /// `pulses × p_dark`.
    pub expected_dark: f64,
    pub signal_counts: u64,
    pub dark_counts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub seed: u64,
    pub entries: Vec<PulseRecord>,
    pub totals: CampaignTotals,
}

impl CampaignRecord {
    pub fn is_all_zero(&self) -> bool {
        self.totals.signal_counts == 0 && self.totals.dark_counts == 0
    }
}

/// Whether pulse `index` of `total` fires with the magnets on.
///
/// The `with_field` field-on pulses are spread evenly through the campaign.
pub fn field_on_schedule(index: u64, total: u64, with_field: u64) -> bool {
    if total == 0 {
        return false;
    }
    let (i, n, w) = (u128::from(index), u128::from(total), u128::from(with_field));
    (i + 1) * w / n > i * w / n
}

fn pulse_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Poisson variate by sequential CDF inversion from a single uniform.
fn poisson_inversion(mean: f64, u: f64) -> u64 {
    let mut k = 0u64;
    let mut pmf = (-mean).exp();
    let mut cdf = pmf;
    // The k cap guards the tail where cdf stalls just below u in floating point.
    let cap = (mean + 40.0 * mean.sqrt() + 40.0) as u64;
    while u > cdf && k < cap {
        k += 1;
        pmf *= mean / k as f64;
        cdf += pmf;
    }
    k
}

/// Poisson variate with mean `mean`, using one uniform per chunk of at most
/// [`POISSON_CHUNK`].
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !(mean.is_finite() && mean >= 0.0) {
        return Err(Error::domain("Poisson mean", mean, "must be finite and >= 0"));
    }
    if mean > MAX_POISSON_MEAN {
        return Err(Error::domain("Poisson mean", mean, "too large to simulate"));
    }
    let mut remaining = mean;
    let mut total = 0;
    loop {
        let chunk = remaining.min(POISSON_CHUNK);
        total += poisson_inversion(chunk, rng.gen::<f64>());
        remaining -= chunk;
        if remaining <= 0.0 {
            return Ok(total);
        }
    }
}

fn simulate_pulse(config: &CampaignConfig, pulse: u64) -> Result<PulseRecord> {
    let tally = &config.tally;
    let field_on = field_on_schedule(pulse, tally.pulses_total(), tally.pulses_with_field());
    let probability = match &config.hypothesis {
        Some(h) => config.geometry.regeneration_probability(h, field_on)?,
        None => 0.0,
    };
    let lambda_expected = tally.effective_photons_per_pulse() * probability;

    let mut rng = pulse_rng(config.seed, pulse);
    let signal_counts = sample_poisson(lambda_expected * config.detector.eta_det(), &mut rng)?;
    let dark_counts = u64::from(rng.gen::<f64>() < config.detector.dark_per_gate());
    Ok(PulseRecord {
        pulse,
        field_on,
        lambda_expected,
        signal_counts,
        dark_counts,
    })
}

pub fn simulate_campaign(config: &CampaignConfig) -> Result<CampaignRecord> {
    let tally = &config.tally;
    let entries = (0..tally.pulses_total())
        .into_par_iter()
        .map(|pulse| simulate_pulse(config, pulse))
        .collect::<Result<Vec<_>>>()?;

    let lambda_expected: f64 = entries.iter().map(|e| e.lambda_expected).sum();
    let totals = CampaignTotals {
        pulses: tally.pulses_total(),
        pulses_with_field: entries.iter().filter(|e| e.field_on).count() as u64,
        lambda_expected,
        expected_signal: lambda_expected * config.detector.eta_det(),
        expected_dark: tally.pulses_total() as f64 * config.detector.dark_per_gate(),
        signal_counts: entries.iter().map(|e| e.signal_counts).sum(),
        dark_counts: entries.iter().map(|e| e.dark_counts).sum(),
    };
    Ok(CampaignRecord {
        seed: config.seed,
        entries,
        totals,
    })
}

/// Fraction of `trials` in which at least one of `n_photons` photons is
/// detected, each independently with probability `eta`.
pub fn detection_probability_oracle(eta: f64, n_photons: u64, trials: u64, seed: u64) -> Result<f64> {
    let eta = require_open_unit("detection efficiency", eta)?;
    if trials == 0 {
        return Err(Error::domain("trials", 0.0, "must be at least 1"));
    }
    let blocks = trials.div_ceil(ORACLE_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = pulse_rng(seed, block);
            let start = block * ORACLE_BLOCK;
            let len = ORACLE_BLOCK.min(trials - start);
            (0..len)
                .filter(|_| (0..n_photons).any(|_| rng.gen::<f64>() < eta))
                .count() as u64
        })
        .sum();
    Ok(hits as f64 / trials as f64)
}
