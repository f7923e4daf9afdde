//! Closed-form oscillation physics.
//!
//! Axion-like particles (mass `mₐ`, inverse two-photon coupling `M`) convert to
//! and from photons inside a homogeneous transverse field `B₀` of length `L`:
//!
//! ```text
//! p_a = (Δ_M L)² · sinc²(Δ_osc L / 2),   Δ_M = B₀ / 2M,   Δ_osc = mₐ² / 2ω
//! ```
//!
//! The same virtual oscillation produces an ellipticity
//!
//! ```text
//! ψ = (Δ_M² L / Δ_osc) · (1 − sin(Δ_osc L) / (Δ_osc L))
//! ```
//!
//! The sine argument is the dimensionless phase `Δ_osc L`; the form sometimes
//! printed with a bare `Δ_osc` is not dimensionally consistent. A Fabry-Perot
//! cavity multiplies ψ by `2F/π`.
//!
//! Paraphotons (mass `µ`, kinetic mixing `χ`) need no field:
//!
//! ```text
//! P_γ = 16 χ⁴ sin²(µ² L₁ / 4ω) sin²(µ² L₂ / 4ω)
//! ```
//!
//! The light is assumed polarized along the field, and scalar and pseudoscalar
//! couplings share these expressions.

use std::f64::consts::PI;

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::units::{self, SPEED_OF_LIGHT};

/// Below this |x| the sinc factor is evaluated from its Taylor series.
pub const SINC_SERIES_THRESHOLD: f64 = 1.0e-4;

/// Below this |x| `(1 − sinc x)/x` is evaluated from its Taylor series.
///
/// The direct form loses about `-log10(x²/6)` digits to cancellation, so the
/// switch happens much later than for sinc itself.
pub const ONE_MINUS_SINC_SERIES_THRESHOLD: f64 = 0.5;

/// One pulsed dipole magnet: peak field over an equivalent length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetSpec {
    b0_tesla: f64,
    length_m: f64,
    field_ev2: f64,
    length_inv_ev: f64,
}

impl MagnetSpec {
    pub fn new(b0_tesla: f64, length_m: f64) -> Result<Self> {
        let field_ev2 = units::tesla_to_ev2(b0_tesla)?;
        let length_m = require_positive("magnet length (m)", length_m)?;
        Ok(Self {
            b0_tesla,
            length_m,
            field_ev2,
            length_inv_ev: units::meter_to_inv_ev(length_m)?,
        })
    }

    pub fn b0_tesla(&self) -> f64 {
        self.b0_tesla
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    /// Field in eV².
    pub fn field_ev2(&self) -> f64 {
        self.field_ev2
    }

    /// Length in eV⁻¹.
    pub fn length_inv_ev(&self) -> f64 {
        self.length_inv_ev
    }

    /// `B₀L/2` in eV; the coupling-independent part of `Δ_M L`.
    pub fn half_field_length(&self) -> f64 {
        0.5 * self.field_ev2 * self.length_inv_ev
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxionParams {
    mass: f64,
    inverse_coupling: f64,
}

impl AxionParams {
    /// `mass` and `inverse_coupling` both in eV.
    pub fn new(mass: f64, inverse_coupling: f64) -> Result<Self> {
        Ok(Self {
            mass: require_non_negative("axion mass (eV)", mass)?,
            inverse_coupling: require_positive("inverse coupling M (eV)", inverse_coupling)?,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inverse_coupling(&self) -> f64 {
        self.inverse_coupling
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaphotonParams {
    mass: f64,
    mixing: f64,
}

impl ParaphotonParams {
    pub fn new(mass: f64, mixing: f64) -> Result<Self> {
        let mass = require_non_negative("paraphoton mass (eV)", mass)?;
        if !(0.0..1.0).contains(&mixing) {
            return Err(Error::domain("mixing chi", mixing, "must lie in [0, 1)"));
        }
        Ok(Self { mass, mixing })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mixing(&self) -> f64 {
        self.mixing
    }
}

/// Free-flight distances before (`l1`) and after (`l2`) the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalPath {
    l1_m: f64,
    l2_m: f64,
    l1_inv_ev: f64,
    l2_inv_ev: f64,
}

impl OpticalPath {
    pub fn new(l1_m: f64, l2_m: f64) -> Result<Self> {
        let l1_m = require_positive("l1 (m)", l1_m)?;
        let l2_m = require_positive("l2 (m)", l2_m)?;
        Ok(Self {
            l1_m,
            l2_m,
            l1_inv_ev: units::meter_to_inv_ev(l1_m)?,
            l2_inv_ev: units::meter_to_inv_ev(l2_m)?,
        })
    }

    pub fn l1_m(&self) -> f64 {
        self.l1_m
    }

    pub fn l2_m(&self) -> f64 {
        self.l2_m
    }

    pub fn l1_inv_ev(&self) -> f64 {
        self.l1_inv_ev
    }

    pub fn l2_inv_ev(&self) -> f64 {
        self.l2_inv_ev
    }
}

/// Fabry-Perot cavity used to enhance the ellipticity signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    length_m: f64,
    finesse: f64,
}

impl CavitySpec {
    pub fn new(length_m: f64, finesse: f64) -> Result<Self> {
        let cavity = Self {
            length_m: require_positive("cavity length (m)", length_m)?,
            finesse: require_positive("finesse", finesse)?,
        };
        // F·L can still overflow for absurd inputs.
        require_positive("photon lifetime (s)", cavity.lifetime_unchecked())?;
        Ok(cavity)
    }

    pub fn length_m(&self) -> f64 {
        self.length_m
    }

    pub fn finesse(&self) -> f64 {
        self.finesse
    }

    /// Effective number of passes, `2F/π`.
    pub fn enhancement(&self) -> f64 {
        2.0 * self.finesse / PI
    }

    fn lifetime_unchecked(&self) -> f64 {
        self.finesse * self.length_m / (PI * SPEED_OF_LIGHT)
    }
}

/// Reference magnetic birefringence values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceBirefringence {
    /// QED vacuum Δn per T² (rounded).
    pub qed_vacuum_per_t2: f64,
    /// Molecular nitrogen Δn at 1 atm and 273.15 K.
    pub nitrogen_at_1atm: f64,
    pub nitrogen_at_1atm_sigma: f64,
    /// Vacuum Δn/B² measured with 17 pulses at 9 T, T⁻².
    pub bmv_vacuum_per_t2: f64,
    pub bmv_vacuum_per_t2_sigma: f64,
}

pub const REFERENCE_BIREFRINGENCE: ReferenceBirefringence = ReferenceBirefringence {
    qed_vacuum_per_t2: 4.0e-24,
    nitrogen_at_1atm: -2.49e-13,
    nitrogen_at_1atm_sigma: 0.05e-13,
    bmv_vacuum_per_t2: -10.0e-17,
    bmv_vacuum_per_t2_sigma: 23.0e-17,
};

// Numerical helpers.

fn sinc_series(x: f64) -> f64 {
    let x2 = x * x;
    1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
}

fn sinc_direct(x: f64) -> f64 {
    x.sin() / x
}

/// `sin(x)/x`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < SINC_SERIES_THRESHOLD {
        sinc_series(x)
    } else {
        sinc_direct(x)
    }
}

fn one_minus_sinc_over_x_series(x: f64) -> f64 {
    // Σ_{k≥1} (−1)^{k+1} x^{2k−1} / (2k+1)!, eight terms reach 1e-18 relative at x = 0.5.
    let x2 = x * x;
    let mut term = x / 6.0;
    let mut sum = term;
    for k in 2..=8u32 {
        let k = f64::from(k);
        term *= -x2 / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
    }
    sum
}

fn one_minus_sinc_over_x_direct(x: f64) -> f64 {
    (1.0 - x.sin() / x) / x
}

/// `(1 − sinc x)/x`, the ellipticity mass shape. Odd in `x`, zero at the origin.
pub fn one_minus_sinc_over_x(x: f64) -> f64 {
    if x.abs() < ONE_MINUS_SINC_SERIES_THRESHOLD {
        one_minus_sinc_over_x_series(x)
    } else {
        one_minus_sinc_over_x_direct(x)
    }
}

/// `1 − sinc x`.
pub fn one_minus_sinc(x: f64) -> f64 {
    x * one_minus_sinc_over_x(x)
}

fn require_omega(omega: f64) -> Result<f64> {
    require_positive("photon energy omega (eV)", omega)
}

/// `Δ_M = B₀/2M` in eV for a field in tesla and `M` in eV.
pub fn delta_m(b0_tesla: f64, inverse_coupling: f64) -> Result<f64> {
    let field = units::tesla_to_ev2(b0_tesla)?;
    let m = require_positive("inverse coupling M (eV)", inverse_coupling)?;
    Ok(field / (2.0 * m))
}

/// `Δ_osc = mₐ²/2ω` in eV.
pub fn delta_osc(mass: f64, omega: f64) -> Result<f64> {
    let mass = require_non_negative("mass (eV)", mass)?;
    let omega = require_omega(omega)?;
    Ok(mass * mass / (2.0 * omega))
}

/// Mass-dependent amplitude factor `sinc(Δ_osc L/2)` of one conversion region.
pub fn axion_shape(magnet: &MagnetSpec, mass: f64, omega: f64) -> Result<f64> {
    let d_osc = delta_osc(mass, omega)?;
    Ok(sinc(0.5 * d_osc * magnet.length_inv_ev()))
}

/// Single-region photon → axion conversion probability `p_a`.
pub fn axion_conversion_probability(
    magnet: &MagnetSpec,
    axion: &AxionParams,
    omega: f64,
) -> Result<f64> {
    let shape = axion_shape(magnet, axion.mass(), omega)?;
    let amplitude = magnet.half_field_length() / axion.inverse_coupling() * shape;
    Ok(amplitude * amplitude)
}

/// Photon regeneration probability through a generation and a regeneration magnet.
pub fn axion_regeneration_probability(
    gen: &MagnetSpec,
    regen: &MagnetSpec,
    axion: &AxionParams,
    omega: f64,
) -> Result<f64> {
    Ok(axion_conversion_probability(gen, axion, omega)?
        * axion_conversion_probability(regen, axion, omega)?)
}

/// Oscillation phases `µ²L₁/4ω` and `µ²L₂/4ω`.
pub fn paraphoton_phases(path: &OpticalPath, mass: f64, omega: f64) -> Result<(f64, f64)> {
    let mass = require_non_negative("mass (eV)", mass)?;
    let omega = require_omega(omega)?;
    let k = mass * mass / (4.0 * omega);
    Ok((k * path.l1_inv_ev(), k * path.l2_inv_ev()))
}

/// Signed amplitude shape `sin φ₁ · sin φ₂`; `P_γ = 16χ⁴ · shape²`.
pub fn paraphoton_shape(path: &OpticalPath, mass: f64, omega: f64) -> Result<f64> {
    let (phi1, phi2) = paraphoton_phases(path, mass, omega)?;
    Ok(phi1.sin() * phi2.sin())
}

pub fn paraphoton_regeneration_probability(
    path: &OpticalPath,
    para: &ParaphotonParams,
    omega: f64,
) -> Result<f64> {
    let shape = paraphoton_shape(path, para.mass(), omega)?;
    let chi2 = para.mixing() * para.mixing();
    Ok(16.0 * chi2 * chi2 * shape * shape)
}

/// Coupling-independent ellipticity factor `(L/Δ_osc)(1 − sinc(Δ_osc L))` in eV⁻².
///
/// Computed as `L² · (1 − sinc x)/x` so that the massless limit is exactly zero.
pub fn ellipticity_shape(magnet: &MagnetSpec, mass: f64, omega: f64) -> Result<f64> {
    let d_osc = delta_osc(mass, omega)?;
    let l = magnet.length_inv_ev();
    Ok(l * l * one_minus_sinc_over_x(d_osc * l))
}

/// Ellipticity (rad) induced by virtual axion-like particles, single pass or
/// enhanced by `2F/π` when a cavity is given.
pub fn axion_ellipticity(
    magnet: &MagnetSpec,
    axion: &AxionParams,
    omega: f64,
    cavity: Option<&CavitySpec>,
) -> Result<f64> {
    let d_m = 0.5 * magnet.field_ev2() / axion.inverse_coupling();
    let psi = d_m * d_m * ellipticity_shape(magnet, axion.mass(), omega)?;
    Ok(cavity.map_or(psi, |c| psi * c.enhancement()))
}

/// Photon lifetime `τ = F L / (π c)` in seconds.
pub fn lifetime_from_finesse(cavity: &CavitySpec) -> f64 {
    cavity.lifetime_unchecked()
}

/// Finesse `F = π c τ / L`.
pub fn finesse_from_lifetime(tau: f64, length_m: f64) -> Result<f64> {
    let tau = require_positive("lifetime (s)", tau)?;
    let length_m = require_positive("cavity length (m)", length_m)?;
    Ok(PI * SPEED_OF_LIGHT * tau / length_m)
}

/// QED vacuum index anisotropy `Δn` at field `b` (tesla).
pub fn qed_vacuum_birefringence(b: f64) -> Result<f64> {
    let b = require_non_negative("field (T)", b)?;
    Ok(REFERENCE_BIREFRINGENCE.qed_vacuum_per_t2 * b * b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const OMEGA: f64 = 1.17;

    fn luli_magnet() -> MagnetSpec {
        MagnetSpec::new(12.0, 0.365).unwrap()
    }

    fn luli_path() -> OpticalPath {
        OpticalPath::new(20.2, 2.0).unwrap()
    }

    #[test]
    fn type_invariants() {
        assert!(MagnetSpec::new(-1.0, 1.0).is_err());
        assert!(MagnetSpec::new(1.0, 0.0).is_err());
        assert!(MagnetSpec::new(0.0, 1.0).is_ok());
        assert!(AxionParams::new(0.0, 0.0).is_err());
        assert!(AxionParams::new(-1e-3, 1.0).is_err());
        assert!(ParaphotonParams::new(1e-3, 1.0).is_err());
        assert!(ParaphotonParams::new(1e-3, -0.1).is_err());
        assert!(ParaphotonParams::new(1e-3, 0.0).is_ok());
        assert!(OpticalPath::new(0.0, 1.0).is_err());
        assert!(CavitySpec::new(1.0, 0.0).is_err());
        assert!(CavitySpec::new(f64::MAX, f64::MAX).is_err());
    }

    #[test]
    fn delta_m_examples() {
        // 2340 / (2 × 9.1e14)
        assert_relative_eq!(delta_m(12.0, 9.1e14).unwrap(), 1.285_714e-12, max_relative = 1e-6);
        assert_eq!(delta_m(0.0, 5.0).unwrap(), 0.0);
        assert_eq!(delta_m(1.0, 97.5).unwrap(), 1.0);
        assert!(delta_m(1.0, 0.0).is_err());
        assert!(delta_m(1.0, -1.0).is_err());
    }

    #[test]
    fn delta_osc_examples() {
        assert_relative_eq!(delta_osc(1e-3, OMEGA).unwrap(), 1e-6 / 2.34, max_relative = 1e-15);
        assert!((delta_osc(1e-3, OMEGA).unwrap() - 4.274e-7).abs() < 1e-10);
        assert_eq!(delta_osc(0.0, OMEGA).unwrap(), 0.0);
        assert_relative_eq!(
            delta_osc(2e-3, OMEGA).unwrap(),
            4.0 * delta_osc(1e-3, OMEGA).unwrap(),
            max_relative = 1e-15
        );
        assert!(delta_osc(1e-3, 0.0).is_err());
    }

    #[test]
    fn conversion_probability_low_mass() {
        // M such that Δ_M L = 2.346e-6: M = 2340 × 1.825e6 / (2 × 2.346e-6).
        let m = 2340.0 * 1.825e6 / (2.0 * 2.346e-6);
        let axion = AxionParams::new(0.0, m).unwrap();
        let p = axion_conversion_probability(&luli_magnet(), &axion, OMEGA).unwrap();
        assert_relative_eq!(p, 2.346e-6 * 2.346e-6, max_relative = 1e-12);
        assert!((p - 5.50e-12).abs() / 5.50e-12 < 1e-3);
        let big_p = axion_regeneration_probability(&luli_magnet(), &luli_magnet(), &axion, OMEGA)
            .unwrap();
        assert!((big_p - 3.03e-23).abs() / 3.03e-23 < 2e-3);
    }

    #[test]
    fn conversion_probability_first_node() {
        let magnet = luli_magnet();
        let node = (4.0 * PI * OMEGA / magnet.length_inv_ev()).sqrt();
        assert!((node - 2.84e-3).abs() / 2.84e-3 < 1e-3);
        let axion = AxionParams::new(node, 1e14).unwrap();
        let p = axion_conversion_probability(&magnet, &axion, OMEGA).unwrap();
        let envelope = (magnet.half_field_length() / 1e14).powi(2);
        assert!(p < 1e-30 * envelope);
    }

    #[test]
    fn decoupling_limit() {
        let axion = AxionParams::new(1e-3, 1e300).unwrap();
        assert!(axion_conversion_probability(&luli_magnet(), &axion, OMEGA).unwrap() < 1e-300);
        let psi = axion_ellipticity(&luli_magnet(), &axion, OMEGA, None).unwrap();
        assert!(psi < 1e-300);
    }

    #[test]
    fn regeneration_zero_field_and_factorization() {
        let off = MagnetSpec::new(0.0, 0.365).unwrap();
        let axion = AxionParams::new(1e-3, 1e12).unwrap();
        assert_eq!(
            axion_regeneration_probability(&off, &luli_magnet(), &axion, OMEGA).unwrap(),
            0.0
        );
        let other = MagnetSpec::new(9.0, 0.5).unwrap();
        let joint = axion_regeneration_probability(&luli_magnet(), &other, &axion, OMEGA).unwrap();
        let a = axion_conversion_probability(&luli_magnet(), &axion, OMEGA).unwrap();
        let b = axion_conversion_probability(&other, &axion, OMEGA).unwrap();
        assert_eq!(joint, a * b);
    }

    #[test]
    fn paraphoton_examples() {
        let path = luli_path();
        let zero = ParaphotonParams::new(1e-3, 0.0).unwrap();
        assert_eq!(paraphoton_regeneration_probability(&path, &zero, OMEGA).unwrap(), 0.0);

        let (phi1, _) = paraphoton_phases(&path, 1e-3, OMEGA).unwrap();
        assert!((phi1 - 21.58).abs() < 0.01);

        // Pick µ that puts φ₁ at π/2 and a path with L₂ = L₁ so both sines are 1.
        let sym = OpticalPath::new(20.2, 20.2).unwrap();
        let mu = (2.0 * PI * OMEGA / sym.l1_inv_ev()).sqrt();
        let para = ParaphotonParams::new(mu, 8.76e-7).unwrap();
        let p = paraphoton_regeneration_probability(&sym, &para, OMEGA).unwrap();
        assert_relative_eq!(p, 16.0 * 8.76e-7_f64.powi(4), max_relative = 1e-12);
        assert!((p - 9.4e-24).abs() / 9.4e-24 < 5e-3);
    }

    #[test]
    fn ellipticity_small_mass_taylor() {
        let magnet = MagnetSpec::new(9.0, 0.5).unwrap();
        let axion = AxionParams::new(1e-5, 1e10).unwrap();
        let psi = axion_ellipticity(&magnet, &axion, OMEGA, None).unwrap();
        let d_m = delta_m(9.0, 1e10).unwrap();
        let d_osc = delta_osc(1e-5, OMEGA).unwrap();
        let l = magnet.length_inv_ev();
        let taylor = d_m * d_m * d_osc * l.powi(3) / 6.0;
        assert!(((psi - taylor) / taylor).abs() < 1e-4);

        let massless = AxionParams::new(0.0, 1e10).unwrap();
        assert_eq!(axion_ellipticity(&magnet, &massless, OMEGA, None).unwrap(), 0.0);
    }

    #[test]
    fn ellipticity_matches_literal_form_at_moderate_mass() {
        // Independent evaluation of (Δ_M² L / Δ_osc)(1 − sin(Δ_osc L)/(Δ_osc L)).
        let magnet = MagnetSpec::new(9.0, 0.5).unwrap();
        let axion = AxionParams::new(3e-3, 1e8).unwrap();
        let d_m = 9.0 * 195.0 / (2.0 * 1e8);
        let d_osc = 9e-6 / (2.0 * OMEGA);
        let l = 0.5 * 5e6;
        let x = d_osc * l;
        let literal = d_m * d_m * l / d_osc * (1.0 - x.sin() / x);
        let psi = axion_ellipticity(&magnet, &axion, OMEGA, None).unwrap();
        assert_relative_eq!(psi, literal, max_relative = 1e-12);
    }

    #[test]
    fn ellipticity_over_mass_squared_converges() {
        let magnet = MagnetSpec::new(9.0, 0.5).unwrap();
        let ratio = |m: f64| {
            let a = AxionParams::new(m, 1e9).unwrap();
            axion_ellipticity(&magnet, &a, OMEGA, None).unwrap() / (m * m)
        };
        let reference = ratio(1e-7);
        for m in [1e-5, 3e-6, 1e-6, 3e-7] {
            assert!(((ratio(m) - reference) / reference).abs() < 1e-4);
        }
    }

    #[test]
    fn cavity_doubles_ellipticity() {
        let magnet = MagnetSpec::new(9.0, 0.5).unwrap();
        let axion = AxionParams::new(2e-3, 1e8).unwrap();
        let c1 = CavitySpec::new(2.237, 3000.0).unwrap();
        let c2 = CavitySpec::new(2.237, 6000.0).unwrap();
        let p1 = axion_ellipticity(&magnet, &axion, OMEGA, Some(&c1)).unwrap();
        let p2 = axion_ellipticity(&magnet, &axion, OMEGA, Some(&c2)).unwrap();
        assert_relative_eq!(p2, 2.0 * p1, max_relative = 1e-15);
        let bare = axion_ellipticity(&magnet, &axion, OMEGA, None).unwrap();
        assert_relative_eq!(p1, bare * 6000.0 / PI, max_relative = 1e-15);
    }

    #[test]
    fn cavity_lifetime_examples() {
        let c = CavitySpec::new(2.237, 80000.0).unwrap();
        let tau = lifetime_from_finesse(&c);
        assert!((tau - 190e-6).abs() / 190e-6 < 0.01);
        let c3 = CavitySpec::new(2.237, 3000.0).unwrap();
        assert!((lifetime_from_finesse(&c3) - 7.12e-6).abs() / 7.12e-6 < 0.01);
        assert_relative_eq!(lifetime_from_finesse(&c3), tau * 3000.0 / 80000.0, max_relative = 1e-14);

        let f = finesse_from_lifetime(190e-6, 2.237).unwrap();
        assert!((f - 80000.0).abs() / 80000.0 < 0.01);
        assert!(finesse_from_lifetime(0.0, 2.237).is_err());
        assert!(finesse_from_lifetime(1e-4, 0.0).is_err());
    }

    #[test]
    fn qed_birefringence_examples() {
        assert_eq!(qed_vacuum_birefringence(1.0).unwrap(), 4e-24);
        assert_eq!(qed_vacuum_birefringence(0.0).unwrap(), 0.0);
        assert_relative_eq!(qed_vacuum_birefringence(9.0).unwrap(), 3.24e-22, max_relative = 1e-15);
        assert!(qed_vacuum_birefringence(-1.0).is_err());
    }

    #[test]
    fn reference_constants() {
        let r = REFERENCE_BIREFRINGENCE;
        assert_eq!(r.nitrogen_at_1atm, -2.49e-13);
        assert_eq!(r.bmv_vacuum_per_t2, -1.0e-16);
        // compatible with zero
        assert!(r.bmv_vacuum_per_t2.abs() < r.bmv_vacuum_per_t2_sigma);
    }

    #[test]
    fn series_branches_agree_at_thresholds() {
        for x in [SINC_SERIES_THRESHOLD, -SINC_SERIES_THRESHOLD] {
            let (s, d) = (sinc_series(x), sinc_direct(x));
            assert!(((s - d) / d).abs() < 1e-12);
        }
        for x in [ONE_MINUS_SINC_SERIES_THRESHOLD, -ONE_MINUS_SINC_SERIES_THRESHOLD] {
            let (s, d) = (one_minus_sinc_over_x_series(x), one_minus_sinc_over_x_direct(x));
            assert!(((s - d) / d).abs() < 1e-12, "{s} vs {d}");
        }
        assert_eq!(sinc(0.0), 1.0);
        assert_eq!(one_minus_sinc(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn probabilities_within_envelopes(
            mass in 0.0f64..0.1,
            log_m in 6.0f64..16.0,
            chi in 0.0f64..0.999,
            b in 0.0f64..20.0,
            l in 0.01f64..5.0,
        ) {
            let magnet = MagnetSpec::new(b, l).unwrap();
            let axion = AxionParams::new(mass, 10f64.powf(log_m)).unwrap();
            let p = axion_conversion_probability(&magnet, &axion, OMEGA).unwrap();
            let env = (magnet.half_field_length() / axion.inverse_coupling()).powi(2);
            prop_assert!(p >= 0.0 && p <= env * (1.0 + 1e-15));
            let para = ParaphotonParams::new(mass, chi).unwrap();
            let pg = paraphoton_regeneration_probability(&luli_path(), &para, OMEGA).unwrap();
            prop_assert!(pg >= 0.0 && pg <= 16.0 * chi.powi(4) * (1.0 + 1e-15));
        }

        #[test]
        fn coupling_scaling_laws(mass in 1e-5f64..1e-2, log_m in 6.0f64..14.0, k in 1.1f64..10.0, chi in 1e-9f64..1e-2) {
            let magnet = luli_magnet();
            let m = 10f64.powf(log_m);
            let a1 = AxionParams::new(mass, m).unwrap();
            let a2 = AxionParams::new(mass, k * m).unwrap();
            let p1 = axion_conversion_probability(&magnet, &a1, OMEGA).unwrap();
            let p2 = axion_conversion_probability(&magnet, &a2, OMEGA).unwrap();
            if p1 > 0.0 {
                prop_assert!(((p2 * k * k - p1) / p1).abs() < 1e-12);
            }
            let e1 = axion_ellipticity(&magnet, &a1, OMEGA, None).unwrap();
            let e2 = axion_ellipticity(&magnet, &a2, OMEGA, None).unwrap();
            prop_assert!(((e2 * k * k - e1) / e1).abs() < 1e-12);

            let q1 = paraphoton_regeneration_probability(&luli_path(), &ParaphotonParams::new(mass, chi).unwrap(), OMEGA).unwrap();
            let q2 = paraphoton_regeneration_probability(&luli_path(), &ParaphotonParams::new(mass, chi / k).unwrap(), OMEGA).unwrap();
            if q1 > 0.0 {
                prop_assert!(((q2 * k.powi(4) - q1) / q1).abs() < 1e-12);
            }
        }

        #[test]
        fn identical_magnets_square(mass in 0.0f64..0.05, log_m in 6.0f64..14.0) {
            let magnet = luli_magnet();
            let a = AxionParams::new(mass, 10f64.powf(log_m)).unwrap();
            let p = axion_conversion_probability(&magnet, &a, OMEGA).unwrap();
            prop_assert_eq!(axion_regeneration_probability(&magnet, &magnet, &a, OMEGA).unwrap(), p * p);
        }

        #[test]
        fn nodes_of_every_order(k in 1u32..50) {
            let magnet = luli_magnet();
            let node = (4.0 * f64::from(k) * PI * OMEGA / magnet.length_inv_ev()).sqrt();
            let a = AxionParams::new(node, 1e12).unwrap();
            let env = (magnet.half_field_length() / 1e12).powi(2);
            prop_assert!(axion_conversion_probability(&magnet, &a, OMEGA).unwrap() < 1e-24 * env);
        }

        #[test]
        fn finesse_lifetime_inverse_pair(f in 1.0f64..1e6, l in 0.01f64..100.0) {
            let c = CavitySpec::new(l, f).unwrap();
            let back = finesse_from_lifetime(lifetime_from_finesse(&c), l).unwrap();
            prop_assert!(((back - f) / f).abs() < 1e-12);
        }
    }
}
