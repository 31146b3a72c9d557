//! Laboratory quantities mapped onto the dimensionless model parameters.
//!
//! ```text
//! α₀ = N_at σ / A
//! κ  = 2 √(⟨Jx⟩⟨Sx⟩) σ Γ / (A Δ),   ⟨Jx⟩ = N_at/2, ⟨Sx⟩ = N_ph/2
//! η  = N_ph σ Γ² / (A Δ²)
//! ε  = N_at σ Γ² / (A Δ²)
//! ```
//!
//! which imply `κ² = η α₀` and `ε = α₀ (Γ/Δ)²`. `Γ` is the HWHM natural
//! linewidth and `A` is both the illuminated area and the sample
//! cross-section.

use std::f64::consts::PI;

use log::warn;

use crate::dynamics::PassParams;
use crate::error::{Error, Result};

/// Relative tolerance on the parameter identities.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentalSetup {
    /// Resonant cross-section σ, cm².
    pub sigma_cm2: f64,
    /// Natural linewidth Γ (HWHM), Hz.
    pub gamma_hwhm_hz: f64,
    /// Detuning Δ from resonance, Hz.
    pub detuning_hz: f64,
    /// Cross-section A of the sample illuminated by the pulse, cm².
    pub area_cm2: f64,
    pub n_atoms: f64,
    pub n_photons: f64,
    /// Reflection loss per pass.
    pub reflectivity: f64,
}

/// Area of a circle of the given diameter.
pub fn cylinder_cross_section(diameter_cm: f64) -> f64 {
    PI * (0.5 * diameter_cm).powi(2)
}

impl ExperimentalSetup {
    /// Cold ⁸⁷Rb in a dipole trap: 2×10⁶ atoms in a cylinder of 100 μm
    /// diameter, σ = 10⁻⁹ cm², D1 line with 2.5 MHz HWHM, 2 % reflection
    /// loss. The detuning makes `ε = 2×10⁻³`, for which `η ∈ [0.01, 0.1]`
    /// needs 10⁷–10⁸ photons; the photon number is set for `η = 0.01`.
    pub fn rb87_example() -> Self {
        let mut setup = ExperimentalSetup {
            sigma_cm2: 1e-9,
            gamma_hwhm_hz: 2.5e6,
            detuning_hz: 0.0,
            area_cm2: cylinder_cross_section(100e-4),
            n_atoms: 2e6,
            n_photons: 0.0,
            reflectivity: 0.02,
        };
        setup.detuning_hz = detuning_for_epsilon(&setup, 2e-3);
        setup.n_photons = setup.n_atoms * 0.01 / 2e-3;
        setup
    }

    pub fn optical_depth(&self) -> f64 {
        self.n_atoms * self.sigma_cm2 / self.area_cm2
    }

    /// Atom density for a cylindrical sample of the given length.
    pub fn atom_density_cm3(&self, length_cm: f64) -> f64 {
        self.n_atoms / (self.area_cm2 * length_cm)
    }

    fn scattering_scale(&self) -> f64 {
        self.sigma_cm2 * self.gamma_hwhm_hz.powi(2) / (self.area_cm2 * self.detuning_hz.powi(2))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma", self.sigma_cm2),
            ("gamma_hwhm", self.gamma_hwhm_hz),
            ("detuning", self.detuning_hz),
            ("area", self.area_cm2),
            ("n_atoms", self.n_atoms),
            ("n_photons", self.n_photons),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::parameter(name, format!("{v} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.reflectivity) {
            return Err(Error::parameter(
                "reflectivity",
                format!("{} not in [0, 1)", self.reflectivity),
            ));
        }
        if self.detuning_hz / self.gamma_hwhm_hz < 10.0 {
            warn!(
                "detuning is only {:.1} linewidths; the dispersive approximation is poor",
                self.detuning_hz / self.gamma_hwhm_hz
            );
        }
        Ok(())
    }
}

/// Dimensionless model parameters derived from a setup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha0: f64,
    pub kappa: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub r: f64,
    pub eta_over_epsilon: f64,
}

impl ModelParams {
    pub fn pass_params(&self) -> Result<PassParams> {
        PassParams::new(self.kappa, self.eta, self.epsilon, self.r)
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn derive_model_params(setup: &ExperimentalSetup) -> Result<ModelParams> {
    setup.validate()?;
    let alpha0 = setup.optical_depth();
    let jx = setup.n_atoms / 2.0;
    let sx = setup.n_photons / 2.0;
    let kappa = 2.0 * (jx * sx).sqrt() * setup.sigma_cm2 * setup.gamma_hwhm_hz
        / (setup.area_cm2 * setup.detuning_hz);
    let eta = setup.n_photons * setup.scattering_scale();
    let epsilon = setup.n_atoms * setup.scattering_scale();

    if relative_gap(kappa * kappa, eta * alpha0) > IDENTITY_TOL {
        return Err(Error::parameter("kappa", "κ² = η α₀ violated"));
    }
    let ratio = setup.gamma_hwhm_hz / setup.detuning_hz;
    if relative_gap(epsilon, alpha0 * ratio * ratio) > IDENTITY_TOL {
        return Err(Error::parameter("epsilon", "ε = α₀ (Γ/Δ)² violated"));
    }
    let eta_over_epsilon = eta / epsilon;
    if relative_gap(eta_over_epsilon, setup.n_photons / setup.n_atoms) > IDENTITY_TOL {
        return Err(Error::parameter("eta", "η/ε = N_ph/N_at violated"));
    }
    if eta >= 1.0 || epsilon + setup.reflectivity >= 1.0 {
        return Err(Error::parameter(
            "eta",
            format!("decay probabilities out of range (η = {eta}, ε = {epsilon})"),
        ));
    }
    Ok(ModelParams {
        alpha0,
        kappa,
        eta,
        epsilon,
        r: setup.reflectivity,
        eta_over_epsilon,
    })
}

/// Photon number giving depumping probability `eta_target`, rounded to the
/// nearest integer. The setup's own photon number is ignored.
pub fn photons_for_target_eta(setup: &ExperimentalSetup, eta_target: f64) -> Result<u64> {
    if !(eta_target > 0.0 && eta_target <= 0.5) {
        return Err(Error::parameter(
            "eta_target",
            format!("{eta_target} not in (0, 0.5]"),
        ));
    }
    let mut probe = *setup;
    probe.n_photons = 1.0;
    probe.validate()?;
    Ok((eta_target / probe.scattering_scale()).round() as u64)
}

/// Detuning at which the photon absorption probability equals `epsilon`,
/// `Δ = Γ √(α₀/ε)`.
pub fn detuning_for_epsilon(setup: &ExperimentalSetup, epsilon: f64) -> f64 {
    setup.gamma_hwhm_hz * (setup.optical_depth() / epsilon).sqrt()
}
