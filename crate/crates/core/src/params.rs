//! Physical parameter records shared by the simulation and analysis modules.
//!
//! All rates and frequencies are angular (rad/s). Conversion from ordinary
//! frequency happens at the edges (configuration files, CLI flags).

use crate::consts::{HBAR, K_B};
use crate::error::{ensure_param, Result};

/// One mechanical mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeParams {
    /// Angular frequency, rad/s.
    pub omega_m: f64,
    /// Linear energy damping rate, rad/s.
    pub gamma_m: f64,
    /// Single-photon coupling rate, rad/s.
    pub g0: f64,
    /// Effective mass, kg.
    pub m_eff: f64,
    /// Nonlinear (amplitude-dependent) energy damping coefficient, 1/(J·s).
    pub beta_nl: f64,
    pub label: String,
}

impl ModeParams {
    /// Mode with linear damping given through the quality factor.
    pub fn from_quality(label: &str, omega_m: f64, quality: f64, g0: f64, m_eff: f64) -> Self {
        Self {
            omega_m,
            gamma_m: omega_m / quality,
            g0,
            m_eff,
            beta_nl: 0.0,
            label: label.to_owned(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_param!(
            self.omega_m.is_finite() && self.omega_m > 0.0,
            "mode {:?}: omega_m must be positive, got {}",
            self.label,
            self.omega_m
        );
        ensure_param!(
            self.gamma_m.is_finite() && self.gamma_m >= 0.0,
            "mode {:?}: gamma_m must be non-negative, got {}",
            self.label,
            self.gamma_m
        );
        ensure_param!(
            self.m_eff.is_finite() && self.m_eff > 0.0,
            "mode {:?}: m_eff must be positive, got {}",
            self.label,
            self.m_eff
        );
        ensure_param!(
            self.g0.is_finite() && self.g0 >= 0.0,
            "mode {:?}: g0 must be non-negative, got {}",
            self.label,
            self.g0
        );
        ensure_param!(
            self.beta_nl.is_finite() && self.beta_nl >= 0.0,
            "mode {:?}: beta_nl must be non-negative, got {}",
            self.label,
            self.beta_nl
        );
        Ok(())
    }

    /// Ω_m/Γ_m; infinite for an undamped mode.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Zero-point fluctuation amplitude sqrt(ħ / 2 m Ω), m.
    pub fn x_zp(&self) -> f64 {
        (HBAR / (2.0 * self.m_eff * self.omega_m)).sqrt()
    }

    /// Frequency pull factor G = g0 / x_zp, rad/(s·m).
    pub fn pull_factor(&self) -> f64 {
        self.g0 / self.x_zp()
    }

    /// Thermal displacement variance k_B T / (m Ω²), m².
    pub fn thermal_variance(&self, temperature: f64) -> f64 {
        K_B * temperature / (self.m_eff * self.omega_m * self.omega_m)
    }
}

/// Optical cavity operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    /// Total energy decay rate (full linewidth), rad/s.
    pub kappa: f64,
    /// Operating relative detuning ν0 = 2Δ/κ.
    pub nu0: f64,
    /// Intracavity photon number on resonance.
    pub n_c0: f64,
    /// Intracavity phase on resonance, rad.
    pub phi0: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        ensure_param!(
            self.kappa.is_finite() && self.kappa > 0.0,
            "kappa must be positive, got {}",
            self.kappa
        );
        ensure_param!(self.nu0.is_finite(), "nu0 must be finite");
        ensure_param!(
            self.n_c0.is_finite() && self.n_c0 >= 0.0,
            "n_c0 must be non-negative, got {}",
            self.n_c0
        );
        Ok(())
    }

    /// Mean intracavity photon number at the operating detuning.
    pub fn mean_photon_number(&self) -> f64 {
        self.n_c0 * crate::transduction::lorentzian_response(self.nu0)
    }

    /// Cooperativity 4 g0² n̄_c / (κ Γ_m) at the operating detuning.
    pub fn cooperativity(&self, mode: &ModeParams) -> f64 {
        4.0 * mode.g0 * mode.g0 * self.mean_photon_number() / (self.kappa * mode.gamma_m)
    }
}

/// Thermal bath and extraneous noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BathParams {
    /// Kelvin.
    pub temperature: f64,
    pub seed: u64,
    /// Single-sided PSD of white relative-detuning noise, 1/Hz.
    pub classical_detuning_noise_psd: f64,
}

impl BathParams {
    pub fn thermal(temperature: f64, seed: u64) -> Self {
        Self {
            temperature,
            seed,
            classical_detuning_noise_psd: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_param!(
            self.temperature.is_finite() && self.temperature >= 0.0,
            "temperature must be non-negative, got {}",
            self.temperature
        );
        ensure_param!(
            self.classical_detuning_noise_psd.is_finite()
                && self.classical_detuning_noise_psd >= 0.0,
            "classical detuning noise PSD must be non-negative"
        );
        Ok(())
    }
}

/// Detection chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorParams {
    /// Total detection efficiency in [0, 1].
    pub eta_det: f64,
    /// Detected photons per second on resonance.
    pub photon_flux: f64,
    /// Photocurrent on resonance (arbitrary units).
    pub i_max: f64,
    /// Background photocurrent (same units).
    pub i_bg: f64,
    pub shot_noise: bool,
}

impl DetectorParams {
    /// Noiseless unit-scale detector: I = |L(ν)|².
    pub fn ideal() -> Self {
        Self {
            eta_det: 1.0,
            photon_flux: 0.0,
            i_max: 1.0,
            i_bg: 0.0,
            shot_noise: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_param!(
            (0.0..=1.0).contains(&self.eta_det),
            "eta_det must lie in [0, 1], got {}",
            self.eta_det
        );
        ensure_param!(
            self.i_max.is_finite() && self.i_bg.is_finite(),
            "calibration currents must be finite"
        );
        Ok(())
    }

    /// Errors unless the on-resonance current exceeds the background.
    pub fn check_calibration(&self) -> Result<()> {
        if !(self.i_max > self.i_bg) {
            return Err(crate::Error::InvalidParameter(format!(
                "calibration requires i_max > i_bg, got i_max = {}, i_bg = {}",
                self.i_max, self.i_bg
            )));
        }
        Ok(())
    }
}
