use num_complex::Complex64;

use crate::consts::{HBAR, TAU};
use crate::error::{ensure_param, Result};
use crate::params::ModeParams;
use crate::spectral::Spectrum;
use crate::trace::UnitTag;

/// Inputs of the linearized direct-detection spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPsdParams {
    /// Total cavity decay rate κ, rad/s.
    pub kappa_total: f64,
    /// Decay rate into the transmission port κ_t, rad/s.
    pub kappa_t: f64,
    /// Other loss channels, rad/s.
    pub kappa_other: f64,
    /// Laser detuning Δ, rad/s.
    pub detuning: f64,
    pub mode: ModeParams,
    /// Mean intracavity photon number.
    pub n_c: f64,
    /// Double-sided PSD of cavity-frequency noise, rad²/s²/Hz.
    pub s_delta: f64,
    /// Double-sided thermal force PSD, N²/Hz.
    pub thermal_force_psd: f64,
    pub eta_det: f64,
}

impl ModelPsdParams {
    pub fn validate(&self) -> Result<()> {
        self.mode.validate()?;
        for (name, v) in [
            ("kappa_total", self.kappa_total),
            ("kappa_t", self.kappa_t),
            ("kappa_other", self.kappa_other),
            ("n_c", self.n_c),
            ("s_delta", self.s_delta),
            ("thermal_force_psd", self.thermal_force_psd),
        ] {
            ensure_param!(
                v.is_finite() && v >= 0.0,
                "{name} must be non-negative, got {v}"
            );
        }
        ensure_param!(self.kappa_total > 0.0, "kappa_total must be positive");
        ensure_param!(
            self.kappa_t + self.kappa_other <= self.kappa_total * (1.0 + 1e-12),
            "kappa_t + kappa_other exceeds kappa_total"
        );
        ensure_param!(self.detuning.is_finite(), "detuning must be finite");
        ensure_param!(
            (0.0..=1.0).contains(&self.eta_det),
            "eta_det must lie in [0, 1], got {}",
            self.eta_det
        );
        Ok(())
    }

    fn chi_c(&self, omega: f64) -> Complex64 {
        Complex64::new(self.kappa_total / 2.0, -self.detuning - omega).inv()
    }

    fn chi_m(&self, omega: f64) -> Complex64 {
        let m = &self.mode;
        Complex64::new(m.omega_m * m.omega_m - omega * omega, -omega * m.gamma_m).inv() / m.m_eff
    }

    /// Double-sided PSD of the transmitted amplitude quadrature at `omega`.
    fn amplitude_psd(&self, omega: f64) -> f64 {
        let g = self.mode.pull_factor();
        let sqrt2 = std::f64::consts::SQRT_2;
        let chi_minus = self.chi_c(-omega).conj();
        let chi_x = Complex64::i() * (self.chi_c(omega) - chi_minus) / sqrt2;
        let chi_m = self.chi_m(omega);
        let d = 1.0 - HBAR * g * g * self.n_c * sqrt2 * chi_x * chi_m;
        let driven = chi_x.norm_sqr() * self.n_c * self.s_delta
            + g * g * self.n_c * (chi_x * chi_m).norm_sqr() * self.thermal_force_psd
            + 0.5 * (self.kappa_total - self.kappa_t) * chi_minus.norm_sqr();
        let direct = (1.0 / sqrt2 - self.kappa_t * chi_minus / (sqrt2 * d)).norm_sqr();
        self.kappa_t / d.norm_sqr() * driven + direct
    }

    /// Symmetrized photocurrent PSD in shot-noise units at `omega` (rad/s).
    pub fn snu(&self, omega: f64) -> f64 {
        let sym = 0.5 * (self.amplitude_psd(omega) + self.amplitude_psd(-omega));
        1.0 - self.eta_det + 2.0 * self.eta_det * sym
    }
}

/// Model spectrum in shot-noise units on arbitrary angular frequencies.
pub fn model_psd_values(params: &ModelPsdParams, omegas: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    Ok(omegas.iter().map(|&w| params.snu(w)).collect())
}

/// Model spectrum in shot-noise units on a uniform grid `ω_k = k Δω`
/// starting at zero.
///
/// The linearized direct-detection spectrum of the transmitted amplitude
/// quadrature, with the mechanical loop closed through radiation pressure,
/// is symmetrized in ±ω and calibrated as `1 − η + 2η S̄_X(ω)`.
pub fn model_psd(params: &ModelPsdParams, omega_grid: &[f64]) -> Result<Spectrum> {
    ensure_param!(
        omega_grid.len() >= 2,
        "frequency grid needs at least two points"
    );
    let step = omega_grid[1] - omega_grid[0];
    ensure_param!(
        omega_grid[0] == 0.0 && step > 0.0,
        "frequency grid must start at 0 and increase"
    );
    for (k, w) in omega_grid.iter().enumerate() {
        ensure_param!(
            (w - k as f64 * step).abs() <= 1e-9 * step.max(w.abs()),
            "frequency grid must be uniform"
        );
    }
    let values = model_psd_values(params, omega_grid)?;
    Spectrum::new(step / TAU, values, UnitTag::new("SNU")?)
}
