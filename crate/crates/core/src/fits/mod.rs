//! Parameter estimation for the characterization measurements.

mod g0;
pub mod lm;
mod model_psd;
mod peak;
mod ringdown;
mod scan;
mod spring;

pub use g0::{estimate_g0, rayleigh_mean_amplitude, G0Estimate, RAYLEIGH_RELATIVE_SPREAD};
pub use model_psd::{model_psd, model_psd_values, ModelPsdParams};
pub use peak::{peak_frequency, PeakEstimate};
pub use ringdown::fit_ringdown;
pub use scan::{fit_scan, scan_model, ScanFitOptions, ScanModulation, ScanParams};
pub use spring::{
    extrapolate_detunings, fit_optical_spring, optical_spring_frequency, MechanicalFrequency,
    SpringEntry, SpringSeries,
};

use std::fmt;

/// Estimates with 1σ uncertainties and optimizer diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// Root of the sum of squared (weighted) residuals.
    pub residual_norm: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub warnings: Vec<String>,
}

impl FitResult {
    fn from_outcome(names: &[&str], outcome: &lm::LmOutcome) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            params: outcome.params.clone(),
            sigmas: outcome.sigmas(),
            residual_norm: outcome.ssr.sqrt(),
            converged: outcome.converged,
            n_iter: outcome.n_iter,
            warnings: Vec::new(),
        }
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.sigmas[i])
    }

    /// Appends a derived quantity.
    pub fn push(&mut self, name: &str, value: f64, sigma: f64) {
        self.names.push(name.to_owned());
        self.params.push(value);
        self.sigmas.push(sigma);
    }

    /// Iterates over `(name, value, sigma)`.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64, f64)> {
        self.names
            .iter()
            .zip(&self.params)
            .zip(&self.sigmas)
            .map(|((n, p), s)| (n.as_str(), *p, *s))
    }
}

impl fmt::Display for FitResult {
    /// `key=value` lines: one per parameter with its sigma, then diagnostics.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value, sigma) in self.iter() {
            writeln!(f, "{name}={value:e}")?;
            writeln!(f, "{name}_sigma={sigma:e}")?;
        }
        writeln!(f, "residual_norm={:e}", self.residual_norm)?;
        writeln!(f, "converged={}", self.converged)?;
        write!(f, "n_iter={}", self.n_iter)?;
        for w in &self.warnings {
            write!(f, "\nwarning={w}")?;
        }
        Ok(())
    }
}
