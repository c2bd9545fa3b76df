use crate::error::{ensure_param, Result};

/// Standard deviation over mean of a Rayleigh distribution, `sqrt((4 − π)/π)`.
pub const RAYLEIGH_RELATIVE_SPREAD: f64 = 0.522_723_200_877_063_4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G0Estimate {
    /// rad/s.
    pub g0: f64,
    /// rad/s.
    pub sigma: f64,
    pub mean_amplitude: f64,
}

/// Mean detuning-modulation amplitude of a thermal mode,
/// `(2 g0/κ) sqrt(π n_th)`.
pub fn rayleigh_mean_amplitude(g0: f64, kappa: f64, n_th: f64) -> f64 {
    2.0 * g0 / kappa * (std::f64::consts::PI * n_th).sqrt()
}

/// Single-photon coupling from fitted modulation amplitudes of repeated
/// scans, `g0 = κ ⟨α⟩ / (2 sqrt(π n_th))`.
///
/// Thermal amplitudes are Rayleigh distributed, so the standard error of the
/// mean is `⟨α⟩ · sqrt((4 − π)/π) / sqrt(N)`.
pub fn estimate_g0(alpha_samples: &[f64], kappa: f64, n_th: f64) -> Result<G0Estimate> {
    ensure_param!(
        alpha_samples.len() >= 2,
        "at least two amplitude samples are required, got {}",
        alpha_samples.len()
    );
    ensure_param!(
        alpha_samples.iter().all(|a| a.is_finite() && *a >= 0.0),
        "amplitude samples must be non-negative"
    );
    ensure_param!(kappa > 0.0, "kappa must be positive");
    ensure_param!(n_th > 0.0, "n_th must be positive");
    let n = alpha_samples.len() as f64;
    let mean = alpha_samples.iter().sum::<f64>() / n;
    let g0 = kappa * mean / (2.0 * (std::f64::consts::PI * n_th).sqrt());
    Ok(G0Estimate {
        g0,
        sigma: g0 * RAYLEIGH_RELATIVE_SPREAD / n.sqrt(),
        mean_amplitude: mean,
    })
}
