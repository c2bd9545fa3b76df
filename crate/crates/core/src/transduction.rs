//! Detuning to photocurrent, and photocurrent back to detuning.
//!
//! In the fast-cavity limit the intracavity photon number follows the
//! detuning adiabatically, `n_c = n_c0 |L(ν)|²` with `|L(ν)|² = 1/(1+ν²)`.
//! Three readouts invert a photocurrent record:
//!
//! * [`linear_readout`] expands `|L|²` to first order around ν0. Every higher
//!   Taylor term leaks into the estimate as thermal intermodulation noise.
//! * [`nonlinear_readout`] inverts `|L|²` exactly using the sign of ν0, valid
//!   while the instantaneous detuning stays on the same side of resonance.
//! * [`general_dyne_readout`] inverts exactly with a per-sample sign taken
//!   from a phase measurement, valid across resonance.

use crate::consts::{HBAR, K_B};
use crate::dynamics::thermal_occupation;
use crate::error::{ensure_param, Error, Result};
use crate::params::{CavityParams, DetectorParams, ModeParams};
use crate::rng::{NoiseStream, SHOT_NOISE_STREAM};
use crate::trace::{TimeTrace, UnitTag};

/// Relative intracavity photon number `1/(1+ν²)`.
#[inline]
pub fn lorentzian_response(nu: f64) -> f64 {
    1.0 / (1.0 + nu * nu)
}

/// Intracavity phase relative to resonance, `arctan ν`.
#[inline]
pub fn phase_response(nu: f64) -> f64 {
    nu.atan()
}

/// `∂ν |L(ν)|²`.
#[inline]
pub fn lorentzian_slope(nu: f64) -> f64 {
    let d = 1.0 + nu * nu;
    -2.0 * nu / (d * d)
}

/// Unit tag of photocurrent traces (arbitrary detector units).
pub fn photocurrent_unit() -> UnitTag {
    UnitTag::known("arb")
}

/// Detuning trace to photocurrent `I = i_bg + (i_max − i_bg) |L(ν)|²`.
///
/// With `shot_noise` set, white Gaussian noise is added whose single-sided
/// relative-intensity PSD is `2 / photon_flux` at the resonant operating
/// point (standard deviation `i_max · sqrt(fs / photon_flux)` per sample),
/// held constant along the trace.
pub fn transduce(detuning: &TimeTrace, det: &DetectorParams, seed: u64) -> Result<TimeTrace> {
    det.validate()?;
    ensure_param!(
        detuning.samples().iter().all(|v| v.is_finite()),
        "detuning trace contains non-finite samples"
    );
    let span = det.i_max - det.i_bg;
    let mut current: Vec<f64> = detuning
        .samples()
        .iter()
        .map(|&nu| det.i_bg + span * lorentzian_response(nu))
        .collect();
    if det.shot_noise {
        ensure_param!(
            det.photon_flux.is_finite() && det.photon_flux > 0.0,
            "shot noise requires a positive photon flux, got {}",
            det.photon_flux
        );
        let sigma = det.i_max * (detuning.sample_rate() / det.photon_flux).sqrt();
        let mut noise = NoiseStream::new(seed, SHOT_NOISE_STREAM);
        for i in current.iter_mut() {
            *i += sigma * noise.normal();
        }
    }
    TimeTrace::new(current, detuning.sample_rate(), photocurrent_unit())
}

/// Photocurrent to relative cavity occupation `n_c / n_c0`.
pub fn relative_occupation(photocurrent: &TimeTrace, det: &DetectorParams) -> Result<Vec<f64>> {
    det.check_calibration()?;
    let span = det.i_max - det.i_bg;
    Ok(photocurrent
        .samples()
        .iter()
        .map(|&i| (i - det.i_bg) / span)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutMethod {
    Linear,
    Nonlinear,
    GeneralDyne,
}

impl ReadoutMethod {
    pub fn name(self) -> &'static str {
        match self {
            ReadoutMethod::Linear => "linear",
            ReadoutMethod::Nonlinear => "nonlinear",
            ReadoutMethod::GeneralDyne => "general-dyne",
        }
    }
}

/// Reconstructed detuning record.
///
/// `detuning_estimate` always holds the absolute detuning ν(t); use
/// [`ReadoutResult::fluctuation`] for δν(t) = ν(t) − ν0.
#[derive(Debug, Clone)]
pub struct ReadoutResult {
    pub detuning_estimate: TimeTrace,
    pub nu0: f64,
    /// Samples with `n_c > n_c0`, mapped to ν = 0.
    pub clamp_count: usize,
    /// Samples with `n_c ≤ 0`, mapped to ±[`FLOOR_DETUNING`].
    pub floor_count: usize,
    pub method: ReadoutMethod,
}

impl ReadoutResult {
    pub fn fluctuation(&self) -> TimeTrace {
        let nu0 = self.nu0;
        self.detuning_estimate.map(|nu| nu - nu0)
    }

    pub fn clamp_fraction(&self) -> f64 {
        if self.detuning_estimate.is_empty() {
            0.0
        } else {
            self.clamp_count as f64 / self.detuning_estimate.len() as f64
        }
    }
}

/// Detuning magnitude assigned to samples whose calibrated occupation is not
/// positive: the inverse of `|L|² = f64::EPSILON`.
pub const FLOOR_DETUNING: f64 = 67_108_864.0;

/// First-order readout around ν0:
/// `δν ≈ (n_c/n_c0 − |L(ν0)|²) / ∂ν|L(ν0)|²`.
pub fn linear_readout(
    photocurrent: &TimeTrace,
    cavity: &CavityParams,
    det: &DetectorParams,
) -> Result<ReadoutResult> {
    let nu0 = cavity.nu0;
    let slope = lorentzian_slope(nu0);
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "linear readout is singular at nu0 = {nu0}: the Lorentzian slope vanishes"
        )));
    }
    let occupation = relative_occupation(photocurrent, det)?;
    let l0 = lorentzian_response(nu0);
    let nu: Vec<f64> = occupation.iter().map(|&n| nu0 + (n - l0) / slope).collect();
    Ok(ReadoutResult {
        detuning_estimate: TimeTrace::new(nu, photocurrent.sample_rate(), UnitTag::detuning())?,
        nu0,
        clamp_count: 0,
        floor_count: 0,
        method: ReadoutMethod::Linear,
    })
}

struct Inversion {
    nu: Vec<f64>,
    clamp_count: usize,
    floor_count: usize,
}

/// Exact inverse of `n = 1/(1+ν²)` with the branch chosen by `sign`.
fn invert_occupation(occupation: &[f64], mut sign: impl FnMut(usize) -> f64) -> Inversion {
    let mut clamp_count = 0;
    let mut floor_count = 0;
    let nu = occupation
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let s = sign(k);
            if n > 1.0 {
                clamp_count += 1;
                0.0
            } else if n <= 0.0 {
                floor_count += 1;
                s * FLOOR_DETUNING
            } else {
                s * ((1.0 - n) / n).sqrt()
            }
        })
        .collect();
    Inversion {
        nu,
        clamp_count,
        floor_count,
    }
}

/// Exact intensity-only readout `ν = sign(ν0) sqrt(n_c0/n_c − 1)`.
///
/// Valid while `|δν(t)| < |ν0|`; excursions across resonance are folded back
/// (rectified) rather than reported as errors.
pub fn nonlinear_readout(
    photocurrent: &TimeTrace,
    cavity: &CavityParams,
    det: &DetectorParams,
) -> Result<ReadoutResult> {
    let nu0 = cavity.nu0;
    if nu0 == 0.0 {
        return Err(Error::InvalidParameter(
            "nonlinear readout needs a non-zero operating detuning to fix the branch".into(),
        ));
    }
    let occupation = relative_occupation(photocurrent, det)?;
    let sign = nu0.signum();
    let inv = invert_occupation(&occupation, |_| sign);
    Ok(ReadoutResult {
        detuning_estimate: TimeTrace::new(inv.nu, photocurrent.sample_rate(), UnitTag::detuning())?,
        nu0,
        clamp_count: inv.clamp_count,
        floor_count: inv.floor_count,
        method: ReadoutMethod::Nonlinear,
    })
}

/// Exact readout with the branch taken sample-by-sample from `phase_sign`
/// (values ±1, e.g. the sign of a simultaneously measured phase).
pub fn general_dyne_readout(
    photocurrent: &TimeTrace,
    phase_sign: &TimeTrace,
    cavity: &CavityParams,
    det: &DetectorParams,
) -> Result<ReadoutResult> {
    ensure_param!(
        photocurrent.len() == phase_sign.len(),
        "phase-sign trace has {} samples, photocurrent has {}",
        phase_sign.len(),
        photocurrent.len()
    );
    ensure_param!(
        phase_sign.samples().iter().all(|&s| s == 1.0 || s == -1.0),
        "phase-sign trace must contain only -1 and +1"
    );
    let occupation = relative_occupation(photocurrent, det)?;
    let signs = phase_sign.samples();
    let inv = invert_occupation(&occupation, |k| signs[k]);
    Ok(ReadoutResult {
        detuning_estimate: TimeTrace::new(inv.nu, photocurrent.sample_rate(), UnitTag::detuning())?,
        nu0: cavity.nu0,
        clamp_count: inv.clamp_count,
        floor_count: inv.floor_count,
        method: ReadoutMethod::GeneralDyne,
    })
}

/// Apparent displacement `y = −κ x_zp ν / (2 g0)` of `mode`, in metres.
pub fn detuning_to_displacement(
    detuning: &TimeTrace,
    mode: &ModeParams,
    cavity: &CavityParams,
) -> Result<TimeTrace> {
    mode.validate()?;
    cavity.validate()?;
    ensure_param!(mode.g0 > 0.0, "displacement calibration needs g0 > 0");
    let scale = -cavity.kappa * mode.x_zp() / (2.0 * mode.g0);
    Ok(detuning.map(|nu| scale * nu).with_unit(UnitTag::meter()))
}

/// Cooperativity and force-noise figures of merit.
#[derive(Debug, Clone, PartialEq)]
pub struct FiguresOfMerit {
    /// C = 4 g0² n̄_c / (κ Γ_m).
    pub cooperativity: f64,
    /// C0 = C / n̄_c.
    pub single_photon_cooperativity: f64,
    pub n_th: f64,
    /// Quantum-backaction force PSD at Ω_m, 8 ħ² g0² n̄_c / (x_zp² κ), N²/Hz.
    pub s_qba: f64,
    /// Thermal force PSD at Ω_m, 2 ħ² Γ_m n_th / x_zp², N²/Hz.
    pub s_th: f64,
    /// Sideband-cooling occupation limit κ / (4 Ω_m).
    pub n_sideband_limit: f64,
}

pub fn figures_of_merit(
    mode: &ModeParams,
    cavity: &CavityParams,
    n_c_bar: f64,
    temperature: f64,
) -> Result<FiguresOfMerit> {
    mode.validate()?;
    cavity.validate()?;
    ensure_param!(mode.gamma_m > 0.0, "figures of merit need gamma_m > 0");
    ensure_param!(
        n_c_bar.is_finite() && n_c_bar >= 0.0,
        "mean photon number must be non-negative"
    );
    let x_zp2 = mode.x_zp().powi(2);
    let g0sq = mode.g0 * mode.g0;
    let c0 = 4.0 * g0sq / (cavity.kappa * mode.gamma_m);
    let n_th = thermal_occupation(mode.omega_m, temperature)?;
    Ok(FiguresOfMerit {
        cooperativity: c0 * n_c_bar,
        single_photon_cooperativity: c0,
        n_th,
        s_qba: 8.0 * HBAR * HBAR * g0sq * n_c_bar / (x_zp2 * cavity.kappa),
        s_th: 2.0 * HBAR * HBAR * mode.gamma_m * n_th / x_zp2,
        n_sideband_limit: cavity.kappa / (4.0 * mode.omega_m),
    })
}

/// Mean Rayleigh amplitude of thermal detuning modulation,
/// `(2 g0/κ) sqrt(π n_th)`.
pub fn mean_thermal_detuning_amplitude(mode: &ModeParams, kappa: f64, temperature: f64) -> f64 {
    let n_th = K_B * temperature / (HBAR * mode.omega_m);
    2.0 * mode.g0 / kappa * (std::f64::consts::PI * n_th).sqrt()
}
