//! Multimode thermomechanical motion and the resulting detuning trajectory.
//!
//! Each mode is carried as a complex amplitude `a = x − i ẋ/Ω_m`, so that the
//! displacement is `x = Re a` and free motion is `a(t) ∝ exp(iΩ_m t)`. The
//! thermal bath is an Ornstein–Uhlenbeck process on `a` that is propagated
//! exactly over each sample interval:
//!
//! ```text
//! a ← exp((iΩ_m − Γ_m/2) dt) · a + ξ,   E|ξ|² = σ² (1 − exp(−Γ_m dt))
//! ```
//!
//! with `σ² = E|a|² = 2 k_B T / (m Ω_m²)`, so the displacement variance is
//! `k_B T / (m Ω_m²)` at any step size and any quality factor.
//!
//! Radiation pressure and nonlinear damping are applied as first-order
//! (Lie) splitting kicks before the exact bath step. The splitting error is
//! O(dt) per unit time, so the step must satisfy
//! `dt ≤ 0.05 / max(Γ_m C, Γ_m + β_nl k_B T)`; [`simulate_modes`] rejects
//! coarser grids.
//!
//! The radiation-pressure force follows the intracavity photon number
//! adiabatically, `F_k = −ħ G_k n_c0 (|L(ν)|² − |L(ν0)|²)`, where the static
//! part at ν0 is subtracted so that ν0 remains the operating point. When
//! [`SimSettings::backaction_damping`] is set the force is evaluated with the
//! cavity's first-order lag `τ = 4 / (κ (1 + ν0²))`, `F(t − τ) ≈ F − τ Ḟ`,
//! which produces the fast-cavity optical damping rate
//! `Γ_opt = −8 Γ_m C Ω_m ν0 / (κ (1 + ν0²)²)` on top of the optical spring.

use num_complex::Complex64;

use crate::consts::{HBAR, K_B};
use crate::error::{ensure_param, Error, Result};
use crate::params::{BathParams, CavityParams, ModeParams};
use crate::rng::{NoiseStream, DETUNING_NOISE_STREAM};
use crate::trace::{TimeTrace, UnitTag};
use crate::transduction::{lorentzian_response, lorentzian_slope};

/// Mean thermal phonon number in the high-temperature limit, `k_B T / (ħ Ω)`.
pub fn thermal_occupation(omega_m: f64, temperature: f64) -> Result<f64> {
    ensure_param!(
        omega_m.is_finite() && omega_m > 0.0,
        "omega_m must be positive, got {omega_m}"
    );
    ensure_param!(
        temperature.is_finite() && temperature >= 0.0,
        "temperature must be non-negative, got {temperature}"
    );
    Ok(K_B * temperature / (HBAR * omega_m))
}

/// Energy of a ringdown with linear and quadratic damping,
/// solution of `Ė = −(Γ + β E) E`.
pub fn ringdown_energy(t: f64, e0: f64, gamma_m: f64, beta_nl: f64) -> f64 {
    if beta_nl == 0.0 {
        return e0 * (-gamma_m * t).exp();
    }
    // Γ E0 / ((Γ + β E0) e^{Γt} − β E0), rearranged to avoid overflow.
    let decay = (-gamma_m * t).exp();
    e0 * decay / (1.0 - beta_nl * e0 / gamma_m * (-gamma_m * t).exp_m1())
}

/// Closed-form ringdown sampled on `[0, duration)`, plus a constant offset.
pub fn ringdown_trace(
    e0: f64,
    gamma_m: f64,
    beta_nl: f64,
    duration: f64,
    sample_rate: f64,
    offset: f64,
) -> Result<TimeTrace> {
    ensure_param!(e0.is_finite() && e0 >= 0.0, "E0 must be non-negative");
    ensure_param!(
        gamma_m.is_finite() && gamma_m > 0.0,
        "gamma_m must be positive"
    );
    ensure_param!(beta_nl.is_finite(), "beta_nl must be finite");
    ensure_param!(
        duration > 0.0 && sample_rate > 0.0,
        "duration and sample rate must be positive"
    );
    // The denominator is monotone in t, so checking both ends covers the
    // whole interval.
    let denominator = |t: f64| 1.0 - beta_nl * e0 / gamma_m * (-gamma_m * t).exp_m1();
    if denominator(0.0) <= 0.0 || denominator(duration) <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ringdown with gamma_m = {gamma_m}, beta_nl = {beta_nl}, E0 = {e0} diverges within {duration} s"
        )));
    }
    let n = (duration * sample_rate).round() as usize;
    TimeTrace::from_fn(n, sample_rate, UnitTag::joule(), |t| {
        ringdown_energy(t, e0, gamma_m, beta_nl) + offset
    })
}

/// Sampling and coupling options for [`simulate_modes`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    pub radiation_pressure: bool,
    /// Include the first-order cavity lag in the radiation-pressure force.
    /// Ignored unless `radiation_pressure` is set.
    pub backaction_damping: bool,
}

impl SimSettings {
    pub fn new(duration: f64, sample_rate: f64) -> Self {
        Self {
            duration,
            sample_rate,
            radiation_pressure: false,
            backaction_damping: false,
        }
    }

    pub fn with_radiation_pressure(mut self, backaction_damping: bool) -> Self {
        self.radiation_pressure = true;
        self.backaction_damping = backaction_damping;
        self
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    /// Relative detuning ν(t).
    pub detuning: TimeTrace,
    /// Displacement of each mode, metres, in input order.
    pub per_mode_displacement: Vec<TimeTrace>,
    /// Classical detuning noise that was added to ν(t), if any.
    pub detuning_noise: Option<TimeTrace>,
    pub radiation_pressure_enabled: bool,
}

/// Detuning per metre of displacement, `2 G / κ`, for each mode.
pub fn detuning_coefficients(modes: &[ModeParams], kappa: f64) -> Vec<f64> {
    modes
        .iter()
        .map(|m| 2.0 * m.pull_factor() / kappa)
        .collect()
}

#[inline]
fn detuning_sample(nu0: f64, coefficients: &[f64], displacement: impl Iterator<Item = f64>) -> f64 {
    let mut shift = 0.0;
    for (c, x) in coefficients.iter().zip(displacement) {
        shift += c * x;
    }
    nu0 - shift
}

/// Assembles `ν(t) = ν0 − Σ_k (2 G_k/κ) x_k(t) (+ noise)` from displacement
/// traces. Bitwise identical to the detuning produced by [`simulate_modes`].
pub fn assemble_detuning(
    nu0: f64,
    coefficients: &[f64],
    displacements: &[TimeTrace],
    noise: Option<&TimeTrace>,
) -> Result<TimeTrace> {
    ensure_param!(
        coefficients.len() == displacements.len(),
        "one coefficient per displacement trace required"
    );
    let first = displacements
        .first()
        .ok_or_else(|| Error::InvalidParameter("no displacement traces".into()))?;
    for d in displacements {
        first.check_aligned(d)?;
    }
    if let Some(n) = noise {
        first.check_aligned(n)?;
    }
    let samples = (0..first.len())
        .map(|i| {
            let nu = detuning_sample(
                nu0,
                coefficients,
                displacements.iter().map(|d| d.samples()[i]),
            );
            match noise {
                Some(n) => nu + n.samples()[i],
                None => nu,
            }
        })
        .collect();
    TimeTrace::new(samples, first.sample_rate(), UnitTag::detuning())
}

/// Optical damping rate produced by the lagged radiation-pressure force.
pub fn optical_damping_rate(mode: &ModeParams, cavity: &CavityParams) -> f64 {
    let nu = cavity.nu0;
    let gc = mode.gamma_m * cavity.cooperativity(mode);
    -8.0 * gc * mode.omega_m * nu / (cavity.kappa * (1.0 + nu * nu).powi(2))
}

struct ModeState {
    amplitude: Complex64,
    rotation: Complex64,
    kick_sigma: f64,
    /// G / (m Ω): amplitude change per unit impulse per photon-force unit.
    force_gain: f64,
    energy_scale: f64,
    beta_nl: f64,
    omega_m: f64,
    noise: NoiseStream,
}

impl ModeState {
    fn new(mode: &ModeParams, temperature: f64, dt: f64, seed: u64, index: usize) -> Self {
        let mut noise = NoiseStream::for_mode(seed, index);
        // E|a|² = 2 k_B T / (m Ω²): each real component carries half.
        let component_sigma = mode.thermal_variance(temperature).sqrt();
        let amplitude = Complex64::new(
            component_sigma * noise.normal(),
            component_sigma * noise.normal(),
        );
        let rotation = Complex64::new(-0.5 * mode.gamma_m * dt, mode.omega_m * dt).exp();
        let kick_sigma = component_sigma * (-(-mode.gamma_m * dt).exp_m1()).sqrt();
        Self {
            amplitude,
            rotation,
            kick_sigma,
            force_gain: mode.pull_factor() / (mode.m_eff * mode.omega_m),
            energy_scale: 0.5 * mode.m_eff * mode.omega_m * mode.omega_m,
            beta_nl: mode.beta_nl,
            omega_m: mode.omega_m,
            noise,
        }
    }

    #[inline]
    fn displacement(&self) -> f64 {
        self.amplitude.re
    }

    #[inline]
    fn bath_step(&mut self) {
        let xi = Complex64::new(self.noise.normal(), self.noise.normal()) * self.kick_sigma;
        self.amplitude = self.rotation * self.amplitude + xi;
    }

    #[inline]
    fn nonlinear_damping(&mut self, dt: f64) {
        if self.beta_nl > 0.0 {
            let energy = self.energy_scale * self.amplitude.norm_sqr();
            self.amplitude *= (-0.5 * self.beta_nl * energy * dt).exp();
        }
    }
}

/// Simulates thermomechanical motion of `modes` and the cavity detuning it
/// produces.
///
/// Output is a pure function of the inputs: each mode draws from its own
/// seeded stream (see [`crate::rng`]), so results are bit-identical across
/// runs and unaffected by appending further modes.
pub fn simulate_modes(
    modes: &[ModeParams],
    cavity: &CavityParams,
    bath: &BathParams,
    settings: &SimSettings,
) -> Result<SimOutput> {
    cavity.validate()?;
    bath.validate()?;
    ensure_param!(!modes.is_empty(), "at least one mode is required");
    for m in modes {
        m.validate()?;
    }
    let fs = settings.sample_rate;
    ensure_param!(
        fs.is_finite() && fs > 0.0,
        "sample rate must be positive, got {fs}"
    );
    ensure_param!(
        settings.duration.is_finite() && settings.duration > 0.0,
        "duration must be positive, got {}",
        settings.duration
    );
    let n = settings.sample_count();
    ensure_param!(
        n >= 2,
        "duration × sample rate must give at least two samples"
    );
    for m in modes {
        ensure_param!(
            fs > m.omega_m / std::f64::consts::PI,
            "sample rate {fs} Hz violates Nyquist for mode {:?} at {} Hz",
            m.label,
            m.omega_m / crate::consts::TAU
        );
    }
    let dt = 1.0 / fs;
    let thermal_energy = K_B * bath.temperature;
    for m in modes {
        let mut rate = m.gamma_m + m.beta_nl * thermal_energy;
        if settings.radiation_pressure {
            rate = rate.max(m.gamma_m * cavity.cooperativity(m));
        }
        if rate > 0.0 && dt > 0.05 / rate {
            return Err(Error::InvalidParameter(format!(
                "time step {dt:e} s too coarse for mode {:?}: splitting requires dt <= {:e} s",
                m.label,
                0.05 / rate
            )));
        }
    }

    let coefficients = detuning_coefficients(modes, cavity.kappa);
    let mut states: Vec<ModeState> = modes
        .iter()
        .enumerate()
        .map(|(k, m)| ModeState::new(m, bath.temperature, dt, bath.seed, k))
        .collect();

    let noise_sigma = (bath.classical_detuning_noise_psd * fs / 2.0).sqrt();
    let mut detuning_noise = (noise_sigma > 0.0).then(|| {
        let mut stream = NoiseStream::new(bath.seed, DETUNING_NOISE_STREAM);
        (0..n)
            .map(|_| noise_sigma * stream.normal())
            .collect::<Vec<f64>>()
    });

    let mut displacement: Vec<Vec<f64>> = vec![Vec::with_capacity(n); modes.len()];
    let mut detuning = Vec::with_capacity(n);

    let nu0 = cavity.nu0;
    let l0 = lorentzian_response(nu0);
    // Force per unit pull factor: −ħ n_c0.
    let force_scale = -HBAR * cavity.n_c0;
    let lag = if settings.backaction_damping {
        4.0 / (cavity.kappa * (1.0 + nu0 * nu0))
    } else {
        0.0
    };

    for i in 0..n {
        let mut nu = detuning_sample(nu0, &coefficients, states.iter().map(|s| s.displacement()));
        if let Some(noise) = &detuning_noise {
            nu += noise[i];
        }
        for (trace, s) in displacement.iter_mut().zip(&states) {
            trace.push(s.displacement());
        }
        detuning.push(nu);

        if settings.radiation_pressure {
            let mut force = force_scale * (lorentzian_response(nu) - l0);
            if lag > 0.0 {
                // ν̇ = −Σ c_k ẋ_k with ẋ = −Ω Im a.
                let nu_dot: f64 = coefficients
                    .iter()
                    .zip(&states)
                    .map(|(c, s)| c * s.omega_m * s.amplitude.im)
                    .sum();
                force -= lag * force_scale * lorentzian_slope(nu) * nu_dot;
            }
            for s in states.iter_mut() {
                s.amplitude += Complex64::new(0.0, -s.force_gain * force * dt);
            }
        }
        for s in states.iter_mut() {
            s.nonlinear_damping(dt);
            s.bath_step();
        }
    }

    let per_mode_displacement = displacement
        .into_iter()
        .map(|d| TimeTrace::new(d, fs, UnitTag::meter()))
        .collect::<Result<Vec<_>>>()?;
    let detuning_noise = detuning_noise
        .take()
        .map(|d| TimeTrace::new(d, fs, UnitTag::detuning()))
        .transpose()?;
    Ok(SimOutput {
        detuning: TimeTrace::new(detuning, fs, UnitTag::detuning())?,
        per_mode_displacement,
        detuning_noise,
        radiation_pressure_enabled: settings.radiation_pressure,
    })
}
