//! Band-integrated relative intensity noise versus cooperativity.
//!
//! Each sweep point sets the on-resonance photon number so that the first
//! mode reaches the requested `C / n_th`, simulates the motion with
//! radiation pressure, detects it, and integrates the RIN spectrum over a
//! band. Classical detuning noise in the bath both adds to the detected
//! intensity directly and drives the membrane through radiation pressure,
//! quadratically in the intracavity power.

use rayon::prelude::*;

use crate::dynamics::{simulate_modes, thermal_occupation, SimSettings};
use crate::error::{ensure_param, Result};
use crate::params::{BathParams, CavityParams, DetectorParams, ModeParams};
use crate::spectral::{band_rms, rin_spectrum, WelchConfig};
use crate::transduction::{lorentzian_response, transduce};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// The first mode defines the cooperativity axis.
    pub modes: Vec<ModeParams>,
    /// rad/s.
    pub kappa: f64,
    pub nu0: f64,
    pub bath: BathParams,
    pub detector: DetectorParams,
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    /// Integration band, Hz.
    pub band: (f64, f64),
    pub welch: WelchConfig,
    /// Include the cavity lag in the radiation-pressure force (optical
    /// damping).
    pub backaction_damping: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub c_over_n_th: f64,
    pub cooperativity: f64,
    pub n_c0: f64,
    pub band_rms: f64,
}

impl SweepSpec {
    pub fn n_th(&self) -> Result<f64> {
        let first = self.modes.first().ok_or_else(|| {
            crate::Error::InvalidParameter("sweep needs at least one mode".into())
        })?;
        thermal_occupation(first.omega_m, self.bath.temperature)
    }

    /// Cavity operating point giving `C = c_over_n_th · n_th` for the first
    /// mode.
    pub fn cavity_for(&self, c_over_n_th: f64) -> Result<CavityParams> {
        ensure_param!(
            c_over_n_th.is_finite() && c_over_n_th >= 0.0,
            "C/n_th must be non-negative, got {c_over_n_th}"
        );
        let mode = &self.modes[0];
        ensure_param!(
            mode.g0 > 0.0 && mode.gamma_m > 0.0,
            "sweep reference mode needs positive g0 and gamma_m"
        );
        let c = c_over_n_th * self.n_th()?;
        let n_bar = c * self.kappa * mode.gamma_m / (4.0 * mode.g0 * mode.g0);
        Ok(CavityParams {
            kappa: self.kappa,
            nu0: self.nu0,
            n_c0: n_bar / lorentzian_response(self.nu0),
            phi0: 0.0,
        })
    }
}

/// One sweep point; identical to the corresponding entry of
/// [`cooperativity_sweep`].
pub fn sweep_point(spec: &SweepSpec, c_over_n_th: f64) -> Result<SweepPoint> {
    let cavity = spec.cavity_for(c_over_n_th)?;
    let settings = SimSettings {
        duration: spec.duration,
        sample_rate: spec.sample_rate,
        radiation_pressure: true,
        backaction_damping: spec.backaction_damping,
    };
    let sim = simulate_modes(&spec.modes, &cavity, &spec.bath, &settings)?;
    let current = transduce(&sim.detuning, &spec.detector, spec.bath.seed)?;
    let rin = rin_spectrum(&current, &spec.welch)?;
    Ok(SweepPoint {
        c_over_n_th,
        cooperativity: cavity.cooperativity(&spec.modes[0]),
        n_c0: cavity.n_c0,
        band_rms: band_rms(&rin, spec.band.0, spec.band.1)?,
    })
}

/// Runs [`sweep_point`] for every ratio. All points share the seed, so
/// they differ only through the cooperativity.
pub fn cooperativity_sweep(spec: &SweepSpec, c_over_n_th: &[f64]) -> Result<Vec<SweepPoint>> {
    ensure_param!(
        !c_over_n_th.is_empty(),
        "sweep needs at least one cooperativity"
    );
    c_over_n_th
        .par_iter()
        .map(|&r| sweep_point(spec, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consts::angular;

    fn spec() -> SweepSpec {
        let omega = angular(1e4);
        SweepSpec {
            modes: vec![ModeParams::from_quality(
                "m",
                omega,
                1e3,
                angular(50.0),
                1e-12,
            )],
            kappa: 32.0 * omega,
            nu0: -1.0 / 3f64.sqrt(),
            bath: BathParams::thermal(1e-3, 2),
            detector: DetectorParams::ideal(),
            duration: 0.2,
            sample_rate: 1e5,
            band: (8e3, 12e3),
            welch: WelchConfig::new(4096),
            backaction_damping: true,
        }
    }

    #[test]
    fn cavity_reaches_requested_cooperativity() {
        let s = spec();
        let cav = s.cavity_for(0.3).unwrap();
        let c = cav.cooperativity(&s.modes[0]);
        assert!((c / (0.3 * s.n_th().unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_matches_sweep_entry() {
        let s = spec();
        let all = cooperativity_sweep(&s, &[0.005, 0.02]).unwrap();
        assert_eq!(all[1], sweep_point(&s, 0.02).unwrap());
    }
}
