use super::lm::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::error::{ensure_param, Error, Result};

/// Effective mechanical frequency in the fast-cavity limit at constant mean
/// intracavity photon number, `Ω_m + Γ_m C ν/(1+ν²)`.
pub fn optical_spring_frequency(omega_m: f64, gamma_m: f64, cooperativity: f64, nu: f64) -> f64 {
    omega_m + gamma_m * cooperativity * nu / (1.0 + nu * nu)
}

/// One point of a constant-intracavity-power detuning sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringEntry {
    /// Input power relative to the first point of the series.
    pub power_ratio: f64,
    /// Measured effective frequency, rad/s.
    pub omega_eff: f64,
    /// 1σ uncertainty of `omega_eff`, rad/s.
    pub sigma_omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpringSeries {
    pub entries: Vec<SpringEntry>,
}

impl SpringSeries {
    pub fn validate(&self) -> Result<()> {
        ensure_param!(
            self.entries.len() >= 3,
            "a spring series needs at least three points, got {}",
            self.entries.len()
        );
        ensure_param!(
            self.entries[0].power_ratio == 1.0,
            "the first power ratio must be 1, got {}",
            self.entries[0].power_ratio
        );
        for e in &self.entries {
            ensure_param!(
                e.power_ratio.is_finite() && e.power_ratio > 0.0,
                "power ratios must be positive, got {}",
                e.power_ratio
            );
            ensure_param!(
                e.omega_eff.is_finite(),
                "effective frequencies must be finite"
            );
            ensure_param!(
                e.sigma_omega.is_finite() && e.sigma_omega > 0.0,
                "frequency uncertainties must be positive, got {}",
                e.sigma_omega
            );
        }
        Ok(())
    }
}

/// Detunings of a constant-intracavity-power sweep from the first detuning
/// and the input power ratios: `ν_i = sign(ν_1) sqrt((1+ν_1²) P_i/P_1 − 1)`.
///
/// Constant `n̄_c ∝ P_i/(1+ν_i²)` is what fixes `1+ν_i² ∝ P_i`.
pub fn extrapolate_detunings(nu_1: f64, power_ratios: &[f64]) -> Result<Vec<f64>> {
    let base = 1.0 + nu_1 * nu_1;
    power_ratios
        .iter()
        .map(|&r| {
            let arg = base * r - 1.0;
            if arg < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "power ratio {r} implies a detuning below resonance for nu_1 = {nu_1}"
                )));
            }
            Ok(nu_1.signum() * arg.sqrt())
        })
        .collect()
}

/// How the bare mechanical frequency enters [`fit_optical_spring`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechanicalFrequency {
    /// Fitted, starting from this guess (rad/s).
    Free(f64),
    /// Held at this value (rad/s).
    Fixed(f64),
}

fn spring_chi2(
    nu_1: f64,
    series: &SpringSeries,
    omega_m: MechanicalFrequency,
) -> Option<(f64, f64, f64)> {
    let ratios: Vec<f64> = series.entries.iter().map(|e| e.power_ratio).collect();
    let nus = extrapolate_detunings(nu_1, &ratios).ok()?;
    let xs: Vec<f64> = nus.iter().map(|nu| nu / (1.0 + nu * nu)).collect();
    let ws: Vec<f64> = series
        .entries
        .iter()
        .map(|e| e.sigma_omega.powi(-2))
        .collect();
    let ys: Vec<f64> = series.entries.iter().map(|e| e.omega_eff).collect();
    let (om, k) = match omega_m {
        MechanicalFrequency::Fixed(om) => {
            let num: f64 = (0..xs.len()).map(|i| ws[i] * xs[i] * (ys[i] - om)).sum();
            let den: f64 = (0..xs.len()).map(|i| ws[i] * xs[i] * xs[i]).sum();
            (om, num / den)
        }
        MechanicalFrequency::Free(_) => {
            let sw: f64 = ws.iter().sum();
            let mx = (0..xs.len()).map(|i| ws[i] * xs[i]).sum::<f64>() / sw;
            let my = (0..xs.len()).map(|i| ws[i] * ys[i]).sum::<f64>() / sw;
            let sxy: f64 = (0..xs.len())
                .map(|i| ws[i] * (xs[i] - mx) * (ys[i] - my))
                .sum();
            let sxx: f64 = (0..xs.len()).map(|i| ws[i] * (xs[i] - mx).powi(2)).sum();
            let k = sxy / sxx;
            (my - k * mx, k)
        }
    };
    if !(k > 0.0) || !om.is_finite() {
        return None;
    }
    let chi2 = (0..xs.len())
        .map(|i| ws[i] * (ys[i] - om - k * xs[i]).powi(2))
        .sum();
    Some((chi2, om, k))
}

/// Fits cooperativity `c`, first detuning `nu_1` and (optionally) the bare
/// frequency `omega_m` to a constant-intracavity-power detuning sweep.
///
/// The starting point comes from a scan over `nu_1` on both sides of
/// resonance with the remaining parameters solved linearly; candidates with
/// non-positive cooperativity are discarded.
pub fn fit_optical_spring(
    series: &SpringSeries,
    gamma_m: f64,
    omega_m: MechanicalFrequency,
) -> Result<FitResult> {
    series.validate()?;
    ensure_param!(gamma_m > 0.0, "gamma_m must be positive, got {gamma_m}");
    let r_min = series
        .entries
        .iter()
        .map(|e| e.power_ratio)
        .fold(f64::INFINITY, f64::min);
    let lower = (1.0 / r_min - 1.0).max(0.0).sqrt();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for sign in [-1.0, 1.0] {
        for j in 0..=600 {
            let nu_1 = sign * (lower + 10f64.powf(-4.0 + 6.0 * j as f64 / 600.0));
            if let Some((chi2, om, k)) = spring_chi2(nu_1, series, omega_m) {
                if best.map_or(true, |b| chi2 < b.0) {
                    best = Some((chi2, nu_1, om, k));
                }
            }
        }
    }
    let (_, nu_0, om_0, k_0) = best.ok_or_else(|| {
        Error::Numeric("no detuning assignment gives a positive cooperativity".into())
    })?;

    let ratios: Vec<f64> = series.entries.iter().map(|e| e.power_ratio).collect();
    let model = |c: f64, nu_1: f64, om: f64| -> Result<Vec<f64>> {
        let nus = extrapolate_detunings(nu_1, &ratios)?;
        Ok(series
            .entries
            .iter()
            .zip(nus)
            .map(|(e, nu)| {
                (optical_spring_frequency(om, gamma_m, c, nu) - e.omega_eff) / e.sigma_omega
            })
            .collect())
    };
    let c_0 = k_0 / gamma_m;
    let options = LmOptions::default();
    let mut fit = match omega_m {
        MechanicalFrequency::Free(_) => {
            let out = levenberg_marquardt(
                |p| model(p[0], p[1], p[2]),
                &[c_0, nu_0, om_0],
                &[c_0, nu_0.abs().max(0.1), om_0],
                &options,
            )?;
            FitResult::from_outcome(&["c", "nu_1", "omega_m"], &out)
        }
        MechanicalFrequency::Fixed(om) => {
            let out = levenberg_marquardt(
                |p| model(p[0], p[1], om),
                &[c_0, nu_0],
                &[c_0, nu_0.abs().max(0.1)],
                &options,
            )?;
            let mut fit = FitResult::from_outcome(&["c", "nu_1"], &out);
            fit.push("omega_m", om, 0.0);
            fit
        }
    };
    if fit.params[0] <= 0.0 {
        fit.converged = false;
        fit.warnings
            .push("fitted cooperativity is not positive".into());
    }
    Ok(fit)
}
