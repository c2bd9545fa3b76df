use super::lm::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::dynamics::ringdown_energy;
use crate::error::{ensure_param, Error, Result};
use crate::trace::TimeTrace;

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Starting values `(Γ, β, E0)` from log-slopes: late-time decay gives Γ,
/// the initial decay rate gives `Γ + β E0`.
fn initial_guess(energy: &TimeTrace) -> Result<(f64, f64, f64)> {
    let n = energy.len();
    let window = (n / 20).max(3);
    let log_slope = |range: std::ops::Range<usize>| {
        let (ts, ls): (Vec<f64>, Vec<f64>) = range
            .filter_map(|i| {
                let e = energy.samples()[i];
                (e > 0.0).then(|| (energy.time(i), e.ln()))
            })
            .unzip();
        if ts.len() < 3 {
            f64::NAN
        } else {
            -slope(&ts, &ls)
        }
    };
    let early = log_slope(0..window);
    let late = log_slope(n / 2..n);
    let e0 = energy.samples()[..window.min(5)].iter().sum::<f64>() / window.min(5) as f64;
    if !(late > 0.0) || !(e0 > 0.0) {
        return Err(Error::Numeric(
            "ringdown trace does not decay; no starting point for the fit".into(),
        ));
    }
    let beta = if early > late {
        (early - late) / e0
    } else {
        0.0
    };
    Ok((late, beta, e0))
}

/// Fits `E(t) = Γ E0 / ((Γ + β E0) e^{Γt} − β E0) + offset` to an energy
/// ringdown.
///
/// Residuals are relative, `(data − model)/model`, which matches
/// multiplicative measurement noise. With `omega_m` given, the quality
/// factor `q = Ω_m/Γ_m` is appended to the result.
pub fn fit_ringdown(energy: &TimeTrace, omega_m: Option<f64>) -> Result<FitResult> {
    ensure_param!(energy.len() >= 8, "ringdown trace needs at least 8 samples");
    ensure_param!(
        energy.samples().iter().all(|e| e.is_finite()),
        "ringdown trace contains non-finite samples"
    );
    let (gamma_0, beta_0, e0_0) = initial_guess(energy)?;
    let times: Vec<f64> = (0..energy.len()).map(|i| energy.time(i)).collect();
    let data = energy.samples();
    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        let (gamma, beta, e0, offset) = (p[0], p[1], p[2], p[3]);
        if !(gamma > 0.0) {
            return Err(Error::Numeric("non-positive damping".into()));
        }
        times
            .iter()
            .zip(data)
            .map(|(&t, &d)| {
                let m = ringdown_energy(t, e0, gamma, beta) + offset;
                if m > 0.0 && m.is_finite() {
                    Ok((d - m) / m)
                } else {
                    Err(Error::Numeric("model energy not positive".into()))
                }
            })
            .collect()
    };
    let scale = [
        gamma_0,
        beta_0.max(1e-2 * gamma_0 / e0_0),
        e0_0,
        1e-3 * e0_0,
    ];
    let out = levenberg_marquardt(
        residuals,
        &[gamma_0, beta_0, e0_0, 0.0],
        &scale,
        &LmOptions::default(),
    )?;
    let mut fit = FitResult::from_outcome(&["gamma_m", "beta_nl", "e0", "offset"], &out);
    if let Some(om) = omega_m {
        let (g, sg) = (fit.params[0], fit.sigmas[0]);
        fit.push("q", om / g, om / g * sg / g);
    }
    Ok(fit)
}
