use super::lm::{levenberg_marquardt, LmOptions};
use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Lorentzian fitted to the tallest peak in a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakEstimate {
    /// Centre frequency, Hz.
    pub frequency: f64,
    /// 1σ uncertainty of the centre, Hz.
    pub sigma: f64,
    /// Peak height above background.
    pub amplitude: f64,
    /// Half width at half maximum, Hz.
    pub half_width: f64,
    pub background: f64,
    pub converged: bool,
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Centre frequency of the tallest peak in `[f_lo, f_hi]`.
///
/// The peak must exceed the band median by 6 dB. A Lorentzian plus constant
/// background is fitted over a window of a few half widths around the
/// maximum; with several peaks in the band, the tallest one is returned.
pub fn peak_frequency(spectrum: &Spectrum, band: (f64, f64)) -> Result<PeakEstimate> {
    let (f_lo, f_hi) = band;
    let top = spectrum.argmax_in(f_lo, f_hi)?;
    let lo = spectrum
        .bin(f_lo)
        .max((f_lo / spectrum.df()).ceil() as usize);
    let hi = spectrum
        .bin(f_hi)
        .min((f_hi / spectrum.df()).floor() as usize);
    let values = spectrum.values();
    let floor = median(&values[lo..=hi]);
    let peak = values[top];
    if !(peak > 4.0 * floor) || peak <= 0.0 {
        return Err(Error::Numeric(format!(
            "no peak 6 dB above the median in [{f_lo}, {f_hi}] Hz"
        )));
    }
    let half_level = floor + 0.5 * (peak - floor);
    let mut left = top;
    while left > lo && values[left - 1] > half_level {
        left -= 1;
    }
    let mut right = top;
    while right < hi && values[right + 1] > half_level {
        right += 1;
    }
    let hw_bins = ((right - left) as f64 / 2.0).max(0.5);
    let reach = (4.0 * hw_bins).ceil().max(4.0) as usize;
    let w_lo = top.saturating_sub(reach).max(lo);
    let w_hi = (top + reach).min(hi);
    let df = spectrum.df();
    let points: Vec<(f64, f64)> = (w_lo..=w_hi)
        .map(|k| (spectrum.frequency(k), values[k]))
        .collect();
    let f_top = spectrum.frequency(top);

    let centroid = || {
        let (mut num, mut den) = (0.0, 0.0);
        for (k, v) in values.iter().enumerate().take(right + 1).skip(left) {
            let w = v - floor;
            num += w * spectrum.frequency(k);
            den += w;
        }
        num / den
    };

    if points.len() < 5 {
        return Ok(PeakEstimate {
            frequency: centroid(),
            sigma: df,
            amplitude: peak - floor,
            half_width: hw_bins * df,
            background: floor,
            converged: false,
        });
    }
    // Parameters relative to the peak: (height, offset from f_top, width,
    // background).
    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        let (a, f0, w, b) = (p[0], f_top + p[1], p[2], p[3]);
        if !(w > 0.0) {
            return Err(Error::Numeric("non-positive width".into()));
        }
        Ok(points
            .iter()
            .map(|&(f, v)| (a / (1.0 + ((f - f0) / w).powi(2)) + b - v) / peak)
            .collect())
    };
    let out = levenberg_marquardt(
        residuals,
        &[peak - floor, 0.0, hw_bins * df, floor],
        &[peak, df, hw_bins * df, peak],
        &LmOptions::default(),
    )?;
    let f0 = f_top + out.params[1];
    let inside = f0 >= points[0].0 && f0 <= points[points.len() - 1].0;
    let sigmas = out.sigmas();
    if !inside {
        return Ok(PeakEstimate {
            frequency: centroid(),
            sigma: df,
            amplitude: peak - floor,
            half_width: hw_bins * df,
            background: floor,
            converged: false,
        });
    }
    Ok(PeakEstimate {
        frequency: f0,
        sigma: sigmas[1],
        amplitude: out.params[0],
        half_width: out.params[2].abs(),
        background: out.params[3],
        converged: out.converged,
    })
}
