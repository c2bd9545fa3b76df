//! Power spectral densities, band statistics and intermodulation proxies.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{ensure_param, Error, Result};
use crate::trace::{TimeTrace, UnitTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rect",
        }
    }

    /// Periodic (DFT-even) window coefficients.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / len as f64).cos())
                .collect(),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(Window::Hann),
            "rect" | "rectangular" => Ok(Window::Rectangular),
            other => Err(Error::InvalidParameter(format!(
                "unknown window {other:?} (expected hann or rect)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchConfig {
    pub segment_length: usize,
    pub overlap: f64,
    pub window: Window,
}

impl WelchConfig {
    /// Hann window with 50% overlap.
    pub fn new(segment_length: usize) -> Self {
        Self {
            segment_length,
            overlap: 0.5,
            window: Window::Hann,
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_overlap(mut self, overlap: f64) -> Self {
        self.overlap = overlap;
        self
    }
}

/// How a spectrum was estimated; echoed into spectrum files.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMeta {
    pub window: String,
    pub overlap: f64,
    pub segments: usize,
}

impl Default for SpectrumMeta {
    fn default() -> Self {
        Self {
            window: "none".to_owned(),
            overlap: 0.0,
            segments: 0,
        }
    }
}

/// Single-sided PSD on the uniform grid `f_k = k·df`, `k = 0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    df: f64,
    values: Vec<f64>,
    unit: UnitTag,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(df: f64, values: Vec<f64>, unit: UnitTag) -> Result<Self> {
        ensure_param!(df.is_finite() && df > 0.0, "df must be positive, got {df}");
        ensure_param!(
            values.iter().all(|v| v.is_finite() && *v >= 0.0),
            "spectral densities must be finite and non-negative"
        );
        Ok(Self {
            df,
            values,
            unit,
            meta: SpectrumMeta::default(),
        })
    }

    pub fn with_meta(mut self, meta: SpectrumMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> &UnitTag {
        &self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequency(&self, index: usize) -> f64 {
        index as f64 * self.df
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.frequency(k)).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.frequency(self.len().saturating_sub(1))
    }

    /// Index of the grid point nearest to `f`.
    pub fn bin(&self, f: f64) -> usize {
        ((f / self.df).round().max(0.0) as usize).min(self.len().saturating_sub(1))
    }

    /// `df · Σ values`.
    pub fn total_power(&self) -> f64 {
        self.df * self.values.iter().sum::<f64>()
    }

    /// Index of the largest value with frequency in `[f_lo, f_hi]`; the
    /// lowest such index wins ties.
    pub fn argmax_in(&self, f_lo: f64, f_hi: f64) -> Result<usize> {
        let (lo, hi) = self.index_range(f_lo, f_hi)?;
        let mut best = lo;
        for k in lo..=hi {
            if self.values[k] > self.values[best] {
                best = k;
            }
        }
        Ok(best)
    }

    /// Scales values so that their maximum over `[f_lo, f_hi]` is one.
    pub fn normalized_to_max(&self, f_lo: f64, f_hi: f64) -> Result<Spectrum> {
        let peak = self.values[self.argmax_in(f_lo, f_hi)?];
        if peak <= 0.0 {
            return Err(Error::Numeric(format!(
                "cannot normalize: spectrum vanishes on [{f_lo}, {f_hi}] Hz"
            )));
        }
        Ok(Spectrum {
            df: self.df,
            values: self.values.iter().map(|v| v / peak).collect(),
            unit: UnitTag::dimensionless(),
            meta: self.meta.clone(),
        })
    }

    fn index_range(&self, f_lo: f64, f_hi: f64) -> Result<(usize, usize)> {
        ensure_param!(
            f_lo <= f_hi && f_lo >= 0.0,
            "invalid frequency span [{f_lo}, {f_hi}] Hz"
        );
        let lo = (f_lo / self.df).ceil() as usize;
        let hi = ((f_hi / self.df).floor() as usize).min(self.len().saturating_sub(1));
        ensure_param!(
            lo <= hi && lo < self.len(),
            "frequency span [{f_lo}, {f_hi}] Hz contains no grid points"
        );
        Ok((lo, hi))
    }
}

/// Segments averaged per parallel task; fixed so the summation order does
/// not depend on the thread count.
const SEGMENTS_PER_TASK: usize = 8;

/// Welch estimate of the single-sided PSD.
///
/// The global mean is removed first. Each segment is windowed, transformed,
/// and the periodograms are averaged; scaling is `c_k |X_k|² / (fs Σ w²)`
/// with `c_k = 2` except at DC and Nyquist, so that `df · Σ S` equals the
/// mean windowed power (the variance for a rectangular window).
pub fn welch_psd(trace: &TimeTrace, config: &WelchConfig) -> Result<Spectrum> {
    let len = config.segment_length;
    ensure_param!(
        len >= 2 && len.is_power_of_two(),
        "segment length must be a power of two >= 2, got {len}"
    );
    ensure_param!(
        (0.0..1.0).contains(&config.overlap),
        "overlap must lie in [0, 1), got {}",
        config.overlap
    );
    ensure_param!(
        trace.len() >= len,
        "trace of {} samples is shorter than one segment ({len})",
        trace.len()
    );
    let step = ((len as f64 * (1.0 - config.overlap)).round() as usize).max(1);
    let segments = 1 + (trace.len() - len) / step;
    let window = config.window.coefficients(len);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let mean = trace.mean();
    let samples = trace.samples();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(len);
    let half = len / 2;

    let tasks: Vec<Vec<f64>> = (0..segments.div_ceil(SEGMENTS_PER_TASK))
        .into_par_iter()
        .map(|task| {
            let mut acc = vec![0.0; half + 1];
            let mut buf = vec![Complex64::new(0.0, 0.0); len];
            let first = task * SEGMENTS_PER_TASK;
            for seg in first..(first + SEGMENTS_PER_TASK).min(segments) {
                let start = seg * step;
                for (b, (x, w)) in buf
                    .iter_mut()
                    .zip(samples[start..start + len].iter().zip(&window))
                {
                    *b = Complex64::new((x - mean) * w, 0.0);
                }
                fft.process(&mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b.norm_sqr();
                }
            }
            acc
        })
        .collect();

    let mut sum = vec![0.0; half + 1];
    for acc in &tasks {
        for (s, a) in sum.iter_mut().zip(acc) {
            *s += a;
        }
    }
    let fs = trace.sample_rate();
    let scale = 1.0 / (fs * window_power * segments as f64);
    let values = sum
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let c = if k == 0 || k == half { 1.0 } else { 2.0 };
            c * s * scale
        })
        .collect();
    let unit = UnitTag::new(&trace.unit().psd())?;
    Ok(
        Spectrum::new(fs / len as f64, values, unit)?.with_meta(SpectrumMeta {
            window: config.window.name().to_owned(),
            overlap: config.overlap,
            segments,
        }),
    )
}

/// Welch PSD of the relative intensity fluctuation `I/⟨I⟩ − 1`.
pub fn rin_spectrum(photocurrent: &TimeTrace, config: &WelchConfig) -> Result<Spectrum> {
    let mean = photocurrent.mean();
    ensure_param!(
        mean != 0.0 && mean.is_finite(),
        "relative intensity noise needs a non-zero mean photocurrent"
    );
    let relative = photocurrent
        .map(|i| i / mean - 1.0)
        .with_unit(UnitTag::dimensionless());
    welch_psd(&relative, config)
}

/// Integral of the piecewise-linear interpolant of the PSD over
/// `[f_lo, f_hi]`.
pub fn band_power(spectrum: &Spectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    ensure_param!(
        f_lo >= 0.0 && f_lo < f_hi,
        "band [{f_lo}, {f_hi}] Hz is empty or negative"
    );
    ensure_param!(
        spectrum.len() >= 2 && f_hi <= spectrum.max_frequency() * (1.0 + 1e-12),
        "band upper edge {f_hi} Hz exceeds the spectrum range"
    );
    let df = spectrum.df();
    let v = spectrum.values();
    let value_at = |f: f64| {
        let x = f / df;
        let k = (x.floor() as usize).min(v.len() - 2);
        let t = x - k as f64;
        v[k] + t * (v[k + 1] - v[k])
    };
    let mut knots = vec![f_lo];
    let first = (f_lo / df).floor() as usize + 1;
    let mut k = first;
    while (k as f64) * df < f_hi {
        knots.push(k as f64 * df);
        k += 1;
    }
    knots.push(f_hi);
    Ok(knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (value_at(w[0]) + value_at(w[1])))
        .sum())
}

/// Root of the band-integrated PSD.
pub fn band_rms(spectrum: &Spectrum, f_lo: f64, f_hi: f64) -> Result<f64> {
    Ok(band_power(spectrum, f_lo, f_hi)?.max(0.0).sqrt())
}

/// Signal-band power over the noise-band density times the signal
/// bandwidth, in dB.
pub fn snr_db(spectrum: &Spectrum, signal_band: (f64, f64), noise_band: (f64, f64)) -> Result<f64> {
    let (s_lo, s_hi) = signal_band;
    let (n_lo, n_hi) = noise_band;
    ensure_param!(
        s_hi <= n_lo || n_hi <= s_lo,
        "signal band [{s_lo}, {s_hi}] Hz overlaps noise band [{n_lo}, {n_hi}] Hz"
    );
    let signal = band_power(spectrum, s_lo, s_hi)?;
    let noise = band_power(spectrum, n_lo, n_hi)?;
    if noise <= 0.0 {
        return Err(Error::Numeric("noise band carries no power".into()));
    }
    let noise_in_signal_band = noise / (n_hi - n_lo) * (s_hi - s_lo);
    Ok(10.0 * (signal / noise_in_signal_band).log10())
}

/// Unit of the n-fold product proxies built from a PSD with `unit`.
fn proxy_unit(unit: &UnitTag, order: u32) -> UnitTag {
    let tag = match unit.as_str() {
        "1/Hz" => Some("1/Hz".to_owned()),
        u => u
            .strip_suffix("^2/Hz")
            .map(|base| format!("{base}^{}/Hz", 2 * order)),
    };
    tag.and_then(|t| UnitTag::new(&t).ok())
        .unwrap_or_else(|| UnitTag::known("arb"))
}

/// Second-order proxies `(S₊, S₋)`.
#[derive(Debug, Clone)]
pub struct Tin2 {
    pub s_plus: Spectrum,
    pub s_minus: Spectrum,
}

/// Third-order proxies `(S₊₊, S₊₋, S₋₋)`.
#[derive(Debug, Clone)]
pub struct Tin3 {
    pub s_pp: Spectrum,
    pub s_pm: Spectrum,
    pub s_mm: Spectrum,
}

/// Zero-padded transform plan large enough that circular convolutions and
/// correlations of up to three copies of the grid do not wrap.
struct ProxyTransform {
    n: usize,
    size: usize,
    planner: FftPlanner<f64>,
}

impl ProxyTransform {
    fn new(n: usize) -> Self {
        Self {
            n,
            size: (3 * n).next_power_of_two().max(4),
            planner: FftPlanner::new(),
        }
    }

    fn forward(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.size];
        // The DC bin carries the operating point, not fluctuations.
        for (b, v) in buf.iter_mut().zip(values).skip(1) {
            *b = Complex64::new(*v, 0.0);
        }
        self.planner.plan_fft_forward(self.size).process(&mut buf);
        buf
    }

    /// Real part of the inverse transform, first `n` entries, scaled.
    fn inverse(&mut self, mut spectrum: Vec<Complex64>, scale: f64) -> Vec<f64> {
        self.planner
            .plan_fft_inverse(self.size)
            .process(&mut spectrum);
        let norm = scale / self.size as f64;
        spectrum[..self.n]
            .iter()
            .map(|c| (c.re * norm).max(0.0))
            .collect()
    }
}

fn proxy_spectrum(template: &Spectrum, values: Vec<f64>, order: u32) -> Spectrum {
    Spectrum {
        df: template.df,
        values,
        unit: proxy_unit(&template.unit, order),
        meta: template.meta.clone(),
    }
}

/// Second-order intermodulation proxies on the input grid:
///
/// ```text
/// S₊(Ω) = Σ_{0<ω<Ω} df S(ω) S(Ω−ω)      S₋(Ω) = Σ_{ω>0} df S(ω) S(ω+Ω)
/// ```
///
/// The DC bin is excluded from every sum.
pub fn tin2_proxies(spectrum: &Spectrum) -> Tin2 {
    let mut t = ProxyTransform::new(spectrum.len());
    let f = t.forward(spectrum.values());
    let df = spectrum.df();
    let conv: Vec<Complex64> = f.iter().map(|a| a * a).collect();
    let corr: Vec<Complex64> = f.iter().map(|a| a.conj() * a).collect();
    Tin2 {
        s_plus: proxy_spectrum(spectrum, t.inverse(conv, df), 2),
        s_minus: proxy_spectrum(spectrum, t.inverse(corr, df), 2),
    }
}

/// Third-order intermodulation proxies on the input grid, Riemann measure
/// `df²`:
///
/// ```text
/// S₊₊(Ω) = Σ_{ω1} Σ_{ω2 ≤ Ω−ω1} S(ω1) S(ω2) S(Ω−ω1−ω2)
/// S₊₋(Ω) = Σ_{ω1} Σ_{ω2 ≤ Ω+ω1} S(ω1) S(ω2) S(Ω+ω1−ω2)
/// S₋₋(Ω) = Σ_{ω1} Σ_{ω2}        S(ω1) S(ω2) S(Ω+ω1+ω2)
/// ```
///
/// evaluated as zero-padded FFT convolutions and correlations.
pub fn tin3_proxies(spectrum: &Spectrum) -> Tin3 {
    let mut t = ProxyTransform::new(spectrum.len());
    let f = t.forward(spectrum.values());
    let df2 = spectrum.df() * spectrum.df();
    let pp: Vec<Complex64> = f.iter().map(|a| a * a * a).collect();
    let pm: Vec<Complex64> = f.iter().map(|a| a.conj() * a * a).collect();
    let mm: Vec<Complex64> = f.iter().map(|a| (a * a).conj() * a).collect();
    Tin3 {
        s_pp: proxy_spectrum(spectrum, t.inverse(pp, df2), 3),
        s_pm: proxy_spectrum(spectrum, t.inverse(pm, df2), 3),
        s_mm: proxy_spectrum(spectrum, t.inverse(mm, df2), 3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NoiseStream;

    fn white(len: usize, fs: f64, seed: u64) -> TimeTrace {
        let mut s = NoiseStream::new(seed, 9);
        TimeTrace::new(
            (0..len).map(|_| s.normal()).collect(),
            fs,
            UnitTag::detuning(),
        )
        .unwrap()
    }

    fn tones(n: usize, bins: &[usize]) -> Spectrum {
        let mut v = vec![0.0; n];
        for &b in bins {
            v[b] = 1.0;
        }
        Spectrum::new(1.0, v, UnitTag::new("nu^2/Hz").unwrap()).unwrap()
    }

    fn peak(s: &Spectrum) -> usize {
        s.argmax_in(0.0, s.max_frequency()).unwrap()
    }

    #[test]
    fn parseval_rectangular() {
        let tr = white(1 << 16, 1e4, 1);
        let spec = welch_psd(
            &tr,
            &WelchConfig::new(1024)
                .with_window(Window::Rectangular)
                .with_overlap(0.0),
        )
        .unwrap();
        let ratio = spec.total_power() / tr.variance();
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
        assert_eq!(spec.meta.segments, 64);
    }

    #[test]
    fn white_noise_is_flat_at_two_over_fs() {
        let fs = 1e3;
        let spec = welch_psd(&white(1 << 18, fs, 2), &WelchConfig::new(256)).unwrap();
        let interior = &spec.values()[1..spec.len() - 1];
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        assert!((mean * fs / 2.0 - 1.0).abs() < 0.05, "{mean}");
        assert_eq!(spec.unit().as_str(), "nu^2/Hz");
    }

    #[test]
    fn tone_power_is_half_amplitude_squared() {
        let fs = 1024.0;
        let amp = 0.3;
        let tr = TimeTrace::from_fn(1 << 14, fs, UnitTag::detuning(), |t| {
            amp * (std::f64::consts::TAU * 64.0 * t).cos()
        })
        .unwrap();
        let spec = welch_psd(&tr, &WelchConfig::new(1024)).unwrap();
        let p = band_power(&spec, 60.0, 68.0).unwrap();
        assert!((p / (amp * amp / 2.0) - 1.0).abs() < 0.01, "{p}");
        assert_eq!(spec.bin(64.0), peak(&spec));
    }

    #[test]
    fn welch_rejects_bad_arguments() {
        let tr = white(100, 1.0, 0);
        assert!(welch_psd(&tr, &WelchConfig::new(128)).is_err());
        assert!(welch_psd(&tr, &WelchConfig::new(48)).is_err());
        assert!(welch_psd(&tr, &WelchConfig::new(64).with_overlap(1.0)).is_err());
    }

    #[test]
    fn rin_examples() {
        let flat = TimeTrace::new(vec![2.0; 512], 1.0, UnitTag::dimensionless()).unwrap();
        let spec = rin_spectrum(&flat, &WelchConfig::new(64)).unwrap();
        assert!(spec.values().iter().all(|&v| v == 0.0));
        let zero = TimeTrace::new(vec![0.0; 512], 1.0, UnitTag::dimensionless()).unwrap();
        assert!(rin_spectrum(&zero, &WelchConfig::new(64)).is_err());

        let fs = 1e4;
        let noisy = white(1 << 16, fs, 3).map(|x| 5.0 * (1.0 + 0.01 * x));
        let rin = rin_spectrum(
            &noisy,
            &WelchConfig::new(512)
                .with_window(Window::Rectangular)
                .with_overlap(0.0),
        )
        .unwrap();
        let p = band_power(&rin, 0.0, fs / 2.0).unwrap();
        assert!((p / 1e-4 - 1.0).abs() < 0.05, "{p}");
    }

    #[test]
    fn band_rms_examples() {
        let unit = UnitTag::new("nu^2/Hz").unwrap();
        let zero = Spectrum::new(0.5, vec![0.0; 100], unit.clone()).unwrap();
        assert_eq!(band_rms(&zero, 1.0, 20.0).unwrap(), 0.0);
        let flat = Spectrum::new(0.5, vec![3.0; 100], unit).unwrap();
        let rms = band_rms(&flat, 1.3, 20.9).unwrap();
        assert!((rms - (3.0f64 * 19.6).sqrt()).abs() < 1e-12);
        assert!(band_rms(&flat, 5.0, 5.0).is_err());
        assert!(band_rms(&flat, 5.0, 60.0).is_err());
    }

    #[test]
    fn snr_examples() {
        let unit = UnitTag::new("nu^2/Hz").unwrap();
        let flat = Spectrum::new(1.0, vec![2.0; 200], unit.clone()).unwrap();
        assert!(snr_db(&flat, (10.0, 20.0), (50.0, 90.0)).unwrap().abs() < 1e-12);
        let mut v = vec![1.0; 200];
        for x in &mut v[5..=25] {
            *x = 10.0;
        }
        let stepped = Spectrum::new(1.0, v, unit.clone()).unwrap();
        assert!((snr_db(&stepped, (10.0, 20.0), (50.0, 90.0)).unwrap() - 10.0).abs() < 1e-12);
        assert!(snr_db(&stepped, (10.0, 60.0), (50.0, 90.0)).is_err());
        let silent = Spectrum::new(1.0, vec![0.0; 200], unit).unwrap();
        assert!(snr_db(&silent, (10.0, 20.0), (50.0, 90.0)).is_err());
    }

    #[test]
    fn tin2_peaks() {
        let single = tin2_proxies(&tones(64, &[5]));
        assert_eq!(peak(&single.s_plus), 10);
        let two = tin2_proxies(&tones(64, &[4, 11]));
        let sp = two.s_plus.values();
        for k in [8, 15, 22] {
            assert!(sp[k] > 0.5, "S+ at {k}");
        }
        assert_eq!(peak(&two.s_plus), 15);
        assert!(two.s_minus.values()[7] > 0.5);
        assert!(two.s_minus.values()[1..7].iter().all(|&v| v < 1e-12));
        assert_eq!(two.s_minus.unit().as_str(), "nu^4/Hz");
    }

    #[test]
    fn tin3_peaks() {
        let single = tin3_proxies(&tones(64, &[5]));
        assert_eq!(peak(&single.s_pp), 15);
        assert_eq!(peak(&single.s_pm), 5);
        let three = tin3_proxies(&tones(1100, &[103, 296, 652]));
        assert_eq!(peak(&three.s_pp), 1051);
        assert_eq!(three.s_pp.unit().as_str(), "nu^6/Hz");
    }

    #[test]
    fn zero_spectrum_gives_zero_proxies() {
        let z = tones(32, &[]);
        let t2 = tin2_proxies(&z);
        let t3 = tin3_proxies(&z);
        for s in [&t2.s_plus, &t2.s_minus, &t3.s_pp, &t3.s_pm, &t3.s_mm] {
            assert!(s.values().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn normalization() {
        let s = tones(32, &[3, 7]).normalized_to_max(5.0, 10.0).unwrap();
        assert_eq!(s.values()[7], 1.0);
        assert!(tones(32, &[3]).normalized_to_max(5.0, 10.0).is_err());
    }
}
