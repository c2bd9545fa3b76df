//! Software lock-in demodulation and third-order mixing tests.
//!
//! Quadratures follow `s(t) ≈ X(t) cos Ωt + Y(t) sin Ωt` with `t = 0` at the
//! first sample, so a tone `A cos(Ωt + φ)` demodulates to
//! `X = A cos φ`, `Y = −A sin φ`.

use rayon::prelude::*;

use crate::error::{ensure_param, Error, Result};
use crate::trace::TimeTrace;

/// Filter settling time discarded at each end, in units of `1/bandwidth`.
pub const SETTLING_BANDWIDTHS: f64 = 5.0;

/// Output sample rate in units of the bandwidth.
pub const OVERSAMPLING: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureTrace {
    pub x: TimeTrace,
    pub y: TimeTrace,
    /// Hz.
    pub carrier: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Noise-equivalent bandwidth of the low-pass filter, Hz.
    pub noise_bandwidth: f64,
}

impl QuadratureTrace {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Number of samples dropped at each end by [`QuadratureTrace::settled`].
    pub fn settling_samples(&self) -> usize {
        (SETTLING_BANDWIDTHS / self.bandwidth * self.x.sample_rate()).ceil() as usize
    }

    /// The record without the filter transients at both ends.
    pub fn settled(&self) -> Result<QuadratureTrace> {
        let skip = self.settling_samples();
        if 2 * skip + 2 > self.len() {
            return Err(Error::InvalidParameter(format!(
                "record too short to discard {} s of filter settling at both ends",
                SETTLING_BANDWIDTHS / self.bandwidth
            )));
        }
        let range = skip..self.len() - skip;
        Ok(QuadratureTrace {
            x: self.x.slice(range.clone()),
            y: self.y.slice(range),
            ..self.clone()
        })
    }

    fn check_grid(&self, other: &QuadratureTrace) -> Result<()> {
        self.x.check_aligned(&other.x)
    }
}

/// Hann-windowed sinc low-pass with cutoff `cutoff / fs` cycles per sample,
/// `len` taps (odd), unit DC gain.
pub fn lowpass_taps(cutoff: f64, fs: f64, len: usize) -> Vec<f64> {
    let centre = (len / 2) as f64;
    let fc = cutoff / fs;
    let mut taps: Vec<f64> = (0..len)
        .map(|j| {
            let u = j as f64 - centre;
            let sinc = if u == 0.0 {
                2.0 * fc
            } else {
                (std::f64::consts::TAU * fc * u).sin() / (std::f64::consts::PI * u)
            };
            let w = 0.5 + 0.5 * (std::f64::consts::PI * u / (centre + 1.0)).cos();
            sinc * w
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Extracts the quadratures of `trace` at `carrier` (Hz).
///
/// The record is mixed with `2 cos Ωt` and `2 sin Ωt`, low-passed by a
/// zero-delay linear-phase FIR of length `⌈4 fs / bandwidth⌉` (odd) and
/// decimated to at least eight samples per `1/bandwidth`. Output samples
/// near either end see a truncated filter; see [`QuadratureTrace::settled`].
pub fn demodulate(trace: &TimeTrace, carrier: f64, bandwidth: f64) -> Result<QuadratureTrace> {
    let fs = trace.sample_rate();
    ensure_param!(
        bandwidth > 0.0 && bandwidth < carrier && carrier < fs / 2.0,
        "demodulation needs 0 < bandwidth < carrier < fs/2, got bandwidth {bandwidth} Hz, carrier {carrier} Hz, fs {fs} Hz"
    );
    let mut len = (4.0 * fs / bandwidth).ceil() as usize;
    if len % 2 == 0 {
        len += 1;
    }
    let taps = lowpass_taps(bandwidth, fs, len);
    let half = len / 2;
    let decimation = ((fs / (OVERSAMPLING * bandwidth)).floor() as usize).max(1);
    let omega = std::f64::consts::TAU * carrier;
    let samples = trace.samples();
    let n = samples.len();

    let (mix_c, mix_s): (Vec<f64>, Vec<f64>) = samples
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let (sin, cos) = (omega * i as f64 / fs).sin_cos();
            (2.0 * s * cos, 2.0 * s * sin)
        })
        .unzip();

    let outputs = n.div_ceil(decimation);
    let (x, y): (Vec<f64>, Vec<f64>) = (0..outputs)
        .into_par_iter()
        .map(|k| {
            let centre = k * decimation;
            let lo = centre.saturating_sub(half);
            let hi = (centre + half).min(n - 1);
            let mut acc_x = 0.0;
            let mut acc_y = 0.0;
            for i in lo..=hi {
                let h = taps[i + half - centre];
                acc_x += h * mix_c[i];
                acc_y += h * mix_s[i];
            }
            (acc_x, acc_y)
        })
        .unzip();

    let out_rate = fs / decimation as f64;
    let noise_bandwidth = fs * taps.iter().map(|h| h * h).sum::<f64>() / 2.0;
    Ok(QuadratureTrace {
        x: TimeTrace::new(x, out_rate, trace.unit().clone())?,
        y: TimeTrace::new(y, out_rate, trace.unit().clone())?,
        carrier,
        bandwidth,
        noise_bandwidth,
    })
}

/// Quadratures expected at `Ω1 + Ω2 + Ω3` from cubic mixing, without the
/// overall scale:
///
/// ```text
/// X4 = X1X2X3 − X1Y2Y3 − X2Y1Y3 − X3Y1Y2
/// Y4 = X1X2Y3 + X1X3Y2 + X2X3Y1 − Y1Y2Y3
/// ```
pub fn predict_third_order(
    q1: &QuadratureTrace,
    q2: &QuadratureTrace,
    q3: &QuadratureTrace,
) -> Result<QuadratureTrace> {
    q1.check_grid(q2)?;
    q1.check_grid(q3)?;
    let (x1, y1) = (q1.x.samples(), q1.y.samples());
    let (x2, y2) = (q2.x.samples(), q2.y.samples());
    let (x3, y3) = (q3.x.samples(), q3.y.samples());
    let mut x4 = Vec::with_capacity(q1.len());
    let mut y4 = Vec::with_capacity(q1.len());
    for i in 0..q1.len() {
        x4.push(
            x1[i] * x2[i] * x3[i]
                - x1[i] * y2[i] * y3[i]
                - x2[i] * y1[i] * y3[i]
                - x3[i] * y1[i] * y2[i],
        );
        y4.push(
            x1[i] * x2[i] * y3[i] + x1[i] * x3[i] * y2[i] + x2[i] * x3[i] * y1[i]
                - y1[i] * y2[i] * y3[i],
        );
    }
    Ok(QuadratureTrace {
        x: TimeTrace::new(x4, q1.x.sample_rate(), q1.x.unit().clone())?,
        y: TimeTrace::new(y4, q1.x.sample_rate(), q1.x.unit().clone())?,
        carrier: q1.carrier + q2.carrier + q3.carrier,
        bandwidth: q1.bandwidth.min(q2.bandwidth).min(q3.bandwidth),
        noise_bandwidth: q1.noise_bandwidth,
    })
}

fn centred_moments(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        saa += dx * dx;
        sbb += dy * dy;
        sab += dx * dy;
    }
    (saa / n, sbb / n, sab / n)
}

/// Pearson correlation coefficient.
pub fn pearson(a: &TimeTrace, b: &TimeTrace) -> Result<f64> {
    ensure_param!(
        a.len() == b.len() && a.len() >= 2,
        "pearson needs two records of equal length >= 2"
    );
    let (saa, sbb, sab) = centred_moments(a.samples(), b.samples());
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(Error::InvalidParameter(
            "pearson correlation of a constant record is undefined".into(),
        ));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Total-least-squares slope with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsFit {
    pub beta: f64,
    pub sigma: f64,
}

/// Orthogonal-regression slope of `meas` against `pred`, both mean-removed.
///
/// The slope is the direction of the major eigenvector of the 2×2 second
/// moment matrix. The uncertainty uses the errors-in-variables variance for
/// equal error variances on both axes (Fuller, *Measurement Error Models*,
/// §1.3).
pub fn tls_fit(pred: &TimeTrace, meas: &TimeTrace) -> Result<TlsFit> {
    ensure_param!(
        pred.len() == meas.len() && pred.len() >= 3,
        "tls_fit needs two records of equal length >= 3"
    );
    let (mxx, myy, mxy) = centred_moments(pred.samples(), meas.samples());
    if mxx <= 0.0 || myy <= 0.0 {
        return Err(Error::InvalidParameter(
            "tls_fit needs non-constant records".into(),
        ));
    }
    if mxy == 0.0 {
        return Err(Error::Numeric(
            "uncorrelated records: total-least-squares slope is undefined".into(),
        ));
    }
    let diff = myy - mxx;
    let beta = (diff + (diff * diff + 4.0 * mxy * mxy).sqrt()) / (2.0 * mxy);

    let n = pred.len() as f64;
    // Moments with the n − 1 normalization.
    let scale = n / (n - 1.0);
    let (m_xx, m_yy, m_xy) = (mxx * scale, myy * scale, mxy * scale);
    let s_vv = ((n - 1.0) / (n - 2.0) * (m_yy - 2.0 * beta * m_xy + beta * beta * m_xx)).max(0.0);
    let s_uu = s_vv / (1.0 + beta * beta);
    let s_uv = -beta * s_uu;
    let true_xx = m_xx - s_uu;
    if true_xx <= 0.0 {
        return Err(Error::Numeric(
            "error variance exceeds the predictor variance; slope is not identified".into(),
        ));
    }
    let var = (true_xx * s_vv + s_uu * s_vv - s_uv * s_uv) / ((n - 1.0) * true_xx * true_xx);
    Ok(TlsFit {
        beta,
        sigma: var.max(0.0).sqrt(),
    })
}

/// Predicted-versus-measured comparison of one sum-frequency component.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub pearson_x: f64,
    pub pearson_y: f64,
    pub beta_x: TlsFit,
    pub beta_y: TlsFit,
    pub n_samples: usize,
    /// Approximate number of statistically independent samples used to
    /// scale the TLS uncertainties.
    pub n_independent: f64,
}

/// Correlates predicted and measured quadratures after discarding filter
/// settling at both ends.
///
/// Decimated quadratures are oversampled relative to the filter bandwidth,
/// so neighbouring samples are correlated; the TLS uncertainties are
/// inflated by `sqrt(n / n_independent)` with
/// `n_independent = n · 2 B_noise / f_out`.
pub fn correlate(pred: &QuadratureTrace, meas: &QuadratureTrace) -> Result<CorrelationReport> {
    pred.check_grid(meas)?;
    let p = pred.settled()?;
    let m = meas.settled()?;
    let n = p.len();
    let n_independent =
        (n as f64 * 2.0 * meas.noise_bandwidth / meas.x.sample_rate()).clamp(3.0, n as f64);
    let inflate = (n as f64 / n_independent).sqrt();
    let mut beta_x = tls_fit(&p.x, &m.x)?;
    let mut beta_y = tls_fit(&p.y, &m.y)?;
    beta_x.sigma *= inflate;
    beta_y.sigma *= inflate;
    Ok(CorrelationReport {
        pearson_x: pearson(&p.x, &m.x)?,
        pearson_y: pearson(&p.y, &m.y)?,
        beta_x,
        beta_y,
        n_samples: n,
        n_independent,
    })
}

/// Demodulates three source tones and their sum frequency from one record
/// and compares the cubic-mixing prediction with the measurement.
pub fn third_order_correlation(
    trace: &TimeTrace,
    sources: [f64; 3],
    bandwidth: f64,
) -> Result<CorrelationReport> {
    let sum = sources.iter().sum();
    let carriers = [sources[0], sources[1], sources[2], sum];
    let q: Vec<QuadratureTrace> = carriers
        .par_iter()
        .map(|&f| demodulate(trace, f, bandwidth))
        .collect::<Result<_>>()?;
    let pred = predict_third_order(&q[0], &q[1], &q[2])?;
    correlate(&pred, &q[3])
}
