use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::lm::{levenberg_marquardt, LmOptions, LmOutcome};
use super::FitResult;
use crate::consts::TAU;
use crate::error::{ensure_param, Error, Result};
use crate::trace::TimeTrace;

/// One sinusoidal detuning modulation `α cos(Ω t + φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanModulation {
    pub alpha: f64,
    /// rad/s.
    pub omega: f64,
    /// rad.
    pub phi: f64,
}

/// Parameters of a laser scan across a modulated resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanParams {
    /// rad/s.
    pub kappa: f64,
    /// Laser sweep rate, Hz/s.
    pub scan_rate: f64,
    /// Detuning at `t = 0`.
    pub nu_offset: f64,
    pub i_max: f64,
    pub i_bg: f64,
    pub modulations: Vec<ScanModulation>,
}

impl ScanParams {
    /// `dν/dt` of the ramp, `4π · scan_rate / κ`.
    pub fn ramp_rate(&self) -> f64 {
        2.0 * TAU * self.scan_rate / self.kappa
    }

    pub fn detuning(&self, t: f64) -> f64 {
        self.ramp_rate() * t
            + self.nu_offset
            + self
                .modulations
                .iter()
                .map(|m| m.alpha * (m.omega * t + m.phi).cos())
                .sum::<f64>()
    }
}

/// Transmission `i_bg + (i_max − i_bg) / (1 + ν(t)²)`.
pub fn scan_model(params: &ScanParams, t: f64) -> f64 {
    let nu = params.detuning(t);
    params.i_bg + (params.i_max - params.i_bg) / (1.0 + nu * nu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanFitOptions {
    /// Joint phase offsets tried in the final fit.
    pub multistarts: usize,
    /// Upper limit of the modulation-frequency search, Hz (default Nyquist).
    pub max_modulation_frequency: Option<f64>,
}

impl Default for ScanFitOptions {
    fn default() -> Self {
        Self {
            multistarts: 8,
            max_modulation_frequency: None,
        }
    }
}

const FIXED: usize = 4;

fn unpack(p: &[f64], scan_rate: f64) -> ScanParams {
    ScanParams {
        kappa: p[0],
        scan_rate,
        nu_offset: p[1],
        i_max: p[2],
        i_bg: p[3],
        modulations: p[FIXED..]
            .chunks_exact(3)
            .map(|c| ScanModulation {
                alpha: c[0],
                omega: c[1],
                phi: c[2],
            })
            .collect(),
    }
}

fn pack(s: &ScanParams) -> Vec<f64> {
    let mut p = vec![s.kappa, s.nu_offset, s.i_max, s.i_bg];
    for m in &s.modulations {
        p.extend([m.alpha, m.omega, m.phi]);
    }
    p
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

struct ScanProblem<'a> {
    times: Vec<f64>,
    data: &'a [f64],
    scan_rate: f64,
}

impl ScanProblem<'_> {
    fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        if !(p[0] != 0.0 && p[0].is_finite()) {
            return Err(Error::Numeric("degenerate linewidth".into()));
        }
        let s = unpack(p, self.scan_rate);
        Ok(self
            .times
            .iter()
            .zip(self.data)
            .map(|(&t, &d)| scan_model(&s, t) - d)
            .collect())
    }

    fn fit(&self, start: &ScanParams) -> Result<LmOutcome> {
        let p0 = pack(start);
        let span = (start.i_max - start.i_bg).abs();
        let mut scale = vec![
            start.kappa.abs(),
            start.nu_offset.abs().max(1.0),
            span,
            span,
        ];
        for m in &start.modulations {
            scale.extend([m.alpha.abs().max(1e-2), m.omega.abs(), 1.0]);
        }
        levenberg_marquardt(|p| self.residuals(p), &p0, &scale, &LmOptions::default())
    }

    /// Plain Lorentzian start: background from the record ends, linewidth and
    /// centre from the area and first moment of the dip-free excess.
    fn initial_lorentzian(&self, dt: f64) -> Result<ScanParams> {
        let n = self.data.len();
        let edge = (n / 20).max(1);
        let ends: Vec<f64> = self.data[..edge]
            .iter()
            .chain(&self.data[n - edge..])
            .copied()
            .collect();
        let i_bg = median(ends);
        let smooth = 5.min(n);
        let i_max = self
            .data
            .windows(smooth)
            .map(|w| w.iter().sum::<f64>() / smooth as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let (mut area, mut moment) = (0.0, 0.0);
        for (&t, &d) in self.times.iter().zip(self.data) {
            area += (d - i_bg) * dt;
            moment += (d - i_bg) * t * dt;
        }
        if !(area > 0.0) || !(i_max > i_bg) {
            return Err(Error::Numeric(
                "scan shows no resonance above the background".into(),
            ));
        }
        let ramp = self.scan_rate.signum() * std::f64::consts::PI * (i_max - i_bg) / area;
        let centre = moment / area;
        Ok(ScanParams {
            kappa: 2.0 * TAU * self.scan_rate / ramp,
            scan_rate: self.scan_rate,
            nu_offset: -ramp * centre,
            i_max,
            i_bg,
            modulations: Vec::new(),
        })
    }
}

/// Least-squares sinusoid `A cos ωt + B sin ωt + c` on the masked samples;
/// returns `(explained power, A, B)`.
fn sinusoid_fit(times: &[f64], values: &[f64], omega: f64) -> (f64, f64, f64) {
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (&t, &v) in times.iter().zip(values) {
        let (s, c) = (omega * t).sin_cos();
        let row = nalgebra::Vector3::new(c, s, 1.0);
        ata += row * row.transpose();
        atb += row * v;
    }
    match ata.cholesky() {
        Some(ch) => {
            let x = ch.solve(&atb);
            (x.dot(&atb), x[0], x[1])
        }
        None => (0.0, 0.0, 0.0),
    }
}

/// Finds the dominant residual modulation of the current model by exact
/// inversion of the transmission on the resonance flanks.
fn next_modulation(
    problem: &ScanProblem,
    current: &ScanParams,
    fs: f64,
    f_max: f64,
) -> Option<ScanModulation> {
    let span = current.i_max - current.i_bg;
    let n = problem.data.len();
    let mut mask_t = Vec::new();
    let mut mask_v = Vec::new();
    let size = (4 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (i, (&t, &d)) in problem.times.iter().zip(problem.data).enumerate() {
        let occ = (d - current.i_bg) / span;
        let nu_model = current.detuning(t);
        if occ > 0.1 && occ < 0.9 && nu_model.abs() > 0.33 {
            let nu = nu_model.signum() * (1.0 / occ - 1.0).sqrt();
            let r = nu - nu_model;
            mask_t.push(t);
            mask_v.push(r);
            buf[i] = Complex64::new(r, 0.0);
        }
    }
    if mask_t.len() < 16 {
        return None;
    }
    let duration = n as f64 / fs;
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let df = fs / size as f64;
    let k_lo = ((2.0 / duration) / df).ceil() as usize;
    let k_hi = ((f_max / df).floor() as usize).min(size / 2);
    let k = (k_lo..=k_hi).max_by(|&a, &b| buf[a].norm_sqr().total_cmp(&buf[b].norm_sqr()))?;

    // Golden-section refinement of the exact least-squares periodogram.
    let power = |f: f64| sinusoid_fit(&mask_t, &mask_v, TAU * f).0;
    let (mut a, mut b) = ((k as f64 - 1.5) * df, (k as f64 + 1.5) * df);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut pc, mut pd) = (power(c), power(d));
    for _ in 0..60 {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - g * (b - a);
            pc = power(c);
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + g * (b - a);
            pd = power(d);
        }
    }
    let omega = TAU * 0.5 * (a + b);
    let (_, ca, cb) = sinusoid_fit(&mask_t, &mask_v, omega);
    Some(ScanModulation {
        alpha: ca.hypot(cb),
        omega,
        phi: (-cb).atan2(ca),
    })
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(TAU);
    if p > std::f64::consts::PI {
        p -= TAU;
    }
    p
}

/// Maps a fitted parameter set to the canonical branch: positive linewidth,
/// amplitudes and frequencies, phases in (−π, π].
fn canonical(mut s: ScanParams) -> ScanParams {
    if s.kappa < 0.0 {
        s.kappa = -s.kappa;
        s.nu_offset = -s.nu_offset;
        for m in &mut s.modulations {
            m.alpha = -m.alpha;
        }
    }
    for m in &mut s.modulations {
        if m.omega < 0.0 {
            m.omega = -m.omega;
            m.phi = -m.phi;
        }
        if m.alpha < 0.0 {
            m.alpha = -m.alpha;
            m.phi += std::f64::consts::PI;
        }
        m.phi = wrap_phase(m.phi);
    }
    s
}

/// Fits a fast laser scan across a resonance whose detuning is modulated by
/// `n_modes` sinusoids (thermal mechanical motion frozen over the scan).
///
/// The fit proceeds in three stages: a plain Lorentzian; then, one mode at a
/// time, the modulation frequency is located in the periodogram of the
/// detuning residual obtained by exact inversion on the resonance flanks;
/// finally all parameters are refined jointly from
/// [`ScanFitOptions::multistarts`] joint phase offsets, keeping the lowest
/// residual (lowest start index on ties).
///
/// Result parameters: `kappa` (rad/s), `nu_offset`, `i_max`, `i_bg`, then
/// `alpha_k`, `omega_k` (rad/s), `phi_k` for `k = 1..=n_modes`.
pub fn fit_scan(
    transmission: &TimeTrace,
    scan_rate: f64,
    n_modes: usize,
    options: &ScanFitOptions,
) -> Result<FitResult> {
    ensure_param!(
        scan_rate.is_finite() && scan_rate != 0.0,
        "scan rate must be non-zero"
    );
    ensure_param!(
        transmission.len() >= 16 + 3 * n_modes,
        "scan trace too short for {n_modes} modulations"
    );
    ensure_param!(options.multistarts >= 1, "at least one start is required");
    let fs = transmission.sample_rate();
    let f_max = options
        .max_modulation_frequency
        .unwrap_or(fs / 2.0)
        .min(fs / 2.0);
    let problem = ScanProblem {
        times: (0..transmission.len())
            .map(|i| transmission.time(i))
            .collect(),
        data: transmission.samples(),
        scan_rate,
    };
    let start = problem.initial_lorentzian(transmission.dt())?;
    let mut current = unpack(&problem.fit(&start)?.params, scan_rate);

    for _ in 0..n_modes {
        let found = next_modulation(&problem, &current, fs, f_max).ok_or_else(|| {
            Error::Numeric("resonance flanks too sparsely sampled to locate modulations".into())
        })?;
        current.modulations.push(found);
        if let Ok(out) = problem.fit(&current) {
            current = unpack(&out.params, scan_rate);
        }
    }

    let starts = if n_modes == 0 { 1 } else { options.multistarts };
    let outcomes: Vec<Option<LmOutcome>> = (0..starts)
        .into_par_iter()
        .map(|j| {
            let mut s = current.clone();
            for m in &mut s.modulations {
                m.phi += TAU * j as f64 / starts as f64;
            }
            problem.fit(&s).ok()
        })
        .collect();
    let mut best: Option<&LmOutcome> = None;
    for out in outcomes.iter().flatten() {
        if best.map_or(true, |b| out.ssr < b.ssr) {
            best = Some(out);
        }
    }
    let best = best.ok_or_else(|| Error::Numeric("every scan-fit start failed".into()))?;

    let fitted = canonical(unpack(&best.params, scan_rate));
    let sigmas = best.sigmas();
    let mut names = vec![
        "kappa".to_owned(),
        "nu_offset".to_owned(),
        "i_max".to_owned(),
        "i_bg".to_owned(),
    ];
    for k in 1..=n_modes {
        names.extend([
            format!("alpha_{k}"),
            format!("omega_{k}"),
            format!("phi_{k}"),
        ]);
    }
    let transit = 2.0 / fitted.ramp_rate().abs();
    let warnings = fitted
        .modulations
        .iter()
        .enumerate()
        .filter(|(_, m)| TAU / m.omega > transit)
        .map(|(k, m)| {
            format!(
                "modulation {} period {:.3e} s exceeds the linewidth transit time {:.3e} s",
                k + 1,
                TAU / m.omega,
                transit
            )
        })
        .collect();
    Ok(FitResult {
        names,
        params: pack(&fitted),
        sigmas,
        residual_norm: best.ssr.sqrt(),
        converged: best.converged,
        n_iter: best.n_iter,
        warnings,
    })
}
