//! End-to-end acceptance checks. Runs as a plain binary (`harness = false`)
//! so every check prints exactly one PASS/FAIL line, in order, and the
//! timings are not distorted by other tests running concurrently.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use omtk::consts::angular;
use omtk::dynamics::{ringdown_trace, simulate_modes, thermal_occupation, SimOutput, SimSettings};
use omtk::fits::{
    estimate_g0, extrapolate_detunings, fit_optical_spring, fit_ringdown, fit_scan, model_psd,
    peak_frequency, rayleigh_mean_amplitude, scan_model, MechanicalFrequency, ModelPsdParams,
    ScanFitOptions, ScanModulation, ScanParams, SpringEntry, SpringSeries,
};
use omtk::lockin::third_order_correlation;
use omtk::params::{BathParams, CavityParams, DetectorParams, ModeParams};
use omtk::rng::NoiseStream;
use omtk::spectral::{snr_db, tin3_proxies, welch_psd, Spectrum, WelchConfig, Window};
use omtk::sweep::{cooperativity_sweep, SweepSpec};
use omtk::trace::{TimeTrace, UnitTag};
use omtk::transduction::{linear_readout, lorentzian_response, nonlinear_readout, transduce};

const MAGIC: f64 = -0.577_350_269_189_625_8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn max_near(spec: &Spectrum, f: f64, bins: usize) -> (usize, f64) {
    let k = spec.bin(f);
    (k - bins..=k + bins)
        .map(|i| (i, spec.values()[i]))
        .fold((k, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

fn inversion_exactness() -> Outcome {
    let start = Instant::now();
    let n = 1_000_000;
    let nu = TimeTrace::from_fn(n, 1e6, UnitTag::detuning(), |t| {
        -1.05 + 0.95 * (TAU * 1234.5 * t).sin()
    })
    .unwrap();
    let cavity = CavityParams {
        kappa: angular(36e6),
        nu0: -1.0,
        n_c0: 1.0,
        phi0: 0.0,
    };
    let det = DetectorParams::ideal();
    let current = transduce(&nu, &det, 0).unwrap();
    let back = nonlinear_readout(&current, &cavity, &det).unwrap();
    let err = nu
        .samples()
        .iter()
        .zip(back.detuning_estimate.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        err < 1e-9 && within(elapsed, 5.0),
        format!(
            "max |error| {err:.2e} over 10^6 samples in {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn magic_detuning_nulls() -> Outcome {
    let l = lorentzian_response;
    let h = 5e-4;
    let d2 = |x: f64| (l(x + h) - 2.0 * l(x) + l(x - h)) / (h * h);
    let d3 = |x: f64| {
        (l(x + 2.0 * h) - 2.0 * l(x + h) + 2.0 * l(x - h) - l(x - 2.0 * h)) / (2.0 * h * h * h)
    };
    let second = d2(MAGIC);
    let third = [d3(1.0), d3(-1.0)];
    let worst = second.abs().max(third[0].abs()).max(third[1].abs());
    outcome(
        worst < 1e-5,
        format!(
            "d2 at -1/sqrt3 = {second:.1e}, d3 at +1 = {:.1e}, d3 at -1 = {:.1e}",
            third[0], third[1]
        ),
    )
}

// Three thermal modes seen by a fast cavity at the magic detuning.
const TONES: [f64; 3] = [103e3, 296e3, 652e3];
const SUM_TONE: f64 = 1.051e6;
const PROBE: f64 = 1.13e6;
const TIN_FS: f64 = 5e6;
const TIN_SEED: u64 = 2024;

fn tin_cavity() -> CavityParams {
    CavityParams {
        kappa: angular(36e6),
        nu0: MAGIC,
        n_c0: 1e8,
        phi0: 0.0,
    }
}

fn tin_detector() -> DetectorParams {
    DetectorParams {
        eta_det: 1.0,
        photon_flux: 1e14,
        i_max: 1.0,
        i_bg: 0.0,
        shot_noise: true,
    }
}

fn tin_record() -> SimOutput {
    let cavity = tin_cavity();
    let temperature = 300.0;
    let modes: Vec<ModeParams> = TONES
        .iter()
        .map(|&f| {
            let omega = angular(f);
            let n_th = thermal_occupation(omega, temperature).unwrap();
            // Mean thermal amplitude 0.08 in ν.
            let g0 = 0.08 * cavity.kappa / (2.0 * (PI * n_th).sqrt());
            ModeParams::from_quality(&format!("{}k", f / 1e3), omega, 1e4, g0, 1e-12)
        })
        .collect();
    let settings = SimSettings::new((1 << 21) as f64 / TIN_FS, TIN_FS);
    let bath = BathParams::thermal(temperature, TIN_SEED);
    simulate_modes(&modes, &cavity, &bath, &settings).unwrap()
}

fn psd(trace: &TimeTrace) -> Spectrum {
    welch_psd(trace, &WelchConfig::new(1 << 16)).unwrap()
}

fn readouts(detuning: &TimeTrace) -> (TimeTrace, TimeTrace) {
    let cavity = tin_cavity();
    let det = tin_detector();
    let current = transduce(detuning, &det, TIN_SEED).unwrap();
    let lin = linear_readout(&current, &cavity, &det).unwrap();
    let nl = nonlinear_readout(&current, &cavity, &det).unwrap();
    (lin.fluctuation(), nl.fluctuation())
}

fn tin_reproduction() -> Outcome {
    let start = Instant::now();
    let sim = tin_record();
    let (lin, _) = readouts(&sim.detuning);
    let spec = psd(&lin);
    let (k_peak, peak) = max_near(&spec, SUM_TONE, 2);
    let lo = spec.bin(SUM_TONE - 30e3);
    let hi = spec.bin(SUM_TONE + 30e3);
    let floor = median(spec.values()[lo..=hi].to_vec());
    let contrast = db(peak / floor);
    let tin3 = tin3_proxies(&spec);
    let k_pp = tin3.s_pp.argmax_in(0.95e6, 1.3e6).unwrap();
    let elapsed = start.elapsed();
    outcome(
        contrast >= 20.0 && k_pp == k_peak && within(elapsed, 30.0),
        format!(
            "peak {contrast:.1} dB over floor at {:.0} Hz; S++ max at {:.0} Hz; {:.1} s",
            spec.frequency(k_peak),
            spec.frequency(k_pp),
            elapsed.as_secs_f64()
        ),
    )
}

fn tin_removal() -> Outcome {
    let start = Instant::now();
    let sim = tin_record();
    let probe_amplitude = 1e-4;
    let with_probe = TimeTrace::from_fn(sim.detuning.len(), TIN_FS, UnitTag::detuning(), |t| {
        probe_amplitude * (TAU * PROBE * t).cos()
    })
    .unwrap();
    let nu = TimeTrace::new(
        sim.detuning
            .samples()
            .iter()
            .zip(with_probe.samples())
            .map(|(a, b)| a + b)
            .collect(),
        TIN_FS,
        UnitTag::detuning(),
    )
    .unwrap();
    let (lin, nl) = readouts(&nu);
    let (s_lin, s_nl) = (psd(&lin), psd(&nl));
    let (k, peak_lin) = max_near(&s_lin, SUM_TONE, 2);
    let peak_nl = s_nl.values()[k - 2..=k + 2]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let suppression = db(peak_lin / peak_nl);
    let signal = (PROBE - 200.0, PROBE + 200.0);
    let noise = (1.0e6, 1.1e6);
    let snr_lin = snr_db(&s_lin, signal, noise).unwrap();
    let snr_nl = snr_db(&s_nl, signal, noise).unwrap();
    let tin_share = {
        let p = |s: &Spectrum| omtk::spectral::band_power(s, noise.0, noise.1).unwrap();
        db(p(&s_lin) / p(&s_nl))
    };
    let elapsed = start.elapsed();
    outcome(
        suppression >= 30.0 && tin_share > 3.0 && snr_nl - snr_lin >= 8.0 && within(elapsed, 60.0),
        format!(
            "mixing peak suppressed {suppression:.1} dB; probe SNR {snr_lin:.1} -> {snr_nl:.1} dB \
             (linear noise band {tin_share:.1} dB above nonlinear); {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn quadrature_correlation() -> Outcome {
    let sim = tin_record();
    let (lin, _) = readouts(&sim.detuning);
    let r = third_order_correlation(&lin, TONES, 500.0).unwrap();
    let (bx, by) = (r.beta_x, r.beta_y);
    let combined = (bx.sigma.powi(2) + by.sigma.powi(2)).sqrt();
    let pass = bx.beta < 0.0
        && by.beta < 0.0
        && (bx.beta - by.beta).abs() <= 2.0 * combined
        && r.pearson_x.abs() > 0.9
        && r.pearson_y.abs() > 0.9;
    outcome(
        pass,
        format!(
            "beta_x {:.4} +- {:.4}, beta_y {:.4} +- {:.4}, r_x {:.3}, r_y {:.3}",
            bx.beta, bx.sigma, by.beta, by.sigma, r.pearson_x, r.pearson_y
        ),
    )
}

fn equipartition() -> Outcome {
    let start = Instant::now();
    let temperature = 300.0;
    let mode = ModeParams::from_quality("desk", angular(1e3), 1e3, angular(10.0), 1e-9);
    let cavity = CavityParams {
        kappa: angular(1e6),
        nu0: -0.5,
        n_c0: 1.0,
        phi0: 0.0,
    };
    // 200 amplitude correlation times (2/Γ) per record, 32 independent
    // records.
    let duration = 200.0 * 2.0 / mode.gamma_m;
    let settings = SimSettings::new(duration, 2.5e3);
    let variances: Vec<f64> = (0..32u64)
        .into_par_iter()
        .map(|seed| {
            let out = simulate_modes(
                std::slice::from_ref(&mode),
                &cavity,
                &BathParams::thermal(temperature, 100 + seed),
                &settings,
            )
            .unwrap();
            out.per_mode_displacement[0].variance()
        })
        .collect();
    let expected = mode.thermal_variance(temperature);
    let ratio = variances.iter().sum::<f64>() / variances.len() as f64 / expected;
    let single = variances[0] / expected;
    let elapsed = start.elapsed();
    outcome(
        (ratio - 1.0).abs() < 0.05 && within(elapsed, 10.0),
        format!(
            "<x^2>/(kT/m W^2) = {ratio:.4} over 32 records (single record {single:.3}); {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn optical_spring_closure() -> Outcome {
    // Shift ≪ Ω_m, where the spring is linear in the stiffness change.
    let omega_m = angular(100e3);
    let mode = ModeParams::from_quality("spring", omega_m, 2e4, angular(1.0), 1e-12);
    let kappa = angular(1e7);
    let cooperativity = 100.0;
    let n_bar = cooperativity * kappa * mode.gamma_m / (4.0 * mode.g0 * mode.g0);
    let nus = [-0.3, -0.5, -0.8, -1.0, -1.3, -1.8, -2.5];
    let settings = SimSettings::new(20.0, 256e3).with_radiation_pressure(false);
    let bath = BathParams::thermal(1.0, 77);
    let peaks: Vec<_> = nus
        .par_iter()
        .map(|&nu| {
            let cavity = CavityParams {
                kappa,
                nu0: nu,
                n_c0: n_bar * (1.0 + nu * nu),
                phi0: 0.0,
            };
            let out =
                simulate_modes(std::slice::from_ref(&mode), &cavity, &bath, &settings).unwrap();
            let spec = welch_psd(&out.detuning, &WelchConfig::new(1 << 18)).unwrap();
            peak_frequency(&spec, (99e3, 100.1e3)).unwrap()
        })
        .collect();
    let p1 = 1.0 + nus[0] * nus[0];
    let ratios: Vec<f64> = nus.iter().map(|nu| (1.0 + nu * nu) / p1).collect();
    let series = SpringSeries {
        entries: peaks
            .iter()
            .zip(&ratios)
            .map(|(p, &r)| SpringEntry {
                power_ratio: r,
                omega_eff: angular(p.frequency),
                sigma_omega: angular(p.sigma),
            })
            .collect(),
    };
    let fit =
        fit_optical_spring(&series, mode.gamma_m, MechanicalFrequency::Free(omega_m)).unwrap();
    let c = fit.get("c").unwrap();
    let rel = c / cooperativity - 1.0;
    let back = extrapolate_detunings(nus[0], &ratios).unwrap();
    let identity = back
        .iter()
        .zip(&nus)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        rel.abs() < 0.05 && identity < 1e-12,
        format!(
            "C = {c:.2} +- {:.2} (configured {cooperativity}); detuning identity error {identity:.1e}",
            fit.sigma("c").unwrap()
        ),
    )
}

fn noisy_ringdown(e0: f64, gamma: f64, beta: f64, duration: f64, fs: f64, seed: u64) -> TimeTrace {
    let clean = ringdown_trace(e0, gamma, beta, duration, fs, 0.0).unwrap();
    let mut rng = NoiseStream::new(seed, 0);
    clean.map(|e| e * (1.0 + 0.01 * rng.normal()))
}

fn ringdown() -> Outcome {
    // Time-compressed: Γ = 1/s, so that Q = Ω/Γ fixes Ω.
    let gamma = 1.0;
    let e0 = 1e-12;
    let beta = 1.5 * gamma / e0;
    let nonlinear = fit_ringdown(&noisy_ringdown(e0, gamma, beta, 6.0, 200.0, 11), None).unwrap();
    let g_err = nonlinear.get("gamma_m").unwrap() / gamma - 1.0;
    let b_err = nonlinear.get("beta_nl").unwrap() / beta - 1.0;

    let q_true = 1.071e8;
    let omega = q_true * gamma;
    let linear =
        fit_ringdown(&noisy_ringdown(e0, gamma, 0.0, 6.0, 200.0, 12), Some(omega)).unwrap();
    let q = linear.get("q").unwrap();
    let q_rel_sigma = linear.sigma("q").unwrap() / q;
    let q_err = q / q_true - 1.0;
    let residual_beta = linear.get("beta_nl").unwrap() * e0 / gamma;
    outcome(
        g_err.abs() < 0.005
            && b_err.abs() < 0.05
            && q_err.abs() < 0.005
            && q_rel_sigma < 0.005
            && residual_beta.abs() < 0.01,
        format!(
            "gamma {:+.3}%, beta {:+.2}%; linear case Q = {q:.4e} +- {:.2}%, beta E0/gamma = {residual_beta:.1e}",
            100.0 * g_err,
            100.0 * b_err,
            100.0 * q_rel_sigma
        ),
    )
}

fn scan_g0_chain() -> Outcome {
    let g0 = angular(441.0);
    let kappa = angular(36e6);
    let n_th = 5.53e6;
    let mean = rayleigh_mean_amplitude(g0, kappa, n_th);
    let sigma_r = mean / (PI / 2.0).sqrt();
    let n_scans = 100;
    // Amplitudes at the Rayleigh quantiles (i + 1/2)/N, random phases.
    let mut phases = NoiseStream::new(9, 0);
    let truths: Vec<ScanParams> = (0..n_scans)
        .map(|i| {
            let q = (i as f64 + 0.5) / n_scans as f64;
            let mut p = ScanParams {
                kappa,
                scan_rate: 1e12,
                nu_offset: 0.0,
                i_max: 2.0,
                i_bg: 0.1,
                modulations: vec![ScanModulation {
                    alpha: sigma_r * (-2.0 * (1.0 - q).ln()).sqrt(),
                    omega: angular(1.13e6),
                    phi: TAU * phases.uniform() - PI,
                }],
            };
            p.nu_offset = -p.ramp_rate() * 180e-6;
            p
        })
        .collect();
    let alphas: Vec<f64> = truths
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = NoiseStream::new(1000 + i as u64, 0);
            let tr = TimeTrace::from_fn(7200, 20e6, UnitTag::new("arb").unwrap(), |t| {
                scan_model(p, t) + 0.005 * rng.normal()
            })
            .unwrap();
            let fit = fit_scan(&tr, 1e12, 1, &ScanFitOptions::default()).unwrap();
            fit.get("alpha_1").unwrap()
        })
        .collect();
    let est = estimate_g0(&alphas, kappa, n_th).unwrap();
    let rel = est.g0 / g0 - 1.0;
    outcome(
        rel.abs() < 0.05,
        format!(
            "g0 = 2pi x {:.1} +- {:.1} Hz from {n_scans} scans ({:+.2}%)",
            est.g0 / TAU,
            est.sigma / TAU,
            100.0 * rel
        ),
    )
}

fn analytic_psd() -> Outcome {
    let kappa = angular(36e6);
    let mut details = Vec::new();
    let mut pass = true;
    for nu in [MAGIC, -0.2, 0.4] {
        let p = ModelPsdParams {
            kappa_total: kappa,
            kappa_t: 0.4 * kappa,
            kappa_other: 0.5 * kappa,
            detuning: nu * kappa / 2.0,
            mode: ModeParams::from_quality("hq", angular(1.13e6), 1e6, angular(441.0), 2e-12),
            n_c: 2e8,
            s_delta: 1e6,
            thermal_force_psd: 0.0,
            eta_det: 1.0,
        };
        let om = p.mode.omega_m;
        let step = om / 4000.0;
        let grid: Vec<f64> = (0..8000).map(|k| k as f64 * step).collect();
        let spec = model_psd(&p, &grid).unwrap();
        let k = (1..grid.len())
            .min_by(|&a, &b| spec.values()[a].total_cmp(&spec.values()[b]))
            .unwrap();
        let offset = (grid[k] - om) / step;
        let tail = p.snu(1e6 * kappa) - 1.0;
        pass &= offset.abs() <= 1.0 && tail.abs() < 1e-6;
        details.push(format!(
            "nu {nu:+.3}: min {offset:+.1} steps, tail {tail:.0e}"
        ));
    }
    outcome(pass, details.join("; "))
}

fn white(n: usize, fs: f64, seed: u64) -> TimeTrace {
    let mut s = NoiseStream::new(seed, 0);
    TimeTrace::new(
        (0..n).map(|_| s.normal()).collect(),
        fs,
        UnitTag::detuning(),
    )
    .unwrap()
}

fn direct_tin3(v: &[f64], df: f64) -> [Vec<f64>; 3] {
    let n = v.len();
    let at = |i: i64| {
        if i >= 1 && (i as usize) < n {
            v[i as usize]
        } else {
            0.0
        }
    };
    let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for k in 0..n as i64 {
        let (mut pp, mut pm, mut mm) = (0.0, 0.0, 0.0);
        for i in 1..n as i64 {
            for j in 1..n as i64 {
                let w = v[i as usize] * v[j as usize];
                pp += w * at(k - i - j);
                pm += w * at(k + i - j);
                mm += w * at(k + i + j);
            }
        }
        out[0][k as usize] = pp * df * df;
        out[1][k as usize] = pm * df * df;
        out[2][k as usize] = mm * df * df;
    }
    out
}

fn spectral_foundations() -> Outcome {
    let fs = 1e4;
    let tr = white(1 << 18, fs, 5);
    let hann = welch_psd(&tr, &WelchConfig::new(1024)).unwrap();
    let rect = welch_psd(
        &tr,
        &WelchConfig::new(1024)
            .with_window(Window::Rectangular)
            .with_overlap(0.0),
    )
    .unwrap();
    let parseval = [hann.total_power(), rect.total_power()]
        .map(|p| (p / tr.variance() - 1.0).abs())
        .into_iter()
        .fold(0.0, f64::max);

    let level = 2.0 * tr.variance() / fs;
    let chunk = (hann.len() - 2) / 16;
    let flatness = (0..16)
        .map(|c| {
            let s = &hann.values()[1 + c * chunk..1 + (c + 1) * chunk];
            (s.iter().sum::<f64>() / s.len() as f64 / level - 1.0).abs()
        })
        .fold(0.0, f64::max);

    let mut rng = NoiseStream::new(6, 0);
    let values: Vec<f64> = (0..256).map(|_| rng.uniform()).collect();
    let spec = Spectrum::new(2.5, values, UnitTag::new("nu^2/Hz").unwrap()).unwrap();
    let fast = tin3_proxies(&spec);
    let direct = direct_tin3(spec.values(), spec.df());
    let mut tin3_err: f64 = 0.0;
    for (f, d) in [&fast.s_pp, &fast.s_pm, &fast.s_mm].iter().zip(&direct) {
        let scale = d.iter().copied().fold(0.0, f64::max);
        for (a, b) in f.values().iter().zip(d) {
            tin3_err = tin3_err.max((a - b).abs() / scale);
        }
    }
    outcome(
        parseval < 0.01 && flatness < 0.05 && tin3_err < 1e-10,
        format!(
            "Parseval {:.2}%, flatness {:.2}%, fast vs direct tin3 {tin3_err:.1e}",
            100.0 * parseval,
            100.0 * flatness
        ),
    )
}

fn sweep_spec(noise_ratio: f64) -> SweepSpec {
    let omega = angular(100e3);
    let n_th = 1000.0;
    let temperature = n_th * omtk::consts::HBAR * omega / omtk::consts::K_B;
    let kappa = 32.0 * omega;
    let mode = ModeParams::from_quality("desk", omega, 1e4, angular(358.0), 1e-12);
    let nu0 = MAGIC;
    let l0 = lorentzian_response(nu0);
    let slope = omtk::transduction::lorentzian_slope(nu0);
    // Classical noise whose radiation-pressure heating equals the thermal
    // drive at C = sqrt(1/noise_ratio).
    let s_nu = noise_ratio * 32.0 * mode.g0.powi(2) * l0 * l0 * n_th
        / (slope * slope * kappa * kappa * mode.gamma_m);
    SweepSpec {
        modes: vec![mode],
        kappa,
        nu0,
        bath: BathParams {
            temperature,
            seed: 31,
            classical_detuning_noise_psd: s_nu,
        },
        detector: DetectorParams::ideal(),
        duration: 2.0,
        sample_rate: 1e6,
        band: (80e3, 120e3),
        welch: WelchConfig::new(1 << 14),
        backaction_damping: true,
    }
}

fn sweep_shape() -> Outcome {
    let ratios = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];
    let rms = |noise: f64| -> Vec<f64> {
        cooperativity_sweep(&sweep_spec(noise), &ratios)
            .unwrap()
            .iter()
            .map(|p| p.band_rms)
            .collect()
    };
    let quiet = rms(0.0);
    let noisy = rms(2e-4);
    let monotone = quiet.windows(2).all(|w| w[1] <= w[0]);
    let k_min = (0..noisy.len())
        .min_by(|&a, &b| noisy[a].total_cmp(&noisy[b]))
        .unwrap();
    let interior = k_min > 0 && k_min + 1 < noisy.len();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.2e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        monotone && interior,
        format!(
            "quiet [{}]; with classical noise [{}], minimum at C/n_th = {}",
            fmt(&quiet),
            fmt(&noisy),
            ratios[k_min]
        ),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 12] = [
        ("inversion exactness", inversion_exactness),
        ("magic-detuning nulls", magic_detuning_nulls),
        ("third-order TIN reproduction", tin_reproduction),
        ("TIN removal and SNR recovery", tin_removal),
        ("quadrature correlation", quadrature_correlation),
        ("equipartition", equipartition),
        ("optical-spring closure", optical_spring_closure),
        ("ringdown fit", ringdown),
        ("scan fit and g0 chain", scan_g0_chain),
        ("analytic PSD model", analytic_psd),
        ("spectral foundations", spectral_foundations),
        ("sweep shape", sweep_shape),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failures = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("acceptance {:>2} [{tag}] {name}: {}", i + 1, o.detail);
        if !o.pass {
            failures += 1;
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance check(s) failed");
        ExitCode::FAILURE
    }
}
