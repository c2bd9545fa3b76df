use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};

use omtk::consts::{angular, ordinary, TAU};
use omtk::dynamics::{simulate_modes, SimSettings};
use omtk::fits::{
    estimate_g0, fit_optical_spring, fit_ringdown, fit_scan, model_psd, FitResult,
    MechanicalFrequency, ScanFitOptions, SpringEntry, SpringSeries,
};
use omtk::lockin::{correlate, demodulate, predict_third_order, QuadratureTrace};
use omtk::params::{CavityParams, DetectorParams};
use omtk::spectral::{
    band_rms, rin_spectrum, snr_db, tin2_proxies, tin3_proxies, welch_psd, Spectrum, WelchConfig,
    Window,
};
use omtk::sweep::{cooperativity_sweep, SweepSpec};
use omtk::trace::{TimeTrace, UnitTag};
use omtk::transduction::{
    figures_of_merit, general_dyne_readout, linear_readout, nonlinear_readout, transduce,
    ReadoutResult,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{
    companion_path, kv, read_table, read_trace, save_spectrum_with, save_trace_with,
    spectrum_input, write_table, Meta,
};
use crate::presets;

/// `lo:hi` in Hz.
fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LOW:HIGH, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    if !(lo < hi) {
        return Err(format!("band {lo}:{hi} is empty"));
    }
    Ok((lo, hi))
}

/// Plain integer or `2^k`.
fn parse_segment(s: &str) -> Result<usize, String> {
    let n = match s.strip_prefix("2^") {
        Some(k) => {
            let k: u32 = k.parse().map_err(|e| format!("{s:?}: {e}"))?;
            if k >= usize::BITS {
                return Err(format!("{s} is too large"));
            }
            1usize << k
        }
        None => s.parse().map_err(|e| format!("{s:?}: {e}"))?,
    };
    if n < 2 {
        return Err("segment length must be at least 2".into());
    }
    Ok(n)
}

#[derive(Args, Debug, Clone)]
pub struct SpectralArgs {
    /// Segment length in samples (integer or 2^k).
    #[arg(long, default_value = "4096", value_parser = parse_segment)]
    segment: usize,
    /// Fractional segment overlap.
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
    window: WindowArg,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum WindowArg {
    Hann,
    Rect,
}

impl SpectralArgs {
    fn welch(&self) -> WelchConfig {
        let window = match self.window {
            WindowArg::Hann => Window::Hann,
            WindowArg::Rect => Window::Rectangular,
        };
        WelchConfig::new(self.segment)
            .with_overlap(self.overlap)
            .with_window(window)
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Run configuration (path, name in $OMTK_CONFIG_DIR, or preset).
    #[arg(long)]
    config: String,
    /// Detuning trace; per-mode displacements go to `<stem>.mode<k>.<ext>`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Sample rate, Hz.
    #[arg(long)]
    fs: Option<f64>,
    #[arg(long)]
    radiation_pressure: bool,
    /// Add optical damping to the radiation-pressure force.
    #[arg(long)]
    backaction_damping: bool,
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    let mut bath = cfg.bath()?.clone();
    if let Some(seed) = a.seed {
        bath.seed = seed;
    }
    cfg.bath = Some(bath.clone());
    let mut sim = cfg.simulate()?.clone();
    if let Some(d) = a.duration {
        sim.duration = d;
    }
    if let Some(fs) = a.fs {
        sim.sample_rate = fs;
    }
    sim.radiation_pressure |= a.radiation_pressure;
    sim.backaction_damping |= a.backaction_damping;
    cfg.simulate = Some(sim.clone());
    let settings = SimSettings {
        duration: sim.duration,
        sample_rate: sim.sample_rate,
        radiation_pressure: sim.radiation_pressure,
        backaction_damping: sim.backaction_damping,
    };
    let out = simulate_modes(cfg.modes()?, cfg.cavity()?, &bath, &settings)?;
    let meta = Meta::new("simulate").config(&cfg);
    save_trace_with(&a.out, &out.detuning, &meta)?;
    for (k, trace) in out.per_mode_displacement.iter().enumerate() {
        let path = companion_path(&a.out, &format!("mode{k}"));
        save_trace_with(&path, trace, &meta.clone().option("mode", k))?;
        kv(&format!("mode{k}_file"), path.display());
    }
    if let Some(noise) = &out.detuning_noise {
        let path = companion_path(&a.out, "noise");
        save_trace_with(&path, noise, &meta)?;
        kv("noise_file", path.display());
    }
    kv("samples", out.detuning.len());
    kv("sample_rate_hz", out.detuning.sample_rate());
    kv("detuning_rms", out.detuning.variance().sqrt());
    kv("radiation_pressure", out.radiation_pressure_enabled);
    Ok(())
}

#[derive(Args, Debug)]
pub struct TransduceArgs {
    /// Run configuration providing the [detector] section.
    #[arg(long)]
    config: String,
    /// Detuning trace.
    #[arg(long = "in")]
    input: PathBuf,
    /// Photocurrent trace.
    #[arg(long)]
    out: PathBuf,
    /// Shot-noise seed; defaults to the bath seed, else 0.
    #[arg(long)]
    seed: Option<u64>,
}

pub fn transduce_cmd(a: TransduceArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&a.config)?;
    let det = cfg.detector()?;
    let seed = a
        .seed
        .or_else(|| cfg.bath.as_ref().map(|b| b.seed))
        .unwrap_or(0);
    let nu = read_trace(&a.input)?;
    let current = transduce(&nu, det, seed)?;
    save_trace_with(
        &a.out,
        &current,
        &Meta::new("transduce").option("seed", seed).config(&cfg),
    )?;
    kv("samples", current.len());
    kv("mean_current", current.mean());
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ReadoutMode {
    Linear,
    Nonlinear,
    GeneralDyne,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Photocurrent trace.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: ReadoutMode,
    /// Operating detuning.
    #[arg(long, allow_hyphen_values = true)]
    nu0: f64,
    /// Photocurrent on resonance.
    #[arg(long)]
    imax: f64,
    /// Background photocurrent.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ibg: f64,
    /// ±1 trace selecting the branch sample by sample (general-dyne).
    #[arg(long)]
    sign_trace: Option<PathBuf>,
    /// Detuning estimate.
    #[arg(long)]
    out: PathBuf,
}

pub fn reconstruct(a: ReconstructArgs) -> CliResult<()> {
    let current = read_trace(&a.input)?;
    let cavity = CavityParams {
        kappa: 1.0,
        nu0: a.nu0,
        n_c0: 1.0,
        phi0: 0.0,
    };
    let det = DetectorParams {
        i_max: a.imax,
        i_bg: a.ibg,
        ..DetectorParams::ideal()
    };
    let result: ReadoutResult = match a.mode {
        ReadoutMode::Linear => linear_readout(&current, &cavity, &det)?,
        ReadoutMode::Nonlinear => nonlinear_readout(&current, &cavity, &det)?,
        ReadoutMode::GeneralDyne => {
            let path = a.sign_trace.as_ref().ok_or_else(|| {
                CliError::Config("general-dyne readout needs --sign-trace".into())
            })?;
            general_dyne_readout(&current, &read_trace(path)?, &cavity, &det)?
        }
    };
    let meta = Meta::new("reconstruct")
        .text("mode", result.method.name())
        .number("nu0", a.nu0)
        .number("imax", a.imax)
        .number("ibg", a.ibg);
    save_trace_with(&a.out, &result.detuning_estimate, &meta)?;
    eprintln!(
        "clamped={} clamp_fraction={} floored={}",
        result.clamp_count,
        result.clamp_fraction(),
        result.floor_count
    );
    kv("samples", result.detuning_estimate.len());
    kv("method", result.method.name());
    Ok(())
}

#[derive(Args, Debug)]
pub struct PsdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Spectrum file.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    spectral: SpectralArgs,
}

pub fn psd(a: PsdArgs) -> CliResult<()> {
    let welch = a.spectral.welch();
    let spec = welch_psd(&read_trace(&a.input)?, &welch)?;
    save_spectrum_with(&a.out, &spec, &Meta::new("psd").welch(&welch))?;
    report_spectrum(&spec);
    Ok(())
}

pub fn rin(a: PsdArgs) -> CliResult<()> {
    let welch = a.spectral.welch();
    let spec = rin_spectrum(&read_trace(&a.input)?, &welch)?;
    save_spectrum_with(&a.out, &spec, &Meta::new("rin").welch(&welch))?;
    report_spectrum(&spec);
    Ok(())
}

fn report_spectrum(spec: &Spectrum) {
    kv("bins", spec.len());
    kv("df_hz", spec.df());
    kv("segments", spec.meta.segments);
    kv("unit", spec.unit());
}

#[derive(Args, Debug)]
pub struct TinArgs {
    /// Trace (analysed with the spectral flags) or spectrum file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    order: u8,
    /// Output prefix; files are `<prefix>.<proxy>.csv`.
    #[arg(long)]
    out: PathBuf,
    /// Normalize each proxy to its maximum within LOW:HIGH (Hz).
    #[arg(long, value_parser = parse_band)]
    normalize_max: Option<(f64, f64)>,
    #[command(flatten)]
    spectral: SpectralArgs,
}

pub fn tin(a: TinArgs) -> CliResult<()> {
    let welch = a.spectral.welch();
    let spec = spectrum_input(&a.input, &welch)?;
    let proxies: Vec<(&str, Spectrum)> = if a.order == 2 {
        let t = tin2_proxies(&spec);
        vec![("s_plus", t.s_plus), ("s_minus", t.s_minus)]
    } else {
        let t = tin3_proxies(&spec);
        vec![("s_pp", t.s_pp), ("s_pm", t.s_pm), ("s_mm", t.s_mm)]
    };
    let span = a.normalize_max.unwrap_or((0.0, spec.max_frequency()));
    for (name, proxy) in proxies {
        let out = match a.normalize_max {
            Some((lo, hi)) => proxy.normalized_to_max(lo, hi)?,
            None => proxy,
        };
        let path = companion_path(&a.out.with_extension("csv"), name);
        let mut meta = Meta::new("tin").option("order", a.order).welch(&welch);
        if let Some((lo, hi)) = a.normalize_max {
            meta = meta
                .number("normalize_lo_hz", lo)
                .number("normalize_hi_hz", hi);
        }
        save_spectrum_with(&path, &out, &meta)?;
        kv(&format!("{name}_file"), path.display());
        match out.argmax_in(span.0, span.1) {
            Ok(k) => kv(&format!("{name}_peak_hz"), out.frequency(k)),
            Err(_) => kv(&format!("{name}_peak_hz"), "none"),
        }
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct BandRmsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// LOW:HIGH in Hz.
    #[arg(long, value_parser = parse_band)]
    band: (f64, f64),
    #[command(flatten)]
    spectral: SpectralArgs,
}

pub fn band_rms_cmd(a: BandRmsArgs) -> CliResult<()> {
    let spec = spectrum_input(&a.input, &a.spectral.welch())?;
    kv("band_rms", band_rms(&spec, a.band.0, a.band.1)?);
    Ok(())
}

#[derive(Args, Debug)]
pub struct SnrArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// LOW:HIGH in Hz.
    #[arg(long, value_parser = parse_band)]
    signal: (f64, f64),
    /// LOW:HIGH in Hz.
    #[arg(long, value_parser = parse_band)]
    noise: (f64, f64),
    #[command(flatten)]
    spectral: SpectralArgs,
}

pub fn snr(a: SnrArgs) -> CliResult<()> {
    let spec = spectrum_input(&a.input, &a.spectral.welch())?;
    kv(
        "snr_db",
        format!("{:.1}", snr_db(&spec, a.signal, a.noise)?),
    );
    Ok(())
}

#[derive(Args, Debug)]
pub struct DemodArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Carrier frequencies, Hz.
    #[arg(long, value_delimiter = ',', required = true)]
    freqs: Vec<f64>,
    /// Low-pass bandwidth, Hz.
    #[arg(long)]
    bw: f64,
    /// Quadrature table.
    #[arg(long)]
    out: PathBuf,
}

fn demod_all(trace: &TimeTrace, freqs: &[f64], bw: f64) -> CliResult<Vec<QuadratureTrace>> {
    freqs
        .iter()
        .map(|&f| Ok(demodulate(trace, f, bw)?))
        .collect()
}

fn quadrature_table(
    path: &Path,
    labels: &[String],
    qs: &[QuadratureTrace],
    meta: &Meta,
) -> CliResult<()> {
    let mut header = vec!["time_s".to_owned()];
    for l in labels {
        header.push(format!("x_{l}"));
        header.push(format!("y_{l}"));
    }
    let dt = qs[0].x.dt();
    let rows: Vec<Vec<f64>> = (0..qs[0].len())
        .map(|i| {
            let mut r = vec![i as f64 * dt];
            for q in qs {
                r.push(q.x.samples()[i]);
                r.push(q.y.samples()[i]);
            }
            r
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(path, &header, &rows, meta)
}

pub fn demod(a: DemodArgs) -> CliResult<()> {
    let trace = read_trace(&a.input)?;
    let qs: Vec<QuadratureTrace> = demod_all(&trace, &a.freqs, a.bw)?
        .iter()
        .map(|q| q.settled())
        .collect::<omtk::Result<_>>()?;
    let labels: Vec<String> = (1..=qs.len()).map(|k| k.to_string()).collect();
    let meta = Meta::new("demod").number("bw_hz", a.bw).option(
        "freqs_hz",
        format!(
            "[{}]",
            a.freqs
                .iter()
                .map(|f| omtk::io::format_f64(*f))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    quadrature_table(&a.out, &labels, &qs, &meta)?;
    kv("samples", qs[0].len());
    kv("output_rate_hz", qs[0].x.sample_rate());
    Ok(())
}

#[derive(Args, Debug)]
pub struct CorrelateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// f1,f2,f3[,f4] in Hz; f4 defaults to f1+f2+f3.
    #[arg(long, value_delimiter = ',', required = true)]
    freqs: Vec<f64>,
    /// Low-pass bandwidth, Hz.
    #[arg(long)]
    bw: f64,
    /// Optional table of predicted and measured quadratures.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn correlate_cmd(a: CorrelateArgs) -> CliResult<()> {
    if !(a.freqs.len() == 3 || a.freqs.len() == 4) {
        return Err(CliError::Config(format!(
            "--freqs needs three or four frequencies, got {}",
            a.freqs.len()
        )));
    }
    let mut freqs = a.freqs.clone();
    if freqs.len() == 3 {
        freqs.push(freqs.iter().sum());
    }
    let trace = read_trace(&a.input)?;
    let q = demod_all(&trace, &freqs, a.bw)?;
    let pred = predict_third_order(&q[0], &q[1], &q[2])?;
    let report = correlate(&pred, &q[3])?;
    if let Some(out) = &a.out {
        let labels = ["pred".to_owned(), "meas".to_owned()];
        let pair = [pred.settled()?, q[3].settled()?];
        quadrature_table(
            out,
            &labels,
            &pair,
            &Meta::new("correlate").number("bw_hz", a.bw),
        )?;
    }
    kv("f4_hz", freqs[3]);
    kv("pearson_x", report.pearson_x);
    kv("pearson_y", report.pearson_y);
    kv("beta_x", report.beta_x.beta);
    kv("beta_x_sigma", report.beta_x.sigma);
    kv("beta_y", report.beta_y.beta);
    kv("beta_y_sigma", report.beta_y.sigma);
    kv("n_samples", report.n_samples);
    kv("n_independent", report.n_independent);
    Ok(())
}

fn emit_fit(fit: &FitResult, out: Option<&PathBuf>, meta: Meta) -> CliResult<()> {
    print!("{fit}");
    if let Some(path) = out {
        let mut text = String::from("name,value,sigma\n");
        for (name, value, sigma) in fit.iter() {
            text += &format!(
                "{name},{},{}\n",
                omtk::io::format_f64(value),
                omtk::io::format_f64(sigma)
            );
        }
        crate::output::write_text(path, &text)?;
        meta.option("converged", fit.converged).write_for(path)?;
    }
    if fit.converged {
        Ok(())
    } else {
        Err(CliError::Numeric("fit did not converge".into()))
    }
}

#[derive(Args, Debug)]
pub struct FitSpringArgs {
    /// CSV with columns power_ratio,freq_hz,sigma_hz; first ratio is 1.
    #[arg(long = "in")]
    input: PathBuf,
    /// Intrinsic linewidth Γ_m/2π, Hz.
    #[arg(long)]
    gamma_hz: f64,
    /// Starting guess for the bare frequency Ω_m/2π, Hz (default: first
    /// entry).
    #[arg(long, conflicts_with = "fixed_omega_hz")]
    omega_hz: Option<f64>,
    /// Hold Ω_m/2π at this value, Hz.
    #[arg(long)]
    fixed_omega_hz: Option<f64>,
    /// Parameter table.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn fit_spring(a: FitSpringArgs) -> CliResult<()> {
    let t = read_table(&a.input)?;
    let col = |name: &str| {
        t.column(name)
            .ok_or_else(|| CliError::Io(format!("{}: missing column {name}", a.input.display())))
    };
    let (ratio, freq, sigma) = (col("power_ratio")?, col("freq_hz")?, col("sigma_hz")?);
    let series = SpringSeries {
        entries: (0..ratio.len())
            .map(|i| SpringEntry {
                power_ratio: ratio[i],
                omega_eff: angular(freq[i]),
                sigma_omega: angular(sigma[i]),
            })
            .collect(),
    };
    let omega = match (a.fixed_omega_hz, a.omega_hz) {
        (Some(f), _) => MechanicalFrequency::Fixed(angular(f)),
        (None, Some(f)) => MechanicalFrequency::Free(angular(f)),
        (None, None) => MechanicalFrequency::Free(angular(freq[0])),
    };
    let fit = fit_optical_spring(&series, angular(a.gamma_hz), omega)?;
    let meta = Meta::new("fit-spring").number("gamma_hz", a.gamma_hz);
    emit_fit(&fit, a.out.as_ref(), meta)
}

#[derive(Args, Debug)]
pub struct FitRingdownArgs {
    /// Energy trace, or CSV with columns time_s,energy on a uniform grid.
    #[arg(long = "in")]
    input: PathBuf,
    /// Ω_m/2π in Hz; adds the quality factor q to the result.
    #[arg(long)]
    omega_hz: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn energy_input(path: &Path) -> CliResult<TimeTrace> {
    if let Ok(t) = read_trace(path) {
        return Ok(t);
    }
    let t = read_table(path)?;
    let (time, energy) = match (t.column("time_s"), t.column("energy")) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CliError::Io(format!(
                "{}: expected a trace file or columns time_s,energy",
                path.display()
            )))
        }
    };
    if time.len() < 2 {
        return Err(CliError::Io(format!("{}: too few rows", path.display())));
    }
    let dt = (time[time.len() - 1] - time[0]) / (time.len() - 1) as f64;
    let uniform = time.iter().enumerate().all(|(i, &t)| {
        (t - time[0] - i as f64 * dt).abs() <= 1e-9 * dt.abs().max(1e-300) * time.len() as f64
    });
    if !(dt > 0.0) || !uniform {
        return Err(CliError::Io(format!(
            "{}: time_s must be uniformly increasing",
            path.display()
        )));
    }
    Ok(TimeTrace::new(energy.to_vec(), 1.0 / dt, UnitTag::joule())?)
}

pub fn fit_ringdown_cmd(a: FitRingdownArgs) -> CliResult<()> {
    let energy = energy_input(&a.input)?;
    let fit = fit_ringdown(&energy, a.omega_hz.map(angular))?;
    let mut meta = Meta::new("fit-ringdown");
    if let Some(f) = a.omega_hz {
        meta = meta.number("omega_hz", f);
    }
    emit_fit(&fit, a.out.as_ref(), meta)
}

#[derive(Args, Debug)]
pub struct FitScanArgs {
    /// Transmission trace of one laser scan.
    #[arg(long = "in")]
    input: PathBuf,
    /// Laser sweep rate, Hz/s.
    #[arg(long)]
    scan_rate: f64,
    /// Number of sinusoidal detuning modulations.
    #[arg(long, default_value_t = 1)]
    modes: usize,
    #[arg(long, default_value_t = 8)]
    multistarts: usize,
    /// Upper limit for modulation frequencies, Hz.
    #[arg(long)]
    max_mod_freq: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn fit_scan_cmd(a: FitScanArgs) -> CliResult<()> {
    let trace = read_trace(&a.input)?;
    let opts = ScanFitOptions {
        multistarts: a.multistarts,
        max_modulation_frequency: a.max_mod_freq,
    };
    let fit = fit_scan(&trace, a.scan_rate, a.modes, &opts)?;
    let meta = Meta::new("fit-scan")
        .number("scan_rate", a.scan_rate)
        .option("modes", a.modes)
        .option("multistarts", a.multistarts);
    emit_fit(&fit, a.out.as_ref(), meta)
}

#[derive(Args, Debug)]
pub struct G0Args {
    /// CSV of fitted modulation amplitudes (column `alpha`, or one column).
    #[arg(long = "in")]
    input: PathBuf,
    /// Cavity linewidth κ/2π, Hz.
    #[arg(long)]
    kappa_hz: f64,
    /// Thermal occupation of the mode.
    #[arg(long)]
    n_th: f64,
}

pub fn g0(a: G0Args) -> CliResult<()> {
    let t = read_table(&a.input)?;
    let alphas = match t.column("alpha") {
        Some(c) => c.to_vec(),
        None if t.columns.len() == 1 => t.columns[0].clone(),
        None => {
            return Err(CliError::Io(format!(
                "{}: expected an alpha column",
                a.input.display()
            )))
        }
    };
    let est = estimate_g0(&alphas, angular(a.kappa_hz), a.n_th)?;
    kv("samples", alphas.len());
    kv("mean_amplitude", est.mean_amplitude);
    kv("g0", est.g0);
    kv("g0_sigma", est.sigma);
    kv("g0_hz", est.g0 / TAU);
    kv("g0_hz_sigma", est.sigma / TAU);
    Ok(())
}

#[derive(Args, Debug)]
pub struct FomArgs {
    #[arg(long)]
    config: String,
    /// Index of the [[mode]] entry.
    #[arg(long, default_value_t = 0)]
    mode: usize,
    /// Mean intracavity photon number (default n_c0·|L(ν0)|²).
    #[arg(long)]
    n_c: Option<f64>,
}

pub fn fom(a: FomArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&a.config)?;
    let cavity = cfg.cavity()?;
    let n_c = a.n_c.unwrap_or_else(|| cavity.mean_photon_number());
    let f = figures_of_merit(cfg.mode(a.mode)?, cavity, n_c, cfg.bath()?.temperature)?;
    kv("n_c", n_c);
    kv("cooperativity", f.cooperativity);
    kv("single_photon_cooperativity", f.single_photon_cooperativity);
    kv("n_th", f.n_th);
    kv("c_over_n_th", f.cooperativity / f.n_th);
    kv("s_qba", f.s_qba);
    kv("s_th", f.s_th);
    kv("n_sideband_limit", f.n_sideband_limit);
    Ok(())
}

#[derive(Args, Debug)]
pub struct ModelPsdArgs {
    #[arg(long)]
    config: String,
    #[arg(long, default_value_t = 0)]
    mode: usize,
    /// Highest frequency of the grid, Hz (default 2 Ω_m/2π).
    #[arg(long)]
    f_max: Option<f64>,
    /// Grid points from 0 to f_max.
    #[arg(long, default_value_t = 8001)]
    points: usize,
    /// Spectrum file (unit SNU).
    #[arg(long)]
    out: PathBuf,
}

pub fn model_psd_cmd(a: ModelPsdArgs) -> CliResult<()> {
    let cfg = RunConfig::load(&a.config)?;
    let params = cfg.model_psd_params(a.mode)?;
    if a.points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }
    let f_max = a.f_max.unwrap_or(2.0 * ordinary(params.mode.omega_m));
    let step = angular(f_max) / (a.points - 1) as f64;
    let grid: Vec<f64> = (0..a.points).map(|k| k as f64 * step).collect();
    let spec = model_psd(&params, &grid)?;
    save_spectrum_with(
        &a.out,
        &spec,
        &Meta::new("model-psd").option("mode", a.mode).config(&cfg),
    )?;
    let k_min = (1..spec.len())
        .min_by(|&x, &y| spec.values()[x].total_cmp(&spec.values()[y]))
        .unwrap_or(0);
    kv("bins", spec.len());
    kv("df_hz", spec.df());
    kv("min_hz", spec.frequency(k_min));
    kv("min_snu", spec.values()[k_min]);
    kv("last_snu", spec.values()[spec.len() - 1]);
    Ok(())
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    config: String,
    /// C/n_th values for the first mode (overrides [sweep] c_over_n_th).
    #[arg(long, value_delimiter = ',')]
    cooperativities: Vec<f64>,
    /// Single-sided classical detuning noise, ν²/Hz (overrides config).
    #[arg(long)]
    classical_noise_psd: Option<f64>,
    /// CSV with columns c_over_n_th,band_rms,cooperativity,n_c0.
    #[arg(long)]
    out: PathBuf,
}

pub fn sweep(a: SweepArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    let mut section = cfg.sweep()?.clone();
    if !a.cooperativities.is_empty() {
        section.cooperativities = a.cooperativities.clone();
    }
    if a.classical_noise_psd.is_some() {
        section.classical_noise_psd = a.classical_noise_psd;
    }
    if section.cooperativities.is_empty() {
        return Err(CliError::Config(
            "no cooperativities: pass --cooperativities or set [sweep] c_over_n_th".into(),
        ));
    }
    cfg.sweep = Some(section.clone());
    let mut bath = cfg.bath()?.clone();
    if let Some(p) = section.classical_noise_psd {
        bath.classical_detuning_noise_psd = p;
    }
    let sim = cfg.simulate()?;
    let cavity = cfg.cavity()?;
    let spec = SweepSpec {
        modes: cfg.modes()?.to_vec(),
        kappa: cavity.kappa,
        nu0: cavity.nu0,
        bath,
        detector: cfg.detector()?.clone(),
        duration: sim.duration,
        sample_rate: sim.sample_rate,
        band: section.band,
        welch: cfg.spectral.unwrap_or_else(|| WelchConfig::new(4096)),
        backaction_damping: sim.backaction_damping,
    };
    let points = cooperativity_sweep(&spec, &section.cooperativities)?;
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| vec![p.c_over_n_th, p.band_rms, p.cooperativity, p.n_c0])
        .collect();
    write_table(
        &a.out,
        &["c_over_n_th", "band_rms", "cooperativity", "n_c0"],
        &rows,
        &Meta::new("sweep").config(&cfg),
    )?;
    for p in &points {
        println!("c_over_n_th={} band_rms={}", p.c_over_n_th, p.band_rms);
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct PresetArgs {
    /// Preset to print; omit to list the available names.
    name: Option<String>,
}

pub fn preset(a: PresetArgs) -> CliResult<()> {
    match a.name {
        None => {
            for n in presets::NAMES {
                println!("{n}");
            }
            Ok(())
        }
        Some(n) => {
            let text = presets::get(&n)
                .ok_or_else(|| CliError::Config(format!("no preset named {n:?}")))?;
            print!("{text}");
            Ok(())
        }
    }
}
