//! `omtk` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numeric or
//! convergence failure, 4 file I/O or format error.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod presets;

use commands::*;

#[derive(Parser, Debug)]
#[command(
    name = "omtk",
    version,
    about = "Nonlinear optomechanical transduction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate thermal mechanical modes and the cavity detuning they cause.
    Simulate(SimulateArgs),
    /// Detuning trace to detected photocurrent.
    Transduce(TransduceArgs),
    /// Photocurrent back to detuning.
    Reconstruct(ReconstructArgs),
    /// Welch power spectral density of a trace.
    Psd(PsdArgs),
    /// Relative intensity noise spectrum of a photocurrent.
    Rin(PsdArgs),
    /// Intermodulation proxies of a spectrum.
    Tin(TinArgs),
    /// Root of the band-integrated PSD.
    BandRms(BandRmsArgs),
    /// Signal-to-noise ratio between two bands.
    Snr(SnrArgs),
    /// Lock-in demodulation at one or more carriers.
    Demod(DemodArgs),
    /// Third-order quadrature correlation.
    Correlate(CorrelateArgs),
    /// Optical-spring fit of a constant-power detuning sweep.
    FitSpring(FitSpringArgs),
    /// Ringdown fit with nonlinear damping.
    FitRingdown(FitRingdownArgs),
    /// Fit of a laser scan across a modulated resonance.
    FitScan(FitScanArgs),
    /// Single-photon coupling from repeated scan amplitudes.
    G0(G0Args),
    /// Cooperativity and related figures of merit.
    Fom(FomArgs),
    /// Analytic direct-detection spectrum in shot-noise units.
    ModelPsd(ModelPsdArgs),
    /// Band-integrated RIN versus cooperativity.
    Sweep(SweepArgs),
    /// Print a built-in run configuration.
    Preset(PresetArgs),
}

fn run(cli: Cli) -> error::CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Transduce(a) => transduce_cmd(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Psd(a) => psd(a),
        Command::Rin(a) => rin(a),
        Command::Tin(a) => tin(a),
        Command::BandRms(a) => band_rms_cmd(a),
        Command::Snr(a) => snr(a),
        Command::Demod(a) => demod(a),
        Command::Correlate(a) => correlate_cmd(a),
        Command::FitSpring(a) => fit_spring(a),
        Command::FitRingdown(a) => fit_ringdown_cmd(a),
        Command::FitScan(a) => fit_scan_cmd(a),
        Command::G0(a) => g0(a),
        Command::Fom(a) => fom(a),
        Command::ModelPsd(a) => model_psd_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Preset(a) => preset(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
