//! Simulation and analysis of nonlinear optomechanical transduction.
//!
//! Thermal motion of mechanical modes shifts a cavity resonance; the
//! Lorentzian response turns that motion into a photocurrent with
//! intermodulation between modes. The modules follow the measurement chain:
//! [`dynamics`] simulates the modes, [`transduction`] maps detuning to
//! photocurrent and back, [`spectral`] and [`lockin`] analyse the records,
//! and [`fits`] extracts physical parameters. [`sweep`] runs the full chain
//! over a range of cooperativities.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consts;
pub mod dynamics;
mod error;
pub mod fits;
pub mod io;
pub mod lockin;
pub mod params;
pub mod rng;
pub mod spectral;
pub mod sweep;
pub mod trace;
pub mod transduction;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transduction.md")]
    mod transduction {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/lockin.md")]
    mod lockin {}
    #[doc = include_str!("../../../book/src/fits.md")]
    mod fits {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
