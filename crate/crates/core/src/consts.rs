//! Physical constants (CODATA 2018 exact values where defined).

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

pub const TAU: f64 = std::f64::consts::TAU;

/// Converts an ordinary frequency in Hz to angular frequency in rad/s.
#[inline]
pub fn angular(f_hz: f64) -> f64 {
    TAU * f_hz
}

/// Converts an angular frequency in rad/s to ordinary frequency in Hz.
#[inline]
pub fn ordinary(omega: f64) -> f64 {
    omega / TAU
}
