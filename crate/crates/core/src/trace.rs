//! Uniformly sampled time-domain records.

use std::fmt;

use crate::error::{ensure_param, Error, Result};

/// Maximum length of a unit tag, fixed by the trace file format.
pub const UNIT_TAG_LEN: usize = 16;

/// Physical unit label carried by traces and spectra.
///
/// At most 16 printable ASCII characters without whitespace so that it fits
/// the fixed-width trace file field and the spectrum header.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitTag(String);

impl UnitTag {
    pub fn new(tag: &str) -> Result<Self> {
        ensure_param!(
            tag.len() <= UNIT_TAG_LEN,
            "unit tag {tag:?} longer than {UNIT_TAG_LEN} bytes"
        );
        ensure_param!(
            tag.bytes().all(|b| b.is_ascii_graphic()),
            "unit tag {tag:?} must be printable ASCII without spaces"
        );
        Ok(Self(tag.to_owned()))
    }

    /// Unit tags used by the toolkit itself; infallible.
    pub(crate) fn known(tag: &'static str) -> Self {
        debug_assert!(tag.len() <= UNIT_TAG_LEN);
        Self(tag.to_owned())
    }

    pub fn detuning() -> Self {
        Self::known("nu")
    }

    pub fn meter() -> Self {
        Self::known("m")
    }

    pub fn dimensionless() -> Self {
        Self::known("1")
    }

    pub fn joule() -> Self {
        Self::known("J")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Unit of a power spectral density of a quantity with this unit.
    pub fn psd(&self) -> String {
        match self.0.as_str() {
            "1" => "1/Hz".to_owned(),
            u => format!("{u}^2/Hz"),
        }
    }
}

impl fmt::Display for UnitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A real-valued record sampled at a constant rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    samples: Vec<f64>,
    sample_rate: f64,
    unit: UnitTag,
}

impl TimeTrace {
    pub fn new(samples: Vec<f64>, sample_rate: f64, unit: UnitTag) -> Result<Self> {
        ensure_param!(
            sample_rate.is_finite() && sample_rate > 0.0,
            "sample rate must be positive and finite, got {sample_rate}"
        );
        Ok(Self {
            samples,
            sample_rate,
            unit,
        })
    }

    /// Samples `f(t)` at `t = n / sample_rate` for `n in 0..len`.
    pub fn from_fn(
        len: usize,
        sample_rate: f64,
        unit: UnitTag,
        f: impl FnMut(f64) -> f64,
    ) -> Result<Self> {
        let mut f = f;
        let samples = (0..len).map(|n| f(n as f64 / sample_rate)).collect();
        Self::new(samples, sample_rate, unit)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn unit(&self) -> &UnitTag {
        &self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population variance (normalized by `len`).
    pub fn variance(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let mean = self.mean();
        self.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / self.samples.len() as f64
    }

    /// New trace with the same grid and unit but transformed samples.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self {
            samples: self.samples.iter().copied().map(f).collect(),
            sample_rate: self.sample_rate,
            unit: self.unit.clone(),
        }
    }

    pub fn with_unit(mut self, unit: UnitTag) -> Self {
        self.unit = unit;
        self
    }

    /// Sub-record covering `range` of sample indices.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            samples: self.samples[range].to_vec(),
            sample_rate: self.sample_rate,
            unit: self.unit.clone(),
        }
    }

    /// Errors unless `other` has the same sample rate and length.
    pub fn check_aligned(&self, other: &TimeTrace) -> Result<()> {
        if self.len() != other.len() || self.sample_rate != other.sample_rate {
            return Err(Error::InvalidParameter(format!(
                "traces are not aligned: {} samples at {} Hz vs {} samples at {} Hz",
                self.len(),
                self.sample_rate,
                other.len(),
                other.sample_rate
            )));
        }
        Ok(())
    }
}
