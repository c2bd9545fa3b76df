//! Trace and spectrum file formats.
//!
//! Trace files are binary, little-endian:
//!
//! | offset | size | content                          |
//! |--------|------|----------------------------------|
//! | 0      | 8    | magic `OMTRACE1`                 |
//! | 8      | 4    | `u32` format version (1)         |
//! | 12     | 8    | `u64` sample count               |
//! | 20     | 8    | `f64` sample rate, Hz            |
//! | 28     | 16   | unit tag, ASCII, space padded    |
//! | 44     | 8·n  | `f64` samples                    |
//!
//! Spectrum files are text: one header line
//! `# unit=<tag> df_hz=<v> window=<w> overlap=<v> segments=<n>`, a column
//! line `frequency_hz,psd`, then one row per bin with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{Spectrum, SpectrumMeta};
use crate::trace::{TimeTrace, UnitTag, UNIT_TAG_LEN};

pub const TRACE_MAGIC: &[u8; 8] = b"OMTRACE1";
pub const TRACE_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8 + UNIT_TAG_LEN;

pub fn write_trace(mut w: impl Write, trace: &TimeTrace) -> Result<()> {
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(TRACE_MAGIC);
    header.extend_from_slice(&TRACE_VERSION.to_le_bytes());
    header.extend_from_slice(&(trace.len() as u64).to_le_bytes());
    header.extend_from_slice(&trace.sample_rate().to_le_bytes());
    let mut unit = [b' '; UNIT_TAG_LEN];
    unit[..trace.unit().as_str().len()].copy_from_slice(trace.unit().as_str().as_bytes());
    header.extend_from_slice(&unit);
    w.write_all(&header)?;
    let mut body = Vec::with_capacity(8 * trace.len());
    for s in trace.samples() {
        body.extend_from_slice(&s.to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn read_trace(mut r: impl Read) -> Result<TimeTrace> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated trace header".into()),
        _ => Error::Io(e),
    })?;
    if &header[..8] != TRACE_MAGIC {
        return Err(Error::Format("not a trace file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != TRACE_VERSION {
        return Err(Error::Format(format!(
            "unsupported trace version {version}"
        )));
    }
    let count = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let rate = f64::from_le_bytes(header[20..28].try_into().unwrap());
    let unit_bytes = &header[28..HEADER_LEN];
    let unit = std::str::from_utf8(unit_bytes)
        .map_err(|_| Error::Format("unit tag is not ASCII".into()))?
        .trim_end_matches(' ');
    let unit = UnitTag::new(unit).map_err(|e| Error::Format(e.to_string()))?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if count.checked_mul(8) != Some(body.len() as u64) {
        return Err(Error::Format(format!(
            "declared {count} samples but payload holds {} bytes",
            body.len()
        )));
    }
    let samples = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    TimeTrace::new(samples, rate, unit).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_trace(path: impl AsRef<Path>, trace: &TimeTrace) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trace(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<TimeTrace> {
    read_trace(BufReader::new(File::open(path)?))
}

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_spectrum(mut w: impl Write, spectrum: &Spectrum) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "# unit={} df_hz={} window={} overlap={} segments={}\nfrequency_hz,psd\n",
        spectrum.unit(),
        format_f64(spectrum.df()),
        spectrum.meta.window,
        spectrum.meta.overlap,
        spectrum.meta.segments
    ));
    for (k, v) in spectrum.values().iter().enumerate() {
        out.push_str(&format_f64(spectrum.frequency(k)));
        out.push(',');
        out.push_str(&format_f64(*v));
        out.push('\n');
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

fn header_field<'a>(fields: &'a [(&str, &str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Format(format!("spectrum header lacks {key}=")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what} from {s:?}")))
}

pub fn read_spectrum(r: impl Read) -> Result<Spectrum> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty spectrum file".into()))??;
    let body = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("spectrum header must start with '# '".into()))?;
    let fields: Vec<(&str, &str)> = body
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let unit =
        UnitTag::new(header_field(&fields, "unit")?).map_err(|e| Error::Format(e.to_string()))?;
    let df: f64 = parse(header_field(&fields, "df_hz")?, "df_hz")?;
    let meta = SpectrumMeta {
        window: header_field(&fields, "window")?.to_owned(),
        overlap: parse(header_field(&fields, "overlap")?, "overlap")?,
        segments: parse(header_field(&fields, "segments")?, "segments")?,
    };
    match lines.next() {
        Some(Ok(l)) if l.trim() == "frequency_hz,psd" => {}
        _ => return Err(Error::Format("missing frequency_hz,psd column line".into())),
    }
    let mut values = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (f, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("malformed row {line:?}")))?;
        let f: f64 = parse(f, "frequency")?;
        if (f - k as f64 * df).abs() > 1e-9 * df.max(f.abs()) {
            return Err(Error::Format(format!(
                "non-uniform frequency grid at row {k}: {f} Hz"
            )));
        }
        values.push(parse(v, "psd")?);
    }
    Spectrum::new(df, values, unit)
        .map(|s| s.with_meta(meta))
        .map_err(|e| Error::Format(e.to_string()))
}

pub fn save_spectrum(path: impl AsRef<Path>, spectrum: &Spectrum) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_spectrum(&mut w, spectrum)?;
    w.flush()?;
    Ok(())
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    read_spectrum(File::open(path)?)
}
