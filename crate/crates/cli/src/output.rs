//! File helpers shared by the commands: metadata sidecars, CSV tables and
//! input sniffing.

use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use omtk::io::{format_f64, load_spectrum, load_trace, save_spectrum, save_trace, TRACE_MAGIC};
use omtk::spectral::{welch_psd, Spectrum, WelchConfig};
use omtk::trace::TimeTrace;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Provenance written next to every output file as `<file>.meta`. The
/// content is TOML: tool version, command and resolved options, followed
/// by the resolved run configuration when one was used.
#[derive(Debug, Clone)]
pub struct Meta {
    command: &'static str,
    options: Vec<(String, String)>,
    config: Option<String>,
}

impl Meta {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            options: Vec::new(),
            config: None,
        }
    }

    pub fn option(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.options.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn number(self, key: &str, value: f64) -> Self {
        self.option(key, format_f64(value))
    }

    pub fn text(self, key: &str, value: &str) -> Self {
        self.option(key, toml::Value::String(value.to_owned()))
    }

    pub fn config(mut self, cfg: &RunConfig) -> Self {
        self.config = Some(cfg.to_toml());
        self
    }

    pub fn welch(self, w: &WelchConfig) -> Self {
        self.option("segment", w.segment_length)
            .number("overlap", w.overlap)
            .text("window", w.window.name())
    }

    fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tool = \"omtk\"");
        let _ = writeln!(out, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "command = \"{}\"", self.command);
        for (k, v) in &self.options {
            let _ = writeln!(out, "{k} = {v}");
        }
        if let Some(cfg) = &self.config {
            out.push('\n');
            out.push_str(cfg);
        }
        out
    }

    pub fn write_for(&self, output: &Path) -> CliResult<()> {
        write_text(&meta_path(output), &self.render())
    }
}

pub fn meta_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// `dir/stem.<tag>.<ext>` next to `path`.
pub fn companion_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

pub fn save_trace_with(path: &Path, trace: &TimeTrace, meta: &Meta) -> CliResult<()> {
    save_trace(path, trace).map_err(|e| io_context(path, e))?;
    meta.write_for(path)
}

pub fn save_spectrum_with(path: &Path, spectrum: &Spectrum, meta: &Meta) -> CliResult<()> {
    save_spectrum(path, spectrum).map_err(|e| io_context(path, e))?;
    meta.write_for(path)
}

fn io_context(path: &Path, e: omtk::Error) -> CliError {
    match e {
        omtk::Error::Io(err) => CliError::Io(format!("{}: {err}", path.display())),
        omtk::Error::Format(m) => CliError::Io(format!("{}: {m}", path.display())),
        other => other.into(),
    }
}

pub fn read_trace(path: &Path) -> CliResult<TimeTrace> {
    load_trace(path).map_err(|e| io_context(path, e))
}

fn is_trace_file(path: &Path) -> CliResult<bool> {
    let mut f = fs::File::open(path)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    let mut magic = [0u8; 8];
    Ok(f.read_exact(&mut magic).is_ok() && &magic == TRACE_MAGIC)
}

/// A spectrum file as is, or the Welch PSD of a trace file.
pub fn spectrum_input(path: &Path, welch: &WelchConfig) -> CliResult<Spectrum> {
    if is_trace_file(path)? {
        Ok(welch_psd(&read_trace(path)?, welch)?)
    } else {
        load_spectrum(path).map_err(|e| io_context(path, e))
    }
}

/// A CSV table as a header (possibly empty) and numeric columns. Lines
/// starting with `#` are skipped; a first row that does not parse as
/// numbers is taken as the header.
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut header = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    for (row, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(values) => {
                if columns.is_empty() {
                    columns = vec![Vec::new(); values.len()];
                }
                if values.len() != columns.len() {
                    return Err(CliError::Io(format!(
                        "{}: row {} has {} fields, expected {}",
                        path.display(),
                        row + 1,
                        values.len(),
                        columns.len()
                    )));
                }
                for (c, v) in columns.iter_mut().zip(values) {
                    c.push(v);
                }
            }
            Err(_) if row == 0 => header = fields.iter().map(|s| s.to_string()).collect(),
            Err(_) => {
                return Err(CliError::Io(format!(
                    "{}: row {} is not numeric: {line}",
                    path.display(),
                    row + 1
                )))
            }
        }
    }
    if !header.is_empty() && !columns.is_empty() && header.len() != columns.len() {
        return Err(CliError::Io(format!(
            "{}: header has {} fields but rows have {}",
            path.display(),
            header.len(),
            columns.len()
        )));
    }
    if columns.is_empty() {
        return Err(CliError::Io(format!("{}: no data rows", path.display())));
    }
    Ok(Table { header, columns })
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>], meta: &Meta) -> CliResult<()> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let fields: Vec<String> = r.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_text(path, &out)?;
    meta.write_for(path)
}

/// One `key=value` line of structured standard output.
pub fn kv(key: &str, value: impl std::fmt::Display) {
    println!("{key}={value}");
}
