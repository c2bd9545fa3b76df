//! Run configuration documents.
//!
//! A run configuration is TOML. Every physical quantity carries its unit in
//! the key name (`kappa_mhz`, `duration_s`, `temperature_k`, ...), and keys
//! the schema does not know are rejected. Frequencies are ordinary (cycles
//! per second); they are converted to angular rates on load.
//!
//! ```toml
//! [cavity]
//! kappa_mhz = 36.0        # κ/2π
//! nu0 = -0.5773502691896258
//! n_c0 = 2.0e8
//!
//! [bath]
//! temperature_k = 300.0
//! seed = 1
//! classical_noise_psd_per_hz = 0.0   # single-sided, ν²/Hz
//!
//! [detector]
//! eta = 1.0
//! photon_flux_hz = 1.0e14
//! i_max = 1.0
//! i_bg = 0.0
//! shot_noise = true
//!
//! [[mode]]
//! label = "high-q"
//! freq_mhz = 1.13         # Ω_m/2π
//! quality = 1.071e8       # or linewidth_hz = Γ_m/2π
//! g0_hz = 441.0           # g0/2π
//! m_eff_kg = 2.0e-12
//!
//! [simulate]
//! duration_s = 0.05
//! fs_mhz = 5.0
//! radiation_pressure = false
//!
//! [spectral]
//! segment = 65536
//! overlap = 0.5
//! window = "hann"
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use omtk::consts::{angular, ordinary};
use omtk::fits::ModelPsdParams;
use omtk::params::{BathParams, CavityParams, DetectorParams, ModeParams};
use omtk::spectral::{WelchConfig, Window};

use crate::error::{CliError, CliResult};
use crate::presets;

/// Environment variable naming the directory searched for configuration
/// files and user presets.
pub const CONFIG_DIR_ENV: &str = "OMTK_CONFIG_DIR";

const FREQ_UNITS: [(&str, f64); 3] = [("hz", 1.0), ("khz", 1e3), ("mhz", 1e6)];

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSection {
    pub duration: f64,
    /// Hz.
    pub sample_rate: f64,
    pub radiation_pressure: bool,
    pub backaction_damping: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub cooperativities: Vec<f64>,
    /// Hz.
    pub band: (f64, f64),
    /// Overrides the bath's classical detuning noise for the sweep.
    pub classical_noise_psd: Option<f64>,
}

/// Port and noise inputs of the analytic spectrum; cavity, mode and
/// detuning come from the other sections.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPsdSection {
    /// rad/s.
    pub kappa_t: f64,
    /// rad/s.
    pub kappa_other: f64,
    pub n_c: f64,
    pub s_delta: f64,
    pub thermal_force_psd: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub cavity: Option<CavityParams>,
    pub bath: Option<BathParams>,
    pub detector: Option<DetectorParams>,
    pub modes: Vec<ModeParams>,
    pub simulate: Option<SimulateSection>,
    pub spectral: Option<WelchConfig>,
    pub sweep: Option<SweepSection>,
    pub model_psd: Option<ModelPsdSection>,
}

/// Key reader that remembers what was consumed so leftovers can be
/// reported.
struct Section<'a> {
    name: String,
    table: &'a Table,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(name: impl Into<String>, table: &'a Table) -> Self {
        Self {
            name: name.into(),
            table,
            used: BTreeSet::new(),
        }
    }

    fn err(&self, msg: impl std::fmt::Display) -> CliError {
        CliError::Config(format!("[{}] {msg}", self.name))
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        let v = self.table.get(key);
        if v.is_some() {
            self.used.insert(key.to_owned());
        }
        v
    }

    fn number(&mut self, key: &str) -> CliResult<Option<f64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(other) => Err(self.err(format!("{key} must be a number, got {other}"))),
        }
    }

    /// Value given under exactly one of `base_<unit>`; scaled to the base
    /// unit.
    fn scaled(&mut self, base: &str, units: &[(&str, f64)]) -> CliResult<Option<f64>> {
        let mut found = None;
        for (suffix, scale) in units {
            let key = if suffix.is_empty() {
                base.to_owned()
            } else {
                format!("{base}_{suffix}")
            };
            if let Some(v) = self.number(&key)? {
                if found.is_some() {
                    return Err(self.err(format!("{base} is given in more than one unit")));
                }
                found = Some(v * scale);
            }
        }
        Ok(found)
    }

    fn required(&mut self, base: &str, units: &[(&str, f64)]) -> CliResult<f64> {
        self.scaled(base, units)?.ok_or_else(|| {
            let keys: Vec<String> = units
                .iter()
                .map(|(s, _)| {
                    if s.is_empty() {
                        base.to_owned()
                    } else {
                        format!("{base}_{s}")
                    }
                })
                .collect();
            self.err(format!("missing {}", keys.join(" | ")))
        })
    }

    fn frequency(&mut self, base: &str) -> CliResult<Option<f64>> {
        self.scaled(base, &FREQ_UNITS)
    }

    fn required_frequency(&mut self, base: &str) -> CliResult<f64> {
        self.required(base, &FREQ_UNITS)
    }

    /// Dimensionless quantity, plain or in parts per million.
    fn dimensionless(&mut self, base: &str) -> CliResult<Option<f64>> {
        self.scaled(base, &[("", 1.0), ("ppm", 1e-6)])
    }

    fn required_dimensionless(&mut self, base: &str) -> CliResult<f64> {
        self.required(base, &[("", 1.0), ("ppm", 1e-6)])
    }

    fn boolean(&mut self, key: &str) -> CliResult<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(other) => Err(self.err(format!("{key} must be true or false, got {other}"))),
        }
    }

    fn string(&mut self, key: &str) -> CliResult<Option<&'a str>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(self.err(format!("{key} must be a string, got {other}"))),
        }
    }

    fn integer(&mut self, key: &str) -> CliResult<Option<i64>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(other) => Err(self.err(format!("{key} must be an integer, got {other}"))),
        }
    }

    fn numbers(&mut self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => Ok(*f),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(self.err(format!("{key} entries must be numbers, got {other}"))),
                })
                .collect::<CliResult<Vec<f64>>>()
                .map(Some),
            Some(other) => Err(self.err(format!("{key} must be an array, got {other}"))),
        }
    }

    fn finish(self) -> CliResult<()> {
        let unknown: Vec<&String> = self
            .table
            .keys()
            .filter(|k| !self.used.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            Err(self.err(format!("unknown key(s): {}", names.join(", "))))
        }
    }
}

fn table<'a>(root: &'a Table, name: &str) -> CliResult<Option<&'a Table>> {
    match root.get(name) {
        None => Ok(None),
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(CliError::Config(format!("[{name}] must be a table"))),
    }
}

fn parse_cavity(t: &Table) -> CliResult<CavityParams> {
    let mut s = Section::new("cavity", t);
    let cavity = CavityParams {
        kappa: angular(s.required_frequency("kappa")?),
        nu0: s.required_dimensionless("nu0")?,
        n_c0: s.required_dimensionless("n_c0")?,
        phi0: s.scaled("phi0", &[("rad", 1.0)])?.unwrap_or(0.0),
    };
    s.finish()?;
    cavity.validate()?;
    Ok(cavity)
}

fn parse_bath(t: &Table) -> CliResult<BathParams> {
    let mut s = Section::new("bath", t);
    let temperature = s.required("temperature", &[("k", 1.0)])?;
    let seed = s.integer("seed")?.unwrap_or(0);
    if seed < 0 {
        return Err(s.err("seed must be non-negative"));
    }
    let bath = BathParams {
        temperature,
        seed: seed as u64,
        classical_detuning_noise_psd: s.number("classical_noise_psd_per_hz")?.unwrap_or(0.0),
    };
    s.finish()?;
    bath.validate()?;
    Ok(bath)
}

fn parse_detector(t: &Table) -> CliResult<DetectorParams> {
    let mut s = Section::new("detector", t);
    let det = DetectorParams {
        eta_det: s.required_dimensionless("eta")?,
        photon_flux: s.frequency("photon_flux")?.unwrap_or(0.0),
        i_max: s.required_dimensionless("i_max")?,
        i_bg: s.dimensionless("i_bg")?.unwrap_or(0.0),
        shot_noise: s.boolean("shot_noise")?.unwrap_or(false),
    };
    s.finish()?;
    det.validate()?;
    Ok(det)
}

fn parse_mode(t: &Table, index: usize) -> CliResult<ModeParams> {
    let mut s = Section::new(format!("mode {index}"), t);
    let label = s
        .string("label")?
        .map(str::to_owned)
        .unwrap_or_else(|| format!("mode{index}"));
    let omega_m = angular(s.required_frequency("freq")?);
    let quality = s.number("quality")?;
    let linewidth = s.frequency("linewidth")?;
    let gamma_m = match (quality, linewidth) {
        (Some(q), None) => omega_m / q,
        (None, Some(w)) => angular(w),
        _ => return Err(s.err("give exactly one of quality | linewidth_hz")),
    };
    let mode = ModeParams {
        omega_m,
        gamma_m,
        g0: angular(s.required_frequency("g0")?),
        m_eff: s.required("m_eff", &[("kg", 1.0)])?,
        beta_nl: s.number("beta_nl_per_js")?.unwrap_or(0.0),
        label,
    };
    s.finish()?;
    mode.validate()?;
    Ok(mode)
}

fn parse_simulate(t: &Table) -> CliResult<SimulateSection> {
    let mut s = Section::new("simulate", t);
    let sim = SimulateSection {
        duration: s.required("duration", &[("s", 1.0)])?,
        sample_rate: s.required_frequency("fs")?,
        radiation_pressure: s.boolean("radiation_pressure")?.unwrap_or(false),
        backaction_damping: s.boolean("backaction_damping")?.unwrap_or(false),
    };
    s.finish()?;
    Ok(sim)
}

fn parse_spectral(t: &Table) -> CliResult<WelchConfig> {
    let mut s = Section::new("spectral", t);
    let segment = s
        .integer("segment")?
        .ok_or_else(|| s.err("missing segment"))?;
    if segment < 2 {
        return Err(s.err("segment must be at least 2"));
    }
    let mut cfg = WelchConfig::new(segment as usize);
    if let Some(o) = s.number("overlap")? {
        cfg = cfg.with_overlap(o);
    }
    if let Some(w) = s.string("window")? {
        cfg = cfg.with_window(w.parse::<Window>()?);
    }
    s.finish()?;
    Ok(cfg)
}

fn parse_sweep(t: &Table) -> CliResult<SweepSection> {
    let mut s = Section::new("sweep", t);
    let cooperativities = s.numbers("c_over_n_th")?.unwrap_or_default();
    let mut band = None;
    for (suffix, scale) in FREQ_UNITS {
        if let Some(b) = s.numbers(&format!("band_{suffix}"))? {
            if band.is_some() {
                return Err(s.err("band is given in more than one unit"));
            }
            if b.len() != 2 {
                return Err(s.err("band must be [low, high]"));
            }
            band = Some((b[0] * scale, b[1] * scale));
        }
    }
    let sweep = SweepSection {
        cooperativities,
        band: band.ok_or_else(|| s.err("missing band_hz | band_khz | band_mhz"))?,
        classical_noise_psd: s.number("classical_noise_psd_per_hz")?,
    };
    s.finish()?;
    Ok(sweep)
}

fn parse_model_psd(t: &Table) -> CliResult<ModelPsdSection> {
    let mut s = Section::new("model_psd", t);
    let m = ModelPsdSection {
        kappa_t: angular(s.required_frequency("kappa_t")?),
        kappa_other: angular(s.required_frequency("kappa_other")?),
        n_c: s.required_dimensionless("n_c")?,
        s_delta: s.number("s_delta_rad2_per_s2_hz")?.unwrap_or(0.0),
        thermal_force_psd: s.number("thermal_force_psd_n2_per_hz")?.unwrap_or(0.0),
        eta: s.required_dimensionless("eta")?,
    };
    s.finish()?;
    Ok(m)
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(format!("invalid TOML: {e}")))?;
        let known = [
            "cavity",
            "bath",
            "detector",
            "mode",
            "simulate",
            "spectral",
            "sweep",
            "model_psd",
        ];
        if let Some(k) = root.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(CliError::Config(format!("unknown section [{k}]")));
        }
        let modes = match root.get("mode") {
            None => Vec::new(),
            Some(Value::Array(items)) => items
                .iter()
                .enumerate()
                .map(|(i, v)| match v {
                    Value::Table(t) => parse_mode(t, i),
                    _ => Err(CliError::Config("[[mode]] entries must be tables".into())),
                })
                .collect::<CliResult<_>>()?,
            Some(_) => {
                return Err(CliError::Config(
                    "modes are given as [[mode]] tables".into(),
                ))
            }
        };
        Ok(Self {
            cavity: table(&root, "cavity")?.map(parse_cavity).transpose()?,
            bath: table(&root, "bath")?.map(parse_bath).transpose()?,
            detector: table(&root, "detector")?.map(parse_detector).transpose()?,
            modes,
            simulate: table(&root, "simulate")?.map(parse_simulate).transpose()?,
            spectral: table(&root, "spectral")?.map(parse_spectral).transpose()?,
            sweep: table(&root, "sweep")?.map(parse_sweep).transpose()?,
            model_psd: table(&root, "model_psd")?
                .map(parse_model_psd)
                .transpose()?,
        })
    }

    /// Loads `name` as a file path, then from [`CONFIG_DIR_ENV`], then as a
    /// built-in preset.
    pub fn load(name: &str) -> CliResult<Self> {
        Self::parse(&read_source(name)?)
    }

    pub fn cavity(&self) -> CliResult<&CavityParams> {
        self.cavity.as_ref().ok_or_else(|| missing("cavity"))
    }

    pub fn bath(&self) -> CliResult<&BathParams> {
        self.bath.as_ref().ok_or_else(|| missing("bath"))
    }

    pub fn detector(&self) -> CliResult<&DetectorParams> {
        self.detector.as_ref().ok_or_else(|| missing("detector"))
    }

    pub fn simulate(&self) -> CliResult<&SimulateSection> {
        self.simulate.as_ref().ok_or_else(|| missing("simulate"))
    }

    pub fn sweep(&self) -> CliResult<&SweepSection> {
        self.sweep.as_ref().ok_or_else(|| missing("sweep"))
    }

    pub fn model_psd(&self) -> CliResult<&ModelPsdSection> {
        self.model_psd.as_ref().ok_or_else(|| missing("model_psd"))
    }

    pub fn mode(&self, index: usize) -> CliResult<&ModeParams> {
        self.modes.get(index).ok_or_else(|| {
            CliError::Config(format!(
                "mode index {index} out of range ({} [[mode]] entries)",
                self.modes.len()
            ))
        })
    }

    pub fn modes(&self) -> CliResult<&[ModeParams]> {
        if self.modes.is_empty() {
            Err(missing("mode"))
        } else {
            Ok(&self.modes)
        }
    }

    pub fn model_psd_params(&self, mode_index: usize) -> CliResult<ModelPsdParams> {
        let cavity = self.cavity()?;
        let m = self.model_psd()?;
        Ok(ModelPsdParams {
            kappa_total: cavity.kappa,
            kappa_t: m.kappa_t,
            kappa_other: m.kappa_other,
            detuning: cavity.nu0 * cavity.kappa / 2.0,
            mode: self.mode(mode_index)?.clone(),
            n_c: m.n_c,
            s_delta: m.s_delta,
            thermal_force_psd: m.thermal_force_psd,
            eta_det: m.eta,
        })
    }

    /// The fully resolved configuration in canonical units (Hz, s, K, kg).
    /// The output parses back to an equal configuration.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let num = |v: f64| omtk::io::format_f64(v);
        if let Some(c) = &self.cavity {
            out += "[cavity]\n";
            out += &format!("kappa_hz = {}\n", num(ordinary(c.kappa)));
            out += &format!("nu0 = {}\n", num(c.nu0));
            out += &format!("n_c0 = {}\n", num(c.n_c0));
            out += &format!("phi0_rad = {}\n\n", num(c.phi0));
        }
        if let Some(b) = &self.bath {
            out += "[bath]\n";
            out += &format!("temperature_k = {}\n", num(b.temperature));
            out += &format!("seed = {}\n", b.seed);
            out += &format!(
                "classical_noise_psd_per_hz = {}\n\n",
                num(b.classical_detuning_noise_psd)
            );
        }
        if let Some(d) = &self.detector {
            out += "[detector]\n";
            out += &format!("eta = {}\n", num(d.eta_det));
            out += &format!("photon_flux_hz = {}\n", num(d.photon_flux));
            out += &format!("i_max = {}\n", num(d.i_max));
            out += &format!("i_bg = {}\n", num(d.i_bg));
            out += &format!("shot_noise = {}\n\n", d.shot_noise);
        }
        for m in &self.modes {
            out += "[[mode]]\n";
            out += &format!("label = {}\n", Value::String(m.label.clone()));
            out += &format!("freq_hz = {}\n", num(ordinary(m.omega_m)));
            out += &format!("linewidth_hz = {}\n", num(ordinary(m.gamma_m)));
            out += &format!("g0_hz = {}\n", num(ordinary(m.g0)));
            out += &format!("m_eff_kg = {}\n", num(m.m_eff));
            out += &format!("beta_nl_per_js = {}\n\n", num(m.beta_nl));
        }
        if let Some(s) = &self.simulate {
            out += "[simulate]\n";
            out += &format!("duration_s = {}\n", num(s.duration));
            out += &format!("fs_hz = {}\n", num(s.sample_rate));
            out += &format!("radiation_pressure = {}\n", s.radiation_pressure);
            out += &format!("backaction_damping = {}\n\n", s.backaction_damping);
        }
        if let Some(w) = &self.spectral {
            out += "[spectral]\n";
            out += &format!("segment = {}\n", w.segment_length);
            out += &format!("overlap = {}\n", num(w.overlap));
            out += &format!("window = \"{}\"\n\n", w.window.name());
        }
        if let Some(s) = &self.sweep {
            out += "[sweep]\n";
            let list: Vec<String> = s.cooperativities.iter().map(|&v| num(v)).collect();
            out += &format!("c_over_n_th = [{}]\n", list.join(", "));
            out += &format!("band_hz = [{}, {}]\n", num(s.band.0), num(s.band.1));
            if let Some(p) = s.classical_noise_psd {
                out += &format!("classical_noise_psd_per_hz = {}\n", num(p));
            }
            out += "\n";
        }
        if let Some(m) = &self.model_psd {
            out += "[model_psd]\n";
            out += &format!("kappa_t_hz = {}\n", num(ordinary(m.kappa_t)));
            out += &format!("kappa_other_hz = {}\n", num(ordinary(m.kappa_other)));
            out += &format!("n_c = {}\n", num(m.n_c));
            out += &format!("s_delta_rad2_per_s2_hz = {}\n", num(m.s_delta));
            out += &format!(
                "thermal_force_psd_n2_per_hz = {}\n",
                num(m.thermal_force_psd)
            );
            out += &format!("eta = {}\n\n", num(m.eta));
        }
        out
    }
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("configuration has no [{section}] section"))
}

fn read_source(name: &str) -> CliResult<String> {
    let direct = PathBuf::from(name);
    if direct.is_file() {
        return read_file(&direct);
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let dir = PathBuf::from(dir);
        for candidate in [dir.join(name), dir.join(format!("{name}.toml"))] {
            if candidate.is_file() {
                return read_file(&candidate);
            }
        }
    }
    if let Some(text) = presets::get(name) {
        return Ok(text.to_owned());
    }
    Err(CliError::Config(format!(
        "no configuration file or preset named {name:?} (searched the working directory, ${CONFIG_DIR_ENV} and built-in presets)"
    )))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}
