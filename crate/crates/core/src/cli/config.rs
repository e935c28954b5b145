//! Run configuration: built-in defaults, then a `key = value` file, then
//! command-line flags. Dimensioned values must carry a unit suffix.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::allocation::Scheme;
use crate::antenna::AntennaPattern;
use crate::error::{Error, Result};
use crate::geometry::NetworkGeometry;
use crate::link::{LinkBudget, SnrModel};
use crate::units::{Db, Dbm, Degrees, Watts};

/// Every accepted key, in echo order.
pub const KEYS: [&str; 19] = [
    "d0",
    "dl",
    "v",
    "n_segments",
    "p_ref",
    "theta_3db",
    "shadowing",
    "path_loss_exp",
    "wavelength",
    "bandwidth",
    "noise_figure",
    "mode",
    "schemes",
    "sweep",
    "sigma_v",
    "trials",
    "seed",
    "out",
    "eq40_as_printed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Default,
    File,
    Flag,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Default => "default",
            Provenance::File => "file",
            Provenance::Flag => "flag",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Dl,
    V,
    NSegments,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::Dl => "dl",
            SweepVar::V => "v",
            SweepVar::NSegments => "n_segments",
        }
    }
}

/// Inclusive range `start, start + step, ...` up to `stop`, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let count =
            ((self.stop - self.start) / self.step * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| self.start + k as f64 * self.step)
            .collect()
    }
}

/// Velocity-error spread, absolute or as a fraction of the true speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaV {
    Absolute(f64),
    Percent(f64),
}

impl SigmaV {
    pub fn resolve(&self, v: f64) -> f64 {
        match *self {
            SigmaV::Absolute(s) => s,
            SigmaV::Percent(p) => p / 100.0 * v,
        }
    }
}

/// Fully resolved parameters in SI units (powers in dBm, angles in degrees).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d0: f64,
    pub dl: f64,
    pub v: f64,
    pub n_segments: usize,
    pub p_ref: Vec<Dbm>,
    pub theta_3db: Degrees,
    pub shadowing: Db,
    pub path_loss_exp: f64,
    pub wavelength: f64,
    pub bandwidth: f64,
    pub noise_figure: Db,
    pub mode: SnrModel,
    pub schemes: Vec<Scheme>,
    pub sweep: Option<Sweep>,
    pub sigma_v: SigmaV,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub eq40_as_printed: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d0: 20.0,
            dl: 120.0,
            v: 300.0 / 3.6,
            n_segments: 8,
            p_ref: vec![Dbm(40.0), Dbm(50.0)],
            theta_3db: Degrees(30.0),
            shadowing: Db(10.0),
            path_loss_exp: 2.0,
            wavelength: 0.005,
            bandwidth: 2.16e9,
            noise_figure: Db(6.0),
            mode: SnrModel::PaperLiteral,
            schemes: vec![Scheme::Mctp, Scheme::Otpa, Scheme::Mtpa, Scheme::OtpaInf],
            sweep: None,
            sigma_v: SigmaV::Absolute(0.0),
            trials: 1000,
            seed: 0,
            out: None,
            eq40_as_printed: false,
        }
    }
}

impl RunConfig {
    pub fn geometry(&self) -> Result<NetworkGeometry> {
        NetworkGeometry::new(self.d0, self.dl, self.n_segments, self.v)
    }

    pub fn budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(
            AntennaPattern::new(self.theta_3db)?,
            self.shadowing,
            self.path_loss_exp,
            self.wavelength,
            self.bandwidth,
            self.noise_figure,
        )
    }

    /// Copy with the sweep variable set to `value`.
    pub fn at(&self, var: SweepVar, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match var {
            SweepVar::Dl => c.dl = value,
            SweepVar::V => c.v = value,
            SweepVar::NSegments => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(config_err(
                        "n_segments",
                        &value.to_string(),
                        "a positive integer",
                    ));
                }
                c.n_segments = value as usize;
            }
        }
        Ok(c)
    }

    /// Canonical text of one key; parsing it back yields the same value.
    pub fn value_text(&self, key: &str) -> String {
        match key {
            "d0" => format!("{} m", self.d0),
            "dl" => format!("{} m", self.dl),
            "v" => format!("{} m/s", self.v),
            "n_segments" => self.n_segments.to_string(),
            "p_ref" => self
                .p_ref
                .iter()
                .map(|p| format!("{} dBm", p.0))
                .collect::<Vec<_>>()
                .join(", "),
            "theta_3db" => format!("{} deg", self.theta_3db.0),
            "shadowing" => format!("{} dB", self.shadowing.0),
            "path_loss_exp" => self.path_loss_exp.to_string(),
            "wavelength" => format!("{} m", self.wavelength),
            "bandwidth" => format!("{} Hz", self.bandwidth),
            "noise_figure" => format!("{} dB", self.noise_figure.0),
            "mode" => self.mode.as_str().to_string(),
            "schemes" => self
                .schemes
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(","),
            "sweep" => match &self.sweep {
                None => "none".to_string(),
                Some(s) => {
                    let unit = match s.var {
                        SweepVar::Dl => "m",
                        SweepVar::V => "m/s",
                        SweepVar::NSegments => "",
                    };
                    format!(
                        "{}:{}{unit}:{}{unit}:{}{unit}",
                        s.var.as_str(),
                        s.start,
                        s.stop,
                        s.step
                    )
                }
            },
            "sigma_v" => match self.sigma_v {
                SigmaV::Absolute(s) => format!("{s} m/s"),
                SigmaV::Percent(p) => format!("{p} %"),
            },
            "trials" => self.trials.to_string(),
            "seed" => self.seed.to_string(),
            "out" => match &self.out {
                None => "none".to_string(),
                Some(p) => p.display().to_string(),
            },
            "eq40_as_printed" => self.eq40_as_printed.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Parses `raw` for `key` and stores it.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        match key {
            "d0" => self.d0 = positive(key, parse_length(key, raw)?)?,
            "dl" => self.dl = positive(key, parse_length(key, raw)?)?,
            "v" => self.v = positive(key, parse_speed(key, raw)?)?,
            "n_segments" => {
                self.n_segments = parse_int::<usize>(key, raw)?;
                if self.n_segments == 0 {
                    return Err(config_err(key, raw, "a positive integer"));
                }
            }
            "p_ref" => {
                let list = raw
                    .split(',')
                    .map(|p| parse_power(key, p.trim()))
                    .collect::<Result<Vec<_>>>()?;
                if list.is_empty() {
                    return Err(config_err(key, raw, "at least one power"));
                }
                self.p_ref = list;
            }
            "theta_3db" => self.theta_3db = parse_angle(key, raw)?,
            "shadowing" => self.shadowing = parse_db(key, raw)?,
            "path_loss_exp" => self.path_loss_exp = parse_plain(key, raw)?,
            "wavelength" => self.wavelength = positive(key, parse_length(key, raw)?)?,
            "bandwidth" => self.bandwidth = positive(key, parse_frequency(key, raw)?)?,
            "noise_figure" => self.noise_figure = parse_db(key, raw)?,
            "mode" => {
                self.mode = raw
                    .parse()
                    .map_err(|_| config_err(key, raw, "paper-literal or physical"))?
            }
            "schemes" => self.schemes = parse_schemes(raw)?,
            "sweep" => self.sweep = parse_sweep(raw)?,
            "sigma_v" => self.sigma_v = parse_sigma_v(raw)?,
            "trials" => {
                self.trials = parse_int::<usize>(key, raw)?;
                if self.trials == 0 {
                    return Err(config_err(key, raw, "a positive integer"));
                }
            }
            "seed" => self.seed = parse_int::<u64>(key, raw)?,
            "out" => {
                self.out = match raw {
                    "" => return Err(config_err(key, raw, "a path or none")),
                    "none" => None,
                    p => Some(PathBuf::from(p)),
                }
            }
            "eq40_as_printed" => {
                self.eq40_as_printed = raw
                    .parse()
                    .map_err(|_| config_err(key, raw, "true or false"))?
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }
}

/// A configuration plus the layer each value came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: RunConfig,
    pub provenance: BTreeMap<&'static str, Provenance>,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            config: RunConfig::default(),
            provenance: KEYS.iter().map(|&k| (k, Provenance::Default)).collect(),
        }
    }
}

impl Resolved {
    pub fn apply(&mut self, key: &str, raw: &str, layer: Provenance) -> Result<()> {
        let key = canonical_key(key)?;
        self.config.set(key, raw)?;
        self.provenance.insert(key, layer);
        Ok(())
    }

    /// Applies a `key = value` file. `#` starts a comment; repeated keys
    /// are rejected.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        let mut seen = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = canonical_key(key.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
            if seen.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: key `{key}` repeated",
                    lineno + 1
                )));
            }
            seen.push(key);
            self.apply(key, value, Provenance::File)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Every resolved value with its layer, one `key = value  # layer` line
    /// per key. Re-parsing the text reproduces the configuration.
    pub fn echo(&self) -> String {
        KEYS.iter()
            .map(|&k| {
                format!(
                    "{k} = {}  # {}\n",
                    self.config.value_text(k),
                    self.provenance[k]
                )
            })
            .collect()
    }
}

fn canonical_key(key: &str) -> Result<&'static str> {
    let normalized = key.trim().replace('-', "_");
    KEYS.iter()
        .find(|&&k| k == normalized)
        .copied()
        .ok_or_else(|| Error::Config(format!("unknown key `{}`", key.trim())))
}

fn config_err(key: &str, raw: &str, expected: &str) -> Error {
    Error::Config(format!(
        "`{key}`: cannot parse `{raw}`, expected {expected}"
    ))
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config_err(key, &x.to_string(), "a positive value"))
    }
}

/// Splits `"2.16 GHz"` or `"2.16GHz"` into number and unit.
fn split_quantity(raw: &str) -> Option<(f64, &str)> {
    let raw = raw.trim();
    let end = raw
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || ((c == '-' || c == '+')
                    && (i == 0 || matches!(raw.as_bytes()[i - 1], b'e' | b'E')))
                || ((c == 'e' || c == 'E')
                    && raw[i + 1..]
                        .starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map_or(raw.len(), |(i, _)| i);
    let value: f64 = raw[..end].parse().ok()?;
    value.is_finite().then_some((value, raw[end..].trim()))
}

fn with_unit(
    key: &str,
    raw: &str,
    expected: &str,
    scale: impl Fn(&str) -> Option<f64>,
) -> Result<f64> {
    let (x, unit) = split_quantity(raw).ok_or_else(|| config_err(key, raw, expected))?;
    if unit.is_empty() {
        return Err(Error::Config(format!(
            "`{key}`: `{raw}` is missing a unit, expected {expected}"
        )));
    }
    scale(unit)
        .map(|s| x * s)
        .ok_or_else(|| config_err(key, raw, expected))
}

fn parse_length(key: &str, raw: &str) -> Result<f64> {
    with_unit(key, raw, "a length in m, mm, cm or km", |u| match u {
        "m" => Some(1.0),
        "mm" => Some(1e-3),
        "cm" => Some(1e-2),
        "km" => Some(1e3),
        _ => None,
    })
}

fn parse_speed(key: &str, raw: &str) -> Result<f64> {
    let expected = "a speed in m/s or km/h";
    let (x, unit) = split_quantity(raw).ok_or_else(|| config_err(key, raw, expected))?;
    match unit {
        "m/s" => Ok(x),
        // Divided, not scaled, so that 300 km/h is exactly 300 / 3.6.
        "km/h" => Ok(x / 3.6),
        "" => Err(Error::Config(format!(
            "`{key}`: `{raw}` is missing a unit, expected {expected}"
        ))),
        _ => Err(config_err(key, raw, expected)),
    }
}

fn parse_angle(key: &str, raw: &str) -> Result<Degrees> {
    let (x, unit) =
        split_quantity(raw).ok_or_else(|| config_err(key, raw, "an angle in deg or rad"))?;
    match unit {
        "deg" => Ok(Degrees(x)),
        "rad" => Ok(Degrees(x.to_degrees())),
        "" => Err(Error::Config(format!(
            "`{key}`: `{raw}` is missing a unit, expected deg or rad"
        ))),
        _ => Err(config_err(key, raw, "an angle in deg or rad")),
    }
}

fn parse_db(key: &str, raw: &str) -> Result<Db> {
    with_unit(key, raw, "a ratio in dB", |u| (u == "dB").then_some(1.0)).map(Db)
}

fn parse_power(key: &str, raw: &str) -> Result<Dbm> {
    let expected = "a power in dBm, W or mW";
    let (x, unit) = split_quantity(raw).ok_or_else(|| config_err(key, raw, expected))?;
    match unit {
        "dBm" => Ok(Dbm(x)),
        "W" => Ok(Watts(x).to_dbm()),
        "mW" => Ok(Dbm(10.0 * x.log10())),
        "" => Err(Error::Config(format!(
            "`{key}`: `{raw}` is missing a unit, expected {expected}"
        ))),
        _ => Err(config_err(key, raw, expected)),
    }
}

fn parse_frequency(key: &str, raw: &str) -> Result<f64> {
    with_unit(
        key,
        raw,
        "a frequency in Hz, kHz, MHz or GHz",
        |u| match u {
            "Hz" => Some(1.0),
            "kHz" => Some(1e3),
            "MHz" => Some(1e6),
            "GHz" => Some(1e9),
            _ => None,
        },
    )
}

fn parse_plain(key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| config_err(key, raw, "a plain number"))
}

fn parse_int<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| config_err(key, raw, "an integer"))
}

fn parse_schemes(raw: &str) -> Result<Vec<Scheme>> {
    let mut out: Vec<Scheme> = if raw.eq_ignore_ascii_case("all") {
        Scheme::ALL.to_vec()
    } else {
        raw.split(',')
            .map(|s| {
                s.trim()
                    .to_ascii_uppercase()
                    .parse::<Scheme>()
                    .map_err(|_| {
                        config_err(
                            "schemes",
                            s.trim(),
                            "MCTP, OTPA, MTPA, OTPA_INF, ORACLE or all",
                        )
                    })
            })
            .collect::<Result<_>>()?
    };
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(config_err("schemes", raw, "at least one scheme"));
    }
    Ok(out)
}

fn parse_sweep(raw: &str) -> Result<Option<Sweep>> {
    if raw == "none" {
        return Ok(None);
    }
    let expected = "var:start:stop:step with var one of dl, v, n_segments";
    let parts: Vec<&str> = raw.split(':').map(str::trim).collect();
    let [var, start, stop, step] = parts[..] else {
        return Err(config_err("sweep", raw, expected));
    };
    let var = match var.replace('-', "_").as_str() {
        "dl" => SweepVar::Dl,
        "v" => SweepVar::V,
        "n_segments" => SweepVar::NSegments,
        _ => return Err(config_err("sweep", raw, expected)),
    };
    let value = |s: &str| -> Result<f64> {
        match var {
            SweepVar::Dl => parse_length("sweep", s),
            SweepVar::V => parse_speed("sweep", s),
            SweepVar::NSegments => parse_int::<u64>("sweep", s).map(|n| n as f64),
        }
    };
    let sweep = Sweep {
        var,
        start: value(start)?,
        stop: value(stop)?,
        step: value(step)?,
    };
    if !(sweep.step > 0.0 && sweep.stop >= sweep.start) {
        return Err(config_err("sweep", raw, "step > 0 and stop >= start"));
    }
    Ok(Some(sweep))
}

fn parse_sigma_v(raw: &str) -> Result<SigmaV> {
    let (x, unit) =
        split_quantity(raw).ok_or_else(|| config_err("sigma_v", raw, "a speed or a percentage"))?;
    if !(x >= 0.0) {
        return Err(config_err("sigma_v", raw, "a non-negative value"));
    }
    if unit == "%" {
        Ok(SigmaV::Percent(x))
    } else {
        parse_speed("sigma_v", raw).map(SigmaV::Absolute)
    }
}
