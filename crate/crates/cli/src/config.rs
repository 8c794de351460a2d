//! Flat `key = value` run configuration.
//!
//! Lines hold one `key = value` pair; `#` starts a comment. Unknown keys,
//! duplicates and malformed values are reported with their line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use atomdiode::{DiodeParams, GridSpec, Scale, C64};
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Steady,
    Scatter,
    SweepPower,
    SweepEfficiency,
    Correlate,
    Emission,
    FlapCompare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Scatter => "scatter",
            Command::SweepPower => "sweep-power",
            Command::SweepEfficiency => "sweep-efficiency",
            Command::Correlate => "correlate",
            Command::Emission => "emission",
            Command::FlapCompare => "flap-compare",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Command::Steady,
            Command::Scatter,
            Command::SweepPower,
            Command::SweepEfficiency,
            Command::Correlate,
            Command::Emission,
            Command::FlapCompare,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "gamma1",
    "gamma2",
    "domega1",
    "domega2",
    "dphi",
    "delta",
    "alpha",
    "beta",
    "regime",
    "initial",
    "null_tol",
    "horizon",
    "tau_min",
    "tau_max",
    "tau_points",
    "tau_scale",
    "power_min",
    "power_max",
    "power_points",
    "power_scale",
    "dphi_min",
    "dphi_max",
    "domega1_min",
    "domega1_max",
    "resolution",
    "time_min",
    "time_max",
    "time_points",
    "time_scale",
    "seed",
    "trajectories",
    "t_max",
    "exact_rates",
    "output_path",
    "format",
];

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
}

/// Raw key/value pairs with their source lines.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    source: String,
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    pub fn parse(source: &str, text: &str) -> Result<Self, CliError> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("{source}:{line}: expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::config(format!("{source}:{line}: unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(CliError::config(format!("{source}:{line}: `{key}` has no value")));
            }
            if let Some(prev) = entries.get(key) {
                return Err(CliError::config(format!(
                    "{source}:{line}: `{key}` already set on line {}",
                    prev.line
                )));
            }
            entries.insert(key.to_string(), Entry { value: value.to_string(), line });
        }
        Ok(Self { source: source.to_string(), entries })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn err(&self, key: &str, msg: impl fmt::Display) -> CliError {
        match self.entries.get(key) {
            Some(e) => CliError::config(format!("{}:{}: `{key}`: {msg}", self.source, e.line)),
            None => CliError::config(format!("{}: `{key}`: {msg}", self.source)),
        }
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| self.err(key, format!("cannot parse `{}`: {err}", e.value))),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v = self.get::<f64>(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(self.err(key, "must be finite")),
            _ => Ok(v),
        }
    }

    fn complex(&self, key: &str) -> Result<Option<C64>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => parse_complex(&e.value).map(Some).ok_or_else(|| {
                self.err(key, format!("cannot parse `{}` (use `0.01`, `0.01+0.02i` or `0.02i`)", e.value))
            }),
        }
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z = if let Some(body) = s.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        match split {
            Some(k) => {
                let im = match &body[k..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    t => t.parse().ok()?,
                };
                C64::new(body[..k].parse().ok()?, im)
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    t => t.parse().ok()?,
                };
                C64::new(0.0, im)
            }
        }
    } else {
        C64::new(s.parse().ok()?, 0.0)
    };
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub params: DiodeParams,
    pub regime: String,
    pub initial: usize,
    pub null_tol: f64,
    pub horizon: f64,
    pub tau: Option<GridSpec>,
    pub power: GridSpec,
    pub dphi_range: (f64, f64),
    pub domega1_range: (f64, f64),
    pub resolution: usize,
    pub time: Option<GridSpec>,
    pub seed: u64,
    pub trajectories: usize,
    pub t_max: Option<f64>,
    pub exact_rates: bool,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

fn scale(raw: &RawConfig, key: &str, default: Scale) -> Result<Scale, CliError> {
    match raw.text(key) {
        None => Ok(default),
        Some("linear") => Ok(Scale::Linear),
        Some("log") => Ok(Scale::Log),
        Some(other) => Err(raw.err(key, format!("expected `linear` or `log`, got `{other}`"))),
    }
}

fn grid(raw: &RawConfig, prefix: &str, default: Option<GridSpec>) -> Result<Option<GridSpec>, CliError> {
    let keys = ["min", "max", "points", "scale"].map(|s| format!("{prefix}_{s}"));
    let any = keys.iter().any(|k| raw.has(k));
    let base = match (default, any) {
        (Some(d), _) => d,
        (None, false) => return Ok(None),
        (None, true) => {
            for k in &keys[..3] {
                if !raw.has(k) {
                    return Err(raw.err(k, format!("required when any `{prefix}_*` key is set")));
                }
            }
            GridSpec::linear(0.0, 0.0, 2)
        }
    };
    let g = GridSpec {
        min: raw.real(&keys[0])?.unwrap_or(base.min),
        max: raw.real(&keys[1])?.unwrap_or(base.max),
        points: raw.get::<usize>(&keys[2])?.unwrap_or(base.points),
        scale: scale(raw, &keys[3], base.scale)?,
    };
    g.validate().map_err(|e| raw.err(&keys[0], e))?;
    Ok(Some(g))
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig, cli_command: Command, ov: &Overrides) -> Result<Self, CliError> {
        if let Some(c) = raw.text("command") {
            match Command::parse(c) {
                Some(c) if c == cli_command => {}
                Some(c) => {
                    return Err(raw.err("command", format!("file says `{}` but `{}` was requested", c.name(), cli_command.name())))
                }
                None => return Err(raw.err("command", format!("unknown command `{c}`"))),
            }
        }

        let mut p = DiodeParams::default();
        if let Some(d) = raw.real("delta")? {
            for k in ["domega1", "domega2", "dphi"] {
                if raw.has(k) {
                    return Err(raw.err(k, "conflicts with `delta`, which fixes the optimal slice"));
                }
            }
            p = DiodeParams::optimal(d);
        }
        p.gamma1 = raw.real("gamma1")?.unwrap_or(p.gamma1);
        p.gamma2 = raw.real("gamma2")?.unwrap_or(p.gamma2);
        p.domega1 = raw.real("domega1")?.unwrap_or(p.domega1);
        p.domega2 = raw.real("domega2")?.unwrap_or(p.domega2);
        p.dphi = raw.real("dphi")?.unwrap_or(p.dphi);
        p.alpha = raw.complex("alpha")?.unwrap_or(p.alpha);
        p.beta = raw.complex("beta")?.unwrap_or(p.beta);
        for (k, g) in [("gamma1", p.gamma1), ("gamma2", p.gamma2)] {
            if !(g > 0.0) {
                return Err(raw.err(k, "decay rates must be positive"));
            }
        }

        let regime = match raw.text("regime").unwrap_or("full") {
            r @ ("full" | "adiabatic") => r.to_string(),
            other => return Err(raw.err("regime", format!("expected `full` or `adiabatic`, got `{other}`"))),
        };
        let default_initial = if cli_command == Command::Emission { "D" } else { "G" };
        let initial = match raw.text("initial").unwrap_or(default_initial) {
            "G" => 0,
            "D" => 1,
            "B" => 2,
            "E" => 3,
            other => return Err(raw.err("initial", format!("expected one of G, D, B, E, got `{other}`"))),
        };

        let null_tol = raw.real("null_tol")?.unwrap_or(atomdiode::qmat::DEFAULT_NULL_TOL);
        if !(null_tol > 0.0 && null_tol < 1.0) {
            return Err(raw.err("null_tol", "must lie in (0, 1)"));
        }
        let horizon = raw.real("horizon")?.unwrap_or(1e5);
        if !(horizon > 0.0) {
            return Err(raw.err("horizon", "must be positive"));
        }

        let power = grid(raw, "power", Some(GridSpec::log(1e-8, 10.0, 40)))?.expect("default");
        if power.min <= 0.0 {
            return Err(raw.err("power_min", "powers must be positive"));
        }
        let dphi_range = (raw.real("dphi_min")?.unwrap_or(-0.04), raw.real("dphi_max")?.unwrap_or(0.04));
        let domega1_range = (raw.real("domega1_min")?.unwrap_or(-0.04), raw.real("domega1_max")?.unwrap_or(0.04));
        for (k, (lo, hi)) in [("dphi_min", dphi_range), ("domega1_min", domega1_range)] {
            if lo >= hi {
                return Err(raw.err(k, "range must have min < max"));
            }
        }
        let resolution = raw.get::<usize>("resolution")?.unwrap_or(64);
        if resolution < 8 {
            return Err(raw.err("resolution", "must be at least 8"));
        }

        let trajectories = raw.get::<usize>("trajectories")?.unwrap_or(200);
        if trajectories == 0 {
            return Err(raw.err("trajectories", "must be at least 1"));
        }
        let t_max = raw.real("t_max")?;
        if let Some(t) = t_max {
            if !(t > 0.0) {
                return Err(raw.err("t_max", "must be positive"));
            }
        }
        let exact_rates = match raw.text("exact_rates") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => return Err(raw.err("exact_rates", format!("expected `true` or `false`, got `{other}`"))),
        };

        let format = match (ov.format, raw.text("format")) {
            (Some(f), _) => f,
            (None, None | Some("csv")) => Format::Csv,
            (None, Some("json")) => Format::Json,
            (None, Some(other)) => return Err(raw.err("format", format!("expected `csv` or `json`, got `{other}`"))),
        };

        Ok(Self {
            command: cli_command,
            params: p,
            regime,
            initial,
            null_tol,
            horizon,
            tau: grid(raw, "tau", None)?,
            power,
            dphi_range,
            domega1_range,
            resolution,
            time: grid(raw, "time", None)?,
            seed: ov.seed.or(raw.get::<u64>("seed")?).unwrap_or(0),
            trajectories,
            t_max,
            exact_rates,
            output_path: ov.out.clone().or_else(|| raw.text("output_path").map(PathBuf::from)),
            format,
        })
    }

    /// Every resolved setting, for the JSON header.
    pub fn to_json(&self) -> Value {
        let p = &self.params;
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command.name()));
        m.insert("gamma1".into(), json!(p.gamma1));
        m.insert("gamma2".into(), json!(p.gamma2));
        m.insert("domega1".into(), json!(p.domega1));
        m.insert("domega2".into(), json!(p.domega2));
        m.insert("dphi".into(), json!(p.dphi));
        m.insert("alpha".into(), complex_json(p.alpha));
        m.insert("beta".into(), complex_json(p.beta));
        m.insert("regime".into(), json!(self.regime));
        m.insert("initial".into(), json!(["G", "D", "B", "E"][self.initial]));
        m.insert("null_tol".into(), json!(self.null_tol));
        m.insert("horizon".into(), json!(self.horizon));
        m.insert("power".into(), grid_json(Some(&self.power)));
        m.insert("tau".into(), grid_json(self.tau.as_ref()));
        m.insert("time".into(), grid_json(self.time.as_ref()));
        m.insert("dphi_range".into(), json!([self.dphi_range.0, self.dphi_range.1]));
        m.insert("domega1_range".into(), json!([self.domega1_range.0, self.domega1_range.1]));
        m.insert("resolution".into(), json!(self.resolution));
        m.insert("seed".into(), json!(self.seed));
        m.insert("trajectories".into(), json!(self.trajectories));
        m.insert("t_max".into(), self.t_max.map_or(Value::Null, |t| json!(t)));
        m.insert("exact_rates".into(), json!(self.exact_rates));
        m.insert("format".into(), json!(self.format.name()));
        Value::Object(m)
    }
}

pub fn complex_json(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn grid_json(g: Option<&GridSpec>) -> Value {
    match g {
        None => Value::Null,
        Some(g) => json!({
            "min": g.min,
            "max": g.max,
            "points": g.points,
            "scale": match g.scale { Scale::Linear => "linear", Scale::Log => "log" },
        }),
    }
}
