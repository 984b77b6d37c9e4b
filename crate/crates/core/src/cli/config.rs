//! Run configuration: a TOML file flattened to dotted keys, with
//! `key=value` overrides applied on top.
//!
//! ```toml
//! [params]
//! n_atoms = 1000000
//! pump = 300.0
//!
//! [sweep]
//! w_min = 1e-3
//! w_max = 1e5
//! w_points = 100
//! n_min = 1e3
//! n_max = 1e7
//! n_points = 100
//!
//! [output]
//! dir = "out"
//! workers = 4
//! ```
//!
//! Missing `params.*` keys take the 87Sr example values. Any `geometry.*`
//! key derives Omega (and kappa, unless `params.kappa` is given) from the
//! cavity geometry, starting from the 87Sr cavity for unspecified fields.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use toml::Value;

use crate::cumulant::{CumulantState, Method};
use crate::error::{Error, Result};
use crate::params::{kappa_from_geometry, rabi_from_geometry, CavityGeometry, SystemParams};
use crate::spectrum::PullingMoments;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Product {
    Steady,
    PowerMap,
    LinewidthMap,
    Spectrum,
    Trajectory,
    OracleReport,
}

impl std::str::FromStr for Product {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "steady" => Product::Steady,
            "power_map" => Product::PowerMap,
            "linewidth_map" => Product::LinewidthMap,
            "spectrum" => Product::Spectrum,
            "trajectory" => Product::Trajectory,
            "oracle_report" => Product::OracleReport,
            other => return Err(Error::Config(format!("unknown product `{other}`"))),
        })
    }
}

/// `points` log-spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogSpec {
    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min > 0.0 && self.min < self.max && self.max.is_finite()) {
            return Err(Error::Config(format!("{name}: need 0 < min < max (got {} and {})", self.min, self.max)));
        }
        if self.points < 2 {
            return Err(Error::Config(format!("{name}: need at least 2 points")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = (self.min.ln(), self.max.ln());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.min,
                i if i == self.points - 1 => self.max,
                i => (lo + (hi - lo) * i as f64 / last).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub w_grid: LogSpec,
    pub n_grid: LogSpec,
}

impl SweepSpec {
    /// Atom numbers rounded to integers.
    pub fn atom_numbers(&self) -> Vec<u64> {
        self.n_grid.values().iter().map(|n| n.round().max(1.0) as u64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: SystemParams,
    pub geometry: Option<CavityGeometry>,
    pub sweep: Option<SweepSpec>,
    pub outputs: Vec<Product>,
    pub output_dir: PathBuf,
    pub worker_count: usize,
    /// Relative tolerance of the trajectory integrator.
    pub integrate_tol: f64,
    /// Rate-scaled derivative threshold of the steady-state detector.
    pub settle_tol: f64,
    pub t_max: f64,
    pub t_end: f64,
    pub method: Method,
    pub record_every: usize,
    pub initial: Option<CumulantState>,
    pub spectrum_points_per_decade: usize,
    pub pulling_deltas: Vec<f64>,
    pub pulling_moments: PullingMoments,
    pub oracle_n_max: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::strontium(1_000_000, 300.0),
            geometry: None,
            sweep: None,
            outputs: vec![Product::Steady],
            output_dir: PathBuf::from("out"),
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            integrate_tol: 1e-8,
            settle_tol: 1e-10,
            t_max: 1e6,
            t_end: 1.0,
            method: Method::Rosenbrock,
            record_every: 1,
            initial: None,
            spectrum_points_per_decade: 50,
            pulling_deltas: Vec::new(),
            pulling_moments: PullingMoments::Detuned,
            oracle_n_max: 1,
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses a TOML document into dotted keys.
pub fn parse_toml(text: &str) -> Result<BTreeMap<String, Value>> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut out = BTreeMap::new();
    flatten("", &table, &mut out);
    Ok(out)
}

/// Parses `key=value`; the value is read as a TOML value, falling back to a
/// bare string.
pub fn parse_override(item: &str) -> Result<(String, Value)> {
    let (key, raw) = item.split_once('=').ok_or_else(|| Error::Config(format!("override `{item}` is not key=value")))?;
    let key = key.trim().to_string();
    Ok((key, parse_scalar(raw.trim())))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("`{key}` must be a number"))),
    }
}

fn as_count(key: &str, v: &Value) -> Result<u64> {
    let f = as_f64(key, v)?;
    if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
        Ok(f as u64)
    } else {
        Err(Error::Config(format!("`{key}` must be a non-negative integer")))
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Config(format!("`{key}` must be a string")))
}

/// Arrays pass through; a string is split on commas; a scalar is a one-element list.
fn as_list(v: &Value) -> Vec<Value> {
    match v {
        Value::Array(a) => a.clone(),
        Value::String(s) => s.split(',').map(|x| parse_scalar(x.trim())).collect(),
        other => vec![other.clone()],
    }
}

fn parse_scalar(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

const KNOWN_KEYS: &[&str] = &[
    "params.n_atoms",
    "params.gamma",
    "params.pump",
    "params.t2_inv",
    "params.kappa",
    "params.rabi",
    "params.detuning",
    "params.omega_a",
    "geometry.mode_volume",
    "geometry.finesse",
    "geometry.cavity_length",
    "geometry.dipole_moment",
    "geometry.wavelength",
    "sweep.w_min",
    "sweep.w_max",
    "sweep.w_points",
    "sweep.n_min",
    "sweep.n_max",
    "sweep.n_points",
    "output.products",
    "output.dir",
    "output.workers",
    "tolerances.integrate",
    "tolerances.settle",
    "tolerances.t_max",
    "dynamics.t_end",
    "dynamics.method",
    "dynamics.record_every",
    "dynamics.initial",
    "spectrum.points_per_decade",
    "spectrum.pulling_deltas",
    "spectrum.pulling_moments",
    "oracle.n_max",
];

impl RunConfig {
    /// Builds a configuration from dotted keys; every unknown key is reported.
    pub fn from_map(map: &BTreeMap<String, Value>) -> Result<Self> {
        let unknown: Vec<String> = map.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())).cloned().collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownKeys(unknown));
        }
        let mut cfg = RunConfig::default();
        let get = |k: &str| map.get(k);
        let num = |k: &str| get(k).map(|v| as_f64(k, v)).transpose();
        let count = |k: &str| get(k).map(|v| as_count(k, v)).transpose();

        let p = &mut cfg.params;
        if let Some(n) = count("params.n_atoms")? {
            p.n_atoms = n;
        }
        for (key, slot) in [
            ("params.gamma", &mut p.gamma),
            ("params.pump", &mut p.pump),
            ("params.t2_inv", &mut p.t2_inv),
            ("params.kappa", &mut p.kappa),
            ("params.rabi", &mut p.rabi),
            ("params.detuning", &mut p.detuning),
            ("params.omega_a", &mut p.omega_a),
        ] {
            if let Some(v) = num(key)? {
                *slot = v;
            }
        }

        if map.keys().any(|k| k.starts_with("geometry.")) {
            if map.contains_key("params.rabi") {
                return Err(Error::Config("give either params.rabi or geometry.*, not both".into()));
            }
            let mut g = CavityGeometry::strontium();
            for (key, slot) in [
                ("geometry.mode_volume", &mut g.mode_volume),
                ("geometry.finesse", &mut g.finesse),
                ("geometry.cavity_length", &mut g.cavity_length),
                ("geometry.dipole_moment", &mut g.dipole_moment),
                ("geometry.wavelength", &mut g.wavelength),
            ] {
                if let Some(v) = num(key)? {
                    *slot = v;
                }
            }
            g.validate()?;
            cfg.params.rabi = rabi_from_geometry(&g);
            if !map.contains_key("params.kappa") {
                cfg.params.kappa = kappa_from_geometry(&g);
            }
            cfg.geometry = Some(g);
        }

        let sweep_keys = ["sweep.w_min", "sweep.w_max", "sweep.w_points", "sweep.n_min", "sweep.n_max", "sweep.n_points"];
        if sweep_keys.iter().any(|k| map.contains_key(*k)) {
            let need = |k: &str| get(k).ok_or_else(|| Error::Config(format!("sweep needs `{k}`")));
            let spec = SweepSpec {
                w_grid: LogSpec {
                    min: as_f64("sweep.w_min", need("sweep.w_min")?)?,
                    max: as_f64("sweep.w_max", need("sweep.w_max")?)?,
                    points: as_count("sweep.w_points", need("sweep.w_points")?)? as usize,
                },
                n_grid: LogSpec {
                    min: as_f64("sweep.n_min", need("sweep.n_min")?)?,
                    max: as_f64("sweep.n_max", need("sweep.n_max")?)?,
                    points: as_count("sweep.n_points", need("sweep.n_points")?)? as usize,
                },
            };
            spec.w_grid.validate("sweep.w")?;
            spec.n_grid.validate("sweep.n")?;
            cfg.sweep = Some(spec);
        }

        if let Some(v) = get("output.products") {
            cfg.outputs = as_list(v)
                .iter()
                .map(|x| as_str("output.products", x)?.parse())
                .collect::<Result<_>>()?;
        }
        if let Some(v) = get("output.dir") {
            cfg.output_dir = PathBuf::from(as_str("output.dir", v)?);
        }
        if let Some(n) = count("output.workers")? {
            if n == 0 {
                return Err(Error::Config("output.workers must be >= 1".into()));
            }
            cfg.worker_count = n as usize;
        }
        if let Some(v) = num("tolerances.integrate")? {
            cfg.integrate_tol = v;
        }
        if let Some(v) = num("tolerances.settle")? {
            cfg.settle_tol = v;
        }
        if let Some(v) = num("tolerances.t_max")? {
            cfg.t_max = v;
        }
        if let Some(v) = num("dynamics.t_end")? {
            cfg.t_end = v;
        }
        if let Some(v) = get("dynamics.method") {
            cfg.method = as_str("dynamics.method", v)?.parse()?;
        }
        if let Some(n) = count("dynamics.record_every")? {
            cfg.record_every = n.max(1) as usize;
        }
        if let Some(v) = get("dynamics.initial") {
            let xs = as_list(v).iter().map(|x| as_f64("dynamics.initial", x)).collect::<Result<Vec<_>>>()?;
            let [inversion, coherence_re, coherence_im, spin_spin, photons] = xs[..] else {
                return Err(Error::Config("dynamics.initial needs five numbers".into()));
            };
            cfg.initial = Some(CumulantState { inversion, coherence_re, coherence_im, spin_spin, photons });
        }
        if let Some(n) = count("spectrum.points_per_decade")? {
            cfg.spectrum_points_per_decade = n.max(1) as usize;
        }
        if let Some(v) = get("spectrum.pulling_deltas") {
            cfg.pulling_deltas =
                as_list(v).iter().map(|x| as_f64("spectrum.pulling_deltas", x)).collect::<Result<_>>()?;
        }
        if let Some(v) = get("spectrum.pulling_moments") {
            cfg.pulling_moments = as_str("spectrum.pulling_moments", v)?.parse().map_err(Error::Config)?;
        }
        if let Some(n) = count("oracle.n_max")? {
            cfg.oracle_n_max = n as usize;
        }

        cfg.params.validate()?;
        let needs_sweep = cfg.outputs.iter().any(|p| matches!(p, Product::PowerMap | Product::LinewidthMap));
        if needs_sweep && cfg.sweep.is_none() {
            return Err(Error::Config("power_map and linewidth_map need a [sweep] section".into()));
        }
        Ok(cfg)
    }

    /// Reads an optional config file and applies `key=value` overrides.
    pub fn load(path: Option<&std::path::Path>, overrides: &[String]) -> Result<Self> {
        let mut map = match path {
            Some(p) => parse_toml(&std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)?,
            None => BTreeMap::new(),
        };
        for item in overrides {
            let (k, v) = parse_override(item)?;
            map.insert(k, v);
        }
        RunConfig::from_map(&map)
    }
}
