//! Command runners shared by the `srlaser` binary and the tests. Each runner
//! writes its artifacts into the configured output directory and returns
//! their paths.

pub mod config;
pub mod sweep;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cumulant::{integrate_with, CumulantState, IntegrateOptions};
use crate::error::{Error, Result};
use crate::oracle::{cumulant_error_report, HilbertSpec};
use crate::params::{derive, DerivedParams, SystemParams};
use crate::spectrum::{build_qrt, default_grid, pulling_curve, spectrum_samples, write_csv};
use crate::steady::{critical_atom_number, steady_detuned, Thresholds, SteadyReport};

pub use config::{LogSpec, Product, RunConfig, SweepSpec};
pub use sweep::{run_sweep, write_linewidth_map, write_power_map, SweepCell};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Steady,
    Dynamics,
    Spectrum,
    Sweep,
    Oracle,
    Thresholds,
    /// Every product listed in the config.
    Run,
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok((path, BufWriter::new(file)))
}

fn finish(path: PathBuf, mut out: BufWriter<File>) -> Result<PathBuf> {
    out.flush()?;
    Ok(path)
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let (path, mut out) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    finish(path, out)
}

#[derive(Serialize)]
struct SteadyDocument<'a> {
    params: &'a SystemParams,
    derived: DerivedParams,
    steady: SteadyReport,
}

pub fn run_steady(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let steady = steady_detuned(&cfg.params)?;
    let doc = SteadyDocument { params: &cfg.params, derived: derive(&cfg.params), steady };
    Ok(vec![write_json(&cfg.output_dir, "steady.json", &doc)?])
}

pub fn run_dynamics(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let initial = cfg.initial.unwrap_or_else(|| CumulantState::uncorrelated(cfg.params.d0()));
    let opts = IntegrateOptions { method: cfg.method, tol: cfg.integrate_tol, record_every: cfg.record_every };
    let traj = integrate_with(&initial, &cfg.params, cfg.t_end, &opts)?;
    let (path, mut out) = create(&cfg.output_dir, "trajectory.csv")?;
    traj.write_csv(&mut out)?;
    Ok(vec![finish(path, out)?])
}

pub fn run_spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let steady = steady_detuned(&cfg.params)?;
    let result = build_qrt(&cfg.params, &steady).analyze();
    let samples = spectrum_samples(&result, &default_grid(&result, cfg.spectrum_points_per_decade));
    let (path, mut out) = create(&cfg.output_dir, "spectrum.csv")?;
    write_csv(&mut out, &result, &samples)?;
    let mut paths = vec![finish(path, out)?];
    if !cfg.pulling_deltas.is_empty() {
        let curve = pulling_curve(&cfg.params, &cfg.pulling_deltas, cfg.pulling_moments)?;
        let (path, mut out) = create(&cfg.output_dir, "pulling.csv")?;
        writeln!(out, "detuning_s^-1,center_offset_s^-1,linewidth_fwhm_s^-1")?;
        for p in curve {
            writeln!(out, "{:.12e},{:.12e},{:.12e}", p.delta, p.center_offset, p.linewidth_fwhm)?;
        }
        paths.push(finish(path, out)?);
    }
    Ok(paths)
}

/// Writes the maps requested in `outputs`, or both when neither is listed.
pub fn run_sweep_command(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let spec = cfg.sweep.ok_or_else(|| Error::Config("sweep needs a [sweep] section".into()))?;
    let mut power = cfg.outputs.contains(&Product::PowerMap);
    let mut width = cfg.outputs.contains(&Product::LinewidthMap);
    if !power && !width {
        power = true;
        width = true;
    }
    let cells = run_sweep(&cfg.params, &spec, cfg.worker_count)?;
    let mut paths = Vec::new();
    if power {
        let (path, mut out) = create(&cfg.output_dir, "power_map.csv")?;
        write_power_map(&mut out, &cells)?;
        paths.push(finish(path, out)?);
    }
    if width {
        let (path, mut out) = create(&cfg.output_dir, "linewidth_map.csv")?;
        write_linewidth_map(&mut out, &cells, &cfg.params)?;
        paths.push(finish(path, out)?);
    }
    Ok(paths)
}

pub fn run_oracle(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let n = usize::try_from(cfg.params.n_atoms).map_err(|_| Error::Config("n_atoms too large for the oracle".into()))?;
    let spec = HilbertSpec::new(n, cfg.oracle_n_max)?;
    let report = cumulant_error_report(&spec, &cfg.params)?;
    let (csv_path, mut csv) = create(&cfg.output_dir, "oracle_report.csv")?;
    csv.write_all(report.to_csv().as_bytes())?;
    let (txt_path, mut txt) = create(&cfg.output_dir, "oracle_report.txt")?;
    write!(txt, "{report}")?;
    Ok(vec![finish(csv_path, csv)?, finish(txt_path, txt)?])
}

#[derive(Serialize)]
struct ThresholdDocument {
    params: SystemParams,
    thresholds: Option<Thresholds>,
    error_code: Option<&'static str>,
    n_crit: f64,
    n_crit_closed_form: f64,
    #[serde(rename = "w_max_s^-1")]
    w_max: f64,
}

pub fn run_thresholds(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = &cfg.params;
    let found = crate::steady::thresholds_empirical(p);
    let derived = derive(p);
    let doc = ThresholdDocument {
        params: *p,
        error_code: found.as_ref().err().map(Error::code),
        thresholds: found.ok(),
        n_crit: critical_atom_number(p),
        n_crit_closed_form: derived.n_crit,
        w_max: derived.w_max,
    };
    Ok(vec![write_json(&cfg.output_dir, "thresholds.json", &doc)?])
}

pub fn run_products(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    let mut swept = false;
    for product in &cfg.outputs {
        match product {
            Product::Steady => paths.extend(run_steady(cfg)?),
            Product::Trajectory => paths.extend(run_dynamics(cfg)?),
            Product::Spectrum => paths.extend(run_spectrum(cfg)?),
            Product::OracleReport => paths.extend(run_oracle(cfg)?),
            Product::PowerMap | Product::LinewidthMap if !swept => {
                swept = true;
                paths.extend(run_sweep_command(cfg)?);
            }
            Product::PowerMap | Product::LinewidthMap => {}
        }
    }
    Ok(paths)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    match command {
        Command::Steady => run_steady(cfg),
        Command::Dynamics => run_dynamics(cfg),
        Command::Spectrum => run_spectrum(cfg),
        Command::Sweep => run_sweep_command(cfg),
        Command::Oracle => run_oracle(cfg),
        Command::Thresholds => run_thresholds(cfg),
        Command::Run => run_products(cfg),
    }
}
