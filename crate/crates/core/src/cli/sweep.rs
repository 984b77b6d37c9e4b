//! (w, N) sweeps producing the power and linewidth maps.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::spectrum::build_qrt;
use crate::steady::{steady_detuned, thresholds_for_rate, Branch, Thresholds};

use super::config::SweepSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellValues {
    pub power: f64,
    pub linewidth_fwhm: f64,
    pub photons: f64,
    pub branch: Branch,
    /// Linear instability of the uncorrelated state.
    pub collective: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub pump: f64,
    pub n_atoms: u64,
    pub outcome: std::result::Result<CellValues, &'static str>,
    /// Closed-form collective interval for this N.
    pub closed_form: Option<Thresholds>,
}

impl SweepCell {
    /// Whether the pump lies strictly inside the closed-form collective interval.
    pub fn collective_closed_form(&self) -> bool {
        self.closed_form.is_some_and(|t| self.pump > t.w_lower && self.pump < t.w_upper)
    }
}

pub fn evaluate_cell(params: &SystemParams) -> Result<CellValues> {
    let report = steady_detuned(params)?;
    let spectrum = build_qrt(params, &report).analyze();
    Ok(CellValues {
        power: report.power,
        linewidth_fwhm: spectrum.linewidth_fwhm,
        photons: report.state.photons,
        branch: report.branch,
        collective: report.collective,
    })
}

/// Evaluates every cell, N-major and w-minor, on `workers` threads. The
/// result order never depends on the thread count.
pub fn run_sweep(base: &SystemParams, spec: &SweepSpec, workers: usize) -> Result<Vec<SweepCell>> {
    let pumps = spec.w_grid.values();
    let atoms = spec.atom_numbers();
    let grid: Vec<(u64, f64)> = atoms.iter().flat_map(|&n| pumps.iter().map(move |&w| (n, w))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let cells = pool.install(|| {
        grid.par_iter()
            .map(|&(n, w)| {
                let p = base.with_atoms(n).with_pump(w);
                SweepCell {
                    pump: w,
                    n_atoms: n,
                    outcome: evaluate_cell(&p).map_err(|e| e.code()),
                    closed_form: thresholds_for_rate(p.gamma, p.t2_inv, p.collective_rate()),
                }
            })
            .collect()
    });
    Ok(cells)
}

fn threshold_fields(cell: &SweepCell) -> (f64, f64) {
    cell.closed_form.map_or((f64::NAN, f64::NAN), |t| (t.w_lower, t.w_upper))
}

fn value_fields(cell: &SweepCell, value: impl Fn(&CellValues) -> f64) -> (String, &'static str, &'static str, u8) {
    match &cell.outcome {
        Ok(v) => (format!("{:.12e}", value(v)), v.branch.as_str(), "", v.collective as u8),
        Err(code) => ("NaN".into(), "", code, 0),
    }
}

pub fn write_power_map<W: Write>(mut out: W, cells: &[SweepCell]) -> std::io::Result<()> {
    writeln!(
        out,
        "pump_s^-1,n_atoms,power_W,branch,error_code,collective,collective_closed_form,w_lower_closed_s^-1,w_upper_closed_s^-1"
    )?;
    for c in cells {
        let (value, branch, code, collective) = value_fields(c, |v| v.power);
        let (lo, hi) = threshold_fields(c);
        writeln!(
            out,
            "{:.12e},{},{value},{branch},{code},{collective},{},{lo:.12e},{hi:.12e}",
            c.pump,
            c.n_atoms,
            c.collective_closed_form() as u8
        )?;
    }
    Ok(())
}

/// Linewidth map; the gamma, 1/T2 and w_max columns mark the reference pump
/// rates for each row.
pub fn write_linewidth_map<W: Write>(mut out: W, cells: &[SweepCell], base: &SystemParams) -> std::io::Result<()> {
    writeln!(
        out,
        "pump_s^-1,n_atoms,linewidth_fwhm_s^-1,branch,error_code,collective,gamma_s^-1,t2_inv_s^-1,w_max_s^-1"
    )?;
    for c in cells {
        let (value, branch, code, collective) = value_fields(c, |v| v.linewidth_fwhm);
        let w_max = base.with_atoms(c.n_atoms).collective_rate();
        writeln!(
            out,
            "{:.12e},{},{value},{branch},{code},{collective},{:.12e},{:.12e},{w_max:.12e}",
            c.pump, c.n_atoms, base.gamma, base.t2_inv
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::LogSpec;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            w_grid: LogSpec { min: 1e-3, max: 1e5, points: 9 },
            n_grid: LogSpec { min: 1e3, max: 1e7, points: 5 },
        }
    }

    #[test]
    fn order_is_n_major() {
        let cells = run_sweep(&SystemParams::strontium(1, 1.0), &small_spec(), 3).unwrap();
        assert_eq!(cells.len(), 45);
        assert_eq!(cells[0].n_atoms, 1000);
        assert_eq!(cells[8].n_atoms, 1000);
        assert_eq!(cells[9].n_atoms, 10_000);
        assert!(cells[..9].windows(2).all(|w| w[0].pump < w[1].pump));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let base = SystemParams::strontium(1, 1.0);
        let render = |workers| {
            let cells = run_sweep(&base, &small_spec(), workers).unwrap();
            let mut buf = Vec::new();
            write_power_map(&mut buf, &cells).unwrap();
            write_linewidth_map(&mut buf, &cells, &base).unwrap();
            buf
        };
        assert_eq!(render(1), render(4));
    }

    #[test]
    fn failed_cells_stay_in_band() {
        let cell = SweepCell { pump: 1.0, n_atoms: 10, outcome: Err("NO_ROOT"), closed_form: None };
        let mut buf = Vec::new();
        write_power_map(&mut buf, &[cell]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert_eq!(row.split(',').nth(4), Some("NO_ROOT"));
        assert_eq!(row.split(',').nth(2), Some("NaN"));
    }

    #[test]
    fn zero_coupling_gives_zero_power() {
        let p = SystemParams::strontium(1_000_000, 300.0).with_rabi(0.0);
        let v = evaluate_cell(&p).unwrap();
        assert_eq!(v.power, 0.0);
        assert!(!v.collective);
    }
}
