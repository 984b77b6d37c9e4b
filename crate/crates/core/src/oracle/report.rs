use std::fmt;

use serde::{Deserialize, Serialize};

use super::hilbert::HilbertSpec;
use super::spectrum::correlation_spectrum;
use super::steady::steady_oracle;
use crate::error::Result;
use crate::params::SystemParams;
use crate::spectrum::linewidth;
use crate::steady::{steady_detuned, steady_exact};

/// Oracle photon numbers below this have no measurable line.
const DARK_PHOTONS: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub quantity: String,
    pub oracle: f64,
    pub cumulant: f64,
    /// `|cumulant - oracle| / |oracle|`; zero when both vanish, absent when
    /// the quantity is undefined.
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub spec: HilbertSpec,
    pub params: SystemParams,
    pub rows: Vec<ReportRow>,
}

fn relative(oracle: f64, cumulant: f64) -> f64 {
    if oracle == cumulant {
        0.0
    } else {
        (cumulant - oracle).abs() / oracle.abs()
    }
}

/// Side-by-side stationary moments and linewidth from the exact solver and
/// the cumulant model.
pub fn cumulant_error_report(spec: &HilbertSpec, params: &SystemParams) -> Result<ErrorReport> {
    let st = steady_oracle(spec, params)?;
    let cumulant = if params.detuning == 0.0 { steady_exact(params)? } else { steady_detuned(params)? };
    let o = st.moments.to_cumulant_state();
    let c = cumulant.state;
    let mut rows = Vec::new();
    let mut push = |name: &str, oracle: f64, cum: f64| {
        rows.push(ReportRow { quantity: name.into(), oracle, cumulant: cum, rel_error: Some(relative(oracle, cum)) });
    };
    push("inversion", o.inversion, c.inversion);
    push("coherence_re", o.coherence_re, c.coherence_re);
    push("coherence_im", o.coherence_im, c.coherence_im);
    if st.spec.n_atoms >= 2 {
        push("spin_spin", o.spin_spin, c.spin_spin);
    }
    push("photons", o.photons, c.photons);
    let model = linewidth(params)?.linewidth_fwhm;
    let exact = if st.moments.photons > DARK_PHOTONS {
        correlation_spectrum(&st.liouvillian, &st.rho)?.fwhm()
    } else {
        None
    };
    rows.push(ReportRow {
        quantity: "linewidth_fwhm_s^-1".into(),
        oracle: exact.unwrap_or(f64::NAN),
        cumulant: model,
        rel_error: exact.map(|e| relative(e, model)),
    });
    Ok(ErrorReport { spec: st.spec, params: *params, rows })
}

impl ErrorReport {
    pub fn row(&self, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,oracle,cumulant,rel_error\n");
        for r in &self.rows {
            let err = r.rel_error.map_or("".to_string(), |e| format!("{e:.6e}"));
            out.push_str(&format!("{},{:.12e},{:.12e},{}\n", r.quantity, r.oracle, r.cumulant, err));
        }
        out
    }
}

impl fmt::Display for ErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N = {}, photon cutoff = {}", self.spec.n_atoms, self.spec.n_max)?;
        writeln!(f, "{:<22} {:>16} {:>16} {:>12}", "quantity", "oracle", "cumulant", "rel. error")?;
        for r in &self.rows {
            let err = r.rel_error.map_or("n/a".to_string(), |e| format!("{e:.3e}"));
            writeln!(f, "{:<22} {:>16.8e} {:>16.8e} {:>12}", r.quantity, r.oracle, r.cumulant, err)?;
        }
        Ok(())
    }
}
