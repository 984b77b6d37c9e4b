//! Emission spectrum from the two-time field correlation `g(t) = <a+(t) a(0)>`.
//!
//! Factorizing `<sz(t) a+(t) a(0)>` into `<sz> <a+(t) a(0)>` closes the
//! regression equations on the pair `(g(t), h(t) = <s+(t) a(0)>)`:
//!
//! ```text
//! d/dt [g, h] = [[-kappa/2 + i delta, i N Omega / 2], [-i Omega d / 2, -Gamma / 2]] [g, h]
//! ```
//!
//! starting from the stationary values `g(0) = photons` and
//! `h(0) = conj(<a+ s->)`. The solution is a sum of two exponentials, so the
//! spectrum `S(w) = 2 Re int_0^inf g(t) e^{-i w t} dt` is a sum of two complex
//! Lorentzians whose integral over `w` is `2 pi photons`. The frame rotates
//! at the atomic frequency, so `w` is an offset from `omega_a`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::SystemParams;
use crate::steady::{steady_detuned, steady_exact, SteadyReport};

/// Relative eigenvalue separation below which the regression matrix is
/// treated as defective.
pub const DEFECTIVE_TOL: f64 = 1e-7;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QrtSystem {
    #[serde(rename = "matrix_s^-1")]
    pub matrix: [[Complex64; 2]; 2],
    pub initial: [Complex64; 2],
    pub params: SystemParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    #[serde(rename = "eig_slow_s^-1")]
    pub eig_slow: Complex64,
    #[serde(rename = "eig_fast_s^-1")]
    pub eig_fast: Complex64,
    #[serde(rename = "linewidth_fwhm_s^-1")]
    pub linewidth_fwhm: f64,
    #[serde(rename = "linewidth_Hz")]
    pub linewidth_hz: f64,
    #[serde(rename = "center_offset_s^-1")]
    pub center_offset: f64,
    #[serde(rename = "center_offset_Hz")]
    pub center_offset_hz: f64,
    /// Amplitudes of `e^{eig_slow t}` and `e^{eig_fast t}` in `g(t)`. When
    /// `defective` is set the two eigenvalues coincide and the amplitudes are
    /// the constant and linear coefficients of `(a + b t) e^{eig_slow t}`.
    pub lorentzian_weights: [Complex64; 2],
    pub defective: bool,
    pub photons: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<(f64, f64)>>,
}

impl QrtSystem {
    /// Eigenvalues ordered (slow, fast) by magnitude of the real part.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let m = &self.matrix;
        let half_tr = 0.5 * (m[0][0] + m[1][1]);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let root = (half_tr * half_tr - det).sqrt();
        // Take the larger root by addition and the smaller from the product,
        // which keeps a slow eigenvalue far below the fast one accurate.
        let big = if (half_tr + root).norm() >= (half_tr - root).norm() { half_tr + root } else { half_tr - root };
        let (a, b) = if big == Complex64::new(0.0, 0.0) { (big, big) } else { (big, det / big) };
        if a.re.abs() <= b.re.abs() {
            [a, b]
        } else {
            [b, a]
        }
    }

    /// Decomposes `g(t)` and fills the linewidth and center of the slow pole.
    pub fn analyze(&self) -> SpectrumResult {
        let m = &self.matrix;
        let x0 = &self.initial;
        let [slow, fast] = self.eigenvalues();
        let scale = slow.norm().max(fast.norm());
        let defective = (slow - fast).norm() <= DEFECTIVE_TOL * scale;
        let weights = if defective {
            let lambda = 0.5 * (m[0][0] + m[1][1]);
            // e^{Mt} = e^{lambda t} (1 + (M - lambda) t)
            let linear = (m[0][0] - lambda) * x0[0] + m[0][1] * x0[1];
            [x0[0], linear]
        } else {
            // Spectral projector onto each eigenvalue: (M - other) / (this - other).
            let weight = |this: Complex64, other: Complex64| {
                ((m[0][0] - other) * x0[0] + m[0][1] * x0[1]) / (this - other)
            };
            [weight(slow, fast), weight(fast, slow)]
        };
        let (slow, fast) = if defective {
            let lambda = 0.5 * (m[0][0] + m[1][1]);
            (lambda, lambda)
        } else {
            (slow, fast)
        };
        // Adding +0.0 turns a signed zero into +0.0.
        let center = slow.im + 0.0;
        SpectrumResult {
            eig_slow: slow,
            eig_fast: fast,
            linewidth_fwhm: -2.0 * slow.re,
            linewidth_hz: -slow.re / PI,
            center_offset: center,
            center_offset_hz: center / (2.0 * PI),
            lorentzian_weights: weights,
            defective,
            photons: x0[0].re,
            samples: None,
        }
    }
}

impl SpectrumResult {
    /// `g(t) = <a+(t) a(0)>` for `t >= 0`.
    pub fn correlation(&self, t: f64) -> Complex64 {
        let [w0, w1] = self.lorentzian_weights;
        if self.defective {
            (w0 + w1 * t) * (self.eig_slow * t).exp()
        } else {
            w0 * (self.eig_slow * t).exp() + w1 * (self.eig_fast * t).exp()
        }
    }

    /// Spectral density at offset `omega` from the atomic frequency.
    pub fn density(&self, omega: f64) -> f64 {
        let [w0, w1] = self.lorentzian_weights;
        let z = I * omega;
        let sum = if self.defective {
            let p = z - self.eig_slow;
            w0 / p + w1 / (p * p)
        } else {
            w0 / (z - self.eig_slow) + w1 / (z - self.eig_fast)
        };
        2.0 * sum.re
    }
}

/// Regression system at the given stationary moments.
pub fn build_qrt(params: &SystemParams, steady: &SteadyReport) -> QrtSystem {
    let p = params;
    let s = &steady.state;
    let matrix = [
        [Complex64::new(-0.5 * p.kappa, p.detuning), I * (0.5 * p.n() * p.rabi)],
        [-I * (0.5 * p.rabi * s.inversion), Complex64::new(-0.5 * p.gamma_perp(), 0.0)],
    ];
    QrtSystem { matrix, initial: [Complex64::new(s.photons, 0.0), s.coherence().conj()], params: *p }
}

/// Which stationary moments feed the regression matrix at finite detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PullingMoments {
    /// Stationary state solved at the actual detuning.
    Detuned,
    /// Stationary state of the resonant system, reused at every detuning.
    Resonant,
}

impl std::str::FromStr for PullingMoments {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "detuned" => Ok(PullingMoments::Detuned),
            "resonant" => Ok(PullingMoments::Resonant),
            other => Err(format!("unknown moments `{other}` (expected detuned or resonant)")),
        }
    }
}

/// Spectrum of the stationary laser at the configured detuning.
pub fn linewidth(params: &SystemParams) -> Result<SpectrumResult> {
    linewidth_with(params, PullingMoments::Detuned)
}

pub fn linewidth_with(params: &SystemParams, moments: PullingMoments) -> Result<SpectrumResult> {
    let steady = match moments {
        PullingMoments::Detuned => steady_detuned(params)?,
        PullingMoments::Resonant => steady_exact(&params.with_detuning(0.0))?,
    };
    Ok(build_qrt(params, &steady).analyze())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PullingPoint {
    #[serde(rename = "delta_s^-1")]
    pub delta: f64,
    #[serde(rename = "center_offset_s^-1")]
    pub center_offset: f64,
    #[serde(rename = "linewidth_fwhm_s^-1")]
    pub linewidth_fwhm: f64,
}

pub fn pulling_curve(params: &SystemParams, deltas: &[f64], moments: PullingMoments) -> Result<Vec<PullingPoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let r = linewidth_with(&params.with_detuning(delta), moments)?;
            Ok(PullingPoint { delta, center_offset: r.center_offset, linewidth_fwhm: r.linewidth_fwhm })
        })
        .collect()
}

pub fn spectrum_samples(result: &SpectrumResult, omega_grid: &[f64]) -> Vec<(f64, f64)> {
    omega_grid.iter().map(|&w| (w, result.density(w))).collect()
}

/// Symmetric grid around `center`: zero plus offsets log-spaced from `inner`
/// to `outer` on both sides.
pub fn log_grid(center: f64, inner: f64, outer: f64, per_decade: usize) -> Vec<f64> {
    let decades = (outer / inner).log10().max(0.0);
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let offsets: Vec<f64> = (0..=n).map(|i| inner * (outer / inner).powf(i as f64 / n as f64)).collect();
    let mut grid: Vec<f64> = offsets.iter().rev().map(|o| center - o).collect();
    grid.push(center);
    grid.extend(offsets.iter().map(|o| center + o));
    grid
}

/// Grid resolving both poles of `result`: from a thousandth of the narrow
/// width out to a thousand times the broad one.
pub fn default_grid(result: &SpectrumResult, per_decade: usize) -> Vec<f64> {
    let narrow = result.eig_slow.re.abs().max(f64::MIN_POSITIVE);
    let broad = result.eig_fast.re.abs().max(narrow);
    log_grid(result.center_offset, 1e-3 * narrow, 1e3 * broad, per_decade)
}

/// Full width at half maximum of sampled data, interpolating linearly
/// between samples. `None` if the curve does not drop below half its peak on
/// both sides.
pub fn fwhm_from_samples(samples: &[(f64, f64)]) -> Option<f64> {
    let (peak_idx, &(_, peak)) = samples.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?;
    let half = 0.5 * peak;
    let crossing = |i: usize, j: usize| {
        let (x0, y0) = samples[i];
        let (x1, y1) = samples[j];
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let left = (0..peak_idx).rev().find(|&i| samples[i].1 < half).map(|i| crossing(i, i + 1))?;
    let right = (peak_idx + 1..samples.len()).find(|&i| samples[i].1 < half).map(|i| crossing(i - 1, i))?;
    Some(right - left)
}

pub fn write_csv<W: Write>(mut out: W, result: &SpectrumResult, samples: &[(f64, f64)]) -> std::io::Result<()> {
    writeln!(out, "# linewidth_fwhm_s^-1 = {:.12e}", result.linewidth_fwhm)?;
    writeln!(out, "# linewidth_fwhm_Hz = {:.12e}", result.linewidth_hz)?;
    writeln!(out, "# center_offset_s^-1 = {:.12e}", result.center_offset)?;
    writeln!(out, "# center_offset_Hz = {:.12e}", result.center_offset_hz)?;
    writeln!(out, "omega_offset_s^-1,spectral_density")?;
    for (w, s) in samples {
        writeln!(out, "{w:.12e},{s:.12e}")?;
    }
    Ok(())
}
