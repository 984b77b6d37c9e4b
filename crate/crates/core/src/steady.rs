//! Stationary solutions of the cumulant equations.
//!
//! With zero detuning the four stationary conditions collapse onto a single
//! scalar equation in the inversion `d`. Writing `x = d0 - d`, the inversion
//! balance fixes the coherence `y = (w + gamma) x / (2 Omega)`, and then
//! `photons = N Omega y / kappa`, `spin_spin = Omega d y / Gamma`; what is left
//! is the coherence balance `F(x) = 0`, a quadratic in `x`. The solver scans
//! `F` over the whole physical range `d in [-1, 1]` (the vertex of the parabola
//! and `x = 0` are added as scan nodes so tangent root pairs cannot hide
//! between nodes) and polishes each bracket with Brent's method.
//!
//! The same reduction holds at finite detuning with the coherence damping `A`
//! replaced by `A + delta^2 / A`; [`steady_detuned`] uses it for the spectrum
//! module's frequency-pulling analysis.

use nalgebra::{DMatrix, Matrix4, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::cumulant::{jacobian, scaled_residual, CumulantState};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::rootfind::{bisect, bracket_scan, brent};

/// Number of uniform subdivisions of the inversion range in the root scan.
pub const SCAN_SUBDIVISIONS: usize = 1000;
/// Real parts below this count as decaying.
pub const STABILITY_MARGIN: f64 = 1e-12;
/// Rate-scaled stationarity residual accepted from the root solver.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    BelowThreshold,
    Collective,
    Quenched,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::BelowThreshold => "below_threshold",
            Branch::Collective => "collective",
            Branch::Quenched => "quenched",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyReport {
    pub state: CumulantState,
    #[serde(rename = "power_W")]
    pub power: f64,
    /// The non-lasing state is unstable against growth of collective correlations.
    pub collective: bool,
    pub stable: bool,
    #[serde(rename = "jacobian_eigs_s^-1")]
    pub jacobian_eigs: Vec<Complex64>,
    pub branch: Branch,
    /// More than one stable physical root was found.
    pub multistable: bool,
    /// Growth rate of correlations about the uncorrelated state at inversion d0.
    #[serde(rename = "collective_growth_rate_s^-1")]
    pub growth_rate: f64,
    /// Rate-scaled stationarity residual of the returned state.
    pub residual: f64,
}

/// Stationary root of the reduced equation, expanded to a full state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    /// `d0 - d`; the photon number has the sign of this quantity.
    pub depletion: f64,
    pub state: CumulantState,
}

/// Coefficients `(a, b, c)` of `F(x) = a x^2 + b x + c`.
fn reduced_coefficients(p: &SystemParams) -> (f64, f64, f64) {
    let n = p.n();
    let k = 0.5 * (p.pump + p.gamma);
    let a_coh = 0.5 * (p.gamma_perp() + p.kappa);
    let a_eff = a_coh + p.detuning * p.detuning / a_coh;
    let om2 = p.rabi * p.rabi;
    let pp = (n / p.kappa + (n - 1.0) / p.gamma_perp()) * k;
    let d0 = p.d0();
    (0.5 * om2 * pp, a_eff * k - 0.5 * om2 * pp * d0 + 0.25 * om2, -0.25 * om2 * (d0 + 1.0))
}

/// Residual of the coherence balance as a function of `x = d0 - d`.
fn reduced_residual(p: &SystemParams, x: f64) -> f64 {
    let n = p.n();
    let k = 0.5 * (p.pump + p.gamma);
    let a_coh = 0.5 * (p.gamma_perp() + p.kappa);
    let a_eff = a_coh + p.detuning * p.detuning / a_coh;
    let u = k * x;
    let d = p.d0() - x;
    let om2 = p.rabi * p.rabi;
    a_eff * u - 0.5 * om2 * (n * u * d / p.kappa + 0.5 * (d + 1.0) + (n - 1.0) * d * u / p.gamma_perp())
}

fn expand_root(p: &SystemParams, x: f64) -> CumulantState {
    let d = p.d0() - x;
    if p.rabi == 0.0 {
        return CumulantState::uncorrelated(d);
    }
    let u = 0.5 * (p.pump + p.gamma) * x;
    let y = u / p.rabi;
    let a_coh = 0.5 * (p.gamma_perp() + p.kappa);
    CumulantState {
        inversion: d,
        coherence_re: if p.detuning == 0.0 { 0.0 } else { -p.detuning / a_coh * y },
        coherence_im: y,
        spin_spin: d * u / p.gamma_perp(),
        photons: p.n() * u / p.kappa,
    }
}

/// All stationary points with inversion in [-1, 1], physical or not.
pub fn stationary_roots(params: &SystemParams) -> Vec<Root> {
    let p = params;
    if p.rabi == 0.0 {
        return vec![Root { depletion: 0.0, state: CumulantState::uncorrelated(p.d0()) }];
    }
    let d0 = p.d0();
    let (a, b, _) = reduced_coefficients(p);
    let vertex = -b / (2.0 * a);
    let f = |x: f64| reduced_residual(p, x);
    bracket_scan(f, d0 - 1.0, d0 + 1.0, SCAN_SUBDIVISIONS, &[vertex, 0.0])
        .into_iter()
        .map(|(lo, hi)| {
            let x = if lo == hi { lo } else { brent(f, lo, hi) };
            Root { depletion: x, state: expand_root(p, x) }
        })
        .collect()
}

/// Eigenvalues of the 5x5 Jacobian of the equations of motion at `state`.
pub fn stability(params: &SystemParams, state: &CumulantState) -> Vec<Complex64> {
    balanced_eigenvalues(jacobian(state, params))
}

/// Largest real part of the linearization about the uncorrelated state at
/// inversion d0 (coherence, spin-spin and photon fluctuations). Positive when
/// the collective gain beats the dipole and cavity losses.
pub fn collective_growth_rate(params: &SystemParams) -> f64 {
    let p = params;
    let n = p.n();
    let om = p.rabi;
    let d0 = p.d0();
    let gp = p.gamma_perp();
    let a = 0.5 * (gp + p.kappa);
    // Variables: spin_spin, coherence_re, coherence_im, photons.
    #[rustfmt::skip]
    let m = Matrix4::new(
        -gp, 0.0, om * d0, 0.0,
        0.0, -a, -p.detuning, 0.0,
        0.5 * om * (n - 1.0), p.detuning, -a, 0.5 * om * d0,
        0.0, 0.0, n * om, -p.kappa,
    );
    balanced_eigenvalues(m).iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// `hbar omega_a kappa photons`: every photon leaving the cavity counts as output.
pub fn output_power(params: &SystemParams, photons: f64) -> f64 {
    HBAR * params.omega_a * params.kappa * photons
}

/// Pump rate maximizing the closed-form gain excess `d0 N gamma C - Gamma`.
fn gain_peak_pump(gamma: f64, collective_rate: f64) -> f64 {
    (2.0 * gamma * collective_rate).sqrt() - gamma
}

fn classify(params: &SystemParams, growth: f64) -> Branch {
    if growth > 0.0 {
        Branch::Collective
    } else if params.pump <= params.gamma || params.pump <= gain_peak_pump(params.gamma, params.collective_rate()) {
        Branch::BelowThreshold
    } else {
        Branch::Quenched
    }
}

/// Exact stationary state at zero detuning.
pub fn steady_exact(params: &SystemParams) -> Result<SteadyReport> {
    params.validate()?;
    if params.detuning != 0.0 {
        return Err(Error::NonzeroDetuning(params.detuning));
    }
    solve(params)
}

/// Stationary state at the configured detuning.
pub fn steady_detuned(params: &SystemParams) -> Result<SteadyReport> {
    params.validate()?;
    solve(params)
}

fn solve(params: &SystemParams) -> Result<SteadyReport> {
    let roots = stationary_roots(params);
    let mut candidates: Vec<(CumulantState, Vec<Complex64>, bool)> = Vec::new();
    for root in &roots {
        // Photons >= 0 up to rounding of the depletion.
        if root.depletion < -4.0 * f64::EPSILON {
            continue;
        }
        let mut state = root.state;
        state.photons = state.photons.max(0.0);
        let eigs = stability(params, &state);
        let stable = eigs.iter().all(|z| z.re < STABILITY_MARGIN);
        candidates.push((state, eigs, stable));
    }
    let stable_count = candidates.iter().filter(|c| c.2).count();
    let chosen = candidates
        .iter()
        .filter(|c| c.2)
        .max_by(|a, b| a.0.photons.partial_cmp(&b.0.photons).unwrap())
        .cloned();
    let Some((state, eigs, stable)) = chosen else {
        let diagnostics = roots
            .iter()
            .map(|r| {
                let eigs = stability(params, &r.state);
                let max_re = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
                format!("d = {:.6e}, photons = {:.3e}, max Re(eig) = {:.3e}", r.state.inversion, r.state.photons, max_re)
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::NoStableRoot {
            diagnostics: if diagnostics.is_empty() { "no roots in [-1, 1]".into() } else { diagnostics },
        });
    };
    let residual = scaled_residual(&state, params);
    if !(residual < 1e-6) {
        return Err(Error::NoStableRoot { diagnostics: format!("stationarity residual {residual:e}") });
    }
    let growth = collective_growth_rate(params);
    Ok(SteadyReport {
        power: output_power(params, state.photons),
        state,
        collective: growth > 0.0,
        stable,
        jacobian_eigs: eigs,
        branch: classify(params, growth),
        multistable: stable_count > 1,
        growth_rate: growth,
        residual,
    })
}

/// The nontrivial stationary spin-spin correlation of the bad-cavity limit,
/// `(d0 N gamma C - Gamma)(w + gamma) / (2 N^2 gamma^2 C^2)`.
pub fn spin_spin_closed_form(params: &SystemParams) -> f64 {
    let g = params.collective_rate();
    (params.d0() * g - params.gamma_perp()) * (params.pump + params.gamma) / (2.0 * g * g)
}

/// Closed-form gain excess `d0 N gamma C - Gamma` as a function of pump.
fn gain_excess(gamma: f64, t2_inv: f64, collective_rate: f64, pump: f64) -> f64 {
    (pump - gamma) / (pump + gamma) * collective_rate - (gamma + pump + 2.0 * t2_inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(rename = "w_lower_s^-1")]
    pub w_lower: f64,
    #[serde(rename = "w_upper_s^-1")]
    pub w_upper: f64,
}

/// Zeros in `w` of the closed-form spin-spin correlation for a given
/// collective rate `N C gamma`; `None` when it never turns positive.
pub fn thresholds_for_rate(gamma: f64, t2_inv: f64, collective_rate: f64) -> Option<Thresholds> {
    let g = |w: f64| gain_excess(gamma, t2_inv, collective_rate, w);
    let peak = gain_peak_pump(gamma, collective_rate);
    if !(peak > 0.0) {
        return None;
    }
    let top = g(peak);
    if top < 0.0 {
        return None;
    }
    if top == 0.0 {
        return Some(Thresholds { w_lower: peak, w_upper: peak });
    }
    let mut hi = 2.0 * peak.max(1.0);
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    Some(Thresholds { w_lower: bisect(g, 0.0, peak, 400), w_upper: bisect(g, peak, hi, 400) })
}

/// Lower and upper pump thresholds of the collective region for the atom
/// number and rates in `params` (the pump field is ignored).
pub fn thresholds_empirical(params: &SystemParams) -> Result<Thresholds> {
    params.validate()?;
    thresholds_for_rate(params.gamma, params.t2_inv, params.collective_rate())
        .ok_or(Error::NoCollectiveRegion { n_atoms: params.n(), n_crit: critical_atom_number(params) })
}

/// Atom number at which the two thresholds merge, found by bisection on the
/// existence of a collective region.
pub fn critical_atom_number(params: &SystemParams) -> f64 {
    let per_atom = params.cooperativity() * params.gamma;
    if !(per_atom > 0.0) {
        return f64::INFINITY;
    }
    let has_region = |n: f64| thresholds_for_rate(params.gamma, params.t2_inv, n * per_atom).is_some();
    let mut hi = 1.0;
    while !has_region(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.5 * hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_region(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Eigenvalues after diagonal similarity balancing (radix-2 Parlett-Reinsch).
pub fn balanced_eigenvalues<const D: usize>(mut m: SMatrix<f64, D, D>) -> Vec<Complex64> {
    const RADIX: f64 = 2.0;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..D {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..D {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..D {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    let m = DMatrix::from_column_slice(D, D, m.as_slice());
    let mut eigs: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sr(pump: f64) -> SystemParams {
        SystemParams::strontium(1_000_000, pump)
    }

    fn w_opt() -> f64 {
        0.5 * sr(0.0).collective_rate()
    }

    /// Roots of a x^2 + b x + c by the cancellation-free quadratic formula.
    fn quadratic_roots(a: f64, b: f64, c: f64) -> (f64, f64) {
        let disc = (b * b - 4.0 * a * c).sqrt();
        let q = -0.5 * (b + b.signum() * disc);
        let (r1, r2) = (q / a, c / q);
        (r1.min(r2), r1.max(r2))
    }

    #[test]
    fn roots_match_quadratic_formula() {
        for pump in [1e-3, 0.01, 0.02, 1.0, 300.0, 728.0, 1500.0, 1e5] {
            let p = sr(pump);
            let (a, b, c) = reduced_coefficients(&p);
            // Independent check of the coefficient algebra.
            for x in [-0.7, 0.01, 0.4] {
                let direct = reduced_residual(&p, x);
                assert!((a * x * x + b * x + c - direct).abs() <= 1e-9 * direct.abs().max(1.0));
            }
            let (_, hi) = quadratic_roots(a, b, c);
            let roots = stationary_roots(&p);
            let physical: Vec<_> = roots.iter().filter(|r| r.depletion >= 0.0).collect();
            assert_eq!(physical.len(), 1, "pump {pump}");
            assert_relative_eq!(physical[0].depletion, hi, max_relative = 1e-9);
        }
    }

    #[test]
    fn decoupled_limit() {
        let r = steady_exact(&sr(300.0).with_rabi(0.0)).unwrap();
        assert_eq!(r.state, CumulantState::uncorrelated(sr(300.0).d0()));
        assert_eq!(r.power, 0.0);
        assert!(r.stable);
        assert_eq!(r.branch, Branch::Quenched);
    }

    #[test]
    fn spin_spin_at_optimum_pump() {
        let p = sr(w_opt());
        let closed = spin_spin_closed_form(&p);
        assert!((closed / 0.125 - 1.0).abs() < 0.01, "closed form {closed}");
        let r = steady_exact(&p).unwrap();
        assert!((r.state.spin_spin / 0.125 - 1.0).abs() < 0.05, "exact {}", r.state.spin_spin);
        assert!(r.stable && r.collective);
        assert_eq!(r.branch, Branch::Collective);
        assert!(r.residual < RESIDUAL_TOL);
    }

    #[test]
    fn power_at_optimum_matches_closed_form() {
        let p = sr(w_opt());
        let r = steady_exact(&p).unwrap();
        let p_max = crate::params::derive(&p).p_max;
        assert!((r.power / p_max - 1.0).abs() < 0.10, "{} vs {}", r.power, p_max);
        assert!(r.power > 1e-12);
    }

    #[test]
    fn quenched_far_above_upper_threshold() {
        let p = sr(10.0 * 2.0 * w_opt());
        assert!(spin_spin_closed_form(&p) < 0.0);
        let r = steady_exact(&p).unwrap();
        assert_eq!(r.branch, Branch::Quenched);
        assert!(!r.collective);
        // Only single-atom seeded correlations survive: far below 1/N.
        assert!(r.state.spin_spin.abs() < 1.0 / p.n());
    }

    #[test]
    fn below_threshold_branch() {
        let p = sr(0.005);
        let r = steady_exact(&p).unwrap();
        assert_eq!(r.branch, Branch::BelowThreshold);
        assert!(r.state.spin_spin <= 0.0);
        assert!(r.state.inversion < 0.0);
    }

    #[test]
    fn closed_form_edge_cases() {
        // Exactly at the boundary the numerator vanishes.
        let mut p = sr(1.0);
        let g = p.gamma_perp() / p.d0();
        // Choose rabi so that d0 N gamma C = Gamma.
        p.rabi = (g * p.kappa / p.n()).sqrt();
        assert!(spin_spin_closed_form(&p).abs() < 1e-12);
        assert!(spin_spin_closed_form(&sr(0.009)) < 0.0);
    }

    #[test]
    fn single_atom_steady_state() {
        let p = SystemParams { n_atoms: 1, ..sr(5.0) };
        let r = steady_exact(&p).unwrap();
        assert!(r.stable);
        assert!(r.state.photons > 0.0);
        // The (N-1) term is absent; inversion sits just below d0.
        assert!(r.state.inversion < p.d0() && p.d0() - r.state.inversion < 1e-3);
    }

    #[test]
    fn detuning_rejected() {
        assert!(matches!(steady_exact(&sr(10.0).with_detuning(1.0)), Err(Error::NonzeroDetuning(_))));
        assert!(steady_detuned(&sr(10.0).with_detuning(1.0)).is_ok());
    }

    #[test]
    fn decoupled_jacobian_eigenvalues() {
        let p = SystemParams { rabi: 0.0, ..sr(30.0) };
        let eigs = stability(&p, &CumulantState::uncorrelated(p.d0()));
        let mut got: Vec<f64> = eigs.iter().map(|z| z.re).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let coh = -0.5 * (p.gamma_perp() + p.kappa);
        let mut want = vec![-(p.pump + p.gamma), coh, coh, -p.gamma_perp(), -p.kappa];
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert_relative_eq!(g, w, max_relative = 1e-12);
        }
        assert!(eigs.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn trivial_state_unstable_inside_region() {
        let p = sr(w_opt());
        let eigs = stability(&p, &CumulantState::uncorrelated(p.d0()));
        assert!(eigs.iter().any(|z| z.re > 0.0));
        // The unphysical second root is unstable too.
        let other = stationary_roots(&p).into_iter().find(|r| r.depletion < 0.0).unwrap();
        assert!(stability(&p, &other.state).iter().any(|z| z.re > 0.0));
    }

    #[test]
    fn thresholds_strontium() {
        let t = thresholds_empirical(&sr(0.0)).unwrap();
        assert!((t.w_lower / 0.01 - 1.0).abs() < 0.1, "{t:?}");
        let w_max = sr(0.0).collective_rate();
        assert!((t.w_upper / w_max - 1.0).abs() < 0.1, "{t:?}");
    }

    #[test]
    fn thresholds_merge_at_critical_number() {
        let p = sr(0.0);
        let n_crit = critical_atom_number(&p);
        // (sqrt(2 gamma) + sqrt(2 gamma + 2/T2))^2 = N_crit C gamma.
        let rate = (2.0 * p.gamma).sqrt() + (2.0 * p.gamma + 2.0 * p.t2_inv).sqrt();
        let expected = rate * rate / (p.cooperativity() * p.gamma);
        assert_relative_eq!(n_crit, expected, max_relative = 1e-9);
        let per_atom = p.cooperativity() * p.gamma;
        let t = thresholds_for_rate(p.gamma, p.t2_inv, n_crit * per_atom * (1.0 + 1e-10)).unwrap();
        assert!((t.w_upper - t.w_lower) / t.w_lower < 1e-3);
        assert!(thresholds_for_rate(p.gamma, p.t2_inv, n_crit * per_atom * (1.0 - 1e-6)).is_none());
        let low = p.with_atoms(1000);
        assert!(matches!(thresholds_empirical(&low), Err(Error::NoCollectiveRegion { .. })));
    }

    #[test]
    fn two_distinct_thresholds_at_twice_critical() {
        let p = sr(0.0);
        let n = 2.0 * critical_atom_number(&p);
        let g = n * p.cooperativity() * p.gamma;
        // w^2 + (2 gamma + 2/T2 - G) w + gamma (gamma + 2/T2 + G) = 0.
        let b = 2.0 * p.gamma + 2.0 * p.t2_inv - g;
        let c = p.gamma * (p.gamma + 2.0 * p.t2_inv + g);
        let disc = b * b - 4.0 * c;
        assert!(disc > 0.0);
        let (lo, hi) = quadratic_roots(1.0, b, c);
        let t = thresholds_for_rate(p.gamma, p.t2_inv, g).unwrap();
        assert_relative_eq!(t.w_lower, lo, max_relative = 1e-9);
        assert_relative_eq!(t.w_upper, hi, max_relative = 1e-9);
    }

    #[test]
    fn output_power_zero_photons() {
        assert_eq!(output_power(&sr(1.0), 0.0), 0.0);
    }

    #[test]
    fn scale_covariance() {
        let base = SystemParams { n_atoms: 2, gamma: 1.0, pump: 50.0, t2_inv: 10.0, kappa: 1e4, rabi: 38.0, detuning: 0.0, omega_a: 1.0 };
        let a = steady_exact(&base).unwrap();
        let b = steady_exact(&base.scaled(0.01)).unwrap();
        for (x, y) in a.state.as_array().iter().zip(b.state.as_array()) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }
        assert_relative_eq!(a.growth_rate * 0.01, b.growth_rate, max_relative = 1e-9);
    }
}
