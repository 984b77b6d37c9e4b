//! Second-order cumulant equations of motion for N identical two-level atoms
//! coupled to one lossy cavity mode, and their time integration.
//!
//! The state is five real numbers: the inversion <sigma^z_1>, the complex
//! atom-field coherence <a^dag sigma^-_1> split into real and imaginary parts,
//! the (real) spin-spin correlation <sigma^+_1 sigma^-_2> and the photon
//! number <a^dag a>. Third-order cumulants are dropped.

use std::io::Write;
use std::ops::ControlFlow;

use nalgebra::{SMatrix, SVector, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Autonomous, Scheme, Stepper};
use crate::params::SystemParams;

pub const COMPONENT_NAMES: [&str; 5] = ["inversion", "coherence_re", "coherence_im", "spin_spin", "photons"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CumulantState {
    pub inversion: f64,
    pub coherence_re: f64,
    pub coherence_im: f64,
    pub spin_spin: f64,
    pub photons: f64,
}

impl CumulantState {
    /// Uncorrelated atoms at the given inversion, empty cavity.
    pub fn uncorrelated(inversion: f64) -> Self {
        CumulantState { inversion, ..Default::default() }
    }

    pub fn coherence(&self) -> Complex64 {
        Complex64::new(self.coherence_re, self.coherence_im)
    }

    pub fn to_vector(&self) -> SVector<f64, 5> {
        SVector::<f64, 5>::new(self.inversion, self.coherence_re, self.coherence_im, self.spin_spin, self.photons)
    }

    pub fn from_vector(v: &SVector<f64, 5>) -> Self {
        CumulantState {
            inversion: v[0],
            coherence_re: v[1],
            coherence_im: v[2],
            spin_spin: v[3],
            photons: v[4],
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.inversion, self.coherence_re, self.coherence_im, self.spin_spin, self.photons]
    }
}

/// Relaxation rate of each component in the uncoupled (Omega = 0) system:
/// w + gamma, (Gamma + kappa)/2 twice, Gamma, kappa.
pub fn relaxation_rates(params: &SystemParams) -> [f64; 5] {
    let coh = 0.5 * (params.gamma_perp() + params.kappa);
    [params.pump + params.gamma, coh, coh, params.gamma_perp(), params.kappa]
}

/// Time derivative of the cumulant state.
pub fn rhs(state: &CumulantState, params: &SystemParams) -> CumulantState {
    let p = params;
    let n = p.n();
    let wg = p.pump + p.gamma;
    let damping = 0.5 * (p.gamma_perp() + p.kappa);
    let d = state.inversion;
    let (cr, ci) = (state.coherence_re, state.coherence_im);
    // Real bracket driving the coherence: <a^dag a><sigma^z> + (<sigma^z> + 1)/2 + (N - 1) <sigma^+_1 sigma^-_2>.
    let drive = state.photons * d + 0.5 * (d + 1.0) + (n - 1.0) * state.spin_spin;
    CumulantState {
        inversion: -wg * (d - p.d0()) - 2.0 * p.rabi * ci,
        coherence_re: -damping * cr - p.detuning * ci,
        coherence_im: -damping * ci + p.detuning * cr + 0.5 * p.rabi * drive,
        spin_spin: -p.gamma_perp() * state.spin_spin + p.rabi * d * ci,
        photons: -p.kappa * state.photons + n * p.rabi * ci,
    }
}

/// Jacobian of [`rhs`] with respect to (inversion, coherence_re,
/// coherence_im, spin_spin, photons).
pub fn jacobian(state: &CumulantState, params: &SystemParams) -> SMatrix<f64, 5, 5> {
    let p = params;
    let n = p.n();
    let om = p.rabi;
    let damping = 0.5 * (p.gamma_perp() + p.kappa);
    let d = state.inversion;
    #[rustfmt::skip]
    let j = SMatrix::<f64, 5, 5>::from_row_slice(&[
        -(p.pump + p.gamma), 0.0, -2.0 * om, 0.0, 0.0,
        0.0, -damping, -p.detuning, 0.0, 0.0,
        0.5 * om * (state.photons + 0.5), p.detuning, -damping, 0.5 * om * (n - 1.0), 0.5 * om * d,
        om * state.coherence_im, 0.0, om * d, -p.gamma_perp(), 0.0,
        0.0, 0.0, n * om, 0.0, -p.kappa,
    ]);
    j
}

struct FullSystem<'a>(&'a SystemParams);

impl Autonomous<5> for FullSystem<'_> {
    fn rhs(&self, y: &SVector<f64, 5>) -> SVector<f64, 5> {
        rhs(&CumulantState::from_vector(y), self.0).to_vector()
    }

    fn jacobian(&self, y: &SVector<f64, 5>) -> SMatrix<f64, 5, 5> {
        jacobian(&CumulantState::from_vector(y), self.0)
    }

    fn component_name(&self, index: usize) -> &'static str {
        COMPONENT_NAMES[index]
    }
}

/// Coherence and photon number slaved to the atomic variables when the
/// cavity is much faster than every atomic rate. Exact at stationary points.
pub fn enslaved_fast(inversion: f64, spin_spin: f64, params: &SystemParams) -> (Complex64, f64) {
    let p = params;
    let n = p.n();
    let a = 0.5 * (p.gamma_perp() + p.kappa);
    let den = a * a + p.detuning * p.detuning;
    // Im c = (Omega/2) B a/den and Re c = -(delta/a) Im c, with
    // B = n d + (d + 1)/2 + (N - 1) s and n = N Omega Im c / kappa.
    let seed = 0.5 * (inversion + 1.0) + (n - 1.0) * spin_spin;
    let gain = 0.5 * p.rabi * a / den;
    let im = gain * seed / (1.0 - gain * n * p.rabi * inversion / p.kappa);
    let re = -p.detuning / a * im;
    (Complex64::new(re, im), n * p.rabi * im / p.kappa)
}

pub fn adiabatic_state(inversion: f64, spin_spin: f64, params: &SystemParams) -> CumulantState {
    let (c, photons) = enslaved_fast(inversion, spin_spin, params);
    CumulantState { inversion, coherence_re: c.re, coherence_im: c.im, spin_spin, photons }
}

struct AdiabaticSystem<'a>(&'a SystemParams);

impl Autonomous<2> for AdiabaticSystem<'_> {
    fn rhs(&self, y: &Vector2<f64>) -> Vector2<f64> {
        let full = adiabatic_state(y[0], y[1], self.0);
        let f = rhs(&full, self.0);
        Vector2::new(f.inversion, f.spin_spin)
    }

    fn jacobian(&self, y: &Vector2<f64>) -> nalgebra::Matrix2<f64> {
        // Central differences; the reduced system is smooth.
        let mut j = nalgebra::Matrix2::zeros();
        for k in 0..2 {
            let h = 1e-7 * y[k].abs().max(1e-7);
            let mut up = *y;
            let mut dn = *y;
            up[k] += h;
            dn[k] -= h;
            j.set_column(k, &((self.rhs(&up) - self.rhs(&dn)) / (2.0 * h)));
        }
        j
    }

    fn component_name(&self, index: usize) -> &'static str {
        ["inversion", "spin_spin"][index]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dormand-Prince 5(4) on the full five-component system.
    /// Stability-limited when kappa dwarfs the atomic rates; step noise then
    /// keeps `settle` thresholds much below 1e-8 out of reach.
    Explicit,
    /// Linearly implicit Rosenbrock 2(3) on the full system.
    Rosenbrock,
    /// Coherence and photons eliminated; (inversion, spin_spin) integrated with the Rosenbrock scheme.
    Adiabatic,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit" => Ok(Method::Explicit),
            "rosenbrock" => Ok(Method::Rosenbrock),
            "adiabatic" => Ok(Method::Adiabatic),
            other => Err(Error::Config(format!("unknown integration method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CumulantState>,
    pub params: SystemParams,
}

impl Trajectory {
    pub fn last(&self) -> (f64, CumulantState) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "time_s,inversion,coherence_re,coherence_im,spin_spin,photons")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                t, s.inversion, s.coherence_re, s.coherence_im, s.spin_spin, s.photons
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub method: Method,
    /// Relative tolerance of the local error control.
    pub tol: f64,
    /// Record only every n-th accepted step (the final point is always kept).
    pub record_every: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { method: Method::Rosenbrock, tol: 1e-8, record_every: 1 }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 1e-14 && tol < 1e-2 {
        Ok(())
    } else {
        Err(Error::Domain { name: "tol", value: tol, reason: "must lie in (1e-14, 1e-2)" })
    }
}

/// Absolute tolerance floor per component: the tolerance times a
/// characteristic magnitude (inversion 1, photons up to N, coherence in between).
fn atol5(params: &SystemParams, tol: f64) -> SVector<f64, 5> {
    let n = params.n();
    SVector::<f64, 5>::new(1.0, n.sqrt(), n.sqrt(), 0.25, n) * (tol * 1e-6)
}

fn atol2(tol: f64) -> SVector<f64, 2> {
    SVector::<f64, 2>::new(1.0, 0.25) * (tol * 1e-6)
}

fn check_adiabatic(params: &SystemParams) -> Result<()> {
    if params.kappa > 100.0 * params.gamma_perp() {
        Ok(())
    } else {
        Err(Error::AdiabaticInvalid { kappa: params.kappa, gamma_perp: params.gamma_perp() })
    }
}

/// Integrates from `initial` over `[0, t_end]` with the default
/// (Rosenbrock) method at relative tolerance `tol`.
pub fn integrate(initial: &CumulantState, params: &SystemParams, t_end: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(initial, params, t_end, &IntegrateOptions { tol, ..Default::default() })
}

pub fn integrate_with(
    initial: &CumulantState,
    params: &SystemParams,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    params.validate()?;
    check_tol(opts.tol)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain { name: "t_end", value: t_end, reason: "must be > 0" });
    }
    let every = opts.record_every.max(1);
    let mut times = vec![0.0];
    let mut states = vec![*initial];
    let mut count = 0usize;
    match opts.method {
        Method::Explicit | Method::Rosenbrock => {
            let scheme = if opts.method == Method::Explicit { Scheme::DormandPrince } else { Scheme::Rosenbrock };
            let mut stepper = Stepper::new(scheme, opts.tol, atol5(params, opts.tol));
            stepper.advance(&FullSystem(params), 0.0, initial.to_vector(), t_end, |t, y| {
                count += 1;
                if count % every == 0 || t == t_end {
                    times.push(t);
                    states.push(CumulantState::from_vector(y));
                }
                ControlFlow::Continue(())
            })?;
        }
        Method::Adiabatic => {
            check_adiabatic(params)?;
            let mut stepper = Stepper::new(Scheme::Rosenbrock, opts.tol, atol2(opts.tol));
            let y0 = Vector2::new(initial.inversion, initial.spin_spin);
            states[0] = adiabatic_state(y0[0], y0[1], params);
            stepper.advance(&AdiabaticSystem(params), 0.0, y0, t_end, |t, y| {
                count += 1;
                if count % every == 0 || t == t_end {
                    times.push(t);
                    states.push(adiabatic_state(y[0], y[1], params));
                }
                ControlFlow::Continue(())
            })?;
        }
    }
    Ok(Trajectory { times, states, params: *params })
}

#[derive(Debug, Clone)]
pub struct SettleOptions {
    pub method: Method,
    /// Threshold on the rate-scaled derivatives.
    pub tol: f64,
    /// Relative tolerance of the integrator.
    pub rtol: f64,
    pub t_max: f64,
    /// Defaults to fully repumped uncorrelated atoms (inversion d0).
    pub initial: Option<CumulantState>,
}

impl Default for SettleOptions {
    fn default() -> Self {
        SettleOptions { method: Method::Rosenbrock, tol: 1e-10, rtol: 1e-8, t_max: 1e6, initial: None }
    }
}

/// Largest rate-scaled derivative `|f_i| / (rate_i (|x_i| + floor))`.
pub fn scaled_residual(state: &CumulantState, params: &SystemParams) -> f64 {
    const FLOOR: f64 = 1e-15;
    let f = rhs(state, params).as_array();
    let x = state.as_array();
    let rates = relaxation_rates(params);
    (0..5)
        .map(|i| f[i].abs() / (rates[i] * (x[i].abs() + FLOOR)))
        .fold(0.0, f64::max)
}

/// Integrates until the rate-scaled derivatives fall below `tol`; returns the
/// final state and the detection time.
pub fn settle(params: &SystemParams, tol: f64) -> Result<(CumulantState, f64)> {
    settle_with(params, &SettleOptions { tol, ..Default::default() })
}

pub fn settle_with(params: &SystemParams, opts: &SettleOptions) -> Result<(CumulantState, f64)> {
    params.validate()?;
    check_tol(opts.rtol)?;
    let initial = opts.initial.unwrap_or_else(|| CumulantState::uncorrelated(params.d0()));
    let mut detected: Option<(f64, CumulantState)> = None;
    let mut last = initial;
    match opts.method {
        Method::Explicit | Method::Rosenbrock => {
            if scaled_residual(&initial, params) <= opts.tol {
                return Ok((initial, 0.0));
            }
            let scheme = if opts.method == Method::Explicit { Scheme::DormandPrince } else { Scheme::Rosenbrock };
            let mut stepper = Stepper::new(scheme, opts.rtol, atol5(params, opts.rtol));
            stepper.advance(&FullSystem(params), 0.0, initial.to_vector(), opts.t_max, |t, y| {
                let s = CumulantState::from_vector(y);
                last = s;
                if scaled_residual(&s, params) <= opts.tol {
                    detected = Some((t, s));
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
        }
        Method::Adiabatic => {
            check_adiabatic(params)?;
            let start = adiabatic_state(initial.inversion, initial.spin_spin, params);
            if scaled_residual(&start, params) <= opts.tol {
                return Ok((start, 0.0));
            }
            let mut stepper = Stepper::new(Scheme::Rosenbrock, opts.rtol, atol2(opts.rtol));
            let y0 = Vector2::new(initial.inversion, initial.spin_spin);
            stepper.advance(&AdiabaticSystem(params), 0.0, y0, opts.t_max, |t, y| {
                let s = adiabatic_state(y[0], y[1], params);
                last = s;
                if scaled_residual(&s, params) <= opts.tol {
                    detected = Some((t, s));
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
        }
    }
    match detected {
        Some((t, s)) => Ok((s, t)),
        None => Err(Error::SettleTimeout { t_max: opts.t_max, last: Box::new(last) }),
    }
}
