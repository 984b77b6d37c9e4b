//! Adaptive integrators for small autonomous systems.
//!
//! Two schemes share one step-size controller:
//! * Dormand-Prince 5(4), explicit. Its step is bounded by the fastest
//!   decay rate even after the fast modes have died out.
//! * Rosenbrock 2(3) (the Shampine-Reichelt `ode23s` pair), linearly
//!   implicit and L-stable. It needs the Jacobian and takes steps set by
//!   accuracy alone once the fast modes sit on the slow manifold.

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector, SMatrix, SVector};

use crate::error::{Error, Result};

pub trait Autonomous<const D: usize> {
    fn rhs(&self, y: &SVector<f64, D>) -> SVector<f64, D>;

    fn jacobian(&self, y: &SVector<f64, D>) -> SMatrix<f64, D, D>;

    fn component_name(&self, _index: usize) -> &'static str {
        "y"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    DormandPrince,
    Rosenbrock,
}

impl Scheme {
    fn error_exponent(self) -> f64 {
        match self {
            Scheme::DormandPrince => 1.0 / 5.0,
            Scheme::Rosenbrock => 1.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stepper<const D: usize> {
    pub scheme: Scheme,
    pub rtol: f64,
    pub atol: SVector<f64, D>,
    pub max_steps: usize,
    /// Current step size; zero until the first step picks one.
    pub h: f64,
    pub accepted: usize,
    pub rejected: usize,
}

struct Trial<const D: usize> {
    y: SVector<f64, D>,
    err: SVector<f64, D>,
}

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;

// Dormand-Prince tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl<const D: usize> Stepper<D> {
    pub fn new(scheme: Scheme, rtol: f64, atol: SVector<f64, D>) -> Self {
        Stepper {
            scheme,
            rtol,
            atol,
            max_steps: 50_000_000,
            h: 0.0,
            accepted: 0,
            rejected: 0,
        }
    }

    fn scale(&self, y: &SVector<f64, D>, y_new: &SVector<f64, D>) -> SVector<f64, D> {
        SVector::<f64, D>::from_fn(|i, _| {
            self.atol[i] + self.rtol * y[i].abs().max(y_new[i].abs())
        })
    }

    fn initial_step<S: Autonomous<D>>(&self, sys: &S, y: &SVector<f64, D>, span: f64) -> f64 {
        let f = sys.rhs(y);
        let sc = self.scale(y, y);
        let d0 = y.component_div(&sc).norm() / (D as f64).sqrt();
        let d1 = f.component_div(&sc).norm() / (D as f64).sqrt();
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        h.min(span)
    }

    fn trial<S: Autonomous<D>>(&self, sys: &S, y: &SVector<f64, D>, h: f64) -> Trial<D> {
        match self.scheme {
            Scheme::DormandPrince => {
                let k1 = sys.rhs(y);
                let k2 = sys.rhs(&(y + h * A21 * k1));
                let k3 = sys.rhs(&(y + h * (A31 * k1 + A32 * k2)));
                let k4 = sys.rhs(&(y + h * (A41 * k1 + A42 * k2 + A43 * k3)));
                let k5 = sys.rhs(&(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)));
                let k6 = sys.rhs(&(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)));
                let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
                let k7 = sys.rhs(&y_new);
                let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
                Trial { y: y_new, err }
            }
            Scheme::Rosenbrock => {
                let d = 1.0 / (2.0 + std::f64::consts::SQRT_2);
                let e32 = 6.0 + std::f64::consts::SQRT_2;
                let w = SMatrix::<f64, D, D>::identity() - (h * d) * sys.jacobian(y);
                let lu = DMatrix::from_column_slice(D, D, w.as_slice()).lu();
                let solve = |b: SVector<f64, D>| -> SVector<f64, D> {
                    match lu.solve(&DVector::from_column_slice(b.as_slice())) {
                        Some(x) => SVector::from_column_slice(x.as_slice()),
                        None => SVector::from_element(f64::NAN),
                    }
                };
                let f0 = sys.rhs(y);
                let k1 = solve(f0);
                let f1 = sys.rhs(&(y + 0.5 * h * k1));
                let k2 = solve(f1 - k1) + k1;
                let y_new = y + h * k2;
                let f2 = sys.rhs(&y_new);
                let k3 = solve(f2 - e32 * (k2 - f1) - 2.0 * (k1 - f0));
                let err = (h / 6.0) * (k1 - 2.0 * k2 + k3);
                Trial { y: y_new, err }
            }
        }
    }

    /// Integrates from `t0` to `t1`, landing exactly on `t1`.
    ///
    /// `on_step` sees every accepted step and may stop the integration early,
    /// in which case the returned time is the stopping time.
    pub fn advance<S, F>(
        &mut self,
        sys: &S,
        t0: f64,
        y0: SVector<f64, D>,
        t1: f64,
        mut on_step: F,
    ) -> Result<(f64, SVector<f64, D>)>
    where
        S: Autonomous<D>,
        F: FnMut(f64, &SVector<f64, D>) -> ControlFlow<()>,
    {
        let mut t = t0;
        let mut y = y0;
        if t1 <= t0 {
            return Ok((t, y));
        }
        if self.h <= 0.0 {
            self.h = self.initial_step(sys, &y, t1 - t0);
        }
        let mut worst = 0usize;
        loop {
            let remaining = t1 - t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h <= 16.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) || self.accepted + self.rejected >= self.max_steps {
                return Err(Error::Stiffness { t, h, component: sys.component_name(worst) });
            }
            let trial = self.trial(sys, &y, h);
            let sc = self.scale(&y, &trial.y);
            let mut err = 0.0f64;
            for i in 0..D {
                let e = (trial.err[i] / sc[i]).abs();
                if e > err || e.is_nan() {
                    err = if e.is_nan() { f64::INFINITY } else { e };
                    worst = i;
                }
            }
            if err <= 1.0 {
                self.accepted += 1;
                t = if last { t1 } else { t + h };
                y = trial.y;
                let factor = if err == 0.0 {
                    MAX_GROWTH
                } else {
                    (SAFETY * err.powf(-self.scheme.error_exponent())).clamp(MIN_SHRINK, MAX_GROWTH)
                };
                // Keep the controller's step when the last step was clipped to land on t1.
                if !last || h * factor > self.h {
                    self.h = h * factor;
                }
                if on_step(t, &y).is_break() {
                    return Ok((t, y));
                }
                if last {
                    return Ok((t, y));
                }
            } else {
                self.rejected += 1;
                let factor = if err.is_finite() {
                    (SAFETY * err.powf(-self.scheme.error_exponent())).clamp(MIN_SHRINK, 1.0)
                } else {
                    MIN_SHRINK
                };
                self.h = h * factor;
            }
        }
    }
}
