use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hilbert::{CMatrix, CVector, DensityMatrix, HilbertSpec, DIM_CAP};
use super::liouvillian::{build_liouvillian, Liouvillian};
use crate::cumulant::CumulantState;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Largest superoperator dimension solved densely on the full space.
pub const FULL_SPACE_CAP: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveSpace {
    /// Only the block of populations and excitation-conserving coherences.
    Sector,
    /// Every matrix element; the phase-breaking components must come out zero.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub space: SolveSpace,
    /// Raise the photon cutoff while the top Fock level holds at least `cutoff_tol`.
    pub auto_raise: bool,
    pub cutoff_tol: f64,
    /// Allowed disagreement between the linear solve and inverse iteration.
    pub agreement_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { space: SolveSpace::Sector, auto_raise: true, cutoff_tol: 1e-8, agreement_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMoments {
    /// `<sz_j>` for each atom.
    pub inversion: Vec<f64>,
    /// `<a+ s-_j>` for each atom.
    pub coherence: Vec<Complex64>,
    /// `<s+_1 s-_2>`, absent for a single atom.
    pub spin_spin: Option<Complex64>,
    pub photons: f64,
    /// `<a>`.
    pub field: Complex64,
    /// `<s-_j>`.
    pub dipoles: Vec<Complex64>,
}

impl OracleMoments {
    /// The moments of atom 1 (and the pair 1, 2) in cumulant-model form.
    pub fn to_cumulant_state(&self) -> CumulantState {
        CumulantState {
            inversion: self.inversion[0],
            coherence_re: self.coherence[0].re,
            coherence_im: self.coherence[0].im,
            spin_spin: self.spin_spin.map_or(0.0, |z| z.re),
            photons: self.photons,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSteady {
    pub rho: DensityMatrix,
    pub moments: OracleMoments,
    /// Hilbert space actually used after any cutoff raise.
    pub spec: HilbertSpec,
    pub liouvillian: Liouvillian,
    /// Two inverse-iteration starts converged to different states.
    pub degenerate: bool,
    /// Largest entry-wise difference between the two null-space methods.
    pub method_discrepancy: f64,
}

pub fn moments(rho: &DensityMatrix) -> OracleMoments {
    let spec = rho.spec;
    let a = spec.annihilation();
    let ad = a.adjoint();
    let atoms = 0..spec.n_atoms;
    OracleMoments {
        inversion: atoms.clone().map(|j| rho.expect(&spec.sigma_z(j)).re).collect(),
        coherence: atoms.clone().map(|j| rho.expect(&(&ad * spec.sigma_minus(j)))).collect(),
        spin_spin: (spec.n_atoms >= 2).then(|| rho.expect(&(spec.sigma_plus(0) * spec.sigma_minus(1)))),
        photons: rho.expect(&spec.number()).re,
        field: rho.expect(&a),
        dipoles: atoms.map(|j| rho.expect(&spec.sigma_minus(j))).collect(),
    }
}

pub fn steady_oracle(spec: &HilbertSpec, params: &SystemParams) -> Result<OracleSteady> {
    steady_oracle_with(spec, params, &OracleOptions::default())
}

pub fn steady_oracle_with(spec: &HilbertSpec, params: &SystemParams, opts: &OracleOptions) -> Result<OracleSteady> {
    let mut spec = *spec;
    loop {
        let l = build_liouvillian(&spec, params)?;
        let solved = solve_null(&l, opts)?;
        if opts.auto_raise && solved.rho.top_fock_population() >= opts.cutoff_tol {
            let next = HilbertSpec { n_max: spec.n_max + 1, ..spec };
            if next.dim() > DIM_CAP {
                return Err(Error::DimensionCap { dim: next.dim(), cap: DIM_CAP });
            }
            spec = next;
            continue;
        }
        return Ok(solved);
    }
}

fn solve_null(l: &Liouvillian, opts: &OracleOptions) -> Result<OracleSteady> {
    let spec = l.spec;
    let d = spec.dim();
    let (members, block) = match opts.space {
        SolveSpace::Sector => {
            let s = l.sector(0);
            (s.members, s.block)
        }
        SolveSpace::Full => {
            if d * d > FULL_SPACE_CAP {
                return Err(Error::DimensionCap { dim: d * d, cap: FULL_SPACE_CAP });
            }
            ((0..d * d).collect(), l.matrix.to_dense())
        }
    };
    let m = members.len();
    let is_diag: Vec<bool> = members.iter().map(|&v| v % d == v / d).collect();
    let trace_of = |x: &CVector| -> Complex64 { (0..m).filter(|&p| is_diag[p]).map(|p| x[p]).sum() };
    let normalized = |x: CVector| -> CVector {
        let t = trace_of(&x);
        x / t
    };

    // Linear solve with the first equation replaced by the trace condition.
    let mut a = block.clone();
    for c in 0..m {
        a[(0, c)] = Complex64::new(if is_diag[c] { 1.0 } else { 0.0 }, 0.0);
    }
    let mut rhs = CVector::zeros(m);
    rhs[0] = Complex64::new(1.0, 0.0);
    let x_lin = a.lu().solve(&rhs).ok_or_else(|| Error::Oracle("singular trace-constrained system".into()))?;
    let x_lin = normalized(x_lin);

    // Shift-invert iteration toward the eigenvalue nearest zero.
    let norm = block.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let shift = 1e-9 * norm * m as f64;
    let shifted_lu = (&block - CMatrix::identity(m, m) * Complex64::new(shift, 0.0)).lu();
    let iterate = |start: CVector| -> Result<CVector> {
        let mut x = start;
        for _ in 0..200 {
            let next = shifted_lu.solve(&x).ok_or_else(|| Error::Oracle("singular shifted Liouvillian".into()))?;
            let next = normalized(next);
            let change = (&next - &x).iter().map(|z| z.norm()).fold(0.0, f64::max);
            x = next;
            if change < 1e-14 {
                break;
            }
        }
        Ok(x)
    };
    let mixed = CVector::from_fn(m, |p, _| Complex64::new(if is_diag[p] { 1.0 } else { 0.0 }, 0.0));
    let ground_pos = members.iter().position(|&v| v == 0).expect("vacuum ground state is in every solve space");
    let mut ground = CVector::zeros(m);
    ground[ground_pos] = Complex64::new(1.0, 0.0);
    let x_a = iterate(mixed)?;
    let x_b = iterate(ground)?;
    let spread = (&x_a - &x_b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let discrepancy = (&x_a - &x_lin).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if discrepancy > opts.agreement_tol {
        return Err(Error::Oracle(format!("null-space methods disagree by {discrepancy:e}")));
    }
    let mut full = CVector::zeros(d * d);
    for (p, &v) in members.iter().enumerate() {
        full[v] = x_lin[p];
    }
    let rho = DensityMatrix::from_vec(spec, &full);
    Ok(OracleSteady {
        moments: moments(&rho),
        rho,
        spec,
        liouvillian: l.clone(),
        degenerate: spread > 1e-6,
        method_discrepancy: discrepancy,
    })
}
