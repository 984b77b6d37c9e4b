use num_complex::Complex64;

use super::hilbert::{CMatrix, HilbertSpec};
use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Generator of `d rho / dt` acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub spec: HilbertSpec,
    pub params: SystemParams,
    pub matrix: Csr,
    /// Names of the terms that were assembled.
    pub terms: Vec<&'static str>,
}

/// Block of the Liouvillian acting on matrix elements `|i><j|` with
/// `excitation(i) - excitation(j) = order`. The generator conserves this
/// difference, so each block evolves independently.
#[derive(Debug, Clone)]
pub struct Sector {
    pub order: i64,
    /// Vectorized indices `i + j dim` in the sector, ascending.
    pub members: Vec<usize>,
    pub block: CMatrix,
}

struct Assembler {
    dim: usize,
    trips: Vec<(usize, usize, Complex64)>,
}

impl Assembler {
    /// Adds `scale * vec(A X B)`, i.e. `scale * (B^T (x) A)`.
    fn sandwich(&mut self, a: &CMatrix, b: &CMatrix, scale: Complex64) {
        let d = self.dim;
        let nz = |m: &CMatrix| -> Vec<(usize, usize, Complex64)> {
            let mut out = Vec::new();
            for c in 0..d {
                for r in 0..d {
                    let v = m[(r, c)];
                    if v != Complex64::new(0.0, 0.0) {
                        out.push((r, c, v));
                    }
                }
            }
            out
        };
        let (an, bn) = (nz(a), nz(b));
        for &(l, j, bv) in &bn {
            for &(i, k, av) in &an {
                self.trips.push((i + j * d, k + l * d, scale * av * bv));
            }
        }
    }

    /// `rate (c X c+ - c+c X / 2 - X c+c / 2)`.
    fn dissipator(&mut self, c: &CMatrix, rate: f64, id: &CMatrix) {
        if rate == 0.0 {
            return;
        }
        let cd = c.adjoint();
        let cdc = &cd * c;
        self.sandwich(c, &cd, Complex64::new(rate, 0.0));
        self.sandwich(&cdc, id, Complex64::new(-0.5 * rate, 0.0));
        self.sandwich(id, &cdc, Complex64::new(-0.5 * rate, 0.0));
    }
}

/// Assembles `-i[H, rho]` with `H = delta a+a + (Omega/2) sum_j (a+ s-_j + a s+_j)`
/// in the frame rotating at the atomic frequency, plus cavity decay, spontaneous
/// decay, repumping and pure dephasing of every atom.
pub fn build_liouvillian(spec: &HilbertSpec, params: &SystemParams) -> Result<Liouvillian> {
    spec.validate()?;
    params.validate()?;
    if spec.n_atoms as u64 != params.n_atoms {
        return Err(Error::Domain {
            name: "n_atoms",
            value: params.n_atoms as f64,
            reason: "must match the oracle Hilbert space",
        });
    }
    let d = spec.dim();
    let id = spec.identity();
    let a = spec.annihilation();
    let mut h = spec.number() * Complex64::new(params.detuning, 0.0);
    for j in 0..spec.n_atoms {
        let coupling = a.adjoint() * spec.sigma_minus(j) + &a * spec.sigma_plus(j);
        h += coupling * Complex64::new(0.5 * params.rabi, 0.0);
    }
    let mut asm = Assembler { dim: d, trips: Vec::new() };
    let mut terms = vec!["hamiltonian"];
    asm.sandwich(&h, &id, Complex64::new(0.0, -1.0));
    asm.sandwich(&id, &h, Complex64::new(0.0, 1.0));
    asm.dissipator(&a, params.kappa, &id);
    terms.push("cavity_decay");
    for j in 0..spec.n_atoms {
        asm.dissipator(&spec.sigma_minus(j), params.gamma, &id);
        asm.dissipator(&spec.sigma_plus(j), params.pump, &id);
        if params.t2_inv > 0.0 {
            let sz = spec.sigma_z(j);
            asm.sandwich(&sz, &sz, Complex64::new(0.5 * params.t2_inv, 0.0));
            asm.sandwich(&id, &id, Complex64::new(-0.5 * params.t2_inv, 0.0));
        }
    }
    terms.push("spontaneous_decay");
    if params.pump > 0.0 {
        terms.push("repump");
    }
    if params.t2_inv > 0.0 {
        terms.push("dephasing");
    }
    Ok(Liouvillian { spec: *spec, params: *params, matrix: Csr::from_triplets(d * d, asm.trips), terms })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn sector(&self, order: i64) -> Sector {
        let d = self.dim();
        let spec = self.spec;
        let members: Vec<usize> = (0..d * d)
            .filter(|&v| spec.excitation(v % d) as i64 - spec.excitation(v / d) as i64 == order)
            .collect();
        let mut position = vec![usize::MAX; d * d];
        for (p, &v) in members.iter().enumerate() {
            position[v] = p;
        }
        let m = members.len();
        let mut block = CMatrix::zeros(m, m);
        for (p, &v) in members.iter().enumerate() {
            for (c, val) in self.matrix.row(v) {
                debug_assert!(position[c] != usize::MAX, "Liouvillian leaks out of sector {order}");
                block[(p, position[c])] = val;
            }
        }
        Sector { order, members, block }
    }
}
