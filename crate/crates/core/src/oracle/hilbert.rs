use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest Hilbert-space dimension the oracle accepts.
pub const DIM_CAP: usize = 64;
pub const MAX_ATOMS: usize = 3;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Product basis `|n> (x) |atoms>`; basis index `n * 2^N + bits`, where bit
/// `j` set means atom `j` is excited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    pub n_atoms: usize,
    pub n_max: usize,
}

impl HilbertSpec {
    pub fn new(n_atoms: usize, n_max: usize) -> Result<Self> {
        let spec = HilbertSpec { n_atoms, n_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_ATOMS).contains(&self.n_atoms) {
            return Err(Error::Domain { name: "n_atoms", value: self.n_atoms as f64, reason: "oracle supports 1 to 3 atoms" });
        }
        if self.n_max < 1 {
            return Err(Error::Domain { name: "n_max", value: self.n_max as f64, reason: "must be >= 1" });
        }
        if self.dim() > DIM_CAP {
            return Err(Error::DimensionCap { dim: self.dim(), cap: DIM_CAP });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) << self.n_atoms
    }

    pub fn photons_of(&self, idx: usize) -> usize {
        idx >> self.n_atoms
    }

    pub fn bits_of(&self, idx: usize) -> usize {
        idx & ((1 << self.n_atoms) - 1)
    }

    /// Photons plus excited atoms.
    pub fn excitation(&self, idx: usize) -> usize {
        self.photons_of(idx) + self.bits_of(idx).count_ones() as usize
    }

    pub fn index(&self, photons: usize, bits: usize) -> usize {
        (photons << self.n_atoms) | bits
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim())
    }

    pub fn annihilation(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            let n = self.photons_of(i);
            if n > 0 {
                m[(self.index(n - 1, self.bits_of(i)), i)] = Complex64::new((n as f64).sqrt(), 0.0);
            }
        }
        m
    }

    pub fn number(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.dim(), |i, _| Complex64::new(self.photons_of(i) as f64, 0.0)))
    }

    pub fn sigma_minus(&self, atom: usize) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            if i & (1 << atom) != 0 {
                m[(i & !(1 << atom), i)] = ONE;
            }
        }
        m
    }

    pub fn sigma_plus(&self, atom: usize) -> CMatrix {
        self.sigma_minus(atom).transpose()
    }

    pub fn sigma_z(&self, atom: usize) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_fn(self.dim(), |i, _| {
            Complex64::new(if i & (1 << atom) != 0 { 1.0 } else { -1.0 }, 0.0)
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub spec: HilbertSpec,
    pub entries: CMatrix,
}

impl DensityMatrix {
    /// `|idx><idx|`.
    pub fn basis_state(spec: HilbertSpec, idx: usize) -> Self {
        let mut entries = CMatrix::zeros(spec.dim(), spec.dim());
        entries[(idx, idx)] = ONE;
        DensityMatrix { spec, entries }
    }

    /// Column-stacked vectorization.
    pub fn to_vec(&self) -> CVector {
        CVector::from_column_slice(self.entries.as_slice())
    }

    pub fn from_vec(spec: HilbertSpec, v: &CVector) -> Self {
        DensityMatrix { spec, entries: CMatrix::from_column_slice(spec.dim(), spec.dim(), v.as_slice()) }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `Tr(op rho)`.
    pub fn expect(&self, op: &CMatrix) -> Complex64 {
        let d = self.spec.dim();
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                sum += op[(j, i)] * self.entries[(i, j)];
            }
        }
        sum
    }

    pub fn hermiticity_error(&self) -> f64 {
        let diff = &self.entries - self.entries.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Population of the highest retained Fock level.
    pub fn top_fock_population(&self) -> f64 {
        let spec = self.spec;
        (0..spec.dim()).filter(|&i| spec.photons_of(i) == spec.n_max).map(|i| self.entries[(i, i)].re).sum()
    }
}
