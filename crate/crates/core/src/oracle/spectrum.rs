use num_complex::Complex64;

use super::hilbert::{CMatrix, CVector, DensityMatrix};
use super::liouvillian::Liouvillian;
use super::steady::OracleSteady;
use crate::error::{Error, Result};
use crate::spectrum::log_grid;

/// `S(w) = 2 Re int_0^inf Tr[a+ e^{L t}(a rho)] e^{-i w t} dt`, evaluated as
/// the resolvent `2 Re Tr[a+ (i w - L)^{-1} (a rho)]` in the Schur basis of
/// the coherence-order -1 block.
#[derive(Debug, Clone)]
pub struct OracleSpectrum {
    schur_t: CMatrix,
    left: CVector,
    right: CVector,
    pub photons: f64,
    pub eigenvalues: Vec<Complex64>,
}

pub fn correlation_spectrum(liou: &Liouvillian, rho: &DensityMatrix) -> Result<OracleSpectrum> {
    let spec = liou.spec;
    let d = spec.dim();
    let a = spec.annihilation();
    let seeded = &a * &rho.entries;
    let sector = liou.sector(-1);
    let x = CVector::from_fn(sector.members.len(), |p, _| {
        let v = sector.members[p];
        seeded[(v % d, v / d)]
    });
    // Tr[a+ Y] = sum_ij (a+)_ji Y_ij = sum_ij conj(a_ij) Y_ij.
    let r = CVector::from_fn(sector.members.len(), |p, _| {
        let v = sector.members[p];
        a[(v % d, v / d)].conj()
    });
    let schur = sector
        .block
        .clone()
        .try_schur(1e-15, 100_000)
        .ok_or_else(|| Error::Oracle("Schur decomposition did not converge".into()))?;
    let (q, t) = schur.unpack();
    let left = q.transpose() * r;
    let right = q.adjoint() * x;
    let eigenvalues = t.diagonal().iter().copied().collect();
    Ok(OracleSpectrum { schur_t: t, left, right, photons: rho.expect(&spec.number()).re, eigenvalues })
}

pub fn spectrum_oracle(steady: &OracleSteady, omega_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let s = correlation_spectrum(&steady.liouvillian, &steady.rho)?;
    Ok(s.samples(omega_grid))
}

impl OracleSpectrum {
    pub fn density(&self, omega: f64) -> f64 {
        let m = self.schur_t.nrows();
        let z = Complex64::new(0.0, omega);
        // Back substitution on the upper-triangular (i w - T) y = right.
        let mut y = CVector::zeros(m);
        for i in (0..m).rev() {
            let mut acc = self.right[i];
            for j in i + 1..m {
                acc += self.schur_t[(i, j)] * y[j];
            }
            y[i] = acc / (z - self.schur_t[(i, i)]);
        }
        2.0 * self.left.dot(&y).re
    }

    pub fn samples(&self, omega_grid: &[f64]) -> Vec<(f64, f64)> {
        omega_grid.iter().map(|&w| (w, self.density(w))).collect()
    }

    fn rate_bounds(&self) -> (f64, f64) {
        let rates: Vec<f64> = self.eigenvalues.iter().map(|z| z.re.abs()).filter(|r| *r > 0.0).collect();
        let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (lo, hi)
    }

    /// Grid that resolves every pole, centred at `center`.
    pub fn default_grid(&self, center: f64, per_decade: usize) -> Vec<f64> {
        let (lo, hi) = self.rate_bounds();
        log_grid(center, 1e-3 * lo, 1e3 * hi.max(lo), per_decade)
    }

    /// Location and value of the global maximum.
    pub fn peak(&self) -> (f64, f64) {
        let mut candidates: Vec<f64> = self.eigenvalues.iter().map(|z| z.im).collect();
        candidates.extend(self.default_grid(0.0, 20));
        let best = candidates.iter().copied().map(|w| (w, self.density(w))).max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let (lo, _) = self.rate_bounds();
        let (mut a, mut b) = (best.0 - lo, best.0 + lo);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.density(c) > self.density(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let w = 0.5 * (a + b);
        let v = self.density(w);
        if v >= best.1 {
            (w, v)
        } else {
            best
        }
    }

    /// Full width at half maximum of the highest peak.
    pub fn fwhm(&self) -> Option<f64> {
        let (w0, peak) = self.peak();
        if !(peak > 0.0) {
            return None;
        }
        let half = 0.5 * peak;
        let (lo, hi) = self.rate_bounds();
        let edge = |sign: f64| -> Option<f64> {
            let mut inner = 0.0;
            let mut step = 1e-3 * lo;
            while self.density(w0 + sign * step) >= half {
                inner = step;
                step *= 1.5;
                if step > 1e6 * hi.max(lo) {
                    return None;
                }
            }
            let f = |x: f64| self.density(w0 + sign * x) - half;
            Some(crate::rootfind::bisect(f, inner, step, 200))
        };
        Some(edge(1.0)? + edge(-1.0)?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::hilbert::HilbertSpec;
    use super::super::liouvillian::build_liouvillian;
    use super::super::steady::steady_oracle;
    use super::*;
    use crate::params::SystemParams;
    use crate::spectrum::linewidth;
    use std::f64::consts::PI;

    fn desk(n: u64) -> SystemParams {
        SystemParams { n_atoms: n, gamma: 1.0, pump: 50.0, t2_inv: 10.0, kappa: 1e4, rabi: (0.15f64 * 1e4).sqrt(), detuning: 0.0, omega_a: 1.0 }
    }

    fn trapezoid(samples: &[(f64, f64)]) -> f64 {
        samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
    }

    #[test]
    fn seeded_empty_cavity_line() {
        let spec = HilbertSpec::new(1, 2).unwrap();
        let p = desk(1).with_rabi(0.0);
        let l = build_liouvillian(&spec, &p).unwrap();
        let rho = DensityMatrix::basis_state(spec, spec.index(1, 0));
        let s = correlation_spectrum(&l, &rho).unwrap();
        assert!((s.fwhm().unwrap() / p.kappa - 1.0).abs() < 1e-6);
        let (w0, peak) = s.peak();
        assert!(w0.abs() < 1e-6 * p.kappa);
        // Lorentzian of unit weight: peak 4 / kappa.
        assert!((peak * p.kappa / 4.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detuned_empty_cavity_line_is_shifted() {
        let spec = HilbertSpec::new(1, 1).unwrap();
        let p = desk(1).with_rabi(0.0).with_detuning(3e4);
        let l = build_liouvillian(&spec, &p).unwrap();
        let s = correlation_spectrum(&l, &DensityMatrix::basis_state(spec, spec.index(1, 0))).unwrap();
        let (w0, _) = s.peak();
        assert!((w0 / 3e4 - 1.0).abs() < 1e-6, "{w0}");
    }

    #[test]
    fn sum_rule() {
        let st = steady_oracle(&HilbertSpec::new(2, 1).unwrap(), &desk(2)).unwrap();
        let s = correlation_spectrum(&st.liouvillian, &st.rho).unwrap();
        let integral = trapezoid(&s.samples(&s.default_grid(0.0, 100)));
        assert!((integral / (2.0 * PI * st.moments.photons) - 1.0).abs() < 0.01, "{integral}");
    }

    #[test]
    fn single_atom_linewidth_close_to_regression_model() {
        let p = desk(1);
        let st = steady_oracle(&HilbertSpec::new(1, 1).unwrap(), &p).unwrap();
        let exact = correlation_spectrum(&st.liouvillian, &st.rho).unwrap().fwhm().unwrap();
        let model = linewidth(&p).unwrap().linewidth_fwhm;
        assert!((exact / model - 1.0).abs() < 0.2, "{exact} vs {model}");
    }
}
