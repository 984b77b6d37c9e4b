use num_complex::Complex64;

use super::hilbert::DensityMatrix;
use super::liouvillian::Liouvillian;

/// Classical fourth-order Runge-Kutta on the full vectorized state with a
/// step no larger than the inverse of the generator norm. Returns the state
/// at `samples` equally spaced times ending at `t_end` (the initial state
/// first).
pub fn propagate(liou: &Liouvillian, rho0: &DensityMatrix, t_end: f64, samples: usize) -> Vec<(f64, DensityMatrix)> {
    let samples = samples.max(1);
    let norm = liou.matrix.inf_norm().max(f64::MIN_POSITIVE);
    let interval = t_end / samples as f64;
    let steps = (interval * norm).ceil().max(1.0) as usize;
    let h = interval / steps as f64;
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let l = &liou.matrix;
    let mut x = rho0.to_vec();
    let mut out = vec![(0.0, rho0.clone())];
    for s in 1..=samples {
        for _ in 0..steps {
            let k1 = l.matvec(&x);
            let k2 = l.matvec(&(&x + &k1 * half));
            let k3 = l.matvec(&(&x + &k2 * half));
            let k4 = l.matvec(&(&x + &k3 * full));
            x += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
        out.push((s as f64 * interval, DensityMatrix::from_vec(rho0.spec, &x)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::hilbert::HilbertSpec;
    use super::super::liouvillian::build_liouvillian;
    use super::super::steady::steady_oracle;
    use super::*;
    use crate::params::SystemParams;

    fn desk(n: u64) -> SystemParams {
        SystemParams { n_atoms: n, gamma: 1.0, pump: 50.0, t2_inv: 10.0, kappa: 1e4, rabi: (0.15f64 * 1e4).sqrt(), detuning: 0.0, omega_a: 1.0 }
    }

    #[test]
    fn excited_atom_decays_at_gamma() {
        let spec = HilbertSpec::new(1, 1).unwrap();
        let p = SystemParams { rabi: 0.0, pump: 0.0, ..desk(1) };
        let l = build_liouvillian(&spec, &p).unwrap();
        let rho = DensityMatrix::basis_state(spec, spec.index(0, 1));
        for (t, r) in propagate(&l, &rho, 2.0, 4) {
            let pe = r.entries[(1, 1)].re;
            assert!((pe - (-t).exp()).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn evolution_preserves_trace_and_hermiticity() {
        let spec = HilbertSpec::new(2, 2).unwrap();
        let l = build_liouvillian(&spec, &desk(2)).unwrap();
        let rho = DensityMatrix::basis_state(spec, spec.index(1, 0b11));
        for (_, r) in propagate(&l, &rho, 0.05, 5) {
            assert!((r.trace().re - 1.0).abs() < 1e-10 && r.trace().im.abs() < 1e-10);
            assert!(r.hermiticity_error() < 1e-12);
            assert!(r.min_eigenvalue() > -1e-10);
        }
    }

    #[test]
    fn relaxes_to_oracle_steady_state() {
        let spec = HilbertSpec::new(1, 1).unwrap();
        let p = desk(1);
        let st = steady_oracle(&spec, &p).unwrap();
        let rho = DensityMatrix::basis_state(st.spec, 0);
        let (_, last) = propagate(&st.liouvillian, &rho, 1.0, 1).pop().unwrap();
        let diff = (&last.entries - &st.rho.entries).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
    }
}
