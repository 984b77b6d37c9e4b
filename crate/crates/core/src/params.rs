//! Physical parameters of the atom-cavity system and the closed-form
//! predictors built from them.
//!
//! Every rate is an angular rate in s^-1. Conversion to Hz happens only when
//! results are reported, and such fields carry a `_hz` suffix.

use serde::{Deserialize, Serialize};

use crate::constants::{
    angular_frequency, BOHR_RADIUS, ELEMENTARY_CHARGE, EPSILON_0, HBAR, SPEED_OF_LIGHT,
    SR_CLOCK_WAVELENGTH,
};
use crate::error::{Error, Result};

/// Rates and couplings of the N-atom single-mode laser model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_atoms: u64,
    /// Spontaneous decay rate of the lasing transition.
    pub gamma: f64,
    /// Effective incoherent repump rate `w`.
    pub pump: f64,
    /// Inhomogeneous dipole dephasing rate 1/T2.
    pub t2_inv: f64,
    /// Cavity energy decay rate (linewidth).
    pub kappa: f64,
    /// Single-atom vacuum Rabi frequency.
    pub rabi: f64,
    /// Cavity minus atomic angular frequency.
    pub detuning: f64,
    /// Atomic transition angular frequency.
    pub omega_a: f64,
}

impl SystemParams {
    /// The 87Sr lattice example: gamma = 0.01, 1/T2 = 1, Omega = 37 and
    /// kappa = 9.4e5 (all s^-1), on resonance.
    pub fn strontium(n_atoms: u64, pump: f64) -> Self {
        SystemParams {
            n_atoms,
            gamma: 0.01,
            pump,
            t2_inv: 1.0,
            kappa: 9.4e5,
            rabi: 37.0,
            detuning: 0.0,
            omega_a: angular_frequency(SR_CLOCK_WAVELENGTH),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, value: f64, ok: bool, reason: &'static str| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain { name, value, reason })
            }
        };
        check("n_atoms", self.n_atoms as f64, self.n_atoms >= 1, "must be >= 1")?;
        check("gamma", self.gamma, self.gamma > 0.0, "must be > 0")?;
        check("pump", self.pump, self.pump >= 0.0, "must be >= 0")?;
        check("t2_inv", self.t2_inv, self.t2_inv >= 0.0, "must be >= 0")?;
        check("kappa", self.kappa, self.kappa > 0.0, "must be > 0")?;
        check("rabi", self.rabi, self.rabi >= 0.0, "must be >= 0")?;
        check("detuning", self.detuning, true, "must be finite")?;
        check("omega_a", self.omega_a, self.omega_a > 0.0, "must be > 0")?;
        Ok(())
    }

    pub fn n(&self) -> f64 {
        self.n_atoms as f64
    }

    pub fn with_pump(mut self, pump: f64) -> Self {
        self.pump = pump;
        self
    }

    pub fn with_atoms(mut self, n_atoms: u64) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    /// Multiplies every rate (and the detuning) by `alpha`. The moment
    /// equations are covariant under this map: stationary moments are
    /// unchanged and all time scales shrink by `alpha`.
    pub fn scaled(mut self, alpha: f64) -> Self {
        self.gamma *= alpha;
        self.pump *= alpha;
        self.t2_inv *= alpha;
        self.kappa *= alpha;
        self.rabi *= alpha;
        self.detuning *= alpha;
        self
    }

    /// Saturated inversion d0 = (w - gamma) / (w + gamma).
    pub fn d0(&self) -> f64 {
        (self.pump - self.gamma) / (self.pump + self.gamma)
    }

    /// Total dipole relaxation rate Gamma = gamma + w + 2/T2.
    pub fn gamma_perp(&self) -> f64 {
        self.gamma + self.pump + 2.0 * self.t2_inv
    }

    /// Omega^2 / (kappa gamma), without input checks.
    pub fn cooperativity(&self) -> f64 {
        self.rabi * self.rabi / (self.kappa * self.gamma)
    }

    /// Collective gain scale N C gamma.
    pub fn collective_rate(&self) -> f64 {
        self.n() * self.cooperativity() * self.gamma
    }

    /// Which atomic rates are not small compared to kappa. Empty in the
    /// bad-cavity regime; never rejected.
    pub fn regime_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.gamma >= self.kappa {
            out.push("gamma");
        }
        if self.pump >= self.kappa {
            out.push("pump");
        }
        if self.t2_inv >= self.kappa {
            out.push("t2_inv");
        }
        out
    }

    pub fn is_bad_cavity(&self) -> bool {
        self.regime_violations().is_empty()
    }
}

/// Cavity and transition data from which the vacuum Rabi frequency and the
/// cavity linewidth follow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Effective mode volume, m^3.
    pub mode_volume: f64,
    pub finesse: f64,
    /// Mirror separation, m.
    pub cavity_length: f64,
    /// Transition dipole matrix element, C m.
    pub dipole_moment: f64,
    /// Cavity wavelength, m.
    pub wavelength: f64,
}

impl CavityGeometry {
    /// 1 mm long cavity with a 50 um waist, finesse 1e6, and a dipole of
    /// 1e-5 e a0 at 698 nm.
    pub fn strontium() -> Self {
        let length = 1.0e-3;
        let waist = 50.0e-6;
        CavityGeometry {
            mode_volume: length * std::f64::consts::PI * waist * waist,
            finesse: 1.0e6,
            cavity_length: length,
            dipole_moment: 1.0e-5 * ELEMENTARY_CHARGE * BOHR_RADIUS,
            wavelength: SR_CLOCK_WAVELENGTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mode_volume", self.mode_volume),
            ("finesse", self.finesse),
            ("cavity_length", self.cavity_length),
            ("dipole_moment", self.dipole_moment),
            ("wavelength", self.wavelength),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain { name, value, reason: "must be > 0" });
            }
        }
        Ok(())
    }
}

/// Closed-form quantities derived from a [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub cooperativity: f64,
    pub d0: f64,
    #[serde(rename = "gamma_perp_s^-1")]
    pub gamma_perp: f64,
    #[serde(rename = "w_max_s^-1")]
    pub w_max: f64,
    #[serde(rename = "w_opt_s^-1")]
    pub w_opt: f64,
    pub n_crit: f64,
    #[serde(rename = "p_max_W")]
    pub p_max: f64,
    #[serde(rename = "linewidth_floor_s^-1")]
    pub linewidth_floor: f64,
    pub bad_cavity: bool,
}

/// Cooperativity C = Omega^2 / (kappa gamma).
pub fn cooperativity(rabi: f64, kappa: f64, gamma: f64) -> Result<f64> {
    for (name, value) in [("rabi", rabi), ("kappa", kappa), ("gamma", gamma)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { name, value, reason: "must be > 0" });
        }
    }
    Ok(rabi * rabi / (kappa * gamma))
}

/// Vacuum Rabi frequency `d * sqrt(omega_c / (2 hbar eps0 V))`.
///
/// The bare field-per-photon expression `sqrt(hbar omega / (2 eps0 V)) / hbar`
/// is not a rate; the dipole matrix element supplies the missing factor.
pub fn rabi_from_geometry(geom: &CavityGeometry) -> f64 {
    let omega_c = angular_frequency(geom.wavelength);
    geom.dipole_moment * (omega_c / (2.0 * HBAR * EPSILON_0 * geom.mode_volume)).sqrt()
}

/// Cavity energy decay rate `pi c / (L F)` of a Fabry-Perot resonator.
pub fn kappa_from_geometry(geom: &CavityGeometry) -> f64 {
    std::f64::consts::PI * SPEED_OF_LIGHT / (geom.cavity_length * geom.finesse)
}

pub fn derive(params: &SystemParams) -> DerivedParams {
    let c = params.cooperativity();
    let n = params.n();
    let w_max = n * c * params.gamma;
    DerivedParams {
        cooperativity: c,
        d0: params.d0(),
        gamma_perp: params.gamma_perp(),
        w_max,
        w_opt: 0.5 * w_max,
        n_crit: 2.0 * params.t2_inv / (c * params.gamma),
        p_max: HBAR * params.omega_a * n * n * c * params.gamma / 8.0,
        linewidth_floor: c * params.gamma,
        bad_cavity: params.is_bad_cavity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn strontium_cooperativity() {
        let c = cooperativity(37.0, 9.4e5, 0.01).unwrap();
        assert_relative_eq!(c, 37.0 * 37.0 / 9.4e3, max_relative = 1e-15);
        assert!((c - 0.1456).abs() < 5e-4);
    }

    #[test]
    fn cooperativity_rejects_zero() {
        assert!(matches!(
            cooperativity(0.0, 1.0, 1.0),
            Err(Error::Domain { name: "rabi", .. })
        ));
        assert!(cooperativity(1.0, -1.0, 1.0).is_err());
        assert_eq!(cooperativity(1.0, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rabi_from_strontium_geometry() {
        let geom = CavityGeometry::strontium();
        assert_relative_eq!(geom.mode_volume, 7.853_981_6e-12, max_relative = 1e-7);
        assert_relative_eq!(geom.dipole_moment, 8.478_4e-35, max_relative = 1e-4);
        // d sqrt(omega / (2 hbar eps0 V)) with omega = 2 pi c / 698 nm.
        let omega = 2.0 * std::f64::consts::PI * 299_792_458.0 / 698e-9;
        let expected = 8.478_353_6e-35 * (omega / (2.0 * 1.054_571_817e-34 * 8.854_187_812_8e-12 * 7.853_981_634e-12)).sqrt();
        let rabi = rabi_from_geometry(&geom);
        assert_relative_eq!(rabi, expected, max_relative = 1e-6);
        assert!((rabi / 37.0 - 1.0).abs() < 0.05, "rabi = {rabi}");
        assert_relative_eq!(kappa_from_geometry(&geom), 9.42e5, max_relative = 1e-3);
    }

    #[test]
    fn rabi_geometry_scaling() {
        let geom = CavityGeometry::strontium();
        let base = rabi_from_geometry(&geom);
        let bigger = CavityGeometry { mode_volume: 2.0 * geom.mode_volume, ..geom };
        assert_relative_eq!(rabi_from_geometry(&bigger), base / 2f64.sqrt(), max_relative = 1e-14);
        let stronger = CavityGeometry { dipole_moment: 2.0 * geom.dipole_moment, ..geom };
        assert_relative_eq!(rabi_from_geometry(&stronger), 2.0 * base, max_relative = 1e-14);
    }

    #[test]
    fn derived_strontium_values() {
        let p = SystemParams::strontium(1_000_000, 100.0);
        let d = derive(&p);
        let c = 37.0 * 37.0 / 9.4e3;
        assert_relative_eq!(d.w_max, 1e6 * c * 0.01, max_relative = 1e-14);
        assert!((d.w_max - 1.456e3).abs() < 2.0);
        assert!((d.n_crit - 1.373e3).abs() < 1.0);
        assert_relative_eq!(d.linewidth_floor, c * 0.01, max_relative = 1e-14);
        assert_eq!(d.w_opt, d.w_max / 2.0);
        assert_relative_eq!(d.gamma_perp, 0.01 + 100.0 + 2.0, max_relative = 1e-15);
        assert!(d.bad_cavity);
        // hbar omega_a N^2 C gamma / 8, about 5e-11 W.
        assert!(d.p_max > 4e-11 && d.p_max < 6e-11, "p_max = {}", d.p_max);
    }

    #[test]
    fn d0_zero_at_pump_equal_gamma() {
        let p = SystemParams::strontium(10, 0.01);
        assert_eq!(p.d0(), 0.0);
    }

    #[test]
    fn validation_and_regime_flag() {
        let mut p = SystemParams::strontium(10, 1.0);
        assert!(p.validate().is_ok());
        p.pump = 2e6;
        assert!(p.validate().is_ok());
        assert_eq!(p.regime_violations(), vec!["pump"]);
        p.n_atoms = 0;
        assert!(p.validate().is_err());
        let q = SystemParams { gamma: f64::NAN, ..SystemParams::strontium(1, 1.0) };
        assert!(q.validate().is_err());
        let bad = CavityGeometry { finesse: 0.0, ..CavityGeometry::strontium() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn d0_monotone_on_log_grid() {
        let mut prev = -1.0;
        for k in 0..=120 {
            let w = 10f64.powf(-6.0 + 0.1 * k as f64);
            let d0 = SystemParams::strontium(1, w).d0();
            assert!(d0 > prev);
            prev = d0;
        }
        assert!(1.0 - prev < 1e-7);
    }

    #[test]
    fn p_max_scales_as_n_squared() {
        let a = derive(&SystemParams::strontium(1000, 1.0)).p_max;
        let b = derive(&SystemParams::strontium(2000, 1.0)).p_max;
        assert_relative_eq!(b / a, 4.0, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn cooperativity_invariant_under_cavity_scaling(
            rabi in 1e-3f64..1e3,
            kappa in 1e-2f64..1e8,
            gamma in 1e-4f64..1e2,
        ) {
            let c = cooperativity(rabi, kappa, gamma).unwrap();
            for alpha in [0.1f64, 10.0] {
                let c2 = cooperativity(alpha.sqrt() * rabi, alpha * kappa, gamma).unwrap();
                prop_assert!((c2 / c - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn d0_in_range(gamma in 1e-6f64..1e3, pump in 0.0f64..1e6) {
            let p = SystemParams { gamma, pump, ..SystemParams::strontium(1, 0.0) };
            prop_assert!(p.d0() >= -1.0 && p.d0() < 1.0);
        }
    }
}
