use proptest::prelude::*;

use srlaser::cumulant::scaled_residual;
use srlaser::spectrum::{build_qrt, linewidth};
use srlaser::steady::{output_power, steady_detuned, steady_exact, Branch};
use srlaser::SystemParams;

fn strontium_like() -> impl Strategy<Value = SystemParams> {
    (3.0f64..7.5, -3.0f64..5.0, 0.5f64..2.0).prop_map(|(log_n, log_w, rabi_scale)| {
        SystemParams::strontium(10f64.powf(log_n).round() as u64, 10f64.powf(log_w)).with_rabi(37.0 * rabi_scale)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stationary_and_physical(p in strontium_like()) {
        let r = steady_exact(&p).unwrap();
        let s = r.state;
        prop_assert!(r.stable);
        prop_assert!(r.residual < 1e-6);
        prop_assert!(scaled_residual(&s, &p) < 1e-6);
        prop_assert!((-1.0..=1.0).contains(&s.inversion));
        prop_assert!(s.inversion <= p.d0() + 1e-15);
        prop_assert!(s.photons >= 0.0);
        prop_assert_eq!(r.power, output_power(&p, s.photons));
        prop_assert_eq!(r.collective, r.branch == Branch::Collective);
    }

    #[test]
    fn time_rescaling_leaves_moments_unchanged(p in strontium_like(), alpha in 1e-2f64..1e2) {
        let a = steady_exact(&p).unwrap().state.as_array();
        let b = steady_exact(&p.scaled(alpha)).unwrap().state.as_array();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * x.abs().max(1e-12), "{} vs {}", x, y);
        }
    }

    #[test]
    fn detuning_sign_mirrors_the_line(p in strontium_like(), delta in 1.0f64..1e6) {
        let up = linewidth(&p.with_detuning(delta)).unwrap();
        let down = linewidth(&p.with_detuning(-delta)).unwrap();
        prop_assert!((up.center_offset + down.center_offset).abs() <= 1e-9 * up.center_offset.abs().max(1e-300));
        prop_assert!((up.linewidth_fwhm / down.linewidth_fwhm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn resonant_line_is_centered(p in strontium_like()) {
        let r = steady_detuned(&p).unwrap();
        let s = build_qrt(&p, &r).analyze();
        prop_assert_eq!(s.center_offset, 0.0);
        prop_assert!(s.linewidth_fwhm > 0.0);
    }
}
