use srlaser::cumulant::{integrate_with, settle, settle_with, IntegrateOptions, Method, SettleOptions};
use srlaser::steady::steady_exact;
use srlaser::{CumulantState, SystemParams};

fn max_rel(a: &CumulantState, b: &CumulantState) -> f64 {
    a.as_array()
        .iter()
        .zip(b.as_array())
        .map(|(x, y)| if *x == y { 0.0 } else { (x - y).abs() / y.abs().max(1e-300) })
        .fold(0.0, f64::max)
}

fn run(p: &SystemParams, method: Method, tol: f64, t_end: f64) -> CumulantState {
    let opts = IntegrateOptions { method, tol, record_every: usize::MAX };
    integrate_with(&CumulantState::uncorrelated(p.d0()), p, t_end, &opts).unwrap().last().1
}

#[test]
fn tighter_tolerance_converges() {
    let p = SystemParams::strontium(100_000, 100.0);
    let reference = run(&p, Method::Explicit, 1e-12, 0.05);
    for method in [Method::Explicit, Method::Rosenbrock] {
        let loose = max_rel(&run(&p, method, 1e-5, 0.05), &reference);
        let tight = max_rel(&run(&p, method, 1e-8, 0.05), &reference);
        assert!(tight < loose, "{method:?}: {tight:e} !< {loose:e}");
        assert!(tight < 1e-4, "{method:?}: {tight:e}");
    }
}

#[test]
fn methods_agree_on_transient() {
    let p = SystemParams::strontium(1_000_000, 300.0);
    let a = run(&p, Method::Explicit, 1e-10, 0.5);
    let b = run(&p, Method::Rosenbrock, 1e-10, 0.5);
    assert!(max_rel(&a, &b) < 1e-5, "{:e}", max_rel(&a, &b));
    // Adiabatic elimination differs by O(Gamma / kappa).
    let c = run(&p, Method::Adiabatic, 1e-10, 0.5);
    assert!((c.photons / a.photons - 1.0).abs() < 1e-3);
}

#[test]
fn explicit_and_adiabatic_steady_states_agree() {
    for (n, w) in [(1_000_000u64, 300.0), (100_000, 50.0), (10_000_000, 5000.0)] {
        let p = SystemParams::strontium(n, w);
        // The explicit scheme runs at its stability limit, where step noise bounds the reachable residual.
        let explicit = SettleOptions { method: Method::Explicit, tol: 1e-7, ..Default::default() };
        let (a, _) = settle_with(&p, &explicit).unwrap();
        let (b, _) = settle_with(&p, &SettleOptions { method: Method::Adiabatic, ..Default::default() }).unwrap();
        assert!(max_rel(&a, &b) < 1e-4, "N = {n}, w = {w}: {:e}", max_rel(&a, &b));
    }
}

#[test]
fn settles_within_a_second_at_w_300() {
    let p = SystemParams::strontium(1_000_000, 300.0);
    let (state, t) = settle(&p, 1e-10).unwrap();
    assert!(t < 1.0, "settling time {t}");
    let exact = steady_exact(&p).unwrap().state;
    assert!(max_rel(&state, &exact) < 1e-6);
}

#[test]
fn implicit_and_adiabatic_reach_the_exact_state() {
    let p = SystemParams::strontium(1_000_000, 100.0);
    let exact = steady_exact(&p).unwrap().state;
    let (s, _) = settle_with(&p, &SettleOptions::default()).unwrap();
    assert!(max_rel(&s, &exact) < 1e-6);
    // Elimination is exact at stationary points.
    let (s, _) = settle_with(&p, &SettleOptions { method: Method::Adiabatic, ..Default::default() }).unwrap();
    assert!(max_rel(&s, &exact) < 1e-4, "{:e}", max_rel(&s, &exact));
}

#[test]
fn settle_from_custom_initial_state() {
    let p = SystemParams::strontium(1_000_000, 300.0);
    let initial = CumulantState { inversion: -1.0, coherence_re: 0.0, coherence_im: 0.0, spin_spin: 0.0, photons: 0.0 };
    let opts = SettleOptions { initial: Some(initial), ..Default::default() };
    // Spontaneous emission seeds the coherence; the ground state still reaches the lasing state.
    let (s, _) = settle_with(&p, &opts).unwrap();
    assert!(max_rel(&s, &steady_exact(&p).unwrap().state) < 1e-6);
}

#[test]
fn trajectory_csv_layout() {
    let p = SystemParams::strontium(1000, 1.0);
    let opts = IntegrateOptions { record_every: 10, ..Default::default() };
    let traj = integrate_with(&CumulantState::uncorrelated(p.d0()), &p, 0.01, &opts).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time_s,inversion,coherence_re,coherence_im,spin_spin,photons"));
    assert!(lines.all(|l| l.split(',').count() == 6));
    assert_eq!(traj.last().0, 0.01);
}
