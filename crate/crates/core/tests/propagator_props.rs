use nmsqueeze_core::propagator::*;
use nmsqueeze_core::spectrum::{find_bound_state, SpectralPropagator};
use nmsqueeze_core::SpectralModel;
use num_complex::Complex64;

fn model(eta: f64) -> SpectralModel {
    SpectralModel::ohmic(eta, 1.0, 50.0).unwrap()
}

fn max_gap(coarse: &PropagatorTrajectory, fine: &PropagatorTrajectory) -> f64 {
    (0..coarse.len()).map(|k| (coarse.u[k] - fine.u[2 * k]).norm()).fold(0.0, f64::max)
}

#[test]
fn second_order_convergence() {
    let m = model(0.03);
    let a = solve_volterra(&m, 50.0, DEFAULT_DT).unwrap();
    let b = solve_volterra(&m, 50.0, DEFAULT_DT / 2.0).unwrap();
    let c = solve_volterra(&m, 50.0, DEFAULT_DT / 4.0).unwrap();
    let ratio = max_gap(&a, &b) / max_gap(&b, &c);
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn agrees_with_spectral_representation_at_stronger_coupling() {
    let m = model(0.05);
    let traj = solve_volterra(&m, 20.0, DEFAULT_DT).unwrap();
    let spectral = SpectralPropagator::new(&m).unwrap();
    let times: Vec<f64> = (0..=80).map(|k| 0.25 * k as f64).collect();
    let us = spectral.u_many(&times);
    for (t, u) in times.iter().zip(&us) {
        let gap = (traj.u_near(*t) - u).norm();
        assert!(gap < 1e-3, "t = {t}: gap {gap:e}");
    }
}

#[test]
fn trajectory_invariants() {
    let traj = solve_volterra(&model(0.03), 30.0, DEFAULT_DT).unwrap();
    assert_eq!(traj.u[0], Complex64::new(1.0, 0.0));
    assert!(traj.u.iter().all(|u| u.norm() <= 1.0 + 1e-9));
    let dt = traj.t_grid[1] - traj.t_grid[0];
    assert!(traj.t_grid.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() < 1e-12));
    assert!(traj.valid_rate.iter().all(|v| *v));
    assert_eq!(traj.t_grid.len(), traj.gamma.len());
    assert_eq!(traj.u.len(), traj.omega_shift.len());
}

#[test]
fn rates_reintegrate_to_the_propagator() {
    // v' = -(Γ + iΩ) v with the implicit trapezoid on stored rates.
    let traj = solve_volterra(&model(0.03), 50.0, DEFAULT_DT).unwrap();
    let dt = traj.dt;
    let mut v = Complex64::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for k in 0..traj.len() - 1 {
        let (r0, r1) = (traj.rate(k).unwrap(), traj.rate(k + 1).unwrap());
        v = v * (1.0 - 0.5 * dt * r0) / (1.0 + 0.5 * dt * r1);
        worst = worst.max((v - traj.u[k + 1]).norm());
    }
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn rates_relax_to_bound_state_frequency() {
    // With a bound state Γ → 0 and Ω → E_b at long times.
    let m = model(0.05);
    let e_b = find_bound_state(&m).unwrap().e_b.unwrap();
    let traj = solve_volterra(&m, 60.0, DEFAULT_DT).unwrap();
    let k = traj.len() - 1;
    assert!(traj.gamma[k].abs() < 0.05, "{}", traj.gamma[k]);
    assert!((traj.omega_shift[k] - e_b).abs() < 0.05, "{} vs {e_b}", traj.omega_shift[k]);
}

#[test]
fn scale_covariance() {
    let m = model(0.03);
    let r = m.rescaled(2.0);
    let a = solve_volterra(&m, 10.0, DEFAULT_DT).unwrap();
    let b = solve_volterra(&r, 5.0, DEFAULT_DT / 2.0).unwrap();
    assert_eq!(a.len(), b.len());
    for k in 0..a.len() {
        assert!((a.u[k].norm() - b.u[k].norm()).abs() < 1e-10);
    }
    let (ra, rb) = (find_bound_state(&m).unwrap(), find_bound_state(&r).unwrap());
    assert_eq!(ra.exists, rb.exists);
    assert!((rb.e_b.unwrap() - 2.0 * ra.e_b.unwrap()).abs() < 1e-9);
    assert!((rb.z_residue.unwrap() - ra.z_residue.unwrap()).abs() < 1e-9);
}

#[test]
fn born_markov_modulus_is_exponential() {
    let m = model(0.01);
    let kappa = m.markov_kappa();
    for t in [0.0, 1.0, 10.0, 100.0, 400.0] {
        let u = u_bma(&m, t).unwrap();
        assert!((u.norm() - (-kappa * t).exp()).abs() < 1e-15);
    }
    assert!(u_bma(&m, -1.0).is_err());
}
