use std::sync::OnceLock;

use nmsqueeze_core::collective::{optimize_theta, TwistKind};
use nmsqueeze_core::propagator::{solve_volterra, DEFAULT_DT};
use nmsqueeze_core::spectrum::find_bound_state;
use nmsqueeze_core::squeezing::{xi2_oat_formula, xi2_oat_steady};
use nmsqueeze_core::{PropagatorTrajectory, SpectralModel};

fn ohmic(eta: f64) -> SpectralModel {
    SpectralModel::ohmic(eta, 1.0, 50.0).unwrap()
}

fn run(eta: f64) -> &'static PropagatorTrajectory {
    static WEAK: OnceLock<PropagatorTrajectory> = OnceLock::new();
    static STRONG: OnceLock<PropagatorTrajectory> = OnceLock::new();
    let cell = if eta < 0.02 { &WEAK } else { &STRONG };
    cell.get_or_init(|| solve_volterra(&ohmic(eta), 400.0, DEFAULT_DT).unwrap())
}

#[test]
fn squeezing_is_destroyed_without_a_bound_state() {
    let traj = run(0.01);
    let end = traj.u.last().unwrap().norm_sqr();
    let theta = optimize_theta(100, TwistKind::Oat, 1.0).unwrap().theta;
    assert!(xi2_oat_formula(100, theta, end) > 0.97);
    assert!(end.sqrt() < 5e-2);
    // ξ² rises towards 1 as |u| decays.
    let early = xi2_oat_formula(100, theta, traj.u_near(10.0).norm_sqr());
    assert!(early < xi2_oat_formula(100, theta, end));
}

#[test]
fn squeezing_is_protected_by_the_bound_state() {
    let traj = run(0.03);
    let z = find_bound_state(&ohmic(0.03)).unwrap().z_residue.unwrap();
    let end = traj.u.last().unwrap().norm_sqr();
    for n in [100, 1000] {
        let theta = optimize_theta(n, TwistKind::Oat, 1.0).unwrap().theta;
        let dynamic = xi2_oat_formula(n, theta, end);
        let steady = xi2_oat_steady(n, theta, z);
        assert!((dynamic / steady - 1.0).abs() < 0.05, "n = {n}: {dynamic} vs {steady}");
        assert!(dynamic < 1.0);
    }
}
