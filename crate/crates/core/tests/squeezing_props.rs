mod common;

use std::f64::consts::PI;

use common::{evolved_moments, log_log_slope, oracle_grid, oracle_report, oracle_xi2};
use nmsqueeze_core::collective::{initial_moments, minimize_over_theta, oat_state, tat_state};
use nmsqueeze_core::spectral::SpectralModel;
use nmsqueeze_core::spectrum::find_bound_state;
use nmsqueeze_core::squeezing::{
    mean_spin_oat, oat_theta0, xi2_exact_from_moments, xi2_oat_formula, xi2_oat_steady, xi2_oat_steady_asymptote,
    xi2_oat_steady_small_angle, xi2_tat_formula, Convention,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn z_at(eta: f64) -> f64 {
    let model = SpectralModel::ohmic(eta, 1.0, 50.0).unwrap();
    find_bound_state(&model).unwrap().z_residue.unwrap()
}

#[test]
fn oat_formula_matches_oracle() {
    for (n, theta, u) in oracle_grid() {
        let oracle = oracle_xi2(&oat_state(n, theta).unwrap(), u, Convention::Paper);
        let formula = xi2_oat_formula(n, theta, u.norm_sqr());
        assert!((oracle - formula).abs() < 1e-10, "n = {n}, Θ = {theta}, u = {u}: {oracle} vs {formula}");
    }
}

#[test]
fn tat_formula_matches_oracle() {
    for (n, theta, u) in oracle_grid() {
        let state = tat_state(n, theta).unwrap();
        let oracle = oracle_xi2(&state, u, Convention::Paper);
        let formula = xi2_tat_formula(&initial_moments(&state), u.norm_sqr());
        assert!((oracle - formula).abs() < 1e-10, "n = {n}, Θ = {theta}, u = {u}: {oracle} vs {formula}");
    }
}

#[test]
fn oat_mean_spin_matches_oracle() {
    for (n, theta, u) in oracle_grid().into_iter().chain([(6, 0.3, Complex64::new(0.7f64.sqrt(), 0.0))]) {
        let m = evolved_moments(&oat_state(n, theta).unwrap(), u);
        let formula = mean_spin_oat(n, theta, u.norm_sqr());
        for a in 0..3 {
            assert!((m.first[a] - formula[a]).abs() < 1e-10, "n = {n}, Θ = {theta}");
        }
    }
}

#[test]
fn exact_convention_uses_the_mean_spin_length() {
    for (n, theta, u) in oracle_grid() {
        let r = oracle_report(&oat_state(n, theta).unwrap(), u);
        let len2: f64 = r.mean_spin.iter().map(|x| x * x).sum();
        assert!((r.xi2 - n as f64 * r.min_transverse_var / len2).abs() < 1e-12);
        assert_eq!(r.xi2_in(Convention::Exact), r.xi2);
        // |⟨J⟩| ≤ N/2, so the paper convention never exceeds the exact value.
        assert!(r.xi2_in(Convention::Paper) <= r.xi2 + 1e-12);
    }
}

#[test]
fn report_minimises_over_sampled_directions() {
    for (n, theta, u) in oracle_grid() {
        for state in [oat_state(n, theta).unwrap(), tat_state(n, theta).unwrap()] {
            let m = evolved_moments(&state, u);
            let r = xi2_exact_from_moments(n, m.first, m.second).unwrap();
            assert!((0.0..PI).contains(&r.beta_opt));
            assert!((r.variance_at(r.beta_opt, &m.second) - r.min_transverse_var).abs() < 1e-12);
            for k in 0..8 {
                let beta = PI * k as f64 / 8.0;
                assert!(r.min_transverse_var <= r.variance_at(beta, &m.second) + 1e-12);
            }
        }
    }
}

#[test]
fn z_aligned_specialisation() {
    for (n, theta, u) in oracle_grid() {
        let m = evolved_moments(&oat_state(n, theta).unwrap(), u);
        let r = xi2_exact_from_moments(n, m.first, m.second).unwrap();
        let special = 0.5 * (m.jperp2_sum - m.jminus2.norm());
        assert!((r.min_transverse_var - special).abs() < 1e-10);
    }
}

#[test]
fn steady_state_minimum_with_partial_residue() {
    let opt = minimize_over_theta(&|t| xi2_oat_steady(100, t, 0.8));
    let expect = 1.04 * 0.64 * 100f64.powf(-2.0 / 3.0) + 1.0 - 0.64;
    assert!((expect - 0.3909).abs() < 1e-4);
    assert!((opt.xi2 / expect - 1.0).abs() < 0.10, "{}", opt.xi2);
    assert!((xi2_oat_steady_asymptote(100, 0.8) - expect).abs() < 1e-15);
}

#[test]
fn steady_state_limits() {
    for n in [1_000, 10_000] {
        let opt = minimize_over_theta(&|t| xi2_oat_steady(n, t, 1.0));
        let law = 1.04 * (n as f64).powf(-2.0 / 3.0);
        assert!((opt.xi2 / law - 1.0).abs() < 0.10);
    }
    for theta in [1e-3, 0.05, 0.5] {
        assert!((xi2_oat_steady(100, theta, 1e-9) - 1.0).abs() < 1e-12);
    }
    // The small-angle expansion tracks the exact form near Θ₀ at large N.
    let n = 100_000;
    let t0 = oat_theta0(n);
    let exact = xi2_oat_steady(n, t0, 0.9);
    let approx = xi2_oat_steady_small_angle(n, t0, 0.9);
    assert!((exact - approx).abs() / exact < 0.02, "{exact} vs {approx}");
}

#[test]
fn steady_floor_scaling() {
    let z = z_at(0.03);
    let ns = [1e3, 1e4, 1e5];
    let excess: Vec<f64> = ns
        .iter()
        .map(|&n| minimize_over_theta(&|t| xi2_oat_steady(n as usize, t, z)).xi2 - (1.0 - z * z))
        .collect();
    let slope = log_log_slope(&ns, &excess);
    assert!((slope + 2.0 / 3.0).abs() < 0.05, "slope {slope}");
    for (&n, e) in ns.iter().zip(&excess) {
        let law = 1.04 * z * z * n.powf(-2.0 / 3.0);
        assert!((e / law - 1.0).abs() < 0.05);
    }
}

#[test]
fn zero_mean_spin_is_an_error() {
    assert!(xi2_exact_from_moments(4, [0.0; 3], [[0.0; 3]; 3]).is_err());
}

fn rotation(a: f64, b: f64, c: f64) -> [[f64; 3]; 3] {
    let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
    let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
    let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frame_covariance(
        theta in 0.01..0.6f64,
        r in 0.2..1.0f64,
        phase in 0.0..(2.0 * PI),
        angles in (0.0..(2.0 * PI), 0.0..PI, 0.0..(2.0 * PI)),
    ) {
        let n = 5;
        let m = evolved_moments(&oat_state(n, theta).unwrap(), Complex64::from_polar(r, phase));
        let base = xi2_exact_from_moments(n, m.first, m.second).unwrap();
        let rot = rotation(angles.0, angles.1, angles.2);
        let mut first = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for i in 0..3 {
            first[i] = (0..3).map(|k| rot[i][k] * m.first[k]).sum();
            for j in 0..3 {
                second[i][j] = (0..3)
                    .flat_map(|k| (0..3).map(move |l| (k, l)))
                    .map(|(k, l)| rot[i][k] * m.second[k][l] * rot[j][l])
                    .sum();
            }
        }
        let turned = xi2_exact_from_moments(n, first, second).unwrap();
        prop_assert!((turned.xi2 - base.xi2).abs() < 1e-10);
        prop_assert!((turned.min_transverse_var - base.min_transverse_var).abs() < 1e-10);
    }
}
