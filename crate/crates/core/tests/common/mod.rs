#![allow(dead_code)]

use nmsqueeze_core::collective::CollectiveState;
use nmsqueeze_core::oracle::{apply_channel, collective_moments, embed_dicke, CollectiveMoments, KrausPair};
use nmsqueeze_core::squeezing::{xi2_exact_from_moments, Convention, SqueezingReport};
use num_complex::Complex64;

/// The channel applied to the 2^n embedding of `state`, then exact moments.
pub fn evolved_moments(state: &CollectiveState, u: Complex64) -> CollectiveMoments {
    let rho = embed_dicke(state).expect("oracle capacity");
    let out = apply_channel(&rho, &KrausPair::new(u).expect("|u| <= 1")).expect("oracle capacity");
    collective_moments(&out)
}

pub fn oracle_report(state: &CollectiveState, u: Complex64) -> SqueezingReport {
    let m = evolved_moments(state, u);
    xi2_exact_from_moments(state.n, m.first, m.second).expect("mean spin is nonzero")
}

pub fn oracle_xi2(state: &CollectiveState, u: Complex64, convention: Convention) -> f64 {
    oracle_report(state, u).xi2_in(convention)
}

/// The oracle grid of twist angles and channel parameters.
pub fn oracle_grid() -> Vec<(usize, f64, Complex64)> {
    let us = [Complex64::new(1.0, 0.0), Complex64::from_polar(0.9, 0.3), Complex64::new(0.5, 0.0)];
    let mut out = Vec::new();
    for n in [4, 6, 8] {
        for theta in [0.1, 0.3] {
            for u in us {
                out.push((n, theta, u));
            }
        }
    }
    out
}

/// Least-squares slope of log y against log x.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
