//! Husimi Q function of N locally damped spins,
//! Q(θ, φ) = (2j+1)/(4π) ⟨O₁(θ, φ)^{⊗N}⟩₀ with
//! O₁ = I/2 + (cos θ/2) Λ†σ^z + (sin θ/2)(e^{iφ} Λ†σ + h.c.),
//! evaluated on the initial Dicke-basis state.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::collective::CollectiveState;
use crate::error::{Error, Result};
use crate::oracle::{embed_dicke_vector, mat2_adjoint, pullback_sigma, KrausPair, Mat2, MAX_VECTOR_SITES};
use crate::special::{ln_binomial, ln_factorials};

/// Largest n for the symmetric-representation path.
pub const MAX_SYMMETRIC_SITES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_theta: 101, n_phi: 101 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HusimiPath {
    /// Symmetric representation.
    #[default]
    Symmetric,
    /// Site-by-site action on the 2^N product vector.
    BruteForce,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HusimiGrid {
    /// θ_i = iπ/(n_θ - 1), endpoints included.
    pub thetas: Vec<f64>,
    /// φ_k = 2πk/n_φ.
    pub phis: Vec<f64>,
    /// q_raw[i][k] at (θ_i, φ_k).
    pub q_raw: Vec<Vec<f64>>,
    pub q_normalized: Vec<Vec<f64>>,
    /// ∫q_raw dΩ on the grid.
    pub symmetric_weight: f64,
}

/// Single-site operator O₁(θ, φ; u).
pub fn single_site_operator(kraus: &KrausPair, theta: f64, phi: f64) -> Mat2 {
    let (s, z) = pullback_sigma(kraus);
    let s_dag = mat2_adjoint(&s);
    let (st, ct) = theta.sin_cos();
    let phase = Complex64::from_polar(1.0, phi);
    let mut o = [[Complex64::new(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let id = if a == b { 0.5 } else { 0.0 };
            o[a][b] = Complex64::new(id, 0.0) + z[a][b] * (0.5 * ct) + (s[a][b] * phase + s_dag[a][b] * phase.conj()) * (0.5 * st);
        }
    }
    o
}

fn powers(x: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=n {
        out.push(acc);
        acc *= x;
    }
    out
}

/// ⟨ψ|O^{⊗N}|ψ⟩ in the Dicke basis. Between |D_k⟩ (k excitations) and |D_k'⟩,
/// ⟨D_k'|O^{⊗N}|D_k⟩ = √(C(N,k)/C(N,k')) Σ_a C(k,a) C(N-k,k'-a)
///                     O_ee^a O_ge^(k-a) O_eg^(k'-a) O_gg^(N-k-k'+a),
/// with binomials in the log domain.
pub fn symmetric_power_expectation(state: &CollectiveState, o1: &Mat2) -> Result<Complex64> {
    let n = state.n;
    if n > MAX_SYMMETRIC_SITES {
        return Err(Error::Capacity { n, max: MAX_SYMMETRIC_SITES });
    }
    let table = ln_factorials(n);
    let ee = powers(o1[0][0], n);
    let eg = powers(o1[0][1], n);
    let ge = powers(o1[1][0], n);
    let gg = powers(o1[1][1], n);
    let c = &state.amplitudes;
    let support: Vec<usize> = (0..=n).filter(|&k| c[k] != Complex64::new(0.0, 0.0)).collect();
    let mut total = Complex64::new(0.0, 0.0);
    for &k in &support {
        for &kp in &support {
            let lead = 0.5 * (ln_binomial(&table, n, k) - ln_binomial(&table, n, kp));
            let lo = (k + kp).saturating_sub(n);
            let hi = k.min(kp);
            let mut element = Complex64::new(0.0, 0.0);
            for a in lo..=hi {
                let w = (lead + ln_binomial(&table, k, a) + ln_binomial(&table, n - k, kp - a)).exp();
                element += ee[a] * ge[k - a] * eg[kp - a] * gg[n + a - k - kp] * w;
            }
            total += c[kp].conj() * element * c[k];
        }
    }
    Ok(total)
}

/// O^{⊗N} applied site by site to the 2^N product vector.
pub fn brute_force_power_expectation(state: &CollectiveState, o1: &Mat2) -> Result<Complex64> {
    let psi = embed_dicke_vector(state)?;
    let n = state.n;
    let mut phi = psi.clone();
    for site in 0..n {
        let mask = 1usize << (n - 1 - site);
        for idx in (0..phi.len()).filter(|i| i & mask == 0) {
            let (e, g) = (phi[idx], phi[idx | mask]);
            phi[idx] = o1[0][0] * e + o1[0][1] * g;
            phi[idx | mask] = o1[1][0] * e + o1[1][1] * g;
        }
    }
    Ok(psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum())
}

/// Product trapezoid on [0, π] × [0, 2π) with the sin θ measure.
pub fn integrate_sphere(thetas: &[f64], phis: &[f64], values: &[Vec<f64>]) -> f64 {
    let nt = thetas.len();
    let dtheta = PI / (nt - 1) as f64;
    let dphi = 2.0 * PI / phis.len() as f64;
    let mut total = 0.0;
    for (i, row) in values.iter().enumerate() {
        let end = if i == 0 || i + 1 == nt { 0.5 } else { 1.0 };
        total += end * dtheta * thetas[i].sin() * dphi * row.iter().sum::<f64>();
    }
    total
}

pub fn husimi_q(state0: &CollectiveState, kraus: &KrausPair, grid: GridSpec, path: HusimiPath) -> Result<HusimiGrid> {
    if grid.n_theta < 2 || grid.n_phi < 1 {
        return Err(Error::Argument(format!("Husimi grid {}×{} is too small", grid.n_theta, grid.n_phi)));
    }
    let n = state0.n;
    match path {
        HusimiPath::BruteForce if n > MAX_VECTOR_SITES => return Err(Error::Capacity { n, max: MAX_VECTOR_SITES }),
        HusimiPath::Symmetric if n > MAX_SYMMETRIC_SITES => {
            return Err(Error::Capacity { n, max: MAX_SYMMETRIC_SITES })
        }
        _ => {}
    }
    let thetas: Vec<f64> = (0..grid.n_theta).map(|i| PI * i as f64 / (grid.n_theta - 1) as f64).collect();
    let phis: Vec<f64> = (0..grid.n_phi).map(|k| 2.0 * PI * k as f64 / grid.n_phi as f64).collect();
    let prefactor = (n as f64 + 1.0) / (4.0 * PI);
    let q_raw = thetas
        .par_iter()
        .map(|&theta| {
            phis.iter()
                .map(|&phi| {
                    let o = single_site_operator(kraus, theta, phi);
                    let value = match path {
                        HusimiPath::Symmetric => symmetric_power_expectation(state0, &o)?,
                        HusimiPath::BruteForce => brute_force_power_expectation(state0, &o)?,
                    };
                    Ok(prefactor * value.re)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let weight = integrate_sphere(&thetas, &phis, &q_raw);
    // Q ≤ (N+1)/4π, so anything below this floor is rounding noise.
    let floor = 64.0 * f64::EPSILON * (n as f64 + 1.0);
    if !(weight > floor) {
        return Err(Error::NonConvergence { what: "Husimi normalisation", estimate: weight });
    }
    let q_normalized = q_raw.iter().map(|row| row.iter().map(|q| q / weight).collect()).collect();
    Ok(HusimiGrid { thetas, phis, q_raw, q_normalized, symmetric_weight: weight })
}

impl HusimiGrid {
    /// Eigenvalue ratio (≥ 1) of the covariance of (sin θ cos φ, sin θ sin φ)
    /// under q_normalized: the transverse elongation of the distribution.
    pub fn anisotropy(&self) -> f64 {
        let moment = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
            let vals: Vec<Vec<f64>> = self
                .thetas
                .iter()
                .zip(&self.q_normalized)
                .map(|(&t, row)| self.phis.iter().zip(row).map(|(&p, q)| q * f(t, p)).collect())
                .collect();
            integrate_sphere(&self.thetas, &self.phis, &vals)
        };
        let mx = moment(&|t, p| t.sin() * p.cos());
        let my = moment(&|t, p| t.sin() * p.sin());
        let sxx = moment(&|t, p| (t.sin() * p.cos()).powi(2)) - mx * mx;
        let syy = moment(&|t, p| (t.sin() * p.sin()).powi(2)) - my * my;
        let sxy = moment(&|t, p| t.sin().powi(2) * p.cos() * p.sin()) - mx * my;
        let mean = 0.5 * (sxx + syy);
        let radius = (0.5 * (sxx - syy)).hypot(sxy);
        (mean + radius) / (mean - radius)
    }

    /// Maximum over θ rows of the spread of q_raw in φ.
    pub fn azimuthal_spread(&self) -> f64 {
        self.q_raw
            .iter()
            .map(|row| {
                let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}
