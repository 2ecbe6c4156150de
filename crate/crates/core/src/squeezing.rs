//! Wineland squeezing parameter ξ² = N min_β ΔJ²_⊥,β / |⟨J⟩|² from moments,
//! and the closed forms for twisted states under local amplitude damping.

use std::f64::consts::PI;

use crate::collective::InitialMoments;
use crate::error::{Error, Result};

/// Denominator used when normalising the transverse variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// |⟨J⟩| replaced by N/2, as in the closed forms.
    #[default]
    Paper,
    /// The actual mean-spin length.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingReport {
    pub n: usize,
    pub mean_spin: [f64; 3],
    pub n0: [f64; 3],
    pub n1: [f64; 3],
    pub n2: [f64; 3],
    pub min_transverse_var: f64,
    /// Minimising direction cos β n₁ + sin β n₂, β ∈ [0, π).
    pub beta_opt: f64,
    /// N · min_transverse_var / |⟨J⟩|².
    pub xi2: f64,
}

impl SqueezingReport {
    pub fn xi2_in(&self, convention: Convention) -> f64 {
        match convention {
            Convention::Exact => self.xi2,
            Convention::Paper => 4.0 * self.min_transverse_var / self.n as f64,
        }
    }

    /// ΔJ² along cos β n₁ + sin β n₂.
    pub fn variance_at(&self, beta: f64, second: &[[f64; 3]; 3]) -> f64 {
        let d = transverse(self.n1, self.n2, beta);
        quad_form(second, &d) - dot(&d, &self.mean_spin).powi(2)
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn quad_form(m: &[[f64; 3]; 3], v: &[f64; 3]) -> f64 {
    (0..3).map(|a| (0..3).map(|b| v[a] * m[a][b] * v[b]).sum::<f64>()).sum()
}

fn transverse(n1: [f64; 3], n2: [f64; 3], beta: f64) -> [f64; 3] {
    let (s, c) = beta.sin_cos();
    [c * n1[0] + s * n2[0], c * n1[1] + s * n2[1], c * n1[2] + s * n2[2]]
}

/// Orthonormal n₁, n₂ with n₁ × n₂ = n₀; n₁ is built from the coordinate axis
/// least aligned with n₀.
fn transverse_frame(n0: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let axis = (0..3).min_by(|&a, &b| n0[a].abs().total_cmp(&n0[b].abs())).unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let p = dot(&e, n0);
    let mut n1 = [e[0] - p * n0[0], e[1] - p * n0[1], e[2] - p * n0[2]];
    let len = dot(&n1, &n1).sqrt();
    n1.iter_mut().for_each(|x| *x /= len);
    let n2 = cross(n0, &n1);
    (n1, n2)
}

/// Squeezing report from ⟨J⟩ and the symmetrised second moments
/// ⟨J_aJ_b + J_bJ_a⟩/2.
pub fn xi2_exact_from_moments(n: usize, first: [f64; 3], second: [[f64; 3]; 3]) -> Result<SqueezingReport> {
    let len = dot(&first, &first).sqrt();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::UndefinedDirection);
    }
    let n0 = [first[0] / len, first[1] / len, first[2] / len];
    let (n1, n2) = transverse_frame(&n0);
    // Mean spin has no transverse component, so second moments are covariances.
    let c11 = quad_form(&second, &n1);
    let c22 = quad_form(&second, &n2);
    let c12 = (0..3).map(|a| (0..3).map(|b| n1[a] * second[a][b] * n2[b]).sum::<f64>()).sum::<f64>();
    let half_diff = 0.5 * (c11 - c22);
    let radius = half_diff.hypot(c12);
    let min_var = (0.5 * (c11 + c22) - radius).max(0.0);
    // V(β) = (c11+c22)/2 + half_diff cos 2β + c12 sin 2β is minimal at 2β = atan2(c12, half_diff) + π.
    let mut beta = 0.5 * (c12.atan2(half_diff) + PI);
    beta = beta.rem_euclid(PI);
    Ok(SqueezingReport {
        n,
        mean_spin: first,
        n0,
        n1,
        n2,
        min_transverse_var: min_var,
        beta_opt: beta,
        xi2: n as f64 * min_var / (len * len),
    })
}

/// A = 1 - cos^(N-2)(2Θ), B = 4 sin Θ cos^(N-2) Θ.
pub fn oat_ab(n: usize, theta: f64) -> (f64, f64) {
    let p = n as i32 - 2;
    (1.0 - (2.0 * theta).cos().powi(p), 4.0 * theta.sin() * theta.cos().powi(p))
}

/// ξ²_OAT = 1 + |u|²(N-1)(A - √(A² + B²))/4.
pub fn xi2_oat_formula(n: usize, theta: f64, u_mod2: f64) -> f64 {
    let (a, b) = oat_ab(n, theta);
    1.0 + u_mod2 * (n as f64 - 1.0) * (a - a.hypot(b)) / 4.0
}

/// Long-time ξ²_OAT with a bound state of residue Z, i.e. |u|² → Z².
pub fn xi2_oat_steady(n: usize, theta: f64, z_residue: f64) -> f64 {
    xi2_oat_formula(n, theta, z_residue * z_residue)
}

/// Large-N minimum over Θ of [`xi2_oat_steady`]: 1.04 Z² N^(-2/3) + 1 - Z².
pub fn xi2_oat_steady_asymptote(n: usize, z_residue: f64) -> f64 {
    let z2 = z_residue * z_residue;
    1.04 * z2 * (n as f64).powf(-2.0 / 3.0) + 1.0 - z2
}

/// Small-angle expansion 1 + Z²(N⁻²Θ⁻² + N²Θ⁴/6 - 1).
pub fn xi2_oat_steady_small_angle(n: usize, theta: f64, z_residue: f64) -> f64 {
    let nf = n as f64;
    1.0 + z_residue * z_residue * (1.0 / (nf * nf * theta * theta) + nf * nf * theta.powi(4) / 6.0 - 1.0)
}

/// Θ₀ = 3^(1/6) N^(-2/3).
pub fn oat_theta0(n: usize) -> f64 {
    3f64.powf(1.0 / 6.0) * (n as f64).powf(-2.0 / 3.0)
}

/// ξ²_TAT = 1 - |u|² + (2|u|²/N)(⟨J_x² + J_y²⟩₀ - |⟨J_-²⟩₀|).
pub fn xi2_tat_formula(moments: &InitialMoments, u_mod2: f64) -> f64 {
    let n = moments.n as f64;
    1.0 - u_mod2 + 2.0 * u_mod2 / n * (moments.jperp2_sum - moments.jminus2.norm())
}

/// ⟨J⟩ = N/2 [|u|²(1 - cos^(N-1) Θ) - 1] ẑ for the OAT state.
pub fn mean_spin_oat(n: usize, theta: f64, u_mod2: f64) -> [f64; 3] {
    let nf = n as f64;
    let c = theta.cos().powi(n as i32 - 1);
    [0.0, 0.0, 0.5 * nf * (u_mod2 * (1.0 - c) - 1.0)]
}
