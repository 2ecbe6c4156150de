//! Brute-force reference for the closed forms: the single-spin amplitude
//! damping channel acting site by site on full 2^N density matrices, operator
//! pullbacks, and a single-spin master-equation integrator.
//!
//! Basis: site 1 is the most significant bit of the product index; within a
//! site, index 0 is the excited state |e⟩ and index 1 the ground state |g⟩.

use num_complex::Complex64;

use crate::collective::CollectiveState;
use crate::error::{Error, Result};
use crate::propagator::PropagatorTrajectory;
use crate::special::{ln_binomial, ln_factorials};

/// Largest density-matrix oracle.
pub const MAX_SITES: usize = 12;
/// Largest product-space state vector.
pub const MAX_VECTOR_SITES: usize = 14;

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// σ = |g⟩⟨e|.
pub const SIGMA: Mat2 = [[ZERO, ZERO], [ONE, ZERO]];
pub const SIGMA_Z: Mat2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];
pub const IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn mat2_add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn mat2_scale(a: &Mat2, s: Complex64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

pub fn mat2_trace(a: &Mat2) -> Complex64 {
    a[0][0] + a[1][1]
}

/// Local amplitude damping with K₁ = diag(u, 1), K₂ = √(1-|u|²) σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub u: Complex64,
}

impl KrausPair {
    pub fn new(u: Complex64) -> Result<Self> {
        if !(u.norm() <= 1.0 + 1e-12) {
            return Err(Error::Argument(format!("Kraus parameter |u| = {} exceeds 1", u.norm())));
        }
        Ok(Self { u })
    }

    pub fn u_mod2(&self) -> f64 {
        self.u.norm_sqr().min(1.0)
    }

    pub fn operators(&self) -> (Mat2, Mat2) {
        let k1 = [[self.u, ZERO], [ZERO, ONE]];
        let k2 = mat2_scale(&SIGMA, Complex64::new((1.0 - self.u_mod2()).sqrt(), 0.0));
        (k1, k2)
    }

    /// K₁†K₁ + K₂†K₂.
    pub fn completeness(&self) -> Mat2 {
        let (k1, k2) = self.operators();
        mat2_add(&mat2_mul(&mat2_adjoint(&k1), &k1), &mat2_mul(&mat2_adjoint(&k2), &k2))
    }

    /// Schrödinger-picture action on a single-site density matrix.
    pub fn apply_single(&self, rho: &Mat2) -> Mat2 {
        let (k1, k2) = self.operators();
        let a = mat2_mul(&mat2_mul(&k1, rho), &mat2_adjoint(&k1));
        let b = mat2_mul(&mat2_mul(&k2, rho), &mat2_adjoint(&k2));
        mat2_add(&a, &b)
    }
}

/// Heisenberg-picture images (Λ†σ, Λ†σ^z) = (uσ, |u|²σ^z - (1-|u|²) I).
pub fn pullback_sigma(kraus: &KrausPair) -> (Mat2, Mat2) {
    let p = kraus.u_mod2();
    let s = mat2_scale(&SIGMA, kraus.u);
    let z = mat2_add(&mat2_scale(&SIGMA_Z, Complex64::new(p, 0.0)), &mat2_scale(&IDENTITY, Complex64::new(p - 1.0, 0.0)));
    (s, z)
}

/// Dense 2^n × 2^n density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub n: usize,
    pub entries: Vec<Complex64>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_SITES {
        return Err(Error::Capacity { n, max: MAX_SITES });
    }
    Ok(())
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn pure(n: usize, psi: &[Complex64]) -> Result<Self> {
        check_capacity(n)?;
        let dim = 1usize << n;
        if psi.len() != dim {
            return Err(Error::Argument(format!("state vector length {} is not 2^{n}", psi.len())));
        }
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = psi[r] * psi[c].conj();
            }
        }
        Ok(Self { n, entries })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim() + c]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// max |ρ - ρ†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| self.get(r, c));
        let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Bit mask of `site` (0-based) in the product index.
    fn mask(&self, site: usize) -> usize {
        1 << (self.n - 1 - site)
    }

    /// Reduced density matrix of one site.
    pub fn marginal_one(&self, site: usize) -> Mat2 {
        let mask = self.mask(site);
        let mut out = [[ZERO; 2]; 2];
        for r in 0..self.dim() {
            let a = usize::from(r & mask != 0);
            for b in 0..2 {
                let c = (r & !mask) | if b == 1 { mask } else { 0 };
                out[a][b] += self.get(r, c);
            }
        }
        out
    }

    /// Reduced density matrix of sites k < l, indexed by 2a + b.
    pub fn marginal_two(&self, k: usize, l: usize) -> [[Complex64; 4]; 4] {
        let (mk, ml) = (self.mask(k), self.mask(l));
        let mut out = [[ZERO; 4]; 4];
        for r in 0..self.dim() {
            let row = 2 * usize::from(r & mk != 0) + usize::from(r & ml != 0);
            for col in 0..4 {
                let c = (r & !(mk | ml)) | if col & 2 != 0 { mk } else { 0 } | if col & 1 != 0 { ml } else { 0 };
                out[row][col] += self.get(r, c);
            }
        }
        out
    }
}

/// Λ^{⊗n}: the channel applied independently on every site.
pub fn apply_channel(rho: &DensityMatrix, kraus: &KrausPair) -> Result<DensityMatrix> {
    check_capacity(rho.n)?;
    let d = rho.dim();
    let u = kraus.u;
    let p = kraus.u_mod2();
    let mut out = rho.clone();
    let e = &mut out.entries;
    for site in 0..rho.n {
        let mask = rho.mask(site);
        for r in (0..d).filter(|r| r & mask == 0) {
            let rg = r | mask;
            for c in (0..d).filter(|c| c & mask == 0) {
                let cg = c | mask;
                let ee = e[r * d + c];
                e[rg * d + cg] += ee * (1.0 - p);
                e[r * d + c] = ee * p;
                e[r * d + cg] *= u;
                e[rg * d + c] *= u.conj();
            }
        }
    }
    Ok(out)
}

/// Product-space state vector of a Dicke-basis state: |j, m⟩ becomes the
/// normalised symmetric superposition of strings with j + m excited sites.
pub fn embed_dicke_vector(state: &CollectiveState) -> Result<Vec<Complex64>> {
    let n = state.n;
    if n > MAX_VECTOR_SITES {
        return Err(Error::Capacity { n, max: MAX_VECTOR_SITES });
    }
    let table = ln_factorials(n);
    let dim = 1usize << n;
    let mut psi = vec![ZERO; dim];
    for (idx, amp) in psi.iter_mut().enumerate() {
        let excited = n - idx.count_ones() as usize;
        *amp = state.amplitudes[excited] * (-0.5 * ln_binomial(&table, n, excited)).exp();
    }
    Ok(psi)
}

/// Symmetric-subspace embedding as a pure-state density matrix.
pub fn embed_dicke(state: &CollectiveState) -> Result<DensityMatrix> {
    check_capacity(state.n)?;
    DensityMatrix::pure(state.n, &embed_dicke_vector(state)?)
}

/// Exact collective moments of a product-space density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveMoments {
    pub first: [f64; 3],
    /// ⟨J_aJ_b + J_bJ_a⟩/2.
    pub second: [[f64; 3]; 3],
    pub jperp2_sum: f64,
    pub jminus2: Complex64,
    /// ⟨σ₁σ₂†⟩
    pub pair_pm: Complex64,
    /// ⟨σ₁σ₂⟩
    pub pair_mm: Complex64,
    /// Largest deviation between any two-site marginal and that of sites (1, 2).
    pub marginal_spread: f64,
}

fn paulis() -> [Mat2; 3] {
    let i = Complex64::i();
    [[[ZERO, ONE], [ONE, ZERO]], [[ZERO, -i], [i, ZERO]], SIGMA_Z]
}

fn expect_one(rho: &Mat2, op: &Mat2) -> Complex64 {
    mat2_trace(&mat2_mul(op, rho))
}

fn kron(a: &Mat2, b: &Mat2) -> [[Complex64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for (r, c) in (0..4).flat_map(|r| (0..4).map(move |c| (r, c))) {
        out[r][c] = a[r / 2][c / 2] * b[r % 2][c % 2];
    }
    out
}

fn expect_two(rho: &[[Complex64; 4]; 4], op: &[[Complex64; 4]; 4]) -> Complex64 {
    let mut acc = ZERO;
    for r in 0..4 {
        for c in 0..4 {
            acc += op[r][c] * rho[c][r];
        }
    }
    acc
}

/// Moments from single- and two-site marginals: J_a = Σ_k σ_a^k / 2.
pub fn collective_moments(rho: &DensityMatrix) -> CollectiveMoments {
    let n = rho.n;
    let nf = n as f64;
    let pauli = paulis();
    let mut first = [0.0; 3];
    for site in 0..n {
        let m = rho.marginal_one(site);
        for a in 0..3 {
            first[a] += 0.5 * expect_one(&m, &pauli[a]).re;
        }
    }
    let mut second = [[0.0; 3]; 3];
    for (a, row) in second.iter_mut().enumerate() {
        row[a] = 0.25 * nf;
    }
    let sigma_dag = mat2_adjoint(&SIGMA);
    let mut jminus2 = ZERO;
    let reference = if n >= 2 { Some(rho.marginal_two(0, 1)) } else { None };
    let mut spread: f64 = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            let m = rho.marginal_two(k, l);
            if let Some(r0) = &reference {
                for (x, y) in m.iter().flatten().zip(r0.iter().flatten()) {
                    spread = spread.max((x - y).norm());
                }
            }
            for a in 0..3 {
                for b in 0..3 {
                    // Ordered pairs (k, l) and (l, k) together, halved by the symmetrisation.
                    let ab = expect_two(&m, &kron(&pauli[a], &pauli[b])).re;
                    let ba = expect_two(&m, &kron(&pauli[b], &pauli[a])).re;
                    second[a][b] += 0.25 * (ab + ba);
                }
            }
            jminus2 += 2.0 * expect_two(&m, &kron(&SIGMA, &SIGMA));
        }
    }
    let (pair_pm, pair_mm) = match &reference {
        Some(m) => (expect_two(m, &kron(&SIGMA, &sigma_dag)), expect_two(m, &kron(&SIGMA, &SIGMA))),
        None => (ZERO, ZERO),
    };
    CollectiveMoments {
        first,
        second,
        jperp2_sum: second[0][0] + second[1][1],
        jminus2,
        pair_pm,
        pair_mm,
        marginal_spread: spread,
    }
}

/// Single-spin density matrices along a propagator trajectory.
#[derive(Debug, Clone)]
pub struct MasterEquationRun {
    pub t: Vec<f64>,
    pub rho: Vec<Mat2>,
    /// Set when integration stopped at an invalid-rate sample; the last
    /// reported time is then `t.last()`.
    pub halted_early: bool,
}

/// ρ̇ = -iΩ[σ†σ, ρ] + Γ(2σρσ† - {σ†σ, ρ}).
fn me_rhs(rate: Complex64, rho: &Mat2) -> Mat2 {
    let (g, w) = (rate.re, rate.im);
    let i = Complex64::i();
    let ee = rho[0][0];
    let eg = rho[0][1];
    let ge = rho[1][0];
    [[-2.0 * g * ee, -(g + i * w) * eg], [-(g - i * w) * ge, 2.0 * g * ee]]
}

/// Classical RK4 on the trajectory grid. Midpoint rates come from the cubic
/// Hermite interpolant of u built from the stored u and u̇.
pub fn master_equation_single(traj: &PropagatorTrajectory, rho0: &Mat2) -> MasterEquationRun {
    let dt = traj.dt;
    let mut t = vec![traj.t_grid[0]];
    let mut rho = vec![*rho0];
    let mut halted_early = false;
    for k in 0..traj.len() - 1 {
        let (Some(r0), Some(r1)) = (traj.rate(k), traj.rate(k + 1)) else {
            halted_early = true;
            break;
        };
        let (u0, u1, d0, d1) = (traj.u[k], traj.u[k + 1], traj.u_dot[k], traj.u_dot[k + 1]);
        let u_mid = (u0 + u1) * 0.5 + (d0 - d1) * (dt / 8.0);
        let d_mid = (u1 - u0) * (1.5 / dt) - (d0 + d1) * 0.25;
        if u_mid.norm() < crate::propagator::RATE_FLOOR {
            halted_early = true;
            break;
        }
        let rm = -d_mid / u_mid;
        let y = rho.last().unwrap();
        let k1 = me_rhs(r0, y);
        let k2 = me_rhs(rm, &mat2_add(y, &mat2_scale(&k1, Complex64::new(0.5 * dt, 0.0))));
        let k3 = me_rhs(rm, &mat2_add(y, &mat2_scale(&k2, Complex64::new(0.5 * dt, 0.0))));
        let k4 = me_rhs(r1, &mat2_add(y, &mat2_scale(&k3, Complex64::new(dt, 0.0))));
        let mut next = *y;
        for a in 0..2 {
            for b in 0..2 {
                next[a][b] += (k1[a][b] + 2.0 * k2[a][b] + 2.0 * k3[a][b] + k4[a][b]) * (dt / 6.0);
            }
        }
        rho.push(next);
        t.push(traj.t_grid[k + 1]);
    }
    MasterEquationRun { t, rho, halted_early }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pullback_endpoints() {
        let (s, z) = pullback_sigma(&KrausPair::new(ONE).unwrap());
        assert_eq!(s, SIGMA);
        assert_eq!(z, SIGMA_Z);
        let (s, z) = pullback_sigma(&KrausPair::new(ZERO).unwrap());
        assert_eq!(s, [[ZERO; 2]; 2]);
        assert_eq!(z, mat2_scale(&IDENTITY, Complex64::new(-1.0, 0.0)));
    }

    #[test]
    fn full_damping_reaches_ground() {
        let psi: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64 + 1.0, 0.5 * k as f64)).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        let rho = DensityMatrix::pure(3, &psi).unwrap();
        let out = apply_channel(&rho, &KrausPair::new(ZERO).unwrap()).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                let expect = if r == 7 && c == 7 { 1.0 } else { 0.0 };
                assert!((out.get(r, c) - expect).norm() < 1e-14);
            }
        }
        assert_eq!(apply_channel(&rho, &KrausPair::new(ONE).unwrap()).unwrap(), rho);
    }

    #[test]
    fn capacity_guard() {
        let state = CollectiveState::ground(13).unwrap();
        assert!(matches!(embed_dicke(&state), Err(Error::Capacity { n: 13, max: 12 })));
        assert!(KrausPair::new(Complex64::new(1.1, 0.0)).is_err());
    }

    #[test]
    fn dicke_embedding_two_spins() {
        let psi = embed_dicke_vector(&CollectiveState::dicke(2, 1).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // |eg⟩ = index 1, |ge⟩ = index 2
        assert!((psi[1] - h).norm() < 1e-15 && (psi[2] - h).norm() < 1e-15);
        assert_eq!(psi[0], ZERO);
        assert_eq!(psi[3], ZERO);
        let ground = embed_dicke_vector(&CollectiveState::ground(3).unwrap()).unwrap();
        assert_eq!(ground[7], ONE);
    }
}
