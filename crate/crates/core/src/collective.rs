//! Collective-spin algebra in the Dicke basis |j, m⟩, m = -j..j, j = N/2, and
//! preparation of one-axis (OAT) and two-axis (TAT) twisted states.
//!
//! Amplitudes are indexed by i = m + j, so index 0 is the lowest-weight state
//! |j, -j⟩ (all spins in the ground state).

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::squeezing::xi2_tat_formula;
use crate::squeezing::xi2_oat_formula;

#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveState {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl CollectiveState {
    /// |j, -j⟩.
    pub fn ground(n: usize) -> Result<Self> {
        check_n(n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n + 1];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    /// |j, m⟩ with m = index - j.
    pub fn dicke(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        if index > n {
            return Err(Error::Argument(format!("Dicke index {index} exceeds n = {n}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n + 1];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    /// Normalises arbitrary amplitudes of length n + 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len().saturating_sub(1);
        check_n(n)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Argument("state has zero or non-finite norm".into()));
        }
        Ok(Self { n, amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    pub fn j(&self) -> f64 {
        0.5 * self.n as f64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Argument(format!("collective states need n >= 2 spins (got {n})")));
    }
    Ok(())
}

/// √(j(j+1) - m(m+1)): matrix element ⟨j, m+1|J_+|j, m⟩ for m = i - j.
#[inline]
fn raise_coeff(n: usize, i: usize) -> f64 {
    // j(j+1) - m(m+1) = (j - m)(j + m + 1) = (n - i)(i + 1)
    (((n - i) * (i + 1)) as f64).sqrt()
}

/// Dense collective operators on the (n+1)-dimensional Dicke space.
#[derive(Debug, Clone)]
pub struct DickeOperators {
    pub jx: DMatrix<Complex64>,
    pub jy: DMatrix<Complex64>,
    pub jz: DMatrix<Complex64>,
    pub jp: DMatrix<Complex64>,
    pub jm: DMatrix<Complex64>,
}

pub fn dicke_operators(n: usize) -> Result<DickeOperators> {
    check_n(n)?;
    let d = n + 1;
    let j = 0.5 * n as f64;
    let zero = Complex64::new(0.0, 0.0);
    let mut jp = DMatrix::from_element(d, d, zero);
    let mut jz = DMatrix::from_element(d, d, zero);
    for i in 0..d {
        jz[(i, i)] = Complex64::new(i as f64 - j, 0.0);
        if i + 1 < d {
            jp[(i + 1, i)] = Complex64::new(raise_coeff(n, i), 0.0);
        }
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * Complex64::new(0.5, 0.0);
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    Ok(DickeOperators { jx, jy, jz, jp, jm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwistKind {
    Oat,
    Tat,
}

/// Spectral decomposition of a twisting generator restricted to the parity
/// sector of |j, -j⟩ (even indices), reused for any twist angle Θ.
///
/// OAT: the sector block of J_x² is real symmetric, S = V Λ Vᵀ, and the state
/// is V e^(-iΘΛ) Vᵀ e₀. TAT: the block G of J_+² - J_-² is real antisymmetric
/// and tridiagonal; with D = diag(i^k), D⁻¹ G D = iS for the real symmetric S
/// with S_{k,k+1} = G_{k,k+1}, so exp(ΘG) e₀ = D V e^(iΘΛ) Vᵀ e₀.
#[derive(Debug, Clone)]
pub struct TwistFamily {
    pub n: usize,
    pub kind: TwistKind,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl TwistFamily {
    pub fn new(n: usize, kind: TwistKind) -> Result<Self> {
        check_n(n)?;
        let dim = n / 2 + 1;
        let jj = 0.5 * n as f64 * (0.5 * n as f64 + 1.0);
        let mut s = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..dim {
            let i = 2 * k;
            let m = i as f64 - 0.5 * n as f64;
            // ⟨j, m+2|J_+²|j, m⟩
            let up2 = if i + 2 <= n { raise_coeff(n, i) * raise_coeff(n, i + 1) } else { 0.0 };
            match kind {
                TwistKind::Oat => {
                    // J_x² = (J_+² + J_-² + J_+J_- + J_-J_+)/4
                    s[(k, k)] = 0.5 * (jj - m * m);
                    if k + 1 < dim {
                        s[(k + 1, k)] = 0.25 * up2;
                        s[(k, k + 1)] = 0.25 * up2;
                    }
                }
                TwistKind::Tat => {
                    // G_{k+1,k} = +up2, G_{k,k+1} = -up2; S_{k,k+1} = G_{k,k+1}
                    if k + 1 < dim {
                        s[(k + 1, k)] = -up2;
                        s[(k, k + 1)] = -up2;
                    }
                }
            }
        }
        let eig = SymmetricEigen::new(s);
        Ok(Self { n, kind, eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors })
    }

    pub fn state(&self, theta: f64) -> CollectiveState {
        let dim = self.eigenvalues.len();
        let sign = match self.kind {
            TwistKind::Oat => -1.0,
            TwistKind::Tat => 1.0,
        };
        // c = e^(±iΘΛ) Vᵀ e₀
        let coeffs: Vec<Complex64> = (0..dim)
            .map(|a| Complex64::from_polar(self.eigenvectors[(0, a)], sign * theta * self.eigenvalues[a]))
            .collect();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.n + 1];
        for k in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, c) in coeffs.iter().enumerate() {
                acc += c * self.eigenvectors[(k, a)];
            }
            if self.kind == TwistKind::Tat {
                acc *= Complex64::i().powu(k as u32 % 4);
            }
            amplitudes[2 * k] = acc;
        }
        // Renormalise away roundoff of the orthogonal transform.
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amplitudes {
            *a /= norm;
        }
        CollectiveState { n: self.n, amplitudes }
    }
}

/// e^(-iΘJ_x²)|j, -j⟩.
pub fn oat_state(n: usize, theta: f64) -> Result<CollectiveState> {
    Ok(TwistFamily::new(n, TwistKind::Oat)?.state(theta))
}

/// exp(Θ(J_+² - J_-²))|j, -j⟩.
pub fn tat_state(n: usize, theta: f64) -> Result<CollectiveState> {
    Ok(TwistFamily::new(n, TwistKind::Tat)?.state(theta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialMoments {
    pub n: usize,
    pub jz_mean: f64,
    /// ⟨J_x² + J_y²⟩
    pub jperp2_sum: f64,
    /// ⟨J_-²⟩
    pub jminus2: Complex64,
    /// ⟨σ₁^z⟩
    pub sigma_z_single: f64,
    /// ⟨σ₁σ₂†⟩, real for permutation-symmetric states.
    pub pair_pm: Complex64,
    /// ⟨σ₁σ₂⟩
    pub pair_mm: Complex64,
}

impl InitialMoments {
    /// ⟨J_x² + J_y²⟩ and ⟨J_-²⟩ rebuilt from the pair correlators.
    pub fn from_pairs(&self) -> (f64, Complex64) {
        let nf = self.n as f64;
        let pairs = nf * (nf - 1.0);
        (0.5 * nf + pairs * self.pair_pm.re, self.pair_mm * pairs)
    }
}

/// ⟨J_z⟩, ⟨J_z²⟩ and ⟨J_-²⟩ by direct action of the Dicke-basis operators.
fn dicke_expectations(state: &CollectiveState) -> (f64, f64, Complex64) {
    let n = state.n;
    let j = state.j();
    let c = &state.amplitudes;
    let mut jz = 0.0;
    let mut jz2 = 0.0;
    let mut jm2 = Complex64::new(0.0, 0.0);
    for i in 0..=n {
        let m = i as f64 - j;
        let p = c[i].norm_sqr();
        jz += m * p;
        jz2 += m * m * p;
        if i >= 2 {
            // J_-²|i⟩ = raise(i-2) raise(i-1) |i-2⟩
            jm2 += c[i - 2].conj() * c[i] * (raise_coeff(n, i - 2) * raise_coeff(n, i - 1));
        }
    }
    (jz, jz2, jm2)
}

pub fn initial_moments(state: &CollectiveState) -> InitialMoments {
    let n = state.n;
    let nf = n as f64;
    let j = state.j();
    let (jz, jz2, jm2) = dicke_expectations(state);
    let jperp2 = j * (j + 1.0) - jz2;
    let pairs = nf * (nf - 1.0);
    InitialMoments {
        n,
        jz_mean: jz,
        jperp2_sum: jperp2,
        jminus2: jm2,
        sigma_z_single: 2.0 * jz / nf,
        pair_pm: Complex64::new(0.5 * (2.0 * jperp2 / nf - 1.0) / (nf - 1.0), 0.0),
        pair_mm: jm2 / pairs,
    }
}

pub const THETA_MIN: f64 = 1e-4;
pub const THETA_MAX: f64 = FRAC_PI_4;
const COARSE_POINTS: usize = 400;
const FALLBACK_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaOptimum {
    pub theta: f64,
    pub xi2: f64,
    /// The coarse grid did not bracket an interior minimum and a dense scan
    /// was used instead.
    pub fallback_scan: bool,
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a) > 1e-12 * (a.abs() + b.abs()) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Minimises ξ²(Θ) over [`THETA_MIN`, `THETA_MAX`]: a log-spaced coarse grid
/// followed by golden-section refinement of the best bracket.
pub fn minimize_over_theta(f: &dyn Fn(f64) -> f64) -> ThetaOptimum {
    let ratio = (THETA_MAX / THETA_MIN).ln();
    let grid: Vec<f64> = (0..COARSE_POINTS)
        .map(|k| THETA_MIN * (ratio * k as f64 / (COARSE_POINTS - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let (best, &best_value) =
        values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty grid");
    let worst = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if worst - best_value <= 1e-15 {
        return ThetaOptimum { theta: grid[0], xi2: best_value, fallback_scan: false };
    }
    if best > 0 && best + 1 < COARSE_POINTS {
        let (theta, xi2) = golden_section(f, grid[best - 1], grid[best + 1]);
        if xi2 <= best_value {
            return ThetaOptimum { theta, xi2, fallback_scan: false };
        }
    }
    let step = (THETA_MAX - THETA_MIN) / (FALLBACK_POINTS - 1) as f64;
    let (mut theta, mut xi2) = (grid[best], best_value);
    for k in 0..FALLBACK_POINTS {
        let t = THETA_MIN + step * k as f64;
        let v = f(t);
        if v < xi2 {
            theta = t;
            xi2 = v;
        }
    }
    let (t, v) = golden_section(f, (theta - step).max(THETA_MIN), (theta + step).min(THETA_MAX));
    if v < xi2 {
        theta = t;
        xi2 = v;
    }
    ThetaOptimum { theta, xi2, fallback_scan: true }
}

/// Twist angle minimising the squeezing parameter after a channel with the
/// given |u|², in the paper's denominator convention.
pub fn optimize_theta(n: usize, kind: TwistKind, u_mod2: f64) -> Result<ThetaOptimum> {
    check_n(n)?;
    if !(0.0..=1.0).contains(&u_mod2) {
        return Err(Error::Argument(format!("|u|^2 = {u_mod2} outside [0, 1]")));
    }
    Ok(match kind {
        TwistKind::Oat => minimize_over_theta(&|t| xi2_oat_formula(n, t, u_mod2)),
        TwistKind::Tat => {
            let family = TwistFamily::new(n, kind)?;
            minimize_over_theta(&|t| xi2_tat_formula(&initial_moments(&family.state(t)), u_mod2))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_entry(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn su2_commutators() {
        for n in [2, 10, 100] {
            let ops = dicke_operators(n).unwrap();
            let comm = &ops.jx * &ops.jy - &ops.jy * &ops.jx;
            let diff = comm - &ops.jz * Complex64::i();
            // 1e-13 absolute, unless that is below a few ulp of the entries of J_xJ_y.
            let tol = 1e-13_f64.max(4.0 * f64::EPSILON * max_entry(&(&ops.jx * &ops.jy)));
            assert!(max_entry(&diff) < tol, "n = {n}");
        }
    }

    #[test]
    fn small_operator_values() {
        let ops = dicke_operators(2).unwrap();
        for (i, m) in [-1.0, 0.0, 1.0].iter().enumerate() {
            assert_eq!(ops.jz[(i, i)], Complex64::new(*m, 0.0));
        }
        let top = CollectiveState::dicke(2, 2).unwrap();
        let v = &ops.jp * DVector::from_vec(top.amplitudes);
        assert!(v.iter().all(|z| z.norm() == 0.0));
        assert!(dicke_operators(1).is_err());
    }

    #[test]
    fn zero_twist_is_identity() {
        for kind in [TwistKind::Oat, TwistKind::Tat] {
            let s = TwistFamily::new(8, kind).unwrap().state(0.0);
            assert!((s.amplitudes[0] - 1.0).norm() < 1e-12);
            assert!(s.amplitudes[1..].iter().all(|a| a.norm() < 1e-12));
        }
    }

    #[test]
    fn ground_state_moments() {
        let m = initial_moments(&CollectiveState::ground(10).unwrap());
        assert_eq!(m.jz_mean, -5.0);
        assert!((m.jperp2_sum - 5.0).abs() < 1e-12);
        assert_eq!(m.jminus2, Complex64::new(0.0, 0.0));
        assert!(m.pair_pm.norm() < 1e-14);
    }

    #[test]
    fn flat_landscape_is_not_flagged() {
        let opt = optimize_theta(20, TwistKind::Oat, 0.0).unwrap();
        assert_eq!(opt.xi2, 1.0);
        assert!(!opt.fallback_scan);
    }
}
