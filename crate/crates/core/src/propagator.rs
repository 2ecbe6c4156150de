//! Time-domain solution of the memory-kernel equation
//!
//! ```text
//! u̇(t) + i ω₀ u(t) + ∫₀^t f(t-τ) u(τ) dτ = 0,   u(0) = 1,
//! ```
//!
//! together with the Born–Markov closed form and the time-local rates
//! Γ(t) + iΩ(t) = -u̇(t)/u(t).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{GL8_NODES, GL8_WEIGHTS};
use crate::spectral::SpectralModel;

/// Below this modulus the rates -u̇/u are reported as invalid.
pub const RATE_FLOOR: f64 = 1e-14;

/// Default step for ω_c = 50 ω₀.
pub const DEFAULT_DT: f64 = 2.5e-3;

#[derive(Debug, Clone)]
pub struct PropagatorTrajectory {
    pub model: SpectralModel,
    pub dt: f64,
    pub t_grid: Vec<f64>,
    pub u: Vec<Complex64>,
    /// u̇ from the right-hand side of the memory equation.
    pub u_dot: Vec<Complex64>,
    /// Γ(t); NaN where `valid_rate` is false.
    pub gamma: Vec<f64>,
    /// Ω(t); NaN where `valid_rate` is false.
    pub omega_shift: Vec<f64>,
    pub valid_rate: Vec<bool>,
}

impl PropagatorTrajectory {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.t_grid.last().unwrap_or(&0.0)
    }

    /// Index of the grid time nearest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.len() - 1)
    }

    /// u at the grid time nearest to `t`.
    pub fn u_near(&self, t: f64) -> Complex64 {
        self.u[self.index_of(t)]
    }

    /// Γ(t) + iΩ(t) at grid index `k`, if valid.
    pub fn rate(&self, k: usize) -> Option<Complex64> {
        self.valid_rate[k].then(|| Complex64::new(self.gamma[k], self.omega_shift[k]))
    }
}

/// Γ + iΩ = -u̇/u per sample; samples with |u| below [`RATE_FLOOR`] are
/// flagged invalid and carry NaN.
fn rates(u: &[Complex64], u_dot: &[Complex64]) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut gamma = Vec::with_capacity(u.len());
    let mut omega_shift = Vec::with_capacity(u.len());
    let mut valid = Vec::with_capacity(u.len());
    for (uk, dk) in u.iter().zip(u_dot) {
        if uk.norm() >= RATE_FLOOR {
            let r = -dk / uk;
            gamma.push(r.re);
            omega_shift.push(r.im);
            valid.push(true);
        } else {
            gamma.push(f64::NAN);
            omega_shift.push(f64::NAN);
            valid.push(false);
        }
    }
    (gamma, omega_shift, valid)
}

/// Largest admissible step: 0.05 / max(ω₀, ω_c/10).
pub fn max_dt(model: &SpectralModel) -> f64 {
    0.05 / model.omega0.max(model.omega_c / 10.0)
}

/// Dot product Σ a_k b_k of complex sequences stored as split real/imaginary
/// parts. Four independent accumulators let the loop vectorise.
fn dot_split(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    let n = ar.len();
    let (mut re, mut im) = ([0.0f64; 4], [0.0f64; 4]);
    let chunks = n / 4;
    for c in 0..chunks {
        let o = 4 * c;
        for l in 0..4 {
            let (xr, xi, yr, yi) = (ar[o + l], ai[o + l], br[o + l], bi[o + l]);
            re[l] += xr * yr - xi * yi;
            im[l] += xr * yi + xi * yr;
        }
    }
    let mut sr = (re[0] + re[1]) + (re[2] + re[3]);
    let mut si = (im[0] + im[1]) + (im[2] + im[3]);
    for k in 4 * chunks..n {
        sr += ar[k] * br[k] - ai[k] * bi[k];
        si += ar[k] * bi[k] + ai[k] * br[k];
    }
    (sr, si)
}

/// Product-integration weights of the memory integral on lag segment
/// [m dt, (m+1) dt]: (α_m, β_m) multiply u at the near and far end of the
/// segment when u is linear across it. α_m + β_m = ∫ f over the segment.
fn segment_weights(model: &SpectralModel, m: usize, dt: f64) -> (Complex64, Complex64) {
    let half = 0.5 * dt;
    let center = (m as f64 + 0.5) * dt;
    let (mut near, mut far) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        for xi in [-x, *x] {
            let f = model.correlation(center + half * xi) * (w * half);
            // Linear hat: weight (1 - xi)/2 on the near end, (1 + xi)/2 on the far end.
            near += f * (0.5 * (1.0 - xi));
            far += f * (0.5 * (1.0 + xi));
        }
    }
    (near, far)
}

/// Second-order solution on a uniform grid. The memory integral treats u as
/// piecewise linear between stored samples and integrates the kernel against
/// it exactly (product trapezoidal rule), so the short kernel correlation time
/// 1/ω_c does not limit accuracy. The local step is the implicit trapezoid;
/// the local term is linear in u_{n+1}, so the corrector is solved in closed
/// form instead of iterated.
pub fn solve_volterra(model: &SpectralModel, t_max: f64, dt: f64) -> Result<PropagatorTrajectory> {
    model.validate()?;
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::Argument(format!("t_max = {t_max} must be positive")));
    }
    let limit = max_dt(model);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Argument(format!("dt = {dt} must lie in (0, {limit}]")));
    }
    let steps = (t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let len = steps + 1;

    // I_n = α_0 u_n + Σ_{l=1}^{n-1} w_l u_{n-l} + β_{n-1} u_0, w_l = α_l + β_{l-1}.
    // Interior weights are stored reversed: wr[i] = w_{steps - i}.
    let segments: Vec<(Complex64, Complex64)> = (0..steps).map(|m| segment_weights(model, m, dt)).collect();
    let mut wr = vec![0.0; len];
    let mut wi = vec![0.0; len];
    for l in 1..steps {
        let w = segments[l].0 + segments[l - 1].1;
        wr[steps - l] = w.re;
        wi[steps - l] = w.im;
    }
    let alpha0 = segments[0].0;
    let iw0 = Complex64::new(0.0, model.omega0);
    let local = iw0 + alpha0;

    let mut ur = vec![0.0; len];
    let mut ui = vec![0.0; len];
    let mut u_dot = Vec::with_capacity(len);
    ur[0] = 1.0;
    u_dot.push(-iw0);
    let denom = Complex64::new(1.0, 0.0) + local * (0.5 * dt);

    for n in 0..steps {
        // History of I_{n+1} excluding its u_{n+1} term.
        let start = steps - n;
        let (hr, hi) = dot_split(&ur[1..=n], &ui[1..=n], &wr[start..steps], &wi[start..steps]);
        let history = Complex64::new(hr, hi) + segments[n].1 * Complex64::new(ur[0], ui[0]);

        let un = Complex64::new(ur[n], ui[n]);
        let next = (un + (u_dot[n] - history) * (0.5 * dt)) / denom;
        ur[n + 1] = next.re;
        ui[n + 1] = next.im;
        u_dot.push(-local * next - history);
    }

    let u: Vec<Complex64> = ur.iter().zip(&ui).map(|(&r, &i)| Complex64::new(r, i)).collect();
    let (gamma, omega_shift, valid_rate) = rates(&u, &u_dot);
    Ok(PropagatorTrajectory {
        model: *model,
        dt,
        t_grid: (0..len).map(|k| k as f64 * dt).collect(),
        u,
        u_dot,
        gamma,
        omega_shift,
        valid_rate,
    })
}

/// Born–Markov propagator u_BMA(t) = exp{-[κ + i(ω₀ + Δ(ω₀))] t}.
pub fn u_bma(model: &SpectralModel, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::domain("u_bma", format!("t = {t} < 0")));
    }
    let kappa = model.markov_kappa();
    let shift = model.lamb_shift(model.omega0)?;
    Ok((-Complex64::new(kappa, model.omega0 + shift) * t).exp())
}
