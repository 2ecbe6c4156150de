//! Ohmic-family spectral density and the scalar functionals built on it.
//!
//! J(ω) = η ω^s ω_c^(1-s) e^(-ω/ω_c). Frequencies are in units of the spin
//! frequency ω₀ by default, times in units of 1/ω₀.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{Estimate, Quadrature};
use crate::special::gamma;

/// Relative bound on the neglected tail of ∫J(ω)dω beyond the truncation point.
pub const TAIL_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub omega0: f64,
    pub eta: f64,
    pub s: f64,
    pub omega_c: f64,
}

impl SpectralModel {
    pub fn new(omega0: f64, eta: f64, s: f64, omega_c: f64) -> Result<Self> {
        let model = Self { omega0, eta, s, omega_c };
        model.validate()?;
        Ok(model)
    }

    /// Ohmic-family model with ω₀ = 1.
    pub fn ohmic(eta: f64, s: f64, omega_c: f64) -> Result<Self> {
        Self::new(1.0, eta, s, omega_c)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega0 > 0.0
            && self.eta >= 0.0
            && self.s > 0.0
            && self.omega_c > 0.0
            && self.omega0.is_finite()
            && self.eta.is_finite()
            && self.s.is_finite()
            && self.omega_c.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "spectral model requires omega0 > 0, eta >= 0, s > 0, omega_c > 0 (got {self:?})"
            )))
        }
    }

    /// Same dimensionless physics with every frequency multiplied by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self { omega0: self.omega0 * lambda, omega_c: self.omega_c * lambda, ..*self }
    }

    /// J(ω) without the domain check; callers guarantee ω ≥ 0.
    #[inline]
    pub(crate) fn j(&self, omega: f64) -> f64 {
        if omega <= 0.0 || self.eta == 0.0 {
            return 0.0;
        }
        let x = omega / self.omega_c;
        let power = if self.s == 1.0 { x } else { x.powf(self.s) };
        self.eta * self.omega_c * power * (-x).exp()
    }

    /// Spectral density J(ω).
    pub fn density(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::domain("spectral density", format!("omega = {omega} < 0")));
        }
        Ok(self.j(omega))
    }

    /// Environmental correlation function f(t) = ∫₀^∞ J(ω) e^(-iωt) dω in
    /// closed form, η ω_c^(1-s) Γ(s+1) (1/ω_c + i t)^(-(s+1)).
    pub fn correlation(&self, t: f64) -> Complex64 {
        if self.eta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let base = Complex64::new(1.0 / self.omega_c, t);
        let prefactor = self.eta * self.omega_c.powf(1.0 - self.s) * gamma(self.s + 1.0);
        base.powf(-(self.s + 1.0)) * prefactor
    }

    /// Markovian decay rate κ = π J(ω₀).
    pub fn markov_kappa(&self) -> f64 {
        PI * self.j(self.omega0)
    }

    /// Coupling above which a bound state forms: η_c = ω₀ / (ω_c Γ(s)).
    pub fn eta_critical(&self) -> f64 {
        self.omega0 / (self.omega_c * gamma(self.s))
    }

    /// Y(0) = ω₀ - ∫J(ω)/ω dω = ω₀ - η ω_c Γ(s).
    pub fn y_at_zero(&self) -> f64 {
        self.omega0 - self.eta * self.omega_c * gamma(self.s)
    }

    /// Upper limit used for every ∫₀^∞ dω over J. Starts at ω_c·max(40, s+40)
    /// and is widened until [`Self::tail_bound`] drops below [`TAIL_TOLERANCE`].
    pub fn cutoff(&self) -> f64 {
        let mut x = 40.0_f64.max(self.s + 40.0);
        while relative_tail_bound(self.s, x) >= TAIL_TOLERANCE {
            x += 10.0;
        }
        x * self.omega_c
    }

    /// Upper bound on ∫_L^∞ J dω / ∫_0^∞ J dω at L = [`Self::cutoff`].
    pub fn tail_bound(&self) -> f64 {
        relative_tail_bound(self.s, self.cutoff() / self.omega_c)
    }

    /// Breakpoints for quadrature of J-weighted integrands over [0, cutoff]:
    /// geometric refinement from `fine` up to ω_c plus the density peak.
    pub(crate) fn breakpoints(&self, fine: Option<f64>, pole: Option<f64>) -> Vec<f64> {
        let wc = self.omega_c;
        let cutoff = self.cutoff();
        let mut pts = vec![0.0, cutoff];
        if let Some(scale) = fine.filter(|v| *v > 0.0) {
            let mut p = scale;
            while p < wc {
                pts.push(p);
                p *= 8.0;
            }
        }
        for k in [0.5, 1.0, self.s, self.s + 4.0, self.s + 12.0, self.s + 24.0] {
            pts.push(k * wc);
        }
        pts.push(self.omega0);
        if let Some(e) = pole {
            pts.push(e);
        }
        pts.retain(|p| *p >= 0.0 && *p <= cutoff);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Lamb shift Δ(E) = P∫₀^∞ J(ω)/(E - ω) dω. For E > 0 this is a
    /// principal value, evaluated by subtracting the pole: the remainder
    /// [J(ω) - J(E)]/(E - ω) is regular and J(E) ∫ dω/(E - ω) is done in
    /// closed form over the truncated range.
    pub fn lamb_shift(&self, omega_ref: f64) -> Result<f64> {
        self.lamb_shift_with(omega_ref, &Quadrature::default()).map(|e| e.value)
    }

    pub fn lamb_shift_with(&self, e: f64, quad: &Quadrature) -> Result<Estimate<f64>> {
        if !e.is_finite() {
            return Err(Error::domain("lamb shift", format!("E = {e}")));
        }
        if self.eta == 0.0 {
            return Ok(Estimate { value: 0.0, error: 0.0, intervals: 0 });
        }
        if e == 0.0 {
            if self.s <= 1.0 {
                return Err(Error::SingularEndpoint {
                    what: "lamb shift",
                    detail: format!("E = 0 with s = {} <= 1", self.s),
                });
            }
            let pts = self.breakpoints(Some(1e-6 * self.omega_c), None);
            return quad.integrate(|w| if w > 0.0 { -self.j(w) / w } else { 0.0 }, &pts);
        }
        if e < 0.0 {
            let pts = self.breakpoints(Some(e.abs()), None);
            return quad.integrate(|w| self.j(w) / (e - w), &pts);
        }

        let upper = self.cutoff().max(2.0 * e);
        let je = self.j(e);
        let mut pts = self.breakpoints(Some(e.min(self.omega0) * 1e-3), Some(e));
        pts.push(0.5 * e);
        pts.push(2.0 * e);
        pts.push(upper);
        pts.retain(|p| *p <= upper);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let regular = quad.integrate(
            |w| {
                let d = e - w;
                if d == 0.0 {
                    0.0
                } else {
                    (self.j(w) - je) / d
                }
            },
            &pts,
        )?;
        let pole = je * (e / (upper - e)).ln();
        Ok(Estimate { value: regular.value + pole, ..regular })
    }
}

fn relative_tail_bound(s: f64, x: f64) -> f64 {
    // Γ(s+1, x) ≤ x^s e^(-x) / (1 - s/x) for x > s; normalised by Γ(s+1).
    if x <= s {
        return f64::INFINITY;
    }
    (s * x.ln() - x - crate::special::ln_gamma(s + 1.0)).exp() / (1.0 - s / x)
}
