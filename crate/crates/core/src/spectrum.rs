//! Laplace-domain analysis of the single-spin propagator: the self-energy
//! function Y(E), the bound state below the continuum, the branch-cut density
//! C(E) and the contour-integral representation
//! u(t) = Z e^(-i E_b t) + ∫₀^∞ C(E) e^(-iEt) dE.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{Estimate, Quadrature, GL8_NODES, GL8_WEIGHTS};
use crate::spectral::SpectralModel;

/// Residual |Y(E_b) - E_b| required of the bound-state root.
pub const ROOT_TOLERANCE: f64 = 1e-10;

/// Below this |E_b| the residue integral is not trusted.
pub const DEGENERATE_ENERGY: f64 = 1e-8;

/// Y(E) = ω₀ - ∫₀^∞ J(ω)/(ω - E) dω, defined for E < 0.
pub fn y_of_e(model: &SpectralModel, e: f64) -> Result<f64> {
    if !(e < 0.0) {
        return Err(Error::domain("Y(E)", format!("E = {e} must be below the continuum (E < 0)")));
    }
    Ok(model.omega0 + model.lamb_shift(e)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundStateReport {
    pub exists: bool,
    pub e_b: Option<f64>,
    /// Residue Z; `None` when no bound state exists or when the bound state is
    /// too close to threshold for the residue to be resolved.
    pub z_residue: Option<f64>,
    pub eta_critical: f64,
    pub y_at_zero: f64,
    /// |Y(E_b) - E_b| at the reported root.
    pub residual: Option<f64>,
    pub threshold_degenerate: bool,
}

impl BoundStateReport {
    /// Z when resolved, 0 when there is no bound state.
    pub fn z_or_zero(&self) -> f64 {
        self.z_residue.unwrap_or(0.0)
    }
}

/// Locates the isolated root of Y(E) = E below the continuum, if any.
pub fn find_bound_state(model: &SpectralModel) -> Result<BoundStateReport> {
    let y0 = model.y_at_zero();
    if y0 >= 0.0 {
        return Ok(BoundStateReport {
            exists: false,
            e_b: None,
            z_residue: None,
            eta_critical: model.eta_critical(),
            y_at_zero: y0,
            residual: None,
            threshold_degenerate: false,
        });
    }
    bound_state_in(model, y0, 0.0)
}

/// Bisection for the bound state on `[lo, hi]` with `lo < hi <= 0`. The
/// bracket must satisfy Y(lo) - lo >= 0 > Y(hi) - hi; `hi = 0` uses the
/// closed-form limit Y(0⁻).
pub fn bound_state_in(model: &SpectralModel, lo: f64, hi: f64) -> Result<BoundStateReport> {
    let y0 = model.y_at_zero();
    let g = |e: f64| -> Result<f64> {
        if e == 0.0 {
            Ok(y0)
        } else {
            Ok(y_of_e(model, e)? - e)
        }
    };
    if !(lo < hi && hi <= 0.0) {
        return Err(Error::Argument(format!("bound-state bracket [{lo}, {hi}] is not below zero")));
    }
    let (mut a, mut b) = (lo, hi);
    let ga = g(a)?;
    let gb = g(b)?;
    if !(ga >= 0.0 && gb < 0.0) {
        return Err(Error::NonConvergence { what: "bound-state bracket", estimate: ga.min(-gb) });
    }
    if ga == 0.0 {
        return finish_bound_state(model, a, 0.0);
    }

    let mut best = (a, ga.abs());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid)?;
        if gm.abs() < best.1 {
            best = (mid, gm.abs());
        }
        if gm >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if best.1 < 1e-3 * ROOT_TOLERANCE || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(1e-300) {
            break;
        }
    }
    if best.1 >= ROOT_TOLERANCE {
        return Err(Error::NonConvergence { what: "bound-state bisection", estimate: best.1 });
    }
    finish_bound_state(model, best.0, best.1)
}

fn finish_bound_state(model: &SpectralModel, e_b: f64, residual: f64) -> Result<BoundStateReport> {
    let degenerate = e_b.abs() <= DEGENERATE_ENERGY;
    let z = if degenerate { None } else { Some(residue(model, e_b)?) };
    Ok(BoundStateReport {
        exists: true,
        e_b: Some(e_b),
        z_residue: z,
        eta_critical: model.eta_critical(),
        y_at_zero: model.y_at_zero(),
        residual: Some(residual),
        threshold_degenerate: degenerate,
    })
}

/// Z = [1 + ∫₀^∞ J(ω)/(E_b - ω)² dω]^(-1).
pub fn residue(model: &SpectralModel, e_b: f64) -> Result<f64> {
    if !(e_b < 0.0) {
        return Err(Error::domain("residue", format!("E_b = {e_b} must be negative")));
    }
    let pts = model.breakpoints(Some(e_b.abs()), None);
    let q = Quadrature::default();
    let integral = q.integrate(
        |w| {
            let d = e_b - w;
            model.j(w) / (d * d)
        },
        &pts,
    )?;
    Ok(1.0 / (1.0 + integral.value))
}

/// Branch-cut density C(E) = J(E) / {[E - ω₀ - Δ(E)]² + [πJ(E)]²}, E > 0.
pub fn branch_cut_density(model: &SpectralModel, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::domain("branch-cut density", format!("E = {e} must be positive")));
    }
    if model.eta == 0.0 {
        return Ok(0.0);
    }
    let j = model.j(e);
    if j == 0.0 {
        return Ok(0.0);
    }
    let detuning = e - model.omega0 - model.lamb_shift(e)?;
    let width = PI * j;
    Ok(j / (detuning * detuning + width * width))
}

/// ∫₀^∞ C(E) dE by adaptive quadrature of the exact density.
pub fn continuum_weight(model: &SpectralModel) -> Result<Estimate<f64>> {
    if model.eta == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, intervals: 0 });
    }
    let pts = model.breakpoints(Some(1e-3 * model.omega0), None);
    let q = Quadrature { abs_tol: 1e-11, rel_tol: 1e-10, max_intervals: 2000 };
    // Evaluation failures inside the integrand are surfaced afterwards.
    let failure = std::cell::Cell::new(None);
    let est = q.integrate(
        |e| {
            if e <= 0.0 {
                return 0.0;
            }
            match branch_cut_density(model, e) {
                Ok(c) => c,
                Err(err) => {
                    failure.set(Some(err));
                    0.0
                }
            }
        },
        &pts,
    )?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    Ok(est)
}

/// Bound-state term of u(t) at long times: Z e^(-i E_b t), or 0.
pub fn u_asymptotic(report: &BoundStateReport, t: f64) -> Complex64 {
    match (report.exists, report.e_b, report.z_residue) {
        (true, Some(e_b), Some(z)) => Complex64::from_polar(z, -e_b * t),
        _ => Complex64::new(0.0, 0.0),
    }
}

const CHEB_NODES: usize = 16;
/// Chebyshev interpolant of C(E) on one subinterval.
#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    values: [f64; CHEB_NODES],
}

fn cheb_node(j: usize) -> f64 {
    (((2 * j + 1) as f64) * PI / (2 * CHEB_NODES) as f64).cos()
}

fn cheb_weight(j: usize) -> f64 {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * (((2 * j + 1) as f64) * PI / (2 * CHEB_NODES) as f64).sin()
}

impl Panel {
    fn eval(&self, e: f64) -> f64 {
        let x = (2.0 * e - self.a - self.b) / (self.b - self.a);
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..CHEB_NODES {
            let d = x - cheb_node(j);
            if d == 0.0 {
                return self.values[j];
            }
            let w = cheb_weight(j) / d;
            num += w * self.values[j];
            den += w;
        }
        num / den
    }
}

/// Piecewise-Chebyshev table of C(E) on [0, E_max], E_max = 40 ω_c, used to
/// evaluate the oscillatory continuum integral at many times.
#[derive(Debug, Clone)]
pub struct BranchCut {
    model: SpectralModel,
    panels: Vec<Panel>,
    e_max: f64,
}

impl BranchCut {
    const ABS_TOL: f64 = 1e-11;
    const REL_TOL: f64 = 1e-9;

    pub fn new(model: &SpectralModel) -> Result<Self> {
        let e_max = 40.0 * model.omega_c;
        let mut bounds = model.breakpoints(Some(1e-4 * model.omega0), None);
        bounds.retain(|p| *p < e_max);
        bounds.push(e_max);
        let mut work: Vec<(f64, f64)> = bounds.windows(2).rev().map(|w| (w[0], w[1])).collect();
        let mut panels = Vec::new();
        let density = |e: f64| if e <= 0.0 { Ok(0.0) } else { branch_cut_density(model, e) };

        while let Some((a, b)) = work.pop() {
            let mut values = [0.0; CHEB_NODES];
            for (j, v) in values.iter_mut().enumerate() {
                *v = density(0.5 * (a + b) + 0.5 * (b - a) * cheb_node(j))?;
            }
            let panel = Panel { a, b, values };
            let mut ok = true;
            for frac in [0.021, 0.13, 0.51, 0.87, 0.979] {
                let e = a + frac * (b - a);
                let exact = density(e)?;
                if (panel.eval(e) - exact).abs() > Self::ABS_TOL + Self::REL_TOL * exact.abs() {
                    ok = false;
                    break;
                }
            }
            if ok || (b - a) < 1e-12 * b.max(1.0) {
                panels.push(panel);
            } else {
                let mid = 0.5 * (a + b);
                work.push((mid, b));
                work.push((a, mid));
            }
        }
        Ok(Self { model: *model, panels, e_max })
    }

    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    /// Interpolated C(E); zero outside [0, E_max].
    pub fn density(&self, e: f64) -> f64 {
        if e <= 0.0 || e > self.e_max {
            return 0.0;
        }
        let idx = self.panels.partition_point(|p| p.b < e).min(self.panels.len() - 1);
        self.panels[idx].eval(e)
    }

    /// Panel width resolving the phase e^(-iEt) up to time `t_max`.
    pub fn panel_width(&self, t_max: f64) -> f64 {
        let coarse = self.model.omega_c / 20.0;
        if t_max > 0.0 {
            coarse.min(PI / (8.0 * t_max))
        } else {
            coarse
        }
    }

    /// Quadrature nodes (E_i, w_i C(E_i)) on fixed panels of width at most
    /// [`Self::panel_width`]`(t_max)`. The 8-point rule integrates each
    /// degree-15 interpolant exactly at t = 0.
    fn weighted_nodes(&self, t_max: f64) -> Vec<(f64, f64)> {
        let width = self.panel_width(t_max);
        let mut nodes = Vec::new();
        for panel in &self.panels {
            let len = panel.b - panel.a;
            let count = (len / width).ceil().max(1.0) as usize;
            let h = len / count as f64;
            for k in 0..count {
                let c = panel.a + (k as f64 + 0.5) * h;
                let half = 0.5 * h;
                for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
                    for e in [c - half * x, c + half * x] {
                        let v = panel.eval(e) * w * half;
                        if v != 0.0 {
                            nodes.push((e, v));
                        }
                    }
                }
            }
        }
        nodes
    }

    /// ∫₀^E_max C(E) e^(-iEt) dE.
    pub fn transform(&self, t: f64) -> Complex64 {
        self.transform_many(&[t])[0]
    }

    /// Continuum integral at several times, sharing one node set resolved
    /// for the largest time.
    pub fn transform_many(&self, times: &[f64]) -> Vec<Complex64> {
        let t_max = times.iter().cloned().fold(0.0, f64::max);
        let nodes = self.weighted_nodes(t_max);
        times
            .iter()
            .map(|&t| {
                let (mut re, mut im) = (0.0, 0.0);
                for &(e, w) in &nodes {
                    let (s, c) = (e * t).sin_cos();
                    re += w * c;
                    im -= w * s;
                }
                Complex64::new(re, im)
            })
            .collect()
    }
}

/// Spectral representation of the propagator: bound-state pole plus
/// tabulated branch cut.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub report: BoundStateReport,
    pub cut: BranchCut,
}

impl SpectralPropagator {
    pub fn new(model: &SpectralModel) -> Result<Self> {
        let report = find_bound_state(model)?;
        if report.threshold_degenerate {
            return Err(Error::NonConvergence {
                what: "spectral propagator near threshold",
                estimate: report.e_b.unwrap_or(0.0).abs(),
            });
        }
        Ok(Self { report, cut: BranchCut::new(model)? })
    }

    pub fn u(&self, t: f64) -> Complex64 {
        self.u_many(&[t])[0]
    }

    pub fn u_many(&self, times: &[f64]) -> Vec<Complex64> {
        self.cut
            .transform_many(times)
            .into_iter()
            .zip(times)
            .map(|(c, &t)| c + u_asymptotic(&self.report, t))
            .collect()
    }
}

/// u(t) from the contour-integral representation.
pub fn u_spectral(model: &SpectralModel, t: f64) -> Result<Complex64> {
    if !(t >= 0.0) {
        return Err(Error::domain("u_spectral", format!("t = {t} < 0")));
    }
    Ok(SpectralPropagator::new(model)?.u(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(eta: f64) -> SpectralModel {
        SpectralModel::ohmic(eta, 1.0, 50.0).unwrap()
    }

    #[test]
    fn y_without_coupling_is_bare_frequency() {
        assert_eq!(y_of_e(&model(0.0), -1.0).unwrap(), 1.0);
        assert!(y_of_e(&model(0.03), 0.0).is_err());
        assert!(y_of_e(&model(0.03), 0.5).is_err());
    }

    #[test]
    fn y_is_decreasing_and_tends_to_closed_form() {
        let m = model(0.03);
        assert!(y_of_e(&m, -2.0).unwrap() > y_of_e(&m, -1.0).unwrap());
        let near = y_of_e(&m, -1e-9).unwrap();
        assert!((near - (-0.5)).abs() < 1e-6, "{near}");
    }

    #[test]
    fn no_bound_state_below_threshold() {
        let r = find_bound_state(&model(0.01)).unwrap();
        assert!(!r.exists && r.e_b.is_none() && r.z_residue.is_none());
        assert!(r.y_at_zero > 0.0);
    }

    #[test]
    fn bound_state_above_threshold() {
        let m = model(0.03);
        let r = find_bound_state(&m).unwrap();
        assert!(r.exists);
        let e_b = r.e_b.unwrap();
        assert!(e_b < 0.0);
        assert!((y_of_e(&m, e_b).unwrap() - e_b).abs() < ROOT_TOLERANCE);
        let z = r.z_residue.unwrap();
        assert!(z > 0.0 && z <= 1.0);
    }

    #[test]
    fn near_threshold_bound_state() {
        let m = model(0.021);
        assert!((m.y_at_zero() + 0.05).abs() < 1e-12);
        let r = find_bound_state(&m).unwrap();
        assert!(r.exists);
        let e_b = r.e_b.unwrap();
        assert!(e_b < 0.0 && e_b > -0.1, "{e_b}");
    }

    #[test]
    fn density_domain_and_zero_coupling() {
        assert!(branch_cut_density(&model(0.03), 0.0).is_err());
        assert_eq!(branch_cut_density(&model(0.0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn asymptote_is_a_pure_phase() {
        let r = find_bound_state(&model(0.03)).unwrap();
        let z = r.z_residue.unwrap();
        assert!((u_asymptotic(&r, 0.0).re - z).abs() < 1e-15);
        for t in [1.0, 37.0, 400.0] {
            assert!((u_asymptotic(&r, t).norm() - z).abs() < 1e-14);
        }
        let none = find_bound_state(&model(0.01)).unwrap();
        assert_eq!(u_asymptotic(&none, 10.0), Complex64::new(0.0, 0.0));
    }
}
