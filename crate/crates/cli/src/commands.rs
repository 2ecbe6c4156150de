use std::path::{Path, PathBuf};

use nmsqueeze_core::collective::{
    initial_moments, minimize_over_theta, oat_state, optimize_theta, tat_state, CollectiveState, TwistFamily,
    TwistKind,
};
use nmsqueeze_core::husimi::{husimi_q, GridSpec, HusimiPath};
use nmsqueeze_core::oracle::KrausPair;
use nmsqueeze_core::propagator::solve_volterra;
use nmsqueeze_core::spectrum::find_bound_state;
use nmsqueeze_core::squeezing::{mean_spin_oat, xi2_oat_formula, xi2_oat_steady_asymptote, xi2_tat_formula};
use nmsqueeze_core::{Convention, Error, InitialMoments};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConventionArg, Model, RunConfig, Theta};
use crate::csv::{fmt_float, fmt_opt, Table};
use crate::error::CliError;

/// Default spacing of written samples in time units.
pub const DEFAULT_EVERY: f64 = 0.1;

/// A twisted initial state reduced to what its squeezing after the channel
/// depends on.
enum Prepared {
    Oat { n: usize, theta: f64 },
    Tat(InitialMoments),
}

impl Prepared {
    fn from_family(n: usize, kind: TwistKind, family: Option<&TwistFamily>, theta: f64) -> Self {
        match (kind, family) {
            (TwistKind::Tat, Some(f)) => Prepared::Tat(initial_moments(&f.state(theta))),
            _ => Prepared::Oat { n, theta },
        }
    }

    fn n(&self) -> usize {
        match self {
            Prepared::Oat { n, .. } => *n,
            Prepared::Tat(m) => m.n,
        }
    }

    fn xi2_paper(&self, u_mod2: f64) -> f64 {
        match self {
            Prepared::Oat { n, theta } => xi2_oat_formula(*n, *theta, u_mod2),
            Prepared::Tat(m) => xi2_tat_formula(m, u_mod2),
        }
    }

    /// ⟨J_z⟩; both twists leave the mean spin on the z axis.
    fn mean_spin_z(&self, u_mod2: f64) -> f64 {
        match self {
            Prepared::Oat { n, theta } => mean_spin_oat(*n, *theta, u_mod2)[2],
            Prepared::Tat(m) => 0.5 * m.n as f64 * (u_mod2 * (1.0 + m.sigma_z_single) - 1.0),
        }
    }

    fn xi2(&self, u_mod2: f64, convention: Convention) -> Result<f64, Error> {
        let paper = self.xi2_paper(u_mod2);
        match convention {
            Convention::Paper => Ok(paper),
            Convention::Exact => {
                let jz = self.mean_spin_z(u_mod2);
                if jz == 0.0 {
                    return Err(Error::UndefinedDirection);
                }
                let half = 0.5 * self.n() as f64;
                Ok(paper * half * half / (jz * jz))
            }
        }
    }
}

fn family_for(n: usize, kind: TwistKind) -> Result<Option<TwistFamily>, Error> {
    match kind {
        TwistKind::Oat => Ok(None),
        TwistKind::Tat => TwistFamily::new(n, kind).map(Some),
    }
}

struct ChosenTheta {
    theta: f64,
    fallback_scan: Option<bool>,
}

fn choose_theta(cfg: &RunConfig) -> Result<ChosenTheta, Error> {
    Ok(match cfg.theta {
        Theta::Value(theta) => ChosenTheta { theta, fallback_scan: None },
        Theta::Auto => {
            let opt = optimize_theta(cfg.n, cfg.model.kind(), 1.0)?;
            ChosenTheta { theta: opt.theta, fallback_scan: Some(opt.fallback_scan) }
        }
    })
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Grid indices 0, stride, 2·stride, … plus the final sample.
fn sample_indices(len: usize, dt: f64, every: f64) -> Vec<usize> {
    let stride = ((every / dt).round() as usize).max(1);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

fn check_every(every: f64) -> Result<(), CliError> {
    if every > 0.0 && every.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("sample spacing {every} must be positive")))
    }
}

pub struct EtaSweep {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl EtaSweep {
    /// η_k = min + k·step, rounded to 12 decimals so that decimal sweeps
    /// land on their nominal values.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let ok = (0.0..=1.0).contains(&self.min)
            && (0.0..=1.0).contains(&self.max)
            && self.min <= self.max
            && self.step > 0.0
            && self.step.is_finite();
        if !ok {
            return Err(CliError::Config(format!(
                "eta sweep [{}, {}] step {} must lie in [0, 1] with a positive step",
                self.min, self.max, self.step
            )));
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(CliError::Config(format!("eta sweep has {count} points; at most 10^6 are allowed")));
        }
        Ok((0..count).map(|k| ((self.min + k as f64 * self.step) * 1e12).round() / 1e12).collect())
    }
}

pub fn spectrum(cfg: &RunConfig, sweep: &EtaSweep) -> Result<PathBuf, CliError> {
    let etas = sweep.values()?;
    let rows = etas
        .par_iter()
        .map(|&eta| {
            let model = nmsqueeze_core::SpectralModel { eta, ..cfg.spectral_model()? };
            let report = find_bound_state(&model)?;
            let (e_b, z) = if report.exists { (report.e_b, report.z_residue) } else { (None, None) };
            Ok([fmt_float(eta), fmt_opt(e_b), fmt_opt(z)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(&["eta", "e_b", "z"]);
    for row in &rows {
        table.row(row);
    }
    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("spectrum.csv");
    table.write(&path)?;
    Ok(path)
}

pub fn propagate(cfg: &RunConfig, every: f64) -> Result<PathBuf, CliError> {
    check_every(every)?;
    let traj = solve_volterra(&cfg.spectral_model()?, cfg.t_max, cfg.dt)?;
    let mut table = Table::new(&["t", "re_u", "im_u", "abs_u", "gamma", "omega_shift", "valid_rate"]);
    for k in sample_indices(traj.len(), traj.dt, every) {
        let u = traj.u[k];
        let valid = traj.valid_rate[k];
        let rate = |x: f64| if valid { fmt_float(x) } else { String::new() };
        table.row(&[
            fmt_float(traj.t_grid[k]),
            fmt_float(u.re),
            fmt_float(u.im),
            fmt_float(u.norm()),
            rate(traj.gamma[k]),
            rate(traj.omega_shift[k]),
            (if valid { "1" } else { "0" }).to_string(),
        ]);
    }
    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("propagator.csv");
    table.write(&path)?;
    Ok(path)
}

#[derive(Serialize)]
struct SqueezeMeta {
    model: Model,
    convention: ConventionArg,
    n: usize,
    eta: f64,
    theta: f64,
    /// Present when Θ was optimised.
    fallback_scan: Option<bool>,
    mean_spin_z_initial: f64,
    mean_spin_z_final: f64,
}

pub fn squeeze(cfg: &RunConfig, every: f64) -> Result<PathBuf, CliError> {
    check_every(every)?;
    let chosen = choose_theta(cfg)?;
    let kind = cfg.model.kind();
    let family = family_for(cfg.n, kind)?;
    let prepared = Prepared::from_family(cfg.n, kind, family.as_ref(), chosen.theta);
    let convention = Convention::from(cfg.convention);
    let traj = solve_volterra(&cfg.spectral_model()?, cfg.t_max, cfg.dt)?;

    let mut table = Table::new(&["t", "xi2"]);
    for k in sample_indices(traj.len(), traj.dt, every) {
        let xi2 = prepared.xi2(traj.u[k].norm_sqr(), convention)?;
        table.row(&[fmt_float(traj.t_grid[k]), fmt_float(xi2)]);
    }
    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("squeeze.csv");
    table.write(&path)?;
    let meta = SqueezeMeta {
        model: cfg.model,
        convention: cfg.convention,
        n: cfg.n,
        eta: cfg.eta,
        theta: chosen.theta,
        fallback_scan: chosen.fallback_scan,
        mean_spin_z_initial: prepared.mean_spin_z(1.0),
        mean_spin_z_final: prepared.mean_spin_z(traj.u.last().map_or(1.0, |u| u.norm_sqr())),
    };
    write_json(&cfg.output_dir.join("squeeze.json"), &meta)?;
    Ok(path)
}

/// Residue governing the long-time |u|; η = 0 is decoherence-free, |u| = 1.
fn steady_residue(cfg: &RunConfig) -> Result<f64, CliError> {
    if cfg.eta == 0.0 {
        return Ok(1.0);
    }
    Ok(find_bound_state(&cfg.spectral_model()?)?.z_or_zero())
}

pub fn scaling(cfg: &RunConfig, n_list: &[usize]) -> Result<PathBuf, CliError> {
    if n_list.is_empty() {
        return Err(CliError::Config("n list is empty".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!("n = {n} must be at least 2")));
    }
    let z = steady_residue(cfg)?;
    let u_mod2 = z * z;
    let kind = cfg.model.kind();
    let convention = Convention::from(cfg.convention);
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let numeric = match convention {
                Convention::Paper => optimize_theta(n, kind, u_mod2)?.xi2,
                Convention::Exact => {
                    let family = family_for(n, kind)?;
                    let f = |theta: f64| {
                        Prepared::from_family(n, kind, family.as_ref(), theta)
                            .xi2(u_mod2, convention)
                            .unwrap_or(f64::INFINITY)
                    };
                    minimize_over_theta(&f).xi2
                }
            };
            // Large-N laws: 1.04 N^(-2/3) (OAT) and 2/N (TAT) for the
            // decoherence-free minimum, diluted by Z².
            let formula = match kind {
                TwistKind::Oat => xi2_oat_steady_asymptote(n, z),
                TwistKind::Tat => 1.0 - u_mod2 + u_mod2 * 2.0 / n as f64,
            };
            Ok([n.to_string(), fmt_float(numeric), fmt_float(formula), fmt_float(z)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut table = Table::new(&["n", "xi2_inf_numeric", "xi2_inf_formula", "z"]);
    for row in &rows {
        table.row(row);
    }
    prepare_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("scaling.csv");
    table.write(&path)?;
    Ok(path)
}

#[derive(Serialize)]
struct HusimiMeta {
    t: f64,
    u_re: f64,
    u_im: f64,
    model: Model,
    n: usize,
    theta: f64,
    grid_theta: usize,
    grid_phi: usize,
    symmetric_weight: f64,
    anisotropy: f64,
}

pub fn husimi(cfg: &RunConfig, times: &[f64]) -> Result<Vec<PathBuf>, CliError> {
    if times.is_empty() {
        return Err(CliError::Config("time list is empty".into()));
    }
    if let Some(&t) = times.iter().find(|&&t| !(0.0..=cfg.t_max).contains(&t)) {
        return Err(CliError::Config(format!("time {t} outside [0, t_max = {}]", cfg.t_max)));
    }
    let theta = choose_theta(cfg)?.theta;
    let state: CollectiveState = match cfg.model {
        Model::Oat => oat_state(cfg.n, theta)?,
        Model::Tat => tat_state(cfg.n, theta)?,
    };
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    let traj = if horizon > 0.0 { Some(solve_volterra(&cfg.spectral_model()?, horizon, cfg.dt)?) } else { None };
    let grid = GridSpec { n_theta: cfg.grid_theta, n_phi: cfg.grid_phi };

    prepare_dir(&cfg.output_dir)?;
    let mut paths = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let u = traj.as_ref().map_or(Complex64::new(1.0, 0.0), |tr| tr.u_near(t));
        let map = husimi_q(&state, &KrausPair::new(u)?, grid, HusimiPath::Symmetric)?;
        let mut table = Table::new(&["theta", "phi", "q_raw", "q_normalized"]);
        for (i, &th) in map.thetas.iter().enumerate() {
            for (j, &ph) in map.phis.iter().enumerate() {
                table.row(&[
                    fmt_float(th),
                    fmt_float(ph),
                    fmt_float(map.q_raw[i][j]),
                    fmt_float(map.q_normalized[i][j]),
                ]);
            }
        }
        let path = cfg.output_dir.join(format!("husimi_t{k}.csv"));
        table.write(&path)?;
        let meta = HusimiMeta {
            t,
            u_re: u.re,
            u_im: u.im,
            model: cfg.model,
            n: cfg.n,
            theta,
            grid_theta: cfg.grid_theta,
            grid_phi: cfg.grid_phi,
            symmetric_weight: map.symmetric_weight,
            anisotropy: map.anisotropy(),
        };
        write_json(&cfg.output_dir.join(format!("husimi_t{k}.json")), &meta)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_sweep_hits_nominal_values() {
        let etas = EtaSweep { min: 0.005, max: 0.05, step: 0.005 }.values().unwrap();
        assert_eq!(etas.len(), 10);
        assert_eq!(etas[3], 0.02);
        assert_eq!(*etas.last().unwrap(), 0.05);
        assert!(EtaSweep { min: 0.0, max: 1.5, step: 0.1 }.values().is_err());
        assert!(EtaSweep { min: 0.0, max: 0.1, step: 0.0 }.values().is_err());
    }

    #[test]
    fn samples_include_both_ends() {
        assert_eq!(sample_indices(11, 0.1, 0.3), vec![0, 3, 6, 9, 10]);
        assert_eq!(sample_indices(4, 0.5, 0.1), vec![0, 1, 2, 3]);
    }

    #[test]
    fn exact_convention_rescales_by_the_mean_spin() {
        let p = Prepared::Oat { n: 20, theta: 0.1 };
        let paper = p.xi2(0.7, Convention::Paper).unwrap();
        let exact = p.xi2(0.7, Convention::Exact).unwrap();
        let jz = p.mean_spin_z(0.7);
        assert!((exact - paper * 100.0 / (jz * jz)).abs() < 1e-14);
        assert!(exact > paper);
    }
}
