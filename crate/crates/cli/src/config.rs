use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use nmsqueeze_core::collective::TwistKind;
use nmsqueeze_core::{Convention, SpectralModel};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Oat,
    Tat,
}

impl Model {
    pub fn kind(self) -> TwistKind {
        match self {
            Model::Oat => TwistKind::Oat,
            Model::Tat => TwistKind::Tat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConventionArg {
    Paper,
    Exact,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => Convention::Paper,
            ConventionArg::Exact => Convention::Exact,
        }
    }
}

/// Twist angle: optimised at u = 1, or fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta {
    Auto,
    Value(f64),
}

impl FromStr for Theta {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Theta::Auto);
        }
        s.parse::<f64>().map(Theta::Value).map_err(|_| format!("theta must be `auto` or a number, got `{s}`"))
    }
}

impl fmt::Display for Theta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Theta::Auto => f.write_str("auto"),
            Theta::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Theta {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Theta::Auto => s.serialize_str("auto"),
            Theta::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Theta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Theta::Value(v)),
            Raw::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    pub n: usize,
    pub theta: Theta,
    pub omega0: f64,
    pub eta: f64,
    pub s: f64,
    pub omega_c: f64,
    pub t_max: f64,
    pub dt: f64,
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub output_dir: PathBuf,
    pub convention: ConventionArg,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::Oat,
            n: 100,
            theta: Theta::Auto,
            omega0: 1.0,
            eta: 0.03,
            s: 1.0,
            omega_c: 50.0,
            t_max: 400.0,
            dt: nmsqueeze_core::propagator::DEFAULT_DT,
            grid_theta: 101,
            grid_phi: 101,
            output_dir: PathBuf::from("."),
            convention: ConventionArg::Paper,
        }
    }
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration; missing keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// `auto` or a twist angle in radians.
    #[arg(long)]
    pub theta: Option<Theta>,
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// File values (or defaults) with flags applied on top, validated.
    pub fn resolve(flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match &flags.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        if let Some(v) = flags.eta {
            cfg.eta = v;
        }
        if let Some(v) = flags.n {
            cfg.n = v;
        }
        if let Some(v) = flags.theta {
            cfg.theta = v;
        }
        if let Some(v) = flags.model {
            cfg.model = v;
        }
        if let Some(v) = flags.t_max {
            cfg.t_max = v;
        }
        if let Some(v) = flags.dt {
            cfg.dt = v;
        }
        if let Some(v) = &flags.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = flags.convention {
            cfg.convention = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.spectral_model()?;
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max = {} must be positive", self.t_max));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if let Theta::Value(v) = self.theta {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("theta = {v} must be a non-negative angle"));
            }
        }
        if self.grid_theta < 2 || self.grid_phi < 1 {
            return bad(format!("Husimi grid {}×{} is too small", self.grid_theta, self.grid_phi));
        }
        Ok(())
    }

    pub fn spectral_model(&self) -> Result<SpectralModel, CliError> {
        SpectralModel::new(self.omega0, self.eta, self.s, self.omega_c).map_err(CliError::from)
    }
}
