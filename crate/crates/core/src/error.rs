use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The integral has a non-integrable or ill-conditioned endpoint singularity.
    #[error("singular endpoint in {what}: {detail}")]
    SingularEndpoint { what: &'static str, detail: String },

    /// Invalid model or solver parameters.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Dense oracle paths are limited to a small number of spins.
    #[error("capacity exceeded: n = {n} but this path supports at most {max}")]
    Capacity { n: usize, max: usize },

    /// Quadrature or root finding failed to reach the requested accuracy.
    #[error("numerical non-convergence in {what}: achieved error estimate {estimate:e}")]
    NonConvergence { what: &'static str, estimate: f64 },

    /// The mean spin vanishes so the transverse plane is undefined.
    #[error("mean spin vanishes; the squeezing direction is undefined")]
    UndefinedDirection,
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { what, detail: detail.into() }
    }

    /// True for failures of a numerical method rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
