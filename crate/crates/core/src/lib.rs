pub mod collective;
pub mod error;
pub mod husimi;
pub mod oracle;
pub mod propagator;
pub mod quad;
pub mod special;
pub mod spectral;
pub mod spectrum;
pub mod squeezing;

pub use collective::{CollectiveState, InitialMoments};
pub use error::{Error, Result};
pub use propagator::PropagatorTrajectory;
pub use spectral::SpectralModel;
pub use spectrum::BoundStateReport;
pub use squeezing::{Convention, SqueezingReport};
