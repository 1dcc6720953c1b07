//! Loss laws with exact analytic oracles.
//!
//! Every model here is a law on `[0, inf)` for which the tail map
//! `P(X > t)`, the hinge mean `E(X - t)_+`, the upper quantile and the
//! population CVaR can be evaluated without simulation, so Monte Carlo
//! estimates elsewhere in the crate always have a ground truth to compare to.

mod law;
mod metrics;
mod model;
mod oracles;
mod sampling;

pub use law::{upper_quantile, AffineImage, Shifted, TailLaw};
pub use metrics::{tv_distance, wasserstein1};
pub use model::{Atoms, DistributionModel, RiskSpec, SampleSet};
pub use oracles::{Moment, PopulationCvar};
pub use sampling::{sample, sample_into};
