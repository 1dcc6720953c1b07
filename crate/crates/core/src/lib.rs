//! Estimation and decision-making under the conditional value-at-risk of
//! heavy-tailed losses.
//!
//! The crate is organised bottom-up:
//!
//! * [`distributions`]: loss laws with exact tail, hinge-mean and CVaR oracles.
//! * [`risk`]: empirical and truncated CVaR through the Rockafellar-Uryasev
//!   objective `theta + E(X - theta)_+ / alpha`.
//! * [`mom`]: truncated median-of-means CVaR under oblivious contamination.
//! * [`erm`]: CVaR minimization over finite classes and lattice nets.
//! * [`diagnostics`]: Bahadur-Kiefer decomposition, threshold stability,
//!   influence functions and tail-scarcity decision flips.
//! * [`harness`]: seeded Monte Carlo experiments with log-log slope fits.
//!
//! ```
//! use tailrisk::distributions::DistributionModel;
//! use tailrisk::risk::empirical_cvar;
//!
//! let est = empirical_cvar(&[1.0, 2.0, 3.0, 4.0], 0.25).unwrap();
//! assert_eq!((est.value, est.threshold), (4.0, 3.0));
//!
//! let law = DistributionModel::pareto(1.0, 2.0).unwrap();
//! let pop = law.population_var_cvar(0.25).unwrap();
//! assert!((pop.cvar - 4.0).abs() < 1e-12);
//! ```

pub mod diagnostics;
pub mod distributions;
pub mod erm;
pub mod error;
pub mod harness;
pub mod mom;
pub mod numeric;
pub mod risk;
pub mod rng;

pub use error::{Error, Result};
