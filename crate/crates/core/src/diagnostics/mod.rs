//! Probes of how the endogenous VaR threshold drives CVaR error and
//! decision stability.

mod bk;
mod flip;
mod influence;
mod margin;
mod robustness;
mod threshold;

pub use bk::{bk_decompose, ks_tail_deviation, BkReport, BkRow};
pub use flip::{flip_experiment, FlipConfig, FlipReport, FlipRow};
pub use influence::{
    influence_check, robustness_radius, stationarity_solve, FdRow, GaussianLinear, InfluenceReport, Stationary,
};
pub use margin::{default_r_grid, quantile_margin};
pub use robustness::{tv_cvar_bound, two_point_gap, two_point_pair};
pub use threshold::{
    lp_threshold_stability, plateau_jump, threshold_deviation, DeviationRow, Perturbation, StabilityReport,
    StabilityRow, ThresholdDeviation,
};

use crate::distributions::DistributionModel;
use crate::erm::LossMap;
use crate::error::{invalid, Result};

/// `(scale, shift)` of an affine scalar loss; other losses are not
/// supported by the scalar diagnostics.
pub(crate) fn affine_parts(h: &LossMap) -> Result<(f64, f64)> {
    match h {
        LossMap::Affine { scale, shift } if *scale > 0.0 => Ok((*scale, *shift)),
        _ => Err(invalid("scalar diagnostics need affine losses with positive scale")),
    }
}

/// Population quantities of `l = a X + b` at level `alpha`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AffinePopulation {
    pub theta_star: f64,
    pub cvar: f64,
    pub hinge_at_star: f64,
    pub tail_at_star: f64,
}

pub(crate) fn affine_population(model: &DistributionModel, h: &LossMap, alpha: f64) -> Result<AffinePopulation> {
    let (a, b) = affine_parts(h)?;
    let pc = model.population_var_cvar(alpha)?;
    Ok(AffinePopulation {
        theta_star: a * pc.theta_star + b,
        cvar: a * pc.cvar + b,
        hinge_at_star: a * model.hinge_mean(pc.theta_star)?,
        tail_at_star: model.survival(pc.theta_star),
    })
}
