//! CVaR empirical risk minimization over finite classes and lattice nets.
//!
//! Each hypothesis is scored by an empirical CVaR of its losses (plain,
//! truncated, or truncated median-of-means) and the least index attaining the
//! minimum wins. For median-of-means one block assignment is drawn up front and
//! shared by every hypothesis.

mod loss;
mod net;
mod population;

pub use loss::{FlipArm, LossMap, Record};
pub use net::{build_net, BallNet, DEFAULT_NET_CAP};
pub use population::{excess_risk, linear_records, FlipPairLaw, LinearNoiseLaw, PerHypothesisLaw, PopulationRisk};

use rayon::prelude::*;

use crate::distributions::RiskSpec;
use crate::error::{invalid, Error, Result};
use crate::mom::{mom_block_scheme, resolve_k, tmom_with_blocks, MomConfig};
use crate::risk::{empirical_cvar, truncated_cvar};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearKind {
    Abs,
    Sq,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HypothesisClass {
    FiniteExplicit(Vec<LossMap>),
    BallNet {
        dim: usize,
        radius: f64,
        eta_h: f64,
        kind: LinearKind,
    },
}

impl HypothesisClass {
    /// The explicit hypothesis list (the net points for a ball class).
    pub fn hypotheses(&self, cap: usize) -> Result<Vec<LossMap>> {
        match self {
            Self::FiniteExplicit(v) => {
                if v.is_empty() {
                    return Err(invalid("hypothesis class is empty"));
                }
                Ok(v.clone())
            }
            Self::BallNet {
                dim,
                radius,
                eta_h,
                kind,
            } => {
                let net = build_net(*dim, *radius, *eta_h, cap)?;
                Ok(net
                    .points
                    .into_iter()
                    .map(|params| match kind {
                        LinearKind::Abs => LossMap::AbsLinear { params },
                        LinearKind::Sq => LossMap::SqLinear { params },
                    })
                    .collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErmObjective {
    Emp,
    Trunc,
    Tmom,
}

impl std::str::FromStr for ErmObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emp" => Ok(Self::Emp),
            "trunc" => Ok(Self::Trunc),
            "tmom" => Ok(Self::Tmom),
            _ => Err(invalid(format!("unknown objective {s:?} (emp|trunc|tmom)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErmResult {
    pub chosen_index: usize,
    pub chosen_params: Option<Vec<f64>>,
    pub threshold: f64,
    pub objective_value: f64,
    pub per_hypothesis_values: Vec<f64>,
    pub per_hypothesis_thresholds: Vec<f64>,
}

/// Least index attaining the minimum.
pub(crate) fn least_argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Scores every hypothesis of `class` on `data` and returns the minimizer.
pub fn erm_finite(
    data: &[Record],
    class: &HypothesisClass,
    objective: ErmObjective,
    spec: &RiskSpec,
    cfg: &MomConfig,
    stream: &Stream,
) -> Result<ErmResult> {
    if data.is_empty() {
        return Err(invalid("ERM needs at least one record"));
    }
    let hyps = class.hypotheses(DEFAULT_NET_CAP)?;
    for h in &hyps {
        h.validate_against(data)?;
    }
    let blocks = match objective {
        ErmObjective::Tmom => {
            let kc = resolve_k(data.len(), cfg)?;
            Some((mom_block_scheme(data.len(), kc.default, stream)?, kc))
        }
        _ => None,
    };
    let scored: Vec<(f64, f64)> = hyps
        .par_iter()
        .map(|h| {
            let losses = h.losses(data);
            let est = match objective {
                ErmObjective::Emp => empirical_cvar(&losses, spec.alpha)?,
                ErmObjective::Trunc => truncated_cvar(&losses, spec)?,
                ErmObjective::Tmom => {
                    let (b, kc) = blocks.as_ref().expect("blocks drawn for tmom");
                    tmom_with_blocks(&losses, spec, cfg, b, *kc)?.estimate
                }
            };
            Ok((est.value, est.threshold))
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = scored.iter().map(|s| s.0).collect();
    let thresholds: Vec<f64> = scored.iter().map(|s| s.1).collect();
    let best = least_argmin(&values);
    Ok(ErmResult {
        chosen_index: best,
        chosen_params: hyps[best].params().map(<[f64]>::to_vec),
        threshold: thresholds[best],
        objective_value: values[best],
        per_hypothesis_values: values,
        per_hypothesis_thresholds: thresholds,
    })
}
