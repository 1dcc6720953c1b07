use rayon::prelude::*;

use super::margin::{default_r_grid, quantile_margin};
use crate::distributions::{sample, upper_quantile, DistributionModel, TailLaw};
use crate::erm::LossMap;
use crate::error::{invalid, Result};
use crate::harness::{fit_slope, SlopeFit};
use crate::numeric::std_dev;
use crate::risk::{check_alpha, empirical_var_threshold};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationRow {
    pub n: usize,
    pub mean_abs: f64,
    pub sd: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdDeviation {
    pub theta_star: f64,
    pub rows: Vec<DeviationRow>,
    /// Log-log fit of the mean deviation on `n`; absent when some row is zero.
    pub fit: Option<SlopeFit>,
}

/// Monte Carlo `E |theta_hat_n - theta*|` across a grid of sample sizes.
pub fn threshold_deviation(
    model: &DistributionModel,
    alpha: f64,
    n_grid: &[usize],
    reps: usize,
    stream: &Stream,
) -> Result<ThresholdDeviation> {
    check_alpha(alpha)?;
    let theta_star = model.inverse_survival(alpha);
    let mut rows = Vec::with_capacity(n_grid.len());
    for (gi, &n) in n_grid.iter().enumerate() {
        let devs: Vec<f64> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let xs = sample(model, n, &stream.path(&[gi as u64, r as u64]))?.into_values();
                Ok((empirical_var_threshold(&xs, alpha)? - theta_star).abs())
            })
            .collect::<Result<_>>()?;
        rows.push(DeviationRow {
            n,
            mean_abs: devs.iter().sum::<f64>() / reps as f64,
            sd: std_dev(&devs),
            max_abs: devs.iter().copied().fold(0.0, f64::max),
        });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.mean_abs)).collect();
    let fit = if pts.iter().all(|p| p.1 > 0.0) { fit_slope(&pts).ok() } else { None };
    Ok(ThresholdDeviation { theta_star, rows, fit })
}

/// Perturbation families `Q_delta` with Levy-Prokhorov distance at most `delta` from `P`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Perturbation {
    /// Law of `X + delta`.
    LocationShift,
    /// `(1 - delta) P + delta * point mass at the given value`.
    MassTransfer(f64),
}

struct Mixed<'a> {
    law: &'a DistributionModel,
    weight: f64,
    point: f64,
}

impl TailLaw for Mixed<'_> {
    fn survival(&self, t: f64) -> f64 {
        (1.0 - self.weight) * self.law.survival(t) + if self.point > t { self.weight } else { 0.0 }
    }
    fn survival_incl(&self, t: f64) -> f64 {
        (1.0 - self.weight) * self.law.survival_incl(t) + if self.point >= t { self.weight } else { 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityRow {
    pub delta: f64,
    pub shift: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub theta_star: f64,
    pub margin: f64,
    /// Constant of `|shift| <= C delta / m0`, fitted at the smallest positive delta.
    pub c_fit: f64,
    pub rows: Vec<StabilityRow>,
}

/// Threshold shift `|theta*(Q_delta) - theta*(P)|` against `C delta / m0`.
pub fn lp_threshold_stability(
    model: &DistributionModel,
    family: Perturbation,
    alpha: f64,
    delta_grid: &[f64],
) -> Result<StabilityReport> {
    check_alpha(alpha)?;
    let theta_star = model.inverse_survival(alpha);
    let identity = LossMap::Affine { scale: 1.0, shift: 0.0 };
    let margin = quantile_margin(model, &identity, alpha, &default_r_grid(theta_star))?;
    let mut shifts = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        if !(d >= 0.0 && d < 1.0) {
            return Err(invalid(format!("perturbation size must lie in [0,1), got {d}")));
        }
        let q = match family {
            Perturbation::LocationShift => {
                if d == 0.0 {
                    theta_star
                } else {
                    theta_star + d
                }
            }
            Perturbation::MassTransfer(point) => {
                if d == 0.0 {
                    theta_star
                } else {
                    upper_quantile(
                        &Mixed {
                            law: model,
                            weight: d,
                            point,
                        },
                        alpha,
                    )
                }
            }
        };
        shifts.push((d, (q - theta_star).abs()));
    }
    let c_fit = shifts
        .iter()
        .filter(|(d, _)| *d > 0.0)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(0.0, |&(d, s)| s * margin / d);
    let rows = shifts
        .into_iter()
        .map(|(delta, shift)| StabilityRow {
            delta,
            shift,
            bound: if margin > 0.0 { c_fit * delta / margin } else { f64::INFINITY },
        })
        .collect();
    Ok(StabilityReport {
        theta_star,
        margin,
        c_fit,
        rows,
    })
}

/// Converse construction: `P = (1-alpha) delta_0 + alpha delta_c0` has zero
/// margin at level `alpha`; moving `delta` mass from 0 to `c0` moves the
/// threshold by the full plateau width. Returns `(delta, jump)` rows.
pub fn plateau_jump(alpha: f64, c0: f64, delta_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_alpha(alpha)?;
    let p = DistributionModel::atoms([(0.0, 1.0 - alpha), (c0, alpha)])?;
    let t0 = p.inverse_survival(alpha);
    delta_grid
        .iter()
        .map(|&d| {
            if !(d > 0.0 && d < 1.0 - alpha) {
                return Err(invalid(format!("plateau perturbation must lie in (0, 1-alpha), got {d}")));
            }
            let q = DistributionModel::atoms([(0.0, 1.0 - alpha - d), (c0, alpha + d)])?;
            Ok((d, (q.inverse_survival(alpha) - t0).abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_law_has_no_deviation() {
        let m = DistributionModel::atoms([(2.0, 1.0)]).unwrap();
        let d = threshold_deviation(&m, 0.2, &[16, 64, 256], 20, &Stream::new(1)).unwrap();
        assert!(d.rows.iter().all(|r| r.mean_abs == 0.0));
        assert!(d.fit.is_none());
    }

    #[test]
    fn plateau_deviation_persists() {
        let c0 = 3.0;
        let m = DistributionModel::atoms([(0.0, 0.8), (c0, 0.2)]).unwrap();
        let d = threshold_deviation(&m, 0.2, &[64, 256, 1024], 400, &Stream::new(2)).unwrap();
        for r in &d.rows {
            assert!(r.mean_abs >= c0 / 4.0, "{r:?}");
            assert_eq!(r.max_abs, c0);
        }
    }

    #[test]
    fn location_shift_is_exact() {
        let m = DistributionModel::pareto(1.0, 2.5).unwrap();
        let r = lp_threshold_stability(&m, Perturbation::LocationShift, 0.1, &[0.0, 0.01, 0.02, 0.04]).unwrap();
        assert_eq!(r.rows[0].shift, 0.0);
        for row in &r.rows[1..] {
            assert!((row.shift - row.delta).abs() < 1e-12);
            assert!(row.shift <= row.bound * (1.0 + 1e-9));
        }
    }

    #[test]
    fn mass_transfer_shift_linear() {
        let m = DistributionModel::pareto(1.0, 2.5).unwrap();
        let r = lp_threshold_stability(&m, Perturbation::MassTransfer(100.0), 0.1, &[1e-4, 2e-4, 4e-4]).unwrap();
        let ratios: Vec<f64> = r.rows.iter().map(|x| x.shift / x.delta).collect();
        assert!((ratios[2] / ratios[0] - 1.0).abs() < 0.01, "{ratios:?}");
    }

    #[test]
    fn plateau_jumps_full_width() {
        for (d, jump) in plateau_jump(0.2, 3.0, &[1e-6, 1e-3, 0.1]).unwrap() {
            assert!(jump >= 3.0, "delta {d}");
        }
    }
}
