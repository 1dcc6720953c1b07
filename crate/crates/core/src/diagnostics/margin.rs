use super::affine_parts;
use crate::distributions::DistributionModel;
use crate::erm::LossMap;
use crate::error::{invalid, Result};
use crate::risk::check_alpha;

/// `max(theta, 1) * 10^-k` for `k = 1..=8`.
pub fn default_r_grid(theta: f64) -> Vec<f64> {
    (1..=8).map(|k| theta.abs().max(1.0) * 10f64.powi(-k)).collect()
}

/// Generalized density at the quantile: `min_r P(|l - theta*| <= r) / r` over
/// the grid, for an affine loss of `X ~ model`.
///
/// When the threshold set is an interval (the tail sits exactly at `alpha` on
/// a plateau) the margin is 0.
pub fn quantile_margin(model: &DistributionModel, h: &LossMap, alpha: f64, r_grid: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("radius grid must be nonempty and positive"));
    }
    let (a, _) = affine_parts(h)?;
    let theta = model.inverse_survival(alpha);
    let r_min = r_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if model.survival(theta + r_min / a) >= alpha - 1e-12 {
        return Ok(0.0);
    }
    Ok(r_grid
        .iter()
        .map(|&r| {
            let u = r / a;
            (model.survival_incl(theta - u) - model.survival(theta + u)).max(0.0) / r
        })
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ID: LossMap = LossMap::Affine { scale: 1.0, shift: 0.0 };

    #[test]
    fn pareto_margin_is_twice_density() {
        let m = DistributionModel::pareto(1.0, 2.0).unwrap();
        let v = quantile_margin(&m, &ID, 0.25, &default_r_grid(2.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-6, "{v}");
        assert!((2.0 * m.density_at_quantile(0.25).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gap_gives_zero() {
        let m = DistributionModel::atoms([(0.0, 0.7), (10.0, 0.3)]).unwrap();
        assert_eq!(quantile_margin(&m, &ID, 0.3, &[1.0, 0.1]).unwrap(), 0.0);
        // An atom sitting at the threshold is not a gap.
        assert_eq!(quantile_margin(&m, &ID, 0.4, &[1.0, 0.1]).unwrap(), 0.7);
    }

    #[test]
    fn scales_linearly() {
        let m = DistributionModel::pareto(1.0, 2.5).unwrap();
        let base = quantile_margin(&m, &ID, 0.1, &default_r_grid(1.0)).unwrap();
        for s in [1.0, 0.5, 0.1] {
            let h = LossMap::Affine { scale: 1.0 / s, shift: 0.0 };
            let v = quantile_margin(&m, &h, 0.1, &default_r_grid(1.0)).unwrap();
            assert!((v / (s * base) - 1.0).abs() < 1e-5, "s={s}: {v} vs {}", s * base);
        }
    }
}
