use crate::distributions::Atoms;
use crate::error::{invalid, Result};

/// `P = delta_0` and `Q = (1 - eps) delta_0 + eps delta_z` with
/// `z = (M / eps)^(1/(1+lambda))`, the largest atom allowed by the moment bound.
pub fn two_point_pair(moment_bound: f64, lambda: f64, eps: f64) -> Result<(Atoms, Atoms)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("eps must lie in (0,1), got {eps}")));
    }
    let z = (moment_bound / eps).powf(1.0 / (1.0 + lambda));
    Ok((Atoms::dirac(0.0)?, Atoms::new([(0.0, 1.0 - eps), (z, eps)])?))
}

/// Closed form of the CVaR gap of the two-point pair for `eps < alpha`:
/// `M^(1/(1+lambda)) eps^(lambda/(1+lambda)) / alpha`.
pub fn two_point_gap(moment_bound: f64, lambda: f64, alpha: f64, eps: f64) -> f64 {
    moment_bound.powf(1.0 / (1.0 + lambda)) * eps.powf(lambda / (1.0 + lambda)) / alpha
}

/// Upper bound `(C/alpha) tv^(lambda/(1+lambda))` with
/// `C = (2M)^(1/(1+lambda)) (1 + 1/lambda)` on the CVaR difference of two
/// laws with `(1+lambda)`-moments at most `M`.
pub fn tv_cvar_bound(moment_bound: f64, lambda: f64, alpha: f64, tv: f64) -> f64 {
    let c = (2.0 * moment_bound).powf(1.0 / (1.0 + lambda)) * (1.0 + 1.0 / lambda);
    c / alpha * tv.powf(lambda / (1.0 + lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{tv_distance, DistributionModel};

    #[test]
    fn pair_attains_gap() {
        let (p, q) = two_point_pair(2.0, 1.0, 0.04).unwrap();
        assert!((tv_distance(&p, &q) - 0.04).abs() < 1e-15);
        let rp = DistributionModel::DiscreteAtoms(p).population_var_cvar(0.1).unwrap().cvar;
        let rq = DistributionModel::DiscreteAtoms(q).population_var_cvar(0.1).unwrap().cvar;
        assert_eq!(rp, 0.0);
        assert!((rq - two_point_gap(2.0, 1.0, 0.1, 0.04)).abs() < 1e-12);
        assert!(rq <= tv_cvar_bound(2.0, 1.0, 0.1, 0.04));
    }
}
