use rayon::prelude::*;

use super::{affine_parts, affine_population, AffinePopulation};
use crate::distributions::{sample, DistributionModel};
use crate::erm::LossMap;
use crate::error::Result;
use crate::numeric::KahanSum;
use crate::risk::{check_alpha, empirical_cvar};
use crate::rng::Stream;

/// One replication and hypothesis of the decomposition
/// `emp - pop = main + correction + remainder`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BkRow {
    pub replication: usize,
    pub hypothesis: usize,
    pub emp_cvar: f64,
    pub pop_cvar: f64,
    /// `(1/alpha) (P_n - P)[(X - theta*)_+]`.
    pub main_term: f64,
    /// `(1/alpha) (theta_hat - theta*) (alpha - P(X > theta*))`.
    pub correction_term: f64,
    pub remainder: f64,
    pub theta_hat: f64,
    pub theta_star: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BkReport {
    pub n: usize,
    pub rows: Vec<BkRow>,
    pub mean_abs_main: f64,
    pub mean_abs_correction: f64,
    pub mean_abs_remainder: f64,
    /// MC means of the per-replication suprema over the hypotheses.
    pub mean_sup_main: f64,
    pub mean_sup_remainder: f64,
    pub sup_remainder: f64,
    /// MC mean of the realized `sup_t |P_n(X > t) - P(X > t)|`.
    pub eps_n: f64,
    pub kappa: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub u0: f64,
    /// Threshold envelope `(2 eps_n / c_minus)^(1/kappa)`.
    pub delta_n: f64,
}

/// `sup_t |P_n(X > t) - P(X > t)|` over all `t`, from the sorted sample.
pub fn ks_tail_deviation(model: &DistributionModel, xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut sup = 0.0_f64;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        // Just below x the empirical tail is (n - i)/n; at x it is (n - j)/n.
        sup = sup
            .max(((s.len() - i) as f64 / n - model.survival_incl(x)).abs())
            .max(((s.len() - j) as f64 / n - model.survival(x)).abs());
        i = j;
    }
    sup
}

/// Local margin constants of the tail around `theta*`: the extreme ratios
/// `|P(X > theta* +- u) - alpha| / u^kappa` over `u = u0 2^-k`.
fn margin_constants(model: &DistributionModel, alpha: f64, kappa: f64) -> (f64, f64, f64) {
    let theta = model.inverse_survival(alpha);
    let u0 = 0.5 * theta.max(1.0).min((theta - model.support_min()).max(1e-3));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for k in 0..12 {
        let u = u0 * 0.5f64.powi(k);
        for t in [theta - u, theta + u] {
            let r = (model.survival(t) - alpha).abs() / u.powf(kappa);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi, u0)
}

/// Monte Carlo Bahadur-Kiefer decomposition of the empirical CVaR of affine
/// losses `l = a X + b`, `X ~ model`, with margin exponent `kappa = 1`.
pub fn bk_decompose(
    model: &DistributionModel,
    alpha: f64,
    h_grid: &[LossMap],
    n: usize,
    reps: usize,
    stream: &Stream,
) -> Result<BkReport> {
    check_alpha(alpha)?;
    let pops: Vec<AffinePopulation> = h_grid
        .iter()
        .map(|h| affine_population(model, h, alpha))
        .collect::<Result<_>>()?;
    let parts: Vec<(f64, f64)> = h_grid.iter().map(affine_parts).collect::<Result<_>>()?;

    let per_rep: Vec<(Vec<BkRow>, f64)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let xs = sample(model, n, &stream.substream(rep as u64))?.into_values();
            let eps = ks_tail_deviation(model, &xs);
            let mut rows = Vec::with_capacity(h_grid.len());
            for (hi, (&(a, b), pop)) in parts.iter().zip(&pops).enumerate() {
                let losses: Vec<f64> = xs.iter().map(|&x| a * x + b).collect();
                let est = empirical_cvar(&losses, alpha)?;
                let emp_hinge = losses
                    .iter()
                    .map(|&l| (l - pop.theta_star).max(0.0))
                    .collect::<KahanSum>()
                    .value()
                    / n as f64;
                let main_term = (emp_hinge - pop.hinge_at_star) / alpha;
                let correction_term = (est.threshold - pop.theta_star) * (alpha - pop.tail_at_star) / alpha;
                let remainder = est.value - pop.cvar - main_term - correction_term;
                rows.push(BkRow {
                    replication: rep,
                    hypothesis: hi,
                    emp_cvar: est.value,
                    pop_cvar: pop.cvar,
                    main_term,
                    correction_term,
                    remainder,
                    theta_hat: est.threshold,
                    theta_star: pop.theta_star,
                });
            }
            Ok((rows, eps))
        })
        .collect::<Result<_>>()?;

    let kappa = 1.0;
    let (c_minus, c_plus, u0) = margin_constants(model, alpha, kappa);
    let total = (reps * h_grid.len()).max(1) as f64;
    let rows: Vec<BkRow> = per_rep.iter().flat_map(|(r, _)| r.iter().copied()).collect();
    let mean_abs = |f: fn(&BkRow) -> f64| rows.iter().map(|r| f(r).abs()).sum::<f64>() / total;
    let sup_mean = |f: fn(&BkRow) -> f64| {
        per_rep
            .iter()
            .map(|(r, _)| r.iter().map(|x| f(x).abs()).fold(0.0, f64::max))
            .sum::<f64>()
            / reps.max(1) as f64
    };
    let eps_n = per_rep.iter().map(|(_, e)| e).sum::<f64>() / reps.max(1) as f64;
    Ok(BkReport {
        n,
        mean_abs_main: mean_abs(|r| r.main_term),
        mean_abs_correction: mean_abs(|r| r.correction_term),
        mean_abs_remainder: mean_abs(|r| r.remainder),
        mean_sup_main: sup_mean(|r| r.main_term),
        mean_sup_remainder: sup_mean(|r| r.remainder),
        sup_remainder: rows.iter().map(|r| r.remainder.abs()).fold(0.0, f64::max),
        eps_n,
        kappa,
        c_minus,
        c_plus,
        u0,
        delta_n: (2.0 * eps_n / c_minus).powf(1.0 / kappa),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity() -> Vec<LossMap> {
        vec![LossMap::Affine { scale: 1.0, shift: 0.0 }]
    }

    #[test]
    fn identity_holds_on_every_row() {
        let m = DistributionModel::pareto(1.0, 2.5).unwrap();
        let hs = vec![
            LossMap::Affine { scale: 1.0, shift: 0.0 },
            LossMap::Affine { scale: 2.0, shift: 0.5 },
        ];
        let r = bk_decompose(&m, 0.1, &hs, 256, 20, &Stream::new(1)).unwrap();
        assert_eq!(r.rows.len(), 40);
        for row in &r.rows {
            let lhs = row.emp_cvar - row.pop_cvar;
            let rhs = row.main_term + row.correction_term + row.remainder;
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn atom_at_var_has_correction() {
        // P(X > theta*) = 0.4 < alpha = 0.45 at theta* = 1.
        let m = DistributionModel::atoms([(0.0, 0.5), (1.0, 0.1), (5.0, 0.4)]).unwrap();
        assert_eq!(m.inverse_survival(0.45), 1.0);
        let r = bk_decompose(&m, 0.45, &identity(), 100, 200, &Stream::new(2)).unwrap();
        assert!(r.mean_abs_correction > 0.0);
        assert!(r.rows.iter().any(|row| row.correction_term != 0.0));
    }

    #[test]
    fn continuous_law_has_no_correction() {
        let m = DistributionModel::pareto(1.0, 2.5).unwrap();
        let r = bk_decompose(&m, 0.1, &identity(), 512, 50, &Stream::new(3)).unwrap();
        assert!(r.mean_abs_correction < 1e-9 * r.mean_abs_main);
    }

    #[test]
    fn ks_deviation_bounds() {
        let m = DistributionModel::atoms([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!((ks_tail_deviation(&m, &[0.0, 1.0]) - 0.0).abs() < 1e-15);
        assert!((ks_tail_deviation(&m, &[0.0, 0.0]) - 0.5).abs() < 1e-15);
        let u = DistributionModel::pareto(1.0, 1.0).unwrap();
        // One point at 2: empirical tail 1 below 2, truth 1/2 just below 2.
        assert!((ks_tail_deviation(&u, &[2.0]) - 0.5).abs() < 1e-15);
    }
}
