//! Empirical CVaR through the Rockafellar-Uryasev objective
//! `phi(theta) = theta + sum (x_i - theta)_+ / (alpha n)`.
//!
//! `phi` is convex and piecewise linear with knots at the sample values, so
//! the minimum is attained at an order statistic and no search is needed.

use crate::distributions::RiskSpec;
use crate::error::{invalid, Result};
use crate::numeric::{floor_product, KahanSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Empirical,
    Truncated,
    Tmom,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Empirical => "empirical",
            Method::Truncated => "truncated",
            Method::Tmom => "tmom",
        }
    }
}

/// Estimated CVaR together with the RU threshold that attains it.
#[derive(Clone, Debug, PartialEq)]
pub struct CvarEstimate {
    pub value: f64,
    pub threshold: f64,
    pub method: Method,
    pub truncation_level: Option<f64>,
    pub n_effective: usize,
}

/// The RU objective evaluated at each knot (sorted sample values plus 0).
#[derive(Clone, Debug, PartialEq)]
pub struct RuObjectiveTrace {
    pub knots: Vec<f64>,
    pub objective_at_knots: Vec<f64>,
}

impl RuObjectiveTrace {
    /// Smallest knot attaining the minimum, with its objective value.
    pub fn argmin(&self) -> (f64, f64) {
        let mut best = 0;
        for (i, &v) in self.objective_at_knots.iter().enumerate() {
            if v < self.objective_at_knots[best] {
                best = i;
            }
        }
        (self.knots[best], self.objective_at_knots[best])
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

fn check_samples(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(invalid("sample must be nonempty"));
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(invalid(format!("sample values must be finite, got {x}")));
    }
    Ok(())
}

fn hinge_sum(xs: &[f64], theta: f64) -> f64 {
    xs.iter()
        .map(|&x| (x - theta).max(0.0))
        .collect::<KahanSum>()
        .value()
}

/// `theta + sum (x_i - theta)_+ / (alpha n)`.
pub fn ru_objective(xs: &[f64], alpha: f64, theta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_samples(xs)?;
    Ok(theta + hinge_sum(xs, theta) / xs.len() as f64 / alpha)
}

/// Minimal empirical RU minimizer `inf { t : P_n(X > t) <= alpha }`, the
/// order statistic `x_(n - floor(alpha n))`.
pub fn empirical_var_threshold(xs: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_samples(xs)?;
    let n = xs.len();
    let idx = n - floor_product(alpha, n) - 1;
    let mut work = xs.to_vec();
    let (_, t, _) = work.select_nth_unstable_by(idx, f64::total_cmp);
    Ok(*t)
}

pub fn empirical_cvar(xs: &[f64], alpha: f64) -> Result<CvarEstimate> {
    let threshold = empirical_var_threshold(xs, alpha)?;
    let value = threshold + hinge_sum(xs, threshold) / xs.len() as f64 / alpha;
    Ok(CvarEstimate {
        value,
        threshold,
        method: Method::Empirical,
        truncation_level: None,
        n_effective: xs.len(),
    })
}

/// `B = (M n)^(1/(1+lambda))`, the truncation level balancing bias and variance.
pub fn stat_truncation_level(spec: &RiskSpec, n: usize) -> f64 {
    (spec.moment_bound * n as f64).powf(1.0 / (1.0 + spec.lambda))
}

/// Empirical CVaR of the capped losses `min(x_i, B)` at the tail level of `spec`.
pub fn truncated_cvar(xs: &[f64], spec: &RiskSpec) -> Result<CvarEstimate> {
    check_samples(xs)?;
    let b = stat_truncation_level(spec, xs.len());
    let capped: Vec<f64> = xs.iter().map(|&x| x.min(b)).collect();
    let mut est = empirical_cvar(&capped, spec.alpha)?;
    est.method = Method::Truncated;
    est.truncation_level = Some(b);
    Ok(est)
}

pub fn ru_trace(xs: &[f64], alpha: f64) -> Result<RuObjectiveTrace> {
    check_alpha(alpha)?;
    check_samples(xs)?;
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut knots = sorted.clone();
    knots.push(0.0);
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    // suffix[i] = sum of sorted[i..]
    let n = sorted.len();
    let mut suffix = vec![0.0; n + 1];
    let mut acc = KahanSum::new();
    for i in (0..n).rev() {
        acc.add(sorted[i]);
        suffix[i] = acc.value();
    }
    let scale = 1.0 / (alpha * n as f64);
    let objective_at_knots = knots
        .iter()
        .map(|&t| {
            let first_above = sorted.partition_point(|&x| x <= t);
            let count = (n - first_above) as f64;
            t + (suffix[first_above] - t * count) * scale
        })
        .collect();
    Ok(RuObjectiveTrace {
        knots,
        objective_at_knots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_examples() {
        assert_eq!(ru_objective(&[5.0, 5.0], 0.5, 5.0).unwrap(), 5.0);
        assert!((ru_objective(&[0.0, 0.0, 0.0, 10.0], 0.4, 0.0).unwrap() - 6.25).abs() < 1e-12);
        assert_eq!(ru_objective(&[1.0, 2.0, 3.0, 4.0], 0.25, 10.0).unwrap(), 10.0);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(empirical_var_threshold(&[1.0, 2.0, 3.0, 4.0], 0.25).unwrap(), 3.0);
        assert_eq!(empirical_var_threshold(&[2.5; 7], 0.13).unwrap(), 2.5);
        assert_eq!(empirical_var_threshold(&[0.0, 0.0, 0.0, 10.0], 0.4).unwrap(), 0.0);
    }

    #[test]
    fn cvar_examples() {
        let e = empirical_cvar(&[1.0, 2.0, 3.0, 4.0], 0.25).unwrap();
        assert_eq!((e.value, e.threshold, e.method), (4.0, 3.0, Method::Empirical));
        let e = empirical_cvar(&[0.0, 0.0, 0.0, 10.0], 0.4).unwrap();
        assert_eq!(e.threshold, 0.0);
        assert!((e.value - 6.25).abs() < 1e-12);
        assert_eq!(empirical_cvar(&[5.0; 4], 0.5).unwrap().value, 5.0);
    }

    #[test]
    fn truncated_examples() {
        let spec = RiskSpec::new(0.4, 1.0, 1.0).unwrap();
        assert!((stat_truncation_level(&spec, 10_000) - 100.0).abs() < 1e-9);
        let e = truncated_cvar(&[0.0, 0.0, 0.0, 1000.0], &spec).unwrap();
        assert_eq!(e.truncation_level, Some(2.0));
        assert!((e.value - 1.25).abs() < 1e-12);
        let xs = [0.1, 0.5, 1.6];
        let t = truncated_cvar(&xs, &spec).unwrap();
        let u = empirical_cvar(&xs, 0.4).unwrap();
        assert_eq!((t.value, t.threshold), (u.value, u.threshold));
        assert_eq!(t.method, Method::Truncated);
    }

    #[test]
    fn trace_examples() {
        let t = ru_trace(&[1.0, 2.0], 0.5).unwrap();
        assert_eq!(t.knots, vec![0.0, 1.0, 2.0]);
        assert_eq!(t.objective_at_knots, vec![3.0, 2.0, 2.0]);
        // Flat on [0, 10]: knot 10 attains the minimum, the minimal argmin is 0.
        let t = ru_trace(&[0.0, 10.0], 0.5).unwrap();
        assert_eq!(t.objective_at_knots, vec![10.0, 10.0]);
        assert_eq!(t.argmin(), (0.0, 10.0));
        let t = ru_trace(&[3.0; 5], 0.2).unwrap();
        assert_eq!(t.objective_at_knots, vec![15.0, 3.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(empirical_cvar(&[], 0.5).is_err());
        assert!(empirical_cvar(&[1.0], 1.0).is_err());
        assert!(ru_objective(&[f64::NAN], 0.5, 0.0).is_err());
    }
}
