use std::f64::consts::E;

use super::model::{Atoms, DistributionModel};
use crate::error::{Error, Result};
use crate::numeric::{integrate, integrate_tail, KahanSum};

/// Raw moment, or a flag when the integral diverges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

impl Moment {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            Moment::Finite(v) => Some(*v),
            Moment::Infinite => None,
        }
    }
}

/// Population VaR threshold and CVaR of a law at a given tail level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationCvar {
    pub theta_star: f64,
    pub cvar: f64,
}

const QUAD_REL_TOL: f64 = 1e-10;

/// `int_a^inf exp(-c u) u^-2 du` for `a >= 1`, `c > 0`.
fn exp_over_square_tail(c: f64, a: f64) -> f64 {
    integrate_tail(
        |u| (-c * u).exp() / (u * u),
        a,
        QUAD_REL_TOL,
        |u| ((-c * u).exp() / (c * u * u)).min(1.0 / u),
    )
}

/// `int_1^b exp(-c u) u^-2 du` for any real `c`.
fn exp_over_square_segment(c: f64, b: f64) -> f64 {
    if b <= 1.0 {
        return 0.0;
    }
    let scale = integrate(|u| (-c * u).exp() / (u * u), 1.0, b, 1e-6).abs().max(1e-300);
    integrate(|u| (-c * u).exp() / (u * u), 1.0, b, QUAD_REL_TOL * scale * 1e-2)
}

fn lct_inverse_survival(p: f64, v: f64) -> f64 {
    if v >= (-p).exp() {
        return E;
    }
    // Solve p t + 2 ln t = L with t = ln y; the map is increasing and concave.
    let l = -v.ln();
    let g = |t: f64| p * t + 2.0 * t.ln() - l;
    let mut t = l / p;
    let mut converged = false;
    for _ in 0..100 {
        let step = g(t) / (p + 2.0 / t);
        let next = (t - step).max(1.0);
        if (next - t).abs() <= 1e-14 * next {
            t = next;
            converged = true;
            break;
        }
        t = next;
    }
    if !converged {
        let (mut lo, mut hi) = (1.0_f64, l / p);
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        t = hi;
    }
    t.exp()
}

fn atoms_survival(a: &Atoms, t: f64, inclusive: bool) -> f64 {
    let mut s = KahanSum::new();
    for &(v, p) in a.points() {
        if v > t || (inclusive && v == t) {
            s.add(p);
        }
    }
    s.value().min(1.0)
}

impl DistributionModel {
    /// `P(X > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            Self::Pareto { scale, shape } => {
                if t < *scale {
                    1.0
                } else {
                    (scale / t).powf(*shape)
                }
            }
            Self::LogCorrectedTail { p } => {
                if t < E {
                    1.0
                } else {
                    t.powf(-p) / t.ln().powi(2)
                }
            }
            Self::DiscreteAtoms(a) => atoms_survival(a, t, false),
            Self::ZeroInflatedMix { zero_mass, body } => {
                if t < 0.0 {
                    1.0
                } else {
                    (1.0 - zero_mass) * body.survival(t)
                }
            }
            Self::MixingChain { marginal, .. } => marginal.survival(t),
        }
    }

    /// `P(X >= t)`.
    pub fn survival_incl(&self, t: f64) -> f64 {
        match self {
            Self::Pareto { scale, shape } => {
                if t <= *scale {
                    1.0
                } else {
                    (scale / t).powf(*shape)
                }
            }
            Self::LogCorrectedTail { p } => {
                if t <= E {
                    1.0
                } else {
                    t.powf(-p) / t.ln().powi(2)
                }
            }
            Self::DiscreteAtoms(a) => atoms_survival(a, t, true),
            Self::ZeroInflatedMix { zero_mass, body } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (1.0 - zero_mass) * body.survival_incl(t)
                }
            }
            Self::MixingChain { marginal, .. } => marginal.survival_incl(t),
        }
    }

    /// Smallest point of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            Self::Pareto { scale, .. } => *scale,
            Self::LogCorrectedTail { .. } => E,
            Self::DiscreteAtoms(a) => a.points()[0].0,
            Self::ZeroInflatedMix { .. } => 0.0,
            Self::MixingChain { marginal, .. } => marginal.support_min(),
        }
    }

    /// `inf { x : P(X > x) <= v }` for `v` in `(0, 1]`. Drives both sampling
    /// (with `v` uniform) and the population threshold (with `v = alpha`).
    pub fn inverse_survival(&self, v: f64) -> f64 {
        debug_assert!(v > 0.0 && v <= 1.0, "inverse_survival needs v in (0,1], got {v}");
        match self {
            Self::Pareto { scale, shape } => {
                if v >= 1.0 {
                    *scale
                } else {
                    scale * v.powf(-1.0 / shape)
                }
            }
            Self::LogCorrectedTail { p } => lct_inverse_survival(*p, v),
            Self::DiscreteAtoms(a) => {
                let pts = a.points();
                let mut tail = KahanSum::new();
                for i in (0..pts.len()).rev() {
                    // tail holds P(X > pts[i].0)
                    if tail.value() > v {
                        return pts[i + 1].0;
                    }
                    tail.add(pts[i].1);
                }
                pts[0].0
            }
            Self::ZeroInflatedMix { zero_mass, body } => {
                let keep = 1.0 - zero_mass;
                if v >= keep * body.survival(0.0) {
                    0.0
                } else {
                    body.inverse_survival((v / keep).min(1.0))
                }
            }
            Self::MixingChain { marginal, .. } => marginal.inverse_survival(v),
        }
    }

    /// `E (X - theta)_+ = int_theta^inf P(X > s) ds`.
    pub fn hinge_mean(&self, theta: f64) -> Result<f64> {
        match self {
            Self::Pareto { scale, shape } => {
                if *shape <= 1.0 {
                    return Err(Error::NonIntegrable(format!("Pareto shape {shape} has no mean")));
                }
                if theta <= *scale {
                    Ok(shape * scale / (shape - 1.0) - theta)
                } else {
                    Ok(scale.powf(*shape) * theta.powf(1.0 - shape) / (shape - 1.0))
                }
            }
            Self::LogCorrectedTail { p } => {
                let c = p - 1.0;
                if theta < E {
                    Ok(E - theta + exp_over_square_tail(c, 1.0))
                } else {
                    Ok(exp_over_square_tail(c, theta.ln()))
                }
            }
            Self::DiscreteAtoms(a) => Ok(a
                .points()
                .iter()
                .map(|&(v, p)| p * (v - theta).max(0.0))
                .collect::<KahanSum>()
                .value()),
            Self::ZeroInflatedMix { zero_mass, body } => {
                Ok(zero_mass * (-theta).max(0.0) + (1.0 - zero_mass) * body.hinge_mean(theta)?)
            }
            Self::MixingChain { marginal, .. } => marginal.hinge_mean(theta),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.hinge_mean(0.0)
    }

    /// Population threshold `theta*` and `CVaR_alpha = theta* + E(X - theta*)_+ / alpha`.
    pub fn population_var_cvar(&self, alpha: f64) -> Result<PopulationCvar> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(crate::error::invalid(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let theta_star = self.inverse_survival(alpha);
        let cvar = theta_star + self.hinge_mean(theta_star)? / alpha;
        Ok(PopulationCvar { theta_star, cvar })
    }

    /// Raw moment `E X^r`.
    pub fn moment(&self, r: f64) -> Moment {
        assert!(r > 0.0, "moment order must be positive");
        match self {
            Self::Pareto { scale, shape } => {
                if r >= *shape {
                    Moment::Infinite
                } else {
                    Moment::Finite(shape * scale.powf(r) / (shape - r))
                }
            }
            Self::LogCorrectedTail { p } => {
                if r > *p {
                    Moment::Infinite
                } else if r == *p {
                    Moment::Finite(p.exp() + p)
                } else {
                    Moment::Finite(r.exp() + r * exp_over_square_tail(p - r, 1.0))
                }
            }
            Self::DiscreteAtoms(a) => Moment::Finite(
                a.points()
                    .iter()
                    .map(|&(v, p)| p * v.powf(r))
                    .collect::<KahanSum>()
                    .value(),
            ),
            Self::ZeroInflatedMix { zero_mass, body } => match body.moment(r) {
                Moment::Finite(m) => Moment::Finite((1.0 - zero_mass) * m),
                Moment::Infinite => Moment::Infinite,
            },
            Self::MixingChain { marginal, .. } => marginal.moment(r),
        }
    }

    /// `E min(X, cap)^r`, always finite.
    pub fn truncated_moment(&self, r: f64, cap: f64) -> f64 {
        assert!(r > 0.0 && cap >= 0.0);
        match self {
            Self::Pareto { scale, shape } => {
                if cap <= *scale {
                    cap.powf(r)
                } else if r == *shape {
                    scale.powf(r) * (1.0 + r * (cap / scale).ln())
                } else {
                    scale.powf(r)
                        + r * scale.powf(*shape) * (cap.powf(r - shape) - scale.powf(r - shape)) / (r - shape)
                }
            }
            Self::LogCorrectedTail { p } => {
                if cap <= E {
                    cap.powf(r)
                } else {
                    r.exp() + r * exp_over_square_segment(p - r, cap.ln())
                }
            }
            Self::DiscreteAtoms(a) => a
                .points()
                .iter()
                .map(|&(v, p)| p * v.min(cap).powf(r))
                .collect::<KahanSum>()
                .value(),
            Self::ZeroInflatedMix { zero_mass, body } => (1.0 - zero_mass) * body.truncated_moment(r, cap),
            Self::MixingChain { marginal, .. } => marginal.truncated_moment(r, cap),
        }
    }

    /// Lebesgue density at `x`, or `None` where the law has an atom there or
    /// no density at all.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Self::Pareto { scale, shape } => {
                if x < *scale {
                    Some(0.0)
                } else if x == *scale {
                    None
                } else {
                    Some(shape * scale.powf(*shape) / x.powf(shape + 1.0))
                }
            }
            Self::LogCorrectedTail { p } => {
                if x < E {
                    Some(0.0)
                } else if x == E {
                    None
                } else {
                    let l = x.ln();
                    Some(x.powf(-p - 1.0) / (l * l) * (p + 2.0 / l))
                }
            }
            Self::DiscreteAtoms(_) => None,
            Self::ZeroInflatedMix { zero_mass, body } => {
                if x == 0.0 {
                    None
                } else {
                    body.density(x).map(|d| (1.0 - zero_mass) * d)
                }
            }
            Self::MixingChain { marginal, .. } => marginal.density(x),
        }
    }

    /// Density at the population threshold `theta*(alpha)`, if it exists.
    pub fn density_at_quantile(&self, alpha: f64) -> Option<f64> {
        self.density(self.inverse_survival(alpha))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::RiskSpec;

    fn pareto(a: f64) -> DistributionModel {
        DistributionModel::pareto(1.0, a).unwrap()
    }

    fn two_atoms() -> DistributionModel {
        DistributionModel::atoms([(0.0, 0.7), (10.0, 0.3)]).unwrap()
    }

    #[test]
    fn survival_examples() {
        assert_eq!(pareto(2.0).survival(2.0), 0.25);
        assert_eq!(two_atoms().survival(0.0), 0.3);
        for m in [pareto(2.0), two_atoms(), DistributionModel::log_corrected_tail(1.5).unwrap()] {
            assert_eq!(m.survival(-1.0), 1.0);
        }
    }

    #[test]
    fn hinge_examples() {
        assert!((pareto(2.0).hinge_mean(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((two_atoms().hinge_mean(4.0).unwrap() - 1.8).abs() < 1e-15);
        assert!(matches!(pareto(1.0).hinge_mean(2.0), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn population_examples() {
        let pc = pareto(2.0).population_var_cvar(0.25).unwrap();
        assert!((pc.theta_star - 2.0).abs() < 1e-12 && (pc.cvar - 4.0).abs() < 1e-12);
        let pc = two_atoms().population_var_cvar(0.4).unwrap();
        assert_eq!(pc.theta_star, 0.0);
        assert!((pc.cvar - 7.5).abs() < 1e-12);
        let c = DistributionModel::atoms([(3.5, 1.0)]).unwrap();
        for alpha in [0.01, 0.3, 0.99] {
            let pc = c.population_var_cvar(alpha).unwrap();
            assert_eq!((pc.theta_star, pc.cvar), (3.5, 3.5));
        }
    }

    #[test]
    fn atom_threshold_at_boundary() {
        // P(X > 0) = 0.3 exactly, so the threshold at alpha = 0.3 is 0.
        assert_eq!(two_atoms().inverse_survival(0.3), 0.0);
        assert_eq!(two_atoms().inverse_survival(0.29), 10.0);
    }

    #[test]
    fn moment_examples() {
        assert_eq!(pareto(2.0).moment(3.0), Moment::Infinite);
        assert!((two_atoms().moment(2.0).value().unwrap() - 30.0).abs() < 1e-12);
        let y = DistributionModel::log_corrected_tail(1.5).unwrap();
        assert_eq!(y.moment(2.0), Moment::Infinite);
        assert!(y.moment(1.5).is_finite());
    }

    /// `E_1(x) = int_x^inf e^-t / t dt` by its convergent series.
    fn exp_integral_e1(x: f64) -> f64 {
        let mut sum = -0.577_215_664_901_532_9 - x.ln();
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            sum -= term / k as f64;
        }
        sum
    }

    #[test]
    fn tail_quadrature_against_exponential_integral() {
        // int_a^inf e^{-cu} u^-2 du = e^{-ca}/a - c E_1(c a)
        for &(c, a) in &[(0.5_f64, 1.0_f64), (0.2, 1.0), (0.9, 2.3), (0.05, 1.0)] {
            let exact = (-c * a).exp() / a - c * exp_integral_e1(c * a);
            let got = exp_over_square_tail(c, a);
            assert!((got - exact).abs() <= 1e-8 * exact, "c={c} a={a}: {got} vs {exact}");
        }
    }

    #[test]
    fn lct_moment_at_p_matches_truncation_limit() {
        let y = DistributionModel::log_corrected_tail(1.5).unwrap();
        let full = y.moment(1.5).value().unwrap();
        let t = y.truncated_moment(1.5, 1e200);
        // Remaining tail of int u^-2 beyond ln(1e200) is 1/460.5.
        assert!((full - t - 1.5 / 1e200_f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn lct_inverse_roundtrip() {
        let y = DistributionModel::log_corrected_tail(1.5).unwrap();
        for &v in &[0.2, 0.05, 1e-3, 1e-8, 1e-15, 1e-300] {
            let x = y.inverse_survival(v);
            assert!((y.survival(x) / v - 1.0).abs() < 1e-11, "v={v}");
        }
        assert_eq!(y.inverse_survival(0.5), E);
    }

    #[test]
    fn zero_inflated_threshold() {
        let body = pareto(2.0);
        let z = DistributionModel::zero_inflated(0.6, body).unwrap();
        assert_eq!(z.inverse_survival(0.5), 0.0);
        // P(Z > t) = 0.4 / t^2 = 0.1 at t = 2
        assert!((z.inverse_survival(0.1) - 2.0).abs() < 1e-12);
        let pc = z.population_var_cvar(0.5).unwrap();
        assert_eq!(pc.theta_star, 0.0);
        assert!((pc.cvar - 0.4 * 2.0 / 0.5).abs() < 1e-12);
    }

    #[test]
    fn pareto_closed_forms() {
        for &(a, alpha) in &[(2.5, 0.1), (1.6, 0.05), (3.0, 0.5)] {
            let m = pareto(a);
            let pc = m.population_var_cvar(alpha).unwrap();
            let th = alpha.powf(-1.0 / a);
            assert!((pc.theta_star / th - 1.0).abs() < 1e-9);
            assert!((pc.cvar / (th * a / (a - 1.0)) - 1.0).abs() < 1e-9);
        }
        let spec = RiskSpec::new(0.1, 1.0, 5.0).unwrap();
        assert_eq!(pareto(2.5).moment(1.0 + spec.lambda), Moment::Finite(5.0));
    }

    #[test]
    fn hinge_derivative_is_minus_survival() {
        let models = [
            pareto(2.5),
            DistributionModel::log_corrected_tail(1.5).unwrap(),
            DistributionModel::zero_inflated(0.3, pareto(1.8)).unwrap(),
        ];
        for m in &models {
            for &t in &[0.5, 1.7, 3.0, 4.2, 10.0, 55.0] {
                if t == m.support_min() {
                    continue;
                }
                let h = 1e-5 * t.max(1.0);
                let d = (m.hinge_mean(t + h).unwrap() - m.hinge_mean(t - h).unwrap()) / (2.0 * h);
                assert!((d + m.survival(t)).abs() < 1e-5, "{m:?} at {t}: {d}");
            }
        }
    }

    #[test]
    fn lct_truncated_moment_growth() {
        let y = DistributionModel::log_corrected_tail(1.5).unwrap();
        let bound = y.moment(1.5).value().unwrap();
        let mut prev_hi = 0.0;
        for k in [2, 4, 6, 8] {
            let t = (k as f64).exp();
            assert!(y.truncated_moment(1.5, t) <= bound);
            let hi = y.truncated_moment(1.7, t);
            assert!(hi > prev_hi);
            prev_hi = hi;
        }
        // Slow divergence: far out, the order-1.7 truncated moment exceeds the order-1.5 moment.
        assert!(y.truncated_moment(1.7, 40f64.exp()) > 3.0 * bound);
    }
}
