use rand::Rng;

use super::{least_argmin, ErmResult, Record};
use crate::distributions::{sample_into, upper_quantile, DistributionModel, TailLaw};
use crate::error::{invalid, Result};
use crate::rng::Stream;

/// Population CVaR of each hypothesis in a class, in class order.
pub trait PopulationRisk {
    fn len(&self) -> usize;
    fn population_cvar(&self, index: usize) -> Result<f64>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn all(&self) -> Result<Vec<f64>> {
        (0..self.len()).map(|i| self.population_cvar(i)).collect()
    }
}

/// `R(h_hat) - min_h R(h)`.
pub fn excess_risk(result: &ErmResult, oracle: &dyn PopulationRisk) -> Result<f64> {
    if result.chosen_index >= oracle.len() {
        return Err(invalid("chosen hypothesis is outside the oracle's class"));
    }
    let all = oracle.all()?;
    let best = all[least_argmin(&all)];
    Ok((all[result.chosen_index] - best).max(0.0))
}

/// Hypothesis `i` has loss law `laws[i]`.
#[derive(Clone, Debug)]
pub struct PerHypothesisLaw {
    pub alpha: f64,
    pub laws: Vec<DistributionModel>,
}

impl PopulationRisk for PerHypothesisLaw {
    fn len(&self) -> usize {
        self.laws.len()
    }
    fn population_cvar(&self, index: usize) -> Result<f64> {
        Ok(self.laws[index].population_var_cvar(self.alpha)?.cvar)
    }
}

/// The two flip losses (index 0 = arm A, 1 = arm B) under the mixture
/// `Z = 0` w.p. `1 - alpha + eps`, else `Z = Y`.
#[derive(Clone, Debug)]
pub struct FlipPairLaw {
    pub alpha: f64,
    pub eps: f64,
    pub y: DistributionModel,
    pub n_scale: f64,
    pub gamma: f64,
    pub c_frac: f64,
}

impl FlipPairLaw {
    pub fn mixture(&self) -> Result<DistributionModel> {
        DistributionModel::zero_inflated(1.0 - self.alpha + self.eps, self.y.clone())
    }

    /// `P(n < Y <= 2n)`.
    pub fn bin_mass(&self) -> f64 {
        self.y.survival(self.n_scale) - self.y.survival(2.0 * self.n_scale)
    }

    /// `R(B) - R(A) = ((alpha - eps)/alpha) (gamma - C n P(n < Y <= 2n))`.
    pub fn gap(&self) -> f64 {
        (self.alpha - self.eps) / self.alpha * (self.gamma - self.c_frac * self.n_scale * self.bin_mass())
    }
}

impl PopulationRisk for FlipPairLaw {
    fn len(&self) -> usize {
        2
    }
    fn population_cvar(&self, index: usize) -> Result<f64> {
        let a = self.mixture()?.population_var_cvar(self.alpha)?.cvar;
        match index {
            0 => Ok(a),
            // Both losses vanish on Z = 0 and P(Z > 0) <= alpha, so the
            // threshold is 0 and the CVaR is the mean over alpha.
            1 => Ok(a + self.gap()),
            _ => Err(invalid("flip pair has two hypotheses")),
        }
    }
}

/// `y = beta x + xi`, `x` uniform on a finite design, scored by `|h x - y|`
/// for each slope in `slopes`.
#[derive(Clone, Debug)]
pub struct LinearNoiseLaw {
    pub alpha: f64,
    pub design: Vec<f64>,
    pub beta: f64,
    pub noise: DistributionModel,
    pub slopes: Vec<f64>,
}

/// Law of `|xi - c|` with `c` uniform over `centers`.
struct AbsDeviation<'a> {
    noise: &'a DistributionModel,
    centers: Vec<f64>,
}

impl TailLaw for AbsDeviation<'_> {
    fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        let s: f64 = self
            .centers
            .iter()
            .map(|&c| self.noise.survival(c + t) + 1.0 - self.noise.survival_incl(c - t))
            .sum();
        s / self.centers.len() as f64
    }
    fn survival_incl(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let s: f64 = self
            .centers
            .iter()
            .map(|&c| self.noise.survival_incl(c + t) + 1.0 - self.noise.survival(c - t))
            .sum();
        s / self.centers.len() as f64
    }
}

impl AbsDeviation<'_> {
    /// `E(|xi - c| - theta)_+` for `theta >= 0`, via
    /// `int_0^u P(xi < s) ds = u - E xi + E(xi - u)_+`.
    fn hinge(&self, theta: f64) -> Result<f64> {
        let mean = self.noise.mean()?;
        let mut total = 0.0;
        for &c in &self.centers {
            total += self.noise.hinge_mean(c + theta)?;
            let u = c - theta;
            if u > 0.0 {
                total += u - mean + self.noise.hinge_mean(u)?;
            }
        }
        Ok(total / self.centers.len() as f64)
    }
}

impl LinearNoiseLaw {
    pub fn cvar_at_slope(&self, h: f64) -> Result<f64> {
        if self.noise.support_min() < 0.0 {
            return Err(invalid("noise must be nonnegative"));
        }
        let law = AbsDeviation {
            noise: &self.noise,
            centers: self.design.iter().map(|&x| (h - self.beta) * x).collect(),
        };
        let theta = upper_quantile(&law, self.alpha).max(0.0);
        Ok(theta + law.hinge(theta)? / self.alpha)
    }
}

impl PopulationRisk for LinearNoiseLaw {
    fn len(&self) -> usize {
        self.slopes.len()
    }
    fn population_cvar(&self, index: usize) -> Result<f64> {
        self.cvar_at_slope(self.slopes[index])
    }
}

/// Draws `n` records `y = beta x + xi` with `x` uniform on `design`.
pub fn linear_records(design: &[f64], beta: f64, noise: &DistributionModel, n: usize, stream: &Stream) -> Vec<Record> {
    let mut rng = stream.rng();
    let mut xi = vec![0.0; n];
    sample_into(noise, &mut rng, &mut xi);
    xi.into_iter()
        .map(|e| {
            let x = design[rng.random_range(0..design.len())];
            Record { x: vec![x], y: beta * x + e }
        })
        .collect()
}
