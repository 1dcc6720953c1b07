use crate::error::{invalid, Result};

/// Tail level, moment exponent and moment bound: `E X^(1+lambda) <= M`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskSpec {
    pub alpha: f64,
    pub lambda: f64,
    pub moment_bound: f64,
}

impl RiskSpec {
    pub fn new(alpha: f64, lambda: f64, moment_bound: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(invalid(format!("lambda must lie in (0,1], got {lambda}")));
        }
        if !(moment_bound > 0.0 && moment_bound.is_finite()) {
            return Err(invalid(format!("moment bound must be positive, got {moment_bound}")));
        }
        Ok(Self {
            alpha,
            lambda,
            moment_bound,
        })
    }

    /// The heavy-tail rate exponent `lambda / (1 + lambda)`.
    pub fn rate_exponent(&self) -> f64 {
        self.lambda / (1.0 + self.lambda)
    }

    /// Upper bound `M^(1/(1+lambda)) / alpha` on every RU minimizer.
    pub fn threshold_bound(&self) -> f64 {
        self.moment_bound.powf(1.0 / (1.0 + self.lambda)) / self.alpha
    }
}

/// Finite law given by `(value, probability)` pairs, sorted by value.
#[derive(Clone, Debug, PartialEq)]
pub struct Atoms {
    points: Vec<(f64, f64)>,
}

impl Atoms {
    /// Sorts, merges repeated values and drops zero-mass atoms.
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = points.into_iter().collect();
        for &(v, p) in &pts {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("atom value must be finite and >= 0, got {v}")));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(invalid(format!("atom probability must be >= 0, got {p}")));
            }
        }
        let total: f64 = pts.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("atom probabilities sum to {total}, not 1")));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for (v, p) in pts {
            if p == 0.0 {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        if merged.is_empty() {
            return Err(invalid("atom list is empty"));
        }
        Ok(Self { points: merged })
    }

    /// Point mass at `value`.
    pub fn dirac(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    /// Uniform weights on the given values (the empirical law).
    pub fn empirical(values: &[f64]) -> Result<Self> {
        let w = 1.0 / values.len() as f64;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for v in sorted {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("sample value must be finite and >= 0, got {v}")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        if merged.is_empty() {
            return Err(invalid("empty sample"));
        }
        Ok(Self { points: merged })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Loss-generating law.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionModel {
    /// `P(X > x) = (scale / x)^shape` for `x >= scale`.
    Pareto { scale: f64, shape: f64 },
    /// `P(Y > y) = y^-p (log y)^-2` for `y >= e`, with the remaining mass
    /// `1 - e^-p` placed as an atom at `e`. Finite `p`-th moment, infinite
    /// moments of every higher order.
    LogCorrectedTail { p: f64 },
    DiscreteAtoms(Atoms),
    /// Zero with probability `zero_mass`, otherwise a draw from `body`.
    ZeroInflatedMix {
        zero_mass: f64,
        body: Box<DistributionModel>,
    },
    /// Stationary Gaussian-copula AR(1) chain with the given marginal law.
    MixingChain {
        marginal: Box<DistributionModel>,
        rho: f64,
    },
}

impl DistributionModel {
    /// Pareto law. Shapes in `(0, 1]` are accepted for tail and sampling
    /// work, but every mean-based oracle reports them as non-integrable.
    pub fn pareto(scale: f64, shape: f64) -> Result<Self> {
        let m = Self::Pareto { scale, shape };
        m.validate()?;
        Ok(m)
    }

    pub fn log_corrected_tail(p: f64) -> Result<Self> {
        let m = Self::LogCorrectedTail { p };
        m.validate()?;
        Ok(m)
    }

    pub fn atoms(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Ok(Self::DiscreteAtoms(Atoms::new(points)?))
    }

    pub fn zero_inflated(zero_mass: f64, body: DistributionModel) -> Result<Self> {
        let m = Self::ZeroInflatedMix {
            zero_mass,
            body: Box::new(body),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn mixing_chain(marginal: DistributionModel, rho: f64) -> Result<Self> {
        let m = Self::MixingChain {
            marginal: Box::new(marginal),
            rho,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pareto { scale, shape } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(invalid(format!("Pareto scale must be positive, got {scale}")));
                }
                if !(*shape > 0.0 && shape.is_finite()) {
                    return Err(invalid(format!("Pareto shape must be positive, got {shape}")));
                }
            }
            Self::LogCorrectedTail { p } => {
                if !(*p > 1.0 && *p < 2.0) {
                    return Err(invalid(format!("log-corrected tail needs p in (1,2), got {p}")));
                }
            }
            Self::DiscreteAtoms(_) => {}
            Self::ZeroInflatedMix { zero_mass, body } => {
                if !(*zero_mass > 0.0 && *zero_mass < 1.0) {
                    return Err(invalid(format!("zero mass must lie in (0,1), got {zero_mass}")));
                }
                if matches!(**body, Self::MixingChain { .. }) {
                    return Err(invalid("a mixing chain cannot be the body of a mixture"));
                }
                body.validate()?;
            }
            Self::MixingChain { marginal, rho } => {
                if !(*rho > -1.0 && *rho < 1.0) {
                    return Err(invalid(format!("chain correlation must lie in (-1,1), got {rho}")));
                }
                if matches!(**marginal, Self::MixingChain { .. }) {
                    return Err(invalid("chain marginal cannot itself be a chain"));
                }
                marginal.validate()?;
            }
        }
        Ok(())
    }

    /// The one-dimensional marginal law (the model itself unless it is a chain).
    pub fn marginal(&self) -> &DistributionModel {
        match self {
            Self::MixingChain { marginal, .. } => marginal,
            other => other,
        }
    }

    pub fn is_chain(&self) -> bool {
        matches!(self, Self::MixingChain { .. })
    }
}

/// Realized nonnegative losses plus the key of the stream that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    pub seed_tag: u64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, seed_tag: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sample set must be nonempty"));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("sample values must be finite and >= 0, got {v}")));
        }
        Ok(Self { values, seed_tag })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_atoms(&self) -> Atoms {
        Atoms::empirical(&self.values).expect("validated on construction")
    }
}
