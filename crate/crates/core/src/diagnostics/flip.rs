use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::distributions::DistributionModel;
use crate::erm::{FlipArm, FlipPairLaw, LossMap};
use crate::error::{invalid, Result};
use crate::harness::{fit_slope, SlopeFit};
use crate::risk::{check_alpha, empirical_cvar};
use crate::rng::Stream;

/// Tail-scarcity flip experiment on the zero-inflated log-corrected law.
#[derive(Clone, Debug, PartialEq)]
pub struct FlipConfig {
    /// Tail index of `Y`, in `(1, 2)`.
    pub p: f64,
    pub alpha: f64,
    /// Mass removed from the positive part, in `(0, alpha/4)`.
    pub eps_mix: f64,
    pub gamma: f64,
    pub c_frac: f64,
    pub n_grid: Vec<usize>,
    pub replications: usize,
}

impl Default for FlipConfig {
    fn default() -> Self {
        Self {
            p: 1.5,
            alpha: 0.3,
            eps_mix: 0.05,
            gamma: 0.5,
            c_frac: 0.5,
            n_grid: (6..=12).map(|k| 1usize << k).collect(),
            replications: 200_000,
        }
    }
}

impl FlipConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(self.p > 1.0 && self.p < 2.0) {
            return Err(invalid(format!("tail index must lie in (1,2), got {}", self.p)));
        }
        if !(self.eps_mix > 0.0 && self.eps_mix < self.alpha / 4.0) {
            return Err(invalid(format!("eps_mix must lie in (0, alpha/4), got {}", self.eps_mix)));
        }
        if !(self.gamma > 0.0) {
            return Err(invalid("gamma must be positive"));
        }
        if !(self.c_frac > self.alpha * self.gamma && self.c_frac < 1.0) {
            return Err(invalid(format!(
                "c_frac must lie in (alpha*gamma, 1) = ({}, 1), got {}",
                self.alpha * self.gamma,
                self.c_frac
            )));
        }
        if self.replications == 0 || self.n_grid.is_empty() || self.n_grid.iter().any(|&n| n < 2) {
            return Err(invalid("flip experiment needs replications and sample sizes of at least 2"));
        }
        Ok(())
    }

    fn law(&self, n: usize) -> Result<FlipPairLaw> {
        Ok(FlipPairLaw {
            alpha: self.alpha,
            eps: self.eps_mix,
            y: DistributionModel::log_corrected_tail(self.p)?,
            n_scale: n as f64,
            gamma: self.gamma,
            c_frac: self.c_frac,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipRow {
    pub n: usize,
    pub replications: usize,
    pub witnesses: usize,
    pub flips: usize,
    pub frequency: f64,
    /// Population `R(B) - R(A)` at this `n`.
    pub population_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlipReport {
    pub rows: Vec<FlipRow>,
    /// Fit of `log(freq (log n)^2)` on `log n` over rows with flips.
    pub fit: Option<SlopeFit>,
    /// Sample sizes left out of the fit for having no flips.
    pub excluded: Vec<usize>,
    /// Frequency nonincreasing in `n` up to three Monte Carlo standard errors.
    pub monotone: bool,
    pub target_slope: f64,
}

struct Arms {
    a: LossMap,
    b: LossMap,
}

impl Arms {
    /// 0 for A, 1 for B; ties go to A.
    fn argmin(&self, zs: &[f64], alpha: f64) -> Result<usize> {
        let la: Vec<f64> = zs.iter().map(|&z| self.a.eval_scalar(z)).collect();
        let lb: Vec<f64> = zs.iter().map(|&z| self.b.eval_scalar(z)).collect();
        let ra = empirical_cvar(&la, alpha)?.value;
        let rb = empirical_cvar(&lb, alpha)?.value;
        Ok(usize::from(rb < ra))
    }
}

/// One replication: `(witness, flip)`.
///
/// Counts are drawn first: `N_+ ~ Bin(n, alpha - eps)` positives, of which
/// `K_bin` land in `(n, 2n]` and `K_over` above `2n`. Values are generated
/// only when the witness is present, conditionally on their region, which
/// leaves the joint law unchanged.
fn replicate(cfg: &FlipConfig, n: usize, y: &DistributionModel, arms: &Arms, stream: &Stream) -> Result<(bool, bool)> {
    let mut rng = stream.rng();
    let nf = n as f64;
    let s_n = y.survival(nf);
    let s_2n = y.survival(2.0 * nf);
    let p_pos = cfg.alpha - cfg.eps_mix;
    let draw = |rng: &mut _, trials: u64, p: f64| -> u64 {
        if trials == 0 || p <= 0.0 {
            0
        } else if p >= 1.0 {
            trials
        } else {
            Binomial::new(trials, p).expect("valid binomial").sample(rng)
        }
    };
    let n_pos = draw(&mut rng, n as u64, p_pos);
    let k_bin = draw(&mut rng, n_pos, s_n - s_2n);
    let k_over = draw(&mut rng, n_pos - k_bin, s_2n / (1.0 - (s_n - s_2n)));
    let n_zero = n as u64 - n_pos;
    let witness = k_bin == 1 && n_pos >= 2 && n_zero as f64 >= (1.0 - cfg.alpha) * nf + 1.0;
    if !witness {
        return Ok((false, false));
    }
    let mut zs = vec![0.0; n];
    let mut next = n_zero as usize;
    let mut fill = |rng: &mut rand_chacha::ChaCha8Rng, count: u64, hi: f64, lo: f64| -> usize {
        let start = next;
        for _ in 0..count {
            // v uniform on (lo, hi], survival level of the drawn point.
            let v = hi - (hi - lo) * rng.random::<f64>();
            zs[next] = y.inverse_survival(v.max(f64::MIN_POSITIVE));
            next += 1;
        }
        start
    };
    let n_body = n_pos - k_bin - k_over;
    fill(&mut rng, n_body, 1.0, s_n);
    fill(&mut rng, k_over, s_2n, 0.0);
    let bin_at = fill(&mut rng, 1, s_n, s_2n);
    if arms.argmin(&zs, cfg.alpha)? != 1 {
        return Ok((true, false));
    }
    zs[bin_at] = 0.0;
    Ok((true, arms.argmin(&zs, cfg.alpha)? == 0))
}

/// Frequency of certified decision flips per sample size.
pub fn flip_experiment(cfg: &FlipConfig, stream: &Stream) -> Result<FlipReport> {
    cfg.validate()?;
    let y = DistributionModel::log_corrected_tail(cfg.p)?;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for (gi, &n) in cfg.n_grid.iter().enumerate() {
        let nf = n as f64;
        let arms = Arms {
            a: LossMap::flip_pair(nf, cfg.gamma, cfg.c_frac, FlipArm::A)?,
            b: LossMap::flip_pair(nf, cfg.gamma, cfg.c_frac, FlipArm::B)?,
        };
        let outcomes: Vec<(bool, bool)> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| replicate(cfg, n, &y, &arms, &stream.path(&[gi as u64, r as u64])))
            .collect::<Result<_>>()?;
        let witnesses = outcomes.iter().filter(|o| o.0).count();
        let flips = outcomes.iter().filter(|o| o.1).count();
        rows.push(FlipRow {
            n,
            replications: cfg.replications,
            witnesses,
            flips,
            frequency: flips as f64 / cfg.replications as f64,
            population_gap: cfg.law(n)?.gap(),
        });
        log::debug!("flip n={n}: {flips} flips in {witnesses} witnesses");
    }
    let (kept, excluded): (Vec<&FlipRow>, Vec<&FlipRow>) = rows.iter().partition(|r| r.flips > 0);
    let pts: Vec<(f64, f64)> = kept
        .iter()
        .map(|r| {
            let ln = (r.n as f64).ln();
            (r.n as f64, r.frequency * ln * ln)
        })
        .collect();
    let fit = if pts.len() >= 3 { Some(fit_slope(&pts)?) } else { None };
    let se = |r: &FlipRow| (r.frequency * (1.0 - r.frequency) / r.replications as f64).sqrt();
    let monotone = rows
        .windows(2)
        .all(|w| w[1].frequency <= w[0].frequency + 3.0 * (se(&w[0]).powi(2) + se(&w[1]).powi(2)).sqrt());
    Ok(FlipReport {
        excluded: excluded.iter().map(|r| r.n).collect(),
        rows,
        fit,
        monotone,
        target_slope: 1.0 - cfg.p,
    })
}
