use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::diagnostics::FlipConfig;
use crate::distributions::{Atoms, DistributionModel, RiskSpec};
use crate::erm::ErmObjective;
use crate::error::{Error, Result};
use crate::mom::{ContaminationStrategy, MomConfig, TruncationMode};
use crate::risk::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Estimate,
    RateSweep,
    ContamSweep,
    Erm,
    Bk,
    Stability,
    IfCheck,
    Flip,
    DepSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Self::Estimate,
        Self::RateSweep,
        Self::ContamSweep,
        Self::Erm,
        Self::Bk,
        Self::Stability,
        Self::IfCheck,
        Self::Flip,
        Self::DepSweep,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Estimate => "estimate",
            Self::RateSweep => "rate-sweep",
            Self::ContamSweep => "contam-sweep",
            Self::Erm => "erm",
            Self::Bk => "bk",
            Self::Stability => "stability",
            Self::IfCheck => "ifcheck",
            Self::Flip => "flip",
            Self::DepSweep => "dep-sweep",
        }
    }

    /// Stage index used to key random streams.
    pub(crate) fn stage(&self) -> u64 {
        Self::ALL.iter().position(|e| e == self).expect("listed") as u64
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|e| e.as_str() == s || e.as_str().replace('-', "_") == s)
            .ok_or_else(|| crate::error::invalid(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassKind {
    Finite,
    Net,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    Abs,
    Sq,
    Flip,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErmSettings {
    pub class: ClassKind,
    pub loss: LossKind,
    pub objective: ErmObjective,
    /// CSV with feature columns `x*` and a target column `y`; synthetic data
    /// when absent.
    pub data: Option<PathBuf>,
    /// Candidate slopes of the finite class.
    pub slopes: Vec<f64>,
    pub dim: usize,
    pub radius: f64,
    pub eta: f64,
    /// True slope and design of the synthetic data.
    pub beta: f64,
    pub design: Vec<f64>,
}

impl Default for ErmSettings {
    fn default() -> Self {
        Self {
            class: ClassKind::Finite,
            loss: LossKind::Abs,
            objective: ErmObjective::Emp,
            data: None,
            slopes: vec![0.5, 1.0, 1.5, 2.0],
            dim: 1,
            radius: 3.0,
            eta: 0.25,
            beta: 1.0,
            design: vec![1.0, 2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySettings {
    pub deltas: Vec<f64>,
    /// Mass-transfer target; location shifts when absent.
    pub mass_point: Option<f64>,
    /// Plateau width of the flat-margin construction.
    pub plateau: f64,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        Self {
            deltas: vec![1e-4, 1e-3, 1e-2, 1e-1],
            mass_point: None,
            plateau: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceSettings {
    pub beta: Vec<f64>,
    /// Noise levels of the margin sweep; the margin falls as the noise grows.
    pub noise_sds: Vec<f64>,
    pub z_x: Vec<f64>,
    /// Contamination target, as an offset from `<beta, z_x>`.
    pub z_offset: f64,
    pub eps_grid: Vec<f64>,
}

impl Default for InfluenceSettings {
    fn default() -> Self {
        Self {
            beta: vec![2.0],
            noise_sds: vec![1.0, 2.0, 4.0, 8.0],
            z_x: vec![1.0],
            z_offset: 40.0,
            eps_grid: vec![1e-2, 1e-3],
        }
    }
}

/// Fully resolved experiment description. Every key has a default except
/// `experiment`.
///
/// The text format is flat `key = value` lines with `#` comments; lists are
/// comma separated and atoms are written `value:mass`.
///
/// | key | meaning |
/// |---|---|
/// | `experiment` | estimate, rate-sweep, contam-sweep, erm, bk, stability, ifcheck, flip, dep-sweep |
/// | `seed`, `replications`, `n` | root seed, Monte Carlo replications, fixed sample size |
/// | `n_grid`, `eps_grid` | sweep grids, strictly increasing |
/// | `estimator` | emp, trunc or tmom |
/// | `out` | output directory |
/// | `risk.alpha`, `risk.lambda`, `risk.moment_bound` | tail level and moment assumption |
/// | `dist.kind` | pareto (`dist.scale`, `dist.shape`), lct (`dist.p`) or atoms (`dist.atoms`) |
/// | `dist.zero_mass`, `dist.rho` | wrap in a zero-inflated mix, then in a mixing chain |
/// | `mom.k`, `mom.delta`, `mom.gamma`, `mom.truncation`, `mom.b`, `mom.d`, `mom.c_lambda`, `mom.eta` | T-MoM settings |
/// | `contam.strategy`, `contam.value` | large_atom, tail_shift or zero_out |
/// | `target.slope`, `target.tolerance` | override the default rate target |
/// | `erm.*` | class, loss, objective, data, slopes, dim, radius, eta, beta, design |
/// | `bk.scales` | affine loss scales probed by the decomposition |
/// | `stability.*` | deltas, mass_point, plateau |
/// | `influence.*` | beta, noise_sds, z_x, z_offset, eps_grid |
/// | `flip.*` | p, eps_mix, gamma, c_frac (alpha comes from `risk.alpha`) |
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub replications: usize,
    pub n: usize,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub estimator: Method,
    pub spec: RiskSpec,
    pub dist: DistributionModel,
    pub mom: MomConfig,
    pub contam: ContaminationStrategy,
    pub target_slope: Option<f64>,
    pub tolerance: Option<f64>,
    pub erm: ErmSettings,
    pub bk_scales: Vec<f64>,
    pub stability: StabilitySettings,
    pub influence: InfluenceSettings,
    pub flip: FlipConfig,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        // The flip construction needs eps_mix < alpha/4.
        let alpha = if experiment == Experiment::Flip { 0.3 } else { 0.1 };
        let pareto = DistributionModel::pareto(1.0, 2.5).expect("valid default");
        let dist = if experiment == Experiment::DepSweep {
            DistributionModel::mixing_chain(pareto, 0.6).expect("valid default")
        } else {
            pareto
        };
        Self {
            experiment,
            seed: 1,
            replications: 200,
            n: 1024,
            n_grid: (7..=12).map(|k| 1usize << k).collect(),
            eps_grid: vec![0.01, 0.02, 0.04, 0.08, 0.16],
            estimator: Method::Empirical,
            spec: RiskSpec::new(alpha, 1.0, 5.0).expect("valid default"),
            dist,
            mom: MomConfig::default(),
            contam: ContaminationStrategy::LargeAtom(1e8),
            target_slope: None,
            tolerance: None,
            erm: ErmSettings::default(),
            bk_scales: vec![1.0],
            stability: StabilitySettings::default(),
            influence: InfluenceSettings::default(),
            flip: FlipConfig {
                n_grid: (7..=12).map(|k| 1usize << k).collect(),
                replications: 200,
                alpha,
                ..FlipConfig::default()
            },
            output_dir: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    /// Checks cross-field invariants after parsing or manual edits.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| Error::Config {
            line: 0,
            key: key.to_string(),
            message,
        };
        if self.replications == 0 {
            return Err(bad("replications", "must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("n_grid", "must be nonempty and strictly increasing".into()));
        }
        if self.eps_grid.is_empty() || self.eps_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(bad("eps_grid", "must be nonempty and strictly increasing".into()));
        }
        self.dist.validate().map_err(|e| bad("dist", e.to_string()))?;
        self.mom.validate().map_err(|e| bad("mom", e.to_string()))?;
        if self.experiment == Experiment::Flip {
            self.flip.validate().map_err(|e| bad("flip", e.to_string()))?;
        }
        if self.experiment == Experiment::DepSweep && !self.dist.is_chain() {
            return Err(bad("dist.rho", "dep-sweep needs a mixing chain".into()));
        }
        Ok(())
    }

    /// Canonical text with every key, parseable back into the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("experiment", self.experiment.as_str().into());
        put("seed", self.seed.to_string());
        put("replications", self.replications.to_string());
        put("n", self.n.to_string());
        put("n_grid", list(&self.n_grid));
        put("eps_grid", list(&self.eps_grid));
        put("estimator", estimator_name(self.estimator).into());
        if let Some(o) = &self.output_dir {
            put("out", o.display().to_string());
        }
        put("risk.alpha", self.spec.alpha.to_string());
        put("risk.lambda", self.spec.lambda.to_string());
        put("risk.moment_bound", self.spec.moment_bound.to_string());
        let (mut inner, mut zero, mut rho) = (&self.dist, None, None);
        if let DistributionModel::MixingChain { marginal, rho: r } = inner {
            rho = Some(*r);
            inner = marginal;
        }
        if let DistributionModel::ZeroInflatedMix { zero_mass, body } = inner {
            zero = Some(*zero_mass);
            inner = body;
        }
        match inner {
            DistributionModel::Pareto { scale, shape } => {
                put("dist.kind", "pareto".into());
                put("dist.scale", scale.to_string());
                put("dist.shape", shape.to_string());
            }
            DistributionModel::LogCorrectedTail { p } => {
                put("dist.kind", "lct".into());
                put("dist.p", p.to_string());
            }
            DistributionModel::DiscreteAtoms(a) => {
                put("dist.kind", "atoms".into());
                let pts: Vec<String> = a.points().iter().map(|(v, m)| format!("{v}:{m}")).collect();
                put("dist.atoms", pts.join(", "));
            }
            // Nested wrappers beyond one level are not expressible in the text format.
            other => put("dist.kind", format!("{other:?}")),
        }
        if let Some(z) = zero {
            put("dist.zero_mass", z.to_string());
        }
        if let Some(r) = rho {
            put("dist.rho", r.to_string());
        }
        let m = &self.mom;
        if let Some(k) = m.k_blocks {
            put("mom.k", k.to_string());
        }
        put("mom.delta", m.delta.to_string());
        put("mom.gamma", m.gamma.to_string());
        put(
            "mom.truncation",
            match m.truncation_mode {
                TruncationMode::Stat => "stat",
                TruncationMode::Adv => "adv",
                TruncationMode::MinOfBoth => "min",
                TruncationMode::Manual => "manual",
            }
            .into(),
        );
        if let Some(b) = m.manual_b {
            put("mom.b", b.to_string());
        }
        put("mom.d", m.d_complexity.to_string());
        if let Some(c) = m.c_lambda {
            put("mom.c_lambda", c.to_string());
        }
        if let Some(e) = m.eta_theta {
            put("mom.eta", e.to_string());
        }
        match self.contam {
            ContaminationStrategy::LargeAtom(v) => {
                put("contam.strategy", "large_atom".into());
                put("contam.value", v.to_string());
            }
            ContaminationStrategy::TailShift(v) => {
                put("contam.strategy", "tail_shift".into());
                put("contam.value", v.to_string());
            }
            ContaminationStrategy::ZeroOut => put("contam.strategy", "zero_out".into()),
        }
        if let Some(t) = self.target_slope {
            put("target.slope", t.to_string());
        }
        if let Some(t) = self.tolerance {
            put("target.tolerance", t.to_string());
        }
        let e = &self.erm;
        put(
            "erm.class",
            match e.class {
                ClassKind::Finite => "finite",
                ClassKind::Net => "net",
            }
            .into(),
        );
        put(
            "erm.loss",
            match e.loss {
                LossKind::Abs => "abs",
                LossKind::Sq => "sq",
                LossKind::Flip => "flip",
            }
            .into(),
        );
        put(
            "erm.objective",
            match e.objective {
                ErmObjective::Emp => "emp",
                ErmObjective::Trunc => "trunc",
                ErmObjective::Tmom => "tmom",
            }
            .into(),
        );
        if let Some(d) = &e.data {
            put("erm.data", d.display().to_string());
        }
        put("erm.slopes", list(&e.slopes));
        put("erm.dim", e.dim.to_string());
        put("erm.radius", e.radius.to_string());
        put("erm.eta", e.eta.to_string());
        put("erm.beta", e.beta.to_string());
        put("erm.design", list(&e.design));
        put("bk.scales", list(&self.bk_scales));
        let st = &self.stability;
        put("stability.deltas", list(&st.deltas));
        if let Some(p) = st.mass_point {
            put("stability.mass_point", p.to_string());
        }
        put("stability.plateau", st.plateau.to_string());
        let inf = &self.influence;
        put("influence.beta", list(&inf.beta));
        put("influence.noise_sds", list(&inf.noise_sds));
        put("influence.z_x", list(&inf.z_x));
        put("influence.z_offset", inf.z_offset.to_string());
        put("influence.eps_grid", list(&inf.eps_grid));
        put("flip.p", self.flip.p.to_string());
        put("flip.eps_mix", self.flip.eps_mix.to_string());
        put("flip.gamma", self.flip.gamma.to_string());
        put("flip.c_frac", self.flip.c_frac.to_string());
        s
    }
}

fn estimator_name(m: Method) -> &'static str {
    match m {
        Method::Empirical => "emp",
        Method::Truncated => "trunc",
        Method::Tmom => "tmom",
    }
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn err(line: usize, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Self::err(line, key, format!("cannot parse {raw:?}: {e}"))),
        }
    }

    fn take_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .split(',')
                .map(|p| {
                    let p = p.trim();
                    p.parse::<T>()
                        .map_err(|e| Self::err(line, key, format!("cannot parse list item {p:?}: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.0)
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    match s {
        "emp" => Ok(Method::Empirical),
        "trunc" => Ok(Method::Truncated),
        "tmom" => Ok(Method::Tmom),
        _ => Err(format!("unknown estimator {s:?} (emp|trunc|tmom)")),
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Self::parse_for(text, None)
    }
}

impl ExperimentConfig {
    /// Parses `text`; `experiment` may be omitted when `default` is given and
    /// must agree with it otherwise.
    pub fn parse_for(text: &str, default: Option<Experiment>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Entries::err(line, body, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Entries::err(line, k, "empty key"));
            }
            if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
                return Err(Entries::err(line, k, format!("duplicate key, first set on line {first}")));
            }
        }
        let mut e = Entries { map };

        let exp_line = e.line("experiment");
        let experiment = match (e.take::<String>("experiment")?, default) {
            (None, Some(d)) => d,
            (None, None) => return Err(Entries::err(0, "experiment", "missing required key")),
            (Some(raw), d) => {
                let parsed: Experiment = raw
                    .parse()
                    .map_err(|err: Error| Entries::err(exp_line, "experiment", err.to_string()))?;
                if d.is_some_and(|d| d != parsed) {
                    return Err(Entries::err(
                        exp_line,
                        "experiment",
                        format!("config is for {raw} but {} was requested", d.expect("checked").as_str()),
                    ));
                }
                parsed
            }
        };
        let mut c = ExperimentConfig::new(experiment);
        if let Some(v) = e.take("seed")? {
            c.seed = v;
        }
        if let Some(v) = e.take("replications")? {
            c.replications = v;
        }
        if let Some(v) = e.take("n")? {
            c.n = v;
        }
        if let Some(v) = e.take_list("n_grid")? {
            c.n_grid = v;
        }
        if let Some(v) = e.take_list("eps_grid")? {
            c.eps_grid = v;
        }
        let line = e.line("estimator");
        if let Some(v) = e.take::<String>("estimator")? {
            c.estimator = parse_method(&v).map_err(|m| Entries::err(line, "estimator", m))?;
        }
        if let Some(v) = e.take::<PathBuf>("out")? {
            c.output_dir = Some(v);
        }

        let line = e.line("risk.alpha").max(e.line("risk.lambda")).max(e.line("risk.moment_bound"));
        let alpha = e.take("risk.alpha")?.unwrap_or(c.spec.alpha);
        let lambda = e.take("risk.lambda")?.unwrap_or(c.spec.lambda);
        let m = e.take("risk.moment_bound")?.unwrap_or(c.spec.moment_bound);
        c.spec = RiskSpec::new(alpha, lambda, m).map_err(|err| Entries::err(line, "risk", err.to_string()))?;
        c.flip.alpha = alpha;

        let line = e.line("dist.kind");
        let kind = e.take::<String>("dist.kind")?.unwrap_or_else(|| "pareto".into());
        let base = match kind.as_str() {
            "pareto" => {
                let scale = e.take("dist.scale")?.unwrap_or(1.0);
                let shape = e.take("dist.shape")?.unwrap_or(2.5);
                DistributionModel::pareto(scale, shape)
            }
            "lct" => DistributionModel::log_corrected_tail(e.take("dist.p")?.unwrap_or(1.5)),
            "atoms" => {
                let aline = e.line("dist.atoms");
                let raw: Vec<String> = e
                    .take_list("dist.atoms")?
                    .ok_or_else(|| Entries::err(line, "dist.atoms", "atoms law needs dist.atoms"))?;
                let pts = raw
                    .iter()
                    .map(|p| {
                        let (v, m) = p
                            .split_once(':')
                            .ok_or_else(|| Entries::err(aline, "dist.atoms", format!("expected value:mass, got {p:?}")))?;
                        let num = |s: &str| {
                            s.trim()
                                .parse::<f64>()
                                .map_err(|err| Entries::err(aline, "dist.atoms", format!("{s:?}: {err}")))
                        };
                        Ok((num(v)?, num(m)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Atoms::new(pts).map(DistributionModel::DiscreteAtoms)
            }
            other => return Err(Entries::err(line, "dist.kind", format!("unknown law {other:?} (pareto|lct|atoms)"))),
        }
        .map_err(|err| Entries::err(line, "dist", err.to_string()))?;
        let mut dist = base;
        let zline = e.line("dist.zero_mass");
        if let Some(z) = e.take("dist.zero_mass")? {
            dist = DistributionModel::zero_inflated(z, dist)
                .map_err(|err| Entries::err(zline, "dist.zero_mass", err.to_string()))?;
        }
        let rline = e.line("dist.rho");
        if let Some(r) = e.take("dist.rho")? {
            dist = DistributionModel::mixing_chain(dist, r).map_err(|err| Entries::err(rline, "dist.rho", err.to_string()))?;
        }
        c.dist = dist;

        if let Some(v) = e.take("mom.k")? {
            c.mom.k_blocks = Some(v);
        }
        if let Some(v) = e.take("mom.delta")? {
            c.mom.delta = v;
        }
        if let Some(v) = e.take("mom.gamma")? {
            c.mom.gamma = v;
        }
        if let Some(v) = e.take("mom.truncation")? {
            c.mom.truncation_mode = v;
        }
        if let Some(v) = e.take("mom.b")? {
            c.mom.manual_b = Some(v);
        }
        if let Some(v) = e.take("mom.d")? {
            c.mom.d_complexity = v;
        }
        if let Some(v) = e.take("mom.c_lambda")? {
            c.mom.c_lambda = Some(v);
        }
        if let Some(v) = e.take("mom.eta")? {
            c.mom.eta_theta = Some(v);
        }

        let line = e.line("contam.strategy");
        let value: Option<f64> = e.take("contam.value")?;
        if let Some(s) = e.take::<String>("contam.strategy")? {
            c.contam = match s.as_str() {
                "large_atom" => ContaminationStrategy::LargeAtom(value.unwrap_or(1e8)),
                "tail_shift" => ContaminationStrategy::TailShift(value.unwrap_or(1e4)),
                "zero_out" => ContaminationStrategy::ZeroOut,
                other => {
                    return Err(Entries::err(
                        line,
                        "contam.strategy",
                        format!("unknown strategy {other:?} (large_atom|tail_shift|zero_out)"),
                    ))
                }
            };
        } else if let Some(v) = value {
            c.contam = ContaminationStrategy::LargeAtom(v);
        }

        c.target_slope = e.take("target.slope")?;
        c.tolerance = e.take("target.tolerance")?;

        let line = e.line("erm.class");
        if let Some(s) = e.take::<String>("erm.class")? {
            c.erm.class = match s.as_str() {
                "finite" => ClassKind::Finite,
                "net" => ClassKind::Net,
                other => return Err(Entries::err(line, "erm.class", format!("unknown class {other:?} (finite|net)"))),
            };
        }
        let line = e.line("erm.loss");
        if let Some(s) = e.take::<String>("erm.loss")? {
            c.erm.loss = match s.as_str() {
                "abs" => LossKind::Abs,
                "sq" => LossKind::Sq,
                "flip" => LossKind::Flip,
                other => return Err(Entries::err(line, "erm.loss", format!("unknown loss {other:?} (abs|sq|flip)"))),
            };
        }
        if let Some(v) = e.take("erm.objective")? {
            c.erm.objective = v;
        }
        if let Some(v) = e.take("erm.data")? {
            c.erm.data = Some(v);
        }
        if let Some(v) = e.take_list("erm.slopes")? {
            c.erm.slopes = v;
        }
        if let Some(v) = e.take("erm.dim")? {
            c.erm.dim = v;
        }
        if let Some(v) = e.take("erm.radius")? {
            c.erm.radius = v;
        }
        if let Some(v) = e.take("erm.eta")? {
            c.erm.eta = v;
        }
        if let Some(v) = e.take("erm.beta")? {
            c.erm.beta = v;
        }
        if let Some(v) = e.take_list("erm.design")? {
            c.erm.design = v;
        }
        if let Some(v) = e.take_list("bk.scales")? {
            c.bk_scales = v;
        }
        if let Some(v) = e.take_list("stability.deltas")? {
            c.stability.deltas = v;
        }
        c.stability.mass_point = e.take("stability.mass_point")?;
        if let Some(v) = e.take("stability.plateau")? {
            c.stability.plateau = v;
        }
        if let Some(v) = e.take_list("influence.beta")? {
            c.influence.beta = v;
        }
        if let Some(v) = e.take_list("influence.noise_sds")? {
            c.influence.noise_sds = v;
        }
        if let Some(v) = e.take_list("influence.z_x")? {
            c.influence.z_x = v;
        }
        if let Some(v) = e.take("influence.z_offset")? {
            c.influence.z_offset = v;
        }
        if let Some(v) = e.take_list("influence.eps_grid")? {
            c.influence.eps_grid = v;
        }
        if let Some(v) = e.take("flip.p")? {
            c.flip.p = v;
        }
        if let Some(v) = e.take("flip.eps_mix")? {
            c.flip.eps_mix = v;
        }
        if let Some(v) = e.take("flip.gamma")? {
            c.flip.gamma = v;
        }
        if let Some(v) = e.take("flip.c_frac")? {
            c.flip.c_frac = v;
        }
        c.flip.n_grid = c.n_grid.clone();
        c.flip.replications = c.replications;

        if let Some((k, (line, _))) = e.map.iter().next() {
            return Err(Entries::err(*line, k, "unknown key"));
        }
        c.validate()?;
        Ok(c)
    }
}
