use nalgebra::{DMatrix, DVector};

use crate::erm::Record;
use crate::error::{invalid, Error, Result};
use crate::numeric::{normal_isf, normal_pdf, normal_sf};
use crate::risk::check_alpha;

/// Smooth test model: `x ~ N(0, I_d)`, `y = <beta, x> + xi`, `xi ~ N(0, s^2)`,
/// squared loss `l(h, z) = (<h, x> - y)^2`.
///
/// With `v = h - beta`, the residual is `N(0, tau^2)` with
/// `tau^2 = |v|^2 + s^2`, which gives every RU quantity in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianLinear {
    pub beta: Vec<f64>,
    pub noise_sd: f64,
}

impl GaussianLinear {
    pub fn new(beta: Vec<f64>, noise_sd: f64) -> Result<Self> {
        if beta.is_empty() {
            return Err(invalid("model needs at least one coefficient"));
        }
        if !(noise_sd > 0.0) {
            return Err(invalid(format!("noise sd must be positive, got {noise_sd}")));
        }
        Ok(Self { beta, noise_sd })
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    fn tau_and_a(&self, h: &[f64], theta: f64) -> (Vec<f64>, f64, f64) {
        let v: Vec<f64> = h.iter().zip(&self.beta).map(|(a, b)| a - b).collect();
        let tau2 = v.iter().map(|x| x * x).sum::<f64>() + self.noise_sd * self.noise_sd;
        let tau = tau2.sqrt();
        (v, tau, theta.max(0.0).sqrt() / tau)
    }

    /// `Phi_P(h, theta) = theta + E(l - theta)_+ / alpha`.
    pub fn objective(&self, h: &[f64], theta: f64, alpha: f64) -> f64 {
        let (_, tau, a) = self.tau_and_a(h, theta);
        let hinge = if theta <= 0.0 {
            tau * tau - theta
        } else {
            tau * tau * 2.0 * (a * normal_pdf(a) + (1.0 - a * a) * normal_sf(a))
        };
        theta + hinge / alpha
    }

    /// Stationarity map `(grad_h Phi; d_theta Phi)` under the clean law.
    pub fn stationarity(&self, h: &[f64], theta: f64, alpha: f64) -> Vec<f64> {
        let (v, _, a) = self.tau_and_a(h, theta);
        let tail = 2.0 * normal_sf(a);
        let w = 2.0 * (normal_sf(a) + a * normal_pdf(a));
        let mut out: Vec<f64> = v.iter().map(|vi| 2.0 * vi * w / alpha).collect();
        out.push(1.0 - tail / alpha);
        out
    }

    /// `h* = beta`, `theta* = s^2 z_{alpha/2}^2`.
    pub fn clean_solution(&self, alpha: f64) -> (Vec<f64>, f64) {
        let z = normal_isf(alpha / 2.0);
        (self.beta.clone(), (self.noise_sd * z).powi(2))
    }

    pub fn loss(&self, h: &[f64], z: &Record) -> f64 {
        let r: f64 = h.iter().zip(&z.x).map(|(a, b)| a * b).sum::<f64>() - z.y;
        r * r
    }

    /// `g(z; h, theta) = ((1/alpha) grad_h l 1{l > theta}; 1 - (1/alpha) 1{l > theta})`.
    pub fn g(&self, z: &Record, h: &[f64], theta: f64, alpha: f64) -> Vec<f64> {
        let r: f64 = h.iter().zip(&z.x).map(|(a, b)| a * b).sum::<f64>() - z.y;
        let on = r * r > theta;
        let mut out: Vec<f64> = z
            .x
            .iter()
            .map(|xi| if on { 2.0 * r * xi / alpha } else { 0.0 })
            .collect();
        out.push(1.0 - if on { 1.0 / alpha } else { 0.0 });
        out
    }

    /// Quantile margin of the loss at `h*`: `min_r P(|l - theta*| <= r) / r`.
    pub fn margin(&self, alpha: f64) -> f64 {
        let (_, theta) = self.clean_solution(alpha);
        let s = self.noise_sd;
        (1..=8)
            .map(|k| {
                let r = theta * 10f64.powi(-k);
                let lo = ((theta - r).max(0.0)).sqrt() / s;
                let hi = (theta + r).sqrt() / s;
                2.0 * (normal_sf(lo) - normal_sf(hi)) / r
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn split(x: &[f64]) -> (&[f64], f64) {
    (&x[..x.len() - 1], x[x.len() - 1])
}

/// Contaminated map `(1 - eps) H_P + eps g(z)`.
fn contaminated(model: &GaussianLinear, x: &[f64], alpha: f64, z: Option<&Record>, eps: f64) -> Vec<f64> {
    let (h, theta) = split(x);
    let mut out = model.stationarity(h, theta, alpha);
    if let (Some(z), true) = (z, eps > 0.0) {
        let g = model.g(z, h, theta, alpha);
        for (o, gi) in out.iter_mut().zip(g) {
            *o = (1.0 - eps) * *o + eps * gi;
        }
    }
    out
}

fn fd_jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64]) -> DMatrix<f64> {
    let d = x.len();
    let mut j = DMatrix::zeros(d, d);
    let mut xp = x.to_vec();
    for c in 0..d {
        let step = 1e-5 * (1.0 + x[c].abs());
        xp[c] = x[c] + step;
        let fp = f(&xp);
        xp[c] = x[c] - step;
        let fm = f(&xp);
        xp[c] = x[c];
        for r in 0..d {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    j
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn condition_number(j: &DMatrix<f64>) -> f64 {
    let sv = j.clone().singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

const SINGULAR_CONDITION: f64 = 1e12;

/// Solution of the stationarity system under contamination.
#[derive(Clone, Debug, PartialEq)]
pub struct Stationary {
    pub h: Vec<f64>,
    pub theta: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Damped Newton on `(1 - eps) H_P + eps g(z) = 0`, warm-started at the clean
/// optimum, to residual `1e-10`.
pub fn stationarity_solve(model: &GaussianLinear, alpha: f64, z: Option<&Record>, eps: f64) -> Result<Stationary> {
    check_alpha(alpha)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid(format!("contamination weight must lie in [0,1), got {eps}")));
    }
    if let Some(z) = z {
        if z.x.len() != model.dim() {
            return Err(invalid("contamination point has the wrong dimension"));
        }
    }
    let (h0, t0) = model.clean_solution(alpha);
    let mut x: Vec<f64> = h0;
    x.push(t0);
    let f = |p: &[f64]| contaminated(model, p, alpha, z, eps);
    let mut res = f(&x);
    let mut norm = inf_norm(&res);
    let mut polished = false;
    for it in 0..200 {
        if norm <= 1e-10 {
            if polished {
                return Ok(done(x, it, norm));
            }
            polished = true;
        }
        let j = fd_jacobian(f, &x);
        let cond = condition_number(&j);
        if cond > SINGULAR_CONDITION {
            return Err(Error::Singular { condition: cond });
        }
        let step = j
            .lu()
            .solve(&DVector::from_vec(res.iter().map(|r| -r).collect()))
            .ok_or(Error::Singular { condition: cond })?;
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
            if trial[trial.len() - 1] > 0.0 {
                let r = f(&trial);
                let n = inf_norm(&r);
                if n < norm {
                    x = trial;
                    res = r;
                    norm = n;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if norm <= 1e-10 {
                return Ok(done(x, it, norm));
            }
            return Err(Error::NoConvergence {
                iterations: it,
                residual: norm,
            });
        }
    }
    if norm <= 1e-10 {
        return Ok(done(x, 200, norm));
    }
    Err(Error::NoConvergence {
        iterations: 200,
        residual: norm,
    })
}

fn done(mut x: Vec<f64>, iterations: usize, residual: f64) -> Stationary {
    let theta = x.pop().expect("nonempty state");
    Stationary {
        h: x,
        theta,
        iterations,
        residual,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdRow {
    pub eps: f64,
    /// `(sol(eps) - sol(0)) / eps`.
    pub derivative: Vec<f64>,
    /// Euclidean distance to the analytic influence.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceReport {
    pub alpha: f64,
    pub h_star: Vec<f64>,
    pub theta_star: f64,
    pub jacobian: DMatrix<f64>,
    pub condition: f64,
    /// Spectral norm of `J^-1`.
    pub jinv_norm: f64,
    pub g_at_z: Vec<f64>,
    pub g_mean: Vec<f64>,
    /// `-J^-1 (g(z) - E g)`.
    pub influence: Vec<f64>,
    pub fd_path: Vec<FdRow>,
    pub margin: f64,
    /// Robustness radius at tolerance 1 with `z` as the only direction.
    pub radius_lower: f64,
}

/// Compares the analytic influence of `z` with finite differences along
/// the contamination path.
pub fn influence_check(model: &GaussianLinear, alpha: f64, z: &Record, eps_grid: &[f64]) -> Result<InfluenceReport> {
    let clean = stationarity_solve(model, alpha, None, 0.0)?;
    let mut x0 = clean.h.clone();
    x0.push(clean.theta);
    let j = fd_jacobian(|p| contaminated(model, p, alpha, None, 0.0), &x0);
    let condition = condition_number(&j);
    if condition > SINGULAR_CONDITION {
        return Err(Error::Singular { condition });
    }
    let jinv = j.clone().try_inverse().ok_or(Error::Singular { condition })?;
    let jinv_norm = jinv.clone().singular_values().iter().copied().fold(0.0, f64::max);
    let g_at_z = model.g(z, &clean.h, clean.theta, alpha);
    // E_P g(Z; h, theta) is the clean stationarity map itself.
    let g_mean = model.stationarity(&clean.h, clean.theta, alpha);
    let centered = DVector::from_iterator(g_at_z.len(), g_at_z.iter().zip(&g_mean).map(|(a, b)| a - b));
    let influence: Vec<f64> = (-(&jinv * &centered)).iter().copied().collect();
    let mut fd_path = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let s = stationarity_solve(model, alpha, Some(z), eps)?;
        let mut xe = s.h.clone();
        xe.push(s.theta);
        let derivative: Vec<f64> = xe.iter().zip(&x0).map(|(a, b)| (a - b) / eps).collect();
        let error = derivative
            .iter()
            .zip(&influence)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        fd_path.push(FdRow { eps, derivative, error });
    }
    let mut report = InfluenceReport {
        alpha,
        h_star: clean.h,
        theta_star: clean.theta,
        jacobian: j,
        condition,
        jinv_norm,
        g_at_z,
        g_mean,
        influence,
        fd_path,
        margin: model.margin(alpha),
        radius_lower: 0.0,
    };
    report.radius_lower = robustness_radius(&report, model, 1.0, std::slice::from_ref(z), 1.0);
    Ok(report)
}

/// Lower bound `r / (C |J^-1| sup_z |g(z) - E g|)` on the contamination
/// level that keeps the decision within `r`, with the sup over `z_grid`.
pub fn robustness_radius(report: &InfluenceReport, model: &GaussianLinear, r: f64, z_grid: &[Record], c: f64) -> f64 {
    let sup = z_grid
        .iter()
        .map(|z| {
            model
                .g(z, &report.h_star, report.theta_star, report.alpha)
                .iter()
                .zip(&report.g_mean)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    if sup == 0.0 {
        return f64::INFINITY;
    }
    r / (c * report.jinv_norm * sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(sd: f64) -> GaussianLinear {
        GaussianLinear::new(vec![2.0], sd).unwrap()
    }

    fn grid_argmin(m: &GaussianLinear, alpha: f64, z: Option<&Record>, eps: f64) -> (f64, f64) {
        // Contaminated objective (1 - eps) Phi_P + eps (theta + (l(z) - theta)_+ / alpha).
        let obj = |h: f64, t: f64| {
            let base = m.objective(&[h], t, alpha);
            match z {
                Some(z) => (1.0 - eps) * base + eps * (t + (m.loss(&[h], z) - t).max(0.0) / alpha),
                None => base,
            }
        };
        let (h0, t0) = m.clean_solution(alpha);
        let (mut bh, mut bt) = (h0[0], t0);
        let mut span = (0.5, 0.5 * t0);
        for _ in 0..40 {
            let mut best = (obj(bh, bt), bh, bt);
            for i in -10..=10 {
                for k in -10..=10 {
                    let h = bh + span.0 * i as f64 / 10.0;
                    let t = (bt + span.1 * k as f64 / 10.0).max(1e-9);
                    let v = obj(h, t);
                    if v < best.0 {
                        best = (v, h, t);
                    }
                }
            }
            bh = best.1;
            bt = best.2;
            span = (span.0 * 0.6, span.1 * 0.6);
        }
        (bh, bt)
    }

    #[test]
    fn closed_form_is_stationary() {
        let m = toy(1.5);
        let (h, t) = m.clean_solution(0.1);
        assert!(inf_norm(&m.stationarity(&h, t, 0.1)) < 1e-10);
        let s = stationarity_solve(&m, 0.1, None, 0.0).unwrap();
        let (gh, gt) = grid_argmin(&m, 0.1, None, 0.0);
        assert!((s.h[0] - gh).abs() < 1e-6 && (s.theta - gt).abs() < 1e-6 * gt.max(1.0));
        assert!((s.h[0] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn stationarity_matches_objective_gradient() {
        let m = GaussianLinear::new(vec![1.0, -0.5], 0.7).unwrap();
        let (h, t) = (vec![1.3, -0.2], 1.1);
        let hmap = m.stationarity(&h, t, 0.2);
        let step = 1e-6;
        for c in 0..3 {
            let mut p: Vec<f64> = h.clone();
            p.push(t);
            let mut q = p.clone();
            p[c] += step;
            q[c] -= step;
            let fd = (m.objective(&p[..2], p[2], 0.2) - m.objective(&q[..2], q[2], 0.2)) / (2.0 * step);
            assert!((fd - hmap[c]).abs() < 1e-6, "component {c}: {fd} vs {}", hmap[c]);
        }
    }

    #[test]
    fn tail_contamination_matches_grid() {
        let m = toy(1.0);
        let z = Record { x: vec![1.0], y: 12.0 };
        let s = stationarity_solve(&m, 0.1, Some(&z), 1e-3).unwrap();
        let (gh, gt) = grid_argmin(&m, 0.1, Some(&z), 1e-3);
        assert!((s.h[0] - gh).abs() < 1e-5, "{} vs {gh}", s.h[0]);
        assert!((s.theta - gt).abs() < 1e-5, "{} vs {gt}", s.theta);
        let (h0, t0) = m.clean_solution(0.1);
        assert!(s.theta > t0 && s.h[0] > h0[0]);
    }

    #[test]
    fn below_threshold_point_moves_theta_down() {
        let m = toy(1.0);
        let z = Record { x: vec![1.0], y: 2.0 };
        let s = stationarity_solve(&m, 0.1, Some(&z), 1e-3).unwrap();
        let (_, gt) = grid_argmin(&m, 0.1, Some(&z), 1e-3);
        let (_, t0) = m.clean_solution(0.1);
        assert!(s.theta < t0 && gt < t0);
        assert!((s.theta - gt).abs() < 1e-5);
    }

    #[test]
    fn first_order_convergence() {
        let m = toy(1.0);
        let z = Record { x: vec![1.0], y: 12.0 };
        let r = influence_check(&m, 0.1, &z, &[1e-2, 1e-3]).unwrap();
        let ratio = r.fd_path[0].error / r.fd_path[1].error;
        assert!((3.0..=30.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn symmetric_point_has_no_h_influence() {
        let m = toy(1.0);
        // Residual zero at h*: inside the body, gradient vanishes.
        let z = Record { x: vec![1.0], y: 2.0 };
        let r = influence_check(&m, 0.1, &z, &[]).unwrap();
        assert!(r.influence[0].abs() < 1e-6);
    }

    #[test]
    fn radius_properties() {
        let m = toy(1.0);
        let tail = Record { x: vec![1.0], y: 12.0 };
        let body = Record { x: vec![1.0], y: 2.5 };
        let r = influence_check(&m, 0.1, &tail, &[]).unwrap();
        let one = robustness_radius(&r, &m, 1.0, &[tail.clone(), body.clone()], 1.0);
        let two = robustness_radius(&r, &m, 2.0, &[tail.clone(), body.clone()], 1.0);
        assert!((two / one - 2.0).abs() < 1e-12);
        let body_only = robustness_radius(&r, &m, 1.0, &[body], 1.0);
        assert!(body_only > one);
    }
}
