//! Small numerical kernels shared across modules.

use statrs::function::erf::{erfc, erfc_inv};

/// Compensated (Neumaier) accumulator. Heavy-tailed samples mix magnitudes
/// badly, so every hinge sum in the crate goes through this.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn kahan_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<KahanSum>().value()
}

pub fn mean(xs: &[f64]) -> f64 {
    kahan_sum(xs) / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 points.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: KahanSum = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (ss.value() / (xs.len() - 1) as f64).sqrt()
}

/// Lower median (the ceil(k/2)-th smallest value).
pub fn lower_median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty(), "median of empty slice");
    let idx = (xs.len() - 1) / 2;
    let (_, m, _) = xs.select_nth_unstable_by(idx, f64::total_cmp);
    *m
}

/// `floor(alpha * n)`, taken as the largest `k <= n` with `k / n <= alpha`
/// in floating point, so it agrees with the empirical tail check `P_n(X > t) <= alpha`.
pub fn floor_product(alpha: f64, n: usize) -> usize {
    let nf = n as f64;
    let mut k = (alpha * nf).floor().clamp(0.0, nf) as usize;
    while k < n && (k + 1) as f64 / nf <= alpha {
        k += 1;
    }
    while k > 0 && k as f64 / nf > alpha {
        k -= 1;
    }
    k
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper tail of the standard normal, accurate far into the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(x: f64) -> f64 {
    normal_sf(-x)
}

/// Inverse of [`normal_sf`], polished with Newton steps.
pub fn normal_isf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_isf needs p in (0,1), got {p}");
    let mut x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..3 {
        let d = normal_pdf(x);
        if d <= 0.0 {
            break;
        }
        x += (normal_sf(x) - p) / d;
    }
    x
}

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on a finite interval with absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, abs_tol, 48)
}

/// Integral of `f` over `[start, inf)` by geometrically widening panels.
///
/// `tail_bound(u)` must bound the integral over `[u, inf)`; integration stops
/// once it is below `1e-12` of the running total.
pub fn integrate_tail<F, T>(f: F, start: f64, rel_tol: f64, tail_bound: T) -> f64
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let mut width = 0.5;
    // Coarse magnitude of the first panel fixes an absolute per-panel tolerance.
    let (a, b) = (start, start + width);
    let scale = ((b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))).abs().max(1e-300);
    let panel_tol = rel_tol * scale * 1e-3;
    let mut total = KahanSum::new();
    let mut lo = start;
    for _ in 0..10_000 {
        let hi = lo + width;
        total.add(integrate(&f, lo, hi, panel_tol));
        lo = hi;
        width *= 1.25;
        if tail_bound(lo) <= 1e-12 * total.value().abs() {
            break;
        }
    }
    total.value()
}
