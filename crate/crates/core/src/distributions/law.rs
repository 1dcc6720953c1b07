use super::model::DistributionModel;

/// Anything with a computable tail map. Used for perturbed laws that have no
/// closed-form quantile of their own.
pub trait TailLaw {
    /// `P(X > t)`.
    fn survival(&self, t: f64) -> f64;
    /// `P(X >= t)`.
    fn survival_incl(&self, t: f64) -> f64;
}

impl TailLaw for DistributionModel {
    fn survival(&self, t: f64) -> f64 {
        DistributionModel::survival(self, t)
    }
    fn survival_incl(&self, t: f64) -> f64 {
        DistributionModel::survival_incl(self, t)
    }
}

/// Law of `X + delta`.
#[derive(Clone, Copy, Debug)]
pub struct Shifted<'a, L: ?Sized> {
    pub law: &'a L,
    pub delta: f64,
}

impl<L: TailLaw + ?Sized> TailLaw for Shifted<'_, L> {
    fn survival(&self, t: f64) -> f64 {
        self.law.survival(t - self.delta)
    }
    fn survival_incl(&self, t: f64) -> f64 {
        self.law.survival_incl(t - self.delta)
    }
}

/// Law of `scale * X + shift` with `scale > 0`.
#[derive(Clone, Copy, Debug)]
pub struct AffineImage<'a, L: ?Sized> {
    pub law: &'a L,
    pub scale: f64,
    pub shift: f64,
}

impl<L: TailLaw + ?Sized> TailLaw for AffineImage<'_, L> {
    fn survival(&self, t: f64) -> f64 {
        self.law.survival((t - self.shift) / self.scale)
    }
    fn survival_incl(&self, t: f64) -> f64 {
        self.law.survival_incl((t - self.shift) / self.scale)
    }
}

/// `inf { t : P(X > t) <= alpha }` by bracketing and bisection to absolute
/// tolerance `1e-10`. The returned point always satisfies the tail condition.
pub fn upper_quantile<L: TailLaw + ?Sized>(law: &L, alpha: f64) -> f64 {
    let mut lo = -1.0_f64;
    while law.survival(lo) <= alpha {
        lo *= 2.0;
        if lo < -1e300 {
            return lo;
        }
    }
    let mut hi = 1.0_f64;
    while law.survival(hi) > alpha {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if law.survival(mid) <= alpha {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_matches_closed_form() {
        let m = DistributionModel::pareto(1.0, 2.0).unwrap();
        let q = upper_quantile(&m, 0.25);
        assert!((q - 2.0).abs() < 1e-9);
        let s = Shifted { law: &m, delta: 0.5 };
        assert!((upper_quantile(&s, 0.25) - 2.5).abs() < 1e-9);
        let a = AffineImage {
            law: &m,
            scale: 3.0,
            shift: -10.0,
        };
        assert!((upper_quantile(&a, 0.25) + 4.0).abs() < 1e-9);
    }

    #[test]
    fn bisection_lands_on_atom() {
        let m = DistributionModel::atoms([(0.0, 0.7), (10.0, 0.3)]).unwrap();
        assert!(upper_quantile(&m, 0.4).abs() < 1e-9);
        let q = upper_quantile(&m, 0.2);
        assert!(q >= 10.0 && q - 10.0 < 1e-9);
    }
}
