use crate::error::{invalid, Result};

/// One observation `z = (x, y)`. Scalar losses read only `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Record {
    pub fn scalar(y: f64) -> Self {
        Self { x: Vec::new(), y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlipArm {
    A,
    B,
}

/// A hypothesis, identified with its loss `z -> l(h, z) >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum LossMap {
    /// `|<h, x> - y|`.
    AbsLinear { params: Vec<f64> },
    /// `(<h, x> - y)^2`.
    SqLinear { params: Vec<f64> },
    /// Arm A: `l(z) = z`. Arm B: `l(0) = 0` and
    /// `l(z) = z + gamma - C n 1{n < z <= 2n}` for `z > 0`.
    FlipPair {
        n_scale: f64,
        gamma: f64,
        c_frac: f64,
        which: FlipArm,
    },
    /// `scale * y + shift`.
    Affine { scale: f64, shift: f64 },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

impl LossMap {
    pub fn flip_pair(n_scale: f64, gamma: f64, c_frac: f64, which: FlipArm) -> Result<Self> {
        if !(n_scale >= 1.0) {
            return Err(invalid(format!("flip scale n must be >= 1, got {n_scale}")));
        }
        if !(gamma > 0.0) {
            return Err(invalid(format!("flip gamma must be positive, got {gamma}")));
        }
        if !(c_frac > 0.0 && c_frac < 1.0) {
            return Err(invalid(format!("flip C must lie in (0,1), got {c_frac}")));
        }
        Ok(Self::FlipPair {
            n_scale,
            gamma,
            c_frac,
            which,
        })
    }

    pub fn params(&self) -> Option<&[f64]> {
        match self {
            Self::AbsLinear { params } | Self::SqLinear { params } => Some(params),
            _ => None,
        }
    }

    pub fn eval(&self, z: &Record) -> f64 {
        match self {
            Self::AbsLinear { params } => (dot(params, &z.x) - z.y).abs(),
            Self::SqLinear { params } => {
                let r = dot(params, &z.x) - z.y;
                r * r
            }
            Self::FlipPair { .. } => self.eval_scalar(z.y),
            Self::Affine { scale, shift } => scale * z.y + shift,
        }
    }

    /// Loss of a scalar observation (flip and affine losses only).
    pub fn eval_scalar(&self, y: f64) -> f64 {
        match self {
            Self::FlipPair {
                n_scale,
                gamma,
                c_frac,
                which,
            } => match which {
                FlipArm::A => y,
                FlipArm::B => {
                    if y == 0.0 {
                        0.0
                    } else if y > *n_scale && y <= 2.0 * n_scale {
                        y + gamma - c_frac * n_scale
                    } else {
                        y + gamma
                    }
                }
            },
            Self::Affine { scale, shift } => scale * y + shift,
            _ => panic!("eval_scalar on a linear loss"),
        }
    }

    pub fn losses(&self, data: &[Record]) -> Vec<f64> {
        data.iter().map(|z| self.eval(z)).collect()
    }

    pub fn validate_against(&self, data: &[Record]) -> Result<()> {
        if let Some(p) = self.params() {
            if let Some(z) = data.iter().find(|z| z.x.len() != p.len()) {
                return Err(invalid(format!(
                    "hypothesis has {} parameters but a record has {} features",
                    p.len(),
                    z.x.len()
                )));
            }
        }
        if let Self::Affine { scale, shift } = self {
            if !(*scale > 0.0 && *shift >= 0.0) {
                return Err(invalid("affine loss needs scale > 0 and shift >= 0"));
            }
        }
        Ok(())
    }
}
