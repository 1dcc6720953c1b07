use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{invalid, Error, Result};

/// Least-squares slope of `log y` on `log x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% Student-t interval on the slope.
    pub halfwidth: f64,
}

/// Fits `log y = a + b log x`. Needs at least three points with `x, y > 0`.
///
/// ```
/// use tailrisk::harness::fit_slope;
///
/// let pts: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, (k as f64).powf(-0.5))).collect();
/// let fit = fit_slope(&pts).unwrap();
/// assert!((fit.slope + 0.5).abs() < 1e-12);
/// ```
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid(format!("slope fit needs positive finite points, got {p:?}")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("slope fit needs at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, n - 2.0)
        .map_err(|e| invalid(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        halfwidth: t * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| (2f64.powi(k), 2f64.powi(k).powf(-0.5))).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12 && f.halfwidth < 1e-10);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = crate::rng::Stream::new(11).rng();
        let pts: Vec<(f64, f64)> = (0..8)
            .map(|k| {
                let x = 2f64.powi(k);
                (x, 3.0 / x * (1.0 + 0.01 * (2.0 * rng.random::<f64>() - 1.0)))
            })
            .collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope + 1.0).abs() < 0.05);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_slope(&[(1.0, 1.0), (2.0, 0.5)]), Err(Error::InsufficientPoints(2))));
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }
}
