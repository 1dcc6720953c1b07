use crate::error::{invalid, Error, Result};

pub const DEFAULT_NET_CAP: usize = 1_000_000;

/// Lattice net of a centered ball.
#[derive(Clone, Debug, PartialEq)]
pub struct BallNet {
    pub points: Vec<Vec<f64>>,
    /// Lattice spacing `eta / sqrt(d)`.
    pub mesh: f64,
    /// The volumetric count `(1 + 2R/eta)^d`.
    pub volume_bound: f64,
}

impl BallNet {
    pub fn within_volume_bound(&self) -> bool {
        self.points.len() as f64 <= self.volume_bound
    }
}

/// Points of the lattice `(eta / sqrt d) Z^d` inside the closed ball of
/// radius `radius`. Every point of the ball lies within `eta` of the net.
///
/// ```
/// use tailrisk::erm::build_net;
///
/// let net = build_net(1, 1.0, 1.0, 100).unwrap();
/// assert_eq!(net.points, vec![vec![-1.0], vec![0.0], vec![1.0]]);
/// ```
pub fn build_net(dim: usize, radius: f64, eta: f64, cap: usize) -> Result<BallNet> {
    if dim == 0 {
        return Err(invalid("net dimension must be at least 1"));
    }
    if !(radius > 0.0 && radius.is_finite()) || !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid(format!("net needs R > 0 and eta > 0, got R={radius}, eta={eta}")));
    }
    let mesh = eta / (dim as f64).sqrt();
    let kmax = (radius / mesh * (1.0 + 1e-12)).floor() as i64;
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut points = Vec::new();
    let mut idx = vec![-kmax; dim];
    let mut coords = vec![0.0; dim];
    // Odometer over the cube, pruned by the partial squared norm.
    enumerate(0, &mut idx, &mut coords, 0.0, kmax, mesh, r2, cap, &mut points)?;
    Ok(BallNet {
        points,
        mesh,
        volume_bound: (1.0 + 2.0 * radius / eta).powi(dim as i32),
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    depth: usize,
    idx: &mut Vec<i64>,
    coords: &mut Vec<f64>,
    partial: f64,
    kmax: i64,
    mesh: f64,
    r2: f64,
    cap: usize,
    out: &mut Vec<Vec<f64>>,
) -> Result<()> {
    if depth == idx.len() {
        out.push(coords.clone());
        if out.len() > cap {
            return Err(Error::NetTooLarge { size: out.len(), cap });
        }
        return Ok(());
    }
    for k in -kmax..=kmax {
        let c = k as f64 * mesh;
        let p = partial + c * c;
        if p > r2 {
            continue;
        }
        idx[depth] = k;
        coords[depth] = c;
        enumerate(depth + 1, idx, coords, p, kmax, mesh, r2, cap, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dim() {
        let n = build_net(1, 1.0, 1.0, 10).unwrap();
        assert_eq!(n.points, vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn coarse_mesh_keeps_origin() {
        let n = build_net(3, 1.0, 5.0, 10).unwrap();
        assert_eq!(n.points, vec![vec![0.0; 3]]);
    }

    #[test]
    fn two_dim_count() {
        let n = build_net(2, 1.0, 0.5, 1000).unwrap();
        assert_eq!(n.points.len(), 25);
        assert!(n.within_volume_bound());
    }

    #[test]
    fn fine_mesh_exceeds_volume_count() {
        // The lattice count grows like the ball volume over mesh^d, which
        // overtakes (1 + 2R/eta)^d once eta is small in d >= 2.
        let n = build_net(2, 1.0, 0.1, 10_000).unwrap();
        assert!(!n.within_volume_bound());
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(build_net(3, 1.0, 0.01, 1000), Err(Error::NetTooLarge { .. })));
    }
}
