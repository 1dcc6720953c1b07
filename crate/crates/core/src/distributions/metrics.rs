use super::model::Atoms;
use crate::numeric::KahanSum;

/// Total variation distance: half the L1 distance of the atom masses.
pub fn tv_distance(p: &Atoms, q: &Atoms) -> f64 {
    let (a, b) = (p.points(), q.points());
    let (mut i, mut j) = (0, 0);
    let mut acc = KahanSum::new();
    while i < a.len() || j < b.len() {
        let va = a.get(i).map_or(f64::INFINITY, |x| x.0);
        let vb = b.get(j).map_or(f64::INFINITY, |x| x.0);
        if va == vb {
            acc.add((a[i].1 - b[j].1).abs());
            i += 1;
            j += 1;
        } else if va < vb {
            acc.add(a[i].1);
            i += 1;
        } else {
            acc.add(b[j].1);
            j += 1;
        }
    }
    (0.5 * acc.value()).clamp(0.0, 1.0)
}

/// Wasserstein-1 distance between two finite laws on the line, computed as
/// `int |F_P - F_Q|` over the merged support (equal to `int |F_P^-1 - F_Q^-1|`).
pub fn wasserstein1(p: &Atoms, q: &Atoms) -> f64 {
    let (a, b) = (p.points(), q.points());
    let (mut i, mut j) = (0, 0);
    let (mut fp, mut fq) = (KahanSum::new(), KahanSum::new());
    let mut acc = KahanSum::new();
    let mut prev: Option<f64> = None;
    while i < a.len() || j < b.len() {
        let va = a.get(i).map_or(f64::INFINITY, |x| x.0);
        let vb = b.get(j).map_or(f64::INFINITY, |x| x.0);
        let x = va.min(vb);
        if let Some(x0) = prev {
            acc.add((fp.value() - fq.value()).abs() * (x - x0));
        }
        if va == x {
            fp.add(a[i].1);
            i += 1;
        }
        if vb == x {
            fq.add(b[j].1);
            j += 1;
        }
        prev = Some(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let a = Atoms::new([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(tv_distance(&a, &a), 0.0);
        let b = Atoms::new([(0.0, 0.2), (1.0, 0.8)]).unwrap();
        assert!((tv_distance(&a, &b) - 0.3).abs() < 1e-15);
        let p = Atoms::dirac(0.0).unwrap();
        let q = Atoms::new([(0.0, 0.96), (25.0, 0.04)]).unwrap();
        assert!((tv_distance(&p, &q) - 0.04).abs() < 1e-15);
    }

    #[test]
    fn w1_examples() {
        let a = Atoms::empirical(&[1.0, 2.0]).unwrap();
        assert_eq!(wasserstein1(&a, &a), 0.0);
        let b = Atoms::empirical(&[2.0, 4.0]).unwrap();
        assert!((wasserstein1(&a, &b) - 1.5).abs() < 1e-15);
        let d0 = Atoms::dirac(0.0).unwrap();
        let d3 = Atoms::dirac(3.0).unwrap();
        assert_eq!(wasserstein1(&d0, &d3), 3.0);
    }

    #[test]
    fn w1_matches_sorted_difference() {
        let x = [0.3, 5.0, 1.2, 9.9, 2.2];
        let y = [4.1, 0.0, 0.7, 3.3, 8.0];
        let (mut xs, mut ys) = (x.to_vec(), y.to_vec());
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let oracle: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - b).abs()).sum::<f64>() / 5.0;
        let got = wasserstein1(&Atoms::empirical(&x).unwrap(), &Atoms::empirical(&y).unwrap());
        assert!((got - oracle).abs() < 1e-12);
    }
}
