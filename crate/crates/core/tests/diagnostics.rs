use tailrisk::diagnostics::{
    bk_decompose, influence_check, lp_threshold_stability, quantile_margin, robustness_radius, stationarity_solve,
    threshold_deviation, GaussianLinear, Perturbation,
};
use tailrisk::distributions::DistributionModel;
use tailrisk::erm::{LossMap, Record};
use tailrisk::rng::Stream;

const ID: LossMap = LossMap::Affine { scale: 1.0, shift: 0.0 };

#[test]
fn bk_identity_holds_on_every_row() {
    let m = DistributionModel::pareto(1.0, 2.5).unwrap();
    let grid = [ID, LossMap::Affine { scale: 2.0, shift: 1.0 }];
    let r = bk_decompose(&m, 0.1, &grid, 300, 50, &Stream::new(1)).unwrap();
    assert_eq!(r.rows.len(), 100);
    for row in &r.rows {
        let lhs = row.emp_cvar - row.pop_cvar - row.main_term - row.correction_term;
        assert!((lhs - row.remainder).abs() <= 1e-12 * row.emp_cvar.abs().max(1.0));
    }
    assert!(r.mean_abs_remainder < r.mean_abs_main);
}

#[test]
fn atom_at_threshold_has_correction() {
    // Threshold sits on the atom at 1, where P(X > 1) = 0.4 < alpha.
    let m = DistributionModel::atoms([(0.0, 0.5), (1.0, 0.1), (5.0, 0.4)]).unwrap();
    let r = bk_decompose(&m, 0.45, &[ID], 400, 200, &Stream::new(2)).unwrap();
    assert!(r.mean_abs_correction > 0.0);
}

#[test]
fn threshold_deviation_shrinks() {
    let m = DistributionModel::pareto(1.0, 2.5).unwrap();
    let r = threshold_deviation(&m, 0.1, &[256, 1024, 4096], 400, &Stream::new(3)).unwrap();
    assert!(r.rows.windows(2).all(|w| w[1].mean_abs < w[0].mean_abs));
    let fit = r.fit.unwrap();
    assert!((fit.slope + 0.5).abs() < 0.15, "slope {}", fit.slope);
}

#[test]
fn location_shift_stability_is_linear() {
    let m = DistributionModel::pareto(1.0, 2.5).unwrap();
    let r = lp_threshold_stability(&m, Perturbation::LocationShift, 0.1, &[0.0, 1e-3, 1e-2]).unwrap();
    assert_eq!(r.rows[0].shift, 0.0);
    assert!((r.rows[1].shift - 1e-3).abs() < 1e-8);
    assert!((r.rows[2].shift - 1e-2).abs() < 1e-8);
    assert!(r.margin > 0.0);
}

#[test]
fn margin_tracks_noise_scale() {
    let m = DistributionModel::pareto(1.0, 2.0).unwrap();
    let grid = [1e-3, 1e-4, 1e-5];
    let a = quantile_margin(&m, &ID, 0.25, &grid).unwrap();
    let b = quantile_margin(&m, &LossMap::Affine { scale: 2.0, shift: 0.0 }, 0.25, &grid).unwrap();
    assert!((a / b - 2.0).abs() < 1e-3);
}

#[test]
fn influence_blows_up_as_margin_falls() {
    let mut last_margin = f64::INFINITY;
    let mut last_theta = 0.0;
    let mut last_radius = f64::INFINITY;
    for sd in [0.5, 1.0, 2.0, 4.0] {
        let model = GaussianLinear::new(vec![1.0, -1.0], sd).unwrap();
        let z = Record {
            x: vec![1.0, 1.0],
            y: 60.0,
        };
        let r = influence_check(&model, 0.2, &z, &[1e-2, 1e-3]).unwrap();
        assert!(r.margin < last_margin);
        assert!(r.influence[2].abs() > last_theta);
        let radius = robustness_radius(&r, &model, 0.1, &[z], 1.0);
        assert!(radius < last_radius);
        last_margin = r.margin;
        last_theta = r.influence[2].abs();
        last_radius = radius;
    }
}

#[test]
fn contamination_path_is_continuous() {
    let model = GaussianLinear::new(vec![0.5], 1.0).unwrap();
    let z = Record { x: vec![2.0], y: 10.0 };
    let clean = stationarity_solve(&model, 0.1, None, 0.0).unwrap();
    let mut prev = clean.theta;
    for eps in [1e-4, 1e-3, 1e-2] {
        let s = stationarity_solve(&model, 0.1, Some(&z), eps).unwrap();
        assert!(s.residual <= 1e-10);
        assert!(s.theta > prev);
        prev = s.theta;
    }
}
