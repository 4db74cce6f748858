use std::f64::consts::PI;

use gosphere::curvature::{
    antipodal_check, closed_geodesic_length, distance, lambda_at, tune_epsilon, Direction, DistanceOptions,
};
use gosphere::navigation::{ExprMetric, NavigatedMetric, RandersNavMetric, RoundMetric, VectorField};
use gosphere::{sampling, Error};
use nalgebra::DVector;

fn v(a: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(a)
}

#[test]
fn round_antipodal_distance() {
    let r = RoundMetric { ambient: 3 };
    let d = distance(&r, &v(&[0.0, 0.0, 1.0]), &v(&[0.0, 0.0, -1.0]), &DistanceOptions::default()).unwrap();
    assert!((d.distance - PI).abs() < 1e-3, "{d:?}");
    let q = distance(&r, &v(&[1.0, 0.0, 0.0]), &v(&[0.0, 0.6, 0.8]), &DistanceOptions::default()).unwrap();
    assert!((q.distance - PI / 2.0).abs() < 1e-4, "{q:?}");
}

#[test]
fn randers_distance_ratio_along_flow() {
    let eps = 0.3;
    let m = RandersNavMetric { field: VectorField::rotation(3), epsilon: eps };
    let a = v(&[1.0, 0.0, 0.0]);
    let b = v(&[0.0, 1.0, 0.0]);
    let opts = DistanceOptions::default();
    let with = distance(&m, &a, &b, &opts).unwrap().distance;
    let against = distance(&m, &b, &a, &opts).unwrap().distance;
    assert!((with - PI / 2.0 / (1.0 + eps)).abs() < 1e-3, "{with}");
    assert!((with / against - (1.0 - eps) / (1.0 + eps)).abs() < 1e-3);
}

#[test]
fn reversible_distance_symmetric_and_triangle() {
    let m = ExprMetric::parse(3, "sqrt(y1^2 + 2*y2^2 + 1.5*y3^2)").unwrap();
    let opts = DistanceOptions { net: 360, ..DistanceOptions::default() };
    let mut rng = sampling::rng(4);
    let pts: Vec<DVector<f64>> = (0..3).map(|_| sampling::unit_vector(3, &mut rng)).collect();
    let d = |i: usize, j: usize| distance(&m, &pts[i], &pts[j], &opts).unwrap().distance;
    assert!((d(0, 1) - d(1, 0)).abs() < 2e-3);
    assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 3e-3);
}

#[test]
fn coincident_points_rejected() {
    let r = RoundMetric { ambient: 3 };
    let p = v(&[0.0, 1.0, 0.0]);
    assert!(matches!(distance(&r, &p, &p, &DistanceOptions::default()), Err(Error::InvalidInput(_))));
}

#[test]
fn tuning_recovers_planted_epsilon() {
    let hopf = VectorField::hopf();
    let planted = 0.3;
    let base = NavigatedMetric::new(RoundMetric { ambient: 4 }, hopf.scaled(-1.0), planted, 1).unwrap();
    let start = v(&[1.0, 0.0, 0.0, 0.0]);
    let l0 = closed_geodesic_length(&base, &hopf, Direction::Minus, &start).unwrap().length;
    assert!((l0 - 2.0 * PI / (1.0 + planted)).abs() < 1e-8);
    let rep = tune_epsilon(&base, &hopf, &start, 2.0 * PI).unwrap();
    assert!((rep.epsilon - planted).abs() < 1e-6, "{rep:?}");
    assert!((rep.lambda - 2.0 * PI).abs() < 1e-5);
    let grid: Vec<f64> = [0.0, 0.2, 0.5, 0.9, 1.2]
        .iter()
        .map(|&e| lambda_at(&base, &hopf, e, &start).unwrap().length)
        .collect();
    assert!(grid.windows(2).all(|w| w[1] > w[0]), "{grid:?}");
    let round = RoundMetric { ambient: 4 };
    assert_eq!(tune_epsilon(&round, &hopf, &start, 2.0 * PI).unwrap().epsilon, 0.0);
    assert!(matches!(tune_epsilon(&round, &hopf, &start, 5.0), Err(Error::Precondition(_))));
}

#[test]
fn antipodal_map_tuned_and_untuned() {
    let hopf = VectorField::hopf();
    let tuned = RandersNavMetric { field: hopf.clone(), epsilon: 0.0 };
    let rep = antipodal_check(&tuned, 2, 4, 3).unwrap();
    assert!(rep.psi_squared_identity);
    let eps = 0.2;
    let untuned = RandersNavMetric { field: hopf, epsilon: eps };
    let rep = antipodal_check(&untuned, 2, 4, 3).unwrap();
    for s in &rep.samples {
        assert!((s.displacement - 2.0 * (PI * eps).sin()).abs() < 1e-4, "{}", s.displacement);
    }
    assert!(!rep.psi_squared_identity);
}
