use std::f64::consts::PI;

use nalgebra::DVector;

use super::*;
use crate::ad::Scalar;
use crate::navigation::{RandersNavMetric, RoundMetric, VectorField};
use crate::sampling;

/// Metric whose south-chart pullback is Euclidean.
struct FlatSouth {
    ambient: usize,
}

impl SphereMetric for FlatSouth {
    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn eval_ambient<D: Scalar>(&self, p: &[D], v: &[D]) -> D {
        let n = self.ambient - 1;
        let den = D::one() - p[n];
        let mut acc = D::zero();
        for i in 0..n {
            let y = v[i] / den + p[i] * v[n] / (den * den);
            acc += y * y;
        }
        acc.sqrt()
    }
}

fn round(d: usize) -> ChartMetric<RoundMetric> {
    ChartMetric::new(RoundMetric { ambient: d })
}

fn christoffel_spray(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let sigma = x * (-2.0 / (1.0 + x.norm_squared()));
    (y * (2.0 * sigma.dot(y)) - sigma * y.norm_squared()) * 0.5
}

#[test]
fn round_spray_matches_christoffel_oracle() {
    let cm = round(4);
    let mut rng = sampling::rng(3);
    for _ in 0..20 {
        let x = sampling::gaussian_vector(3, &mut rng) * 0.7;
        if x.norm() > 1.8 {
            continue;
        }
        let y = sampling::gaussian_vector(3, &mut rng);
        for chart in [Chart::South, Chart::North] {
            let g = cm.spray(chart, &x, &y).unwrap();
            let o = christoffel_spray(&x, &y);
            assert!((&g - &o).norm() <= 1e-10 * (1.0 + o.norm()), "{g} vs {o}");
            let g2 = cm.spray(chart, &x, &(&y * 2.0)).unwrap();
            assert!((g2 - &g * 4.0).norm() < 1e-10 * (1.0 + g.norm()));
        }
    }
}

#[test]
fn flat_chart_metric() {
    let cm = ChartMetric::new(FlatSouth { ambient: 3 });
    let x = DVector::from_vec(vec![0.3, -0.2]);
    let y = DVector::from_vec(vec![1.0, 0.5]);
    assert!(cm.spray(Chart::South, &x, &y).unwrap().norm() < 1e-13);
    let flag = FlagInput { chart: Chart::South, x: x.clone(), y: y.clone(), u: DVector::from_vec(vec![0.0, 1.0]) };
    assert!(cm.flag_curvature(&flag).unwrap().abs() < 1e-6);
    let g = integrate(&cm, Chart::South, &x, &(&y / y.norm()), 0.5, &[], &GeodesicOptions::default()).unwrap();
    let end = &g.x[g.len() - 1];
    assert!((end - (&x + &y * (0.5 / y.norm()))).norm() < 1e-10);
}

#[test]
fn chart_boundary_asks_for_switch() {
    let cm = round(3);
    let x = DVector::from_vec(vec![2.5, 0.0]);
    let y = DVector::from_vec(vec![0.0, 1.0]);
    assert!(matches!(cm.spray(Chart::South, &x, &y), Err(Error::SwitchChart { .. })));
}

#[test]
fn round_flag_curvature_is_one() {
    for d in [3, 4] {
        let cm = round(d);
        for flag in flag_net(d, 20, 11) {
            let k = cm.flag_curvature(&flag).unwrap();
            assert!((k - 1.0).abs() < 2e-4, "K = {k}");
        }
    }
}

#[test]
fn parallel_flag_rejected() {
    let cm = round(3);
    let x = DVector::from_vec(vec![0.1, 0.2]);
    let y = DVector::from_vec(vec![1.0, 0.0]);
    let flag = FlagInput { chart: Chart::South, x, y: y.clone(), u: y * 3.0 };
    assert!(matches!(cm.flag_curvature(&flag), Err(Error::InvalidFlag(_))));
}

#[test]
fn great_circle_closes() {
    let cm = round(3);
    let p = DVector::from_vec(vec![0.6, 0.0, 0.8]);
    let v = DVector::from_vec(vec![0.0, 1.0, 0.0]);
    let g = geodesic(&cm, &p, &v, 2.0 * PI, &GeodesicOptions::default()).unwrap();
    assert!((g.end_point() - &p).norm() < 1e-6);
    assert!(g.speed_drift(&cm) < 1e-7 * 2.0 * PI);
    assert!(g.charts.iter().any(|&c| c == Chart::North) && g.charts.iter().any(|&c| c == Chart::South));
    let half = g.interpolate(PI);
    assert!((half + &p).norm() < 1e-5);
    assert!(g.to_csv().starts_with("t,chart,x1,x2\n0,"));
}

#[test]
fn unnormalised_start_rejected() {
    let cm = round(3);
    let p = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let v = DVector::from_vec(vec![0.0, 2.0, 0.0]);
    assert!(matches!(geodesic(&cm, &p, &v, 1.0, &GeodesicOptions::default()), Err(Error::Precondition(_))));
}

#[test]
fn randers_navigation_has_unit_curvature() {
    let metric = RandersNavMetric { field: VectorField::hopf(), epsilon: 0.3 };
    let cm = ChartMetric::new(metric);
    for flag in flag_net(4, 10, 5) {
        let k = cm.flag_curvature(&flag).unwrap();
        assert!((k - 1.0).abs() < 5e-4, "K = {k}");
    }
}

#[test]
fn randers_geodesic_is_transported_great_circle() {
    let field = VectorField::rotation(3);
    let eps = 0.3;
    let cm = ChartMetric::new(RandersNavMetric { field: field.clone(), epsilon: eps });
    let p = DVector::from_vec(vec![0.0, 0.6, 0.8]);
    let v = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let circle = |t: f64| (&p * t.cos() + &v * t.sin(), &v * t.cos() - &p * t.sin());
    let transported = |t: f64| {
        let (c, dc) = circle(t);
        let (q, w) = field.flow(&c, &dc, eps * t);
        let wind = field.eval_f64(&q) * eps;
        (q, w + wind)
    };
    let (q0, w0) = transported(0.0);
    let g = geodesic(&cm, &q0, &w0, 4.0, &GeodesicOptions::default()).unwrap();
    for i in 0..g.len() {
        assert!((g.point(i) - transported(g.t[i]).0).norm() < 1e-5);
    }
    for t in [0.3, 1.7, 3.9] {
        assert!(geodesic_residual(&cm, transported, t).unwrap() < 1e-5);
    }
}

#[test]
fn closed_lengths_round_and_randers() {
    let hopf = VectorField::hopf();
    let start = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
    let plus = closed_geodesic_length(&RoundMetric { ambient: 4 }, &hopf, Direction::Plus, &start).unwrap();
    assert!((plus.length - 2.0 * PI).abs() < 1e-9);
    let eps = 0.25;
    let m = RandersNavMetric { field: hopf.clone(), epsilon: eps };
    let lp = closed_geodesic_length(&m, &hopf, Direction::Plus, &start).unwrap().length;
    let lm = closed_geodesic_length(&m, &hopf, Direction::Minus, &start).unwrap().length;
    assert!((lp - 2.0 * PI / (1.0 + eps)).abs() < 1e-8);
    assert!((lm - 2.0 * PI / (1.0 - eps)).abs() < 1e-8);
    assert!((1.0 / lp + 1.0 / lm - 1.0 / PI).abs() < 1e-9);
}

#[test]
fn killing_critical_points() {
    let round = RoundMetric { ambient: 3 };
    let field = VectorField::rotation(3);
    let on = killing_critical_check(&round, &field, &DVector::from_vec(vec![0.6, 0.8, 0.0])).unwrap();
    assert!(on.gradient_norm < 1e-8 && on.ode_residual < 1e-5, "{on:?}");
    let off = killing_critical_check(&round, &field, &DVector::from_vec(vec![0.6, 0.0, 0.8])).unwrap();
    assert!(off.gradient_norm > 1e-2 && off.ode_residual > 1e-2, "{off:?}");
    let pole = killing_critical_check(&round, &field, &DVector::from_vec(vec![0.0, 0.0, 1.0]));
    assert!(matches!(pole, Err(Error::VanishingField)));
    let hopf = killing_critical_check(&RoundMetric { ambient: 4 }, &VectorField::hopf(), &DVector::from_vec(vec![0.1, 0.7, -0.5, 0.3])).unwrap();
    assert!(hopf.gradient_norm < 1e-8);
}

#[test]
fn round_antipodal_map() {
    let rep = antipodal_check(&RoundMetric { ambient: 3 }, 3, 4, 9).unwrap();
    for s in &rep.samples {
        assert!((&s.psi + &s.point).norm() < 1e-6);
    }
    assert!(rep.psi_squared_identity);
}

#[test]
fn cartan_norms() {
    assert!(cartan_norm(&RoundMetric { ambient: 3 }, 10, 1).unwrap() < 1e-9);
    let r = RandersNavMetric { field: VectorField::rotation(3), epsilon: 0.3 };
    assert!(cartan_norm(&r, 10, 1).unwrap() > 1e-2);
}

#[test]
fn navigation_preserves_flag_curvature() {
    let base = RandersNavMetric { field: VectorField::rotation(3), epsilon: 0.2 };
    let other = VectorField::rotation(3);
    let flags = flag_net(3, 8, 21);
    for s in curvature_preservation(&base, &other, 0.3, &flags).unwrap() {
        assert!((s.k - s.k_navigated).abs() < 1e-3, "{s:?}");
        assert!((s.k - 1.0).abs() < 5e-4);
    }
}
