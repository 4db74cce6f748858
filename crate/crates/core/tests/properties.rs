use gosphere::curvature::{Chart, ChartMetric};
use gosphere::expr::{parse_expr, parse_with, VarSet};
use gosphere::gocheck::spray_vector;
use gosphere::liealg::presentations::{build_presentation, PresentationKind};
use gosphere::navigation::{round_trip_defect, RandersNavMetric, RoundMetric, VectorField};
use gosphere::norms::{FiberNorm, MinkowskiNorm};
use gosphere::sampling;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

fn vec_strategy(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, dim)
}

fn randers(dim: usize) -> MinkowskiNorm {
    let a = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 + 0.3 * i as f64 } else { 0.05 });
    let b = DVector::from_fn(dim, |i, _| 0.2 / (1.0 + i as f64));
    MinkowskiNorm::randers(a, b).unwrap()
}

fn kind_strategy() -> impl Strategy<Value = PresentationKind> {
    prop::sample::select(PresentationKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_positively_homogeneous(y in vec_strategy(4), lambda in 0.01f64..50.0) {
        prop_assume!(y.iter().any(|v| v.abs() > 1e-3));
        let f = randers(4);
        let scaled: Vec<f64> = y.iter().map(|v| v * lambda).collect();
        let a = f.eval(&scaled).unwrap();
        let b = lambda * f.eval(&y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn structure_constants_hold_identities(kind in kind_strategy()) {
        let pres = build_presentation(kind, kind.min_n()).unwrap();
        let alg = &pres.decomposition.algebra;
        prop_assert!(alg.antisymmetry_defect() < 1e-12);
        prop_assert!(alg.jacobi_defect() < 1e-10);
        prop_assert!(alg.bi_invariance_defect() < 1e-10);
        prop_assert!(pres.decomposition.block_invariance_defect(&pres.m_blocks) < 1e-10);
    }

    #[test]
    fn spray_vector_is_quadratic(kind in kind_strategy(), seed in 0u64..1000, lambda in 0.1f64..10.0) {
        let pres = build_presentation(kind, kind.min_n()).unwrap();
        let dm = pres.dim_m();
        let norm = randers(dm);
        let mut rng = sampling::rng(seed);
        let u = sampling::gaussian_vector(dm, &mut rng);
        let eta = spray_vector(&pres, &norm, &u).unwrap().value;
        let eta_l = spray_vector(&pres, &norm, &(&u * lambda)).unwrap().value;
        let scale = eta.amax().max(u.norm_squared());
        prop_assert!((eta_l - eta * (lambda * lambda)).amax() <= 1e-10 * lambda * lambda * scale);
    }

    #[test]
    fn chart_spray_is_quadratic(x in vec_strategy(2), y in vec_strategy(2), lambda in 0.1f64..10.0) {
        let y = DVector::from_vec(y);
        prop_assume!(y.norm() > 1e-2);
        let x = DVector::from_vec(x);
        let cm = ChartMetric::new(RandersNavMetric { field: VectorField::rotation(3), epsilon: 0.3 });
        let g = cm.spray(Chart::South, &x, &y).unwrap();
        let gl = cm.spray(Chart::South, &x, &(&y * lambda)).unwrap();
        let scale = g.amax().max(y.norm_squared());
        prop_assert!((gl - g * (lambda * lambda)).amax() <= 1e-10 * lambda * lambda * scale);
    }

    #[test]
    fn chart_transition_is_consistent(x in vec_strategy(3), y in vec_strategy(3)) {
        let x = DVector::from_vec(x);
        prop_assume!(x.norm() > 0.1);
        let y = DVector::from_vec(y);
        for chart in [Chart::South, Chart::North] {
            let p = DVector::from_vec(chart.to_sphere(x.as_slice()));
            let v = DVector::from_vec(chart.push_forward(x.as_slice(), y.as_slice()));
            let (x2, y2) = chart.transition(&x, &y);
            let other = chart.other();
            let q = DVector::from_vec(other.to_sphere(x2.as_slice()));
            let w = DVector::from_vec(other.push_forward(x2.as_slice(), y2.as_slice()));
            prop_assert!((p - q).amax() < 1e-12);
            prop_assert!((v - w).amax() < 1e-10 * (1.0 + y.norm() / x.norm_squared()));
        }
    }

    #[test]
    fn chart_norm_matches_ambient(x in vec_strategy(3), y in vec_strategy(3)) {
        let x = DVector::from_vec(x);
        let y = DVector::from_vec(y);
        prop_assume!(y.norm() > 1e-3);
        let cm = ChartMetric::new(RoundMetric { ambient: 4 });
        let v = DVector::from_vec(Chart::South.push_forward(x.as_slice(), y.as_slice()));
        let f = cm.eval_f64(Chart::South, &x, &y);
        prop_assert!((f - v.norm()).abs() <= 1e-12 * v.norm());
    }

    #[test]
    fn navigation_round_trip(w in vec_strategy(3), wind in vec_strategy(3)) {
        prop_assume!(w.iter().any(|v| v.abs() > 1e-2));
        let wind = DVector::from_vec(wind) * 0.5;
        let base = randers(3);
        let neg = -&wind;
        prop_assume!(base.eval(neg.as_slice()).unwrap() < 0.9);
        prop_assert!(round_trip_defect(&base, &wind, &w).unwrap() < 1e-10);
    }
}

#[derive(Debug, Clone)]
enum Oracle {
    Num(f64),
    Arg(usize),
    Neg(Box<Oracle>),
    Sqrt(Box<Oracle>),
    Exp(Box<Oracle>),
    Log(Box<Oracle>),
    Add(Box<Oracle>, Box<Oracle>),
    Sub(Box<Oracle>, Box<Oracle>),
    Mul(Box<Oracle>, Box<Oracle>),
    Div(Box<Oracle>, Box<Oracle>),
    PowI(Box<Oracle>, i32),
}

impl Oracle {
    fn value(&self, s: &[f64]) -> f64 {
        match self {
            Oracle::Num(v) => *v,
            Oracle::Arg(i) => s[*i],
            Oracle::Neg(a) => -a.value(s),
            Oracle::Sqrt(a) => a.value(s).sqrt(),
            Oracle::Exp(a) => a.value(s).exp(),
            Oracle::Log(a) => a.value(s).ln(),
            Oracle::Add(a, b) => a.value(s) + b.value(s),
            Oracle::Sub(a, b) => a.value(s) - b.value(s),
            Oracle::Mul(a, b) => a.value(s) * b.value(s),
            Oracle::Div(a, b) => a.value(s) / b.value(s),
            Oracle::PowI(a, k) => {
                let base = a.value(s);
                let mut acc = 1.0;
                for _ in 0..k.unsigned_abs() {
                    acc *= base;
                }
                if *k < 0 {
                    1.0 / acc
                } else {
                    acc
                }
            }
        }
    }

    // Written with minimal parentheses so the parser's precedence is exercised.
    fn text(&self) -> String {
        match self {
            Oracle::Num(v) => format!("{v}"),
            Oracle::Arg(i) => format!("s{}", i + 1),
            Oracle::Neg(a) => format!("(-({}))", a.text()),
            Oracle::Sqrt(a) => format!("sqrt({})", a.text()),
            Oracle::Exp(a) => format!("exp({})", a.text()),
            Oracle::Log(a) => format!("log({})", a.text()),
            Oracle::Add(a, b) => format!("{} + {}", a.text(), b.text()),
            Oracle::Sub(a, b) => format!("{} - ({})", a.text(), b.text()),
            Oracle::Mul(a, b) => format!("({}) * ({})", a.text(), b.text()),
            Oracle::Div(a, b) => format!("({}) / ({})", a.text(), b.text()),
            Oracle::PowI(a, k) if *k < 0 => format!("({})^(-{})", a.text(), -k),
            Oracle::PowI(a, k) => format!("({})^{k}", a.text()),
        }
    }
}

fn random_tree(depth: usize, args: usize, rng: &mut impl Rng) -> Oracle {
    if depth <= 1 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.5) {
            Oracle::Arg(rng.gen_range(0..args))
        } else {
            Oracle::Num((rng.gen_range(0.1..3.0f64) * 100.0).round() / 100.0)
        };
    }
    let sub = |rng: &mut _| Box::new(random_tree(depth - 1, args, rng));
    match rng.gen_range(0..10) {
        0 => Oracle::Neg(sub(rng)),
        1 => Oracle::Sqrt(sub(rng)),
        2 => Oracle::Exp(Box::new(random_tree(depth.min(3) - 1, args, rng))),
        3 => Oracle::Log(sub(rng)),
        4 => Oracle::Add(sub(rng), sub(rng)),
        5 => Oracle::Sub(sub(rng), sub(rng)),
        6 => Oracle::Mul(sub(rng), sub(rng)),
        7 => Oracle::Div(sub(rng), sub(rng)),
        _ => Oracle::PowI(sub(rng), rng.gen_range(-3..=4)),
    }
}

#[test]
fn random_expressions_match_oracle() {
    let mut rng = sampling::rng(2024);
    let args = 3;
    let vars = VarSet::family_args(args);
    let mut checked = 0;
    while checked < 1000 {
        let tree = random_tree(rng.gen_range(1..=5), args, &mut rng);
        let text = tree.text();
        let expr = parse_with(&text, &vars).unwrap_or_else(|e| panic!("{text}: {e}"));
        let s: Vec<f64> = (0..args).map(|_| rng.gen_range(0.2..2.0)).collect();
        let want = tree.value(&s);
        if !want.is_finite() || want.abs() > 1e8 {
            continue;
        }
        let got: f64 = expr.eval_args(&s);
        assert!(
            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
            "{text} at {s:?}: {got} vs {want}"
        );
        let reparsed = parse_expr(&expr.to_string()).unwrap();
        assert_eq!(reparsed, expr);
        checked += 1;
    }
}
