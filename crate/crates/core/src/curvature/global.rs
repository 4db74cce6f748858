//! Closed geodesics, ε-tuning, directed distance and the antipodal map.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::ode::{geodesic, geodesic_residual, Geodesic, GeodesicOptions};
use super::{flag_net, Chart, ChartMetric};
use crate::navigation::{killing_defect, NavigatedMetric, SphereMetric, VectorField};
use crate::norms::FiberNorm;
use crate::{ad, fd, sampling, Error, Result};

const FLOW_STEP: f64 = 2e-3;
const FLOW_HORIZON: f64 = 200.0;
const RETURN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedGeodesicRecord {
    pub direction: Direction,
    /// Prime length `λ`.
    pub length: f64,
    /// Flow time of one period.
    pub period: f64,
    /// Wind scale when the record comes from a navigated family.
    pub epsilon: Option<f64>,
    pub start: DVector<f64>,
    pub return_defect: f64,
    /// Max relative variation of `F(±V)` along the orbit.
    pub speed_spread: f64,
}

fn tangent_at(p: &DVector<f64>, g: DVector<f64>) -> DVector<f64> {
    &g - p * p.dot(&g)
}

/// Prime length of the integral circle of `±V` through `start`.
pub fn closed_geodesic_length<M: SphereMetric>(
    metric: &M,
    field: &VectorField,
    direction: Direction,
    start: &DVector<f64>,
) -> Result<ClosedGeodesicRecord> {
    if start.len() != metric.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: metric.ambient_dim(), found: start.len() });
    }
    let p0 = start / start.norm();
    let sg = direction.sign();
    if field.eval_f64(&p0).norm() < 1e-12 {
        return Err(Error::VanishingField);
    }
    let defect = killing_defect(metric, field, 32, sampling::DEFAULT_SEED);
    if defect > 1e-6 {
        return Err(Error::NotKilling { defect });
    }
    let dim = p0.len();
    let deriv = |s: &DVector<f64>| {
        let p = s.rows(0, dim).into_owned();
        let v = field.eval_f64(&p) * sg;
        let f = metric.eval_f64(&p, &v);
        let mut out = DVector::zeros(dim + 1);
        out.rows_mut(0, dim).copy_from(&v);
        out[dim] = f;
        out
    };
    let rk4 = |s: &DVector<f64>, h: f64| {
        let k1 = deriv(s);
        let k2 = deriv(&(s + &k1 * (0.5 * h)));
        let k3 = deriv(&(s + &k2 * (0.5 * h)));
        let k4 = deriv(&(s + &k3 * h));
        s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    };
    let gap = |s: &DVector<f64>| {
        let p = s.rows(0, dim).into_owned();
        (&p - &p0).dot(&field.eval_f64(&p)) * sg
    };
    let mut state = DVector::zeros(dim + 1);
    state.rows_mut(0, dim).copy_from(&p0);
    let f0 = deriv(&state)[dim];
    let mut spread: f64 = 0.0;
    let mut armed = false;
    let mut t = 0.0;
    while t < FLOW_HORIZON {
        let next = rk4(&state, FLOW_STEP);
        spread = spread.max((deriv(&next)[dim] / f0 - 1.0).abs());
        let dist = (next.rows(0, dim) - &p0).norm();
        if dist > 1e-2 {
            armed = true;
        }
        if armed && gap(&state) < 0.0 && gap(&next) >= 0.0 {
            let (mut lo, mut hi) = (0.0, FLOW_STEP);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if gap(&rk4(&state, mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let sigma = 0.5 * (lo + hi);
            let end = rk4(&state, sigma);
            let miss = (end.rows(0, dim) - &p0).norm();
            if miss <= RETURN_TOL {
                if spread > 1e-6 {
                    return Err(Error::Precondition(format!(
                        "F(±V) is not constant along the orbit (relative spread {spread:e})"
                    )));
                }
                return Ok(ClosedGeodesicRecord {
                    direction,
                    length: end[dim],
                    period: t + sigma,
                    epsilon: None,
                    start: p0,
                    return_defect: miss,
                    speed_spread: spread,
                });
            }
        }
        state = next;
        t += FLOW_STEP;
    }
    Err(Error::NotClosed { horizon: FLOW_HORIZON })
}

/// `λ(ε)`: length of the `-V` circle for `F̃_ε` from `(F, εV)`.
pub fn lambda_at<M: SphereMetric>(
    base: &M,
    field: &VectorField,
    epsilon: f64,
    start: &DVector<f64>,
) -> Result<ClosedGeodesicRecord> {
    let nav = NavigatedMetric::new(base, field.clone(), epsilon, sampling::DEFAULT_SEED)?;
    let mut rec = closed_geodesic_length(&nav, field, Direction::Minus, start)?;
    rec.epsilon = Some(epsilon);
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneReport {
    pub epsilon: f64,
    pub lambda: f64,
    pub lambda_zero: f64,
    pub target: f64,
    /// `1 / F(-V)`, the end of the admissible interval.
    pub upper: f64,
    pub iterations: usize,
}

/// Bisection for `λ(ε) = target` on `[0, 1/F(-V))`.
pub fn tune_epsilon<M: SphereMetric>(
    base: &M,
    field: &VectorField,
    start: &DVector<f64>,
    target: f64,
) -> Result<TuneReport> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidInput(format!("target length must be positive, got {target}")));
    }
    let lambda_zero = closed_geodesic_length(base, field, Direction::Minus, start)?.length;
    if lambda_zero > target + 1e-9 {
        return Err(Error::Precondition(format!(
            "lambda_-(0) = {lambda_zero} exceeds the target {target}; λ(ε) only increases from λ_-"
        )));
    }
    let p0 = start / start.norm();
    let upper = 1.0 / base.eval_f64(&p0, &(-field.eval_f64(&p0)));
    let mut report = TuneReport {
        epsilon: 0.0,
        lambda: lambda_zero,
        lambda_zero,
        target,
        upper,
        iterations: 0,
    };
    if (lambda_zero - target).abs() <= 1e-9 {
        return Ok(report);
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-10 && report.iterations < 80 {
        report.iterations += 1;
        let mid = 0.5 * (lo + hi);
        let above = match lambda_at(base, field, mid, &p0) {
            Ok(rec) => rec.length >= target,
            Err(Error::NavigationDomain { .. }) | Err(Error::NotClosed { .. }) => true,
            Err(e) => return Err(e),
        };
        if above {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    report.epsilon = 0.5 * (lo + hi);
    report.lambda = lambda_at(base, field, report.epsilon, &p0)?.length;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceOptions {
    /// Net size on `S²`; multiplied by `n - 1` in higher dimension.
    pub net: usize,
    pub horizon: f64,
    pub hit_tol: f64,
    pub coarse_tol: f64,
    pub max_refinements: usize,
    pub seed: u64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions {
            net: 720,
            horizon: 2.0 * PI + 0.5,
            hit_tol: 1e-4,
            coarse_tol: 0.1,
            max_refinements: 16,
            seed: sampling::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceResult {
    pub distance: f64,
    pub miss: f64,
    /// Unit-speed initial velocity of the connecting geodesic.
    pub direction: DVector<f64>,
    pub candidates: usize,
    pub net: usize,
}

/// Orthonormal basis of `p^⊥`.
fn tangent_basis(p: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = p.len();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(d - 1);
    let mut axes: Vec<usize> = (0..d).collect();
    axes.sort_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs()));
    for &i in &axes {
        if out.len() == d - 1 {
            break;
        }
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        v -= p * p[i];
        for b in &out {
            let c = v.dot(b);
            v -= b * c;
        }
        let n = v.norm();
        if n > 1e-8 {
            out.push(v / n);
        }
    }
    out
}

/// Local minima `(t, |c(t) - target|)` of a recorded geodesic.
fn approaches(g: &Geodesic, target: &DVector<f64>, window: (f64, f64)) -> Vec<(f64, f64)> {
    let d: Vec<f64> = (0..g.len()).map(|i| (g.point(i) - target).norm()).collect();
    let mut out = Vec::new();
    for i in 0..g.len() {
        let left = if i == 0 { f64::INFINITY } else { d[i - 1] };
        let right = if i + 1 == g.len() { f64::INFINITY } else { d[i + 1] };
        if d[i] > left || d[i] > right {
            continue;
        }
        let a = g.t[i.saturating_sub(1)];
        let b = g.t[(i + 1).min(g.len() - 1)];
        let (t, v) = golden(|s| (g.interpolate(s) - target).norm(), a, b, 50);
        if t >= window.0 && t <= window.1 {
            out.push((t, v));
        }
    }
    out
}

fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn nelder_mead(f: impl Fn(&DVector<f64>) -> f64, x0: &DVector<f64>, step: f64, iters: usize) -> (DVector<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(DVector<f64>, f64)> = vec![(x0.clone(), f(x0))];
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += step;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, s| acc + &s.0) / n as f64;
        let worst = simplex[n].clone();
        let xr = &centroid * 2.0 - &worst.0;
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = &centroid * 3.0 - &worst.0 * 2.0;
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = (&centroid + &worst.0) * 0.5;
            let fc = f(&xc);
            if fc < worst.1 {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for s in simplex.iter_mut().skip(1) {
                    s.0 = (&s.0 + &best) * 0.5;
                    s.1 = f(&s.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Directed distance `d_F(x₁, x₂)` by geodesic shooting from `x₁`.
pub fn distance<M: SphereMetric>(
    metric: &M,
    x1: &DVector<f64>,
    x2: &DVector<f64>,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    let d = metric.ambient_dim();
    for x in [x1, x2] {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.len() });
        }
    }
    let p = x1 / x1.norm();
    let q = x2 / x2.norm();
    if (&p - &q).norm() < 1e-9 {
        return Err(Error::InvalidInput("distance endpoints coincide".into()));
    }
    let n = d - 1;
    let cm = ChartMetric::new(metric);
    let basis = tangent_basis(&p);
    let to_tangent = |c: &DVector<f64>| basis.iter().zip(c.iter()).fold(DVector::zeros(d), |acc, (b, &ci)| acc + b * ci);
    let shoot = |c: &DVector<f64>, t_end: f64, go: &GeodesicOptions| -> Result<Geodesic> {
        let w = to_tangent(c);
        let v = &w / metric.eval_f64(&p, &w);
        geodesic(&cm, &p, &v, t_end, go)
    };
    let (net, spacing): (Vec<DVector<f64>>, f64) = if n == 2 {
        let m = opts.net;
        let dth = 2.0 * PI / m as f64;
        (
            (0..m).map(|k| DVector::from_vec(vec![(k as f64 * dth).cos(), (k as f64 * dth).sin()])).collect(),
            dth,
        )
    } else {
        let m = opts.net * (n - 1).max(1);
        let mut rng = sampling::rng(opts.seed);
        let pts: Vec<DVector<f64>> = (0..m).map(|_| sampling::unit_vector(n, &mut rng)).collect();
        let spacing = (4.0 * PI / m as f64).powf(1.0 / (n as f64 - 1.0).max(1.0));
        (pts, spacing)
    };
    let coarse = GeodesicOptions::coarse();
    let fine = GeodesicOptions::default();
    let mut hits: Vec<Vec<(f64, f64)>> = Vec::with_capacity(net.len());
    for c in &net {
        let g = shoot(c, opts.horizon, &coarse)?;
        hits.push(approaches(&g, &q, (0.0, opts.horizon)));
    }
    let neighbours = |k: usize| -> Vec<usize> {
        if n == 2 {
            let m = net.len();
            vec![(k + m - 1) % m, (k + 1) % m]
        } else {
            let mut idx: Vec<usize> = (0..net.len()).filter(|&j| j != k).collect();
            idx.sort_by(|&a, &b| net[b].dot(&net[k]).total_cmp(&net[a].dot(&net[k])));
            idx.truncate(2 * n);
            idx
        }
    };
    let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
    for (k, list) in hits.iter().enumerate() {
        for &(t, dist) in list {
            if dist > opts.coarse_tol {
                continue;
            }
            let beaten = neighbours(k)
                .into_iter()
                .any(|j| hits[j].iter().any(|&(s, e)| (s - t).abs() < 0.3 && e < dist));
            if !beaten {
                candidates.push((k, t, dist));
            }
        }
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let total = candidates.len();
    let mut best: Option<DistanceResult> = None;
    let mut best_miss = f64::INFINITY;
    for &(k, tc, _) in candidates.iter().take(opts.max_refinements) {
        if let Some(b) = &best {
            if tc > b.distance + 0.3 {
                break;
            }
        }
        let window = ((tc - 0.3).max(0.0), (tc + 0.3).min(opts.horizon));
        let closest = |c: &DVector<f64>| -> (f64, f64) {
            match shoot(c, window.1, &fine) {
                Ok(g) => approaches(&g, &q, window)
                    .into_iter()
                    .fold((f64::NAN, f64::INFINITY), |acc, h| if h.1 < acc.1 { h } else { acc }),
                Err(_) => (f64::NAN, f64::INFINITY),
            }
        };
        let c_best = if n == 2 {
            let th0 = net[k][1].atan2(net[k][0]);
            let dir = |th: f64| DVector::from_vec(vec![th.cos(), th.sin()]);
            let (th, _) = golden(|th| closest(&dir(th)).1, th0 - 1.5 * spacing, th0 + 1.5 * spacing, 45);
            dir(th)
        } else {
            let (c, _) = nelder_mead(|c| closest(&(c / c.norm())).1, &net[k], spacing, 120 * n);
            &c / c.norm()
        };
        let (t, miss) = closest(&c_best);
        best_miss = best_miss.min(miss);
        if miss < opts.hit_tol && best.as_ref().map_or(true, |b| t < b.distance) {
            let w = to_tangent(&c_best);
            best = Some(DistanceResult {
                distance: t,
                miss,
                direction: &w / metric.eval_f64(&p, &w),
                candidates: total,
                net: net.len(),
            });
        }
    }
    best.ok_or(Error::SearchFailure { miss: best_miss })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntipodalSample {
    pub point: DVector<f64>,
    pub psi: DVector<f64>,
    /// Max distance of the time-`π` endpoints from their mean.
    pub spread: f64,
    pub psi_squared: DVector<f64>,
    pub displacement: f64,
}

/// The direction-net agreement is a numerical proxy for uniqueness of `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntipodalReport {
    pub samples: Vec<AntipodalSample>,
    pub max_spread: f64,
    pub max_displacement: f64,
    pub psi_squared_identity: bool,
    pub directions: usize,
    pub seed: u64,
}

fn time_pi_image<M: SphereMetric>(
    cm: &ChartMetric<M>,
    x: &DVector<f64>,
    directions: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<(DVector<f64>, f64)> {
    let d = x.len();
    let mut ends = Vec::with_capacity(directions);
    for _ in 0..directions {
        let w = tangent_at(x, sampling::gaussian_vector(d, rng));
        let v = &w / cm.metric.eval_f64(x, &w);
        ends.push(geodesic(cm, x, &v, PI, &GeodesicOptions::default())?.end_point());
    }
    let mean = ends.iter().fold(DVector::zeros(d), |acc, e| acc + e) / directions as f64;
    let spread = ends.iter().map(|e| (e - &mean).norm()).fold(0.0, f64::max);
    Ok((&mean / mean.norm(), spread))
}

/// `ψ(x)` as the common time-`π` endpoint of unit geodesics from `x`, and `ψ²`.
pub fn antipodal_check<M: SphereMetric>(
    metric: &M,
    points: usize,
    directions: usize,
    seed: u64,
) -> Result<AntipodalReport> {
    let cm = ChartMetric::new(metric);
    let d = metric.ambient_dim();
    let mut rng = sampling::rng(seed);
    let mut samples = Vec::with_capacity(points);
    for _ in 0..points {
        let x = sampling::unit_vector(d, &mut rng);
        let (psi, spread) = time_pi_image(&cm, &x, directions.max(2), &mut rng)?;
        if spread > 1e-3 {
            return Err(Error::NotConstantCurvature { spread });
        }
        let (psi2, spread2) = time_pi_image(&cm, &psi, directions.max(2), &mut rng)?;
        if spread2 > 1e-3 {
            return Err(Error::NotConstantCurvature { spread: spread2 });
        }
        let displacement = (&psi2 - &x).norm();
        samples.push(AntipodalSample {
            point: x,
            psi,
            spread: spread.max(spread2),
            psi_squared: psi2,
            displacement,
        });
    }
    let max_spread = samples.iter().map(|s| s.spread).fold(0.0, f64::max);
    let max_displacement = samples.iter().map(|s| s.displacement).fold(0.0, f64::max);
    Ok(AntipodalReport {
        samples,
        max_spread,
        max_displacement,
        psi_squared_identity: max_displacement <= 1e-3,
        directions,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingCriticalReport {
    /// `F(X)` at the point.
    pub length: f64,
    /// Chart gradient of `x ↦ F(x, X(x))`.
    pub gradient_norm: f64,
    /// Geodesic residual of the integral curve of `X` through the point.
    pub ode_residual: f64,
}

pub fn killing_critical_check<M: SphereMetric>(
    metric: &M,
    field: &VectorField,
    p: &DVector<f64>,
) -> Result<KillingCriticalReport> {
    let p = p / p.norm();
    if field.eval_f64(&p).norm() < 1e-12 {
        return Err(Error::VanishingField);
    }
    let cm = ChartMetric::new(metric);
    let chart = Chart::for_point(&p);
    let x = chart.from_sphere(&p);
    let f = |z: &[f64]| {
        let q = DVector::from_vec(chart.to_sphere(z));
        metric.eval_f64(&q, &field.eval_f64(&q))
    };
    let n = x.len();
    let grad = DVector::from_iterator(
        n,
        (0..n).map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            fd::first(f, x.as_slice(), &e, 1e-5)
        }),
    );
    let curve = |s: f64| {
        let (q, _) = field.flow(&p, &field.eval_f64(&p), s);
        let v = field.eval_f64(&q);
        (q, v)
    };
    Ok(KillingCriticalReport {
        length: f(x.as_slice()),
        gradient_norm: grad.norm(),
        ode_residual: geodesic_residual(&cm, curve, 0.0)?,
    })
}

/// Max over seeded `(x, y)` of the Cartan tensor norm in a `g_y`-orthonormal frame, `F(y) = 1`.
pub fn cartan_norm<M: SphereMetric>(metric: &M, samples: usize, seed: u64) -> Result<f64> {
    let cm = ChartMetric::new(metric);
    let d = metric.ambient_dim();
    let n = d - 1;
    let mut rng = sampling::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = sampling::unit_vector(d, &mut rng);
        let v = tangent_at(&p, sampling::gaussian_vector(d, &mut rng));
        let chart = Chart::for_point(&p);
        let x = chart.from_sphere(&p);
        let y = chart.pull_back(&p, &v);
        let y = &y / cm.eval_f64(chart, &x, &y);
        let fiber = cm.fiber(chart, &x);
        let g = fiber.fundamental_tensor(y.as_slice())?.matrix;
        let l = g
            .cholesky()
            .ok_or_else(|| Error::Numerical("fundamental tensor lost definiteness".into()))?
            .l();
        let frame: DMatrix<f64> = l
            .transpose()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular frame".into()))?;
        let cols: Vec<Vec<f64>> = (0..n).map(|a| frame.column(a).iter().copied().collect()).collect();
        let mut sum = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = 0.25
                        * ad::third_directional(
                            |z| {
                                let f = fiber.eval_dual(z);
                                f * f
                            },
                            y.as_slice(),
                            &cols[a],
                            &cols[b],
                            &cols[c],
                        );
                    sum += v * v;
                }
            }
        }
        worst = worst.max(sum.sqrt());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KimMinReport {
    pub asymmetry: f64,
    pub curvature_deviation: f64,
    pub cartan_norm: f64,
    pub reversible: bool,
    pub unit_curvature: bool,
    pub riemannian: bool,
    /// Reversible with `K ≈ 1` implies a vanishing Cartan tensor.
    pub consistent: bool,
}

/// Sampled check that a reversible metric with `K ≡ 1` is Riemannian.
pub fn kim_min_check<M: SphereMetric>(metric: &M, samples: usize, seed: u64) -> Result<KimMinReport> {
    let d = metric.ambient_dim();
    let mut rng = sampling::rng(seed);
    let mut asymmetry: f64 = 0.0;
    for _ in 0..samples {
        let p = sampling::unit_vector(d, &mut rng);
        let v = tangent_at(&p, sampling::gaussian_vector(d, &mut rng));
        let a = metric.eval_f64(&p, &v);
        asymmetry = asymmetry.max((a - metric.eval_f64(&p, &(-&v))).abs() / a);
    }
    let cm = ChartMetric::new(metric);
    let mut curvature_deviation: f64 = 0.0;
    for flag in flag_net(d, samples, seed ^ 0x5eed) {
        curvature_deviation = curvature_deviation.max((cm.flag_curvature(&flag)? - 1.0).abs());
    }
    let cartan = cartan_norm(metric, samples, seed)?;
    let reversible = asymmetry < 1e-9;
    let unit_curvature = curvature_deviation < 1e-3;
    let riemannian = cartan < 1e-3;
    Ok(KimMinReport {
        asymmetry,
        curvature_deviation,
        cartan_norm: cartan,
        reversible,
        unit_curvature,
        riemannian,
        consistent: !(reversible && unit_curvature) || riemannian,
    })
}
