//! Zermelo navigation: fibrewise, for Randers data in closed form, and on the
//! round sphere with Killing winds.

use nalgebra::{DMatrix, DVector};
use num_dual::Dual64;
use serde::{Deserialize, Serialize};

use crate::ad::{self, Scalar};
use crate::error::{Error, Result};
use crate::expr::{parse_with, Expr, VarSet};
use crate::norms::{check_slit, check_vector, FiberNorm, MinkowskiNorm};
use crate::sampling;

const MAX_ITERS: usize = 60;

/// Anything evaluable on a (point, vector) pair with a generic scalar.
pub trait PointNorm {
    fn eval_at<D: Scalar>(&self, p: &[D], y: &[D]) -> D;
}

struct FiberOnly<'a, N>(&'a N);

impl<N: FiberNorm> PointNorm for FiberOnly<'_, N> {
    fn eval_at<D: Scalar>(&self, _p: &[D], y: &[D]) -> D {
        self.0.eval_dual(y)
    }
}

fn shift<D: Scalar>(w: &[D], v: &[D], t: D) -> Vec<D> {
    w.iter().zip(v).map(|(&a, &b)| a - b * t).collect()
}

/// Real root of `t ↦ F(w - tV) - t` on `(0, F(w) / (1 - F(-V))]`.
fn solve_real<M: PointNorm>(m: &M, p: &[f64], w: &[f64], v: &[f64]) -> Result<(f64, f64)> {
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let fv = m.eval_at(p, &neg);
    if !(fv < 1.0) {
        return Err(Error::NavigationDomain { value: fv });
    }
    let fw = m.eval_at(p, w);
    let phi = |t: f64| m.eval_at(p, &shift(w, v, t)) - t;
    let slope = |t: f64| {
        let pd: Vec<Dual64> = ad::lift(p);
        let wd: Vec<Dual64> = ad::lift(w);
        let vd: Vec<Dual64> = ad::lift(v);
        let r = m.eval_at(&pd, &shift(&wd, &vd, Dual64::new(t, 1.0))) - Dual64::new(t, 1.0);
        (r.re, r.eps)
    };
    let (mut lo, mut hi): (f64, f64) = (0.0, fw / (1.0 - fv));
    if phi(hi) > 0.0 {
        // only possible through rounding at the bracket end
        hi *= 1.0 + 1e-12;
        if phi(hi) > 0.0 {
            return Err(Error::Numerical(format!(
                "navigation root not bracketed: phi({hi}) = {:e}, F(w) = {fw}, F(-V) = {fv}",
                phi(hi)
            )));
        }
    }
    let mut t = fw;
    for _ in 0..MAX_ITERS {
        let (f, d) = slope(t);
        if f == 0.0 {
            return Ok((t, d));
        }
        if f > 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let mut next = t - f / d;
        if !(next > lo && next < hi) || d >= 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * t.abs().max(1e-300) {
            let (_, d) = slope(next);
            return Ok((next, d));
        }
        t = next;
    }
    Err(Error::Numerical(format!(
        "navigation solve did not converge in {MAX_ITERS} iterations (bracket [{lo}, {hi}])"
    )))
}

/// `F̃(p, w)`: the `t > 0` with `F(p, w - tV) = t`, exact through every dual order.
pub fn navigate_generic<M: PointNorm, D: Scalar>(m: &M, p: &[D], w: &[D], v: &[D]) -> D {
    let pr: Vec<f64> = p.iter().map(|x| x.re()).collect();
    let wr: Vec<f64> = w.iter().map(|x| x.re()).collect();
    let vr: Vec<f64> = v.iter().map(|x| x.re()).collect();
    if wr.iter().all(|&x| x == 0.0) {
        return D::zero();
    }
    let (t0, slope) = match solve_real(m, &pr, &wr, &vr) {
        Ok(r) => r,
        Err(_) => return D::from(f64::NAN),
    };
    let mut t = D::from(t0);
    for _ in 0..=D::NDERIV {
        let phi = m.eval_at(p, &shift(w, v, t)) - t;
        t -= phi / slope;
    }
    t
}

/// Fibrewise navigation datum `(F, V)` with `F(-V) < 1`.
#[derive(Debug, Clone)]
pub struct Navigated<N> {
    pub base: N,
    pub wind: DVector<f64>,
}

impl<N: FiberNorm> Navigated<N> {
    pub fn new(base: N, wind: DVector<f64>) -> Result<Self> {
        check_vector(wind.as_slice(), base.dim())?;
        let neg: Vec<f64> = wind.iter().map(|x| -x).collect();
        let fv = base.eval(&neg)?;
        if !(fv < 1.0) {
            return Err(Error::NavigationDomain { value: fv });
        }
        Ok(Navigated { base, wind })
    }

    /// The datum `(F̃, -V)`, whose navigation returns `F`.
    pub fn inverse(self) -> Result<Navigated<Navigated<N>>> {
        let back = -&self.wind;
        Navigated::new(self, back)
    }
}

impl<N: FiberNorm> FiberNorm for Navigated<N> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval_dual<D: Scalar>(&self, y: &[D]) -> D {
        let v: Vec<D> = ad::lift(self.wind.as_slice());
        navigate_generic(&FiberOnly(&self.base), &[], y, &v)
    }
}

/// `F̃(w)` with explicit domain and root diagnostics.
pub fn navigate_eval<N: FiberNorm>(base: &N, wind: &DVector<f64>, w: &[f64]) -> Result<f64> {
    check_vector(w, base.dim())?;
    check_vector(wind.as_slice(), base.dim())?;
    if w.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    Ok(solve_real(&FiberOnly(base), &[], w, wind.as_slice())?.0)
}

/// Randers metric `α + β` obtained by navigating `√h` with wind `W`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandersData {
    pub h: DMatrix<f64>,
    pub w: DVector<f64>,
    pub lambda: f64,
    /// `α² = yᵀ a y`
    pub a: DMatrix<f64>,
    /// `β = b · y`
    pub b: DVector<f64>,
}

impl RandersData {
    pub fn norm(&self) -> Result<MinkowskiNorm> {
        MinkowskiNorm::randers(self.a.clone(), self.b.clone())
    }

    /// `α = √((1-λ)|y|² + ⟨y,W⟩²)/(1-λ)`, `β = -⟨y,W⟩/(1-λ)`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        randers_closed_form(&self.h, &self.w, y)
    }
}

pub fn randers_closed_form<D: Scalar>(h: &DMatrix<f64>, w: &DVector<f64>, y: &[D]) -> D {
    let n = w.len();
    let hw = h * w;
    let lambda = w.dot(&hw);
    let mut yy = D::zero();
    for i in 0..n {
        for j in 0..n {
            yy += y[i] * y[j] * h[(i, j)];
        }
    }
    let yw = (0..n).fold(D::zero(), |acc, i| acc + y[i] * hw[i]);
    let q = 1.0 - lambda;
    ((yy * q + yw * yw).sqrt() - yw) / q
}

pub fn randers_from_navigation(h: &DMatrix<f64>, w: &DVector<f64>) -> Result<RandersData> {
    if h.shape() != (w.len(), w.len()) {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            found: h.nrows(),
        });
    }
    let hw = h * w;
    let lambda = w.dot(&hw);
    if !(lambda < 1.0) {
        return Err(Error::NavigationDomain { value: lambda.sqrt() });
    }
    let q = 1.0 - lambda;
    let a = (h * q + &hw * hw.transpose()) / (q * q);
    let b = -&hw / q;
    Ok(RandersData {
        h: h.clone(),
        w: w.clone(),
        lambda,
        a,
        b,
    })
}

/// A vector field on `Sⁿ ⊂ ℝⁿ⁺¹`.
#[derive(Debug, Clone)]
pub enum VectorField {
    /// `p ↦ A p` with `A` skew: a Killing field of the round metric.
    Linear(DMatrix<f64>),
    /// Components as expressions in `x1..x(n+1)`, projected to the tangent space.
    Expr(Vec<Expr>),
}

impl VectorField {
    /// Hopf field `(−p₂, p₁, −p₄, p₃)` on `S³`.
    pub fn hopf() -> Self {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        a[(2, 3)] = -1.0;
        a[(3, 2)] = 1.0;
        VectorField::Linear(a)
    }

    /// Rotation in the `(x1, x2)` plane of `ℝⁿ⁺¹`.
    pub fn rotation(ambient: usize) -> Self {
        let mut a = DMatrix::zeros(ambient, ambient);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        VectorField::Linear(a)
    }

    pub fn linear(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() || (&a + a.transpose()).amax() > 1e-12 {
            return Err(Error::InvalidInput("linear field needs a skew-symmetric matrix".into()));
        }
        Ok(VectorField::Linear(a))
    }

    pub fn from_exprs(ambient: usize, texts: &[String]) -> Result<Self> {
        if texts.len() != ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                found: texts.len(),
            });
        }
        let vars = VarSet::point(ambient);
        Ok(VectorField::Expr(
            texts.iter().map(|t| parse_with(t, &vars)).collect::<std::result::Result<_, _>>()?,
        ))
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            VectorField::Linear(a) => VectorField::Linear(a * s),
            VectorField::Expr(es) => VectorField::Expr(
                es.iter()
                    .map(|e| {
                        Expr::Binary(
                            crate::expr::BinOp::Mul,
                            Box::new(if s >= 0.0 {
                                Expr::Num(s)
                            } else {
                                Expr::Neg(Box::new(Expr::Num(-s)))
                            }),
                            Box::new(e.clone()),
                        )
                    })
                    .collect(),
            ),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            VectorField::Linear(a) => a.nrows(),
            VectorField::Expr(es) => es.len(),
        }
    }

    pub fn eval<D: Scalar>(&self, p: &[D]) -> Vec<D> {
        match self {
            VectorField::Linear(a) => (0..a.nrows())
                .map(|i| (0..a.ncols()).fold(D::zero(), |acc, j| if a[(i, j)] == 0.0 { acc } else { acc + p[j] * a[(i, j)] }))
                .collect(),
            VectorField::Expr(es) => {
                let raw: Vec<D> = es.iter().map(|e| e.eval(&|v| p[v.index - 1])).collect();
                let pp = ad::dot(p, p);
                let pr = ad::dot(p, &raw);
                raw.iter().zip(p).map(|(&r, &x)| r - x * (pr / pp)).collect()
            }
        }
    }

    pub fn eval_f64(&self, p: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.eval(p.as_slice()))
    }

    /// `(ρ_s(p), dρ_s(v))`.
    pub fn flow(&self, p: &DVector<f64>, v: &DVector<f64>, s: f64) -> (DVector<f64>, DVector<f64>) {
        match self {
            VectorField::Linear(a) => {
                let e = (a * s).exp();
                (&e * p, &e * v)
            }
            VectorField::Expr(_) => {
                let steps = ((s.abs() / 1e-3).ceil() as usize).max(1);
                let h = s / steps as f64;
                let n = p.len();
                let rhs = |state: &DVector<f64>| -> DVector<f64> {
                    let x = state.rows(0, n).into_owned();
                    let w = state.rows(n, n).into_owned();
                    let z: Vec<Dual64> = (0..n).map(|i| Dual64::new(x[i], w[i])).collect();
                    let out = self.eval(&z);
                    DVector::from_iterator(2 * n, out.iter().map(|d| d.re).chain(out.iter().map(|d| d.eps)))
                };
                let mut state = DVector::from_iterator(2 * n, p.iter().chain(v.iter()).copied());
                for _ in 0..steps {
                    let k1 = rhs(&state);
                    let k2 = rhs(&(&state + &k1 * (h / 2.0)));
                    let k3 = rhs(&(&state + &k2 * (h / 2.0)));
                    let k4 = rhs(&(&state + &k3 * h));
                    state += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                }
                (state.rows(0, n).into_owned(), state.rows(n, n).into_owned())
            }
        }
    }
}

/// A Finsler metric on `Sⁿ ⊂ ℝⁿ⁺¹` evaluated on ambient (point, tangent) pairs.
pub trait SphereMetric {
    /// Ambient dimension `n + 1`.
    fn ambient_dim(&self) -> usize;

    fn eval_ambient<D: Scalar>(&self, p: &[D], v: &[D]) -> D;

    fn eval_f64(&self, p: &DVector<f64>, v: &DVector<f64>) -> f64 {
        self.eval_ambient(p.as_slice(), v.as_slice())
    }
}

impl<M: SphereMetric> SphereMetric for &M {
    fn ambient_dim(&self) -> usize {
        (**self).ambient_dim()
    }

    fn eval_ambient<D: Scalar>(&self, p: &[D], v: &[D]) -> D {
        (**self).eval_ambient(p, v)
    }
}

impl<M: SphereMetric> PointNorm for M {
    fn eval_at<D: Scalar>(&self, p: &[D], y: &[D]) -> D {
        self.eval_ambient(p, y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RoundMetric {
    pub ambient: usize,
}

impl SphereMetric for RoundMetric {
    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn eval_ambient<D: Scalar>(&self, _p: &[D], v: &[D]) -> D {
        ad::dot(v, v).sqrt()
    }
}

/// Randers metric from the round metric and wind `ε V`, in closed form.
#[derive(Debug, Clone)]
pub struct RandersNavMetric {
    pub field: VectorField,
    pub epsilon: f64,
}

impl SphereMetric for RandersNavMetric {
    fn ambient_dim(&self) -> usize {
        self.field.ambient_dim()
    }

    fn eval_ambient<D: Scalar>(&self, p: &[D], v: &[D]) -> D {
        let w: Vec<D> = self.field.eval(p).into_iter().map(|x| x * self.epsilon).collect();
        let lambda = ad::dot(&w, &w);
        let yy = ad::dot(v, v);
        let yw = ad::dot(v, &w);
        let q = D::one() - lambda;
        ((yy * q + yw * yw).sqrt() - yw) / q
    }
}

/// Metric on the sphere given by an expression in `x1..x(n+1), y1..y(n+1)`.
#[derive(Debug, Clone)]
pub struct ExprMetric {
    pub ambient: usize,
    pub expr: Expr,
}

impl ExprMetric {
    pub fn parse(ambient: usize, text: &str) -> Result<Self> {
        Ok(ExprMetric {
            ambient,
            expr: parse_with(text, &VarSet::point_tangent(ambient))?,
        })
    }
}

impl SphereMetric for ExprMetric {
    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn eval_ambient<D: Scalar>(&self, p: &[D], v: &[D]) -> D {
        self.expr.eval_point_tangent(p, v)
    }
}

/// `F̃` from `(F, ε V)` by the implicit navigation solve.
#[derive(Debug, Clone)]
pub struct NavigatedMetric<M> {
    pub base: M,
    pub field: VectorField,
    pub epsilon: f64,
}

impl<M: SphereMetric> NavigatedMetric<M> {
    /// Checks `F(-εV) < 1` on a sample of points.
    pub fn new(base: M, field: VectorField, epsilon: f64, seed: u64) -> Result<Self> {
        if field.ambient_dim() != base.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: base.ambient_dim(),
                found: field.ambient_dim(),
            });
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {epsilon}")));
        }
        let m = NavigatedMetric { base, field, epsilon };
        let worst = m.max_wind_length(256, seed);
        if !(worst < 1.0) {
            return Err(Error::NavigationDomain { value: worst });
        }
        Ok(m)
    }

    /// Sampled `max F(p, -εV(p))`.
    pub fn max_wind_length(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = sampling::rng(seed);
        let d = self.base.ambient_dim();
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let p = sampling::unit_vector(d, &mut rng);
            let w = -self.field.eval_f64(&p) * self.epsilon;
            if w.norm() > 0.0 {
                worst = worst.max(self.base.eval_f64(&p, &w));
            }
        }
        worst
    }

    pub fn wind<D: Scalar>(&self, p: &[D]) -> Vec<D> {
        self.field.eval(p).into_iter().map(|x| x * self.epsilon).collect()
    }
}

impl<M: SphereMetric> SphereMetric for NavigatedMetric<M> {
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    fn eval_ambient<D: Scalar>(&self, p: &[D], v: &[D]) -> D {
        if self.epsilon == 0.0 {
            return self.base.eval_ambient(p, v);
        }
        let w = self.wind(p);
        navigate_generic(&self.base, p, v, &w)
    }
}

/// Maximum relative change of `F(p, v)` under the flow, on a seeded net.
pub fn killing_defect<M: SphereMetric>(metric: &M, field: &VectorField, samples: usize, seed: u64) -> f64 {
    let d = metric.ambient_dim();
    let mut rng = sampling::rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = sampling::unit_vector(d, &mut rng);
        let g = sampling::gaussian_vector(d, &mut rng);
        let v = &g - &p * p.dot(&g);
        let f0 = metric.eval_f64(&p, &v);
        for s in [0.3, 1.0, 2.5] {
            let (q, w) = field.flow(&p, &v, s);
            worst = worst.max((metric.eval_f64(&q, &w) / f0 - 1.0).abs());
        }
    }
    worst
}

/// Sampled curve `t ↦ (p(t), ṗ(t))` in ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmbientCurve {
    pub t: Vec<f64>,
    pub points: Vec<DVector<f64>>,
    pub velocities: Vec<DVector<f64>>,
}

/// `t ↦ ρ_t(c(t))` where `ρ` is the flow of `εV`; velocity `dρ_t ċ + εV`.
///
/// `V` must be Killing for `metric` and `c` a unit-speed geodesic of it.
pub fn killing_transport<M: SphereMetric>(
    metric: &M,
    curve: &AmbientCurve,
    field: &VectorField,
    epsilon: f64,
) -> Result<AmbientCurve> {
    let defect = killing_defect(metric, field, 32, sampling::DEFAULT_SEED);
    if defect > 1e-6 {
        return Err(Error::NotKilling { defect });
    }
    for (p, v) in curve.points.iter().zip(&curve.velocities) {
        let speed = metric.eval_f64(p, v);
        if (speed - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!("curve is not unit speed (F = {speed})")));
        }
    }
    let mut out = AmbientCurve {
        t: curve.t.clone(),
        points: Vec::with_capacity(curve.t.len()),
        velocities: Vec::with_capacity(curve.t.len()),
    };
    for ((&t, p), v) in curve.t.iter().zip(&curve.points).zip(&curve.velocities) {
        let (q, w) = field.flow(p, v, epsilon * t);
        let wind = field.eval_f64(&q) * epsilon;
        out.points.push(q);
        out.velocities.push(w + wind);
    }
    Ok(out)
}

/// Serialisable navigation datum on a sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigationSpec {
    pub sphere: usize,
    /// `round`, or a metric expression in `x1..x(n+1), y1..y(n+1)`.
    #[serde(default = "round_name")]
    pub h_spec: String,
    /// `hopf`, `rotation`, or `n+1` component expressions separated by `;`.
    pub w_expr: String,
    pub epsilon: f64,
}

fn round_name() -> String {
    "round".into()
}

pub fn parse_field(sphere: usize, text: &str) -> Result<VectorField> {
    let ambient = sphere + 1;
    match text.trim() {
        "hopf" => {
            if ambient != 4 {
                return Err(Error::InvalidInput("the Hopf field lives on S^3".into()));
            }
            Ok(VectorField::hopf())
        }
        "rotation" => Ok(VectorField::rotation(ambient)),
        other => {
            let parts: Vec<String> = other.split(';').map(|s| s.trim().to_string()).collect();
            VectorField::from_exprs(ambient, &parts)
        }
    }
}

/// Fibre helper used by tests and the CLI: `F̃` ∘ `F` round trip defect at `w`.
pub fn round_trip_defect<N: FiberNorm + Clone>(base: &N, wind: &DVector<f64>, w: &[f64]) -> Result<f64> {
    check_slit(w)?;
    let nav = Navigated::new(base.clone(), wind.clone())?;
    let back = nav.inverse()?;
    let f = base.eval(w)?;
    Ok((back.eval(w)? / f - 1.0).abs())
}
