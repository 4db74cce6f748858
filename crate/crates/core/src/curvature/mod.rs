//! Chart geometry on `Sⁿ`: spray, geodesics, flag curvature, closed geodesics,
//! distances and the antipodal map.

mod chart;
mod global;
mod ode;
#[cfg(test)]
mod tests;

use nalgebra::{DMatrix, DVector};
use num_dual::{Dual64, HyperDual64};
use serde::Serialize;

use crate::ad::{self, Scalar};
use crate::navigation::SphereMetric;
use crate::norms::{check_positive_definite, FiberNorm};
use crate::{Error, Result};

pub use chart::{Chart, CHART_RADIUS};
pub use global::{
    antipodal_check, cartan_norm, closed_geodesic_length, distance, kim_min_check,
    killing_critical_check, lambda_at, tune_epsilon, AntipodalReport, AntipodalSample,
    ClosedGeodesicRecord, Direction, DistanceOptions, DistanceResult, KillingCriticalReport,
    KimMinReport, TuneReport,
};
pub use ode::{geodesic, geodesic_residual, integrate, Geodesic, GeodesicOptions};

/// A sphere metric read through the stereographic atlas.
#[derive(Debug, Clone)]
pub struct ChartMetric<M> {
    pub metric: M,
    /// Sphere dimension.
    pub n: usize,
}

impl<M: SphereMetric> ChartMetric<M> {
    pub fn new(metric: M) -> Self {
        let n = metric.ambient_dim() - 1;
        ChartMetric { metric, n }
    }

    /// `F(x, y) = F(φ(x), dφ(x) y)`.
    pub fn eval<D: Scalar>(&self, chart: Chart, x: &[D], y: &[D]) -> D {
        let p = chart.to_sphere(x);
        let v = chart.push_forward(x, y);
        self.metric.eval_ambient(&p, &v)
    }

    pub fn eval_f64(&self, chart: Chart, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        self.eval(chart, x.as_slice(), y.as_slice())
    }

    fn f2<D: Scalar>(&self, chart: Chart, z: &[D]) -> D {
        let f = self.eval(chart, &z[..self.n], &z[self.n..]);
        f * f
    }

    fn check(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        for v in [x, y] {
            if v.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
            }
        }
        let r = x.norm();
        if !(r <= CHART_RADIUS) {
            return Err(Error::SwitchChart { radius: r });
        }
        let ny = y.norm();
        if !(ny > 1e-12) {
            return Err(Error::DegenerateVector { norm: ny });
        }
        Ok(())
    }

    /// `g_ij(x, y) = ½ [F²]_{y^i y^j}`.
    pub fn fundamental_tensor(&self, chart: Chart, x: &DVector<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check(x, y)?;
        let (_, _, h) = ad::hessian(
            |w| {
                let xs: Vec<HyperDual64> = ad::lift(x.as_slice());
                let f = self.eval(chart, &xs, w);
                f * f
            },
            y.as_slice(),
        );
        let g = h * 0.5;
        check_positive_definite(&g, y.as_slice())?;
        Ok(g)
    }

    /// `Gⁱ = ¼ gⁱˡ ([F²]_{x^k y^l} y^k - [F²]_{x^l})`.
    pub fn spray(&self, chart: Chart, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check(x, y)?;
        let n = self.n;
        let z0: Vec<f64> = x.iter().chain(y.iter()).copied().collect();
        let mut rhs = DVector::zeros(n);
        let mut hyy = DMatrix::zeros(n, n);
        let mut z: Vec<HyperDual64> = z0.iter().map(|&v| HyperDual64::from(v)).collect();
        for l in 0..n {
            for k in 0..n {
                z[k].eps1 = y[k];
            }
            z[n + l].eps2 = 1.0;
            let mixed = self.f2(chart, &z).eps1eps2;
            for k in 0..n {
                z[k].eps1 = 0.0;
            }
            z[n + l].eps2 = 0.0;
            let mut d: Vec<Dual64> = z0.iter().map(|&v| Dual64::from(v)).collect();
            d[l].eps = 1.0;
            let gx = self.f2(chart, &d).eps;
            rhs[l] = mixed - gx;
            for m in l..n {
                z[n + l].eps1 = 1.0;
                z[n + m].eps2 = 1.0;
                let v = self.f2(chart, &z).eps1eps2;
                z[n + l].eps1 = 0.0;
                z[n + m].eps2 = 0.0;
                hyy[(l, m)] = 0.5 * v;
                hyy[(m, l)] = 0.5 * v;
            }
        }
        let chol = hyy
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositive { witness: y.as_slice().to_vec(), value: hyy.determinant() })?;
        Ok(chol.solve(&rhs) * 0.25)
    }

    /// Fibre of the chart metric at `x` as a Minkowski norm.
    pub fn fiber(&self, chart: Chart, x: &DVector<f64>) -> ChartFiber<'_, M> {
        ChartFiber { cm: self, chart, x: x.clone() }
    }

    /// `R^i_k` of the spray at `(x, y)`, derivatives of `G` by central differences.
    pub fn riemann(&self, chart: Chart, x: &DVector<f64>, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = self.n;
        let g0 = self.spray(chart, x, y)?;
        let spray_at = |dx: &DVector<f64>, dy: &DVector<f64>| self.spray(chart, &(x + dx), &(y + dy));
        let zero = DVector::zeros(n);
        let e = |k: usize| {
            let mut v = DVector::zeros(n);
            v[k] = 1.0;
            v
        };
        let h1 = 1e-5;
        let h2 = 1e-4;
        let mixed = |a: (&DVector<f64>, &DVector<f64>), b: (&DVector<f64>, &DVector<f64>)| -> Result<DVector<f64>> {
            let mut acc = DVector::zeros(n);
            for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let dx = a.0 * (sa * h2) + b.0 * (sb * h2);
                let dy = a.1 * (sa * h2) + b.1 * (sb * h2);
                acc += spray_at(&dx, &dy)? * w;
            }
            Ok(acc / (4.0 * h2 * h2))
        };
        let mut gx = DMatrix::zeros(n, n);
        let mut gy = DMatrix::zeros(n, n);
        for k in 0..n {
            let ek = e(k) * h1;
            let dxk = (spray_at(&ek, &zero)? - spray_at(&-&ek, &zero)?) / (2.0 * h1);
            let dyk = (spray_at(&zero, &ek)? - spray_at(&zero, &-&ek)?) / (2.0 * h1);
            gx.set_column(k, &dxk);
            gy.set_column(k, &dyk);
        }
        let mut r = DMatrix::zeros(n, n);
        for k in 0..n {
            let ek = e(k);
            let xy = mixed((y, &zero), (&zero, &ek))?;
            let yy = mixed((&zero, &g0), (&zero, &ek))?;
            let col = gx.column(k) * 2.0 - xy + yy * 2.0 - &gy * gy.column(k);
            r.set_column(k, &col);
        }
        Ok(r)
    }

    /// Flag curvature `K(x, y, span{y, u})`.
    pub fn flag_curvature(&self, flag: &FlagInput) -> Result<f64> {
        let (x, y) = (&flag.x, &flag.y);
        let g = self.fundamental_tensor(flag.chart, x, y)?;
        let u = flag.projected_edge(&g)?;
        let r = self.riemann(flag.chart, x, y)?;
        let f2 = y.dot(&(&g * y));
        let uu = u.dot(&(&g * &u));
        let yu = y.dot(&(&g * &u));
        let den = f2 * uu - yu * yu;
        if !(den > 1e-14 * f2 * uu) {
            return Err(Error::InvalidFlag(format!("degenerate flag, denominator {den:e}")));
        }
        Ok((&r * &u).dot(&(&g * &u)) / den)
    }
}

/// `y ↦ F(x, y)` at a fixed chart point.
pub struct ChartFiber<'a, M> {
    cm: &'a ChartMetric<M>,
    chart: Chart,
    x: DVector<f64>,
}

impl<M: SphereMetric> FiberNorm for ChartFiber<'_, M> {
    fn dim(&self) -> usize {
        self.cm.n
    }

    fn eval_dual<D: Scalar>(&self, y: &[D]) -> D {
        let xs: Vec<D> = ad::lift(self.x.as_slice());
        self.cm.eval(self.chart, &xs, y)
    }
}

/// Flag `(x, y, span{y, u})` in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagInput {
    pub chart: Chart,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: DVector<f64>,
}

impl FlagInput {
    /// Flag through an ambient point with ambient tangent vectors.
    pub fn from_ambient(p: &DVector<f64>, y: &DVector<f64>, u: &DVector<f64>) -> Self {
        let chart = Chart::for_point(p);
        FlagInput {
            chart,
            x: chart.from_sphere(p),
            y: chart.pull_back(p, y),
            u: chart.pull_back(p, u),
        }
    }

    /// `u - ⟨y,u⟩_y / ⟨y,y⟩_y · y`.
    pub fn projected_edge(&self, g: &DMatrix<f64>) -> Result<DVector<f64>> {
        let gy = g * &self.y;
        let c = self.u.dot(&gy) / self.y.dot(&gy);
        let u = &self.u - &self.y * c;
        let scale = self.u.norm().max(1e-300);
        if !(u.norm() > 1e-8 * scale) || !(self.u.norm() > 0.0) {
            return Err(Error::InvalidFlag("edge is parallel to the flagpole".into()));
        }
        Ok(u)
    }
}

/// Seeded flags at uniformly random points of `Sⁿ`.
pub fn flag_net(ambient: usize, count: usize, seed: u64) -> Vec<FlagInput> {
    let mut rng = crate::sampling::rng(seed);
    (0..count)
        .map(|_| {
            let p = crate::sampling::unit_vector(ambient, &mut rng);
            let tangent = |g: DVector<f64>| &g - &p * p.dot(&g);
            let y = tangent(crate::sampling::gaussian_vector(ambient, &mut rng));
            let u = tangent(crate::sampling::gaussian_vector(ambient, &mut rng));
            FlagInput::from_ambient(&p, &y, &u)
        })
        .collect()
}

/// `K` of the base at a flag next to `K̃` of the navigated metric at `(x, ỹ, span{ỹ, u})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreservationSample {
    pub point: DVector<f64>,
    pub k: f64,
    pub k_navigated: f64,
}

/// Compares flag curvatures across the navigation `(F, εV) ↦ F̃` with `ỹ = y + F(y) εV(x)`.
pub fn curvature_preservation<M: SphereMetric>(
    base: &M,
    field: &crate::navigation::VectorField,
    epsilon: f64,
    flags: &[FlagInput],
) -> Result<Vec<PreservationSample>> {
    let nav = crate::navigation::NavigatedMetric::new(base, field.clone(), epsilon, crate::sampling::DEFAULT_SEED)?;
    let cm = ChartMetric::new(base);
    let cn = ChartMetric::new(&nav);
    flags
        .iter()
        .map(|flag| {
            let k = cm.flag_curvature(flag)?;
            let g = cm.fundamental_tensor(flag.chart, &flag.x, &flag.y)?;
            let u = flag.projected_edge(&g)?;
            let p = DVector::from_vec(flag.chart.to_sphere(flag.x.as_slice()));
            let wind = flag.chart.pull_back(&p, &(field.eval_f64(&p) * epsilon));
            let y = &flag.y + wind * cm.eval_f64(flag.chart, &flag.x, &flag.y);
            let tilde = FlagInput { chart: flag.chart, x: flag.x.clone(), y, u };
            Ok(PreservationSample { point: p, k, k_navigated: cn.flag_curvature(&tilde)? })
        })
        .collect()
}
