//! Dormand–Prince 5(4) integration of `ẍ = -2G(x, ẋ)` across the atlas.

use nalgebra::DVector;
use serde::Serialize;

use super::{Chart, ChartMetric};
use crate::navigation::{AmbientCurve, SphereMetric};
use crate::{Error, Result};

/// Chart radius beyond which an accepted step hands over to the other chart.
const SWITCH_AT: f64 = 1.25;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            rtol: 1e-11,
            atol: 1e-12,
            h_init: 1e-2,
            h_max: 0.1,
            h_min: 1e-10,
        }
    }
}

impl GeodesicOptions {
    /// Looser tolerances for bulk shooting.
    pub fn coarse() -> Self {
        GeodesicOptions {
            rtol: 1e-9,
            atol: 1e-10,
            h_max: 0.2,
            ..Self::default()
        }
    }
}

/// Accepted steps of an integrated geodesic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Geodesic {
    pub t: Vec<f64>,
    pub charts: Vec<Chart>,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
}

impl Geodesic {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        DVector::from_vec(self.charts[i].to_sphere(self.x[i].as_slice()))
    }

    pub fn velocity(&self, i: usize) -> DVector<f64> {
        DVector::from_vec(self.charts[i].push_forward(self.x[i].as_slice(), self.y[i].as_slice()))
    }

    pub fn end_point(&self) -> DVector<f64> {
        self.point(self.len() - 1)
    }

    pub fn to_ambient(&self) -> AmbientCurve {
        AmbientCurve {
            t: self.t.clone(),
            points: (0..self.len()).map(|i| self.point(i)).collect(),
            velocities: (0..self.len()).map(|i| self.velocity(i)).collect(),
        }
    }

    /// Index of the sample at time `t`, if one was recorded there.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.t.iter().position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
    }

    /// Ambient point at `t` by cubic Hermite interpolation between steps.
    pub fn interpolate(&self, t: f64) -> DVector<f64> {
        let last = self.len() - 1;
        let i = match self.t.iter().position(|&s| s > t) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => last.saturating_sub(1),
        };
        let j = (i + 1).min(last);
        if i == j {
            return self.point(i);
        }
        let h = self.t[j] - self.t[i];
        let s = ((t - self.t[i]) / h).clamp(0.0, 1.0);
        let (p0, p1) = (self.point(i), self.point(j));
        let (v0, v1) = (self.velocity(i), self.velocity(j));
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        p0 * h00 + v0 * (h10 * h) + p1 * h01 + v1 * (h11 * h)
    }

    /// Max relative deviation of `F(ċ)` from its initial value.
    pub fn speed_drift<M: SphereMetric>(&self, cm: &ChartMetric<M>) -> f64 {
        let f0 = cm.eval_f64(self.charts[0], &self.x[0], &self.y[0]);
        (0..self.len())
            .map(|i| (cm.eval_f64(self.charts[i], &self.x[i], &self.y[i]) / f0 - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `t,chart,x1,...,xn` rows.
    pub fn to_csv(&self) -> String {
        let n = self.x.first().map_or(0, |x| x.len());
        let mut out = String::from("t,chart");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!("{},{}", self.t[i], self.charts[i].id()));
            for v in self.x[i].iter() {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn rhs<M: SphereMetric>(cm: &ChartMetric<M>, chart: Chart, s: &DVector<f64>) -> Result<DVector<f64>> {
    let n = cm.n;
    let x = s.rows(0, n).into_owned();
    let y = s.rows(n, n).into_owned();
    let g = cm.spray(chart, &x, &y)?;
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&y);
    out.rows_mut(n, n).copy_from(&(g * -2.0));
    Ok(out)
}

/// One DP45 step: fifth-order solution and scaled error norm.
fn step<M: SphereMetric>(
    cm: &ChartMetric<M>,
    chart: Chart,
    s: &DVector<f64>,
    k1: &DVector<f64>,
    h: f64,
    opts: &GeodesicOptions,
) -> Result<(DVector<f64>, DVector<f64>, f64)> {
    let mut k: Vec<DVector<f64>> = vec![k1.clone()];
    for stage in 1..7 {
        let mut arg = s.clone();
        for (j, kj) in k.iter().enumerate() {
            if A[stage][j] != 0.0 {
                arg += kj * (h * A[stage][j]);
            }
        }
        k.push(rhs(cm, chart, &arg)?);
    }
    let mut hi = s.clone();
    let mut err = DVector::zeros(s.len());
    for j in 0..7 {
        hi += &k[j] * (h * B5[j]);
        err += &k[j] * (h * (B5[j] - B4[j]));
    }
    let scaled = err
        .iter()
        .zip(s.iter().zip(hi.iter()))
        .map(|(e, (a, b))| e / (opts.atol + opts.rtol * a.abs().max(b.abs())))
        .map(|v| v * v)
        .sum::<f64>();
    let norm = (scaled / s.len() as f64).sqrt();
    Ok((hi, k[6].clone(), norm))
}

/// Integrates from chart data `(x, y)` to `t_end`, landing exactly on each of `stops`.
pub fn integrate<M: SphereMetric>(
    cm: &ChartMetric<M>,
    chart: Chart,
    x: &DVector<f64>,
    y: &DVector<f64>,
    t_end: f64,
    stops: &[f64],
    opts: &GeodesicOptions,
) -> Result<Geodesic> {
    let n = cm.n;
    let mut chart = chart;
    let mut s = DVector::zeros(2 * n);
    s.rows_mut(0, n).copy_from(x);
    s.rows_mut(n, n).copy_from(y);
    if x.norm() > SWITCH_AT {
        let (x2, y2) = chart.transition(x, y);
        chart = chart.other();
        s.rows_mut(0, n).copy_from(&x2);
        s.rows_mut(n, n).copy_from(&y2);
    }
    let mut out = Geodesic {
        t: vec![0.0],
        charts: vec![chart],
        x: vec![s.rows(0, n).into_owned()],
        y: vec![s.rows(n, n).into_owned()],
    };
    let mut targets: Vec<f64> = stops.iter().copied().filter(|&v| v > 0.0 && v < t_end).collect();
    targets.push(t_end);
    targets.sort_by(f64::total_cmp);
    let mut next = 0;
    let mut t = 0.0;
    let mut h = opts.h_init.min(opts.h_max);
    let mut k1 = rhs(cm, chart, &s)?;
    while t < t_end {
        let target = targets[next];
        let mut h_try = h.min(target - t);
        let hits = h_try >= target - t;
        if hits {
            h_try = target - t;
        }
        match step(cm, chart, &s, &k1, h_try, opts) {
            Ok((s_new, k7, err)) if err <= 1.0 => {
                t = if hits { target } else { t + h_try };
                if hits {
                    next += 1;
                }
                s = s_new;
                k1 = k7;
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !hits || h_try >= h {
                    h = (h_try * factor).min(opts.h_max);
                }
                let xn = s.rows(0, n).into_owned();
                if xn.norm() > SWITCH_AT {
                    let (x2, y2) = chart.transition(&xn, &s.rows(n, n).into_owned());
                    chart = chart.other();
                    s.rows_mut(0, n).copy_from(&x2);
                    s.rows_mut(n, n).copy_from(&y2);
                    k1 = rhs(cm, chart, &s)?;
                }
                out.t.push(t);
                out.charts.push(chart);
                out.x.push(s.rows(0, n).into_owned());
                out.y.push(s.rows(n, n).into_owned());
            }
            Ok((_, _, err)) => {
                h = h_try * (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
            }
            Err(Error::SwitchChart { .. }) | Err(Error::NotPositive { .. }) | Err(Error::DegenerateVector { .. }) => {
                h = h_try * 0.25;
            }
            Err(e) => return Err(e),
        }
        if h < opts.h_min {
            return Err(Error::Integration {
                t,
                reason: format!("step size collapsed below {:e}", opts.h_min),
            });
        }
    }
    Ok(out)
}

/// Geodesic with ambient initial data; requires `F(p0, v0) = 1`.
pub fn geodesic<M: SphereMetric>(
    cm: &ChartMetric<M>,
    p0: &DVector<f64>,
    v0: &DVector<f64>,
    t_end: f64,
    opts: &GeodesicOptions,
) -> Result<Geodesic> {
    if p0.len() != cm.n + 1 || v0.len() != cm.n + 1 {
        return Err(Error::DimensionMismatch { expected: cm.n + 1, found: p0.len().max(v0.len()) });
    }
    let speed = cm.metric.eval_f64(p0, v0);
    if !((speed - 1.0).abs() <= 1e-9) {
        return Err(Error::Precondition(format!("initial velocity has F = {speed}, expected 1")));
    }
    let chart = Chart::for_point(p0);
    integrate(cm, chart, &chart.from_sphere(p0), &chart.pull_back(p0, v0), t_end, &[], opts)
}

/// `|ẍ + 2G(x, ẋ)| / F(x, ẋ)²` for an ambient curve `t ↦ (p, ṗ)` at `t`.
///
/// `ẍ` is a Richardson-extrapolated central difference of the chart velocity.
pub fn geodesic_residual<M: SphereMetric>(
    cm: &ChartMetric<M>,
    curve: impl Fn(f64) -> (DVector<f64>, DVector<f64>),
    t: f64,
) -> Result<f64> {
    let (p, v) = curve(t);
    let chart = Chart::for_point(&p);
    let vel = |s: f64| {
        let (q, w) = curve(s);
        chart.pull_back(&q, &w)
    };
    let h = 1e-3;
    let d = |h: f64| (vel(t + h) - vel(t - h)) / (2.0 * h);
    let acc = (d(0.5 * h) * 4.0 - d(h)) / 3.0;
    let x = chart.from_sphere(&p);
    let y = chart.pull_back(&p, &v);
    let g = cm.spray(chart, &x, &y)?;
    let f = cm.eval_f64(chart, &x, &y);
    Ok((acc + g * 2.0).norm() / (f * f))
}
