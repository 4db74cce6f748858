//! Two-chart stereographic atlas of `Sⁿ ⊂ ℝⁿ⁺¹`.

use nalgebra::DVector;
use serde::Serialize;

use crate::ad::Scalar;

/// Beyond this chart radius spray evaluation asks for a chart switch.
pub const CHART_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// Centred at the south pole `(0, …, 0, -1)`.
    South,
    /// Centred at the north pole `(0, …, 0, 1)`.
    North,
}

impl Chart {
    pub fn other(self) -> Chart {
        match self {
            Chart::South => Chart::North,
            Chart::North => Chart::South,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Chart::South => 1.0,
            Chart::North => -1.0,
        }
    }

    pub fn id(self) -> u8 {
        match self {
            Chart::South => 0,
            Chart::North => 1,
        }
    }

    /// Chart whose disc of radius 1 contains `p`.
    pub fn for_point(p: &DVector<f64>) -> Chart {
        if p[p.len() - 1] <= 0.0 {
            Chart::South
        } else {
            Chart::North
        }
    }

    /// `φ(x) = (2x, ±(|x|² - 1)) / (1 + |x|²)`.
    pub fn to_sphere<D: Scalar>(self, x: &[D]) -> Vec<D> {
        let s = x.iter().fold(D::zero(), |acc, &v| acc + v * v);
        let den = D::one() + s;
        let mut p: Vec<D> = x.iter().map(|&v| v * 2.0 / den).collect();
        p.push((s - 1.0) * self.sign() / den);
        p
    }

    /// `dφ(x) y`.
    pub fn push_forward<D: Scalar>(self, x: &[D], y: &[D]) -> Vec<D> {
        let s = x.iter().fold(D::zero(), |acc, &v| acc + v * v);
        let xy = x.iter().zip(y).fold(D::zero(), |acc, (&a, &b)| acc + a * b);
        let den = D::one() + s;
        let den2 = den * den;
        let mut v: Vec<D> = x
            .iter()
            .zip(y)
            .map(|(&xi, &yi)| yi * 2.0 / den - xi * xy * 4.0 / den2)
            .collect();
        v.push(xy * 4.0 * self.sign() / den2);
        v
    }

    /// Chart coordinates of a sphere point.
    pub fn from_sphere(self, p: &DVector<f64>) -> DVector<f64> {
        let n = p.len() - 1;
        let den = 1.0 - self.sign() * p[n];
        DVector::from_iterator(n, p.iter().take(n).map(|v| v / den))
    }

    /// Chart velocity of an ambient tangent vector `v` at `p`.
    pub fn pull_back(self, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = p.len() - 1;
        let sg = self.sign();
        let den = 1.0 - sg * p[n];
        DVector::from_iterator(
            n,
            (0..n).map(|i| v[i] / den + sg * p[i] * v[n] / (den * den)),
        )
    }

    /// `(x', y')` in the other chart: `x' = x / |x|²`.
    pub fn transition(self, x: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let s = x.norm_squared();
        let xy = x.dot(y);
        (x / s, y / s - x * (2.0 * xy / (s * s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    #[test]
    fn charts_invert_and_agree() {
        let mut rng = sampling::rng(1);
        for _ in 0..50 {
            let x = sampling::gaussian_vector(3, &mut rng) * 0.8;
            let y = sampling::gaussian_vector(3, &mut rng);
            for chart in [Chart::South, Chart::North] {
                let p = DVector::from_vec(chart.to_sphere(x.as_slice()));
                assert!((p.norm() - 1.0).abs() < 1e-14);
                assert!((chart.from_sphere(&p) - &x).amax() < 1e-13);
                let v = DVector::from_vec(chart.push_forward(x.as_slice(), y.as_slice()));
                assert!(p.dot(&v).abs() < 1e-13);
                assert!((chart.pull_back(&p, &v) - &y).amax() < 1e-12);
                let (x2, y2) = chart.transition(&x, &y);
                let q = DVector::from_vec(chart.other().to_sphere(x2.as_slice()));
                let w = DVector::from_vec(chart.other().push_forward(x2.as_slice(), y2.as_slice()));
                assert!((q - &p).amax() < 1e-13);
                assert!((w - v).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn poles() {
        let z = [0.0, 0.0];
        assert_eq!(Chart::South.to_sphere(&z), vec![0.0, 0.0, -1.0]);
        assert_eq!(Chart::North.to_sphere(&z), vec![0.0, 0.0, 1.0]);
    }
}
