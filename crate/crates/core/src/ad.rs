//! Forward-mode differentiation helpers on top of `num-dual`.
//!
//! Every metric in the crate evaluates through a generic [`Scalar`], so the
//! same code path yields values, gradients, Hessians and third derivatives.

use nalgebra::{DMatrix, DVector};
use num_dual::{Dual64, DualNum, HyperDual64, HyperHyperDual64};

/// Number type accepted by every generic evaluator in the crate.
pub trait Scalar: DualNum<Primitive = f64> + Copy {}

impl<T: DualNum<Primitive = f64> + Copy> Scalar for T {}

/// Real part of any scalar.
#[inline]
pub fn re<D: Scalar>(x: D) -> f64 {
    x.re()
}

/// Lift constants into a scalar type.
pub fn lift<D: Scalar>(x: &[f64]) -> Vec<D> {
    x.iter().map(|&v| D::from(v)).collect()
}

pub fn dot<D: Scalar>(a: &[D], b: &[D]) -> D {
    a.iter()
        .zip(b)
        .fold(D::zero(), |acc, (&x, &y)| acc + x * y)
}

/// `f(x)` and `d/ds f(x + s a)` at `s = 0`.
pub fn directional(f: impl Fn(&[Dual64]) -> Dual64, x: &[f64], a: &[f64]) -> (f64, f64) {
    let z: Vec<Dual64> = x
        .iter()
        .zip(a)
        .map(|(&xi, &ai)| Dual64::new(xi, ai))
        .collect();
    let out = f(&z);
    (out.re, out.eps)
}

/// Mixed second directional derivative `d²/ds dt f(x + s a + t b)` at the origin.
pub fn second_directional(
    f: impl Fn(&[HyperDual64]) -> HyperDual64,
    x: &[f64],
    a: &[f64],
    b: &[f64],
) -> f64 {
    let z: Vec<HyperDual64> = x
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&xi, (&ai, &bi))| HyperDual64::new(xi, ai, bi, 0.0))
        .collect();
    f(&z).eps1eps2
}

/// Mixed third directional derivative along `a`, `b`, `c`.
pub fn third_directional(
    f: impl Fn(&[HyperHyperDual64]) -> HyperHyperDual64,
    x: &[f64],
    a: &[f64],
    b: &[f64],
    c: &[f64],
) -> f64 {
    let z: Vec<HyperHyperDual64> = (0..x.len())
        .map(|i| HyperHyperDual64::new(x[i], a[i], b[i], c[i], 0.0, 0.0, 0.0, 0.0))
        .collect();
    f(&z).eps1eps2eps3
}

/// Value, gradient and Hessian from `n(n+1)/2` hyper-dual evaluations.
pub fn hessian(
    f: impl Fn(&[HyperDual64]) -> HyperDual64,
    x: &[f64],
) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = x.len();
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    let mut value = 0.0;
    let mut z: Vec<HyperDual64> = x.iter().map(|&v| HyperDual64::from(v)).collect();
    for i in 0..n {
        for j in i..n {
            z[i].eps1 = 1.0;
            z[j].eps2 = 1.0;
            let out = f(&z);
            z[i].eps1 = 0.0;
            z[j].eps2 = 0.0;
            hess[(i, j)] = out.eps1eps2;
            hess[(j, i)] = out.eps1eps2;
            if i == j {
                grad[i] = out.eps1;
                value = out.re;
            }
        }
    }
    (value, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic<D: Scalar>(z: &[D]) -> D {
        z[0] * z[0] * z[1] + z[1].powi(3) + z[0].sin()
    }

    #[test]
    fn hessian_of_polynomial() {
        let x = [0.3, -1.2];
        let (v, g, h) = hessian(|z| cubic(z), &x);
        assert!((v - cubic(&x)).abs() < 1e-15);
        assert!((g[0] - (2.0 * x[0] * x[1] + x[0].cos())).abs() < 1e-14);
        assert!((g[1] - (x[0] * x[0] + 3.0 * x[1] * x[1])).abs() < 1e-14);
        assert!((h[(0, 0)] - (2.0 * x[1] - x[0].sin())).abs() < 1e-14);
        assert!((h[(0, 1)] - 2.0 * x[0]).abs() < 1e-14);
        assert!((h[(1, 1)] - 6.0 * x[1]).abs() < 1e-14);
    }

    #[test]
    fn third_derivative_of_cube() {
        let d = third_directional(|z| z[1].powi(3), &[0.0, 2.0], &[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0]);
        assert!((d - 6.0).abs() < 1e-14);
    }
}
