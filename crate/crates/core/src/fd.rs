//! Central finite differences on `f64` closures.
//!
//! These are the plain-difference counterparts of the dual-number derivatives
//! and serve as an independent route in checks and for differentiating
//! quantities (such as spray coefficients) that are not themselves generic.

use nalgebra::{DMatrix, DVector};

fn shifted(x: &[f64], dirs: &[(&[f64], f64)]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (d, s) in dirs {
        for (o, di) in out.iter_mut().zip(d.iter()) {
            *o += s * di;
        }
    }
    out
}

/// `d/ds f(x + s a)` by a central difference of step `h`.
pub fn first(f: impl Fn(&[f64]) -> f64, x: &[f64], a: &[f64], h: f64) -> f64 {
    (f(&shifted(x, &[(a, h)])) - f(&shifted(x, &[(a, -h)]))) / (2.0 * h)
}

/// `d²/ds dt f(x + s a + t b)` by the four-point central stencil.
pub fn mixed_second(f: impl Fn(&[f64]) -> f64, x: &[f64], a: &[f64], b: &[f64], h: f64) -> f64 {
    let pp = f(&shifted(x, &[(a, h), (b, h)]));
    let pm = f(&shifted(x, &[(a, h), (b, -h)]));
    let mp = f(&shifted(x, &[(a, -h), (b, h)]));
    let mm = f(&shifted(x, &[(a, -h), (b, -h)]));
    (pp - pm - mp + mm) / (4.0 * h * h)
}

/// Full Hessian by central differences of step `h`.
pub fn hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut out = DMatrix::zeros(n, n);
    let basis: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    for i in 0..n {
        for j in i..n {
            let v = mixed_second(&f, x, &basis[i], &basis[j], h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Mixed third directional derivative from the eight-point stencil.
pub fn mixed_third(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    a: &[f64],
    b: &[f64],
    c: &[f64],
    h: f64,
) -> f64 {
    let mut acc = 0.0;
    for sa in [1.0, -1.0] {
        for sb in [1.0, -1.0] {
            for sc in [1.0, -1.0] {
                acc += sa * sb * sc * f(&shifted(x, &[(a, sa * h), (b, sb * h), (c, sc * h)]));
            }
        }
    }
    acc / (8.0 * h * h * h)
}

/// Richardson-extrapolated mixed third derivative: `(4 D(h/2) - D(h)) / 3`.
pub fn mixed_third_richardson(
    f: impl Fn(&[f64]) -> f64,
    x: &[f64],
    a: &[f64],
    b: &[f64],
    c: &[f64],
    h: f64,
) -> f64 {
    let coarse = mixed_third(&f, x, a, b, c, h);
    let fine = mixed_third(&f, x, a, b, c, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// Jacobian of a vector function by central differences.
pub fn jacobian(f: impl Fn(&[f64]) -> DVector<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let m = f(x).len();
    let n = x.len();
    let mut out = DMatrix::zeros(m, n);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let d = (f(&xp) - f(&xm)) / (2.0 * h);
        out.set_column(j, &d);
    }
    out
}
