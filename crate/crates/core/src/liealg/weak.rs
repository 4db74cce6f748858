//! Numerical search for isotropy elements reversing a tangent vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::SpherePresentation;
use crate::error::{Error, Result};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            restarts: 24,
            max_iters: 150,
            seed: sampling::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakSymmetryResult {
    /// Whether some `g = exp(X_1)…exp(X_d)` with `|Ad(g)u + u| < 1e-6 |u|` was found.
    pub found: bool,
    /// Exponents `X_1, …, X_d` in 𝔥 coordinates, concatenated.
    pub witness: Option<Vec<f64>>,
    pub depth: usize,
    /// Best relative residual reached.
    pub residual: f64,
}

pub const WEAK_SYMMETRY_TOL: f64 = 1e-6;

fn ad_h(gens: &[DMatrix<f64>], x: &[f64]) -> DMatrix<f64> {
    let k = gens[0].nrows();
    let mut m = DMatrix::zeros(k, k);
    for (g, &c) in gens.iter().zip(x) {
        m += g * c;
    }
    m
}

fn residual(gens: &[DMatrix<f64>], theta: &[f64], u: &DVector<f64>) -> DVector<f64> {
    let h = gens.len();
    let mut v = u.clone();
    for chunk in theta.chunks(h).rev() {
        v = ad_h(gens, chunk).exp() * v;
    }
    v + u
}

/// Search for `g ∈ H` with `Ad(g)u = -u`, composing up to two exponentials.
///
/// A negative answer only means the budget ran out.
pub fn check_weakly_symmetric(
    pres: &SpherePresentation,
    u: &DVector<f64>,
    budget: SearchBudget,
) -> Result<WeakSymmetryResult> {
    let dec = &pres.decomposition;
    if u.len() != dec.dim_m() {
        return Err(Error::DimensionMismatch {
            expected: dec.dim_m(),
            found: u.len(),
        });
    }
    let gram = dec.m_gram();
    let bi = |v: &DVector<f64>| v.dot(&(&gram * v)).max(0.0).sqrt();
    let scale = bi(u);
    if scale < 1e-12 {
        return Err(Error::DegenerateVector { norm: scale });
    }
    let gens = &dec.isotropy_generators;
    let mut best = bi(&(u * 2.0)) / scale;
    if gens.is_empty() {
        return Ok(WeakSymmetryResult {
            found: false,
            witness: None,
            depth: 0,
            residual: best,
        });
    }
    let mut rng = sampling::rng(budget.seed);
    for depth in 1..=2 {
        let p = depth * gens.len();
        for _ in 0..budget.restarts {
            let mut theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
            let r = levenberg_marquardt(gens, u, &mut theta, budget.max_iters, &bi, scale);
            best = best.min(r);
            if r < WEAK_SYMMETRY_TOL {
                return Ok(WeakSymmetryResult {
                    found: true,
                    witness: Some(theta),
                    depth,
                    residual: r,
                });
            }
        }
    }
    Ok(WeakSymmetryResult {
        found: false,
        witness: None,
        depth: 2,
        residual: best,
    })
}

fn levenberg_marquardt(
    gens: &[DMatrix<f64>],
    u: &DVector<f64>,
    theta: &mut [f64],
    max_iters: usize,
    bi: &impl Fn(&DVector<f64>) -> f64,
    scale: f64,
) -> f64 {
    let p = theta.len();
    let mut r = residual(gens, theta, u);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..max_iters {
        let rel = bi(&r) / scale;
        if rel < 0.1 * WEAK_SYMMETRY_TOL {
            return rel;
        }
        let jac = crate::fd::jacobian(|t| residual(gens, t, u), theta, 1e-7);
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..p {
                a[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residual(gens, &trial, u);
            let ct = rt.norm_squared();
            if ct < cost {
                theta.copy_from_slice(&trial);
                r = rt;
                cost = ct;
                mu = (mu * 0.3).max(1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    bi(&r) / scale
}
