//! Deterministic sample nets.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_SEED: u64 = 1729;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random unit vector.
pub fn unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

pub fn gaussian_vector(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| -> f64 { StandardNormal.sample(rng) })
}

/// Coordinate axes (both signs), normalised axis pairs `(e_i ± e_j)/√2`, then
/// `random` seeded uniform directions.
pub fn direction_net(dim: usize, random: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(dim);
            e[i] = s;
            out.push(e);
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = DVector::zeros(dim);
                e[i] = si * r;
                e[j] = sj * r;
                out.push(e);
            }
        }
    }
    let mut g = rng(seed);
    out.extend((0..random).map(|_| unit_vector(dim, &mut g)));
    out
}
