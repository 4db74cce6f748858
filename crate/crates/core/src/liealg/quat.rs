//! Quaternions, quaternionic matrices and their complex and real realisations.
//!
//! Convention: `ij = k`, `jk = i`, `ki = j`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion { a, b, c, d }
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn norm_sqr(self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// `q = z + w j` with `z, w` complex.
    pub fn complex_pair(self) -> (Complex<f64>, Complex<f64>) {
        (Complex::new(self.a, self.b), Complex::new(self.c, self.d))
    }

    /// `[[z, w], [-w̄, z̄]]`.
    pub fn to_complex(self) -> [[Complex<f64>; 2]; 2] {
        let (z, w) = self.complex_pair();
        [[z, w], [-w.conj(), z.conj()]]
    }

    /// Matrix of left multiplication on `ℝ⁴` with basis `1, i, j, k`.
    pub fn to_real(self) -> [[f64; 4]; 4] {
        let Quaternion { a, b, c, d } = self;
        [
            [a, -b, -c, -d],
            [b, a, -d, c],
            [c, d, a, -b],
            [d, -c, b, a],
        ]
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (o.a, o.b, o.c, o.d);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

/// Dense square quaternionic matrix, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatMatrix {
    pub n: usize,
    pub entries: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(n: usize) -> Self {
        QuatMatrix {
            n,
            entries: vec![Quaternion::ZERO; n * n],
        }
    }

    /// `q E_{r,c}` with zero-based indices.
    pub fn unit(n: usize, r: usize, c: usize, q: Quaternion) -> Self {
        let mut m = Self::zeros(n);
        m.set(r, c, q);
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Quaternion {
        self.entries[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        self.entries[r * self.n + c] = q;
    }

    pub fn plus(&self, o: &QuatMatrix) -> QuatMatrix {
        QuatMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(&x, &y)| x + y).collect(),
        }
    }

    pub fn minus(&self, o: &QuatMatrix) -> QuatMatrix {
        QuatMatrix {
            n: self.n,
            entries: self.entries.iter().zip(&o.entries).map(|(&x, &y)| x - y).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> QuatMatrix {
        QuatMatrix {
            n: self.n,
            entries: self.entries.iter().map(|q| q.scale(s)).collect(),
        }
    }

    pub fn mul(&self, o: &QuatMatrix) -> QuatMatrix {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = Quaternion::ZERO;
                for k in 0..n {
                    acc = acc + self.get(r, k) * o.get(k, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn commutator(&self, o: &QuatMatrix) -> QuatMatrix {
        self.mul(o).minus(&o.mul(self))
    }

    pub fn conj_transpose(&self) -> QuatMatrix {
        let mut out = Self::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// `Re tr(X* Y)`.
    pub fn re_trace_inner(&self, o: &QuatMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&o.entries)
            .map(|(x, y)| (x.conj() * *y).a)
            .sum()
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        let n = self.n;
        let mut out = DMatrix::from_element(2 * n, 2 * n, Complex::new(0.0, 0.0));
        for r in 0..n {
            for c in 0..n {
                let b = self.get(r, c).to_complex();
                for (i, row) in b.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        out[(2 * r + i, 2 * c + j)] = *v;
                    }
                }
            }
        }
        out
    }

    pub fn to_real(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut out = DMatrix::zeros(4 * n, 4 * n);
        for r in 0..n {
            for c in 0..n {
                let b = self.get(r, c).to_real();
                for (i, row) in b.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        out[(4 * r + i, 4 * c + j)] = *v;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNITS: [Quaternion; 4] = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];

    #[test]
    fn hamilton_relations() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(i * j * k, -Quaternion::ONE);
        assert_eq!(i * i, -Quaternion::ONE);
    }

    #[test]
    fn realisations_are_homomorphisms() {
        for &p in &UNITS {
            for &q in &UNITS {
                let pq = p * q;
                let c = |x: Quaternion| {
                    let m = x.to_complex();
                    DMatrix::from_fn(2, 2, |r, s| m[r][s])
                };
                let r = |x: Quaternion| {
                    let m = x.to_real();
                    DMatrix::from_fn(4, 4, |a, b| m[a][b])
                };
                assert_eq!(c(p) * c(q), c(pq));
                assert_eq!(r(p) * r(q), r(pq));
            }
        }
    }

    #[test]
    fn matrix_realisation_respects_products() {
        let mut a = QuatMatrix::zeros(2);
        a.set(0, 1, Quaternion::new(0.5, -1.0, 2.0, 0.25));
        a.set(1, 1, Quaternion::J);
        let mut b = QuatMatrix::zeros(2);
        b.set(0, 0, Quaternion::new(1.0, 0.0, -0.3, 0.7));
        b.set(1, 0, Quaternion::K);
        let ab = a.mul(&b);
        assert!((a.to_complex() * b.to_complex() - ab.to_complex()).iter().all(|z| z.norm() < 1e-15));
        assert!((a.to_real() * b.to_real() - ab.to_real()).amax() < 1e-15);
        let inner = a.re_trace_inner(&b);
        let via_complex: f64 = (a.to_complex().adjoint() * b.to_complex()).trace().re / 2.0;
        let via_real = (a.to_real().transpose() * b.to_real()).trace() / 4.0;
        assert!((inner - via_complex).abs() < 1e-14);
        assert!((inner - via_real).abs() < 1e-14);
    }
}
