//! Compact Lie algebras from matrix realisations, reductive decompositions and
//! the homogeneous-sphere presentations.

pub mod presentations;
pub mod quat;
pub mod weak;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use quat::QuatMatrix;

pub use presentations::{build_presentation, build_sp_u1, PresentationKind, SpherePresentation};
pub use weak::{check_weakly_symmetric, SearchBudget, WeakSymmetryResult};

/// Real Lie algebra with structure constants `[e_i, e_j] = Σ c_ij^k e_k`.
#[derive(Debug, Clone)]
pub struct LieAlgebra {
    dim: usize,
    pub basis_labels: Vec<String>,
    constants: Vec<f64>,
    pub bi_inner: DMatrix<f64>,
}

/// An element of a matrix Lie algebra given as a list of quaternionic blocks
/// along the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement(pub Vec<QuatMatrix>);

impl BlockElement {
    pub fn plus(&self, o: &BlockElement) -> BlockElement {
        BlockElement(self.0.iter().zip(&o.0).map(|(a, b)| a.plus(b)).collect())
    }

    pub fn scale(&self, s: f64) -> BlockElement {
        BlockElement(self.0.iter().map(|a| a.scale(s)).collect())
    }

    pub fn commutator(&self, o: &BlockElement) -> BlockElement {
        BlockElement(self.0.iter().zip(&o.0).map(|(a, b)| a.commutator(b)).collect())
    }

    /// `Σ Re tr_H(X* Y)` over the blocks.
    pub fn inner(&self, o: &BlockElement) -> f64 {
        self.0.iter().zip(&o.0).map(|(a, b)| a.re_trace_inner(b)).sum()
    }

    fn to_complex(&self) -> DMatrix<Complex<f64>> {
        block_diag(self.0.iter().map(|b| b.to_complex()).collect(), Complex::new(0.0, 0.0))
    }

    fn to_real(&self) -> DMatrix<f64> {
        block_diag(self.0.iter().map(|b| b.to_real()).collect(), 0.0)
    }
}

fn block_diag<T: nalgebra::Scalar + Copy>(blocks: Vec<DMatrix<T>>, zero: T) -> DMatrix<T> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::from_element(n, n, zero);
    let mut at = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((at, at), (k, k)).copy_from(&b);
        at += k;
    }
    out
}

/// Which matrices carry out the commutators when structure constants are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realization {
    /// Quaternion-entry arithmetic.
    Quaternionic,
    /// Quaternions as complex 2×2 blocks.
    Complex,
    /// Quaternions as real 4×4 blocks.
    Real,
}

trait Rep: Sized {
    fn commutator(&self, o: &Self) -> Self;
    fn inner(&self, o: &Self) -> f64;
    fn sub_scaled(&mut self, o: &Self, s: f64);
}

struct QRep(BlockElement);
struct CRep(DMatrix<Complex<f64>>);
struct RRep(DMatrix<f64>);

impl Rep for QRep {
    fn commutator(&self, o: &Self) -> Self {
        QRep(self.0.commutator(&o.0))
    }
    fn inner(&self, o: &Self) -> f64 {
        self.0.inner(&o.0)
    }
    fn sub_scaled(&mut self, o: &Self, s: f64) {
        self.0 = self.0.plus(&o.0.scale(-s));
    }
}

impl Rep for CRep {
    fn commutator(&self, o: &Self) -> Self {
        CRep(&self.0 * &o.0 - &o.0 * &self.0)
    }
    fn inner(&self, o: &Self) -> f64 {
        0.5 * self.0.iter().zip(o.0.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
    }
    fn sub_scaled(&mut self, o: &Self, s: f64) {
        self.0 -= &o.0 * Complex::new(s, 0.0);
    }
}

impl Rep for RRep {
    fn commutator(&self, o: &Self) -> Self {
        RRep(&self.0 * &o.0 - &o.0 * &self.0)
    }
    fn inner(&self, o: &Self) -> f64 {
        0.25 * self.0.dot(&o.0)
    }
    fn sub_scaled(&mut self, o: &Self, s: f64) {
        self.0 -= &o.0 * s;
    }
}

fn constants_from<R: Rep>(basis: &[R]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let d = basis.len();
    let gram = DMatrix::from_fn(d, d, |i, j| basis[i].inner(&basis[j]));
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Algebra("basis is linearly dependent".into()))?;
    let mut c = vec![0.0; d * d * d];
    for i in 0..d {
        for j in (i + 1)..d {
            let mut br = basis[i].commutator(&basis[j]);
            let rhs = DVector::from_fn(d, |k, _| basis[k].inner(&br));
            let coords = chol.solve(&rhs);
            let size = br.inner(&br).sqrt();
            for (k, b) in basis.iter().enumerate() {
                br.sub_scaled(b, coords[k]);
            }
            let miss = br.inner(&br).max(0.0).sqrt();
            if miss > 1e-10 * (1.0 + size) {
                return Err(Error::Algebra(format!(
                    "span is not closed under the bracket: [e{}, e{}] leaves it by {miss:e}",
                    i + 1,
                    j + 1
                )));
            }
            for k in 0..d {
                let v = if coords[k].abs() < 1e-15 { 0.0 } else { coords[k] };
                c[(i * d + j) * d + k] = v;
                c[(j * d + i) * d + k] = -v;
            }
        }
    }
    Ok((c, gram))
}

impl LieAlgebra {
    /// Structure constants and the trace form `Re tr_H(X* Y)` of a spanning set.
    pub fn from_blocks(labels: Vec<String>, basis: &[BlockElement], realization: Realization) -> Result<Self> {
        if labels.len() != basis.len() {
            return Err(Error::Algebra("one label per basis element required".into()));
        }
        let (constants, bi_inner) = match realization {
            Realization::Quaternionic => {
                constants_from(&basis.iter().map(|b| QRep(b.clone())).collect::<Vec<_>>())?
            }
            Realization::Complex => constants_from(&basis.iter().map(|b| CRep(b.to_complex())).collect::<Vec<_>>())?,
            Realization::Real => constants_from(&basis.iter().map(|b| RRep(b.to_real())).collect::<Vec<_>>())?,
        };
        Ok(LieAlgebra {
            dim: basis.len(),
            basis_labels: labels,
            constants,
            bi_inner,
        })
    }

    /// Algebra from explicit constants; checked for antisymmetry and Jacobi.
    pub fn from_constants(labels: Vec<String>, constants: Vec<f64>, bi_inner: DMatrix<f64>) -> Result<Self> {
        let dim = labels.len();
        if constants.len() != dim * dim * dim || bi_inner.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                found: constants.len(),
            });
        }
        let alg = LieAlgebra {
            dim,
            basis_labels: labels,
            constants,
            bi_inner,
        };
        if alg.antisymmetry_defect() > 1e-12 || alg.jacobi_defect() > 1e-10 {
            return Err(Error::Algebra("constants violate antisymmetry or the Jacobi identity".into()));
        }
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c_ij^k`, zero based.
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut e = DVector::zeros(self.dim);
        e[i] = 1.0;
        e
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        for v in [x, y] {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
        }
        Ok(self.ad(x) * y)
    }

    /// Matrix of `ad(x)`: column `j` is `[x, e_j]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    m[(k, j)] += x[i] * self.c(i, j, k);
                }
            }
        }
        m
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.bi_inner * y))
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Max over basis triples of `|[x,[y,z]] + [y,[z,x]] + [z,[x,y]]|`.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim;
        let ads: Vec<DMatrix<f64>> = (0..d).map(|i| self.ad(&self.basis_vector(i))).collect();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let cyc = |a: usize, b: usize, c: usize| -> DVector<f64> {
                        &ads[a] * ads[b].column(c)
                    };
                    let s = cyc(i, j, k) + cyc(j, k, i) + cyc(k, i, j);
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    /// Max of `|⟨[x,y],z⟩ + ⟨y,[x,z]⟩|` on basis triples.
    pub fn bi_invariance_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for x in 0..d {
            let ad = self.ad(&self.basis_vector(x));
            let m = ad.transpose() * &self.bi_inner + &self.bi_inner * &ad;
            worst = worst.max(m.amax());
        }
        worst
    }
}

/// `𝔤 = 𝔥 + 𝔪` with 𝔥 a subalgebra and 𝔪 an ad(𝔥)-invariant complement.
///
/// Vectors in 𝔪 are handled in the coordinates of the basis vectors listed
/// in `m_indices`.
#[derive(Debug, Clone)]
pub struct ReductiveDecomposition {
    pub algebra: LieAlgebra,
    pub h_indices: Vec<usize>,
    pub m_indices: Vec<usize>,
    /// `ad(h_j)` restricted to 𝔪.
    pub isotropy_generators: Vec<DMatrix<f64>>,
    /// Column `j` of entry `i` is `[e_i, e_j]_𝔪` for 𝔪 basis vectors.
    m_brackets: Vec<DMatrix<f64>>,
}

/// Worst sampled violations of the decomposition axioms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionDefects {
    pub hh_in_h: f64,
    pub hm_in_m: f64,
    pub orthogonality: f64,
}

impl ReductiveDecomposition {
    pub fn new(algebra: LieAlgebra, h_indices: Vec<usize>, m_indices: Vec<usize>) -> Result<Self> {
        let d = algebra.dim();
        let mut seen = vec![false; d];
        for &i in h_indices.iter().chain(&m_indices) {
            if i >= d || seen[i] {
                return Err(Error::Algebra("index sets must be disjoint and within the basis".into()));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Algebra("index sets must cover the basis".into()));
        }
        let restrict = |full: &DMatrix<f64>| -> DMatrix<f64> {
            DMatrix::from_fn(m_indices.len(), m_indices.len(), |r, c| full[(m_indices[r], m_indices[c])])
        };
        let isotropy_generators = h_indices
            .iter()
            .map(|&h| restrict(&algebra.ad(&algebra.basis_vector(h))))
            .collect();
        let m_brackets = m_indices
            .iter()
            .map(|&i| restrict(&algebra.ad(&algebra.basis_vector(i))))
            .collect();
        let dec = ReductiveDecomposition {
            algebra,
            h_indices,
            m_indices,
            isotropy_generators,
            m_brackets,
        };
        let defects = dec.defects();
        if defects.hh_in_h > 1e-12 || defects.hm_in_m > 1e-12 {
            return Err(Error::Algebra(format!("not a reductive decomposition: {defects:?}")));
        }
        Ok(dec)
    }

    pub fn dim_m(&self) -> usize {
        self.m_indices.len()
    }

    pub fn dim_h(&self) -> usize {
        self.h_indices.len()
    }

    pub fn defects(&self) -> DecompositionDefects {
        let alg = &self.algebra;
        let mut hh: f64 = 0.0;
        let mut hm: f64 = 0.0;
        for &a in &self.h_indices {
            let ad = alg.ad(&alg.basis_vector(a));
            for &b in &self.h_indices {
                for &m in &self.m_indices {
                    hh = hh.max(ad[(m, b)].abs());
                }
            }
            for &b in &self.m_indices {
                for &h in &self.h_indices {
                    hm = hm.max(ad[(h, b)].abs());
                }
            }
        }
        let mut orth: f64 = 0.0;
        for &h in &self.h_indices {
            for &m in &self.m_indices {
                orth = orth.max(alg.bi_inner[(h, m)].abs());
            }
        }
        DecompositionDefects {
            hh_in_h: hh,
            hm_in_m: hm,
            orthogonality: orth,
        }
    }

    /// Gram matrix of the 𝔪 basis under the bi-invariant form.
    pub fn m_gram(&self) -> DMatrix<f64> {
        let m = &self.m_indices;
        DMatrix::from_fn(m.len(), m.len(), |r, c| self.algebra.bi_inner[(m[r], m[c])])
    }

    pub fn bi_norm_m(&self, u: &DVector<f64>) -> f64 {
        u.dot(&(self.m_gram() * u)).max(0.0).sqrt()
    }

    pub fn embed_m(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.algebra.dim());
        for (r, &i) in self.m_indices.iter().enumerate() {
            full[i] = u[r];
        }
        full
    }

    pub fn embed_h(&self, h: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.algebra.dim());
        for (r, &i) in self.h_indices.iter().enumerate() {
            full[i] = h[r];
        }
        full
    }

    /// 𝔪 and 𝔥 coordinates of an algebra vector.
    pub fn split(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (
            DVector::from_iterator(self.dim_m(), self.m_indices.iter().map(|&i| x[i])),
            DVector::from_iterator(self.dim_h(), self.h_indices.iter().map(|&i| x[i])),
        )
    }

    fn check_m(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim_m() {
            return Err(Error::DimensionMismatch {
                expected: self.dim_m(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `[x, y]_𝔪` for 𝔪 coordinate vectors.
    pub fn m_bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_m(x)?;
        self.check_m(y)?;
        Ok(self.m_bracket_matrix(x) * y)
    }

    /// Matrix of `v ↦ [x, v]_𝔪` on 𝔪.
    pub fn m_bracket_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let k = self.dim_m();
        let mut out = DMatrix::zeros(k, k);
        for (i, b) in self.m_brackets.iter().enumerate() {
            if x[i] != 0.0 {
                out += b * x[i];
            }
        }
        out
    }

    /// `[x, y]_𝔪` for full algebra vectors that must lie in 𝔪.
    pub fn m_bracket_full(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        let mut parts = Vec::new();
        for v in [x, y] {
            if v.len() != self.algebra.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.algebra.dim(),
                    found: v.len(),
                });
            }
            let (m, h) = self.split(v);
            if h.amax() > 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "vector has an h-component of size {:e}",
                    h.amax()
                )));
            }
            parts.push(m);
        }
        Ok(self.embed_m(&self.m_bracket(&parts[0], &parts[1])?))
    }

    /// `{[h_j, u]}` over the 𝔥 basis, in 𝔪 coordinates.
    pub fn orbit_tangent(&self, u: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
        self.check_m(u)?;
        Ok(self.isotropy_generators.iter().map(|a| a * u).collect())
    }

    /// The same vectors as columns of a matrix.
    pub fn orbit_tangent_matrix(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.dim_m(), self.dim_h());
        for (j, a) in self.isotropy_generators.iter().enumerate() {
            t.set_column(j, &(a * u));
        }
        t
    }

    /// `[h, v]` for `h ∈ 𝔥` and `v ∈ 𝔪` in coordinates.
    pub fn h_action(&self, h: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim_m());
        for (j, a) in self.isotropy_generators.iter().enumerate() {
            if h[j] != 0.0 {
                out += a * v * h[j];
            }
        }
        out
    }

    /// Worst leakage of `ad(𝔥)` out of each listed block of 𝔪 coordinates.
    pub fn block_invariance_defect(&self, blocks: &[Vec<usize>]) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.isotropy_generators {
            for block in blocks {
                for &c in block {
                    for r in 0..self.dim_m() {
                        if !block.contains(&r) {
                            worst = worst.max(a[(r, c)].abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// JSON form of an algebra and its splitting.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraExport {
    pub basis_labels: Vec<String>,
    /// Sparse triples `(i, j, k, c_ij^k)` for `i < j`, one based.
    pub structure_constants: Vec<(usize, usize, usize, f64)>,
    pub bi_inner: Vec<Vec<f64>>,
    pub h_indices: Vec<usize>,
    pub m_indices: Vec<usize>,
}

impl ReductiveDecomposition {
    pub fn export(&self) -> AlgebraExport {
        let alg = &self.algebra;
        let d = alg.dim();
        let mut sc = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in 0..d {
                    let v = alg.c(i, j, k);
                    if v != 0.0 {
                        sc.push((i + 1, j + 1, k + 1, v));
                    }
                }
            }
        }
        AlgebraExport {
            basis_labels: alg.basis_labels.clone(),
            structure_constants: sc,
            bi_inner: crate::norms::matrix_rows(&alg.bi_inner),
            h_indices: self.h_indices.iter().map(|i| i + 1).collect(),
            m_indices: self.m_indices.iter().map(|i| i + 1).collect(),
        }
    }
}

#[cfg(test)]
mod tests;
