//! Reductive presentations `G/H` of the homogeneous spheres.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;

use super::quat::{QuatMatrix, Quaternion};
use super::{AlgebraExport, BlockElement, LieAlgebra, Realization, ReductiveDecomposition};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PresentationKind {
    /// `SO(n)/SO(n-1)`
    So,
    /// `SU(n)/SU(n-1)`
    Su,
    /// `U(n)/U(n-1)`
    U,
    /// `Sp(n)/Sp(n-1)`
    Sp,
    /// `Sp(n)U(1)/Sp(n-1)U(1)`
    SpU1,
    /// `Sp(n)Sp(1)/Sp(n-1)Sp(1)`
    SpSp1,
}

impl PresentationKind {
    pub const ALL: [PresentationKind; 6] = [
        PresentationKind::So,
        PresentationKind::Su,
        PresentationKind::U,
        PresentationKind::Sp,
        PresentationKind::SpU1,
        PresentationKind::SpSp1,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            PresentationKind::So => "so",
            PresentationKind::Su => "su",
            PresentationKind::U => "u",
            PresentationKind::Sp => "sp",
            PresentationKind::SpU1 => "sp_u1",
            PresentationKind::SpSp1 => "sp_sp1",
        }
    }

    pub fn min_n(self) -> usize {
        match self {
            PresentationKind::So | PresentationKind::Su => 3,
            _ => 2,
        }
    }

    pub fn sphere_dim(self, n: usize) -> usize {
        match self {
            PresentationKind::So => n - 1,
            PresentationKind::Su | PresentationKind::U => 2 * n - 1,
            _ => 4 * n - 1,
        }
    }

    pub fn coset_name(self, n: usize) -> String {
        let m = n - 1;
        match self {
            PresentationKind::So => format!("SO({n})/SO({m})"),
            PresentationKind::Su => format!("SU({n})/SU({m})"),
            PresentationKind::U => format!("U({n})/U({m})"),
            PresentationKind::Sp => format!("Sp({n})/Sp({m})"),
            PresentationKind::SpU1 => format!("Sp({n})U(1)/Sp({m})U(1)"),
            PresentationKind::SpSp1 => format!("Sp({n})Sp(1)/Sp({m})Sp(1)"),
        }
    }
}

impl fmt::Display for PresentationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for PresentationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase()
            .replace('-', "_");
        match key.as_str() {
            "so" => Ok(PresentationKind::So),
            "su" => Ok(PresentationKind::Su),
            "u" => Ok(PresentationKind::U),
            "sp" => Ok(PresentationKind::Sp),
            "sp_u1" | "spu1" => Ok(PresentationKind::SpU1),
            "sp_sp1" | "spsp1" => Ok(PresentationKind::SpSp1),
            "g2" | "g2/su3" | "g2/su(3)" | "spin7" | "spin7/g2" | "spin(7)/g2" | "spin9" | "spin9/spin7"
            | "spin(9)/spin(7)" => Err(Error::OutOfScope(format!(
                "presentation {s} needs spin-representation machinery that is not implemented"
            ))),
            _ => Err(Error::InvalidInput(format!(
                "unknown presentation {s:?}; expected one of so, su, u, sp, sp_u1, sp_sp1"
            ))),
        }
    }
}

/// A homogeneous sphere `G/H` with its reductive decomposition.
#[derive(Debug, Clone)]
pub struct SpherePresentation {
    pub kind: PresentationKind,
    pub n: usize,
    pub decomposition: ReductiveDecomposition,
    /// Ad(H)-invariant splitting of 𝔪, as 𝔪 coordinate indices.
    pub m_blocks: Vec<Vec<usize>>,
    /// Verdict for a generic invariant norm.
    pub expected_go_verdict: bool,
    /// 𝔪 coordinates spanning a slice that meets every Ad(H)-orbit.
    pub slice: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PresentationExport {
    pub schema: u32,
    pub name: String,
    pub kind: PresentationKind,
    pub n: usize,
    pub sphere_dim: usize,
    pub m_blocks: Vec<Vec<usize>>,
    pub slice: Vec<usize>,
    pub expected_go_verdict: bool,
    pub bi_inner_scaling: &'static str,
    pub algebra: AlgebraExport,
}

impl SpherePresentation {
    pub fn name(&self) -> String {
        self.kind.coset_name(self.n)
    }

    pub fn sphere_dim(&self) -> usize {
        self.kind.sphere_dim(self.n)
    }

    pub fn dim_m(&self) -> usize {
        self.decomposition.dim_m()
    }

    pub fn export(&self) -> PresentationExport {
        let one = |v: &Vec<usize>| v.iter().map(|i| i + 1).collect::<Vec<_>>();
        PresentationExport {
            schema: 1,
            name: self.name(),
            kind: self.kind,
            n: self.n,
            sphere_dim: self.sphere_dim(),
            m_blocks: self.m_blocks.iter().map(one).collect(),
            slice: one(&self.slice),
            expected_go_verdict: self.expected_go_verdict,
            bi_inner_scaling: "Re tr_H(X* Y) summed over blocks; extra central or Sp(1) factors use the same form",
            algebra: self.decomposition.export(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.export()).expect("presentation serialises")
    }

    /// Isotropy generators acting on 𝔪 that would enlarge the symmetry group.
    ///
    /// For `Sp(n)/Sp(n-1)` these are the isotropy generators of
    /// `Sp(n)Sp(1)/Sp(n-1)Sp(1)`, whose 𝔪 uses the same coordinates. A norm
    /// invariant under them is expected to be geodesic orbit.
    pub fn extra_symmetry_generators(&self) -> Result<Vec<DMatrix<f64>>> {
        if self.kind != PresentationKind::Sp {
            return Ok(Vec::new());
        }
        let big = build_presentation(PresentationKind::SpSp1, self.n)?;
        Ok(big.decomposition.isotropy_generators)
    }
}

const IMAG: [(Quaternion, &str); 3] = [(Quaternion::I, "i"), (Quaternion::J, "j"), (Quaternion::K, "k")];

struct Builder {
    n: usize,
    extra: Option<usize>,
    m: Vec<(String, BlockElement)>,
    h: Vec<(String, BlockElement)>,
}

impl Builder {
    fn new(n: usize, extra: Option<usize>) -> Self {
        Builder {
            n,
            extra,
            m: Vec::new(),
            h: Vec::new(),
        }
    }

    fn element(&self, main: QuatMatrix, extra: Option<Quaternion>) -> BlockElement {
        let mut blocks = vec![main];
        if let Some(k) = self.extra {
            let mut e = QuatMatrix::zeros(k);
            if let Some(q) = extra {
                e.set(0, 0, q);
            }
            blocks.push(e);
        }
        BlockElement(blocks)
    }

    /// `q (E_ab + E_ba)`, or `q E_aa` on the diagonal; zero based.
    fn sym(&self, a: usize, b: usize, q: Quaternion) -> QuatMatrix {
        let mut m = QuatMatrix::unit(self.n, a, b, q);
        if a != b {
            m.set(b, a, q);
        }
        m
    }

    /// `E_ab - E_ba`; zero based.
    fn skew(&self, a: usize, b: usize) -> QuatMatrix {
        let mut m = QuatMatrix::unit(self.n, a, b, Quaternion::ONE);
        m.set(b, a, -Quaternion::ONE);
        m
    }

    fn push_m(&mut self, label: String, main: QuatMatrix, extra: Option<Quaternion>) {
        let e = self.element(main, extra);
        self.m.push((label, e));
    }

    fn push_h(&mut self, label: String, main: QuatMatrix, extra: Option<Quaternion>) {
        let e = self.element(main, extra);
        self.h.push((label, e));
    }

    /// First row and column: the `k`-th column entry in `imag` units.
    fn first_column(&mut self, units: &[(Quaternion, &str)]) {
        for k in 1..self.n {
            let (r, c) = (1, k + 1);
            self.push_m(format!("E{r}{c}-E{c}{r}"), self.skew(0, k), None);
            for &(q, name) in units {
                self.push_m(format!("{name}(E{r}{c}+E{c}{r})"), self.sym(0, k, q), None);
            }
        }
    }

    /// Lower-right block spanned by `so`, `u` or `sp` generators.
    fn lower_block(&mut self, units: &[(Quaternion, &str)], diagonal: bool) {
        let n = self.n;
        if diagonal {
            for a in 1..n {
                for &(q, name) in units {
                    self.push_h(format!("{name}E{0}{0}", a + 1), self.sym(a, a, q), None);
                }
            }
        }
        for a in 1..n {
            for b in (a + 1)..n {
                let (r, c) = (a + 1, b + 1);
                self.push_h(format!("E{r}{c}-E{c}{r}"), self.skew(a, b), None);
                for &(q, name) in units {
                    self.push_h(format!("{name}(E{r}{c}+E{c}{r})"), self.sym(a, b, q), None);
                }
            }
        }
    }

    fn finish(self) -> MatrixBasis {
        let dim_m = self.m.len();
        let (labels, elements) = self.m.into_iter().chain(self.h).unzip();
        MatrixBasis {
            labels,
            elements,
            dim_m,
        }
    }
}

/// Matrix basis of 𝔤: the 𝔪 elements first, then the 𝔥 elements.
#[derive(Debug, Clone)]
pub struct MatrixBasis {
    pub labels: Vec<String>,
    pub elements: Vec<BlockElement>,
    pub dim_m: usize,
}

/// `Sp(n)U(1)/Sp(n-1)U(1)` with the standard 𝔪 basis.
pub fn build_sp_u1(n: usize) -> Result<SpherePresentation> {
    build_presentation(PresentationKind::SpU1, n)
}

pub fn build_presentation(kind: PresentationKind, n: usize) -> Result<SpherePresentation> {
    build_presentation_with(kind, n, Realization::Complex)
}

/// Build with a chosen matrix realisation for the commutators.
pub fn build_presentation_with(kind: PresentationKind, n: usize, realization: Realization) -> Result<SpherePresentation> {
    let (basis, m_blocks, slice) = matrix_basis(kind, n)?;
    let d = basis.elements.len();
    let dm = basis.dim_m;
    let alg = LieAlgebra::from_blocks(basis.labels, &basis.elements, realization)?;
    let decomposition = ReductiveDecomposition::new(alg, (dm..d).collect(), (0..dm).collect())?;
    let pres = SpherePresentation {
        kind,
        n,
        decomposition,
        m_blocks,
        expected_go_verdict: kind != PresentationKind::Sp,
        slice,
    };
    if pres.dim_m() != pres.sphere_dim() {
        return Err(Error::Algebra(format!(
            "dim m = {} but the sphere has dimension {}",
            pres.dim_m(),
            pres.sphere_dim()
        )));
    }
    let leak = pres.decomposition.block_invariance_defect(&pres.m_blocks);
    if leak > 1e-12 {
        return Err(Error::Algebra(format!("m-blocks are not ad(h)-invariant (leak {leak:e})")));
    }
    Ok(pres)
}

/// Basis matrices, Ad(H)-invariant blocks of 𝔪 and the orbit slice.
#[allow(clippy::type_complexity)]
pub fn matrix_basis(kind: PresentationKind, n: usize) -> Result<(MatrixBasis, Vec<Vec<usize>>, Vec<usize>)> {
    if n < kind.min_n() {
        return Err(Error::InvalidInput(format!(
            "{} needs n >= {}, got {n}",
            kind.slug(),
            kind.min_n()
        )));
    }
    let i_only = &IMAG[..1];
    let rest = |from: usize, to: usize| (from..to).collect::<Vec<_>>();
    let (basis, m_blocks, slice) = match kind {
        PresentationKind::So => {
            let mut b = Builder::new(n, None);
            b.first_column(&[]);
            b.lower_block(&[], false);
            (b.finish(), vec![rest(0, n - 1)], vec![0])
        }
        PresentationKind::U | PresentationKind::Su => {
            let mut b = Builder::new(n, None);
            if kind == PresentationKind::U {
                b.push_m("iE11".into(), b.sym(0, 0, Quaternion::I), None);
            } else {
                let mut e = QuatMatrix::zeros(n);
                let s = 1.0 / ((n * (n - 1)) as f64).sqrt();
                e.set(0, 0, Quaternion::I.scale((n - 1) as f64 * s));
                for a in 1..n {
                    e.set(a, a, Quaternion::I.scale(-s));
                }
                b.push_m(format!("i diag({}, -1, ..)/sqrt({})", n - 1, n * (n - 1)), e, None);
            }
            b.first_column(i_only);
            if kind == PresentationKind::U {
                b.lower_block(i_only, true);
            } else {
                b.lower_block(i_only, false);
                for a in 1..(n - 1) {
                    let m = b.sym(a, a, Quaternion::I).minus(&b.sym(a + 1, a + 1, Quaternion::I));
                    b.push_h(format!("i(E{0}{0}-E{1}{1})", a + 1, a + 2), m, None);
                }
            }
            let dm = 2 * n - 1;
            (b.finish(), vec![vec![0], rest(1, dm)], vec![0, 1])
        }
        PresentationKind::Sp => {
            let mut b = Builder::new(n, None);
            for &(q, name) in &IMAG {
                b.push_m(format!("{name}E11"), b.sym(0, 0, q), None);
            }
            b.first_column(&IMAG);
            b.lower_block(&IMAG, true);
            let dm = 4 * n - 1;
            (b.finish(), vec![rest(0, 3), rest(3, dm)], vec![0, 1, 2, 3])
        }
        PresentationKind::SpU1 => {
            let mut b = Builder::new(n, Some(1));
            b.push_m("(iE11,-v0)".into(), b.sym(0, 0, Quaternion::I), Some(-Quaternion::I));
            b.push_m("jE11".into(), b.sym(0, 0, Quaternion::J), None);
            b.push_m("kE11".into(), b.sym(0, 0, Quaternion::K), None);
            b.first_column(&IMAG);
            b.lower_block(&IMAG, true);
            b.push_h("(iE11,v0)".into(), b.sym(0, 0, Quaternion::I), Some(Quaternion::I));
            let dm = 4 * n - 1;
            (b.finish(), vec![vec![0], vec![1, 2], rest(3, dm)], vec![0, 1, 3])
        }
        PresentationKind::SpSp1 => {
            let mut b = Builder::new(n, Some(1));
            for &(q, name) in &IMAG {
                b.push_m(format!("({name}E11,-{name})"), b.sym(0, 0, q), Some(-q));
            }
            b.first_column(&IMAG);
            b.lower_block(&IMAG, true);
            for &(q, name) in &IMAG {
                b.push_h(format!("({name}E11,{name})"), b.sym(0, 0, q), Some(q));
            }
            let dm = 4 * n - 1;
            (b.finish(), vec![rest(0, 3), rest(3, dm)], vec![0, 3])
        }
    };
    Ok((basis, m_blocks, slice))
}
