//! Minkowski norms, metric families and their fibrewise tensors.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::ad::{self, Scalar};
use crate::error::{Error, Result};
use crate::expr::{parse_with, Expr, VarSet};
use crate::fd;
use crate::sampling;

/// Vectors shorter than this are treated as the zero vector.
pub const MIN_NORM: f64 = 1e-12;
/// Strong convexity threshold on the eigenvalue ratio of the fundamental tensor.
pub const CONVEXITY_RATIO: f64 = 1e-9;
/// Relative tolerance for the homogeneity check.
pub const HOMOGENEITY_TOL: f64 = 1e-10;
/// Relative asymmetry below which a norm is called reversible.
pub const REVERSIBILITY_TOL: f64 = 1e-9;

/// Fundamental tensor `g_y = ½ [F²]_yy` at a base vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor {
    pub base: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

impl FundamentalTensor {
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.matrix * b))
    }

    pub fn norm_of(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }
}

pub(crate) fn check_vector(y: &[f64], dim: usize) -> Result<()> {
    if y.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite component in {y:?}")));
    }
    Ok(())
}

pub(crate) fn check_slit(y: &[f64]) -> Result<f64> {
    let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n < MIN_NORM {
        return Err(Error::DegenerateVector { norm: n });
    }
    Ok(n)
}

/// A function on a vector space that can be evaluated on any [`Scalar`].
///
/// Everything fibrewise (fundamental tensor, Cartan tensor, navigation) is
/// derived from [`FiberNorm::eval_dual`].
pub trait FiberNorm {
    fn dim(&self) -> usize;

    fn eval_dual<D: Scalar>(&self, y: &[D]) -> D;

    /// `F(y)`; zero maps to zero.
    fn eval(&self, y: &[f64]) -> Result<f64> {
        check_vector(y, self.dim())?;
        if y.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        Ok(self.eval_dual(y))
    }

    fn fundamental_tensor(&self, y: &[f64]) -> Result<FundamentalTensor> {
        check_vector(y, self.dim())?;
        check_slit(y)?;
        let (_, _, h) = ad::hessian(
            |z| {
                let f = self.eval_dual(z);
                f * f
            },
            y,
        );
        let matrix = h * 0.5;
        check_positive_definite(&matrix, y)?;
        Ok(FundamentalTensor {
            base: DVector::from_column_slice(y),
            matrix,
        })
    }

    /// `g_y(a, b)` without assembling the whole matrix.
    fn inner_at(&self, y: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
        check_vector(y, self.dim())?;
        check_slit(y)?;
        Ok(0.5
            * ad::second_directional(
                |z| {
                    let f = self.eval_dual(z);
                    f * f
                },
                y,
                a,
                b,
            ))
    }

    /// Cartan tensor `C_y(u, v, w) = ¼ D³[F²](y)[u, v, w]`.
    fn cartan(&self, y: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        let dim = self.dim();
        for z in [y, u, v, w] {
            check_vector(z, dim)?;
        }
        check_slit(y)?;
        self.fundamental_tensor(y)?;
        Ok(0.25
            * ad::third_directional(
                |z| {
                    let f = self.eval_dual(z);
                    f * f
                },
                y,
                u,
                v,
                w,
            ))
    }
}

pub(crate) fn check_positive_definite(m: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    let ratio = eigen_ratio(m);
    if !(ratio >= CONVEXITY_RATIO) {
        return Err(Error::NotStronglyConvex {
            witness: y.to_vec(),
            ratio,
        });
    }
    Ok(())
}

/// `λ_min / λ_max` of a symmetric matrix (negative when indefinite).
pub fn eigen_ratio(m: &DMatrix<f64>) -> f64 {
    if m.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max <= 0.0 {
        return -1.0;
    }
    min / max
}

/// Plain finite-difference versions of the fibre tensors.
pub mod finite_difference {
    use super::*;

    /// `½ [F²]_yy` with step `1e-5 |y|`.
    pub fn fundamental_tensor<N: FiberNorm>(norm: &N, y: &[f64]) -> Result<DMatrix<f64>> {
        check_vector(y, norm.dim())?;
        let h = 1e-5 * check_slit(y)?;
        let f2 = |z: &[f64]| {
            let f: f64 = norm.eval_dual(z);
            f * f
        };
        Ok(fd::hessian(f2, y, h) * 0.5)
    }

    /// Richardson-extrapolated `¼ D³[F²]` with base step `5e-4 |y|`.
    pub fn cartan<N: FiberNorm>(norm: &N, y: &[f64], u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        check_vector(y, norm.dim())?;
        let h = 5e-4 * check_slit(y)?;
        cartan_with_step(norm, y, u, v, w, h)
    }

    pub fn cartan_with_step<N: FiberNorm>(
        norm: &N,
        y: &[f64],
        u: &[f64],
        v: &[f64],
        w: &[f64],
        h: f64,
    ) -> Result<f64> {
        let f2 = |z: &[f64]| {
            let f: f64 = norm.eval_dual(z);
            f * f
        };
        Ok(0.25 * fd::mixed_third_richardson(f2, y, u, v, w, h))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Riemannian,
    Randers,
    AlphaBeta,
    Alpha12,
    Alpha12Beta,
    Custom,
}

/// Serialisable description of a metric family.
///
/// * `riemannian`: `F = √(yᵀAy)`.
/// * `randers`: `F = √(yᵀAy) + b·y`.
/// * `alpha_beta`: `F = α φ(β/α)`, `f_expr` is `φ(s1)`.
/// * `alpha12`: `F = f(α₁², α₂², ...)` over the coordinate blocks, `f_expr` in `s1, s2, ...`.
/// * `alpha12_beta`: first block is one-dimensional and carries `β`;
///   `F = f(β, α₁², α₂²)` with `f_expr` in `s1, s2, s3`.
/// * `custom`: `f_expr` is `F` itself in `y1..yn`.
///
/// The block forms `αᵢ²` use the diagonal blocks of `alpha_matrix`
/// (identity when omitted), which must be block diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFamilySpec {
    pub family: FamilyTag,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_covector: Option<Vec<f64>>,
}

impl MetricFamilySpec {
    pub fn riemannian(a: &DMatrix<f64>) -> Self {
        MetricFamilySpec {
            family: FamilyTag::Riemannian,
            dim: a.nrows(),
            blocks: vec![],
            f_expr: None,
            alpha_matrix: Some(matrix_rows(a)),
            beta_covector: None,
        }
    }

    pub fn randers(a: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        MetricFamilySpec {
            family: FamilyTag::Randers,
            beta_covector: Some(b.iter().copied().collect()),
            ..Self::riemannian(a)
        }
    }

    pub fn blocks(family: FamilyTag, blocks: &[usize], f_expr: &str) -> Self {
        MetricFamilySpec {
            family,
            dim: blocks.iter().sum(),
            blocks: blocks.to_vec(),
            f_expr: Some(f_expr.to_string()),
            alpha_matrix: None,
            beta_covector: None,
        }
    }

    pub fn custom(dim: usize, f_expr: &str) -> Self {
        MetricFamilySpec {
            family: FamilyTag::Custom,
            dim,
            blocks: vec![],
            f_expr: Some(f_expr.to_string()),
            alpha_matrix: None,
            beta_covector: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub(crate) fn matrix_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

#[derive(Debug, Clone)]
enum Family {
    Riemannian {
        a: DMatrix<f64>,
    },
    Randers {
        a: DMatrix<f64>,
        b: DVector<f64>,
    },
    AlphaBeta {
        a: DMatrix<f64>,
        b: DVector<f64>,
        phi: Expr,
    },
    Blocks {
        a: DMatrix<f64>,
        ranges: Vec<Range<usize>>,
        beta: Option<DVector<f64>>,
        f: Expr,
    },
    Custom {
        f: Expr,
    },
}

/// A Minkowski norm on `ℝⁿ` drawn from one of the metric families.
#[derive(Debug, Clone)]
pub struct MinkowskiNorm {
    dim: usize,
    tag: FamilyTag,
    family: Family,
    pub reversible_hint: Option<bool>,
    spec: MetricFamilySpec,
}

fn quadratic<D: Scalar>(a: &DMatrix<f64>, y: &[D], range: Range<usize>) -> D {
    let mut acc = D::zero();
    for i in range.clone() {
        let mut row = D::zero();
        for j in range.clone() {
            let c = a[(i, j)];
            if c != 0.0 {
                row += y[j] * c;
            }
        }
        acc += y[i] * row;
    }
    acc
}

fn linear<D: Scalar>(b: &DVector<f64>, y: &[D]) -> D {
    y.iter()
        .zip(b.iter())
        .filter(|(_, &c)| c != 0.0)
        .fold(D::zero(), |acc, (&yi, &c)| acc + yi * c)
}

impl FiberNorm for MinkowskiNorm {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_dual<D: Scalar>(&self, y: &[D]) -> D {
        let n = self.dim;
        match &self.family {
            Family::Riemannian { a } => quadratic(a, y, 0..n).sqrt(),
            Family::Randers { a, b } => quadratic(a, y, 0..n).sqrt() + linear(b, y),
            Family::AlphaBeta { a, b, phi } => {
                let alpha = quadratic(a, y, 0..n).sqrt();
                let s = linear(b, y) / alpha;
                alpha * phi.eval_args(&[s])
            }
            Family::Blocks { a, ranges, beta, f } => {
                let mut args = Vec::with_capacity(ranges.len());
                let quad_ranges = match beta {
                    Some(b) => {
                        args.push(linear(b, y));
                        &ranges[1..]
                    }
                    None => &ranges[..],
                };
                for r in quad_ranges {
                    args.push(quadratic(a, y, r.clone()));
                }
                f.eval_args(&args)
            }
            Family::Custom { f } => f.eval(&|v| y[v.index - 1]),
        }
    }
}

impl MinkowskiNorm {
    pub fn tag(&self) -> FamilyTag {
        self.tag
    }

    pub fn spec(&self) -> &MetricFamilySpec {
        &self.spec
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::riemannian(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn riemannian(a: DMatrix<f64>) -> Result<Self> {
        make_family(&MetricFamilySpec::riemannian(&a))
    }

    pub fn randers(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        make_family(&MetricFamilySpec::randers(&a, &b))
    }

    /// Base quadratic form, when the family has one.
    pub fn alpha_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.family {
            Family::Riemannian { a }
            | Family::Randers { a, .. }
            | Family::AlphaBeta { a, .. }
            | Family::Blocks { a, .. } => Some(a),
            Family::Custom { .. } => None,
        }
    }
}

fn spd_matrix(rows: Option<&Vec<Vec<f64>>>, dim: usize) -> Result<DMatrix<f64>> {
    let a = match rows {
        None => return Ok(DMatrix::identity(dim, dim)),
        Some(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::InvalidInput(format!("alpha_matrix must be {dim}x{dim}")));
            }
            DMatrix::from_fn(dim, dim, |i, j| rows[i][j])
        }
    };
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite alpha_matrix entry".into()));
    }
    if (&a - a.transpose()).amax() > 1e-12 * a.amax().max(1.0) {
        return Err(Error::InvalidInput("alpha_matrix is not symmetric".into()));
    }
    let r = eigen_ratio(&a);
    if !(r > CONVEXITY_RATIO) {
        return Err(Error::InvalidInput(format!(
            "alpha_matrix is not positive definite (eigenvalue ratio {r:e})"
        )));
    }
    Ok(a)
}

fn covector(b: Option<&Vec<f64>>, dim: usize) -> Result<Option<DVector<f64>>> {
    match b {
        None => Ok(None),
        Some(b) if b.len() == dim && b.iter().all(|v| v.is_finite()) => {
            Ok(Some(DVector::from_column_slice(b)))
        }
        Some(b) => Err(Error::InvalidInput(format!(
            "beta_covector must have {dim} finite entries, found {}",
            b.len()
        ))),
    }
}

/// `|b|_α = √(bᵀA⁻¹b)`.
fn dual_length(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let ainv_b = a.clone().cholesky().expect("SPD").solve(b);
    b.dot(&ainv_b).max(0.0).sqrt()
}

fn expr_for(spec: &MetricFamilySpec, vars: VarSet) -> Result<Expr> {
    let text = spec
        .f_expr
        .as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("{:?} family needs f_expr", spec.family)))?;
    Ok(parse_with(text, &vars)?)
}

/// Build a norm from a family spec and verify the Minkowski axioms on a sample net.
pub fn make_family(spec: &MetricFamilySpec) -> Result<MinkowskiNorm> {
    let dim = spec.dim;
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let a = spd_matrix(spec.alpha_matrix.as_ref(), dim)?;
    let b = covector(spec.beta_covector.as_ref(), dim)?;
    let mut extremal = Vec::new();
    let (family, reversible_hint) = match spec.family {
        FamilyTag::Riemannian => (Family::Riemannian { a }, Some(true)),
        FamilyTag::Randers | FamilyTag::AlphaBeta => {
            let b = b.unwrap_or_else(|| DVector::zeros(dim));
            let len = dual_length(&a, &b);
            if spec.family == FamilyTag::Randers && len >= 1.0 {
                return Err(Error::NotStronglyConvex {
                    witness: (-(a.clone().cholesky().expect("SPD").solve(&b))).iter().copied().collect(),
                    ratio: 1.0 - len,
                });
            }
            if len > 0.0 {
                let dir = a.clone().cholesky().expect("SPD").solve(&b);
                let dir = &dir / dir.norm();
                extremal.push(dir.clone());
                extremal.push(-dir);
            }
            let zero_beta = b.iter().all(|&v| v == 0.0);
            if spec.family == FamilyTag::Randers {
                (Family::Randers { a, b }, Some(zero_beta))
            } else {
                let phi = expr_for(spec, VarSet::family_args(1))?;
                (Family::AlphaBeta { a, b, phi }, if zero_beta { Some(true) } else { None })
            }
        }
        FamilyTag::Alpha12 | FamilyTag::Alpha12Beta => {
            if spec.blocks.is_empty() || spec.blocks.iter().sum::<usize>() != dim {
                return Err(Error::InvalidInput(format!(
                    "blocks {:?} must sum to dim {dim}",
                    spec.blocks
                )));
            }
            let mut ranges = Vec::new();
            let mut start = 0;
            for &d in &spec.blocks {
                ranges.push(start..start + d);
                start += d;
            }
            for (ri, r) in ranges.iter().enumerate() {
                for (rj, s) in ranges.iter().enumerate() {
                    if ri != rj && r.clone().any(|i| s.clone().any(|j| a[(i, j)] != 0.0)) {
                        return Err(Error::InvalidInput(
                            "alpha_matrix must be block diagonal for the declared blocks".into(),
                        ));
                    }
                }
            }
            let beta = if spec.family == FamilyTag::Alpha12Beta {
                if spec.blocks[0] != 1 || !(2..=3).contains(&spec.blocks.len()) {
                    return Err(Error::InvalidInput(
                        "alpha12_beta needs a one-dimensional first block and 2 or 3 blocks".into(),
                    ));
                }
                let b = b.unwrap_or_else(|| {
                    let mut e = DVector::zeros(dim);
                    e[0] = a[(0, 0)].sqrt();
                    e
                });
                if b.iter().skip(1).any(|&v| v != 0.0) {
                    return Err(Error::InvalidInput(
                        "beta_covector must vanish on the blocks after the first".into(),
                    ));
                }
                let mut e = DVector::zeros(dim);
                e[0] = 1.0;
                extremal.push(e.clone());
                extremal.push(-e);
                Some(b)
            } else {
                None
            };
            let f = expr_for(spec, VarSet::family_args(spec.blocks.len()))?;
            let hint = if beta.is_none() { Some(true) } else { None };
            (Family::Blocks { a, ranges, beta, f }, hint)
        }
        FamilyTag::Custom => (
            Family::Custom {
                f: expr_for(spec, VarSet::tangent(dim))?,
            },
            None,
        ),
    };
    let norm = MinkowskiNorm {
        dim,
        tag: spec.family,
        family,
        reversible_hint,
        spec: spec.clone(),
    };
    let mut net = sampling::direction_net(dim, 64, sampling::DEFAULT_SEED);
    net.extend(extremal);
    check_minkowski_axioms(&norm, &net)?;
    Ok(norm)
}

/// Summary of a sample-based axiom check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub min_eigen_ratio: f64,
    pub max_homogeneity_defect: f64,
}

/// Positivity, positive homogeneity and strong convexity on every net direction.
pub fn check_minkowski_axioms<N: FiberNorm>(norm: &N, net: &[DVector<f64>]) -> Result<AxiomReport> {
    let mut min_ratio = f64::INFINITY;
    let mut max_defect: f64 = 0.0;
    for y in net {
        let ys = y.as_slice();
        let f = norm.eval(ys)?;
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::NotPositive {
                witness: ys.to_vec(),
                value: f,
            });
        }
        for lambda in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = ys.iter().map(|v| v * lambda).collect();
            let defect = (norm.eval(&scaled)? / (lambda * f) - 1.0).abs();
            max_defect = max_defect.max(defect);
            if !(defect <= HOMOGENEITY_TOL) {
                return Err(Error::NotHomogeneous {
                    witness: ys.to_vec(),
                    lambda,
                    defect,
                });
            }
        }
        let g = norm.fundamental_tensor(ys)?;
        min_ratio = min_ratio.min(eigen_ratio(&g.matrix));
    }
    Ok(AxiomReport {
        samples: net.len(),
        min_eigen_ratio: min_ratio,
        max_homogeneity_defect: max_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub reversible: bool,
    pub max_asymmetry: f64,
    pub samples: usize,
}

/// Sampled `max |F(y) - F(-y)| / F(y)`.
pub fn check_reversible<N: FiberNorm>(norm: &N, sample_count: usize, seed: u64) -> Result<ReversibilityReport> {
    if sample_count == 0 {
        return Err(Error::InvalidInput("sample_count must be at least 1".into()));
    }
    let net = sampling::direction_net(norm.dim(), sample_count, seed);
    let mut worst: f64 = 0.0;
    for y in &net {
        let f = norm.eval(y.as_slice())?;
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let g = norm.eval(&neg)?;
        worst = worst.max((f - g).abs() / f);
    }
    Ok(ReversibilityReport {
        reversible: worst < REVERSIBILITY_TOL,
        max_asymmetry: worst,
        samples: net.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn randers_half() -> MinkowskiNorm {
        MinkowskiNorm::randers(DMatrix::identity(2, 2), DVector::from_vec(vec![0.5, 0.0])).unwrap()
    }

    #[test]
    fn euclidean_value() {
        assert_eq!(MinkowskiNorm::euclidean(2).eval(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(MinkowskiNorm::euclidean(2).eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn randers_value() {
        assert!((randers_half().eval(&[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_input_rejected() {
        assert!(matches!(
            MinkowskiNorm::euclidean(2).eval(&[f64::NAN, 1.0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn riemannian_tensor_is_the_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let n = MinkowskiNorm::riemannian(a.clone()).unwrap();
        let g = n.fundamental_tensor(&[0.4, -1.1]).unwrap();
        assert!((g.matrix - a).amax() < 1e-13);
    }

    #[test]
    fn randers_tensor_matches_closed_form() {
        // g = (F/α)(I - α_y α_yᵀ) + (α_y + b)(α_y + b)ᵀ at y = (1, 0): diag(2.25, 1.5)
        let g = randers_half().fundamental_tensor(&[1.0, 0.0]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.25, 0.0, 0.0, 1.5]);
        assert!((g.matrix - expected).amax() < 1e-14);
    }

    #[test]
    fn tensor_rejects_zero_vector() {
        assert!(matches!(
            randers_half().fundamental_tensor(&[0.0, 1e-13]),
            Err(Error::DegenerateVector { .. })
        ));
    }

    #[test]
    fn randers_with_long_beta_rejected() {
        let r = MinkowskiNorm::randers(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(r, Err(Error::NotStronglyConvex { .. })));
        let r = MinkowskiNorm::randers(DMatrix::identity(2, 2), DVector::from_vec(vec![0.9, 0.9]));
        assert!(matches!(r, Err(Error::NotStronglyConvex { .. })));
    }

    #[test]
    fn alpha_beta_with_long_beta_fails_axiom_check() {
        let spec = MetricFamilySpec {
            family: FamilyTag::AlphaBeta,
            dim: 2,
            blocks: vec![],
            f_expr: Some("1+s1".into()),
            alpha_matrix: None,
            beta_covector: Some(vec![1.2, 0.0]),
        };
        assert!(make_family(&spec).is_err());
    }

    #[test]
    fn degenerate_family_member_is_euclidean() {
        let n = make_family(&MetricFamilySpec::blocks(
            FamilyTag::Alpha12Beta,
            &[1, 2, 4],
            "sqrt(s1^2+s2+s3)",
        ))
        .unwrap();
        let y = [0.3, -0.2, 0.5, 1.0, 0.1, -0.7, 0.2];
        let e: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n.eval(&y).unwrap() - e).abs() < 1e-15);
    }

    #[test]
    fn randers_family_spec_matches_direct() {
        let spec = MetricFamilySpec {
            family: FamilyTag::AlphaBeta,
            dim: 2,
            blocks: vec![],
            f_expr: Some("1+s1".into()),
            alpha_matrix: None,
            beta_covector: Some(vec![0.5, 0.0]),
        };
        let n = make_family(&spec).unwrap();
        assert!((n.eval(&[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn beta_perturbed_family_matches_formula() {
        let n = make_family(&MetricFamilySpec::blocks(
            FamilyTag::Alpha12Beta,
            &[1, 2, 4],
            "sqrt(s1^2+s2+s3) + 0.1*s1",
        ))
        .unwrap();
        let mut g = sampling::rng(3);
        for _ in 0..20 {
            let y = sampling::gaussian_vector(7, &mut g);
            let direct = y.norm() + 0.1 * y[0];
            assert!((n.eval(y.as_slice()).unwrap() - direct).abs() < 1e-14 * direct);
        }
    }

    #[test]
    fn blocks_validated() {
        let bad = MetricFamilySpec::blocks(FamilyTag::Alpha12Beta, &[2, 2, 3], "sqrt(s1^2+s2+s3)");
        assert!(make_family(&bad).is_err());
        let mut wrong_dim = MetricFamilySpec::blocks(FamilyTag::Alpha12, &[3, 4], "sqrt(s1+s2)");
        wrong_dim.dim = 8;
        assert!(make_family(&wrong_dim).is_err());
    }

    #[test]
    fn non_homogeneous_rejected() {
        let spec = MetricFamilySpec::blocks(FamilyTag::Alpha12, &[1, 1], "s1+s2");
        assert!(matches!(make_family(&spec), Err(Error::NotHomogeneous { .. })));
    }

    #[test]
    fn reversibility() {
        let e = check_reversible(&MinkowskiNorm::euclidean(3), 50, 1).unwrap();
        assert!(e.reversible && e.max_asymmetry == 0.0);
        let r = check_reversible(&randers_half(), 50, 1).unwrap();
        assert!(!r.reversible);
        // worst direction is -e1: |0.5 - 1.5| / 0.5
        assert!((r.max_asymmetry - 2.0).abs() < 1e-12);
        let a12 = make_family(&MetricFamilySpec::blocks(
            FamilyTag::Alpha12,
            &[3, 4],
            "sqrt(s1 + 2*s2 + 0.3*s1*s2/(s1+s2))",
        ))
        .unwrap();
        assert!(check_reversible(&a12, 50, 1).unwrap().reversible);
    }

    #[test]
    fn cartan_vanishes_for_riemannian() {
        let n = MinkowskiNorm::riemannian(DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
        let c = n.cartan(&[0.3, 1.0], &[1.0, 0.0], &[0.2, 0.7], &[-1.0, 0.5]).unwrap();
        assert!(c.abs() < 1e-13);
    }

    #[test]
    fn cartan_flagpole_slot_vanishes() {
        let n = randers_half();
        let y = [0.6, -0.8];
        let c = n.cartan(&y, &y, &[0.2, 0.7], &[-1.0, 0.5]).unwrap();
        assert!(c.abs() < 1e-12);
    }

    #[test]
    fn cartan_agrees_with_richardson_differences() {
        let n = randers_half();
        let e2 = [0.0, 1.0];
        let ad = n.cartan(&[1.0, 0.0], &e2, &e2, &e2).unwrap();
        assert!(ad.abs() < 1e-14);
        let y = [1.0, 1.0];
        let dirs = [[0.3, -1.0], [1.0, 0.2], [0.0, 1.0]];
        let exact = n.cartan(&y, &dirs[0], &dirs[1], &dirs[2]).unwrap();
        let coarse = finite_difference::cartan_with_step(&n, &y, &dirs[0], &dirs[1], &dirs[2], 1e-3).unwrap();
        let fine = finite_difference::cartan(&n, &y, &dirs[0], &dirs[1], &dirs[2]).unwrap();
        assert!((coarse - fine).abs() < 1e-4);
        assert!((exact - fine).abs() < 1e-4);
    }

    #[test]
    fn tensor_agrees_with_finite_differences() {
        let n = randers_half();
        let y = [0.4, -0.9];
        let g = n.fundamental_tensor(&y).unwrap();
        let g_fd = finite_difference::fundamental_tensor(&n, &y).unwrap();
        assert!((g.matrix - g_fd).amax() < 1e-5);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = MetricFamilySpec::blocks(FamilyTag::Alpha12Beta, &[1, 2, 4], "sqrt(s1^2+s2+s3)");
        let back = MetricFamilySpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
        let text = r#"{"family":"randers","dim":2,"alpha_matrix":[[1,0],[0,1]],"beta_covector":[0.5,0]}"#;
        let n = make_family(&MetricFamilySpec::from_json(text).unwrap()).unwrap();
        assert!((n.eval(&[1.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
    }
}
