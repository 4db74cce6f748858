//! Spray vector and the geodesic orbit conditions on a reductive presentation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ad;
use crate::error::{Error, Result};
use crate::liealg::{PresentationKind, SpherePresentation};
use crate::norms::{make_family, FamilyTag, FiberNorm, MetricFamilySpec, MinkowskiNorm};
use crate::sampling;

pub const PASS_TOL: f64 = 1e-8;
pub const FAIL_TOL: f64 = 1e-4;
/// Relative tolerance on `dF_u([h, u])` for the invariance precondition.
pub const INVARIANCE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SprayVector {
    pub base: DVector<f64>,
    pub value: DVector<f64>,
    /// Worst relative residual of the defining equations.
    pub residual: f64,
}

/// Fibrewise data at `u` shared by the conditions.
struct Frame {
    g: DMatrix<f64>,
    /// `g = L Lᵀ`
    l: DMatrix<f64>,
    f: f64,
    bi: f64,
}

impl Frame {
    fn new<N: FiberNorm>(pres: &SpherePresentation, norm: &N, u: &DVector<f64>) -> Result<Frame> {
        let dm = pres.dim_m();
        if norm.dim() != dm {
            return Err(Error::DimensionMismatch {
                expected: dm,
                found: norm.dim(),
            });
        }
        if u.len() != dm {
            return Err(Error::DimensionMismatch {
                expected: dm,
                found: u.len(),
            });
        }
        let g = norm.fundamental_tensor(u.as_slice())?.matrix;
        let l = g
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotStronglyConvex {
                witness: u.iter().copied().collect(),
                ratio: 0.0,
            })?
            .l();
        Ok(Frame {
            f: norm.eval(u.as_slice())?,
            bi: pres.decomposition.bi_norm_m(u),
            g,
            l,
        })
    }

    /// `|u|_bi F(u)`, the scale of the residuals.
    fn scale(&self) -> f64 {
        self.bi * self.f
    }

    /// Columns of `Lᵀ⁻¹`, a `g_u`-orthonormal basis.
    fn orthonormal_basis(&self) -> DMatrix<f64> {
        let n = self.l.nrows();
        self.l
            .transpose()
            .solve_upper_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor is invertible")
    }
}

/// `rᵢ = ⟨u, [eᵢ, u]_𝔪⟩_u`.
fn spray_rhs(pres: &SpherePresentation, g: &DMatrix<f64>, u: &DVector<f64>) -> DVector<f64> {
    let dec = &pres.decomposition;
    let gu = g * u;
    let dm = dec.dim_m();
    DVector::from_fn(dm, |i, _| {
        let mut e = DVector::zeros(dm);
        e[i] = 1.0;
        gu.dot(&dec.m_bracket(&e, u).expect("dimensions checked"))
    })
}

fn spray_from_frame(pres: &SpherePresentation, frame: &Frame, u: &DVector<f64>) -> SprayVector {
    let r = spray_rhs(pres, &frame.g, u);
    let chol = nalgebra::Cholesky::new(frame.g.clone()).expect("positive definite");
    let eta = chol.solve(&r);
    let defect = (&frame.g * &eta - &r).amax();
    let scale = frame.bi * frame.bi * frame.f;
    SprayVector {
        base: u.clone(),
        value: eta,
        residual: if scale > 0.0 { defect / scale } else { defect },
    }
}

/// `η(u)` from `⟨η(u), v⟩_u = ⟨u, [v, u]_𝔪⟩_u` for all `v ∈ 𝔪`.
pub fn spray_vector<N: FiberNorm>(pres: &SpherePresentation, norm: &N, u: &DVector<f64>) -> Result<SprayVector> {
    let frame = Frame::new(pres, norm, u)?;
    Ok(spray_from_frame(pres, &frame, u))
}

/// Minimum-norm least-squares solution of `A x ≈ b` and its residual norm.
fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    if a.ncols() == 0 {
        return (DVector::zeros(0), b.norm());
    }
    // pseudo-inverse through the eigenvectors of AᵀA
    let eig = (a.transpose() * a).symmetric_eigen();
    let cut = 1e-12 * eig.eigenvalues.amax().max(1e-300);
    let atb = a.transpose() * b;
    let mut x = DVector::zeros(a.ncols());
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cut {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(&atb) / lam);
        }
    }
    let res = (a * &x - b).norm();
    (x, res)
}

fn condition3_from_frame(pres: &SpherePresentation, frame: &Frame, u: &DVector<f64>) -> (DVector<f64>, f64) {
    let dec = &pres.decomposition;
    let w = frame.orthonormal_basis();
    let gu = &frame.g * u;
    let mu = dec.m_bracket_matrix(u);
    let dm = dec.dim_m();
    let dh = dec.dim_h();
    // ⟨u, [u + u', v]_𝔪⟩_u = ⟨u, [u, v]_𝔪⟩_u + Σ u'_j ⟨u, [h_j, v]⟩_u
    let b = DVector::from_fn(dm, |a, _| gu.dot(&(&mu * w.column(a))));
    let amat = DMatrix::from_fn(dm, dh, |a, j| gu.dot(&(&dec.isotropy_generators[j] * w.column(a))));
    let (x, _) = lstsq(&amat, &(-&b));
    let res = (&amat * &x + &b).norm();
    (x, res / frame.scale())
}

/// Compensator `u' ∈ 𝔥` minimising `Σ_v ⟨u, [u+u', v]_𝔪⟩_u²` over a `g_u`-orthonormal basis.
///
/// The residual is normalised by `|u|_bi F(u)`.
pub fn condition3_compensator<N: FiberNorm>(
    pres: &SpherePresentation,
    norm: &N,
    u: &DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    let frame = Frame::new(pres, norm, u)?;
    Ok(condition3_from_frame(pres, &frame, u))
}

fn condition4_from_frame(pres: &SpherePresentation, frame: &Frame, u: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    let t = pres.decomposition.orbit_tangent_matrix(u);
    let lt = frame.l.transpose();
    let (_, res) = lstsq(&(&lt * t), &(&lt * eta));
    res / frame.scale()
}

/// `g_u`-distance from `η(u)` to `[𝔥, u]`, normalised by `|u|_bi F(u)`.
pub fn condition4_residual<N: FiberNorm>(pres: &SpherePresentation, norm: &N, u: &DVector<f64>) -> Result<f64> {
    let frame = Frame::new(pres, norm, u)?;
    let eta = spray_from_frame(pres, &frame, u).value;
    Ok(condition4_from_frame(pres, &frame, u, &eta))
}

/// `|⟨u,[u',v]⟩_u - ⟨[u,u'],v⟩_u + 2 C_u(u, v, [u',u])|` for `u' ∈ 𝔥`, `u, v ∈ 𝔪`.
pub fn cartan_bracket_identity_check<N: FiberNorm>(
    pres: &SpherePresentation,
    norm: &N,
    u: &DVector<f64>,
    u_prime: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let dec = &pres.decomposition;
    if u_prime.len() != dec.dim_h() {
        return Err(Error::DimensionMismatch {
            expected: dec.dim_h(),
            found: u_prime.len(),
        });
    }
    let tensor = norm.fundamental_tensor(u.as_slice())?;
    let up_v = dec.h_action(u_prime, v);
    let up_u = dec.h_action(u_prime, u);
    let lhs = tensor.inner(u, &up_v);
    let u_up = -&up_u;
    let c = norm.cartan(u.as_slice(), u.as_slice(), v.as_slice(), up_u.as_slice())?;
    let rhs = tensor.inner(&u_up, v) - 2.0 * c;
    Ok((lhs - rhs).abs())
}

/// Worst `|dF_u([h_j, u])| / (|∇F(u)| |[h_j, u]|)` over the given generators.
pub fn invariance_defect<N: FiberNorm>(norm: &N, generators: &[DMatrix<f64>], u: &DVector<f64>) -> Result<f64> {
    let n = u.len();
    let mut grad = vec![0.0; n];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        *g = ad::directional(|z| norm.eval_dual(z), u.as_slice(), &e).1;
    }
    let gnorm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for a in generators {
        let xi = a * u;
        let xn = xi.norm();
        if xn < 1e-14 * u.norm() {
            continue;
        }
        let d: f64 = grad.iter().zip(xi.iter()).map(|(p, q)| p * q).sum();
        worst = worst.max(d.abs() / (gnorm * xn));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn from_residual(r: f64, tol: f64) -> Verdict {
        if r < tol {
            Verdict::Pass
        } else if r > FAIL_TOL.max(tol) {
            Verdict::Fail
        } else {
            Verdict::Inconclusive
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoCertificate {
    pub index: usize,
    pub stratum: Stratum,
    pub u: Vec<f64>,
    pub u_prime: Vec<f64>,
    pub residual3: f64,
    pub residual4: f64,
    pub spray_residual: f64,
    pub tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Slice,
    BlockPure,
    BlockMixed,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for GoConfig {
    fn default() -> Self {
        GoConfig {
            samples: 256,
            tol: PASS_TOL,
            seed: sampling::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoReport {
    pub presentation: String,
    pub verdict: Verdict,
    pub condition3_verdict: Verdict,
    pub max_residual3: f64,
    pub max_residual4: f64,
    pub max_spray_residual: f64,
    /// Number of samples whose condition (3) and (4) verdicts differ at `tol`.
    pub disagreements: usize,
    pub witness: Option<GoCertificate>,
    pub config: GoConfig,
    pub certificates: Vec<GoCertificate>,
}

fn random_in(dm: usize, coords: &[usize], rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let mut v = DVector::zeros(dm);
        let g = sampling::gaussian_vector(coords.len(), rng);
        for (k, &i) in coords.iter().enumerate() {
            v[i] = g[k];
        }
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

/// Stratified sample net: slice vectors, block-pure, two-block mixtures and full random.
pub fn go_samples(pres: &SpherePresentation, count: usize, seed: u64) -> Vec<(Stratum, DVector<f64>)> {
    let dm = pres.dim_m();
    let mut rng = sampling::rng(seed);
    let blocks = &pres.m_blocks;
    let quarter = count / 4;
    let mixed = if blocks.len() > 1 { quarter } else { 0 };
    let all: Vec<usize> = (0..dm).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count - 2 * quarter - mixed {
        out.push((Stratum::Slice, random_in(dm, &pres.slice, &mut rng)));
    }
    for k in 0..quarter {
        let b = &blocks[k % blocks.len()];
        out.push((Stratum::BlockPure, random_in(dm, b, &mut rng)));
    }
    for k in 0..mixed {
        let i = k % blocks.len();
        let j = (i + 1 + (k / blocks.len()) % (blocks.len() - 1)) % blocks.len();
        let coords: Vec<usize> = blocks[i].iter().chain(&blocks[j]).copied().collect();
        out.push((Stratum::BlockMixed, random_in(dm, &coords, &mut rng)));
    }
    for _ in 0..quarter {
        out.push((Stratum::Random, random_in(dm, &all, &mut rng)));
    }
    out
}

/// Verdict from conditions (3) and (4) on a stratified net.
///
/// The norm must be Ad(H)-invariant; this is checked on every sample.
pub fn go_verdict<N: FiberNorm>(pres: &SpherePresentation, norm: &N, config: GoConfig) -> Result<GoReport> {
    if config.samples == 0 {
        return Err(Error::InvalidInput("sample_count must be at least 1".into()));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let gens = &pres.decomposition.isotropy_generators;
    let mut certs = Vec::with_capacity(config.samples);
    for (index, (stratum, u)) in go_samples(pres, config.samples, config.seed).into_iter().enumerate() {
        let defect = invariance_defect(norm, gens, &u)?;
        if defect > INVARIANCE_TOL {
            return Err(Error::NotInvariant {
                witness: u.iter().copied().collect(),
                defect,
            });
        }
        let frame = Frame::new(pres, norm, &u)?;
        let spray = spray_from_frame(pres, &frame, &u);
        let (u_prime, residual3) = condition3_from_frame(pres, &frame, &u);
        let residual4 = condition4_from_frame(pres, &frame, &u, &spray.value);
        certs.push(GoCertificate {
            index,
            stratum,
            u: u.iter().copied().collect(),
            u_prime: u_prime.iter().copied().collect(),
            residual3,
            residual4,
            spray_residual: spray.residual,
            tol: config.tol,
            seed: config.seed,
        });
    }
    let max_by = |f: fn(&GoCertificate) -> f64| certs.iter().map(f).fold(0.0_f64, f64::max);
    let max_residual3 = max_by(|c| c.residual3);
    let max_residual4 = max_by(|c| c.residual4);
    let max_spray_residual = max_by(|c| c.spray_residual);
    let disagreements = certs
        .iter()
        .filter(|c| (c.residual3 < config.tol) != (c.residual4 < config.tol))
        .count();
    let witness = certs
        .iter()
        .max_by(|a, b| a.residual4.total_cmp(&b.residual4))
        .cloned();
    Ok(GoReport {
        presentation: pres.name(),
        verdict: Verdict::from_residual(max_residual4, config.tol),
        condition3_verdict: Verdict::from_residual(max_residual3, config.tol),
        max_residual3,
        max_residual4,
        max_spray_residual,
        disagreements,
        witness,
        config,
        certificates: certs,
    })
}

/// Expected verdict for a given invariant norm.
///
/// `Sp(n)/Sp(n-1)` norms are expected to be geodesic orbit exactly when they
/// are also invariant under the `Sp(n)Sp(1)` isotropy.
pub fn expected_verdict<N: FiberNorm>(pres: &SpherePresentation, norm: &N, seed: u64) -> Result<bool> {
    if pres.expected_go_verdict {
        return Ok(true);
    }
    let extra = pres.extra_symmetry_generators()?;
    for (_, u) in go_samples(pres, 64, seed) {
        if invariance_defect(norm, &extra, &u)? > INVARIANCE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

fn pos(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// Family spec for a random Ad(H)-invariant norm on the presentation.
pub fn random_invariant_spec(pres: &SpherePresentation, rng: &mut ChaCha8Rng) -> MetricFamilySpec {
    let dm = pres.dim_m();
    let template = rng.gen_range(0..3);
    let d = pos(rng, -0.4, 0.4);
    let e = pos(rng, 0.0, 0.5);
    let (a, b, c) = (pos(rng, 0.5, 2.0), pos(rng, 0.5, 2.0), pos(rng, 0.5, 2.0));
    let (a, b, c, d, e) = (fmt(a), fmt(b), fmt(c), fmt(d), fmt(e));
    match pres.kind {
        PresentationKind::So => {
            let g = pres.decomposition.m_gram() * pos(rng, 0.5, 2.0);
            MetricFamilySpec::riemannian(&g)
        }
        PresentationKind::U | PresentationKind::Su => {
            let q = format!("({a}*s1^2+{b}*s2)");
            let f = match template {
                0 => format!("sqrt{q}+{d}*s1*sqrt({a})"),
                1 => format!("sqrt({q}+{e}*s1^2*s2/{q})+{d}*s1"),
                _ => format!("({q}^2+{e}*s1^4)^0.25+{d}*s1"),
            };
            MetricFamilySpec::blocks(FamilyTag::Alpha12Beta, &[1, dm - 1], &f)
        }
        PresentationKind::SpU1 => {
            let q = format!("({a}*s1^2+{b}*s2+{c}*s3)");
            let f = match template {
                0 => format!("sqrt{q}+{d}*s1*sqrt({a})"),
                1 => format!("sqrt({q}+{e}*s2*s3/{q})+{d}*s1"),
                _ => format!("({q}^2+{e}*s2^2+{e}*s1^2*s3)^0.25+{d}*s1"),
            };
            MetricFamilySpec::blocks(FamilyTag::Alpha12Beta, &[1, 2, dm - 3], &f)
        }
        PresentationKind::SpSp1 => {
            let q = format!("({a}*s1+{b}*s2)");
            let f = match template {
                0 => format!("sqrt{q}"),
                1 => format!("sqrt({q}+{e}*s1*s2/{q})"),
                _ => format!("({q}^2+{e}*s1^2)^0.25"),
            };
            MetricFamilySpec::blocks(FamilyTag::Alpha12, &[3, dm - 3], &f)
        }
        PresentationKind::Sp => {
            let rest: Vec<String> = (4..=dm).map(|i| format!("y{i}^2")).collect();
            let q = format!("({a}*y1^2+{b}*y2^2+{c}*y3^2+{e}*y1*y2+{}*({}))", fmt(pos(rng, 0.5, 2.0)), rest.join("+"));
            let f = match template {
                0 => format!("sqrt{q}+{d}*y1*0.5"),
                1 => format!("sqrt({q}+{e}*y2^2*({})/{q})", rest.join("+")),
                _ => format!("({q}^2+{e}*y3^4)^0.25+{d}*y2*0.5"),
            };
            MetricFamilySpec::custom(dm, &f)
        }
    }
}

/// A random strongly convex Ad(H)-invariant norm, redrawn until convex.
pub fn random_invariant_norm(pres: &SpherePresentation, seed: u64) -> Result<MinkowskiNorm> {
    let mut rng = sampling::rng(seed);
    let mut last = None;
    for _ in 0..100 {
        match make_family(&random_invariant_spec(pres, &mut rng)) {
            Ok(n) => return Ok(n),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Normal (bi-invariant restriction) Riemannian norm on 𝔪.
pub fn normal_norm(pres: &SpherePresentation) -> Result<MinkowskiNorm> {
    MinkowskiNorm::riemannian(pres.decomposition.m_gram())
}

/// `Sp(n)/Sp(n-1)` norm with three distinct weights on the `Im H` block:
/// Ad(Sp(n-1))-invariant, not Ad(Sp(n-1)Sp(1))-invariant.
pub fn sp_generic_norm(pres: &SpherePresentation) -> Result<MinkowskiNorm> {
    let dm = pres.dim_m();
    let mut a = DMatrix::identity(dm, dm);
    a[(1, 1)] = 1.5;
    a[(2, 2)] = 2.2;
    MinkowskiNorm::riemannian(a)
}
