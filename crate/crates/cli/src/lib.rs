//! Command-line front end for the `gosphere` workbench.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde_json::{json, Value};

use gosphere::curvature::{self, flag_net, DistanceOptions};
use gosphere::gocheck::{self, GoConfig, Verdict};
use gosphere::liealg::{build_presentation, PresentationKind, SpherePresentation};
use gosphere::navigation::{
    self, parse_field, ExprMetric, NavigatedMetric, RandersNavMetric, RoundMetric, SphereMetric, VectorField,
};
use gosphere::norms::{self, FiberNorm, MetricFamilySpec, MinkowskiNorm};
use gosphere::{sampling, Error};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "gosphere",
    version,
    about = "Geodesic-orbit checks, Zermelo navigation and flag curvature on homogeneous Finsler spheres",
    after_help = "Norm expressions use a smooth grammar: numbers, variables, + - * / ^, \
                  sqrt, exp, log. abs, min and max are rejected.\n\
                  Exit codes: 0 all checks pass, 1 a verdict is FAIL, 2 usage or configuration error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Minkowski norm axioms and reversibility of a norm.
    NormCheck(NormCheckArgs),
    /// Build a sphere presentation and report its algebraic defects.
    AlgebraBuild(AlgebraArgs),
    /// Geodesic-orbit verdict for one presentation and norm.
    GoCheck(GoArgs),
    /// Verdict table over presentations and invariant norms.
    Classify(ClassifyArgs),
    /// Navigation of a sphere metric by a vector field.
    Navigate(NavArgs),
    /// Flag curvature on a seeded flag net.
    Flag(FlagArgs),
    /// Tune the wind scale so the prime closed geodesic has a target length.
    TuneEpsilon(TuneArgs),
    /// Directed distances between seeded points.
    Distances(DistanceArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long, default_value_t = sampling::DEFAULT_SEED)]
    pub seed: u64,
    /// Write the JSON report to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct NormSource {
    /// Metric family spec as JSON.
    #[arg(long, visible_alias = "norm")]
    pub norm_file: Option<PathBuf>,
    /// Custom norm expression in y1..yn.
    #[arg(long, conflicts_with = "norm_file")]
    pub f_expr: Option<String>,
}

#[derive(Debug, Args)]
pub struct NormCheckArgs {
    #[command(flatten)]
    pub source: NormSource,
    /// Dimension for --f-expr.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct AlgebraArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GoArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub source: NormSource,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = gocheck::PASS_TOL)]
    pub tol: f64,
    /// Include every per-sample certificate in the JSON report.
    #[arg(long)]
    pub certificates: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Presentation slug; all presentations when omitted.
    #[arg(long)]
    pub space: Option<String>,
    /// Raised to the smallest admissible value per presentation.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[command(flatten)]
    pub source: NormSource,
    /// Random invariant norms per presentation.
    #[arg(long, default_value_t = 3)]
    pub norms: usize,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[arg(long, default_value_t = gocheck::PASS_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct MetricArgs {
    /// Sphere dimension n of Sⁿ.
    #[arg(long, default_value_t = 2)]
    pub sphere: usize,
    /// `hopf`, `rotation`, or `;`-separated components in x1..x(n+1).
    #[arg(long, default_value = "rotation")]
    pub field: String,
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    /// Base metric: `round` or an expression in x1..x(n+1), y1..y(n+1).
    #[arg(long, default_value = "round")]
    pub h: String,
}

#[derive(Debug, Args)]
pub struct NavArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FlagArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long, default_value_t = 3)]
    pub sphere: usize,
    #[arg(long, default_value = "hopf")]
    pub field: String,
    /// Planted wind: the base metric is the round metric navigated by `-ε V`.
    #[arg(long, default_value_t = 0.3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 2.0 * PI)]
    pub target_lambda: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Number of seeded points.
    #[arg(long, default_value_t = 3)]
    pub samples: usize,
    /// Directions in the shooting net on S².
    #[arg(long, default_value_t = 720)]
    pub net: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub report: Option<Value>,
}

fn usage(msg: impl std::fmt::Display) -> Outcome {
    Outcome { code: 2, stdout: format!("error: {msg}\n"), report: None }
}

/// Parses argv (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return Outcome { code, stdout: e.to_string(), report: None };
        }
    };
    let (result, json_path) = match &cli.command {
        Command::NormCheck(a) => (norm_check(a), a.common.json.clone()),
        Command::AlgebraBuild(a) => (algebra_build(a), a.common.json.clone()),
        Command::GoCheck(a) => (go_check(a), a.common.json.clone()),
        Command::Classify(a) => (classify(a), a.common.json.clone()),
        Command::Navigate(a) => (navigate(a), a.common.json.clone()),
        Command::Flag(a) => (flag(a), a.common.json.clone()),
        Command::TuneEpsilon(a) => (tune(a), a.common.json.clone()),
        Command::Distances(a) => (distances(a), a.common.json.clone()),
    };
    let (pass, stdout, report) = match result {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    if let Some(path) = json_path {
        let text = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
        if let Err(e) = std::fs::write(&path, text) {
            return usage(format!("cannot write {}: {e}", path.display()));
        }
    }
    Outcome { code: if pass { 0 } else { 1 }, stdout, report: Some(report) }
}

type CmdResult = Result<(bool, String, Value), Error>;

fn envelope(command: &str, seed: u64, verdict: bool, body: Value) -> Value {
    let mut v = json!({
        "schema": SCHEMA,
        "command": command,
        "seed": seed,
        "verdict": if verdict { "PASS" } else { "FAIL" },
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serialisable")
}

fn load_spec(source: &NormSource, dim: Option<usize>) -> Result<Option<MetricFamilySpec>, Error> {
    if let Some(path) = &source.norm_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        return Ok(Some(MetricFamilySpec::from_json(&text)?));
    }
    if let Some(f) = &source.f_expr {
        let dim = dim.ok_or_else(|| Error::InvalidInput("--f-expr needs a dimension (--n)".into()))?;
        return Ok(Some(MetricFamilySpec::custom(dim, f)));
    }
    Ok(None)
}

/// Axiom failures are verdicts; everything else is a usage error.
fn is_axiom_failure(e: &Error) -> bool {
    matches!(e, Error::NotStronglyConvex { .. } | Error::NotPositive { .. } | Error::NotHomogeneous { .. })
}

fn norm_check(a: &NormCheckArgs) -> CmdResult {
    let spec = load_spec(&a.source, a.n)?
        .ok_or_else(|| Error::InvalidInput("norm-check needs --norm-file or --f-expr".into()))?;
    let seed = a.common.seed;
    let body = |pass: bool, extra: Value| envelope("norm-check", seed, pass, json!({ "spec": spec, "result": extra }));
    let norm = match norms::make_family(&spec) {
        Ok(n) => n,
        Err(e) if is_axiom_failure(&e) => {
            let out = format!("norm-check: FAIL ({e})\n");
            return Ok((false, out, body(false, json!({ "error": e.to_string() }))));
        }
        Err(e) => return Err(e),
    };
    let net = sampling::direction_net(norm.dim(), a.samples, seed);
    match norms::check_minkowski_axioms(&norm, &net) {
        Ok(axioms) => {
            let rev = norms::check_reversible(&norm, a.samples.max(1), seed)?;
            let out = format!(
                "norm-check: PASS\n  family {:?}, dim {}\n  samples {}, min eigen ratio {:.3e}, homogeneity defect {:.3e}\n  reversible {} (max asymmetry {:.3e})\n",
                norm.tag(),
                norm.dim(),
                axioms.samples,
                axioms.min_eigen_ratio,
                axioms.max_homogeneity_defect,
                rev.reversible,
                rev.max_asymmetry
            );
            Ok((true, out, body(true, json!({ "axioms": axioms, "reversibility": rev }))))
        }
        Err(e) if is_axiom_failure(&e) => {
            let out = format!("norm-check: FAIL ({e})\n");
            Ok((false, out, body(false, json!({ "error": e.to_string() }))))
        }
        Err(e) => Err(e),
    }
}

fn presentation(space: &str, n: usize) -> Result<SpherePresentation, Error> {
    let kind: PresentationKind = space.parse()?;
    build_presentation(kind, n)
}

fn algebra_build(a: &AlgebraArgs) -> CmdResult {
    let pres = presentation(&a.space, a.n)?;
    let alg = &pres.decomposition.algebra;
    let dd = pres.decomposition.defects();
    let defects = json!({
        "antisymmetry": alg.antisymmetry_defect(),
        "jacobi": alg.jacobi_defect(),
        "bi_invariance": alg.bi_invariance_defect(),
        "hh_in_h": dd.hh_in_h,
        "hm_in_m": dd.hm_in_m,
        "orthogonality": dd.orthogonality,
        "block_invariance": pres.decomposition.block_invariance_defect(&pres.m_blocks),
    });
    let worst = defects.as_object().unwrap().values().filter_map(Value::as_f64).fold(0.0, f64::max);
    let pass = worst < 1e-10;
    let out = format!(
        "algebra-build: {}\n  {}: dim g = {}, dim m = {}, sphere S^{}\n  max defect {:.3e}\n",
        if pass { "PASS" } else { "FAIL" },
        pres.name(),
        alg.dim(),
        pres.dim_m(),
        pres.sphere_dim(),
        worst
    );
    let body = json!({ "presentation": to_value(&pres.export()), "defects": defects });
    Ok((pass, out, envelope("algebra-build", a.common.seed, pass, body)))
}

fn norm_for(pres: &SpherePresentation, source: &NormSource, seed: u64) -> Result<(MinkowskiNorm, Value), Error> {
    match load_spec(source, Some(pres.dim_m()))? {
        Some(spec) => Ok((norms::make_family(&spec)?, to_value(&spec))),
        None => {
            let norm = gocheck::random_invariant_norm(pres, seed)?;
            let spec = to_value(norm.spec());
            Ok((norm, spec))
        }
    }
}

fn summary_line(r: &gocheck::GoReport) -> String {
    format!(
        "{} (residual3 {:.3e}, residual4 {:.3e}, disagreements {})",
        r.verdict, r.max_residual3, r.max_residual4, r.disagreements
    )
}

fn report_value(r: &gocheck::GoReport, certificates: bool) -> Value {
    let mut v = to_value(r);
    if !certificates {
        v.as_object_mut().unwrap().remove("certificates");
    }
    v
}

fn go_check(a: &GoArgs) -> CmdResult {
    let pres = presentation(&a.space, a.n)?;
    let seed = a.common.seed;
    let (norm, spec) = norm_for(&pres, &a.source, seed)?;
    let config = GoConfig { samples: a.samples, tol: a.tol, seed };
    let report = gocheck::go_verdict(&pres, &norm, config)?;
    let pass = report.verdict == Verdict::Pass;
    let out = format!("go-check {}: {}\n", pres.name(), summary_line(&report));
    let body = json!({ "norm": spec, "report": report_value(&report, a.certificates) });
    Ok((pass, out, envelope("go-check", seed, pass, body)))
}

fn classify(a: &ClassifyArgs) -> CmdResult {
    let kinds: Vec<PresentationKind> = match &a.space {
        Some(s) => vec![s.parse()?],
        None => {
            if a.source.norm_file.is_some() || a.source.f_expr.is_some() {
                return Err(Error::InvalidInput("a norm can only be given together with --space".into()));
            }
            PresentationKind::ALL.to_vec()
        }
    };
    let seed = a.common.seed;
    let mut rows = Vec::new();
    let mut out = String::from("classify:\n");
    let mut all_pass = true;
    for kind in kinds {
        let pres = build_presentation(kind, a.n.max(kind.min_n()))?;
        let mut norms_here: Vec<(String, MinkowskiNorm, Value)> = Vec::new();
        if a.source.norm_file.is_some() || a.source.f_expr.is_some() {
            let (n, s) = norm_for(&pres, &a.source, seed)?;
            norms_here.push(("given".into(), n, s));
        } else {
            if kind == PresentationKind::Sp {
                let normal = gocheck::normal_norm(&pres)?;
                norms_here.push(("normal".into(), normal.clone(), to_value(normal.spec())));
                let generic = gocheck::sp_generic_norm(&pres)?;
                norms_here.push(("generic".into(), generic.clone(), to_value(generic.spec())));
            }
            for k in 0..a.norms {
                let s = seed.wrapping_add(k as u64);
                let n = gocheck::random_invariant_norm(&pres, s)?;
                let spec = to_value(n.spec());
                norms_here.push((format!("random-{k}"), n, spec));
            }
        }
        for (label, norm, spec) in norms_here {
            let config = GoConfig { samples: a.samples, tol: a.tol, seed };
            let report = gocheck::go_verdict(&pres, &norm, config)?;
            let expected = gocheck::expected_verdict(&pres, &norm, seed)?;
            let expected_v = if expected { Verdict::Pass } else { Verdict::Fail };
            let matches = report.verdict == expected_v;
            all_pass &= report.verdict == Verdict::Pass && matches;
            let _ = writeln!(
                out,
                "  {:<24} {:<10} {}  expected {}{}",
                pres.name(),
                label,
                summary_line(&report),
                expected_v,
                if matches { "" } else { "  MISMATCH" }
            );
            rows.push(json!({
                "presentation": pres.name(),
                "space": kind.slug(),
                "n": pres.n,
                "norm_label": label,
                "norm": spec,
                "verdict": report.verdict,
                "expected": expected_v,
                "matches_expected": matches,
                "max_residual3": report.max_residual3,
                "max_residual4": report.max_residual4,
                "disagreements": report.disagreements,
                "witness": report.witness,
            }));
        }
    }
    let body = json!({ "samples": a.samples, "tol": a.tol, "rows": rows });
    Ok((all_pass, out, envelope("classify", seed, all_pass, body)))
}

/// Base metric of the navigation commands.
enum Base {
    Round(RoundMetric),
    Expr(ExprMetric),
}

impl SphereMetric for Base {
    fn ambient_dim(&self) -> usize {
        match self {
            Base::Round(m) => m.ambient_dim(),
            Base::Expr(m) => m.ambient_dim(),
        }
    }

    fn eval_ambient<D: gosphere::ad::Scalar>(&self, p: &[D], v: &[D]) -> D {
        match self {
            Base::Round(m) => m.eval_ambient(p, v),
            Base::Expr(m) => m.eval_ambient(p, v),
        }
    }
}

fn base_and_field(m: &MetricArgs) -> Result<(Base, VectorField), Error> {
    if m.sphere < 1 {
        return Err(Error::InvalidInput("sphere dimension must be at least 1".into()));
    }
    let d = m.sphere + 1;
    let base = if m.h.trim() == "round" {
        Base::Round(RoundMetric { ambient: d })
    } else {
        Base::Expr(ExprMetric::parse(d, &m.h)?)
    };
    let field = parse_field(m.sphere, &m.field)?;
    Ok((base, field))
}

fn navigate(a: &NavArgs) -> CmdResult {
    let (base, field) = base_and_field(&a.metric)?;
    let eps = a.metric.epsilon;
    let seed = a.common.seed;
    let d = base.ambient_dim();
    let nav = NavigatedMetric::new(&base, field.clone(), eps, seed)?;
    let killing = navigation::killing_defect(&base, &field, 32, seed);
    let back = NavigatedMetric::new(&nav, field.scaled(-1.0), eps, seed)?;
    let closed = RandersNavMetric { field: field.clone(), epsilon: eps };
    let mut rng = sampling::rng(seed);
    let mut closed_form: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for _ in 0..a.samples {
        let p = sampling::unit_vector(d, &mut rng);
        let g = sampling::gaussian_vector(d, &mut rng);
        let v = &g - &p * p.dot(&g);
        let f = nav.eval_f64(&p, &v);
        if matches!(base, Base::Round(_)) {
            closed_form = closed_form.max((closed.eval_f64(&p, &v) / f - 1.0).abs());
        }
        round_trip = round_trip.max((back.eval_f64(&p, &v) / base.eval_f64(&p, &v) - 1.0).abs());
    }
    let is_round = matches!(base, Base::Round(_));
    let pass = round_trip < 1e-10 && (!is_round || closed_form < 1e-9);
    let wind = nav.max_wind_length(256, seed);
    let mut out = format!(
        "navigate: {}\n  max F(-εV) {:.6}, Killing defect {:.3e}\n  round trip rel. defect {:.3e}\n",
        if pass { "PASS" } else { "FAIL" },
        wind,
        killing,
        round_trip
    );
    if is_round {
        let _ = writeln!(out, "  closed-form Randers rel. defect {closed_form:.3e}");
    }
    let body = json!({
        "sphere": a.metric.sphere,
        "field": a.metric.field,
        "epsilon": eps,
        "h": a.metric.h,
        "samples": a.samples,
        "max_wind_length": wind,
        "killing_defect": killing,
        "round_trip_defect": round_trip,
        "closed_form_defect": if is_round { json!(closed_form) } else { Value::Null },
    });
    Ok((pass, out, envelope("navigate", seed, pass, body)))
}

fn flag(a: &FlagArgs) -> CmdResult {
    let (base, field) = base_and_field(&a.metric)?;
    let seed = a.common.seed;
    let flags = flag_net(base.ambient_dim(), a.samples, seed);
    let samples = curvature::curvature_preservation(&base, &field, a.metric.epsilon, &flags)?;
    let max_diff = samples.iter().map(|s| (s.k - s.k_navigated).abs()).fold(0.0, f64::max);
    let max_dev = samples.iter().map(|s| (s.k_navigated - 1.0).abs()).fold(0.0, f64::max);
    let pass = max_diff < a.tol;
    let out = format!(
        "flag: {}\n  {} flags, max |K - K~| {:.3e}, max |K~ - 1| {:.3e}\n",
        if pass { "PASS" } else { "FAIL" },
        samples.len(),
        max_diff,
        max_dev
    );
    let net: Vec<Value> = flags
        .iter()
        .zip(&samples)
        .map(|(f, s)| json!({ "flag": f, "point": s.point, "k": s.k, "k_navigated": s.k_navigated }))
        .collect();
    let body = json!({
        "sphere": a.metric.sphere,
        "field": a.metric.field,
        "epsilon": a.metric.epsilon,
        "h": a.metric.h,
        "tol": a.tol,
        "max_preservation_defect": max_diff,
        "max_deviation_from_one": max_dev,
        "flags": net,
    });
    Ok((pass, out, envelope("flag", seed, pass, body)))
}

fn tune(a: &TuneArgs) -> CmdResult {
    let d = a.sphere + 1;
    let field = parse_field(a.sphere, &a.field)?;
    let seed = a.common.seed;
    let base = NavigatedMetric::new(RoundMetric { ambient: d }, field.scaled(-1.0), a.epsilon, seed)?;
    let mut start = DVector::zeros(d);
    start[0] = 1.0;
    let rep = curvature::tune_epsilon(&base, &field, &start, a.target_lambda)?;
    let pass = (rep.lambda - a.target_lambda).abs() < 1e-5;
    let out = format!(
        "tune-epsilon: {}\n  planted {}, recovered ε' = {:.9}, λ(ε') = {:.9} (target {}), λ_-(0) = {:.9}\n",
        if pass { "PASS" } else { "FAIL" },
        a.epsilon,
        rep.epsilon,
        rep.lambda,
        a.target_lambda,
        rep.lambda_zero
    );
    let body = json!({
        "sphere": a.sphere,
        "field": a.field,
        "planted_epsilon": a.epsilon,
        "tuning": rep,
        "start": start,
    });
    Ok((pass, out, envelope("tune-epsilon", seed, pass, body)))
}

fn distances(a: &DistanceArgs) -> CmdResult {
    let (base, field) = base_and_field(&a.metric)?;
    let eps = a.metric.epsilon;
    if matches!(base, Base::Round(_)) {
        if !(eps >= 0.0 && eps * field_max_length(&field, a.common.seed) < 1.0) {
            return Err(Error::NavigationDomain { value: eps * field_max_length(&field, a.common.seed) });
        }
        distances_for(a, &RandersNavMetric { field, epsilon: eps })
    } else {
        distances_for(a, &NavigatedMetric::new(&base, field, eps, a.common.seed)?)
    }
}

fn field_max_length(field: &VectorField, seed: u64) -> f64 {
    let mut rng = sampling::rng(seed);
    (0..256)
        .map(|_| field.eval_f64(&sampling::unit_vector(field.ambient_dim(), &mut rng)).norm())
        .fold(0.0, f64::max)
}

fn distances_for<M: SphereMetric>(a: &DistanceArgs, metric: &M) -> CmdResult {
    let seed = a.common.seed;
    let d = metric.ambient_dim();
    let opts = DistanceOptions { net: a.net, seed, ..DistanceOptions::default() };
    let mut rng = sampling::rng(seed);
    let pts: Vec<DVector<f64>> = (0..a.samples.max(2)).map(|_| sampling::unit_vector(d, &mut rng)).collect();
    let k = pts.len();
    let mut dist = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                dist[i][j] = curvature::distance(metric, &pts[i], &pts[j], &opts)?.distance;
            }
        }
    }
    let mut asymmetry: f64 = 0.0;
    let mut triangle: f64 = f64::NEG_INFINITY;
    for i in 0..k {
        for j in 0..k {
            asymmetry = asymmetry.max((dist[i][j] - dist[j][i]).abs());
            for l in 0..k {
                if i != j && j != l && i != l {
                    triangle = triangle.max(dist[i][l] - dist[i][j] - dist[j][l]);
                }
            }
        }
    }
    let kim = curvature::kim_min_check(metric, 20, seed)?;
    let pass = (k < 3 || triangle <= 3e-3) && (!kim.reversible || asymmetry < 2e-3) && kim.consistent;
    let mut out = format!(
        "distances: {}\n  {} points, max asymmetry {:.3e}, reversible {}\n",
        if pass { "PASS" } else { "FAIL" },
        k,
        asymmetry,
        kim.reversible
    );
    if k >= 3 {
        let _ = writeln!(out, "  max triangle excess {triangle:.3e}");
    }
    let _ = writeln!(
        out,
        "  max |K - 1| {:.3e}, Cartan norm {:.3e}",
        kim.curvature_deviation, kim.cartan_norm
    );
    let body = json!({
        "sphere": a.metric.sphere,
        "field": a.metric.field,
        "epsilon": a.metric.epsilon,
        "h": a.metric.h,
        "net": a.net,
        "points": pts,
        "distances": dist,
        "max_asymmetry": asymmetry,
        "max_triangle_excess": if k >= 3 { json!(triangle) } else { Value::Null },
        "kim_min": kim,
    });
    Ok((pass, out, envelope("distances", seed, pass, body)))
}
