//! Job descriptions, the runner behind the command line, and the corpus
//! harness.
//!
//! A job is a JSON file naming a subcommand, the group data, and the input
//! payload. Running one produces a typed artifact plus its JSON rendering
//! inside a versioned envelope; the rendering is deterministic, so identical
//! jobs give byte-identical output. Operations that fail with a precision
//! verdict are retried with doubled precision up to the cap from
//! `INVLIFT_MAX_PRECISION`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::desing::{resolve_nc_2d, ChartMap, ResolutionTree, ResolveOptions};
use crate::error::{Error, Result};
use crate::invariants::{Family, InvariantSystem, Membership};
use crate::lifter::{
    lift_curve, lift_multi, verify_chart, ChartResidual, LiftChart, LiftOptions, LiftProblem,
};
use crate::scalar::Scalar;
use crate::series::Series;
use crate::textio::parse_series;
use crate::weak::{
    assemble_weak_lift_with, sample_rows, section_map, VerificationReport, VerifyOptions, WeakLift,
};

pub const DEFAULT_MAX_PRECISION: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    Describe,
    LiftCurve,
    LiftSurface,
    Resolve,
    CheckMembership,
    Section,
    VerifyLift,
    RunCorpus,
}

impl JobKind {
    fn name(&self) -> &'static str {
        match self {
            JobKind::Describe => "describe",
            JobKind::LiftCurve => "lift-curve",
            JobKind::LiftSurface => "lift-surface",
            JobKind::Resolve => "resolve",
            JobKind::CheckMembership => "check-membership",
            JobKind::Section => "section",
            JobKind::VerifyLift => "verify-lift",
            JobKind::RunCorpus => "run-corpus",
        }
    }
}

/// Expected results attached to corpus jobs. Every present field is checked
/// against the artifact; absent fields are ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Expectation {
    /// "ok" or the error kind slug the job must fail with.
    pub outcome: Option<String>,
    pub chart_count: Option<usize>,
    pub min_chart_count: Option<usize>,
    /// All chart identities certified, coefficientwise.
    pub verified: Option<bool>,
    /// The certification is unconditional (polynomial data, no truncation).
    pub residual_exact: Option<bool>,
    /// Real-mode structure: no power substitution appears in any chain.
    pub no_power_substitution: Option<bool>,
    pub contains_blow_up: Option<bool>,
    pub leaves: Option<usize>,
    pub max_blowups: Option<usize>,
    pub membership: Option<String>,
    pub residual_pass: Option<bool>,
    pub gradient_pass: Option<bool>,
    pub lipschitz_pass: Option<bool>,
    pub sbv_pass: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub subcommand: JobKind,
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub n: Option<usize>,
    /// Base dimension of the parameter space (1 or 2).
    #[serde(default)]
    pub nvars: Option<u8>,
    /// Series literals for lifting, tracked polynomials for resolution, or
    /// invariant-point coordinates (rationals) for membership.
    #[serde(default)]
    pub components: Vec<String>,
    /// Box half-width for section jobs, as a rational literal.
    #[serde(default)]
    pub radius: Option<String>,
    /// Dyadic grid level for section jobs.
    #[serde(default)]
    pub level: Option<u32>,
    #[serde(default)]
    pub precision: Option<u32>,
    #[serde(default)]
    pub trunc: Option<u32>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub grid_levels: Option<Vec<u32>>,
    /// Relative Cauchy tolerance for the gradient integral ladder.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Reserved for sample shuffling in stress harnesses; never changes
    /// artifacts.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

impl JobSpec {
    pub fn new(subcommand: JobKind) -> Self {
        JobSpec {
            subcommand,
            family: None,
            n: None,
            nvars: None,
            components: Vec::new(),
            radius: None,
            level: None,
            precision: None,
            trunc: None,
            budget: None,
            grid_levels: None,
            tol: None,
            seed: None,
            expect: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: JobSpec = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("job spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Range checks promised by the front end: everything is validated
    /// before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let cap = max_precision_cap();
        if let Some(p) = self.precision {
            if !(8..=cap).contains(&p) {
                return Err(Error::Input(format!(
                    "precision {p} outside the supported range 8..={cap}"
                )));
            }
        }
        if let Some(t) = self.trunc {
            if !(1..=512).contains(&t) {
                return Err(Error::Input(format!(
                    "truncation order {t} outside the supported range 1..=512"
                )));
            }
        }
        if let Some(b) = self.budget {
            if !(1..=100_000).contains(&b) {
                return Err(Error::Input(format!(
                    "budget {b} outside the supported range 1..=100000"
                )));
            }
        }
        if let Some(v) = self.nvars {
            if !(1..=2).contains(&v) {
                return Err(Error::Input(format!("nvars must be 1 or 2, got {v}")));
            }
        }
        if let Some(levels) = &self.grid_levels {
            if levels.is_empty() {
                return Err(Error::Input("grid level list is empty".into()));
            }
            for w in levels.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::Input(format!(
                        "grid levels must increase strictly, got {levels:?}"
                    )));
                }
            }
            if *levels.last().unwrap() > 14 {
                return Err(Error::Input(format!(
                    "grid level {} too fine (max 14)",
                    levels.last().unwrap()
                )));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t <= 0.5) {
                return Err(Error::Input(format!(
                    "tolerance {t} outside the supported range (0, 0.5]"
                )));
            }
        }
        if let Some(l) = self.level {
            if l > 10 {
                return Err(Error::Input(format!("section level {l} too fine (max 10)")));
            }
        }
        Ok(())
    }

    fn system(&self) -> Result<InvariantSystem> {
        let family = self
            .family
            .ok_or_else(|| Error::Input("job needs a \"family\" field".into()))?;
        let n = self
            .n
            .ok_or_else(|| Error::Input("job needs an \"n\" field".into()))?;
        InvariantSystem::new(family, n)
    }

    fn lift_options(&self) -> LiftOptions {
        let mut opts = LiftOptions::default();
        if let Some(p) = self.precision {
            opts.precision = p;
            opts.resolve.prec = p;
        }
        opts.trunc = self.trunc;
        if let Some(b) = self.budget {
            opts.max_steps = b;
            opts.max_charts = b.saturating_mul(4);
            opts.resolve.max_leaves = b.saturating_mul(4).clamp(8, 1024);
        }
        opts
    }

    fn verify_options(&self, q: u8) -> VerifyOptions {
        let mut opts = VerifyOptions::for_dim(q);
        if let Some(levels) = &self.grid_levels {
            opts.levels = levels.clone();
        }
        if let Some(t) = self.tol {
            opts.cauchy_tol = t;
        }
        if let Some(p) = self.precision {
            opts.precision = p;
        }
        opts
    }
}

/// Typed result of one job, alongside its JSON rendering.
#[derive(Debug, Clone)]
pub enum Artifact {
    Description(serde_json::Value),
    Charts {
        charts: Vec<LiftChart>,
        residuals: Vec<ChartResidual>,
    },
    Tree(ResolutionTree),
    Membership {
        verdict: Membership,
    },
    Weak {
        lift: Box<WeakLift>,
        report: Box<VerificationReport>,
    },
}

impl Artifact {
    /// Stable tag written into the JSON envelope.
    pub fn name(&self) -> &'static str {
        match self {
            Artifact::Description(_) => "description",
            Artifact::Charts { .. } => "lift_charts",
            Artifact::Tree(_) => "resolution_tree",
            Artifact::Membership { .. } => "membership",
            Artifact::Weak { .. } => "weak_lift",
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobOutput {
    pub artifact: Artifact,
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub summary: String,
}

#[derive(Serialize)]
struct Envelope<'a> {
    tool: &'static str,
    version: &'static str,
    format: u32,
    artifact: &'static str,
    result: &'a serde_json::Value,
}

/// The artifact inside the versioned envelope, pretty-printed with a
/// trailing newline. Encoding is deterministic: struct fields keep
/// declaration order, maps are sorted, exact scalars are rendered as
/// rational strings.
pub fn render_output(out: &JobOutput) -> String {
    let env = Envelope {
        tool: "invlift",
        version: env!("CARGO_PKG_VERSION"),
        format: 1,
        artifact: out.artifact.name(),
        result: &out.json,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("artifact serialization");
    text.push('\n');
    text
}

pub fn max_precision_cap() -> u32 {
    match std::env::var("INVLIFT_MAX_PRECISION") {
        Ok(v) => v.parse().unwrap_or(DEFAULT_MAX_PRECISION),
        Err(_) => DEFAULT_MAX_PRECISION,
    }
}

/// Run with doubled precision after a precision or separation verdict,
/// until the cap.
pub fn with_precision_retry<T>(start: u32, cap: u32, f: impl Fn(u32) -> Result<T>) -> Result<T> {
    let mut p = start.min(cap);
    loop {
        match f(p) {
            Err(e @ (Error::PrecisionExhausted { .. } | Error::SeparationFailed(_))) => {
                if p >= cap {
                    return Err(e);
                }
                p = p.saturating_mul(2).min(cap);
            }
            other => return other,
        }
    }
}

fn parse_rational(text: &str) -> Result<BigRational> {
    BigRational::from_str(text.trim()).map_err(|e| {
        Error::Parse(format!(
            "expected an integer or p/q rational, got {text:?}: {e}"
        ))
    })
}

fn parse_components(spec: &JobSpec, nvars: u8) -> Result<Vec<Series>> {
    if spec.components.is_empty() {
        return Err(Error::Input("job has no input components".into()));
    }
    spec.components
        .iter()
        .map(|c| parse_series(c, nvars, spec.trunc))
        .collect()
}

fn membership_name(m: Membership) -> &'static str {
    match m {
        Membership::Inside => "inside",
        Membership::Outside => "outside",
        Membership::Indeterminate => "indeterminate",
    }
}

/// Stable slug for expected-failure annotations.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Input(_) => "input",
        Error::ZeroToTruncation { .. } => "zero_to_truncation",
        Error::NotNormalCrossings(_) => "not_normal_crossings",
        Error::NotDivisible { .. } => "not_divisible",
        Error::TranslateTruncated { .. } => "translate_truncated",
        Error::TruncationUnderflow { .. } => "truncation_underflow",
        Error::PrecisionExhausted { .. } => "precision_exhausted",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::SeparationFailed(_) => "separation_failed",
        Error::IncomparableExponents { .. } => "incomparable_exponents",
        Error::RealOrderViolation(_) => "real_order_violation",
        Error::NotInImage(_) => "not_in_image",
        Error::UnsupportedFamily(_) => "unsupported_family",
        Error::VerificationFailed(_) => "verification_failed",
        Error::Internal(_) => "internal",
    }
}

fn run_describe(spec: &JobSpec) -> Result<JobOutput> {
    let sys = spec.system()?;
    let json = serde_json::json!({
        "family": sys.family.to_string(),
        "n": sys.n,
        "num_invariants": sys.num_invariants(),
        "fiber_degree": sys.fiber_degree(),
        "degrees": sys.degrees(),
        "degree_product": sys.degree_product(),
        "real": sys.is_real(),
        "generators": sys.generator_strings(),
    });
    Ok(JobOutput {
        artifact: Artifact::Description(json.clone()),
        json,
        csv: None,
        summary: format!(
            "{}({}): {} generators, fiber degree {}",
            sys.family,
            sys.n,
            sys.num_invariants(),
            sys.fiber_degree()
        ),
    })
}

fn charts_json(
    sys: &InvariantSystem,
    charts: &[LiftChart],
    residuals: &[ChartResidual],
) -> serde_json::Value {
    serde_json::json!({
        "system": sys,
        "chart_count": charts.len(),
        "charts": charts,
        "residuals": residuals,
    })
}

fn run_lift(spec: &JobSpec, q: u8) -> Result<JobOutput> {
    let sys = spec.system()?;
    let f = parse_components(spec, q)?;
    let base = spec.lift_options();
    let cap = max_precision_cap();
    let charts = with_precision_retry(base.precision, cap, |p| {
        let mut opts = base.clone();
        opts.precision = p;
        opts.resolve.prec = p;
        let problem = LiftProblem::new(sys, f.clone(), opts)?;
        if q == 1 {
            lift_curve(&problem)
        } else {
            lift_multi(&problem)
        }
    })?;
    let residuals: Vec<ChartResidual> = charts
        .iter()
        .map(|c| verify_chart(&sys, &f, c))
        .collect::<Result<_>>()?;
    let json = charts_json(&sys, &charts, &residuals);
    let all_ok = residuals.iter().all(|r| r.ok);
    Ok(JobOutput {
        summary: format!(
            "{} chart{} for {}({}), identity {}",
            charts.len(),
            if charts.len() == 1 { "" } else { "s" },
            sys.family,
            sys.n,
            if all_ok { "certified" } else { "FAILED" }
        ),
        artifact: Artifact::Charts { charts, residuals },
        json,
        csv: None,
    })
}

fn run_resolve(spec: &JobSpec) -> Result<JobOutput> {
    let tracked = parse_components(spec, 2)?;
    for t in &tracked {
        if !(t.is_polynomial() && t.is_exact()) {
            return Err(Error::Input(
                "resolution tracks exact polynomials only".into(),
            ));
        }
    }
    let mut ropts = ResolveOptions::default();
    if let Some(p) = spec.precision {
        ropts.prec = p;
    }
    if let Some(b) = spec.budget {
        ropts.max_leaves = b;
    }
    if let Some(r) = &spec.radius {
        ropts.rho0 = parse_rational(r)?;
    }
    let cap = max_precision_cap();
    let tree = with_precision_retry(ropts.prec, cap, |p| {
        let mut o = ropts.clone();
        o.prec = p;
        resolve_nc_2d(&tracked, &o)
    })?;
    let json = serde_json::to_value(&tree).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(JobOutput {
        summary: format!(
            "{} leaves after {} blow-ups, all certified normal crossings",
            tree.leaves.len(),
            tree.blowups
        ),
        artifact: Artifact::Tree(tree),
        json,
        csv: None,
    })
}

fn run_membership(spec: &JobSpec) -> Result<JobOutput> {
    let sys = spec.system()?;
    if spec.components.len() != sys.num_invariants() {
        return Err(Error::Input(format!(
            "{}({}) takes {} invariant coordinates, got {}",
            sys.family,
            sys.n,
            sys.num_invariants(),
            spec.components.len()
        )));
    }
    let z: Vec<Scalar> = spec
        .components
        .iter()
        .map(|c| parse_rational(c).map(Scalar::from_rational))
        .collect::<Result<_>>()?;
    let verdict = sys.membership_test(&z)?;
    let json = serde_json::json!({
        "system": sys,
        "point": z,
        "verdict": membership_name(verdict),
    });
    Ok(JobOutput {
        artifact: Artifact::Membership { verdict },
        json,
        csv: None,
        summary: format!("{}({}): {}", sys.family, sys.n, membership_name(verdict)),
    })
}

fn run_section(spec: &JobSpec) -> Result<JobOutput> {
    let sys = spec.system()?;
    let radius = match &spec.radius {
        Some(r) => parse_rational(r)?,
        None => BigRational::from_integer(1.into()),
    };
    let level = spec.level.unwrap_or(6);
    let prec = spec.precision.unwrap_or(crate::scalar::DEFAULT_PREC);
    let cap = max_precision_cap();
    let (lift, report) =
        with_precision_retry(prec, cap, |p| section_map(sys, &radius, level, p))?;
    let json = serde_json::json!({
        "weak_lift": lift,
        "report": report,
    });
    Ok(JobOutput {
        summary: format!(
            "section of {}({}) on {} samples, residual {}",
            sys.family,
            sys.n,
            report.residual_samples,
            if report.residual_pass { "within tolerance" } else { "FAILED" }
        ),
        artifact: Artifact::Weak {
            lift: Box::new(lift),
            report: Box::new(report),
        },
        json,
        csv: None,
    })
}

fn run_verify(spec: &JobSpec, want_csv: bool) -> Result<JobOutput> {
    let sys = spec.system()?;
    let q = spec.nvars.unwrap_or(1);
    let f = parse_components(spec, q)?;
    let base = spec.lift_options();
    let vopts = spec.verify_options(q);
    let cap = max_precision_cap();
    let (lift, report) = with_precision_retry(base.precision, cap, |p| {
        let mut opts = base.clone();
        opts.precision = p;
        opts.resolve.prec = p;
        let mut v = vopts.clone();
        v.precision = p;
        let problem = LiftProblem::new(sys, f.clone(), opts)?;
        assemble_weak_lift_with(&problem, Some(&v))
    })?;
    let csv = if want_csv {
        let level = *vopts.levels.last().unwrap_or(&6);
        Some(render_sample_csv(&lift, level.min(8)))
    } else {
        None
    };
    let json = serde_json::json!({
        "weak_lift": lift,
        "report": report,
    });
    Ok(JobOutput {
        summary: format!(
            "{} pieces, residual {}, gradient ladder {}, SBV {}",
            lift.pieces.len(),
            if report.residual_pass { "pass" } else { "FAIL" },
            if report.gradient_pass { "consistent" } else { "FAIL" },
            if report.sbv_pass { "pass" } else { "FAIL" }
        ),
        artifact: Artifact::Weak {
            lift: Box::new(lift),
            report: Box::new(report),
        },
        json,
        csv,
    })
}

/// Grid dump with one row per sample: coordinates, fiber values, gradient
/// norm where a one-piece stencil fits, and the E flag.
pub fn render_sample_csv(lift: &WeakLift, level: u32) -> String {
    let rows = sample_rows(lift, level);
    let q = lift.q as usize;
    let ncomp = lift.fiber_len();
    let mut text = String::new();
    for j in 0..q {
        let _ = write!(text, "x{},", j + 1);
    }
    for c in 0..ncomp {
        let _ = write!(text, "f{0}_re,f{0}_im,", c + 1);
    }
    text.push_str("grad,on_e\n");
    for row in rows {
        for v in &row.x {
            let _ = write!(text, "{v},");
        }
        match &row.value {
            Some(vals) => {
                for (re, im) in vals {
                    let _ = write!(text, "{re},{im},");
                }
            }
            None => text.push_str(&",".repeat(2 * ncomp)),
        }
        match row.grad {
            Some(g) => {
                let _ = write!(text, "{g},");
            }
            None => text.push(','),
        }
        let _ = writeln!(text, "{}", row.on_e);
    }
    text
}

/// Execute one job. CSV is produced only for verify jobs when asked.
pub fn run_job(spec: &JobSpec) -> Result<JobOutput> {
    run_job_with(spec, false)
}

pub fn run_job_with(spec: &JobSpec, want_csv: bool) -> Result<JobOutput> {
    spec.validate()?;
    match spec.subcommand {
        JobKind::Describe => run_describe(spec),
        JobKind::LiftCurve => run_lift(spec, 1),
        JobKind::LiftSurface => run_lift(spec, 2),
        JobKind::Resolve => run_resolve(spec),
        JobKind::CheckMembership => run_membership(spec),
        JobKind::Section => run_section(spec),
        JobKind::VerifyLift => run_verify(spec, want_csv),
        JobKind::RunCorpus => Err(Error::Input(
            "corpus jobs cannot nest; point run-corpus at a directory".into(),
        )),
    }
}

// ---- corpus harness ----

#[derive(Debug, Clone, Serialize)]
pub struct CorpusRow {
    pub file: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusSummary {
    pub rows: Vec<CorpusRow>,
    pub passed: usize,
    pub failed: usize,
}

impl CorpusSummary {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn table(&self) -> String {
        let mut text = String::new();
        let width = self.rows.iter().map(|r| r.file.len()).max().unwrap_or(4);
        for row in &self.rows {
            let _ = writeln!(
                text,
                "{}  {:width$}  {}",
                if row.pass { "PASS" } else { "FAIL" },
                row.file,
                row.detail,
            );
        }
        let _ = writeln!(text, "{} passed, {} failed", self.passed, self.failed);
        text
    }
}

fn mismatch(what: &str, expected: impl std::fmt::Display, got: impl std::fmt::Display) -> String {
    format!("expected {what} {expected}, got {got}")
}

fn check_chart_expectations(
    exp: &Expectation,
    charts: &[LiftChart],
    residuals: &[ChartResidual],
) -> Option<String> {
    if let Some(want) = exp.chart_count {
        if charts.len() != want {
            return Some(mismatch("chart count", want, charts.len()));
        }
    }
    if let Some(want) = exp.min_chart_count {
        if charts.len() < want {
            return Some(mismatch("at least charts", want, charts.len()));
        }
    }
    if let Some(want) = exp.verified {
        let got = residuals.iter().all(|r| r.ok);
        if got != want {
            return Some(mismatch("verified", want, got));
        }
    }
    if let Some(want) = exp.residual_exact {
        let got = residuals.iter().all(|r| r.exact);
        if got != want {
            return Some(mismatch("exact residual", want, got));
        }
    }
    if let Some(want) = exp.no_power_substitution {
        let got = charts.iter().all(|c| {
            c.chain
                .iter()
                .all(|s| !matches!(s, ChartMap::PowerSubstitution { .. }))
        });
        if got != want {
            return Some(mismatch("power-substitution-free chains", want, got));
        }
    }
    if let Some(want) = exp.contains_blow_up {
        let got = charts.iter().any(|c| {
            c.chain
                .iter()
                .any(|s| matches!(s, ChartMap::BlowUp { .. }))
        });
        if got != want {
            return Some(mismatch("blow-up charts", want, got));
        }
    }
    None
}

fn check_report_expectations(exp: &Expectation, report: &VerificationReport) -> Option<String> {
    if let Some(want) = exp.residual_pass {
        if report.residual_pass != want {
            return Some(mismatch("residual_pass", want, report.residual_pass));
        }
    }
    if let Some(want) = exp.gradient_pass {
        if report.gradient_pass != want {
            return Some(mismatch("gradient_pass", want, report.gradient_pass));
        }
    }
    if let Some(want) = exp.lipschitz_pass {
        if report.lipschitz_pass != Some(want) {
            return Some(mismatch(
                "lipschitz_pass",
                want,
                format!("{:?}", report.lipschitz_pass),
            ));
        }
    }
    if let Some(want) = exp.sbv_pass {
        if report.sbv_pass != want {
            return Some(mismatch("sbv_pass", want, report.sbv_pass));
        }
    }
    None
}

/// None when the outcome meets the expectations, a mismatch description
/// otherwise.
pub fn check_expectation(spec: &JobSpec, outcome: &Result<JobOutput>) -> Option<String> {
    let exp = spec.expect.clone().unwrap_or_default();
    let wanted = exp.outcome.as_deref().unwrap_or("ok");
    match outcome {
        Err(e) => {
            let got = error_kind(e);
            if got != wanted {
                Some(format!("expected outcome {wanted}, got {got}: {e}"))
            } else {
                None
            }
        }
        Ok(out) => {
            if wanted != "ok" {
                return Some(format!("expected outcome {wanted}, job succeeded"));
            }
            match &out.artifact {
                Artifact::Charts { charts, residuals } => {
                    check_chart_expectations(&exp, charts, residuals)
                }
                Artifact::Tree(tree) => {
                    if let Some(want) = exp.leaves {
                        if tree.leaves.len() != want {
                            return Some(mismatch("leaves", want, tree.leaves.len()));
                        }
                    }
                    if let Some(cap) = exp.max_blowups {
                        if tree.blowups > cap {
                            return Some(mismatch("blow-ups at most", cap, tree.blowups));
                        }
                    }
                    None
                }
                Artifact::Membership { verdict } => {
                    if let Some(want) = &exp.membership {
                        let got = membership_name(*verdict);
                        if got != want {
                            return Some(mismatch("membership", want, got));
                        }
                    }
                    None
                }
                Artifact::Weak { report, .. } => check_report_expectations(&exp, report),
                Artifact::Description(_) => None,
            }
        }
    }
}

pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::Input(format!("cannot read corpus directory {dir:?}: {e}")))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Run every job file in the directory on a bounded worker pool and compare
/// against the embedded expectations.
pub fn run_corpus(dir: &Path, workers: usize) -> Result<CorpusSummary> {
    let files = corpus_files(dir)?;
    let results: Mutex<Vec<Option<CorpusRow>>> = Mutex::new(vec![None; files.len()]);
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, 16).min(files.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= files.len() {
                    break;
                }
                let row = run_corpus_file(&files[i]);
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<CorpusRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every corpus slot filled"))
        .collect();
    let passed = rows.iter().filter(|r| r.pass).count();
    let failed = rows.len() - passed;
    Ok(CorpusSummary {
        rows,
        passed,
        failed,
    })
}

fn run_corpus_file(path: &Path) -> CorpusRow {
    let file = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return CorpusRow {
                file,
                pass: false,
                detail: format!("unreadable: {e}"),
            }
        }
    };
    let spec = match JobSpec::from_json(&text) {
        Ok(s) => s,
        Err(e) => {
            return CorpusRow {
                file,
                pass: false,
                detail: format!("bad spec: {e}"),
            }
        }
    };
    let outcome = run_job(&spec);
    match check_expectation(&spec, &outcome) {
        Some(detail) => CorpusRow {
            file,
            pass: false,
            detail,
        },
        None => CorpusRow {
            file,
            pass: true,
            detail: match &outcome {
                Ok(out) => format!("{}: {}", spec.subcommand.name(), out.summary),
                Err(e) => format!("{}: failed as expected ({})", spec.subcommand.name(), error_kind(e)),
            },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lift_curve_spec(components: &[&str]) -> JobSpec {
        let mut spec = JobSpec::new(JobKind::LiftCurve);
        spec.family = Some(Family::SymmetricComplex);
        spec.n = Some(2);
        spec.nvars = Some(1);
        spec.components = components.iter().map(|s| s.to_string()).collect();
        spec
    }

    #[test]
    fn describe_lists_generators_and_degrees() {
        let mut spec = JobSpec::new(JobKind::Describe);
        spec.family = Some(Family::SymmetricComplex);
        spec.n = Some(3);
        let out = run_job(&spec).unwrap();
        assert_eq!(out.json["degrees"], serde_json::json!([1, 2, 3]));
        assert_eq!(out.json["degree_product"], serde_json::json!(6));
        assert_eq!(out.json["fiber_degree"], serde_json::json!(3));
        assert_eq!(
            out.json["generators"].as_array().unwrap().len(),
            3
        );
    }

    #[test]
    fn lift_curve_job_emits_certified_charts() {
        let out = run_job(&lift_curve_spec(&["0", "-t"])).unwrap();
        let Artifact::Charts { charts, residuals } = &out.artifact else {
            panic!("wrong artifact");
        };
        assert_eq!(charts.len(), 2);
        assert!(residuals.iter().all(|r| r.ok && r.exact));
        assert!(out.summary.contains("certified"));
    }

    #[test]
    fn membership_job_reports_outside_without_failing() {
        let mut spec = JobSpec::new(JobKind::CheckMembership);
        spec.family = Some(Family::SignedPermReal);
        spec.n = Some(1);
        spec.components = vec!["-1".into()];
        let out = run_job(&spec).unwrap();
        assert!(matches!(
            out.artifact,
            Artifact::Membership {
                verdict: Membership::Outside
            }
        ));
        assert_eq!(out.json["verdict"], serde_json::json!("outside"));
    }

    #[test]
    fn job_validation_rejects_out_of_range_options() {
        let mut spec = lift_curve_spec(&["0", "-t"]);
        spec.precision = Some(4);
        assert!(matches!(run_job(&spec), Err(Error::Input(_))));
        let mut spec = lift_curve_spec(&["0", "-t"]);
        spec.grid_levels = Some(vec![8, 8]);
        assert!(matches!(run_job(&spec), Err(Error::Input(_))));
        let mut spec = lift_curve_spec(&["0", "-t"]);
        spec.tol = Some(0.0);
        assert!(matches!(run_job(&spec), Err(Error::Input(_))));
    }

    #[test]
    fn rendered_output_is_deterministic() {
        let spec = lift_curve_spec(&["0", "-t"]);
        let a = render_output(&run_job(&spec).unwrap());
        let b = render_output(&run_job(&spec).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"tool\": \"invlift\""));
        assert!(a.contains("\"artifact\": \"lift_charts\""));
    }

    #[test]
    fn emitted_charts_reparse_to_equal_values() {
        let out = run_job(&lift_curve_spec(&["0", "-t"])).unwrap();
        let Artifact::Charts { charts, .. } = &out.artifact else {
            panic!("wrong artifact");
        };
        let back: Vec<LiftChart> =
            serde_json::from_value(out.json["charts"].clone()).unwrap();
        assert_eq!(&back, charts);
    }

    #[test]
    fn verify_job_produces_report_and_csv() {
        let mut spec = lift_curve_spec(&["0", "-t"]);
        spec.subcommand = JobKind::VerifyLift;
        spec.grid_levels = Some(vec![4, 6]);
        let out = run_job_with(&spec, true).unwrap();
        let Artifact::Weak { report, .. } = &out.artifact else {
            panic!("wrong artifact");
        };
        assert!(report.residual_pass);
        let csv = out.csv.unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x1,f1_re,f1_im,f2_re,f2_im,grad,on_e");
        assert!(csv.lines().count() > 16);
        assert!(csv.contains("true"));
    }

    #[test]
    fn precision_retry_stops_at_the_cap() {
        let mut calls = Vec::new();
        let calls_ref = std::cell::RefCell::new(&mut calls);
        let err = with_precision_retry(64, 256, |p| -> Result<()> {
            calls_ref.borrow_mut().push(p);
            Err(Error::PrecisionExhausted {
                decision: "test".into(),
                prec: p,
                cap: p,
            })
        })
        .unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { .. }));
        assert_eq!(calls, vec![64, 128, 256]);
    }

    #[test]
    fn corpus_runner_checks_annotations() {
        let dir = std::env::temp_dir().join(format!("invlift-corpus-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let write = |name: &str, body: serde_json::Value| {
            std::fs::write(dir.join(name), serde_json::to_string_pretty(&body).unwrap()).unwrap();
        };
        write(
            "a_two_charts.json",
            serde_json::json!({
                "subcommand": "lift-curve",
                "family": "symmetric_complex",
                "n": 2,
                "nvars": 1,
                "components": ["0", "-t"],
                "expect": {"outcome": "ok", "chart_count": 2, "verified": true}
            }),
        );
        write(
            "b_outside.json",
            serde_json::json!({
                "subcommand": "check-membership",
                "family": "signed_perm_real",
                "n": 1,
                "components": ["-1"],
                "expect": {"membership": "outside"}
            }),
        );
        write(
            "c_wrong_count.json",
            serde_json::json!({
                "subcommand": "lift-curve",
                "family": "symmetric_complex",
                "n": 2,
                "nvars": 1,
                "components": ["0", "-t"],
                "expect": {"chart_count": 3}
            }),
        );
        let summary = run_corpus(&dir, 2).unwrap();
        assert_eq!(summary.rows.len(), 3);
        assert_eq!(summary.passed, 2);
        assert_eq!(summary.failed, 1);
        assert!(!summary.rows[2].pass);
        assert!(summary.rows[2].detail.contains("chart count"));
        assert!(summary.table().contains("2 passed, 1 failed"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_corpus_passes_trivially() {
        let dir = std::env::temp_dir().join(format!("invlift-empty-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let summary = run_corpus(&dir, 4).unwrap();
        assert!(summary.rows.is_empty());
        assert!(summary.all_pass());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn expected_failures_count_as_passes() {
        let mut spec = lift_curve_spec(&["1 + t", "t"]);
        spec.family = Some(Family::SignedPermReal);
        spec.n = Some(2);
        spec.components = vec!["-1 - t^2".into(), "t^2".into()];
        spec.expect = Some(Expectation {
            outcome: Some("not_in_image".into()),
            ..Expectation::default()
        });
        let outcome = run_job(&spec);
        assert!(check_expectation(&spec, &outcome).is_none());
        spec.expect = Some(Expectation {
            outcome: Some("ok".into()),
            ..Expectation::default()
        });
        assert!(check_expectation(&spec, &outcome).is_some());
    }

    #[test]
    fn section_job_reports_samples() {
        let mut spec = JobSpec::new(JobKind::Section);
        spec.family = Some(Family::SymmetricComplex);
        spec.n = Some(2);
        spec.level = Some(3);
        let out = run_job(&spec).unwrap();
        let Artifact::Weak { report, .. } = &out.artifact else {
            panic!("wrong artifact");
        };
        assert!(report.residual_pass);
        assert_eq!(report.residual_samples, 81);
    }
}
