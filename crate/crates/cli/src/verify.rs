//! Property suites over a directory of problem files.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fockop_core::carleson::carleson_integral;
use fockop_core::funcspace::ExpPoly;
use fockop_core::linalg::{self, CVector, C64, DEFAULT_RANK_TOL};
use fockop_core::oracle::{self, FamilySpec, TruncationSpec};
use fockop_core::quad::{fock_norm, QuadSpec};
use fockop_core::wco::{self, Normalization, Verdict, WcoProblem};

use crate::commands::{load_problem, problem_paths, CliError, Overrides};
use crate::schema::{ProblemFile, TOOL_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemmas,
    Sandwich,
    NormalizationIndependence,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }

    fn label(self) -> &'static str {
        match self {
            Suite::Lemmas => "lemmas",
            Suite::Sandwich => "sandwich",
            Suite::NormalizationIndependence => "normalization-independence",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: String,
    pub property: String,
    pub problem: String,
    pub pass: bool,
    pub detail: String,
    /// The offending problem file, on failure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tool_version: String,
    pub command: String,
    pub suite: Suite,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

struct Ctx<'a> {
    name: String,
    file: &'a ProblemFile,
    problem: WcoProblem,
    spec: QuadSpec,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, suite: Suite, property: &str, pass: bool, detail: String) {
        self.checks.push(Check {
            suite: suite.label().into(),
            property: property.into(),
            problem: self.name.clone(),
            pass,
            detail,
            counterexample: (!pass).then(|| serde_json::to_string(self.file).unwrap_or_default()),
        });
    }
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    if x.is_infinite() || y.is_infinite() {
        return x == y;
    }
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

fn sample_points(n: usize, count: usize, seed: u64) -> Vec<CVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| CVector((0..n).map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect()))
        .collect()
}

fn admissible(problem: &WcoProblem) -> Result<(bool, usize), CliError> {
    let t = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok((t.sigma[0] <= 1.0, t.rank_s))
}

fn is_one(psi: &ExpPoly) -> bool {
    psi.as_pure_exponential().is_some_and(|(c, f)| c == C64::new(1.0, 0.0) && f.norm_sqr() == 0.0)
}

fn lemmas(ctx: &mut Ctx) -> Result<(), CliError> {
    let num = |e: fockop_core::Error| CliError::Numerical(e.to_string());
    let (p, q) = (ctx.problem.p, ctx.problem.q);
    let n = ctx.problem.dim();
    let psi = ctx.problem.psi.clone();
    let spec = ctx.spec.clone();

    // norms of psi need quadrature over C^n unless closed forms apply
    let cheap = n <= 2 || psi.as_pure_exponential().is_some();
    let pts = sample_points(n, 5, spec.seed);
    if cheap {
        let nq = fock_norm(&psi, q, &spec).map_err(num)?;
        let worst = pts
            .iter()
            .map(|z| Ok(psi.eval(z)?.norm() * (-0.5 * z.norm_sqr()).exp()))
            .collect::<fockop_core::Result<Vec<f64>>>()
            .map_err(num)?
            .into_iter()
            .fold(0.0, f64::max);
        ctx.push(Suite::Lemmas, "pointwise-bound", worst <= nq.value + nq.err_estimate, format!("max |psi(z)| e^(-|z|^2/2) = {worst:.12e} <= ||psi||_q = {:.12e}", nq.value));

        let n2q = fock_norm(&psi, 2.0 * q, &spec).map_err(num)?;
        let k = 2f64.powf(n as f64 / (2.0 * q));
        ctx.push(
            Suite::Lemmas,
            "inclusion",
            n2q.value - n2q.err_estimate <= k * (nq.value + nq.err_estimate),
            format!("||psi||_(2q) = {:.12e} <= {k:.12e} ||psi||_q = {:.12e}", n2q.value, k * nq.value),
        );

        if n >= 2 {
            let head = pts[0].head(1);
            let sl = fock_norm(&psi.slice_head(&head).map_err(num)?, q, &spec).map_err(num)?;
            let lhs = (sl.value - sl.err_estimate) * (-0.5 * head.norm_sqr()).exp();
            ctx.push(Suite::Lemmas, "slice-bound", lhs <= nq.value + nq.err_estimate, format!("||psi(z_1, .)||_q e^(-|z_1|^2/2) = {lhs:.12e} <= {:.12e}", nq.value));
        }
    }

    let class = wco::classify_with(&ctx.problem, &spec).map_err(num)?;
    if is_one(&psi) {
        let cc = wco::composition_criterion(&ctx.problem.phi, p, q).map_err(num)?;
        ctx.push(Suite::Lemmas, "composition-criterion", cc.verdict == class.verdict, format!("classify {:?}, criterion {:?}", class.verdict, cc.verdict));
    }

    let (adm, rank) = admissible(&ctx.problem)?;
    if !adm || rank == 0 {
        return Ok(());
    }
    let norm = wco::normalize(&ctx.problem).map_err(num)?;
    let phi_t = norm.phi_t();
    let worst_m = pts
        .iter()
        .map(|z| {
            let a = wco::m_at(&psi, &ctx.problem.phi, z)?;
            let b = wco::m_at(&norm.psi_t, &phi_t, &norm.u.mul_vec(z))?;
            Ok((a - b).abs() / a.abs().max(1e-300))
        })
        .collect::<fockop_core::Result<Vec<f64>>>()
        .map_err(num)?
        .into_iter()
        .fold(0.0, f64::max);
    ctx.push(Suite::Lemmas, "m-invariance", worst_m <= 1e-9, format!("max relative difference {worst_m:.3e}"));

    let profile = wco::ell_profile(&norm, q).map_err(num)?;
    let sup = wco::ell_sup(&profile, &spec).map_err(num)?;
    let m = wco::m_sup(&ctx.problem, &spec).map_err(num)?;
    ctx.push(Suite::Lemmas, "m-le-ell", m.value <= sup.value.value * (1.0 + 1e-9), format!("m = {:.12e} <= ell = {:.12e}", m.value, sup.value.value));

    if let (true, Some(mut z)) = (sup.value.value.is_finite(), sup.argmax.clone()) {
        z.0.resize(n, C64::new(0.0, 0.0));
        let w = ctx.problem.phi.apply(&norm.u.adjoint().mul_vec(&z));
        let img = ctx.problem.apply(&ExpPoly::normalized_kernel(&w)).map_err(num)?;
        let v = fock_norm(&img, q, &spec).map_err(num)?;
        let ell = sup.value.value;
        ctx.push(
            Suite::Lemmas,
            "kernel-lower-bound",
            v.value + v.err_estimate >= ell * (1.0 - 1e-6),
            format!("||W k_phi(z*)||_q = {:.12e} >= ell = {ell:.12e}", v.value),
        );
    }

    if q < p {
        let rep = carleson_integral(&norm, p, q, &spec).map_err(num)?;
        let bounded = class.verdict.bounded();
        let ok = rep.member == bounded && bounded == (class.verdict == Verdict::Compact);
        ctx.push(Suite::Lemmas, "q-less-p-equivalence", ok, format!("member {}, verdict {:?}", rep.member, class.verdict));
    } else if class.verdict.bounded() {
        let b = wco::norm_bounds_with(&ctx.problem, &spec).map_err(num)?;
        let family = FamilySpec::for_problem(&ctx.problem, spec.seed);
        let rows = oracle::rayleigh_sweep(&ctx.problem, &family, &spec).map_err(num)?;
        let bad = rows.iter().find(|r| r.quotient > b.upper * (1.0 + 1e-9) + r.err_estimate);
        let max = rows.iter().map(|r| r.quotient).fold(0.0, f64::max);
        ctx.push(
            Suite::Lemmas,
            "rayleigh-below-upper",
            bad.is_none(),
            match bad {
                None => format!("{} quotients, max {max:.12e} <= upper {:.12e}", rows.len(), b.upper),
                Some(r) => format!("{}: {:.12e} > upper {:.12e}", r.descriptor, r.quotient, b.upper),
            },
        );
    }
    Ok(())
}

fn sandwich(ctx: &mut Ctx) -> Result<(), CliError> {
    let num = |e: fockop_core::Error| CliError::Numerical(e.to_string());
    if ctx.problem.p != 2.0 || ctx.problem.q != 2.0 {
        return Ok(());
    }
    let class = wco::classify_with(&ctx.problem, &ctx.spec).map_err(num)?;
    if !class.verdict.bounded() {
        return Ok(());
    }
    let b = wco::norm_bounds_with(&ctx.problem, &ctx.spec).map_err(num)?;
    let mut norms = Vec::new();
    for degree in [4u32, 8, 12] {
        let m = oracle::f2_matrix(&ctx.problem, &TruncationSpec { max_degree: degree, quad: ctx.spec.clone() }).map_err(num)?;
        norms.push(oracle::truncated_norm(&m).map_err(num)?);
    }
    let monotone = norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let below = norms.iter().all(|&v| v <= b.upper + 1e-6);
    ctx.push(
        Suite::Sandwich,
        "truncations-monotone-below-upper",
        monotone && below,
        format!("||P_N W P_N|| at N = 4, 8, 12: {:.12e}, {:.12e}, {:.12e}; upper {:.12e}", norms[0], norms[1], norms[2], b.upper),
    );
    let c = oracle::compressed_norm(&ctx.problem, 12).map_err(num)?;
    ctx.push(
        Suite::Sandwich,
        "compressed-norm-in-sandwich",
        c >= b.lower * (1.0 - 1e-3) && c <= b.upper * (1.0 + 1e-6),
        format!("||W P_12|| = {c:.12e} in [{:.12e}, {:.12e}]", b.lower, b.upper),
    );
    Ok(())
}

fn stats(norm: &Normalization, problem: &WcoProblem, spec: &QuadSpec) -> fockop_core::Result<[f64; 3]> {
    let (p, q) = (problem.p, problem.q);
    let profile = wco::ell_profile(norm, q)?;
    let sup = wco::ell_sup(&profile, spec)?.value.value;
    let limsup = if sup.is_finite() && p <= q { wco::ell_limsup(&profile, spec)?.value } else { 0.0 };
    let lr = if q < p { carleson_integral(norm, p, q, spec)?.lr_norm.value } else { 0.0 };
    Ok([sup, limsup, lr])
}

fn normalization_independence(ctx: &mut Ctx) -> Result<(), CliError> {
    let num = |e: fockop_core::Error| CliError::Numerical(e.to_string());
    let (adm, rank) = admissible(&ctx.problem)?;
    if !adm || rank == 0 {
        return Ok(());
    }
    let n1 = wco::normalize(&ctx.problem).map_err(num)?;
    let n2 = wco::alternative_normalization(&ctx.problem, ctx.spec.seed).map_err(num)?;
    let s1 = stats(&n1, &ctx.problem, &ctx.spec).map_err(num)?;
    let s2 = stats(&n2, &ctx.problem, &ctx.spec).map_err(num)?;
    let ok = s1.iter().zip(&s2).all(|(a, b)| rel_close(*a, *b, 1e-8));
    ctx.push(
        Suite::NormalizationIndependence,
        "ell-statistics-agree",
        ok,
        format!("(sup, limsup, L^r): ({:.12e}, {:.12e}, {:.12e}) vs ({:.12e}, {:.12e}, {:.12e})", s1[0], s1[1], s1[2], s2[0], s2[1], s2[2]),
    );
    Ok(())
}

fn check_file(name: String, file: &ProblemFile, suite: Suite, overrides: &Overrides) -> Vec<Check> {
    let problem = match file.to_problem() {
        Ok(p) => p,
        Err(e) => {
            return vec![Check { suite: suite.label().into(), property: "load".into(), problem: name, pass: false, detail: e.to_string(), counterexample: None }];
        }
    };
    let mut ctx = Ctx { name, file, problem, spec: overrides.spec_for(file), checks: Vec::new() };
    let runs: [(Suite, fn(&mut Ctx) -> Result<(), CliError>); 3] =
        [(Suite::Lemmas, lemmas), (Suite::Sandwich, sandwich), (Suite::NormalizationIndependence, normalization_independence)];
    for (s, f) in runs {
        if suite.includes(s) {
            if let Err(e) = f(&mut ctx) {
                ctx.push(s, "evaluation", false, e.to_string());
            }
        }
    }
    ctx.checks
}

pub fn verify(dir: &Path, suite: Suite, overrides: &Overrides) -> Result<VerifyReport, CliError> {
    let paths = problem_paths(dir)?;
    let names: Vec<String> = paths.iter().map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()).collect();
    let files: Vec<ProblemFile> = paths.iter().map(|p| load_problem(p)).collect::<Result<_, _>>()?;
    let checks: Vec<Check> = files
        .par_iter()
        .zip(names.par_iter())
        .map(|(f, name)| check_file(name.clone(), f, suite, overrides))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(VerifyReport {
        tool_version: TOOL_VERSION.into(),
        command: "verify".into(),
        suite,
        files: names,
        failed: checks.len() - passed,
        passed,
        checks,
    })
}

pub fn render_text(r: &VerifyReport) -> String {
    let mut out: Vec<String> = r
        .checks
        .iter()
        .map(|c| format!("{} {}/{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.suite, c.property, c.problem, c.detail))
        .collect();
    for c in r.checks.iter().filter(|c| !c.pass) {
        if let Some(x) = &c.counterexample {
            out.push(format!("counterexample {}: {x}", c.problem));
        }
    }
    out.push(format!("{} files, {} checks, {} passed, {} failed", r.files.len(), r.checks.len(), r.passed, r.failed));
    out.join("\n")
}
