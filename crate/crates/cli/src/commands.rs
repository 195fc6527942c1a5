use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use fockop_core::carleson::carleson_integral;
use fockop_core::linalg::{self, DEFAULT_RANK_TOL};
use fockop_core::oracle::{self, FamilySpec, Ray, TruncationSpec, MAX_BASIS};
use fockop_core::quad::QuadSpec;
use fockop_core::wco::{self, Verdict, WcoProblem};
use fockop_core::Error;

use crate::schema::{vector_pairs, CarlesonSection, EllSection, OracleSection, ProblemFile, Report, SchemaError, TruncationRow, TOOL_VERSION};

/// Failure with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("malformed problem file {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Malformed { .. } => 2,
            CliError::Unsupported(_) => 4,
            CliError::Io(_) | CliError::Numerical(_) => 1,
        }
    }
}

fn core_err(e: Error) -> CliError {
    match e {
        Error::Unsupported(m) => CliError::Unsupported(m),
        other => CliError::Numerical(other.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmd {
    Classify,
    Bounds,
    Essnorm,
    Oracle,
}

impl Cmd {
    pub fn name(self) -> &'static str {
        match self {
            Cmd::Classify => "classify",
            Cmd::Bounds => "bounds",
            Cmd::Essnorm => "essnorm",
            Cmd::Oracle => "oracle",
        }
    }
}

/// Command-line overrides of the quadrature settings.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub quad_nodes: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn spec_for(&self, file: &ProblemFile) -> QuadSpec {
        let mut spec = file.quad_spec();
        if let Some(k) = self.quad_nodes {
            spec.nodes_per_axis = k;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        spec
    }
}

/// Problem files named by `path`: the file itself, or every `*.json` in the directory sorted by name.
pub fn problem_paths(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_dir() {
        let mut out: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        out.sort();
        Ok(out)
    } else if path.exists() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(CliError::Io(format!("{}: no such file or directory", path.display())))
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let malformed = |e: SchemaError| CliError::Malformed { path: path.display().to_string(), message: e.to_string() };
    let file = ProblemFile::parse(&text).map_err(malformed)?;
    file.to_problem().map_err(malformed)?;
    Ok(file)
}

fn ell_section(problem: &WcoProblem, verdict: Verdict, spec: &QuadSpec) -> Result<Option<EllSection>, CliError> {
    let t = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL).map_err(core_err)?;
    if t.sigma[0] > 1.0 || t.rank_s == 0 {
        return Ok(None);
    }
    let norm = wco::normalize(problem).map_err(core_err)?;
    let profile = wco::ell_profile(&norm, problem.q).map_err(core_err)?;
    let sup = wco::ell_sup(&profile, spec).map_err(core_err)?;
    let finite = sup.value.value.is_finite();
    let limsup = if finite && verdict.bounded() && problem.p <= problem.q {
        Some(wco::ell_limsup(&profile, spec).map_err(core_err)?.value.into())
    } else {
        None
    };
    Ok(Some(EllSection {
        sup: sup.value.value.into(),
        sup_mode: sup.value.mode,
        argmax: sup.argmax.filter(|_| finite).map(|z| vector_pairs(&z)),
        limsup,
        head_det: norm.head_det().map_err(core_err)?,
        rank_s: norm.rank_s,
    }))
}

fn carleson_section(problem: &WcoProblem, spec: &QuadSpec) -> Result<Option<CarlesonSection>, CliError> {
    let t = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL).map_err(core_err)?;
    if problem.q >= problem.p || t.sigma[0] > 1.0 || t.rank_s == 0 {
        return Ok(None);
    }
    let norm = wco::normalize(problem).map_err(core_err)?;
    let rep = carleson_integral(&norm, problem.p, problem.q, spec).map_err(core_err)?;
    Ok(Some(CarlesonSection::from(&rep)))
}

fn oracle_section(problem: &WcoProblem, verdict: Verdict, bounds: Option<&wco::NormBounds>, spec: &QuadSpec) -> Result<OracleSection, CliError> {
    let n = problem.dim();
    let iso = if verdict.bounded() { oracle::isometric_rays(problem, spec).map_err(core_err)? } else { Vec::new() };
    let mut family = FamilySpec::for_problem(problem, spec.seed);
    family.extra_points.push(vector_pairs(&problem.phi.b));
    if verdict.bounded() {
        if let Some(w) = oracle::ell_kernel_point(problem, spec).map_err(core_err)? {
            family.extra_points.push(vector_pairs(&w));
        }
    }
    let rayleigh = oracle::rayleigh_sweep(problem, &family, spec).map_err(core_err)?;
    let rayleigh_max = rayleigh.iter().map(|r| r.quotient).fold(0.0, f64::max);

    let hilbert = problem.p == 2.0 && problem.q == 2.0;
    let mut truncations = Vec::new();
    let mut essential_estimate = None;
    if hilbert {
        for degree in [4u32, 8, 12] {
            let basis_size = fockop_core::funcspace::multi_indices(n, degree).len();
            if basis_size > MAX_BASIS {
                break;
            }
            let m = oracle::f2_matrix(problem, &TruncationSpec { max_degree: degree, quad: spec.clone() }).map_err(core_err)?;
            truncations.push(TruncationRow {
                degree,
                basis_size,
                matrix_norm: oracle::truncated_norm(&m).map_err(core_err)?,
                compressed_norm: oracle::compressed_norm(problem, degree).map_err(core_err)?,
            });
        }
        if verdict == Verdict::BoundedNotCompact {
            let far: Vec<_> = iso
                .iter()
                .flat_map(|r| [8.0, 16.0].map(|t| r.origin.add(&r.direction.scale(fockop_core::linalg::C64::new(t / r.direction.norm(), 0.0)))))
                .collect();
            essential_estimate = Some(oracle::truncated_essential_upper(problem, 12, &far, spec).map_err(core_err)?);
        }
    }

    let mut rays: Vec<Ray> = oracle::family_directions(n, 8, spec.seed).into_iter().map(Ray::through_origin).collect();
    rays.extend(iso);
    let witness = oracle::compactness_witness(problem, &[0.0, 1.0, 2.0, 4.0, 8.0], &rays, spec).map_err(core_err)?;

    let within_upper_bound = bounds.filter(|b| !b.upper_is_up_to_universal_constant).map(|b| {
        rayleigh.iter().all(|r| r.quotient <= b.upper * (1.0 + 1e-9) + r.err_estimate)
            && truncations.iter().all(|t| t.compressed_norm <= b.upper * (1.0 + 1e-9))
    });
    Ok(OracleSection { rayleigh, rayleigh_max, truncations, essential_estimate, witness, within_upper_bound })
}

/// Runs one command on one problem file.
pub fn run(cmd: Cmd, file: &ProblemFile, overrides: &Overrides) -> Result<Report, CliError> {
    let spec = overrides.spec_for(file);
    let problem = file.to_problem().map_err(|e| CliError::Malformed { path: file.name.clone().unwrap_or_default(), message: e.to_string() })?;
    if cmd == Cmd::Essnorm && !(problem.p > 1.0 && problem.p <= problem.q) {
        return Err(CliError::Unsupported(format!(
            "essential-norm estimates are available only for 1 < p <= q < inf; got p = {}, q = {}",
            problem.p, problem.q
        )));
    }
    let classification = wco::classify_with(&problem, &spec).map_err(core_err)?;
    let verdict = classification.verdict;
    let ell = ell_section(&problem, verdict, &spec)?;
    let mut report = Report {
        tool_version: TOOL_VERSION.to_string(),
        command: cmd.name().to_string(),
        problem: file.clone(),
        quad: spec.clone(),
        classification,
        ell,
        carleson: None,
        bounds: None,
        oracle: None,
    };
    if cmd == Cmd::Classify {
        return Ok(report);
    }
    report.carleson = carleson_section(&problem, &spec)?;
    if verdict.bounded() {
        report.bounds = Some(match cmd {
            Cmd::Essnorm => wco::essential_norm_bounds_with(&problem, &spec),
            _ => wco::norm_bounds_with(&problem, &spec),
        }
        .map_err(core_err)?);
    }
    if cmd == Cmd::Oracle {
        report.oracle = Some(oracle_section(&problem, verdict, report.bounds.as_ref(), &spec)?);
    }
    Ok(report)
}

/// Runs a command over every problem under `path`, in file-name order.
pub fn run_path(cmd: Cmd, path: &Path, overrides: &Overrides) -> Result<Vec<Report>, CliError> {
    let paths = problem_paths(path)?;
    let files: Vec<ProblemFile> = paths.iter().map(|p| load_problem(p)).collect::<Result<_, _>>()?;
    files.par_iter().map(|f| run(cmd, f, overrides)).collect()
}

fn fmt_ext(x: &crate::schema::ExtReal) -> String {
    match x {
        crate::schema::ExtReal::Finite(v) => format!("{v:.12e}"),
        crate::schema::ExtReal::Infinite => "inf".into(),
    }
}

/// Plain-text rendering of a report.
pub fn render_text(r: &Report) -> String {
    let mut out = Vec::new();
    let name = r.problem.name.clone().unwrap_or_else(|| "(unnamed)".into());
    out.push(format!("problem: {name} (n = {}, p = {}, q = {})", r.problem.n, r.problem.p, r.problem.q));
    out.push(format!("verdict: {:?} ({:?})", r.classification.verdict, r.classification.mode));
    for c in &r.classification.certificate {
        out.push(format!("  {c}"));
    }
    if let Some(e) = &r.ell {
        out.push(format!("ell: sup = {} ({:?}), rank s = {}, |det| = {:.12e}", fmt_ext(&e.sup), e.sup_mode, e.rank_s, e.head_det));
        if let Some(l) = &e.limsup {
            out.push(format!("ell: limsup = {}", fmt_ext(l)));
        }
    }
    if let Some(c) = &r.carleson {
        out.push(format!("L^{}: norm = {}, member = {}", c.r_exponent, fmt_ext(&c.lr_norm), c.member));
    }
    if let Some(b) = &r.bounds {
        out.push(format!(
            "norm: [{:.12e}, {:.12e}]{}",
            b.lower,
            b.upper,
            if b.upper_is_up_to_universal_constant { " (upper up to a universal constant)" } else { "" }
        ));
        if let (Some(l), Some(u)) = (b.essential_lower, b.essential_upper) {
            out.push(format!("essential norm: [{l:.12e}, {u:.12e}]"));
        }
    }
    if let Some(o) = &r.oracle {
        out.push(format!("oracle: {} Rayleigh quotients, max {:.12e}", o.rayleigh.len(), o.rayleigh_max));
        for t in &o.truncations {
            out.push(format!("oracle: N = {}: ||P W P|| = {:.12e}, ||W P|| = {:.12e}", t.degree, t.matrix_norm, t.compressed_norm));
        }
        if let Some(e) = &o.essential_estimate {
            out.push(format!("oracle: essential estimate {:.12e}", e.value));
        }
        out.push(format!("oracle: witness at |w| = 8 max {:.6e}, best ray min {:.6e}", o.witness.last_radius_max, o.witness.best_ray_min));
        if let Some(ok) = o.within_upper_bound {
            out.push(format!("oracle: within upper bound: {ok}"));
        }
    }
    out.join("\n")
}
