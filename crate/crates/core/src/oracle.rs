//! Independent numerical ground truth for the certified branches: Galerkin
//! truncations on `F^2` in the orthonormal monomial basis `e_a = z^a / sqrt(a!)`,
//! Rayleigh quotients over kernel and monomial families, and decay tables of
//! `||W k_w||` along rays.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{multi_indices, ExpPoly, MultiIndex};
use crate::linalg::{self, CMatrix, CVector, C64};
use crate::quad::{self, F2Prepared, QuadSpec};
use crate::wco::{ell_profile, ell_sup, normalize, probe_directions, WcoProblem};

/// Largest basis the matrix oracle accepts.
pub const MAX_BASIS: usize = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub max_degree: u32,
    pub quad: QuadSpec,
}

impl TruncationSpec {
    pub fn new(max_degree: u32) -> Self {
        TruncationSpec { max_degree, quad: QuadSpec::default() }
    }
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn check_f2(problem: &WcoProblem) -> Result<()> {
    if problem.p != 2.0 || problem.q != 2.0 {
        return Err(Error::Domain(format!(
            "the matrix oracle needs p = q = 2; got p = {}, q = {}",
            problem.p, problem.q
        )));
    }
    Ok(())
}

fn basis(n: usize, max_degree: u32) -> Result<Vec<MultiIndex>> {
    let size = binom(max_degree as usize + n, n);
    if size > MAX_BASIS {
        return Err(Error::Resource(format!("basis of {size} monomials exceeds {MAX_BASIS}")));
    }
    Ok(multi_indices(n, max_degree))
}

/// `W e_a`.
fn image_of_basis(problem: &WcoProblem, alpha: &MultiIndex) -> Result<ExpPoly> {
    let e = ExpPoly::monomial(C64::new(1.0 / alpha.factorial().sqrt(), 0.0), alpha.clone());
    problem.apply(&e)
}

/// `P_N W P_N` with rows and columns indexed by `basis`.
#[derive(Clone, Debug)]
pub struct TruncatedMatrix {
    pub basis: Vec<MultiIndex>,
    /// `entries[row][col] = <W e_col, e_row>`.
    pub entries: Vec<Vec<C64>>,
}

/// Galerkin matrix `<W e_a, e_b>` for `|a|, |b| <= N`, read off exact Taylor coefficients.
pub fn f2_matrix(problem: &WcoProblem, spec: &TruncationSpec) -> Result<TruncatedMatrix> {
    check_f2(problem)?;
    let basis = basis(problem.dim(), spec.max_degree)?;
    let cols: Vec<Vec<C64>> = basis
        .par_iter()
        .map(|alpha| {
            let img = image_of_basis(problem, alpha)?;
            Ok(basis
                .iter()
                .map(|beta| img.taylor_coefficient(beta) * beta.factorial().sqrt())
                .collect())
        })
        .collect::<Result<_>>()?;
    let m = basis.len();
    let entries = (0..m).map(|r| (0..m).map(|c| cols[c][r]).collect()).collect();
    Ok(TruncatedMatrix { basis, entries })
}

/// Largest singular value of the truncated matrix.
pub fn truncated_norm(matrix: &TruncatedMatrix) -> Result<f64> {
    if matrix.entries.is_empty() {
        return Ok(0.0);
    }
    linalg::spectral_norm(&CMatrix::from_rows(&matrix.entries)?)
}

/// `sqrt(lambda_max)` of the exact Gram matrix `<W f_j, W f_i>`.
fn gram_norm(images: &[ExpPoly]) -> Result<f64> {
    let prepared: Vec<F2Prepared> = images.par_iter().map(F2Prepared::new).collect();
    let m = prepared.len();
    if m == 0 {
        return Ok(0.0);
    }
    let rows: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| if j < i { Ok(C64::new(0.0, 0.0)) } else { prepared[j].inner(&prepared[i]) })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut g = rows;
    for i in 0..m {
        for j in 0..i {
            g[i][j] = g[j][i].conj();
        }
    }
    Ok(linalg::spectral_norm(&CMatrix::from_rows(&g)?)?.sqrt())
}

/// `||W P_N||` on `F^2`, from exact inner products of the images of the basis.
pub fn compressed_norm(problem: &WcoProblem, max_degree: u32) -> Result<f64> {
    check_f2(problem)?;
    let basis = basis(problem.dim(), max_degree)?;
    let images: Vec<ExpPoly> = basis
        .par_iter()
        .map(|a| image_of_basis(problem, a))
        .collect::<Result<_>>()?;
    gram_norm(&images)
}

/// Components of the essential-norm estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialEstimate {
    pub value: f64,
    pub block_norm: f64,
    pub block_degrees: (u32, u32),
    pub far_kernel_max: f64,
}

/// Sampled estimate of `||W (I - P_N)||` on `F^2`: the norm of `W` on the block of
/// degrees `N < |a| <= N + width`, and quotients at `(I - P_N) k_w` for `w` on far
/// rays and at the caller's `extra` points.
pub fn truncated_essential_upper(problem: &WcoProblem, n_max: u32, extra: &[CVector], spec: &QuadSpec) -> Result<EssentialEstimate> {
    check_f2(problem)?;
    let n = problem.dim();
    let mut width = 12u32;
    while width > 1 && binom((n_max + width) as usize + n, n) - binom(n_max as usize + n, n) > 600 {
        width -= 1;
    }
    let block: Vec<MultiIndex> = multi_indices(n, n_max + width)
        .into_iter()
        .filter(|a| a.total() > n_max)
        .collect();
    let images: Vec<ExpPoly> = block
        .par_iter()
        .map(|a| image_of_basis(problem, a))
        .collect::<Result<_>>()?;
    let block_norm = gram_norm(&images)?;

    let dirs = probe_directions(n, 8, spec.seed);
    let points: Vec<CVector> = [4.0, 8.0]
        .iter()
        .flat_map(|&r| dirs.iter().map(move |d| d.scale(C64::new(r, 0.0))))
        .chain(extra.iter().cloned())
        .collect();
    let quotients: Vec<f64> = points
        .par_iter()
        .map(|w| {
            let k = ExpPoly::normalized_kernel(w);
            let tail = k.sub(&k.taylor_polynomial(n_max))?;
            let den = quad::f2_inner(&tail, &tail)?.re;
            if den <= 1e-24 {
                return Ok(0.0);
            }
            let img = problem.apply(&tail)?;
            Ok((quad::f2_inner(&img, &img)?.re / den).max(0.0).sqrt())
        })
        .collect::<Result<_>>()?;
    let far = quotients.iter().cloned().fold(0.0, f64::max);
    Ok(EssentialEstimate {
        value: block_norm.max(far),
        block_norm,
        block_degrees: (n_max + 1, n_max + width),
        far_kernel_max: far,
    })
}

/// Test functions for Rayleigh quotients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub radii: Vec<f64>,
    pub random_directions: usize,
    pub seed: u64,
    pub max_monomial_degree: u32,
    /// Additional kernel centres.
    pub extra_points: Vec<Vec<[f64; 2]>>,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec {
            radii: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            random_directions: 8,
            seed: 0x5eed,
            max_monomial_degree: 3,
            extra_points: Vec::new(),
        }
    }
}

/// Coordinate axes (real direction only) plus fixed-seed random unit directions.
pub fn family_directions(n: usize, extra: usize, seed: u64) -> Vec<CVector> {
    let mut out: Vec<CVector> = (0..n)
        .map(|i| {
            let mut d = CVector::zeros(n);
            d[i] = C64::new(1.0, 0.0);
            d
        })
        .collect();
    out.extend(probe_directions(n, extra, seed).into_iter().skip(4 * n));
    out
}

impl FamilySpec {
    /// Default family with the monomial degree capped where images need quadrature in many variables.
    pub fn for_problem(problem: &WcoProblem, seed: u64) -> Self {
        let max_monomial_degree = match (problem.dim(), problem.q == 2.0) {
            (_, true) | (1, _) => 3,
            (2, false) => 2,
            _ => 0,
        };
        FamilySpec { seed, max_monomial_degree, ..FamilySpec::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighEntry {
    pub descriptor: String,
    pub quotient: f64,
    pub err_estimate: f64,
}

fn fmt_point(w: &CVector) -> String {
    let parts: Vec<String> = w.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

/// `||W f||_q / ||f||_p` over normalized kernels and monomials.
pub fn rayleigh_sweep(problem: &WcoProblem, family: &FamilySpec, spec: &QuadSpec) -> Result<Vec<RayleighEntry>> {
    let n = problem.dim();
    let mut funcs: Vec<(String, ExpPoly)> = Vec::new();
    let dirs = family_directions(n, family.random_directions, family.seed);
    let mut kernel_points: Vec<CVector> = Vec::new();
    for &r in &family.radii {
        if r == 0.0 {
            kernel_points.push(CVector::zeros(n));
            continue;
        }
        for d in &dirs {
            kernel_points.push(d.scale(C64::new(r, 0.0)));
        }
    }
    for p in &family.extra_points {
        if p.len() != n {
            return Err(Error::Dimension(format!("extra point must lie in C^{n}")));
        }
        kernel_points.push(CVector(p.iter().map(|v| C64::new(v[0], v[1])).collect()));
    }
    for w in kernel_points {
        funcs.push((format!("k_w, w = {}", fmt_point(&w)), ExpPoly::normalized_kernel(&w)));
    }
    for alpha in multi_indices(n, family.max_monomial_degree) {
        funcs.push((format!("z^{:?}", alpha.0), ExpPoly::monomial(C64::new(1.0, 0.0), alpha)));
    }
    funcs
        .par_iter()
        .map(|(name, f)| {
            let den = quad::fock_norm(f, problem.p, spec)?;
            let num = quad::fock_norm(&problem.apply(f)?, problem.q, spec)?;
            let quotient = num.value / den.value;
            let err = num.err_estimate / den.value + quotient * den.err_estimate / den.value;
            Ok(RayleighEntry { descriptor: name.clone(), quotient, err_estimate: err })
        })
        .collect()
}

/// The points `origin + R direction / |direction|`, `R >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub origin: CVector,
    pub direction: CVector,
}

impl Ray {
    pub fn through_origin(direction: CVector) -> Self {
        Ray { origin: CVector::zeros(direction.dim()), direction }
    }
}

/// `phi(U* (z*, 0))` for the maximizer `z*` of `ell`, where `||W k_w||_q >= ell`.
/// `None` when `A = 0` or `ell` is infinite.
pub fn ell_kernel_point(problem: &WcoProblem, spec: &QuadSpec) -> Result<Option<CVector>> {
    let norm = normalize(problem)?;
    if norm.rank_s == 0 {
        return Ok(None);
    }
    let profile = ell_profile(&norm, problem.q)?;
    let sup = ell_sup(&profile, spec)?;
    let Some(mut z) = sup.argmax.filter(|_| sup.value.value.is_finite()) else {
        return Ok(None);
    };
    z.0.resize(problem.dim(), C64::new(0.0, 0.0));
    Ok(Some(problem.phi.apply(&norm.u.adjoint().mul_vec(&z))))
}

/// Rays from [`ell_kernel_point`] along the isometric directions `V e_i` of `A`.
/// Empty when `A` has no unit singular value or `ell` is infinite.
pub fn isometric_rays(problem: &WcoProblem, spec: &QuadSpec) -> Result<Vec<Ray>> {
    let norm = normalize(problem)?;
    let units: Vec<usize> = (0..norm.rank_s).filter(|&i| norm.a_t[i] == 1.0).collect();
    if units.is_empty() {
        return Ok(Vec::new());
    }
    let Some(origin) = ell_kernel_point(problem, spec)? else {
        return Ok(Vec::new());
    };
    Ok(units.into_iter().map(|i| Ray { origin: origin.clone(), direction: norm.v.column(i) }).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub ray: usize,
    pub radius: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessTable {
    pub rows: Vec<WitnessRow>,
    /// Every ray is non-increasing in the radius.
    pub monotone_decay: bool,
    /// Largest value at the last radius over all rays.
    pub last_radius_max: f64,
    /// Largest over rays of the smallest value along the ray.
    pub best_ray_min: f64,
}

/// `||W k_w||_q` at the points of each ray for the given radii.
pub fn compactness_witness(problem: &WcoProblem, radii: &[f64], rays: &[Ray], spec: &QuadSpec) -> Result<WitnessTable> {
    let n = problem.dim();
    if radii.is_empty() || rays.is_empty() {
        return Err(Error::Invalid("witness needs radii and rays".into()));
    }
    let mut order: Vec<f64> = radii.to_vec();
    order.sort_by(f64::total_cmp);
    let jobs: Vec<(usize, f64)> = (0..rays.len())
        .flat_map(|d| order.iter().map(move |&r| (d, r)))
        .collect();
    let rows: Vec<WitnessRow> = jobs
        .par_iter()
        .map(|&(d, r)| {
            let ray = &rays[d];
            if ray.direction.dim() != n || ray.origin.dim() != n {
                return Err(Error::Dimension(format!("rays must lie in C^{n}")));
            }
            let unit = ray.direction.scale(C64::new(r / ray.direction.norm(), 0.0));
            let k = ExpPoly::normalized_kernel(&ray.origin.add(&unit));
            let v = quad::fock_norm(&problem.apply(&k)?, problem.q, spec)?;
            Ok(WitnessRow { ray: d, radius: r, value: v.value })
        })
        .collect::<Result<_>>()?;
    let mut monotone = true;
    let mut last_max: f64 = 0.0;
    let mut best_min: f64 = 0.0;
    for ray in rows.chunks(order.len()) {
        for w in ray.windows(2) {
            if w[1].value > w[0].value * (1.0 + 1e-9) {
                monotone = false;
            }
        }
        last_max = last_max.max(ray[ray.len() - 1].value);
        best_min = best_min.max(ray.iter().map(|r| r.value).fold(f64::INFINITY, f64::min));
    }
    Ok(WitnessTable { rows, monotone_decay: monotone, last_radius_max: last_max, best_ray_min: best_min })
}
