//! Weighted composition operators `W_{psi,phi} f = psi * (f o phi)` from
//! `F^p(C^n)` to `F^q(C^n)`: normalization, the quantities `m` and `ell`,
//! classification, and two-sided norm and essential-norm bounds.
//!
//! With `A = V diag(a) U` and `b~ = V* b`, the normalized pair is
//! `psi~(z) = psi(U* z)`, `phi~(z) = diag(a) z + b~`, and
//!
//! ```text
//! ell_{z[s]} = exp((|phi~(z)|^2 - |z_[s]|^2) / 2) * ||psi~(z_[s], .)||_{n-s,q}.
//! ```
//!
//! When `psi~ = P(z) exp(<z, c>)` has a single frequency this factors as
//!
//! ```text
//! ell_{z[s]} = K * Q(z_[s]) * exp(sum_{i<s} [-(1 - a_i^2)/2 |z_i|^2 + Re(z_i conj(w_i))]),
//! w_i = c_i + a_i b~_i,   K = exp(|b~|^2 / 2),
//! ```
//!
//! with `Q(z_[s]) = ||P(z_[s], .) exp(<., c'>)||_{n-s,q}`. For a pure exponential
//! `P = kappa` the factor `Q` is the constant `|kappa| exp(|c'|^2 / 2)` and is folded into `K`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{AffineMap, ExpPoly};
use crate::linalg::{self, CMatrix, CVector, SvdTriple, C64, DEFAULT_RANK_TOL};
use crate::quad::{self, NormMode, NormResult, QuadSpec};
use crate::search::{self, SearchOptions};

/// `|w_i|` at or below this counts as zero on a unit singular direction.
pub const W_ZERO_TOL: f64 = 1e-9;

/// Nodes per axis for slice norms evaluated inside searches and integrals.
const INNER_NODES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct WcoProblem {
    pub psi: ExpPoly,
    pub phi: AffineMap,
    pub p: f64,
    pub q: f64,
}

impl WcoProblem {
    pub fn new(psi: ExpPoly, phi: AffineMap, p: f64, q: f64) -> Result<Self> {
        if psi.dim() != phi.dim() {
            return Err(Error::Dimension(format!(
                "psi on C^{} but phi on C^{}",
                psi.dim(),
                phi.dim()
            )));
        }
        if psi.is_zero() {
            return Err(Error::Invalid("psi must be nonzero".into()));
        }
        for (name, e) in [("p", p), ("q", q)] {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::Domain(format!("{name} = {e} must be finite and positive")));
            }
        }
        Ok(WcoProblem { psi, phi, p, q })
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    /// `W f` as an exponential polynomial.
    pub fn apply(&self, f: &ExpPoly) -> Result<ExpPoly> {
        crate::funcspace::apply_wco(&self.psi, &self.phi, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Admissibility {
    Admissible,
    InadmissibleNormGt1,
}

pub fn admissibility(problem: &WcoProblem) -> Result<(Admissibility, f64)> {
    let t = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL)?;
    let norm = t.sigma[0];
    let verdict = if norm > 1.0 {
        Admissibility::InadmissibleNormGt1
    } else {
        Admissibility::Admissible
    };
    Ok((verdict, norm))
}

/// The normalized pair together with the factors that conjugate it to the original.
#[derive(Clone, Debug)]
pub struct Normalization {
    pub psi_t: ExpPoly,
    /// Diagonal of the normalized matrix, non-increasing.
    pub a_t: Vec<f64>,
    pub b_t: CVector,
    pub u: CMatrix,
    pub v: CMatrix,
    pub rank_s: usize,
}

impl Normalization {
    /// Normalization with respect to a given factorization `A = V diag(sigma) U`.
    pub fn from_factors(psi: &ExpPoly, b: &CVector, v: CMatrix, sigma: Vec<f64>, u: CMatrix, rank_s: usize) -> Result<Self> {
        let n = psi.dim();
        if v.n() != n || u.n() != n || sigma.len() != n || b.dim() != n {
            return Err(Error::Dimension("factorization does not match psi".into()));
        }
        if rank_s > n {
            return Err(Error::Invalid(format!("rank {rank_s} exceeds n = {n}")));
        }
        let psi_t = psi.compose_affine(&AffineMap::linear(u.adjoint()))?;
        let b_t = v.adjoint().mul_vec(b);
        let mut a_t = sigma;
        for a in a_t.iter_mut().skip(rank_s) {
            *a = 0.0;
        }
        Ok(Normalization { psi_t, a_t, b_t, u, v, rank_s })
    }

    pub fn dim(&self) -> usize {
        self.a_t.len()
    }

    pub fn phi_t(&self) -> AffineMap {
        AffineMap {
            a: CMatrix::diag_real(&self.a_t),
            b: self.b_t.clone(),
        }
    }

    /// `|det A~_[s]|`.
    pub fn head_det(&self) -> Result<f64> {
        if self.rank_s == 0 {
            return Err(Error::Domain("rank 0 has no principal block".into()));
        }
        Ok(self.a_t[..self.rank_s].iter().product())
    }

    /// `|b~'_[s]|^2`, the squared tail of the translation.
    pub fn tail_b_sqr(&self) -> f64 {
        self.b_t.tail(self.rank_s).norm_sqr()
    }
}

pub fn normalize(problem: &WcoProblem) -> Result<Normalization> {
    let t: SvdTriple = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL)?;
    if t.sigma[0] > 1.0 {
        return Err(Error::Domain(format!(
            "spectral norm {} > 1: the pair is inadmissible",
            t.sigma[0]
        )));
    }
    Normalization::from_factors(&problem.psi, &problem.phi.b, t.v, t.sigma, t.u, t.rank_s)
}

/// A second normalization built from `A = (V H) diag(a) (H* U)`, with `H`
/// a random block-diagonal unitary on groups of equal singular values.
pub fn alternative_normalization(problem: &WcoProblem, seed: u64) -> Result<Normalization> {
    let t = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL)?;
    let n = t.sigma.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = CMatrix::zeros(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (t.sigma[end] - t.sigma[start]).abs() <= 1e-12 {
            end += 1;
        }
        let block = linalg::random_unitary(end - start, &mut rng);
        for i in 0..end - start {
            for j in 0..end - start {
                h[(start + i, start + j)] = block[(i, j)];
            }
        }
        start = end;
    }
    let v = t.v.mul(&h);
    let u = h.adjoint().mul(&t.u);
    Normalization::from_factors(&problem.psi, &problem.phi.b, v, t.sigma, u, t.rank_s)
}

/// `m_z = |psi(z)| exp((|phi(z)|^2 - |z|^2) / 2)`.
pub fn m_at(psi: &ExpPoly, phi: &AffineMap, z: &CVector) -> Result<f64> {
    Ok(log_m_at(psi, phi, z)?.exp())
}

fn log_m_at(psi: &ExpPoly, phi: &AffineMap, z: &CVector) -> Result<f64> {
    let v = psi.eval(z)?;
    Ok(v.norm().ln() + 0.5 * (phi.apply(z).norm_sqr() - z.norm_sqr()))
}

fn split_point(x: &[f64]) -> CVector {
    CVector(x.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn max_freq_norm(f: &ExpPoly) -> f64 {
    f.terms().iter().map(|t| t.freq.norm()).fold(0.0, f64::max)
}

/// `m(psi, phi) = sup_z m_z`, computed on the normalized pair.
pub fn m_sup(problem: &WcoProblem, spec: &QuadSpec) -> Result<NormResult> {
    let norm = normalize(problem)?;
    let n = norm.dim();
    if let Some((kappa, c)) = norm.psi_t.as_pure_exponential() {
        let mut log = kappa.norm().ln() + 0.5 * norm.b_t.norm_sqr();
        for i in 0..n {
            let a = norm.a_t[i];
            let w = c[i] + norm.b_t[i] * a;
            if a < 1.0 {
                log += w.norm_sqr() / (2.0 * (1.0 - a * a));
            } else if w.norm() > W_ZERO_TOL {
                return Ok(NormResult::exact(f64::INFINITY));
            }
        }
        return Ok(NormResult::exact(log.exp()));
    }
    let phi_t = norm.phi_t();
    let psi_t = &norm.psi_t;
    let amin = norm.a_t.iter().map(|a| 0.5 * (1.0 - a * a)).fold(f64::INFINITY, f64::min).max(0.05);
    let deg = psi_t.max_degree() as f64;
    let radius = spec.sup_radius.unwrap_or(
        (norm.b_t.norm() + max_freq_norm(psi_t)) / (2.0 * amin) + (4.0 + 2.0 * deg.sqrt()) / amin.sqrt(),
    );
    let grid = spec.sup_grid.unwrap_or_else(|| search::default_grid(2 * n));
    let r = search::maximize(2 * n, &SearchOptions::new(radius, grid, spec.refine_iters), |x| {
        log_m_at(psi_t, &phi_t, &split_point(x)).unwrap_or(f64::NEG_INFINITY)
    });
    Ok(NormResult {
        value: r.log_value.exp(),
        mode: NormMode::Quadrature,
        err_estimate: 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordData {
    pub a: f64,
    pub w: [f64; 2],
    pub deg: u32,
}

impl CoordData {
    pub fn w(&self) -> C64 {
        C64::new(self.w[0], self.w[1])
    }

    /// The coordinate leaves `ell` bounded.
    pub fn finite(&self) -> bool {
        self.a < 1.0 || (self.w().norm() <= W_ZERO_TOL && self.deg == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    CertifiedSingleFreq,
    Numeric,
}

/// `ell_{z[s]}` in factored form.
#[derive(Clone, Debug)]
pub struct EllProfile {
    pub s: usize,
    pub q: f64,
    pub coords: Vec<CoordData>,
    pub constant_factor: f64,
    pub pure_exponential: bool,
    pub mode: ProfileMode,
    norm: Normalization,
    head_freq: CVector,
}

impl EllProfile {
    pub fn normalization(&self) -> &Normalization {
        &self.norm
    }

    /// Head of the common frequency (zero in numeric mode).
    pub fn head_freq(&self) -> &CVector {
        &self.head_freq
    }

    pub fn finite(&self) -> bool {
        self.coords.iter().all(CoordData::finite)
    }

    pub fn all_contractive(&self) -> bool {
        self.coords.iter().all(|c| c.a < 1.0)
    }
}

pub fn ell_profile(norm: &Normalization, q: f64) -> Result<EllProfile> {
    let s = norm.rank_s;
    if s == 0 {
        return Err(Error::Domain("ell is undefined for rank 0".into()));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Domain(format!("q = {q} must be finite and positive")));
    }
    let n = norm.dim();
    let psi = &norm.psi_t;
    let freq = psi.single_frequency();
    let mode = if freq.is_some() {
        ProfileMode::CertifiedSingleFreq
    } else {
        ProfileMode::Numeric
    };
    let c = freq.clone().unwrap_or_else(|| CVector::zeros(n));
    let coords = (0..s)
        .map(|i| {
            let w = c[i] + norm.b_t[i] * norm.a_t[i];
            CoordData {
                a: norm.a_t[i],
                w: [w.re, w.im],
                deg: psi.degree_in(i),
            }
        })
        .collect();
    let pure = psi.as_pure_exponential();
    let mut log_k = 0.5 * norm.b_t.norm_sqr();
    if let Some((kappa, c)) = &pure {
        log_k += kappa.norm().ln() + 0.5 * c.tail(s).norm_sqr();
    }
    Ok(EllProfile {
        s,
        q,
        coords,
        constant_factor: log_k.exp(),
        pure_exponential: pure.is_some(),
        mode,
        norm: norm.clone(),
        head_freq: c.head(s),
    })
}

/// `ell_{z[s]}` straight from its definition: translation factor times a slice norm.
pub fn ell_direct(norm: &Normalization, q: f64, z_head: &CVector, spec: &QuadSpec) -> Result<f64> {
    let s = norm.rank_s;
    if z_head.dim() != s || s == 0 {
        return Err(Error::Dimension(format!("ell needs a point of C^{s}")));
    }
    let mut full = z_head.0.clone();
    full.resize(norm.dim(), C64::new(0.0, 0.0));
    let phi_z = norm.phi_t().apply(&CVector(full));
    let slice = quad::slice_norm(&norm.psi_t, q, z_head, spec)?;
    Ok((0.5 * (phi_z.norm_sqr() - z_head.norm_sqr())).exp() * slice.value)
}

/// `log ell_{z[s]}` by the definition route at one quadrature resolution.
pub fn log_ell_direct_fast(norm: &Normalization, q: f64, z_head: &CVector, k: usize) -> f64 {
    let s = norm.rank_s;
    let mut sq = norm.tail_b_sqr() - z_head.norm_sqr();
    for i in 0..s {
        sq += (z_head[i] * norm.a_t[i] + norm.b_t[i]).norm_sqr();
    }
    match quad::slice_norm_fast(&norm.psi_t, q, z_head, k) {
        Ok(v) => v.ln() + 0.5 * sq,
        Err(_) => f64::NEG_INFINITY,
    }
}

impl EllProfile {
    fn log_gauss(&self, z: &CVector) -> f64 {
        self.coords
            .iter()
            .zip(z.iter())
            .map(|(c, z)| -0.5 * (1.0 - c.a * c.a) * z.norm_sqr() + (z * c.w().conj()).re)
            .sum()
    }

    fn log_q(&self, z: &CVector, k: usize) -> f64 {
        if self.pure_exponential {
            return 0.0;
        }
        let head_phase: f64 = z.iter().zip(self.head_freq.iter()).map(|(z, c)| (z * c.conj()).re).sum();
        match quad::slice_norm_fast(&self.norm.psi_t, self.q, z, k) {
            Ok(v) => v.ln() - head_phase,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// `log ell_{z[s]}` through the factored form (definition route in numeric mode),
    /// with slice norms at the coarse resolution used inside searches.
    pub fn log_ell_at(&self, z_head: &CVector) -> Result<f64> {
        self.log_ell_at_nodes(z_head, INNER_NODES)
    }

    pub fn log_ell_at_nodes(&self, z_head: &CVector, k: usize) -> Result<f64> {
        if z_head.dim() != self.s {
            return Err(Error::Dimension(format!("ell needs a point of C^{}", self.s)));
        }
        Ok(match self.mode {
            ProfileMode::CertifiedSingleFreq => {
                self.constant_factor.ln() + self.log_gauss(z_head) + self.log_q(z_head, k)
            }
            ProfileMode::Numeric => log_ell_direct_fast(&self.norm, self.q, z_head, k),
        })
    }
}

/// `ell_{z[s]}` with slice norms at the default resolution for `C^{n-s}`.
pub fn ell_at(profile: &EllProfile, z_head: &CVector) -> Result<f64> {
    let k = QuadSpec::for_dim(profile.norm.dim() - profile.s).nodes_per_axis;
    Ok(profile.log_ell_at_nodes(z_head, k)?.exp())
}

/// Where and how far the sup of `ell` is searched.
fn search_frame(profile: &EllProfile) -> (Vec<usize>, CVector, f64) {
    let deg = profile.norm.psi_t.max_degree() as f64;
    let free: Vec<usize> = match profile.mode {
        ProfileMode::CertifiedSingleFreq => (0..profile.s).filter(|&i| profile.coords[i].a < 1.0).collect(),
        ProfileMode::Numeric => (0..profile.s).collect(),
    };
    let mut center = CVector::zeros(profile.s);
    let mut radius: f64 = 1.0;
    match profile.mode {
        ProfileMode::CertifiedSingleFreq => {
            for &i in &free {
                let c = &profile.coords[i];
                let alpha = 0.5 * (1.0 - c.a * c.a);
                center[i] = c.w() / (2.0 * alpha);
                radius = radius.max((4.0 + 2.0 * deg.sqrt()) / alpha.sqrt());
            }
        }
        ProfileMode::Numeric => {
            let amin = profile
                .coords
                .iter()
                .map(|c| 0.5 * (1.0 - c.a * c.a))
                .fold(f64::INFINITY, f64::min)
                .max(0.05);
            let reach = profile.norm.b_t.norm() + max_freq_norm(&profile.norm.psi_t);
            radius = reach / (2.0 * amin) + (4.0 + 2.0 * deg.sqrt()) / amin.sqrt();
        }
    }
    (free, center, radius)
}

/// `ell = sup ell_{z[s]}`, with the argmax when a search ran.
#[derive(Clone, Debug)]
pub struct EllSup {
    pub value: NormResult,
    pub argmax: Option<CVector>,
}

pub fn ell_sup(profile: &EllProfile, spec: &QuadSpec) -> Result<EllSup> {
    if profile.mode == ProfileMode::CertifiedSingleFreq {
        if !profile.finite() {
            return Ok(EllSup { value: NormResult::exact(f64::INFINITY), argmax: None });
        }
        if profile.pure_exponential {
            let mut log = profile.constant_factor.ln();
            let mut argmax = CVector::zeros(profile.s);
            for (i, c) in profile.coords.iter().enumerate() {
                if c.a < 1.0 {
                    log += c.w().norm_sqr() / (2.0 * (1.0 - c.a * c.a));
                    argmax[i] = c.w() / (1.0 - c.a * c.a);
                }
            }
            return Ok(EllSup { value: NormResult::exact(log.exp()), argmax: Some(argmax) });
        }
    }
    let (free, center, radius) = search_frame(profile);
    let s = profile.s;
    let to_point = |x: &[f64]| {
        let mut z = center.clone();
        for (j, &i) in free.iter().enumerate() {
            z[i] += C64::new(x[2 * j], x[2 * j + 1]);
        }
        z
    };
    let grid = spec.sup_grid.unwrap_or_else(|| search::default_grid(2 * free.len()));
    let radius = spec.sup_radius.unwrap_or(radius);
    let r = search::maximize(2 * free.len(), &SearchOptions::new(radius, grid, spec.refine_iters), |x| {
        profile.log_ell_at(&to_point(x)).unwrap_or(f64::NEG_INFINITY)
    });
    let argmax = to_point(&r.argmax);
    debug_assert_eq!(argmax.dim(), s);
    Ok(EllSup {
        value: NormResult {
            value: r.log_value.exp(),
            mode: NormMode::Quadrature,
            err_estimate: 0.0,
        },
        argmax: Some(argmax),
    })
}

/// Growth radii for the sphere evidence used on multi-frequency symbols.
pub const SPHERE_RADII: [f64; 7] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// Unit directions in C^s: the real and imaginary coordinate axes (both signs)
/// plus `extra` fixed-seed random directions.
pub fn probe_directions(s: usize, extra: usize, seed: u64) -> Vec<CVector> {
    use rand_distr::{Distribution, StandardNormal};
    let mut out = Vec::new();
    for i in 0..s {
        for v in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
            let mut d = CVector::zeros(s);
            d[i] = v;
            out.push(d);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let d = CVector(
            (0..s)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect(),
        );
        let nrm = d.norm();
        out.push(d.scale(C64::new(1.0 / nrm, 0.0)));
    }
    out
}

/// Max of `log ell` on each sphere of [`SPHERE_RADII`].
pub fn sphere_log_maxima(profile: &EllProfile, directions: &[CVector]) -> Result<Vec<f64>> {
    SPHERE_RADII
        .iter()
        .map(|&r| {
            let mut m = f64::NEG_INFINITY;
            for d in directions {
                m = m.max(profile.log_ell_at(&d.scale(C64::new(r, 0.0)))?);
            }
            Ok(m)
        })
        .collect()
}

/// Growth evidence read off sphere maxima.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthEvidence {
    pub finite: bool,
    pub decays: bool,
}

pub fn growth_from_maxima(m: &[f64]) -> GrowthEvidence {
    let k = m.len();
    let peak = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let growing = m[k - 1] - m[k - 2] > 0.1 && m[k - 2] - m[k - 3] > 0.05;
    GrowthEvidence {
        finite: !growing,
        decays: !growing && m[k - 1] < peak - 6.0 * std::f64::consts::LN_10,
    }
}

/// `limsup_{z[s] -> inf} ell_{z[s]}`.
pub fn ell_limsup(profile: &EllProfile, spec: &QuadSpec) -> Result<NormResult> {
    match profile.mode {
        ProfileMode::CertifiedSingleFreq => {
            if !profile.finite() {
                return Err(Error::Domain("limsup requested for an unbounded profile".into()));
            }
            if profile.all_contractive() {
                return Ok(NormResult::exact(0.0));
            }
            Ok(ell_sup(profile, spec)?.value)
        }
        ProfileMode::Numeric => {
            let dirs = probe_directions(profile.s, 8, spec.seed);
            let m = sphere_log_maxima(profile, &dirs)?;
            let ev = growth_from_maxima(&m);
            if !ev.finite {
                return Err(Error::Domain("limsup requested for an unbounded profile".into()));
            }
            let value = if ev.decays { 0.0 } else { m[m.len() - 1].exp() };
            Ok(NormResult { value, mode: NormMode::Quadrature, err_estimate: 0.0 })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unbounded,
    BoundedNotCompact,
    Compact,
}

impl Verdict {
    pub fn bounded(self) -> bool {
        self != Verdict::Unbounded
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassMode {
    Certified,
    NumericEvidence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub mode: ClassMode,
    pub certificate: Vec<String>,
}

fn fmt_sigma(sigma: &[f64]) -> String {
    let parts: Vec<String> = sigma.iter().map(|s| format!("{s:.12}")).collect();
    format!("singular values ({})", parts.join(", "))
}

fn coord_line(i: usize, c: &CoordData) -> String {
    format!(
        "coordinate {i}: a = {:.12}, |w| = {:.6e}, degree {}",
        c.a,
        c.w().norm(),
        c.deg
    )
}

pub fn classify(problem: &WcoProblem) -> Result<Classification> {
    classify_with(problem, &QuadSpec::for_dim(problem.dim()))
}

pub fn classify_with(problem: &WcoProblem, spec: &QuadSpec) -> Result<Classification> {
    let t = linalg::svd(&problem.phi.a, DEFAULT_RANK_TOL)?;
    let mut cert = vec![fmt_sigma(&t.sigma)];
    if t.sigma[0] > 1.0 {
        cert.push(format!("spectral norm {} > 1: no bounded operator has such a map", t.sigma[0]));
        return Ok(Classification { verdict: Verdict::Unbounded, mode: ClassMode::Certified, certificate: cert });
    }
    if t.rank_s == 0 {
        cert.push("A = 0: W f = psi f(b) has rank one, hence compact".into());
        return Ok(Classification { verdict: Verdict::Compact, mode: ClassMode::Certified, certificate: cert });
    }
    let norm = Normalization::from_factors(&problem.psi, &problem.phi.b, t.v, t.sigma, t.u, t.rank_s)?;
    let profile = ell_profile(&norm, problem.q)?;
    let (p, q) = (problem.p, problem.q);
    cert.push(format!("rank s = {}, p = {p}, q = {q}", profile.s));

    if profile.mode == ProfileMode::Numeric {
        cert.push("psi has several frequencies: verdict from sphere evidence on ell".into());
        let dirs = probe_directions(profile.s, 8, spec.seed);
        let m = sphere_log_maxima(&profile, &dirs)?;
        let summary: Vec<String> = SPHERE_RADII
            .iter()
            .zip(&m)
            .map(|(r, v)| format!("R = {r}: max log ell = {v:.6}"))
            .collect();
        cert.extend(summary);
        let ev = growth_from_maxima(&m);
        let verdict = if p <= q {
            match (ev.finite, ev.decays) {
                (false, _) => Verdict::Unbounded,
                (true, false) => Verdict::BoundedNotCompact,
                (true, true) => Verdict::Compact,
            }
        } else if ev.decays {
            Verdict::Compact
        } else {
            Verdict::Unbounded
        };
        return Ok(Classification { verdict, mode: ClassMode::NumericEvidence, certificate: cert });
    }

    for (i, c) in profile.coords.iter().enumerate() {
        cert.push(coord_line(i, c));
    }
    let verdict = if p <= q {
        if !profile.finite() {
            let bad = profile.coords.iter().position(|c| !c.finite()).unwrap_or(0);
            cert.push(format!("p <= q: coordinate {bad} has a = 1 with w != 0 or positive degree, so ell is infinite"));
            Verdict::Unbounded
        } else if profile.all_contractive() {
            cert.push("p <= q: all a_i < 1, so ell is finite and tends to 0".into());
            Verdict::Compact
        } else {
            cert.push("p <= q: ell finite; a unit coordinate keeps it from tending to 0".into());
            Verdict::BoundedNotCompact
        }
    } else if profile.all_contractive() {
        cert.push(format!("q < p: all a_i < 1, so ell lies in L^{}", p * q / (p - q)));
        Verdict::Compact
    } else {
        cert.push(format!("q < p: a unit coordinate keeps ell out of L^{}", p * q / (p - q)));
        Verdict::Unbounded
    };
    Ok(Classification { verdict, mode: ClassMode::Certified, certificate: cert })
}

/// Classification of the composition operator `C_phi` (`psi = 1`) from `A` and `b` alone.
pub fn composition_criterion(phi: &AffineMap, p: f64, q: f64) -> Result<Classification> {
    let t = linalg::svd(&phi.a, DEFAULT_RANK_TOL)?;
    let mut cert = vec![fmt_sigma(&t.sigma)];
    let top = t.sigma[0];
    let verdict = if top > 1.0 {
        cert.push(format!("spectral norm {top} > 1"));
        Verdict::Unbounded
    } else if q < p {
        if top < 1.0 {
            cert.push("q < p and ||A|| < 1".into());
            Verdict::Compact
        } else {
            cert.push("q < p and ||A|| = 1".into());
            Verdict::Unbounded
        }
    } else {
        let b_t = t.v.adjoint().mul_vec(&phi.b);
        let j = t.sigma.iter().filter(|&&s| s == 1.0).count();
        cert.push(format!("{j} unit singular values"));
        if let Some(i) = (0..j).find(|&i| b_t[i].norm() > W_ZERO_TOL) {
            cert.push(format!("<A zeta, b> != 0 along unit direction {i} (|b~_{i}| = {:.6e})", b_t[i].norm()));
            Verdict::Unbounded
        } else if j == 0 {
            cert.push("||A|| < 1".into());
            Verdict::Compact
        } else {
            cert.push("b is orthogonal to the isometric directions of A".into());
            Verdict::BoundedNotCompact
        }
    };
    Ok(Classification { verdict, mode: ClassMode::Certified, certificate: cert })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    /// Exact norm (constant map).
    Exact,
    /// Closed-form expressions in the certified quantities.
    ClosedForm,
    /// Built from searched or integrated values.
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
    pub essential_lower: Option<f64>,
    pub essential_upper: Option<f64>,
    pub upper_is_up_to_universal_constant: bool,
    pub mode: BoundsMode,
}

/// Exact norm for `A = 0`: `e^{|b|^2/2} ||psi||_q`.
pub fn rank_zero_norm(problem: &WcoProblem, spec: &QuadSpec) -> Result<NormResult> {
    let psi_norm = quad::fock_norm(&problem.psi, problem.q, spec)?;
    Ok(NormResult {
        value: (0.5 * problem.phi.b.norm_sqr()).exp() * psi_norm.value,
        mode: psi_norm.mode,
        err_estimate: (0.5 * problem.phi.b.norm_sqr()).exp() * psi_norm.err_estimate,
    })
}

pub fn norm_bounds(problem: &WcoProblem) -> Result<NormBounds> {
    norm_bounds_with(problem, &QuadSpec::for_dim(problem.dim()))
}

pub fn norm_bounds_with(problem: &WcoProblem, spec: &QuadSpec) -> Result<NormBounds> {
    let class = classify_with(problem, spec)?;
    if class.verdict == Verdict::Unbounded {
        return Err(Error::Domain("the operator is unbounded".into()));
    }
    let norm = normalize(problem)?;
    let (n, p, q) = (problem.dim() as f64, problem.p, problem.q);
    if norm.rank_s == 0 {
        let v = rank_zero_norm(problem, spec)?;
        return Ok(NormBounds {
            lower: v.value,
            upper: v.value,
            essential_lower: None,
            essential_upper: None,
            upper_is_up_to_universal_constant: false,
            mode: if v.mode == NormMode::ClosedForm { BoundsMode::Exact } else { BoundsMode::Numeric },
        });
    }
    let det = norm.head_det()?;
    let profile = ell_profile(&norm, q)?;
    if p <= q {
        let ell = ell_sup(&profile, spec)?.value;
        let factor = det.powf(-2.0 / q) * (q / p).powf(n / q);
        Ok(NormBounds {
            lower: ell.value,
            upper: factor * ell.value,
            essential_lower: None,
            essential_upper: None,
            upper_is_up_to_universal_constant: false,
            mode: if ell.mode == NormMode::ClosedForm { BoundsMode::ClosedForm } else { BoundsMode::Numeric },
        })
    } else {
        let rep = crate::carleson::carleson_integral(&norm, p, q, spec)?;
        let lr = rep.lr_norm.value;
        Ok(NormBounds {
            lower: det.powf(2.0 * (p - q) / (p * q)) * (-0.5 * norm.tail_b_sqr()).exp() * lr,
            upper: det.powf(-2.0 / p) * lr,
            essential_lower: None,
            essential_upper: None,
            upper_is_up_to_universal_constant: true,
            mode: if rep.lr_norm.mode == NormMode::ClosedForm { BoundsMode::ClosedForm } else { BoundsMode::Numeric },
        })
    }
}

pub fn essential_norm_bounds(problem: &WcoProblem) -> Result<NormBounds> {
    essential_norm_bounds_with(problem, &QuadSpec::for_dim(problem.dim()))
}

pub fn essential_norm_bounds_with(problem: &WcoProblem, spec: &QuadSpec) -> Result<NormBounds> {
    let (p, q) = (problem.p, problem.q);
    if !(p > 1.0 && p <= q) {
        return Err(Error::Unsupported(format!(
            "essential-norm estimates need 1 < p <= q < inf; got p = {p}, q = {q}"
        )));
    }
    let mut b = norm_bounds_with(problem, spec)?;
    let class = classify_with(problem, spec)?;
    if class.verdict == Verdict::Compact {
        b.essential_lower = Some(0.0);
        b.essential_upper = Some(0.0);
        return Ok(b);
    }
    let norm = normalize(problem)?;
    let profile = ell_profile(&norm, q)?;
    let limsup = ell_limsup(&profile, spec)?.value;
    let n = problem.dim() as f64;
    let factor = 2.0 * norm.head_det()?.powf(-2.0 / q) * (q / p).powf(n / q);
    b.essential_lower = Some(limsup);
    b.essential_upper = Some(factor * limsup);
    Ok(b)
}

/// `int_C exp(-alpha |z|^2 + Re(z conj(beta))) dA = (pi / alpha) exp(|beta|^2 / (4 alpha))`.
pub fn gaussian_integral(alpha: f64, beta: C64) -> f64 {
    PI / alpha * (beta.norm_sqr() / (4.0 * alpha)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{MultiIndex, Term};
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag_problem(a: &[f64], b: &[(f64, f64)], psi: ExpPoly, p: f64, q: f64) -> WcoProblem {
        let phi = AffineMap::new(
            CMatrix::diag_real(a),
            CVector(b.iter().map(|&(x, y)| c(x, y)).collect()),
        )
        .unwrap();
        WcoProblem::new(psi, phi, p, q).unwrap()
    }

    fn random_cvec(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CVector {
        CVector((0..n).map(|_| c(rng.gen_range(-r..r), rng.gen_range(-r..r))).collect())
    }

    #[test]
    fn admissibility_examples() {
        let two = diag_problem(&[2.0], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        assert_eq!(admissibility(&two).unwrap().0, Admissibility::InadmissibleNormGt1);
        let id = diag_problem(&[1.0], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        assert_eq!(admissibility(&id).unwrap().0, Admissibility::Admissible);
        let d = diag_problem(&[1.0, 0.5], &[(0.0, 0.0), (0.0, 0.0)], ExpPoly::one(2), 2.0, 2.0);
        assert_eq!(admissibility(&d).unwrap().0, Admissibility::Admissible);
    }

    #[test]
    fn normalization_of_diagonal_is_trivial() {
        let psi = ExpPoly::kernel(&CVector(vec![c(0.3, 0.1), c(-0.2, 0.4)]));
        let pr = diag_problem(&[0.9, 0.4], &[(0.5, 0.0), (0.0, 1.0)], psi.clone(), 2.0, 2.0);
        let nm = normalize(&pr).unwrap();
        assert!(nm.u.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        assert!(nm.v.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
        assert_eq!(nm.a_t, vec![0.9, 0.4]);
        assert!(nm.b_t.max_abs_diff(&pr.phi.b) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<CVector> = (0..20).map(|_| random_cvec(&mut rng, 2, 2.0)).collect();
        assert!(nm.psi_t.max_rel_diff_at(&psi, &pts).unwrap() < 1e-12);
    }

    #[test]
    fn unitary_map_normalizes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = linalg::random_unitary(3, &mut rng);
        let pr = WcoProblem::new(ExpPoly::one(3), AffineMap::linear(u), 2.0, 2.0).unwrap();
        let nm = normalize(&pr).unwrap();
        assert_eq!(nm.a_t, vec![1.0, 1.0, 1.0]);
        assert_eq!(nm.rank_s, 3);
    }

    #[test]
    fn conjugation_identity_holds_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let v0 = linalg::random_unitary(2, &mut rng);
            let u0 = linalg::random_unitary(2, &mut rng);
            let a = v0.scale_cols(&[0.8, 0.35]).mul(&u0);
            let b = random_cvec(&mut rng, 2, 1.0);
            let psi = ExpPoly::new(
                2,
                vec![
                    Term { coeff: c(1.0, 0.5), power: MultiIndex(vec![1, 0]), freq: random_cvec(&mut rng, 2, 0.5) },
                    Term { coeff: c(-0.3, 0.2), power: MultiIndex(vec![0, 0]), freq: random_cvec(&mut rng, 2, 0.5) },
                ],
            )
            .unwrap();
            let pr = WcoProblem::new(psi, AffineMap::new(a, b).unwrap(), 2.0, 2.0).unwrap();
            let nm = normalize(&pr).unwrap();
            let f = ExpPoly::new(
                2,
                vec![
                    Term { coeff: c(0.7, 0.0), power: MultiIndex(vec![0, 2]), freq: random_cvec(&mut rng, 2, 0.5) },
                    Term { coeff: c(0.1, -0.4), power: MultiIndex(vec![1, 1]), freq: CVector::zeros(2) },
                ],
            )
            .unwrap();
            let lhs = pr.apply(&f).unwrap();
            let f_v = f.compose_affine(&AffineMap::linear(nm.v.clone())).unwrap();
            let rhs = crate::funcspace::apply_wco(&nm.psi_t, &nm.phi_t(), &f_v).unwrap();
            for _ in 0..10 {
                let z = random_cvec(&mut rng, 2, 2.0);
                let l = lhs.eval(&z).unwrap();
                let r = rhs.eval(&nm.u.mul_vec(&z)).unwrap();
                assert!((l - r).norm() <= 1e-9 * l.norm().max(1.0));
            }
        }
    }

    #[test]
    fn m_examples() {
        let id = diag_problem(&[1.0], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        let z = CVector(vec![c(1.3, -0.4)]);
        assert!((m_at(&id.psi, &id.phi, &z).unwrap() - 1.0).abs() < 1e-15);
        assert!((m_sup(&id, &QuadSpec::default()).unwrap().value - 1.0).abs() < 1e-15);

        let half = diag_problem(&[0.5], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        let expect = (-3.0 / 8.0 * z.norm_sqr()).exp();
        assert!((m_at(&half.psi, &half.phi, &z).unwrap() - expect).abs() < 1e-15);
        assert!((m_sup(&half, &QuadSpec::default()).unwrap().value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn m_is_invariant_under_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v0 = linalg::random_unitary(2, &mut rng);
        let u0 = linalg::random_unitary(2, &mut rng);
        let a = v0.scale_cols(&[1.0, 0.6]).mul(&u0);
        let psi = ExpPoly::kernel(&random_cvec(&mut rng, 2, 0.7));
        let pr = WcoProblem::new(psi, AffineMap::new(a, random_cvec(&mut rng, 2, 1.0)).unwrap(), 2.0, 2.0).unwrap();
        let nm = normalize(&pr).unwrap();
        for _ in 0..100 {
            let z = random_cvec(&mut rng, 2, 2.0);
            let lhs = m_at(&pr.psi, &pr.phi, &z).unwrap();
            let rhs = m_at(&nm.psi_t, &nm.phi_t(), &nm.u.mul_vec(&z)).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
        }
    }

    #[test]
    fn profile_for_constant_symbol() {
        let pr = diag_problem(&[1.0, 0.5], &[(0.0, 0.0), (1.0, 0.0)], ExpPoly::one(2), 2.0, 2.0);
        let prof = ell_profile(&normalize(&pr).unwrap(), 2.0).unwrap();
        assert_eq!(prof.mode, ProfileMode::CertifiedSingleFreq);
        assert_eq!(prof.coords[0].w(), c(0.0, 0.0));
        assert_eq!(prof.coords[1].w(), c(0.5, 0.0));
        assert!(prof.finite() && !prof.all_contractive());
        // sup over z2 of exp((|0.5 z2 + 1|^2 - |z2|^2)/2) = exp(1/2 + 0.25/(2 * 0.75))
        let expect = (0.5 + 0.25 / 1.5f64).exp();
        let sup = ell_sup(&prof, &QuadSpec::default()).unwrap();
        assert!((sup.value.value - expect).abs() < 1e-12 * expect);
        let grid = search::maximize(4, &SearchOptions::new(6.0, 25, 400), |x| {
            prof.log_ell_at(&split_point(x)).unwrap()
        });
        assert!((grid.log_value.exp() - expect).abs() < 1e-8 * expect);
        let ls = ell_limsup(&prof, &QuadSpec::default()).unwrap();
        assert!((ls.value - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn half_map_profile() {
        let pr = diag_problem(&[0.5], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        let prof = ell_profile(&normalize(&pr).unwrap(), 2.0).unwrap();
        let z = CVector(vec![c(0.7, 1.1)]);
        let expect = (-3.0 / 8.0 * z.norm_sqr()).exp();
        assert!((ell_at(&prof, &z).unwrap() - expect).abs() < 1e-15);
        assert_eq!(ell_sup(&prof, &QuadSpec::default()).unwrap().value.value, 1.0);
        assert_eq!(ell_limsup(&prof, &QuadSpec::default()).unwrap().value, 0.0);
    }

    #[test]
    fn translation_along_unit_direction_is_unbounded() {
        let pr = diag_problem(&[1.0], &[(0.4, -0.3)], ExpPoly::one(1), 2.0, 2.0);
        let nm = normalize(&pr).unwrap();
        let prof = ell_profile(&nm, 2.0).unwrap();
        assert!(!prof.finite());
        assert_eq!(ell_sup(&prof, &QuadSpec::default()).unwrap().value.value, f64::INFINITY);
        // along z = t * b / |b| the definition grows like e^{|b| t}
        let dir = pr.phi.b.scale(C64::new(1.0 / pr.phi.b.norm(), 0.0));
        let v10 = ell_direct(&nm, 2.0, &dir.scale(c(10.0, 0.0)), &QuadSpec::default()).unwrap();
        let v20 = ell_direct(&nm, 2.0, &dir.scale(c(20.0, 0.0)), &QuadSpec::default()).unwrap();
        assert!(((v20 / v10).ln() - 10.0 * pr.phi.b.norm()).abs() < 1e-9);
        assert_eq!(classify(&pr).unwrap().verdict, Verdict::Unbounded);
    }

    #[test]
    fn profile_and_definition_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let spec = QuadSpec::for_dim(2);
        for q in [1.0, 2.0, 3.5] {
            let psi = ExpPoly::new(
                3,
                vec![
                    Term { coeff: c(1.0, 0.2), power: MultiIndex(vec![1, 0, 1]), freq: CVector(vec![c(0.2, 0.1), c(-0.3, 0.0), c(0.1, 0.2)]) },
                    Term { coeff: c(0.5, 0.0), power: MultiIndex(vec![0, 1, 0]), freq: CVector(vec![c(0.2, 0.1), c(-0.3, 0.0), c(0.1, 0.2)]) },
                ],
            )
            .unwrap();
            let pr = diag_problem(&[0.9, 0.0, 0.0], &[(0.3, 0.0), (0.0, 0.5), (0.2, 0.2)], psi, q, q);
            let nm = normalize(&pr).unwrap();
            let prof = ell_profile(&nm, q).unwrap();
            assert_eq!(prof.s, 1);
            for _ in 0..5 {
                let z = random_cvec(&mut rng, 1, 2.0);
                let a = ell_at(&prof, &z).unwrap();
                let b = ell_direct(&nm, q, &z, &spec).unwrap();
                assert!((a - b).abs() < 1e-6 * b, "q={q}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn m_is_dominated_by_ell() {
        let psi = ExpPoly::kernel(&CVector(vec![c(0.3, 0.0), c(0.5, -0.2)]));
        let pr = diag_problem(&[0.7, 0.0], &[(0.2, 0.1), (0.4, 0.0)], psi, 2.0, 2.0);
        let m = m_sup(&pr, &QuadSpec::default()).unwrap().value;
        let prof = ell_profile(&normalize(&pr).unwrap(), 2.0).unwrap();
        let l = ell_sup(&prof, &QuadSpec::default()).unwrap().value.value;
        assert!(m <= l * (1.0 + 1e-12), "{m} > {l}");
    }

    #[test]
    fn classification_examples() {
        let b = CVector(vec![c(0.5, 0.5)]);
        let k = ExpPoly::kernel(&CVector(vec![c(0.2, 0.0)]));
        let rank0 = WcoProblem::new(k, AffineMap::constant(b), 2.0, 1.0).unwrap();
        assert_eq!(classify(&rank0).unwrap().verdict, Verdict::Compact);

        let id_lt = diag_problem(&[1.0], &[(0.0, 0.0)], ExpPoly::one(1), 3.0, 2.0);
        assert_eq!(classify(&id_lt).unwrap().verdict, Verdict::Unbounded);
        let id = diag_problem(&[1.0], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        assert_eq!(classify(&id).unwrap().verdict, Verdict::BoundedNotCompact);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let n = rng.gen_range(1..=3);
            let v0 = linalg::random_unitary(n, &mut rng);
            let u0 = linalg::random_unitary(n, &mut rng);
            let sig: Vec<f64> = (0..n).map(|_| [0.0, 0.3, 0.9, 1.0][rng.gen_range(0..4)]).collect();
            let mut sig = sig;
            sig.sort_by(|a, b| b.total_cmp(a));
            let bt: Vec<C64> = (0..n).map(|_| if rng.gen_bool(0.5) { c(0.0, 0.0) } else { c(0.5, -0.2) }).collect();
            let a = v0.scale_cols(&sig).mul(&u0);
            let b = v0.mul_vec(&CVector(bt));
            let phi = AffineMap::new(a, b).unwrap();
            for (p, q) in [(1.5, 2.0), (2.0, 2.0), (3.0, 1.5)] {
                let pr = WcoProblem::new(ExpPoly::one(n), phi.clone(), p, q).unwrap();
                assert_eq!(
                    classify(&pr).unwrap().verdict,
                    composition_criterion(&phi, p, q).unwrap().verdict,
                    "sigma {sig:?} p {p} q {q}"
                );
            }
        }
    }

    #[test]
    fn composition_criterion_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = linalg::random_unitary(2, &mut rng);
        let lin = AffineMap::linear(u.clone());
        assert_eq!(composition_criterion(&lin, 2.0, 3.0).unwrap().verdict, Verdict::BoundedNotCompact);
        let moved = AffineMap::new(u, CVector(vec![c(0.1, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(composition_criterion(&moved, 2.0, 3.0).unwrap().verdict, Verdict::Unbounded);
        let shrink = AffineMap::new(CMatrix::diag_real(&[0.9, 0.2]), CVector(vec![c(3.0, 0.0), c(1.0, 1.0)])).unwrap();
        assert_eq!(composition_criterion(&shrink, 3.0, 2.0).unwrap().verdict, Verdict::Compact);
    }

    #[test]
    fn norm_bound_examples() {
        let cvec = CVector(vec![c(0.4, -0.3), c(0.1, 0.2)]);
        let b = CVector(vec![c(0.5, 0.0), c(-0.2, 0.6)]);
        let rank0 = WcoProblem::new(ExpPoly::kernel(&cvec), AffineMap::constant(b.clone()), 1.5, 2.5).unwrap();
        let nb = norm_bounds(&rank0).unwrap();
        let exact = (0.5 * (b.norm_sqr() + cvec.norm_sqr())).exp();
        assert_eq!(nb.mode, BoundsMode::Exact);
        assert!((nb.lower - exact).abs() < 1e-12 * exact && nb.lower == nb.upper);

        let half = diag_problem(&[0.5], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        let nb = norm_bounds(&half).unwrap();
        assert!((nb.lower - 1.0).abs() < 1e-15 && (nb.upper - 2.0).abs() < 1e-12);

        let id = diag_problem(&[1.0, 1.0], &[(0.0, 0.0), (0.0, 0.0)], ExpPoly::one(2), 3.0, 3.0);
        let nb = norm_bounds(&id).unwrap();
        assert_eq!((nb.lower, nb.upper), (1.0, 1.0));

        let two = diag_problem(&[2.0], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        assert!(norm_bounds(&two).is_err());
    }

    #[test]
    fn essential_norm_examples() {
        let half = diag_problem(&[0.5], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        let e = essential_norm_bounds(&half).unwrap();
        assert_eq!((e.essential_lower, e.essential_upper), (Some(0.0), Some(0.0)));

        let id = diag_problem(&[1.0], &[(0.0, 0.0)], ExpPoly::one(1), 2.0, 2.0);
        let e = essential_norm_bounds(&id).unwrap();
        assert_eq!(e.essential_lower, Some(1.0));
        assert!((e.essential_upper.unwrap() - 2.0).abs() < 1e-12);

        let rank0 = WcoProblem::new(ExpPoly::one(1), AffineMap::constant(CVector(vec![c(1.0, 0.0)])), 2.0, 2.0).unwrap();
        let e = essential_norm_bounds(&rank0).unwrap();
        assert_eq!((e.essential_lower, e.essential_upper), (Some(0.0), Some(0.0)));

        let low = diag_problem(&[1.0], &[(0.0, 0.0)], ExpPoly::one(1), 1.0, 2.0);
        assert!(matches!(essential_norm_bounds(&low), Err(Error::Unsupported(_))));
        let rev = diag_problem(&[0.5], &[(0.0, 0.0)], ExpPoly::one(1), 3.0, 2.0);
        assert!(matches!(essential_norm_bounds(&rev), Err(Error::Unsupported(_))));
    }

    #[test]
    fn polynomial_symbol_uses_search() {
        // psi = z1 with phi = 0.6 z on C^1: ell_z = |z| e^{-0.32 |z|^2}, sup at |z|^2 = 1/0.64
        let psi = ExpPoly::monomial(c(1.0, 0.0), MultiIndex(vec![1]));
        let pr = diag_problem(&[0.6], &[(0.0, 0.0)], psi, 2.0, 2.0);
        let prof = ell_profile(&normalize(&pr).unwrap(), 2.0).unwrap();
        assert!(!prof.pure_exponential);
        let sup = ell_sup(&prof, &QuadSpec::default()).unwrap();
        let r2: f64 = 1.0 / 0.64;
        let expect = r2.sqrt() * (-0.32 * r2).exp();
        assert!((sup.value.value - expect).abs() < 1e-9 * expect);
        assert_eq!(classify(&pr).unwrap().verdict, Verdict::Compact);
    }

    #[test]
    fn multi_frequency_gets_numeric_evidence() {
        let psi = ExpPoly::kernel(&CVector(vec![c(0.3, 0.0)]))
            .add(&ExpPoly::kernel(&CVector(vec![c(0.0, 0.5)])))
            .unwrap();
        let compact = diag_problem(&[0.5], &[(0.0, 0.0)], psi.clone(), 2.0, 2.0);
        let cl = classify(&compact).unwrap();
        assert_eq!((cl.verdict, cl.mode), (Verdict::Compact, ClassMode::NumericEvidence));
        let unit = diag_problem(&[1.0], &[(0.0, 0.0)], psi, 2.0, 2.0);
        assert_eq!(classify(&unit).unwrap().verdict, Verdict::Unbounded);
    }
}
