//! Fock norms of exponential polynomials.
//!
//! `||f||_{n,p} = ((p / 2pi)^n  int_{C^n} |f|^p exp(-p|z|^2/2) dA)^{1/p}`.
//!
//! Three routes: closed forms where the Gaussian integral is exact (a single
//! pure exponential term, or any `f` when `p = 2`), product Gauss-Hermite
//! quadrature in the 2n real variables, and a Monte Carlo cross-check.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{binomial, ExpPoly, MultiIndex};
use crate::linalg::{CVector, C64};
use crate::search::{self, SearchOptions};
use statrs::function::gamma::ln_gamma;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadMethod {
    GaussHermite,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub method: QuadMethod,
    pub nodes_per_axis: usize,
    pub samples: usize,
    pub seed: u64,
    /// Sup-search radius; `None` derives it from the function.
    pub sup_radius: Option<f64>,
    /// Sup-search grid points per real axis; `None` picks by dimension.
    pub sup_grid: Option<usize>,
    pub refine_iters: usize,
    /// Use exact Gaussian integrals when available.
    pub allow_closed_form: bool,
    /// Fail instead of returning a quadrature result whose relative error estimate exceeds this.
    pub max_rel_err: Option<f64>,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            method: QuadMethod::GaussHermite,
            nodes_per_axis: 40,
            samples: 200_000,
            seed: 0x5eed,
            sup_radius: None,
            sup_grid: None,
            refine_iters: 400,
            allow_closed_form: true,
            max_rel_err: None,
        }
    }
}

impl QuadSpec {
    /// Default node count for functions on C^n.
    pub fn for_dim(n: usize) -> Self {
        QuadSpec {
            nodes_per_axis: if n <= 2 { 40 } else { 24 },
            ..Default::default()
        }
    }

    pub fn quadrature_only(mut self) -> Self {
        self.allow_closed_form = false;
        self
    }

    pub fn with_nodes(mut self, k: usize) -> Self {
        self.nodes_per_axis = k;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub mode: NormMode,
    pub err_estimate: f64,
}

impl NormResult {
    pub fn exact(value: f64) -> Self {
        NormResult {
            value,
            mode: NormMode::ClosedForm,
            err_estimate: 0.0,
        }
    }
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)` on R.
pub fn gauss_hermite(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1, "need at least one node");
    let pim4 = PI.powf(-0.25);
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    let nf = k as f64;
    let m = (k + 1) / 2;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..k {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[k - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[k - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1, "need at least one node");
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    let nf = k as f64;
    for i in 0..(k + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..k {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[k - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[k - 1 - i] = w[i];
    }
    (x, w)
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!("exponent p = {p} must be finite and positive")));
    }
    Ok(())
}

/// Centre for the shifted Gaussian weight: frequency average weighted by term size.
fn quadrature_center(f: &ExpPoly) -> CVector {
    let n = f.dim();
    let logs: Vec<f64> = f
        .terms()
        .iter()
        .map(|t| {
            let c2 = t.freq.norm_sqr();
            t.coeff.norm().ln() + 0.5 * c2 + 0.5 * t.power.total() as f64 * (1.0 + c2).ln()
        })
        .collect();
    let lmax = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut center = CVector::zeros(n);
    let mut total = 0.0;
    for (t, l) in f.terms().iter().zip(&logs) {
        let wgt = (l - lmax).exp();
        total += wgt;
        for i in 0..n {
            center[i] += t.freq[i] * wgt;
        }
    }
    if total > 0.0 {
        center.scale(C64::new(1.0 / total, 0.0))
    } else {
        center
    }
}

/// `||f||_{n,p}^p` by product Gauss-Hermite with `k` nodes per real axis.
fn gh_power_integral(f: &ExpPoly, p: f64, k: usize) -> f64 {
    let n = f.dim();
    if f.is_zero() {
        return 0.0;
    }
    let sigma = (2.0 / p).sqrt();
    let mu = quadrature_center(f);
    let (x, w) = gauss_hermite(k);
    let g = k * k;
    let terms = f.terms();
    let nt = terms.len();

    // per-coordinate tables: weight[c][g] and factor[c][j][g]
    let mut weights = vec![vec![0.0; g]; n];
    let mut tables = vec![vec![vec![C64::new(0.0, 0.0); g]; nt]; n];
    for c in 0..n {
        for a in 0..k {
            for b in 0..k {
                let gi = a * k + b;
                let t = C64::new(x[a], x[b]);
                let zc = mu[c] + t * sigma;
                weights[c][gi] = w[a] * w[b];
                let damp = -0.5 * (zc.norm_sqr() - sigma * sigma * t.norm_sqr());
                for (j, term) in terms.iter().enumerate() {
                    let pw = term.power.0[c];
                    let mono = if pw > 0 { zc.powu(pw) } else { C64::new(1.0, 0.0) };
                    tables[c][j][gi] = mono * (zc * term.freq[c].conj() + damp).exp();
                }
            }
        }
    }
    let coeffs: Vec<C64> = terms.iter().map(|t| t.coeff).collect();
    let half_p = 0.5 * p;

    fn recurse(
        level: usize,
        partial: &[C64],
        weight: f64,
        weights: &[Vec<f64>],
        tables: &[Vec<Vec<C64>>],
        half_p: f64,
        scratch: &mut Vec<Vec<C64>>,
    ) -> f64 {
        let n = weights.len();
        let g = weights[level].len();
        let nt = partial.len();
        let mut acc = 0.0;
        if level == n - 1 {
            for gi in 0..g {
                let mut s = C64::new(0.0, 0.0);
                for j in 0..nt {
                    s += partial[j] * tables[level][j][gi];
                }
                acc += weight * weights[level][gi] * s.norm_sqr().powf(half_p);
            }
            return acc;
        }
        let mut next = std::mem::take(&mut scratch[level]);
        next.resize(nt, C64::new(0.0, 0.0));
        for gi in 0..g {
            for j in 0..nt {
                next[j] = partial[j] * tables[level][j][gi];
            }
            acc += recurse(
                level + 1,
                &next,
                weight * weights[level][gi],
                weights,
                tables,
                half_p,
                scratch,
            );
        }
        scratch[level] = next;
        acc
    }

    let chunks: Vec<f64> = (0..g)
        .into_par_iter()
        .map(|g0| {
            let partial: Vec<C64> = (0..nt).map(|j| coeffs[j] * tables[0][j][g0]).collect();
            if n == 1 {
                return weights[0][g0] * partial.iter().sum::<C64>().norm_sqr().powf(half_p);
            }
            let mut scratch = vec![Vec::new(); n];
            recurse(1, &partial, weights[0][g0], &weights, &tables, half_p, &mut scratch)
        })
        .collect();
    chunks.iter().sum::<f64>() / PI.powi(n as i32)
}

fn monte_carlo_norm(f: &ExpPoly, p: f64, spec: &QuadSpec) -> Result<NormResult> {
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sd = (1.0 / p).sqrt();
    let samples = spec.samples.max(2);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut z = CVector::zeros(n);
    for _ in 0..samples {
        for i in 0..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            z[i] = C64::new(re * sd, im * sd);
        }
        let v = f.eval(&z)?.norm().powf(p);
        sum += v;
        sum2 += v * v;
    }
    let m = sum / samples as f64;
    let var = (sum2 / samples as f64 - m * m).max(0.0);
    let se = (var / samples as f64).sqrt();
    let value = m.powf(1.0 / p);
    let err = if m > 0.0 { value / p * se / m } else { 0.0 };
    Ok(NormResult {
        value,
        mode: NormMode::MonteCarlo,
        err_estimate: err,
    })
}

/// `||f||_{n,p}` for finite `p > 0`.
pub fn fock_norm(f: &ExpPoly, p: f64, spec: &QuadSpec) -> Result<NormResult> {
    check_p(p)?;
    if f.is_zero() {
        return Ok(NormResult::exact(0.0));
    }
    if spec.allow_closed_form {
        if let Some((c, freq)) = f.as_pure_exponential() {
            return Ok(NormResult::exact(c.norm() * (0.5 * freq.norm_sqr()).exp()));
        }
        if let [t] = f.terms() {
            if t.freq.norm_sqr() == 0.0 {
                return Ok(NormResult::exact(t.coeff.norm() * monomial_log_norm(&t.power, p).exp()));
            }
        }
        if p == 2.0 {
            return Ok(NormResult::exact(f2_inner(f, f)?.re.max(0.0).sqrt()));
        }
    }
    match spec.method {
        QuadMethod::MonteCarlo => monte_carlo_norm(f, p, spec),
        QuadMethod::GaussHermite => {
            let k = spec.nodes_per_axis.max(2);
            let main = gh_power_integral(f, p, k).powf(1.0 / p);
            let half = gh_power_integral(f, p, (k / 2).max(2)).powf(1.0 / p);
            let three_q = gh_power_integral(f, p, (3 * k / 4).max(2)).powf(1.0 / p);
            let err = (main - half).abs().max((main - three_q).abs()) + 1e-13 * main;
            if !main.is_finite() {
                return Err(Error::Numerical("quadrature overflowed".into()));
            }
            if let Some(tol) = spec.max_rel_err {
                if err > tol * main {
                    return Err(Error::Numerical(format!(
                        "{k} nodes per axis give relative error estimate {:.3e} above {tol:.1e}",
                        err / main
                    )));
                }
            }
            Ok(NormResult {
                value: main,
                mode: NormMode::Quadrature,
                err_estimate: err,
            })
        }
    }
}

/// Single-resolution norm for inner loops: closed form when available,
/// otherwise one Gauss-Hermite pass with `k` nodes per axis and no error estimate.
pub fn fock_norm_fast(f: &ExpPoly, p: f64, k: usize) -> Result<f64> {
    check_p(p)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    if let Some((c, freq)) = f.as_pure_exponential() {
        return Ok(c.norm() * (0.5 * freq.norm_sqr()).exp());
    }
    if let [t] = f.terms() {
        if t.freq.norm_sqr() == 0.0 {
            return Ok(t.coeff.norm() * monomial_log_norm(&t.power, p).exp());
        }
    }
    if p == 2.0 {
        return Ok(f2_inner(f, f)?.re.max(0.0).sqrt());
    }
    Ok(gh_power_integral(f, p, k.max(2)).powf(1.0 / p))
}

/// [`slice_norm`] through [`fock_norm_fast`].
pub fn slice_norm_fast(psi: &ExpPoly, q: f64, head: &CVector, k: usize) -> Result<f64> {
    let s = head.dim();
    let n = psi.dim();
    if s == 0 || s > n {
        return Err(Error::Domain(format!("slice of length {s} on C^{n}")));
    }
    if s == n {
        return Ok(psi.eval(head)?.norm());
    }
    fock_norm_fast(&psi.slice_head(head)?, q, k)
}

/// `D(a, b; x, y) = d^a/dx^a d^b/dy^b exp(xy) / exp(xy)`.
fn kernel_derivative(a: u32, b: u32, x: C64, y: C64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for m in 0..=a.min(b) {
        let coef = binomial(a, m) * binomial(b, m) * crate::funcspace::factorial(m);
        s += x.powu(b - m) * y.powu(a - m) * coef;
    }
    s
}

type PolyMap = std::collections::BTreeMap<MultiIndex, C64>;

fn group_by_frequency(f: &ExpPoly) -> Vec<(CVector, PolyMap)> {
    let mut groups: Vec<(CVector, PolyMap)> = Vec::new();
    for t in f.terms() {
        let pos = groups.iter().position(|(c, _)| {
            c.iter()
                .zip(t.freq.iter())
                .all(|(a, b)| (a - b).norm() <= crate::funcspace::FREQ_MERGE_TOL)
        });
        let idx = match pos {
            Some(i) => i,
            None => {
                groups.push((t.freq.clone(), PolyMap::new()));
                groups.len() - 1
            }
        };
        *groups[idx].1.entry(t.power.clone()).or_insert(C64::new(0.0, 0.0)) += t.coeff;
    }
    groups
}

/// `P(z + c)` expanded.
fn shift_poly(p: &PolyMap, c: &CVector) -> PolyMap {
    let n = c.dim();
    let mut out = PolyMap::new();
    for (alpha, &coef) in p {
        // expand prod_k (z_k + c_k)^{alpha_k}
        let mut partial: Vec<(Vec<u32>, C64)> = vec![(Vec::with_capacity(n), coef)];
        for k in 0..n {
            let a = alpha.0[k];
            let mut next = Vec::with_capacity(partial.len() * (a as usize + 1));
            for (idx, v) in &partial {
                for m in 0..=a {
                    let mut idx2 = idx.clone();
                    idx2.push(m);
                    next.push((idx2, v * c[k].powu(a - m) * binomial(a, m)));
                }
            }
            partial = next;
        }
        for (idx, v) in partial {
            *out.entry(MultiIndex(idx)).or_insert(C64::new(0.0, 0.0)) += v;
        }
    }
    out
}

fn poly_dot(p: &PolyMap, q: &PolyMap) -> C64 {
    let (small, large, flip) = if p.len() <= q.len() { (p, q, false) } else { (q, p, true) };
    let mut s = C64::new(0.0, 0.0);
    for (alpha, a) in small {
        if let Some(b) = large.get(alpha) {
            let v = if flip { b * a.conj() } else { a * b.conj() };
            s += v * alpha.factorial();
        }
    }
    s
}

/// An exponential polynomial grouped by frequency, with the translated
/// polynomial parts cached for repeated `F^2` inner products.
#[derive(Clone, Debug)]
pub struct F2Prepared {
    dim: usize,
    groups: Vec<(CVector, PolyMap, PolyMap)>,
}

impl F2Prepared {
    pub fn new(f: &ExpPoly) -> Self {
        let groups = group_by_frequency(f)
            .into_iter()
            .map(|(c, p)| {
                let shifted = if c.norm_sqr() == 0.0 { p.clone() } else { shift_poly(&p, &c) };
                (c, p, shifted)
            })
            .collect();
        F2Prepared { dim: f.dim(), groups }
    }

    /// `<self, other>` in `F^2`.
    pub fn inner(&self, other: &F2Prepared) -> Result<C64> {
        if self.dim != other.dim {
            return Err(Error::Dimension("inner product of functions on different spaces".into()));
        }
        let mut total = C64::new(0.0, 0.0);
        for (c, p, ps) in &self.groups {
            for (d, q, qs) in &other.groups {
                let same = c
                    .iter()
                    .zip(d.iter())
                    .all(|(a, b)| (a - b).norm() <= crate::funcspace::FREQ_MERGE_TOL);
                if same {
                    // P K_c = T_c[e^{|c|^2/2} P(. + c)] with T_c unitary
                    total += poly_dot(ps, qs) * c.norm_sqr().exp();
                } else {
                    let e = d.inner(c).exp();
                    let mut s = C64::new(0.0, 0.0);
                    for (alpha, a) in p {
                        for (beta, b) in q {
                            let mut prod = a * b.conj();
                            for k in 0..c.dim() {
                                prod *= kernel_derivative(alpha.0[k], beta.0[k], c[k].conj(), d[k]);
                            }
                            s += prod;
                        }
                    }
                    total += s * e;
                }
            }
        }
        Ok(total)
    }
}

/// Exact `F^2` inner product `<f, g> = pi^{-n} int f conj(g) exp(-|z|^2) dA`.
pub fn f2_inner(f: &ExpPoly, g: &ExpPoly) -> Result<C64> {
    F2Prepared::new(f).inner(&F2Prepared::new(g))
}

/// `||z^alpha||_{n,p}^p = prod_k Gamma(p alpha_k / 2 + 1) (2/p)^{p alpha_k / 2}`.
fn monomial_log_norm(alpha: &MultiIndex, p: f64) -> f64 {
    let lp: f64 = alpha
        .0
        .iter()
        .map(|&a| {
            let h = 0.5 * p * a as f64;
            ln_gamma(h + 1.0) + h * (2.0 / p).ln()
        })
        .sum();
    lp / p
}

/// Sup-norm search outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct SupNormResult {
    pub norm: NormResult,
    pub argmax: CVector,
    /// Beyond this radius `|f(z)| exp(-|z|^2/2)` provably stays below the found maximum.
    pub tail_radius: f64,
    pub search_radius: f64,
}

/// `log sum_j |coeff_j| r^{|alpha_j|} exp(|c_j| r - r^2/2)`, an upper bound on
/// `log(|f(z)| exp(-|z|^2/2))` for `|z| = r`.
fn log_tail_bound(f: &ExpPoly, r: f64) -> f64 {
    let logs: Vec<f64> = f
        .terms()
        .iter()
        .map(|t| {
            t.coeff.norm().ln() + t.power.total() as f64 * r.max(1e-300).ln() + t.freq.norm() * r
                - 0.5 * r * r
        })
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
}

/// Radius from which every term bound is decreasing in `r`.
fn monotone_radius(f: &ExpPoly) -> f64 {
    f.terms()
        .iter()
        .map(|t| {
            let c = t.freq.norm();
            let a = t.power.total() as f64;
            0.5 * (c + (c * c + 4.0 * a).sqrt())
        })
        .fold(0.0, f64::max)
}

fn tail_radius(f: &ExpPoly, log_target: f64) -> f64 {
    let mut r = monotone_radius(f).max(1e-3);
    if log_tail_bound(f, r) <= log_target {
        return r;
    }
    let mut hi = r.max(1.0);
    while log_tail_bound(f, hi) > log_target {
        r = hi;
        hi *= 2.0;
    }
    let mut lo = r;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if log_tail_bound(f, mid) > log_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Default search radius from term sizes, degrees and frequencies.
pub fn default_sup_radius(f: &ExpPoly) -> f64 {
    let cmax = f.terms().iter().map(|t| t.freq.norm()).fold(0.0, f64::max);
    let amax = f.terms().iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
    let count = f.terms().len().max(1) as f64;
    let deg = f.max_degree() as f64;
    let mut r = cmax.max(1.0);
    for _ in 0..2 {
        let inner = (2.0 * (count * amax).ln()).max(0.0) + 4.0 * deg * (1.0 + r).ln();
        r = cmax + inner.sqrt();
    }
    r.max(1.0)
}

fn split_point(x: &[f64]) -> CVector {
    CVector(x.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

/// `||f||_{n,inf} = sup |f(z)| exp(-|z|^2/2)` by grid search plus refinement.
/// The returned value is a lower bound certified up to the reported tail radius.
pub fn fock_sup_norm(f: &ExpPoly, spec: &QuadSpec) -> Result<SupNormResult> {
    let n = f.dim();
    if f.is_zero() {
        return Ok(SupNormResult {
            norm: NormResult::exact(0.0),
            argmax: CVector::zeros(n),
            tail_radius: 0.0,
            search_radius: 0.0,
        });
    }
    let objective = |x: &[f64]| {
        let z = split_point(x);
        f.eval(&z).map(|v| v.norm().ln() - 0.5 * z.norm_sqr()).unwrap_or(f64::NEG_INFINITY)
    };
    let grid = spec.sup_grid.unwrap_or_else(|| search::default_grid(2 * n));
    let mut radius = spec.sup_radius.unwrap_or_else(|| default_sup_radius(f));
    let mut best = search::maximize(2 * n, &SearchOptions::new(radius, grid, spec.refine_iters), objective);
    let mut tail = tail_radius(f, best.log_value);
    for _ in 0..3 {
        if tail <= radius {
            break;
        }
        radius = tail * 1.05;
        let again = search::maximize(2 * n, &SearchOptions::new(radius, grid, spec.refine_iters), objective);
        if again.log_value > best.log_value {
            best = again;
        }
        tail = tail_radius(f, best.log_value);
    }
    Ok(SupNormResult {
        norm: NormResult {
            value: best.log_value.exp(),
            mode: NormMode::Quadrature,
            err_estimate: 0.0,
        },
        argmax: split_point(&best.argmax),
        tail_radius: tail,
        search_radius: radius,
    })
}

/// `||psi(z_[s], .)||_{n-s,q}`; for `s = n` this is `|psi(z)|`.
pub fn slice_norm(psi: &ExpPoly, q: f64, head: &CVector, spec: &QuadSpec) -> Result<NormResult> {
    check_p(q)?;
    let s = head.dim();
    let n = psi.dim();
    if s == 0 || s > n {
        return Err(Error::Domain(format!("slice of length {s} on C^{n}")));
    }
    if s == n {
        return Ok(NormResult::exact(psi.eval(head)?.norm()));
    }
    let sliced = psi.slice_head(head)?;
    let sub_spec = QuadSpec {
        nodes_per_axis: spec.nodes_per_axis,
        ..spec.clone()
    };
    fock_norm(&sliced, q, &sub_spec)
}
