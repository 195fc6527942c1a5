//! Pull-back measures, their Berezin transforms, and the `L^r` integrals of
//! `ell` that decide boundedness when `q < p`.
//!
//! For a normalization of rank `s` the pull-back measure on `C^s` is
//!
//! ```text
//! mu(E) = (q / 2pi)^s  int_{phi_[s]^{-1}(E)} ||psi~(z, .)||^q_{n-s,q} exp(-q |z|^2 / 2) dA(z),
//! ```
//!
//! and its Berezin transform reduces to one Fock norm:
//! `lambda~(w) = ||psi~ * (k_w o phi~_[s])||^q_{n,q}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{AffineMap, ExpPoly};
use crate::linalg::{CMatrix, CVector, C64};
use crate::quad::{self, NormMode, NormResult, QuadSpec};
use crate::wco::{self, EllProfile, Normalization, ProfileMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub r_exponent: f64,
    pub lr_norm: NormResult,
    pub member: bool,
    pub mode: NormMode,
}

fn check_exponents(p: f64, q: f64) -> Result<f64> {
    if !(q > 0.0 && p.is_finite() && q < p) {
        return Err(Error::Domain(format!("L^r integrals need 0 < q < p < inf; got p = {p}, q = {q}")));
    }
    Ok(p * q / (p - q))
}

/// `||ell||_{L^r(C^s)}` with `r = pq/(p-q)`.
pub fn carleson_integral(norm: &Normalization, p: f64, q: f64, spec: &QuadSpec) -> Result<CarlesonReport> {
    let r = check_exponents(p, q)?;
    let profile = wco::ell_profile(norm, q)?;
    if !profile.all_contractive() {
        let mode = match profile.mode {
            ProfileMode::CertifiedSingleFreq => NormMode::ClosedForm,
            ProfileMode::Numeric => NormMode::Quadrature,
        };
        return Ok(CarlesonReport {
            r_exponent: r,
            lr_norm: NormResult { value: f64::INFINITY, mode, err_estimate: 0.0 },
            member: false,
            mode,
        });
    }
    let lr_norm = if profile.pure_exponential && spec.allow_closed_form {
        NormResult::exact(closed_form_lr(&profile, r))
    } else {
        lr_quadrature(norm, p, q, spec)?
    };
    Ok(CarlesonReport {
        r_exponent: r,
        member: lr_norm.value.is_finite(),
        mode: lr_norm.mode,
        lr_norm,
    })
}

/// `K prod_i (pi / (r alpha_i))^{1/r} exp(|w_i|^2 / (2 (1 - a_i^2)))`, `alpha_i = (1 - a_i^2)/2`.
fn closed_form_lr(profile: &EllProfile, r: f64) -> f64 {
    let mut log = profile.constant_factor.ln();
    for c in &profile.coords {
        let alpha = 0.5 * (1.0 - c.a * c.a);
        log += (PI / (r * alpha)).ln() / r + c.w().norm_sqr() / (4.0 * alpha);
    }
    log.exp()
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log int ell^r dA` by product Gauss-Hermite with `k` nodes per real axis,
/// the Gaussian weight centred at `center` with per-coordinate width `1/sqrt(r alpha_i)`.
fn log_lr_integral(norm: &Normalization, q: f64, r: f64, alphas: &[f64], center: &CVector, k: usize) -> f64 {
    use rayon::prelude::*;
    let s = alphas.len();
    let (x, w) = quad::gauss_hermite(k);
    let g = k * k;
    let scales: Vec<f64> = alphas.iter().map(|a| 1.0 / (r * a).sqrt()).collect();
    let total = g.pow(s as u32);
    let logs: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut z = CVector::zeros(s);
            let mut logw = 0.0;
            let mut t2 = 0.0;
            for i in 0..s {
                let gi = rem % g;
                rem /= g;
                let (a, b) = (gi / k, gi % k);
                let t = C64::new(x[a], x[b]);
                z[i] = center[i] + t * scales[i];
                logw += (w[a] * w[b]).ln();
                t2 += t.norm_sqr();
            }
            logw + t2 + r * wco::log_ell_direct_fast(norm, q, &z, 16)
        })
        .collect();
    let jac: f64 = scales.iter().map(|sc| 2.0 * sc.ln()).sum();
    log_sum_exp(&logs) + jac
}

/// `||ell||_{L^r}` by quadrature of the definition of `ell`.
pub fn lr_quadrature(norm: &Normalization, p: f64, q: f64, spec: &QuadSpec) -> Result<NormResult> {
    let r = check_exponents(p, q)?;
    let profile = wco::ell_profile(norm, q)?;
    if !profile.all_contractive() {
        return Ok(NormResult { value: f64::INFINITY, mode: NormMode::Quadrature, err_estimate: 0.0 });
    }
    let alphas: Vec<f64> = profile.coords.iter().map(|c| 0.5 * (1.0 - c.a * c.a)).collect();
    let center = if profile.pure_exponential {
        CVector(profile.coords.iter().map(|c| c.w() / (1.0 - c.a * c.a)).collect())
    } else {
        wco::ell_sup(&profile, spec)?.argmax.unwrap_or_else(|| CVector::zeros(profile.s))
    };
    let s = profile.s;
    let k = if s <= 2 { spec.nodes_per_axis } else { spec.nodes_per_axis.min(16) }.max(4);
    let main = (log_lr_integral(norm, q, r, &alphas, &center, k) / r).exp();
    let coarse = (log_lr_integral(norm, q, r, &alphas, &center, (k / 2).max(2)) / r).exp();
    Ok(NormResult {
        value: main,
        mode: NormMode::Quadrature,
        err_estimate: (main - coarse).abs() + 1e-13 * main,
    })
}

fn head_inverse_point(norm: &Normalization, zeta: &CVector) -> CVector {
    CVector(
        (0..norm.rank_s)
            .map(|i| (zeta[i] - norm.b_t[i]) / norm.a_t[i])
            .collect(),
    )
}

/// Density of the pull-back measure with respect to area on `C^s`, at `zeta`.
pub fn pullback_density(norm: &Normalization, q: f64, zeta: &CVector) -> Result<f64> {
    let s = norm.rank_s;
    if s == 0 {
        return Err(Error::Domain("pull-back measures need rank >= 1".into()));
    }
    if zeta.dim() != s {
        return Err(Error::Dimension(format!("density needs a point of C^{s}")));
    }
    let z = head_inverse_point(norm, zeta);
    let slice = quad::slice_norm_fast(&norm.psi_t, q, &z, 16)?;
    let det = norm.head_det()?;
    Ok((q / (2.0 * PI)).powi(s as i32) * slice.powf(q) * (-0.5 * q * z.norm_sqr()).exp() / (det * det))
}

/// `mu(B(center, radius))`, integrating the density over the ball in nested polar coordinates.
pub fn pullback_mass(norm: &Normalization, q: f64, center: &CVector, radius: f64, spec: &QuadSpec) -> Result<f64> {
    let s = norm.rank_s;
    if s == 0 {
        return Err(Error::Domain("pull-back measures need rank >= 1".into()));
    }
    if center.dim() != s {
        return Err(Error::Dimension(format!("ball centre must lie in C^{s}")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("degenerate ball of radius {radius}")));
    }
    let kr = spec.nodes_per_axis.max(8);
    let kt = 2 * kr;
    let (xl, wl) = quad::gauss_legendre(kr);

    fn nest(
        level: usize,
        rho2: f64,
        point: &mut CVector,
        center: &CVector,
        rule: (&[f64], &[f64], usize),
        f: &dyn Fn(&CVector) -> Result<f64>,
    ) -> Result<f64> {
        let (xl, wl, kt) = rule;
        let s = center.dim();
        let rho = rho2.max(0.0).sqrt();
        let mut acc = 0.0;
        for (x, w) in xl.iter().zip(wl) {
            let rr = 0.5 * rho * (x + 1.0);
            let wr = 0.5 * rho * w * rr;
            for j in 0..kt {
                let th = 2.0 * PI * j as f64 / kt as f64;
                point[level] = center[level] + C64::from_polar(rr, th);
                let wt = 2.0 * PI / kt as f64;
                let v = if level + 1 == s {
                    f(point)?
                } else {
                    nest(level + 1, rho2 - rr * rr, point, center, rule, f)?
                };
                acc += wr * wt * v;
            }
        }
        Ok(acc)
    }

    let density = |zeta: &CVector| pullback_density(norm, q, zeta);
    let mut point = CVector::zeros(s);
    nest(0, radius * radius, &mut point, center, (&xl, &wl, kt), &density)
}

/// `lambda~(w) = ||psi~ * (k_(w, 0) o phi~)||^q_{n,q}` for `w` in `C^s`.
pub fn berezin_transform(norm: &Normalization, q: f64, w_head: &CVector, spec: &QuadSpec) -> Result<NormResult> {
    let s = norm.rank_s;
    if s == 0 {
        return Err(Error::Domain("Berezin transforms need rank >= 1".into()));
    }
    if w_head.dim() != s {
        return Err(Error::Dimension(format!("w must lie in C^{s}")));
    }
    let n = norm.dim();
    let mut w = w_head.0.clone();
    w.resize(n, C64::new(0.0, 0.0));
    let kernel = ExpPoly::normalized_kernel(&CVector(w));
    let f = norm.psi_t.multiply(&kernel.compose_affine(&norm.phi_t())?)?;
    let r = quad::fock_norm(&f, q, spec)?;
    Ok(NormResult {
        value: r.value.powf(q),
        mode: r.mode,
        err_estimate: q * r.value.powf(q - 1.0) * r.err_estimate,
    })
}

/// `lambda~(w) = int |k_w|^q d mu` integrated on the measure side with Gauss-Hermite in `z`.
pub fn berezin_by_measure(norm: &Normalization, q: f64, w_head: &CVector, spec: &QuadSpec) -> Result<NormResult> {
    let s = norm.rank_s;
    if s == 0 {
        return Err(Error::Domain("Berezin transforms need rank >= 1".into()));
    }
    if w_head.dim() != s {
        return Err(Error::Dimension(format!("w must lie in C^{s}")));
    }
    let freq = norm
        .psi_t
        .single_frequency()
        .map(|c| c.head(s))
        .unwrap_or_else(|| CVector::zeros(s));
    let center = CVector((0..s).map(|i| freq[i] + w_head[i] * norm.a_t[i]).collect());
    let phi_head = AffineMap {
        a: CMatrix::diag_real(&norm.a_t[..s]),
        b: norm.b_t.head(s),
    };
    let sigma = (2.0 / q).sqrt();
    let run = |k: usize| -> Result<f64> {
        let (x, w) = quad::gauss_hermite(k);
        let g = k * k;
        let mut acc = 0.0;
        for flat in 0..g.pow(s as u32) {
            let mut rem = flat;
            let mut z = CVector::zeros(s);
            let mut wt = 1.0;
            let mut t2 = 0.0;
            for i in 0..s {
                let gi = rem % g;
                rem /= g;
                let t = C64::new(x[gi / k], x[gi % k]);
                z[i] = center[i] + t * sigma;
                wt *= w[gi / k] * w[gi % k];
                t2 += t.norm_sqr();
            }
            let zeta = phi_head.apply(&z);
            let log_k = (zeta.inner(w_head)).re - 0.5 * w_head.norm_sqr();
            let slice = quad::slice_norm_fast(&norm.psi_t, q, &z, 16)?;
            acc += wt * (q * (slice.ln() + log_k) - 0.5 * q * z.norm_sqr() + t2).exp();
        }
        Ok(acc / PI.powi(s as i32))
    };
    let k = spec.nodes_per_axis.max(4);
    let main = run(k)?;
    let coarse = run((k / 2).max(2))?;
    Ok(NormResult {
        value: main,
        mode: NormMode::Quadrature,
        err_estimate: (main - coarse).abs() + 1e-13 * main,
    })
}
