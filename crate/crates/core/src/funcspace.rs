//! Exponential polynomials on C^n.
//!
//! An [`ExpPoly`] is a finite sum `sum_j coeff_j * z^alpha_j * exp(<z, c_j>)`
//! with `<z, c> = sum_i z_i * conj(c_i)`. The class contains every
//! reproducing kernel and is closed under products, affine substitution and
//! freezing coordinates, which is all the operator calculus needs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// Frequencies closer than this (per component) are merged.
pub const FREQ_MERGE_TOL: f64 = 1e-12;
/// Coefficients smaller than this fraction of the largest one are dropped.
pub const COEFF_DROP_REL: f64 = 1e-14;
/// Default cap on the number of terms any single operation may produce.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zeros(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize, k: u32) -> Self {
        let mut v = vec![0; n];
        v[i] = k;
        MultiIndex(v)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `alpha! = prod alpha_i!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&k| factorial(k)).product()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// One summand `coeff * z^power * exp(<z, freq>)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub power: MultiIndex,
    pub freq: CVector,
}

impl Term {
    pub fn eval(&self, z: &CVector) -> C64 {
        let mut mono = self.coeff;
        for (zi, &k) in z.iter().zip(&self.power.0) {
            if k > 0 {
                mono *= zi.powu(k);
            }
        }
        mono * z.inner(&self.freq).exp()
    }
}

/// Canonical exponential polynomial on C^dim.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPoly {
    dim: usize,
    terms: Vec<Term>,
}

fn freq_close(a: &CVector, b: &CVector) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= FREQ_MERGE_TOL)
}

fn freq_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Sparse polynomial keyed by exponent.
type Poly = BTreeMap<MultiIndex, C64>;

fn poly_mul(a: &Poly, b: &Poly, cap: usize) -> Result<Poly> {
    let mut out: Poly = BTreeMap::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            *out.entry(ka.add(kb)).or_insert_with(zero) += ca * cb;
        }
        if out.len() > cap {
            return Err(Error::Resource(format!(
                "polynomial product exceeds {cap} terms"
            )));
        }
    }
    Ok(out)
}

impl ExpPoly {
    /// Builds and canonicalizes from raw terms.
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.power.dim() != dim || t.freq.dim() != dim {
                return Err(Error::Dimension(format!(
                    "term of dimension ({}, {}) in an ExpPoly on C^{dim}",
                    t.power.dim(),
                    t.freq.dim()
                )));
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite())
                || t.freq.iter().any(|c| !(c.re.is_finite() && c.im.is_finite()))
            {
                return Err(Error::Invalid("non-finite coefficient or frequency".into()));
            }
        }
        Ok(Self::canonical(dim, terms))
    }

    fn canonical(dim: usize, terms: Vec<Term>) -> Self {
        // group by power, then merge frequencies within tolerance
        let mut groups: BTreeMap<MultiIndex, Vec<(CVector, C64)>> = BTreeMap::new();
        for t in terms {
            let g = groups.entry(t.power).or_default();
            match g.iter_mut().find(|(f, _)| freq_close(f, &t.freq)) {
                Some((_, c)) => *c += t.coeff,
                None => g.push((t.freq, t.coeff)),
            }
        }
        let mut out: Vec<Term> = Vec::new();
        for (power, g) in groups {
            let mut g = g;
            g.sort_by(|a, b| freq_cmp(&a.0, &b.0));
            for (freq, coeff) in g {
                out.push(Term {
                    coeff,
                    power: power.clone(),
                    freq,
                });
            }
        }
        let cmax = out.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        out.retain(|t| t.coeff.norm() > COEFF_DROP_REL * cmax && t.coeff != zero());
        ExpPoly { dim, terms: out }
    }

    pub fn canonicalize(&self) -> Self {
        Self::canonical(self.dim, self.terms.clone())
    }

    pub fn zero(dim: usize) -> Self {
        ExpPoly { dim, terms: vec![] }
    }

    pub fn constant(dim: usize, c: C64) -> Self {
        Self::canonical(
            dim,
            vec![Term {
                coeff: c,
                power: MultiIndex::zeros(dim),
                freq: CVector::zeros(dim),
            }],
        )
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, one())
    }

    pub fn monomial(coeff: C64, power: MultiIndex) -> Self {
        let dim = power.dim();
        Self::canonical(
            dim,
            vec![Term {
                coeff,
                power,
                freq: CVector::zeros(dim),
            }],
        )
    }

    /// `coeff * z^power * exp(<z, freq>)` as a one-term function.
    pub fn term(coeff: C64, power: MultiIndex, freq: CVector) -> Result<Self> {
        let dim = power.dim();
        Self::new(dim, vec![Term { coeff, power, freq }])
    }

    /// Reproducing kernel `K_w(z) = exp(<z, w>)`.
    pub fn kernel(w: &CVector) -> Self {
        let dim = w.dim();
        Self::canonical(
            dim,
            vec![Term {
                coeff: one(),
                power: MultiIndex::zeros(dim),
                freq: w.clone(),
            }],
        )
    }

    /// Normalized kernel `k_w = exp(-|w|^2 / 2) K_w`.
    pub fn normalized_kernel(w: &CVector) -> Self {
        Self::kernel(w).scale(C64::new((-0.5 * w.norm_sqr()).exp(), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &CVector) -> Result<C64> {
        if z.dim() != self.dim {
            return Err(Error::Dimension(format!(
                "point in C^{} for a function on C^{}",
                z.dim(),
                self.dim
            )));
        }
        Ok(self.terms.iter().map(|t| t.eval(z)).sum())
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::canonical(
            self.dim,
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * k,
                    ..t.clone()
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &ExpPoly) -> Result<Self> {
        self.check_dim(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::canonical(self.dim, terms))
    }

    pub fn sub(&self, other: &ExpPoly) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    fn check_dim(&self, other: &ExpPoly) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "C^{} versus C^{}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &ExpPoly) -> Result<Self> {
        self.multiply_capped(other, DEFAULT_TERM_CAP)
    }

    /// Pointwise product: powers add and frequencies add.
    pub fn multiply_capped(&self, other: &ExpPoly, cap: usize) -> Result<Self> {
        self.check_dim(other)?;
        if self.terms.len().saturating_mul(other.terms.len()) > cap {
            return Err(Error::Resource(format!(
                "product of {} and {} terms exceeds cap {cap}",
                self.terms.len(),
                other.terms.len()
            )));
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    power: a.power.add(&b.power),
                    freq: a.freq.add(&b.freq),
                });
            }
        }
        Ok(Self::canonical(self.dim, terms))
    }

    pub fn compose_affine(&self, phi: &AffineMap) -> Result<Self> {
        self.compose_affine_capped(phi, DEFAULT_TERM_CAP)
    }

    /// `f o phi` with `phi(z) = Az + b`.
    ///
    /// Monomials expand multinomially; `exp(<Az + b, c>) = exp(<b, c>) exp(<z, A* c>)`.
    pub fn compose_affine_capped(&self, phi: &AffineMap, cap: usize) -> Result<Self> {
        let n = self.dim;
        if phi.dim() != n {
            return Err(Error::Dimension(format!(
                "affine map on C^{} composed into a function on C^{n}",
                phi.dim()
            )));
        }
        let a_adj = phi.a.adjoint();
        // (row_i . z + b_i) as a sparse linear polynomial, and its cached powers
        let linear: Vec<Poly> = (0..n)
            .map(|i| {
                let mut p: Poly = BTreeMap::new();
                for k in 0..n {
                    let aik = phi.a[(i, k)];
                    if aik != zero() {
                        p.insert(MultiIndex::unit(n, k, 1), aik);
                    }
                }
                if phi.b[i] != zero() {
                    p.insert(MultiIndex::zeros(n), phi.b[i]);
                }
                p
            })
            .collect();
        let mut power_cache: BTreeMap<(usize, u32), Poly> = BTreeMap::new();

        let mut out = Vec::new();
        for t in &self.terms {
            let mut poly: Poly = BTreeMap::from([(MultiIndex::zeros(n), one())]);
            for i in 0..n {
                let k = t.power.0[i];
                if k == 0 {
                    continue;
                }
                if !power_cache.contains_key(&(i, k)) {
                    let mut p: Poly = BTreeMap::from([(MultiIndex::zeros(n), one())]);
                    for _ in 0..k {
                        p = poly_mul(&p, &linear[i], cap)?;
                    }
                    power_cache.insert((i, k), p);
                }
                poly = poly_mul(&poly, &power_cache[&(i, k)], cap)?;
            }
            let shift = phi.b.inner(&t.freq).exp();
            let freq = a_adj.mul_vec(&t.freq);
            for (power, c) in poly {
                if c == zero() {
                    continue;
                }
                out.push(Term {
                    coeff: t.coeff * shift * c,
                    power,
                    freq: freq.clone(),
                });
            }
            if out.len() > cap {
                return Err(Error::Resource(format!(
                    "affine composition exceeds {cap} terms"
                )));
            }
        }
        Ok(Self::canonical(n, out))
    }

    /// Freezes the first `s` coordinates at `prefix`; result lives on C^{n-s}.
    pub fn slice_head(&self, prefix: &CVector) -> Result<Self> {
        let s = prefix.dim();
        if s == 0 || s >= self.dim {
            return Err(Error::Domain(format!(
                "slice_head needs 0 < s < n, got s = {s}, n = {}",
                self.dim
            )));
        }
        Ok(self.freeze(prefix, 0..s, s..self.dim))
    }

    /// Freezes the last `n - s` coordinates at `suffix`; result lives on C^s.
    pub fn slice_tail(&self, suffix: &CVector) -> Result<Self> {
        let m = suffix.dim();
        if m == 0 || m >= self.dim {
            return Err(Error::Domain(format!(
                "slice_tail needs 0 < n - s < n, got n - s = {m}, n = {}",
                self.dim
            )));
        }
        let s = self.dim - m;
        Ok(self.freeze(suffix, s..self.dim, 0..s))
    }

    fn freeze(
        &self,
        values: &CVector,
        fixed: std::ops::Range<usize>,
        free: std::ops::Range<usize>,
    ) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut coeff = t.coeff;
                let mut expo = zero();
                for (j, i) in fixed.clone().enumerate() {
                    let k = t.power.0[i];
                    if k > 0 {
                        coeff *= values[j].powu(k);
                    }
                    expo += values[j] * t.freq[i].conj();
                }
                Term {
                    coeff: coeff * expo.exp(),
                    power: MultiIndex(t.power.0[free.clone()].to_vec()),
                    freq: CVector(t.freq.0[free.clone()].to_vec()),
                }
            })
            .collect();
        Self::canonical(free.len(), terms)
    }

    /// Total degree of the polynomial parts.
    pub fn max_degree(&self) -> u32 {
        self.terms.iter().map(|t| t.power.total()).max().unwrap_or(0)
    }

    /// Degree in the single variable `z_i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.iter().map(|t| t.power.0[i]).max().unwrap_or(0)
    }

    /// Distinct frequencies, in canonical order.
    pub fn frequencies(&self) -> Vec<CVector> {
        let mut out: Vec<CVector> = Vec::new();
        for t in &self.terms {
            if !out.iter().any(|f| freq_close(f, &t.freq)) {
                out.push(t.freq.clone());
            }
        }
        out.sort_by(freq_cmp);
        out
    }

    /// The common frequency when every term shares one.
    pub fn single_frequency(&self) -> Option<CVector> {
        let f = self.frequencies();
        match f.len() {
            0 => Some(CVector::zeros(self.dim)),
            1 => Some(f[0].clone()),
            _ => None,
        }
    }

    /// Nonzero constant times `exp(<z, c>)`.
    pub fn as_pure_exponential(&self) -> Option<(C64, CVector)> {
        match self.terms.as_slice() {
            [t] if t.power.is_zero() => Some((t.coeff, t.freq.clone())),
            _ => None,
        }
    }

    /// Coefficient of `z^beta` in the Taylor expansion at 0.
    pub fn taylor_coefficient(&self, beta: &MultiIndex) -> C64 {
        let mut total = zero();
        'terms: for t in &self.terms {
            let mut c = t.coeff;
            for i in 0..self.dim {
                let (b, a) = (beta.0[i], t.power.0[i]);
                if b < a {
                    continue 'terms;
                }
                let d = b - a;
                if d > 0 {
                    let f = t.freq[i].conj();
                    if f == zero() {
                        continue 'terms;
                    }
                    c *= f.powu(d) / factorial(d);
                }
            }
            total += c;
        }
        total
    }

    /// Taylor polynomial of total degree at most `n_max`.
    pub fn taylor_polynomial(&self, n_max: u32) -> ExpPoly {
        let terms = multi_indices(self.dim, n_max)
            .into_iter()
            .filter_map(|beta| {
                let c = self.taylor_coefficient(&beta);
                (c != zero()).then(|| Term {
                    coeff: c,
                    power: beta,
                    freq: CVector::zeros(self.dim),
                })
            })
            .collect();
        Self::canonical(self.dim, terms)
    }

    /// Sup-norm distance of two functions sampled at `points`, relative to the larger value.
    pub fn max_rel_diff_at(&self, other: &ExpPoly, points: &[CVector]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for z in points {
            let a = self.eval(z)?;
            let b = other.eval(z)?;
            let scale = a.norm().max(b.norm()).max(1e-300);
            worst = worst.max((a - b).norm() / scale.max(1.0));
        }
        Ok(worst)
    }
}

/// All multi-indices on n variables with total degree at most `n_max`,
/// ordered by total degree and then lexicographically (descending first entry).
pub fn multi_indices(n: usize, n_max: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() == n - 1 {
            prefix.push(remaining);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in (0..=remaining).rev() {
            prefix.push(k);
            rec(n, remaining - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=n_max {
        rec(n, d, &mut Vec::new(), &mut out);
    }
    out
}

/// `phi(z) = A z + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub a: CMatrix,
    pub b: CVector,
}

impl AffineMap {
    pub fn new(a: CMatrix, b: CVector) -> Result<Self> {
        if a.n() != b.dim() {
            return Err(Error::Dimension(format!(
                "{0}x{0} matrix with translation in C^{1}",
                a.n(),
                b.dim()
            )));
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            a: CMatrix::identity(n),
            b: CVector::zeros(n),
        }
    }

    pub fn linear(a: CMatrix) -> Self {
        let n = a.n();
        AffineMap {
            a,
            b: CVector::zeros(n),
        }
    }

    pub fn constant(b: CVector) -> Self {
        AffineMap {
            a: CMatrix::zeros(b.dim()),
            b,
        }
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn apply(&self, z: &CVector) -> CVector {
        self.a.mul_vec(z).add(&self.b)
    }

    /// `self o inner`.
    pub fn after(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            a: self.a.mul(&inner.a),
            b: self.a.mul_vec(&inner.b).add(&self.b),
        }
    }
}

/// `W_{psi,phi} f = psi * (f o phi)`.
pub fn apply_wco(psi: &ExpPoly, phi: &AffineMap, f: &ExpPoly) -> Result<ExpPoly> {
    psi.multiply(&f.compose_affine(phi)?)
}
