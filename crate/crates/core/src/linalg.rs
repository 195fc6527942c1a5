//! Dense complex linear algebra for small square matrices.
//!
//! The SVD is returned as `A = V · diag(sigma) · U` with both `V` and `U`
//! unitary, i.e. `U` is already the adjoint of the textbook right factor.
//! Normalization code uses `U` directly (`psi_t(z) = psi(U* z)`).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default relative threshold below which a singular value counts as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Maximum number of Jacobi sweeps before the SVD reports non-convergence.
pub const MAX_SWEEPS: usize = 200;

/// A vector in C^n.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CVector(pub Vec<C64>);

impl CVector {
    pub fn zeros(n: usize) -> Self {
        CVector(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_reals(xs: &[f64]) -> Self {
        CVector(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `<self, other> = sum self_i * conj(other_i)`.
    pub fn inner(&self, other: &CVector) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: C64) -> CVector {
        CVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn add(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        CVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn head(&self, s: usize) -> CVector {
        CVector(self.0[..s].to_vec())
    }

    pub fn tail(&self, s: usize) -> CVector {
        CVector(self.0[s..].to_vec())
    }

    pub fn concat(&self, other: &CVector) -> CVector {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        CVector(v)
    }

    pub fn max_abs_diff(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Deref for CVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for CVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

impl From<Vec<C64>> for CVector {
    fn from(v: Vec<C64>) -> Self {
        CVector(v)
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Builds from row-major entries; errors unless `entries.len()` is a perfect square.
    pub fn from_row_major(entries: Vec<C64>) -> Result<Self> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n * n != entries.len() || n == 0 {
            return Err(Error::Dimension(format!(
                "{} entries do not form a non-empty square matrix",
                entries.len()
            )));
        }
        Ok(CMatrix { n, data: entries })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        Self::from_row_major(rows.iter().flatten().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "matrix product dimension mismatch");
        let n = self.n;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.n, v.dim(), "matrix-vector dimension mismatch");
        CVector(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
                .collect(),
        )
    }

    pub fn scale_cols(&self, d: &[f64]) -> CMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] *= d[j];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> CVector {
        CVector((0..self.n).map(|i| self[(i, j)]).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == C64::new(0.0, 0.0))
    }
}

/// `A = V · diag(sigma) · U`, sigma non-increasing, `V` and `U` unitary.
#[derive(Clone, Debug)]
pub struct SvdTriple {
    pub v: CMatrix,
    pub sigma: Vec<f64>,
    pub u: CMatrix,
    pub rank_s: usize,
    pub rank_tol: f64,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> CMatrix {
        self.v.scale_cols(&self.sigma).mul(&self.u)
    }
}

fn lex_cmp(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
///
/// Singular values within `rank_tol` of 1 are snapped to exactly 1, and
/// `rank_s` counts the values above `rank_tol * max(sigma[0], 1)`.
pub fn svd(a: &CMatrix, rank_tol: f64) -> Result<SvdTriple> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::Domain(format!("rank_tol {rank_tol} not in (0, 1)")));
    }
    let n = a.n();
    let mut b = a.clone();
    let mut j = CMatrix::identity(n);
    let eps = f64::EPSILON * (n as f64);
    // columns below this squared norm only carry rounding noise
    let negligible = eps * eps * a.entries().iter().map(|x| x.norm_sqr()).sum::<f64>();
    let mut converged = false;

    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for k in 0..n {
                    let bp = b[(k, p)];
                    let bq = b[(k, q)];
                    alpha += bp.norm_sqr();
                    beta += bq.norm_sqr();
                    gamma += bp.conj() * bq;
                }
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                // e^{-i theta} a_q makes the column product real
                let phase_conj = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut b, &mut j] {
                    for k in 0..n {
                        let xp = m[(k, p)];
                        let xq = m[(k, q)] * phase_conj;
                        m[(k, p)] = xp * c - xq * s;
                        m[(k, q)] = xp * s + xq * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge within {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> = (0..n).map(|k| b.column(k).norm()).collect();
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let zero_cut = rank_tol * smax.max(1.0);

    // Left vectors for the numerically nonzero columns.
    let mut left: Vec<Option<CVector>> = (0..n)
        .map(|k| {
            if norms[k] > zero_cut {
                Some(b.column(k).scale(C64::new(1.0 / norms[k], 0.0)))
            } else {
                None
            }
        })
        .collect();

    // Order: descending sigma, ties by lexicographic order of left vectors.
    let tie_tol = 1e-12 * smax.max(1.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (norms[order[start]] - norms[order[end]]).abs() <= tie_tol {
            end += 1;
        }
        if end - start > 1 {
            let group = &mut order[start..end];
            group.sort_by(|&x, &y| match (&left[x], &left[y]) {
                (Some(a), Some(b)) => lex_cmp(a, b),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => x.cmp(&y),
            });
        }
        start = end;
    }

    // Complete the left basis for the null columns by Gram-Schmidt against the e_i with largest residual.
    let mut basis: Vec<CVector> = order.iter().filter_map(|&k| left[k].clone()).collect();
    let mut residual: Vec<f64> = (0..n)
        .map(|i| 1.0 - basis.iter().map(|q| q[i].norm_sqr()).sum::<f64>())
        .collect();
    for &k in &order {
        if left[k].is_some() {
            continue;
        }
        let best = (0..n).max_by(|&x, &y| residual[x].total_cmp(&residual[y])).expect("n > 0");
        let mut e = CVector::zeros(n);
        e[best] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for q in &basis {
                let proj = e.inner(q);
                e = e.sub(&q.scale(proj));
            }
        }
        let nrm = e.norm();
        if !(nrm > 1e-8) {
            return Err(Error::Numerical("SVD basis completion lost orthogonality".into()));
        }
        let e = e.scale(C64::new(1.0 / nrm, 0.0));
        for (r, x) in residual.iter_mut().zip(e.iter()) {
            *r -= x.norm_sqr();
        }
        basis.push(e.clone());
        left[k] = Some(e);
    }

    let mut v = CMatrix::zeros(n);
    let mut u = CMatrix::zeros(n);
    let mut sigma = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        let lk = left[k].as_ref().expect("left vector assigned");
        for i in 0..n {
            v[(i, col)] = lk[i];
            // row `col` of U is the adjoint of column k of J
            u[(col, i)] = j[(i, k)].conj();
        }
        let mut sv = norms[k];
        if (sv - 1.0).abs() <= rank_tol {
            sv = 1.0;
        }
        sigma.push(sv);
    }
    let rank_s = sigma.iter().filter(|&&x| x > zero_cut).count();
    Ok(SvdTriple {
        v,
        sigma,
        u,
        rank_s,
        rank_tol,
    })
}

pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    Ok(svd(a, DEFAULT_RANK_TOL)?.sigma[0])
}

/// True iff `||A A* - I||_max <= tol`.
pub fn is_unitary(a: &CMatrix, tol: f64) -> bool {
    a.mul(&a.adjoint()).max_abs_diff(&CMatrix::identity(a.n())) <= tol
}

/// Haar-distributed unitary matrix: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: rand::Rng>(n: usize, rng: &mut R) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = CVector(
            (0..n)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    C64::new(re, im)
                })
                .collect(),
        );
        for _ in 0..2 {
            for q in &cols {
                let proj = v.inner(q);
                v = v.sub(&q.scale(proj));
            }
        }
        let nrm = v.norm();
        if nrm > 1e-6 {
            cols.push(v.scale(C64::new(1.0 / nrm, 0.0)));
        }
    }
    let mut m = CMatrix::zeros(n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = c[i];
        }
    }
    m
}

/// `|det A_[s]|` of the diagonal factor: the product of the leading `rank_s` singular values.
pub fn head_det_modulus(t: &SvdTriple) -> Result<f64> {
    if t.rank_s == 0 {
        return Err(Error::Domain(
            "rank 0 has no principal block; use the constant-map branch".into(),
        ));
    }
    Ok(t.sigma[..t.rank_s].iter().product())
}
