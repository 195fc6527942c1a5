//! Seeded problem families built in normalized coordinates and conjugated by
//! random unitaries, so the expected verdicts are known by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::funcspace::{AffineMap, ExpPoly, MultiIndex};
use crate::linalg::{random_unitary, CMatrix, CVector, C64};
use crate::wco::WcoProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    One,
    Kernel,
    /// `(1 + z_j / 2) e^{<z, c>}` in normalized coordinates.
    HeadPoly,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub problem: WcoProblem,
    /// Diagonal of the normalized matrix, zeros included.
    pub a: Vec<f64>,
    pub rank_s: usize,
    pub b_on: bool,
    pub symbol: SymbolKind,
}

/// `W_{psi, phi}` with `A = V diag(a) U`, `b = V b~` and `psi = psi~ o U`.
pub fn conjugated_problem(a: &[f64], b_t: &CVector, psi_t: &ExpPoly, v: &CMatrix, u: &CMatrix, p: f64, q: f64) -> Result<WcoProblem> {
    let a_mat = v.mul(&CMatrix::diag_real(a)).mul(u);
    let phi = AffineMap::new(a_mat, v.mul_vec(b_t))?;
    let psi = psi_t.compose_affine(&AffineMap::linear(u.clone()))?;
    WcoProblem::new(psi, phi, p, q)
}

fn unit_phase<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn small_vector<R: Rng>(n: usize, scale: f64, rng: &mut R) -> CVector {
    CVector((0..n).map(|_| C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))).collect())
}

fn head_poly(n: usize, j: usize, c: &CVector) -> Result<ExpPoly> {
    let mut p = ExpPoly::one(n).add(&ExpPoly::monomial(C64::new(0.5, 0.0), MultiIndex::unit(n, j, 1)))?;
    p = p.multiply(&ExpPoly::kernel(c))?;
    Ok(p)
}

/// Symbol, translation and matrix in normalized coordinates for a random certified problem.
#[allow(clippy::too_many_arguments)]
fn certified_entry<R: Rng>(name: String, n: usize, s: usize, levels: &[f64], b_on: bool, symbol: SymbolKind, p: f64, q: f64, rng: &mut R) -> Result<CorpusEntry> {
    let mut a: Vec<f64> = (0..s).map(|_| levels[rng.gen_range(0..levels.len())]).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    a.resize(n, 0.0);
    let mut b_t = CVector::zeros(n);
    if b_on {
        b_t[rng.gen_range(0..n)] = unit_phase(rng);
    }
    let mut c = small_vector(n, 0.4, rng);
    for i in 0..s {
        // half of the isometric coordinates get the cancelling frequency
        if a[i] == 1.0 && rng.gen_bool(0.5) {
            c[i] = -b_t[i];
        }
    }
    let psi_t = match symbol {
        SymbolKind::One => ExpPoly::one(n),
        SymbolKind::Kernel => ExpPoly::kernel(&c),
        SymbolKind::HeadPoly => head_poly(n, s.saturating_sub(1), &c)?,
    };
    let v = random_unitary(n, rng);
    let u = random_unitary(n, rng);
    let problem = conjugated_problem(&a, &b_t, &psi_t, &v, &u, p, q)?;
    Ok(CorpusEntry { name, problem, a, rank_s: s, b_on, symbol })
}

/// 50 problems with `p <= q` covering every rank, the levels {0.3, 0.9, 1} and
/// translations on and off unit directions.
pub fn certified_corpus(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exps = [(2.0, 2.0), (1.0, 2.0), (2.0, 3.0), (1.5, 1.5), (0.8, 2.0)];
    let symbols = [SymbolKind::One, SymbolKind::Kernel, SymbolKind::HeadPoly, SymbolKind::Kernel];
    (0..50)
        .map(|i| {
            let n = 1 + i % 3;
            let s = (i / 3) % (n + 1);
            let (p, q) = exps[(i / 2) % exps.len()];
            let mut symbol = symbols[(i / 5) % symbols.len()];
            if symbol == SymbolKind::HeadPoly && n > 1 && q != 2.0 {
                symbol = SymbolKind::Kernel;
            }
            let b_on = (i / 4) % 2 == 0;
            certified_entry(format!("certified-{i:02}"), n, s, &[0.3, 0.9, 1.0], b_on, symbol, p, q, &mut rng)
                .expect("corpus construction")
        })
        .collect()
}

/// 30 problems with `q < p` and rank at least one.
pub fn q_less_p_corpus(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exps = [(2.0, 1.0), (3.0, 2.0), (4.0, 2.0), (2.0, 0.5)];
    (0..30)
        .map(|i| {
            let n = 1 + i % 3;
            let s = 1 + (i / 3) % n;
            let (p, q) = exps[(i / 3) % exps.len()];
            let symbol = if i % 5 == 4 && n == 1 { SymbolKind::HeadPoly } else if i % 2 == 0 { SymbolKind::Kernel } else { SymbolKind::One };
            certified_entry(format!("q-less-p-{i:02}"), n, s, &[0.3, 0.6, 0.9, 1.0], i % 4 < 2, symbol, p, q, &mut rng)
                .expect("corpus construction")
        })
        .collect()
}

/// Hilbert-space problems with maximizers close to the origin, where low-degree
/// truncations already see the norm.
pub fn sandwich_corpus() -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a17d);
    let c = |re: f64, im: f64| C64::new(re, im);
    let cases: Vec<(Vec<f64>, Vec<C64>, Vec<C64>)> = vec![
        (vec![1.0], vec![c(0.0, 0.0)], vec![c(0.0, 0.0)]),
        (vec![0.5], vec![c(0.0, 0.0)], vec![c(0.0, 0.0)]),
        (vec![0.5], vec![c(0.2, 0.1)], vec![c(0.1, -0.2)]),
        (vec![0.7], vec![c(-0.3, 0.0)], vec![c(0.0, 0.25)]),
        (vec![0.3], vec![c(0.4, 0.0)], vec![c(0.0, 0.0)]),
        (vec![0.9], vec![c(0.1, 0.0)], vec![c(0.0, 0.05)]),
        (vec![1.0], vec![c(0.3, -0.2)], vec![c(-0.3, 0.2)]),
        (vec![0.0], vec![c(0.3, 0.1)], vec![c(0.2, 0.0)]),
        (vec![0.8, 0.4], vec![c(0.1, 0.0), c(0.0, 0.1)], vec![c(0.0, 0.0), c(0.1, 0.0)]),
        (vec![1.0, 0.5], vec![c(0.2, 0.0), c(0.0, 0.0)], vec![c(-0.2, 0.0), c(0.1, 0.1)]),
        (vec![0.6, 0.0], vec![c(0.0, 0.2), c(0.15, 0.0)], vec![c(0.1, 0.0), c(0.0, 0.0)]),
        (vec![0.5, 0.5], vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.1, 0.0), c(0.0, -0.1)]),
    ];
    cases
        .into_iter()
        .enumerate()
        .map(|(i, (a, b, cv))| {
            let n = a.len();
            let s = a.iter().filter(|&&x| x > 0.0).count();
            let b_t = CVector(b);
            let psi_t = ExpPoly::kernel(&CVector(cv));
            let (v, u) = if i % 2 == 0 { (CMatrix::identity(n), CMatrix::identity(n)) } else { (random_unitary(n, &mut rng), random_unitary(n, &mut rng)) };
            let problem = conjugated_problem(&a, &b_t, &psi_t, &v, &u, 2.0, 2.0).expect("corpus construction");
            CorpusEntry { name: format!("sandwich-{i:02}"), problem, a, rank_s: s, b_on: b_t.norm() > 0.0, symbol: SymbolKind::Kernel }
        })
        .collect()
}

/// 20 pure-exponential problems whose normalized matrices repeat singular values.
pub fn degenerate_corpus(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns: [&[f64]; 6] = [
        &[0.6, 0.6],
        &[0.8, 0.8, 0.8],
        &[0.7, 0.7, 0.0],
        &[0.9, 0.4, 0.4],
        &[1.0, 1.0],
        &[1.0, 1.0, 0.5],
    ];
    (0..20)
        .map(|i| {
            let a = patterns[i % patterns.len()].to_vec();
            let n = a.len();
            let s = a.iter().filter(|&&x| x > 0.0).count();
            let mut b_t = small_vector(n, 0.6, &mut rng);
            let mut c = small_vector(n, 0.5, &mut rng);
            for k in 0..n {
                if a[k] == 1.0 {
                    b_t[k] = C64::new(0.0, 0.0);
                    c[k] = C64::new(0.0, 0.0);
                }
            }
            let psi_t = ExpPoly::kernel(&c).scale(C64::new(0.5 + 0.1 * i as f64, 0.2));
            let v = random_unitary(n, &mut rng);
            let u = random_unitary(n, &mut rng);
            let (p, q) = if a.contains(&1.0) { (2.0, 2.0) } else { (2.0, 1.0) };
            let problem = conjugated_problem(&a, &b_t, &psi_t, &v, &u, p, q).expect("corpus construction");
            CorpusEntry { name: format!("degenerate-{i:02}"), problem, a, rank_s: s, b_on: true, symbol: SymbolKind::Kernel }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wco::{classify, normalize, Verdict};

    #[test]
    fn corpus_sizes_and_coverage() {
        let c = certified_corpus(7);
        assert_eq!(c.len(), 50);
        for n in 1..=3 {
            for s in 0..=n {
                assert!(c.iter().any(|e| e.problem.dim() == n && e.rank_s == s), "n = {n}, s = {s}");
            }
        }
        for lvl in [0.3, 0.9, 1.0] {
            assert!(c.iter().any(|e| e.a.contains(&lvl)));
        }
        assert!(c.iter().any(|e| e.b_on) && c.iter().any(|e| !e.b_on));
        assert!(c.iter().any(|e| e.symbol == SymbolKind::One));
        assert_eq!(q_less_p_corpus(7).len(), 30);
        assert_eq!(degenerate_corpus(7).len(), 20);
    }

    #[test]
    fn verdicts_are_mixed() {
        let verdicts: Vec<Verdict> = certified_corpus(7).iter().map(|e| classify(&e.problem).unwrap().verdict).collect();
        for v in [Verdict::Unbounded, Verdict::BoundedNotCompact, Verdict::Compact] {
            assert!(verdicts.contains(&v), "{v:?} missing");
        }
    }

    #[test]
    fn normalization_recovers_levels() {
        for e in certified_corpus(3).iter().chain(sandwich_corpus().iter()) {
            let nm = normalize(&e.problem).unwrap();
            assert_eq!(nm.rank_s, e.rank_s, "{}", e.name);
            for (x, y) in nm.a_t.iter().zip(&e.a) {
                assert!((x - y).abs() < 1e-10, "{}", e.name);
            }
        }
    }
}
