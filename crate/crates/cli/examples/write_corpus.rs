//! Regenerates the shipped problem files: `cargo run --example write_corpus -- <dir>`.

use std::path::PathBuf;

use fockop::schema::ProblemFile;
use fockop_core::corpus::{certified_corpus, degenerate_corpus, q_less_p_corpus, sandwich_corpus};
use fockop_core::funcspace::{AffineMap, ExpPoly};
use fockop_core::linalg::{CMatrix, CVector, C64};
use fockop_core::wco::WcoProblem;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn named() -> Vec<(String, WcoProblem)> {
    let diag = |a: &[f64], b: &[C64]| AffineMap::new(CMatrix::diag_real(a), CVector(b.to_vec())).unwrap();
    let b = CVector(vec![c(0.3, -0.2)]);
    let shift = ExpPoly::kernel(&b.scale(c(-1.0, 0.0))).scale(c((-0.5 * b.norm_sqr()).exp(), 0.0));
    vec![
        ("identity".into(), WcoProblem::new(ExpPoly::one(1), AffineMap::identity(1), 2.0, 2.0).unwrap()),
        ("rank-zero".into(), WcoProblem::new(ExpPoly::kernel(&CVector(vec![c(0.4, 0.3)])), AffineMap::constant(CVector(vec![c(0.5, -0.1)])), 2.0, 2.0).unwrap()),
        ("dilation-two".into(), WcoProblem::new(ExpPoly::one(1), diag(&[2.0], &[c(0.0, 0.0)]), 2.0, 2.0).unwrap()),
        ("translation".into(), WcoProblem::new(ExpPoly::one(1), diag(&[1.0], &[c(0.5, 0.0)]), 2.0, 2.0).unwrap()),
        ("weighted-translation".into(), WcoProblem::new(shift, diag(&[1.0], &[c(0.3, -0.2)]), 2.0, 2.0).unwrap()),
        ("half-dilation-p1-q2".into(), WcoProblem::new(ExpPoly::one(1), diag(&[0.5], &[c(0.0, 0.0)]), 1.0, 2.0).unwrap()),
        ("half-dilation-p2-q1".into(), WcoProblem::new(ExpPoly::one(1), diag(&[0.5], &[c(0.2, 0.0)]), 2.0, 1.0).unwrap()),
        ("identity-p2-q1".into(), WcoProblem::new(ExpPoly::one(2), AffineMap::identity(2), 2.0, 1.0).unwrap()),
    ]
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut all = named();
    let seed = 2024;
    let cert = certified_corpus(seed);
    for i in [1usize, 4, 7, 10, 13, 18, 23, 26, 31, 38, 45, 49] {
        all.push((cert[i].name.clone(), cert[i].problem.clone()));
    }
    for e in sandwich_corpus().into_iter().step_by(2) {
        all.push((e.name, e.problem));
    }
    for e in q_less_p_corpus(seed).into_iter().take(4) {
        all.push((e.name, e.problem));
    }
    for e in degenerate_corpus(seed).into_iter().take(4) {
        all.push((e.name, e.problem));
    }
    for (name, problem) in all {
        let file = ProblemFile::from_problem(Some(name.clone()), &problem);
        let text = serde_json::to_string_pretty(&file).unwrap();
        std::fs::write(dir.join(format!("{name}.json")), text + "\n").unwrap();
    }
}
