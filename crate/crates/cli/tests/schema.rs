use fockop::schema::{ExtReal, ProblemFile};
use fockop_core::funcspace::{AffineMap, ExpPoly, MultiIndex, Term};
use fockop_core::linalg::{CMatrix, CVector, C64};
use fockop_core::wco::WcoProblem;
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C64> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, b)| C64::new(a, b))
}

fn problem() -> impl Strategy<Value = WcoProblem> {
    (1usize..4).prop_flat_map(|n| {
        let term = (cplx(), prop::collection::vec(0u32..4, n), prop::collection::vec(cplx(), n))
            .prop_map(|(coeff, power, freq)| Term { coeff, power: MultiIndex(power), freq: CVector(freq) });
        (
            prop::collection::vec(term, 1..4),
            prop::collection::vec(cplx(), n * n),
            prop::collection::vec(cplx(), n),
            0.1f64..8.0,
            0.1f64..8.0,
        )
            .prop_filter_map("zero symbol", move |(terms, a, b, p, q)| {
                let psi = ExpPoly::new(n, terms).ok()?;
                let phi = AffineMap::new(CMatrix::from_row_major(a).ok()?, CVector(b)).ok()?;
                WcoProblem::new(psi, phi, p, q).ok()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn problem_files_round_trip(pr in problem(), named in any::<bool>()) {
        let name = named.then(|| "case".to_string());
        let file = ProblemFile::from_problem(name, &pr);
        let text = serde_json::to_string_pretty(&file).unwrap();
        let parsed = ProblemFile::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &file);
        prop_assert_eq!(parsed.to_problem().unwrap(), pr);
    }

    #[test]
    fn extended_reals_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL, inf in any::<bool>()) {
        let v = if inf { ExtReal::Infinite } else { ExtReal::Finite(x) };
        let back: ExtReal = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        prop_assert_eq!(back, v);
    }
}
