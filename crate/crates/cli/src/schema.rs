//! JSON problem files and reports. Complex numbers are `[re, im]` pairs; an
//! infinite quantity is written `{"finite": false}`.

use serde::de::{self, Deserializer};
use serde::ser::{self, SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use fockop_core::carleson::CarlesonReport;
use fockop_core::funcspace::{AffineMap, ExpPoly, MultiIndex, Term};
use fockop_core::linalg::{CMatrix, CVector, C64};
use fockop_core::oracle::{EssentialEstimate, RayleighEntry, WitnessTable};
use fockop_core::quad::{NormMode, QuadMethod, QuadSpec};
use fockop_core::wco::{Classification, NormBounds, WcoProblem};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

/// A real number or `+inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(x)
        }
    }
}

impl ExtReal {
    pub fn value(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            ExtReal::Finite(x) if x.is_finite() => s.serialize_f64(x),
            ExtReal::Finite(x) => Err(ser::Error::custom(format!("cannot encode {x}"))),
            ExtReal::Infinite => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("finite", &false)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Flag { finite: bool },
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtReal::Finite(x)),
            Raw::Flag { finite: false } => Ok(ExtReal::Infinite),
            Raw::Flag { finite: true } => Err(de::Error::custom("a finite value must be written as a number")),
        }
    }
}

pub type Pair = [f64; 2];

fn to_c(p: &Pair) -> C64 {
    C64::new(p[0], p[1])
}

fn to_pair(z: &C64) -> Pair {
    [z.re, z.im]
}

pub fn vector_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(to_pair).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub coeff: Pair,
    pub power: Vec<u32>,
    pub freq: Vec<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiFile {
    /// Row-major entries of `A`.
    #[serde(rename = "A")]
    pub a: Vec<Pair>,
    pub b: Vec<Pair>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<QuadMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes_per_axis: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allow_closed_form: Option<bool>,
}

impl QuadOverrides {
    pub fn apply(&self, mut spec: QuadSpec) -> QuadSpec {
        if let Some(m) = self.method {
            spec.method = m;
        }
        if let Some(k) = self.nodes_per_axis {
            spec.nodes_per_axis = k;
        }
        if let Some(k) = self.samples {
            spec.samples = k;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if self.sup_radius.is_some() {
            spec.sup_radius = self.sup_radius;
        }
        if self.sup_grid.is_some() {
            spec.sup_grid = self.sup_grid;
        }
        if let Some(k) = self.refine_iters {
            spec.refine_iters = k;
        }
        if let Some(b) = self.allow_closed_form {
            spec.allow_closed_form = b;
        }
        spec
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub psi: Vec<TermFile>,
    pub phi: PhiFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad: Option<QuadOverrides>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let f: ProblemFile = serde_json::from_str(text)?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let bad = |m: String| Err(SchemaError::Invalid(m));
        if self.version != SCHEMA_VERSION {
            return bad(format!("unsupported version {} (expected {SCHEMA_VERSION})", self.version));
        }
        let n = self.n;
        if n == 0 {
            return bad("n must be positive".into());
        }
        if self.phi.a.len() != n * n {
            return bad(format!("phi.A has {} entries; expected {}", self.phi.a.len(), n * n));
        }
        if self.phi.b.len() != n {
            return bad(format!("phi.b has {} entries; expected {n}", self.phi.b.len()));
        }
        for (i, t) in self.psi.iter().enumerate() {
            if t.power.len() != n || t.freq.len() != n {
                return bad(format!("psi[{i}]: power and freq must have length {n}"));
            }
        }
        let reals = self
            .phi
            .a
            .iter()
            .chain(&self.phi.b)
            .chain(self.psi.iter().flat_map(|t| t.freq.iter().chain(std::iter::once(&t.coeff))))
            .flatten();
        if reals.chain([self.p, self.q].iter()).any(|x| !x.is_finite()) {
            return bad("all numbers must be finite".into());
        }
        if !(self.p > 0.0 && self.q > 0.0) {
            return bad(format!("exponents must be positive; got p = {}, q = {}", self.p, self.q));
        }
        Ok(())
    }

    pub fn to_problem(&self) -> Result<WcoProblem, SchemaError> {
        self.validate()?;
        let n = self.n;
        let terms = self
            .psi
            .iter()
            .map(|t| Term { coeff: to_c(&t.coeff), power: MultiIndex(t.power.clone()), freq: CVector(t.freq.iter().map(to_c).collect()) })
            .collect();
        let invalid = |e: fockop_core::Error| SchemaError::Invalid(e.to_string());
        let psi = ExpPoly::new(n, terms).map_err(invalid)?;
        let a = CMatrix::from_row_major(self.phi.a.iter().map(to_c).collect()).map_err(invalid)?;
        let phi = AffineMap::new(a, CVector(self.phi.b.iter().map(to_c).collect())).map_err(invalid)?;
        WcoProblem::new(psi, phi, self.p, self.q).map_err(invalid)
    }

    pub fn from_problem(name: Option<String>, problem: &WcoProblem) -> Self {
        let n = problem.dim();
        let psi = problem
            .psi
            .terms()
            .iter()
            .map(|t| TermFile { coeff: to_pair(&t.coeff), power: t.power.0.clone(), freq: vector_pairs(&t.freq) })
            .collect();
        let a = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| to_pair(&problem.phi.a[(i, j)])).collect();
        ProblemFile {
            version: SCHEMA_VERSION,
            name,
            n,
            p: problem.p,
            q: problem.q,
            psi,
            phi: PhiFile { a, b: vector_pairs(&problem.phi.b) },
            quad: None,
        }
    }

    /// Quadrature settings: defaults for the dimension, then the file's overrides.
    pub fn quad_spec(&self) -> QuadSpec {
        let base = QuadSpec::for_dim(self.n);
        match &self.quad {
            Some(o) => o.apply(base),
            None => base,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllSection {
    pub sup: ExtReal,
    pub sup_mode: NormMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limsup: Option<ExtReal>,
    pub head_det: f64,
    pub rank_s: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlesonSection {
    pub r_exponent: f64,
    pub lr_norm: ExtReal,
    pub lr_err_estimate: f64,
    pub member: bool,
    pub mode: NormMode,
}

impl From<&CarlesonReport> for CarlesonSection {
    fn from(r: &CarlesonReport) -> Self {
        CarlesonSection {
            r_exponent: r.r_exponent,
            lr_norm: r.lr_norm.value.into(),
            lr_err_estimate: if r.lr_norm.err_estimate.is_finite() { r.lr_norm.err_estimate } else { 0.0 },
            member: r.member,
            mode: r.mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub degree: u32,
    pub basis_size: usize,
    /// `||P_N W P_N||`.
    pub matrix_norm: f64,
    /// `||W P_N||`.
    pub compressed_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSection {
    pub rayleigh: Vec<RayleighEntry>,
    pub rayleigh_max: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncations: Vec<TruncationRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub essential_estimate: Option<EssentialEstimate>,
    pub witness: WitnessTable,
    /// Every sampled quotient lies below the certified upper bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub within_upper_bound: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub command: String,
    pub problem: ProblemFile,
    pub quad: QuadSpec,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<EllSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carleson: Option<CarlesonSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<NormBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: &str = r#"{"version": 1, "n": 1, "p": 2, "q": 2,
        "psi": [{"coeff": [1, 0], "power": [0], "freq": [[0, 0]]}],
        "phi": {"A": [[1, 0]], "b": [[0, 0]]}}"#;

    #[test]
    fn ext_real_encoding() {
        assert_eq!(serde_json::to_string(&ExtReal::Infinite).unwrap(), r#"{"finite":false}"#);
        assert_eq!(serde_json::to_string(&ExtReal::Finite(1.5)).unwrap(), "1.5");
        let back: ExtReal = serde_json::from_str(r#"{"finite": false}"#).unwrap();
        assert_eq!(back, ExtReal::Infinite);
        assert!(serde_json::from_str::<ExtReal>(r#"{"finite": true}"#).is_err());
        assert!(serde_json::to_string(&ExtReal::Finite(f64::NAN)).is_err());
    }

    #[test]
    fn parses_identity() {
        let f = ProblemFile::parse(IDENTITY).unwrap();
        let pr = f.to_problem().unwrap();
        assert_eq!(pr.dim(), 1);
        assert_eq!(ProblemFile::from_problem(None, &pr), f);
    }

    #[test]
    fn rejects_bad_dimensions() {
        let t = IDENTITY.replace(r#""b": [[0, 0]]"#, r#""b": [[0, 0], [1, 0]]"#);
        assert!(matches!(ProblemFile::parse(&t), Err(SchemaError::Invalid(_))));
        let t = IDENTITY.replace(r#""version": 1"#, r#""version": 7"#);
        assert!(ProblemFile::parse(&t).is_err());
        assert!(ProblemFile::parse(&IDENTITY.replace("\"q\": 2", "\"q\": -1")).is_err());
        assert!(ProblemFile::parse(&IDENTITY.replace("\"n\": 1", "\"n\": 1, \"extra\": 0")).is_err());
    }

    #[test]
    fn overrides_apply_in_order() {
        let mut f = ProblemFile::parse(IDENTITY).unwrap();
        f.quad = Some(QuadOverrides { nodes_per_axis: Some(12), seed: Some(9), ..Default::default() });
        let s = f.quad_spec();
        assert_eq!((s.nodes_per_axis, s.seed), (12, 9));
    }
}
