use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fockop::schema::Report;
use fockop::verify::VerifyReport;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus(name: &str) -> PathBuf {
    root().join("corpus").join(name)
}

fn fockop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockop")).args(args).output().expect("run fockop")
}

fn fockop_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockop")).args(args).env(key, value).output().expect("run fockop")
}

fn report(args: &[&str]) -> Report {
    let out = fockop(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identity_bounds() {
    let r = report(&["bounds", path_str(&corpus("identity.json"))]);
    assert_eq!(serde_json::to_value(r.classification.verdict).unwrap(), "bounded_not_compact");
    let b = r.bounds.unwrap();
    assert_eq!((b.lower, b.upper), (1.0, 1.0));
}

#[test]
fn rank_zero_exact_norm() {
    let r = report(&["bounds", path_str(&corpus("rank-zero.json"))]);
    let b = r.bounds.unwrap();
    // psi = K_c with c = 0.4 + 0.3i, b = 0.5 - 0.1i
    let expected = ((0.16f64 + 0.09 + 0.25 + 0.01) / 2.0).exp();
    assert!((b.lower - expected).abs() < 1e-12 && b.lower == b.upper);
}

#[test]
fn expanding_map_is_unbounded() {
    let file = corpus("dilation-two.json");
    let r = report(&["classify", path_str(&file)]);
    assert_eq!(serde_json::to_value(r.classification.verdict).unwrap(), "unbounded");
    assert!(r.classification.certificate.iter().any(|c| c.contains("spectral norm 2 > 1")));
    assert_eq!(fockop(&["classify", path_str(&file)]).status.code(), Some(0));
    assert_eq!(fockop(&["classify", path_str(&file), "--exit-verdict"]).status.code(), Some(3));
    assert_eq!(fockop(&["bounds", path_str(&corpus("identity.json")), "--exit-verdict"]).status.code(), Some(0));
}

#[test]
fn unbounded_ell_is_encoded_as_not_finite() {
    let out = fockop(&["bounds", path_str(&corpus("translation.json"))]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["ell"]["sup"], serde_json::json!({"finite": false}));
    assert!(v.get("bounds").is_none());
}

#[test]
fn malformed_and_missing_files() {
    let dir = std::env::temp_dir().join(format!("fockop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"version": 1, "n": 2, "p": 2, "q": 2, "psi": [], "phi": {"A": [[1, 0]], "b": [[0, 0]]}}"#).unwrap();
    let out = fockop(&["classify", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("phi.A"));
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(fockop(&["bounds", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(fockop(&["verify", path_str(&dir)]).status.code(), Some(2));
    assert_eq!(fockop(&["classify", path_str(&dir.join("absent.json"))]).status.code(), Some(1));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn essnorm_outside_range_exits_4() {
    let out = fockop(&["essnorm", path_str(&corpus("half-dilation-p2-q1.json"))]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 < p <= q"));
    let r = report(&["essnorm", path_str(&corpus("weighted-translation.json"))]);
    let b = r.bounds.unwrap();
    assert_eq!((b.essential_lower, b.essential_upper), (Some(1.0), Some(2.0)));
}

#[test]
fn reports_round_trip() {
    for (cmd, name) in [("bounds", "certified-07.json"), ("oracle", "sandwich-02.json"), ("bounds", "q-less-p-00.json"), ("classify", "translation.json")] {
        let out = fockop(&[cmd, path_str(&corpus(name))]);
        let text = String::from_utf8(out.stdout).unwrap();
        let r: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text, "{name}");
        let again: Report = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(again, r);
    }
}

#[test]
fn directory_runs_are_deterministic() {
    let dir = root().join("corpus");
    let a = fockop(&["bounds", path_str(&dir)]);
    let b = fockop_env(&["bounds", path_str(&dir)], "FOCKOP_THREADS", "1");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let reports: Vec<Report> = serde_json::from_slice(&a.stdout).unwrap();
    let names: Vec<String> = reports.iter().map(|r| format!("{}.json", r.problem.name.as_deref().unwrap())).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn overrides_are_echoed() {
    let r = report(&["classify", path_str(&corpus("identity.json")), "--quad-nodes", "17", "--seed", "5"]);
    assert_eq!((r.quad.nodes_per_axis, r.quad.seed), (17, 5));
}

#[test]
fn text_output() {
    let out = fockop(&["bounds", path_str(&corpus("identity.json")), "--text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("verdict: BoundedNotCompact"));
    assert!(text.contains("norm: [1.000000000000e0, 1.000000000000e0]"));
}

#[test]
fn verify_suites_pass_on_shipped_corpus() {
    let dir = root().join("corpus");
    for suite in ["lemmas", "sandwich", "normalization-independence"] {
        let out = fockop(&["verify", path_str(&dir), "--suite", suite]);
        assert!(out.status.success(), "{suite}");
        let r: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r.failed, 0);
        assert!(r.passed > 0);
        assert!(r.checks.iter().all(|c| c.suite == suite));
    }
}

/// Golden reports; set `FOCKOP_UPDATE_GOLDEN=1` to rewrite them.
#[test]
fn golden_reports() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var("FOCKOP_UPDATE_GOLDEN").is_ok();
    let cases = [
        ("classify", "dilation-two"),
        ("bounds", "identity"),
        ("bounds", "rank-zero"),
        ("bounds", "certified-07"),
        ("bounds", "q-less-p-00"),
        ("essnorm", "weighted-translation"),
        ("oracle", "sandwich-02"),
    ];
    for (cmd, name) in cases {
        let out = fockop(&[cmd, path_str(&corpus(&format!("{name}.json")))]);
        assert!(out.status.success());
        let file = golden.join(format!("{cmd}-{name}.json"));
        if update {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&file, &out.stdout).unwrap();
        }
        let expected = std::fs::read(&file).unwrap_or_else(|_| panic!("missing golden file {}", file.display()));
        assert!(out.stdout == expected, "{cmd} {name} differs from {}", file.display());
    }
}
