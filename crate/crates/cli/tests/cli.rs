use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pf-lattice"));
    cmd.args(args).env_remove("PF_LATTICE_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, &[])
}

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/report.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).expect("schema compiles")
    })
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = validator().iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations {errors:?} in {v}");
}

fn ints(v: &Value) -> Vec<u64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect()
}

#[test]
fn analyze_swap_plus_identity() {
    let r = run(&["analyze", &fixture("swap_plus_identity.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_valid(&v);
    let ps = &v["peripheral_structure"];
    assert_eq!(ints(&ps["permutation"]), [2, 1, 3, 4]);
    assert_eq!(ps["period"], 2);
    assert_eq!(ps["rank"], 4);
    for (i, row) in ps["projection"].as_array().unwrap().iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((x.as_f64().unwrap() - expected).abs() < 1e-9);
        }
    }
}

#[test]
fn analyze_nilpotent_is_a_hypothesis_violation() {
    let r = run(&["analyze", &fixture("nilpotent.json")]);
    assert_eq!(r.code, 2);
    let v = r.json();
    assert_valid(&v);
    assert!(v["reason"]
        .as_str()
        .unwrap()
        .contains("spectral radius below tolerance"));
    assert!(r.stderr.contains("spectral radius below tolerance"));
}

#[test]
fn analyze_cyclic3_is_one_cycle() {
    let r = run(&["analyze", &fixture("cyclic3.json")]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["cycles"].as_array().unwrap().len(), 1);
    assert_eq!(ints(&v["cycles"][0]).len(), 3);
    assert_eq!(v["peripheral_structure"]["period"], 3);
}

#[test]
fn analyze_reads_csv() {
    let r = run(&["analyze", &fixture("swap_plus_identity.csv")]);
    assert_eq!(r.code, 0);
    assert_eq!(
        ints(&r.json()["peripheral_structure"]["permutation"]),
        [2, 1, 3, 4]
    );
}

#[test]
fn bad_inputs_exit_one() {
    assert_eq!(run(&["analyze", "/nonexistent/matrix.json"]).code, 1);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("neg.json");
    std::fs::write(&bad, r#"{"n": 2, "rows": [[1, -1], [0, 1]]}"#).unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).code, 1);
    let ragged = dir.path().join("ragged.json");
    std::fs::write(&ragged, r#"{"n": 2, "rows": [[1, 1], [0]]}"#).unwrap();
    assert_eq!(run(&["analyze", ragged.to_str().unwrap()]).code, 1);
    assert_eq!(run(&["frobnicate"]).code, 1);
    assert_eq!(run(&["analyze"]).code, 1);
}

#[test]
fn irreducible_modes() {
    let r = run(&["irreducible", "--plain", &fixture("ones4.json")]);
    assert_eq!(r.code, 0);
    assert_valid(&r.json());

    let r = run(&["irreducible", "--super-right", &fixture("diag21.json")]);
    assert_eq!(r.code, 3);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(ints(&v["witness_ideal"]), [2]);

    assert_eq!(
        run(&[
            "irreducible",
            "--super-left",
            &fixture("swap_plus_identity.json")
        ])
        .code,
        0
    );
    assert_eq!(
        run(&[
            "irreducible",
            "--super-right",
            &fixture("swap_plus_identity.json")
        ])
        .code,
        0
    );

    let r = run(&["irreducible", &fixture("swap_plus_identity.json")]);
    assert_eq!(r.code, 3);
    assert_eq!(ints(&r.json()["witness_ideal"]), [1, 2]);
}

#[test]
fn irreducible_collections_and_arity() {
    // A collection is irreducible when its union digraph is.
    let r = run(&[
        "irreducible",
        "--plain",
        &fixture("swap_plus_identity.json"),
        &fixture("ones4.json"),
    ]);
    assert_eq!(r.code, 0);
    let r = run(&[
        "irreducible",
        "--super-left",
        &fixture("ones4.json"),
        &fixture("ones4.json"),
    ]);
    assert_eq!(r.code, 1);
    let r = run(&[
        "irreducible",
        "--plain",
        &fixture("ones4.json"),
        &fixture("diag21.json"),
    ]);
    assert_eq!(r.code, 1);
    let r = run(&[
        "irreducible",
        "--plain",
        "--super-left",
        &fixture("ones4.json"),
    ]);
    assert_eq!(r.code, 1);
}

#[test]
fn commutant_gap() {
    let r = run(&["commutant", "--gap", &fixture("swap_plus_identity.json")]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert!(v["gap_right"].as_f64().unwrap() <= 1e-7);
    assert!(v["gap_left"].as_f64().unwrap() <= 1e-7);

    let v = run(&["commutant", "--gap", &fixture("diag21.json")]).json();
    assert!((v["gap_right"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["gap_left"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn commutant_relation() {
    let r = run(&["commutant", "--relation", &fixture("diag21.json")]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["off_diagonal"], serde_json::json!([[2, 1]]));
    let v = run(&[
        "commutant",
        "--relation",
        "--side",
        "left",
        &fixture("diag21.json"),
    ])
    .json();
    assert_eq!(v["off_diagonal"], serde_json::json!([[1, 2]]));
}

#[test]
fn commutant_sample() {
    let r = run(&[
        "commutant",
        "--sample",
        "5",
        "--seed",
        "7",
        &fixture("identity.json"),
    ]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 5);
    for s in samples {
        let rows = s["rows"].as_array().unwrap();
        assert!(rows
            .iter()
            .flat_map(|r| r.as_array().unwrap())
            .all(|x| x.as_f64().unwrap() >= 0.0));
    }
    let again = run(&[
        "commutant",
        "--sample",
        "5",
        "--seed",
        "7",
        &fixture("identity.json"),
    ]);
    assert_eq!(r.stdout, again.stdout);
}

#[test]
fn commutant_needs_a_mode() {
    assert_eq!(run(&["commutant", &fixture("identity.json")]).code, 1);
    assert_eq!(
        run(&[
            "commutant",
            "--gap",
            "--relation",
            &fixture("identity.json")
        ])
        .code,
        1
    );
}

#[test]
fn triangularize_examples() {
    let r = run(&[
        "triangularize",
        &fixture("ones4.json"),
        &fixture("swap_plus_identity.json"),
    ]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["index"], 1);
    assert_eq!(v["radius"].as_f64(), Some(0.0));

    let v = run(&[
        "triangularize",
        &fixture("upper2.json"),
        &fixture("proj2.json"),
    ])
    .json();
    assert_valid(&v);
    assert_eq!(v["index"], 2);
    assert_eq!(v["chain"]["links"], serde_json::json!([[], [1], [1, 2]]));

    let v = run(&[
        "triangularize",
        &fixture("ones4.json"),
        &fixture("ones4.json"),
    ])
    .json();
    let zero = v["commutator"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .all(|x| x.as_f64() == Some(0.0));
    assert!(zero);
}

#[test]
fn triangularize_preconditions_exit_five() {
    let r = run(&[
        "triangularize",
        &fixture("diag21.json"),
        &fixture("ones4.json"),
    ]);
    assert_eq!(r.code, 5);
    assert_valid(&r.json());
    // The commutator of these two has entries of both signs.
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"n": 2, "rows": [[0, 1], [0, 0]]}"#).unwrap();
    std::fs::write(&b, r#"{"n": 2, "rows": [[0, 0], [1, 0]]}"#).unwrap();
    assert_eq!(
        run(&["triangularize", a.to_str().unwrap(), b.to_str().unwrap()]).code,
        5
    );
}

#[test]
fn suite_examples() {
    let r = run(&["suite", "--only", "turo", "--n", "3"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["properties"].as_array().unwrap().len(), 1);

    assert_eq!(run(&["suite", "--trials", "0"]).code, 1);
    assert_eq!(run(&["suite", "--only", "nonsense"]).code, 1);
    assert_eq!(run(&["suite", "--n", "1"]).code, 1);
    assert_eq!(run(&["suite", "--n", "5-3"]).code, 1);
}

#[test]
fn suite_full_run_passes_and_validates() {
    let r = run(&["suite", "--n", "4", "--trials", "20", "--seed", "42"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let v = r.json();
    assert_valid(&v);
    assert_eq!(v["properties"].as_array().unwrap().len(), 12);
    assert_eq!(v["total_fail"], 0);
}

#[test]
fn reports_are_pure() {
    for args in [
        vec!["analyze".to_string(), fixture("weighted_ones.json")],
        vec![
            "irreducible".to_string(),
            "--super-right".to_string(),
            fixture("diag21.json"),
        ],
        vec![
            "commutant".to_string(),
            "--relation".to_string(),
            fixture("swap_plus_identity.json"),
        ],
        vec![
            "triangularize".to_string(),
            fixture("upper2.json"),
            fixture("proj2.json"),
        ],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let r = run(&[
        "analyze",
        &fixture("weighted_ones.json"),
        "--report",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), r.stdout);

    let diag = dir.path().join("diag.json");
    let r = run(&[
        "--report",
        diag.to_str().unwrap(),
        "analyze",
        &fixture("nilpotent.json"),
    ]);
    assert_eq!(r.code, 2);
    assert_eq!(std::fs::read_to_string(&diag).unwrap(), r.stdout);
}

#[test]
fn floats_carry_seventeen_digits() {
    let v = run(&["analyze", &fixture("weighted_ones.json")]);
    // The projection of R has entries 1/10 up to roundoff; 15 digits would collapse them.
    assert!(v.stdout.contains("0.099999999999999964"), "{}", v.stdout);
    let parsed = v.json();
    assert_eq!(parsed["spectrum"]["radius"].as_f64(), Some(6.0));
    assert_eq!(
        parsed["peripheral_structure"]["projection"][0][0].as_f64(),
        Some(0.099_999_999_999_999_96)
    );
}

#[test]
fn tolerance_sources() {
    let k = fixture("weighted_ones.json");
    assert_eq!(
        run_env(&["analyze", &k], &[("PF_LATTICE_TOL", "1e-10")]).code,
        0
    );
    assert_eq!(
        run_env(&["analyze", &k], &[("PF_LATTICE_TOL", "abc")]).code,
        1
    );
    assert_eq!(
        run_env(&["analyze", &k], &[("PF_LATTICE_TOL", "-1")]).code,
        1
    );
    // The flag wins over the environment.
    assert_eq!(
        run_env(
            &["analyze", &k, "--tol", "1e-10"],
            &[("PF_LATTICE_TOL", "abc")]
        )
        .code,
        0
    );
    assert_eq!(run(&["analyze", &k, "--tol", "0"]).code, 1);

    // Entries below the zero threshold are dropped: the coupling 1e-6 vanishes
    // at --tol 1e-5, leaving a reducible matrix.
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("weak.json");
    std::fs::write(&m, r#"{"n": 2, "rows": [[1, 1e-6], [1, 1]]}"#).unwrap();
    let m = m.to_str().unwrap();
    assert_eq!(run(&["irreducible", m]).code, 0);
    assert_eq!(run(&["irreducible", m, "--tol", "1e-5"]).code, 3);
    assert_eq!(
        run_env(&["irreducible", m], &[("PF_LATTICE_TOL", "1e-5")]).code,
        3
    );
}
