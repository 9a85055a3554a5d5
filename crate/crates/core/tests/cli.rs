use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;
use toricstab::cli::document::load;
use toricstab::cli::report::Report;
use toricstab::cli::run;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn schema(name: &str) -> Value {
    let path = format!("{}/schema/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn all_fixtures() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(format!("{}/fixtures", env!("CARGO_MANIFEST_DIR")))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn call(args: &[&str]) -> Outcome {
    let mut full = vec!["toricstab"];
    full.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(full, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn with_temp_doc(text: &str, args: &[&str]) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.json");
    std::fs::write(&path, text).unwrap();
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.insert(1, &p);
    call(&full)
}

#[test]
fn check_tangent_plane_text() {
    let o = call(&["check", &fixture("tp2.json")]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(
        o.out.lines().next().unwrap(),
        "STABLE, μ(E)=3/2, max flat slope 1"
    );
}

#[test]
fn restrict_blown_up_sum_text() {
    let o = call(&["restrict", &fixture("blp2_sum.json"), "--wall", "0"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(
        o.out.lines().next().unwrap(),
        "degrees: [1, 2]; restriction NOT semistable"
    );
}

#[test]
fn weights_of_a_line() {
    let o = call(&["weights", &fixture("p2.json"), "--divisor", "1,0,0"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(o.out, "(1, 1, 1)\n");
    let o = call(&["weights", &fixture("blp2.json"), "--divisor", "0,2,0,-1"]);
    assert_eq!(o.out, "(1, 2, 1, 1)\n");
    let o = call(&["weights", &fixture("p2.json"), "--divisor", "1/2,0,0"]);
    assert_eq!(o.out, "(1/2, 1/2, 1/2)\n");
    let o = call(&["weights", &fixture("p2.json"), "--divisor", "1,x,0"]);
    assert_eq!(o.code, 1);
}

#[test]
fn semistable_only() {
    let o = call(&["check", &fixture("p2_split3.json"), "--semistable-only"]);
    assert!(o.out.starts_with("SEMISTABLE, μ(E)=1"), "{}", o.out);
    let o = call(&[
        "check",
        &fixture("p2_split2.json"),
        "--semistable-only",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&o.out).unwrap();
    assert!(v.get("stable").is_none());
    assert_eq!(v["semistable"], Value::Bool(false));
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["validate", &fixture("tp2.json")]).code, 0);
    let o = call(&["validate", &fixture("p3_incompatible.json")]);
    assert_eq!(o.code, 2);
    assert!(o.out.is_empty());
    assert!(o.err.contains("incompatible"));
    assert_eq!(call(&["check", &fixture("p3_incompatible.json")]).code, 1);
    assert_eq!(call(&["check", &fixture("p2.json")]).code, 1);
    assert_eq!(
        call(&["restrict", &fixture("tp2.json"), "--wall", "9"]).code,
        1
    );
    assert_eq!(
        call(&["reconstruct", &fixture("p2_o_minus_d0.json")]).code,
        1
    );
    assert_eq!(call(&["check", "--bogus", &fixture("tp2.json")]).code, 1);
}

#[test]
fn located_input_errors() {
    let text = std::fs::read_to_string(fixture("tp2.json")).unwrap();
    let bad = text.replacen(
        r#"{"max_j": 0, "space": "full"}, {"max_j": 1, "space": [[1, 0]]}"#,
        r#"{"max_j": 2, "space": "full"}, {"max_j": 1, "space": [[1, 0]]}"#,
        1,
    );
    assert_ne!(bad, text);
    let o = with_temp_doc(&bad, &["check"]);
    assert_eq!(o.code, 1);
    assert!(o.err.contains("bundle.filtrations[1].steps"), "{}", o.err);

    let bad = text.replace(r#""weights": [1, 1, 1]"#, r#""weights": [1, "1/0", 1]"#);
    let o = with_temp_doc(&bad, &["check"]);
    assert_eq!(o.code, 1);
    assert!(o.err.contains("polarization.weights[1]"), "{}", o.err);

    let bad = text.replace(r#""rank": 2"#, r#""rank": 2, "rnak": 2"#);
    let o = with_temp_doc(&bad, &["check"]);
    assert!(o.err.contains("rnak"), "{}", o.err);

    let bad = text.replace("[[-1, -1], [1, 0], [0, 1]]", "[[-1, -1], [2, 0], [0, 1]]");
    assert_eq!(with_temp_doc(&bad, &["check"]).code, 1);
}

#[test]
fn oversized_inputs_are_rejected() {
    let text = std::fs::read_to_string(fixture("tp2.json")).unwrap();
    let o = with_temp_doc(
        &text.replace(r#""rank": 2"#, r#""rank": 1000000000000"#),
        &["check"],
    );
    assert_eq!(o.code, 1);
    assert!(o.err.contains("bundle.rank"), "{}", o.err);
    let o = with_temp_doc(
        &text.replace("[[-1, -1], [1, 0]", "[[-1, -9223372036854775808], [1, 0]"),
        &["validate"],
    );
    assert_eq!(o.code, 1);
    let o = with_temp_doc(
        &text.replace(r#""max_j": 1,"#, r#""max_j": 9223372036854775807,"#),
        &["check"],
    );
    assert_eq!(o.code, 1);
    assert!(o.err.contains("threshold"), "{}", o.err);

    // Polytopes this large are described but not enumerated.
    let big = text
        .replace(r#""max_j": 0,"#, r#""max_j": 1099511627775,"#)
        .replace(r#""max_j": 1,"#, r#""max_j": 1099511627776,"#);
    let o = with_temp_doc(&big, &["parliament", "--format", "json"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(!o.out.contains("lattice_points"));
    assert_eq!(with_temp_doc(&big, &["reconstruct"]).code, 1);
}

#[test]
fn trace_output() {
    let o = call(&["check", &fixture("tp2.json"), "--trace"]);
    assert!(o.out.contains("L(E):"));
    assert!(o.out.contains("characters:"));
    let o = call(&["flats", &fixture("tp2.json"), "--trace", "--format", "json"]);
    let v: Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["trace"]["lattice"].as_array().unwrap().len(), 5);
    assert_eq!(v["trace"]["ground_set"].as_array().unwrap().len(), 3);
}

#[test]
fn svg_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for p in [&a, &b] {
        let o = call(&[
            "parliament",
            &fixture("blp2_sum.json"),
            "--wall",
            "0",
            "--svg",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.code, 0, "{}", o.err);
    }
    let sa = std::fs::read(&a).unwrap();
    assert_eq!(sa, std::fs::read(&b).unwrap());
    let text = String::from_utf8(sa).unwrap();
    assert!(text.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\""));
    assert_eq!(text.matches("class=\"wall-segment\"").count(), 2);
    let o = call(&[
        "parliament",
        &fixture("p3_tangent.json"),
        "--svg",
        dir.path().join("c.svg").to_str().unwrap(),
    ]);
    assert_eq!(o.code, 1);
}

fn every_command(f: &str) -> Vec<Vec<String>> {
    let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        s(&["check", f, "--trace"]),
        s(&["check", f, "--semistable-only"]),
        s(&["parliament", f, "--wall", "0", "--trace"]),
        s(&["flats", f]),
        s(&["restrict", f, "--wall", "1"]),
        s(&["reconstruct", f]),
        s(&["validate", f, "--trace"]),
    ]
}

fn numbers_are_integers(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.is_i64() || n.is_u64(),
        Value::Array(xs) => xs.iter().all(numbers_are_integers),
        Value::Object(m) => m.values().all(numbers_are_integers),
        _ => true,
    }
}

#[test]
fn json_reports_follow_the_schema() {
    let validator = jsonschema::validator_for(&schema("report.schema.json")).unwrap();
    let mut checked = 0;
    for path in all_fixtures() {
        let f = path.to_str().unwrap();
        for mut args in every_command(f) {
            args.extend(["--format".to_string(), "json".to_string()]);
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = call(&refs);
            if o.code != 0 {
                assert!(o.out.is_empty(), "{refs:?}");
                continue;
            }
            let v: Value = serde_json::from_str(&o.out).unwrap();
            let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{refs:?}: {errors:?}");
            assert!(numbers_are_integers(&v), "{refs:?}");
            let back: Report = serde_json::from_str(&o.out).unwrap();
            assert_eq!(back.json(), o.out);
            checked += 1;
        }
    }
    let o = call(&[
        "weights",
        &fixture("p2.json"),
        "--divisor",
        "2,0,0",
        "--format",
        "json",
    ]);
    assert!(validator.is_valid(&serde_json::from_str(&o.out).unwrap()));
    assert!(checked > 50, "{checked}");
}

#[test]
fn fixtures_follow_the_input_schema() {
    let validator = jsonschema::validator_for(&schema("input.schema.json")).unwrap();
    for path in all_fixtures() {
        let text = std::fs::read_to_string(&path).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert!(validator.is_valid(&v), "{}", path.display());
        load(&text).unwrap_or_else(|e| panic!("{}: {e:?}", path.display()));
    }
}

#[test]
fn json_output_is_deterministic() {
    for path in all_fixtures() {
        let f = path.to_str().unwrap();
        let a = call(&["check", f, "--format", "json", "--seed", "7"]);
        let b = call(&["check", f, "--format", "json", "--seed", "7"]);
        assert_eq!(a.out, b.out);
        assert_eq!(a.code, b.code);
    }
}

#[test]
fn binary_smoke() {
    let out = Command::new(env!("CARGO_BIN_EXE_toricstab"))
        .args(["check", &fixture("tp2.json")])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("STABLE, μ(E)=3/2"));
    let out = Command::new(env!("CARGO_BIN_EXE_toricstab"))
        .args(["validate", &fixture("p3_incompatible.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Parsing never panics, whatever happens to the text.
    #[test]
    fn parsing_is_total(cut in 0usize..2000, len in 0usize..40, junk in "[\\[\\]{}\",:0-9a-z/ -]{0,12}") {
        let text = std::fs::read_to_string(fixture("rank3_nontriv.json")).unwrap();
        let start = cut.min(text.len());
        let end = (start + len).min(text.len());
        let mut mutated = text.clone();
        if mutated.is_char_boundary(start) && mutated.is_char_boundary(end) {
            mutated.replace_range(start..end, &junk);
        }
        let _ = load(&mutated);
    }

    #[test]
    fn odd_rays_are_rejected_not_panicking(a in any::<i64>(), b in any::<i64>(), dim in 0usize..4) {
        let text = format!(
            r#"{{"schema_version": 1, "fan": {{"dim": {dim}, "rays": [[{a}, {b}], [1, 0], [0, 1]], "max_cones": [[0, 1], [1, 2], [0, 2]]}}}}"#
        );
        let _ = load(&text);
    }
}
