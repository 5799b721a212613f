//! End-to-end runs of the `qconv` binary: exit codes, report shape,
//! reproducibility and witness re-evaluation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qconv::convolution::StructureJson;
use qconv::inequality::InequalityWitness;
use serde_json::Value;

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn qconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qconv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    qconv(args).status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&["validate", &fixture("rings/fibonacci.json")]), 0);
    assert_eq!(code(&["validate", &fixture("groups/q8.json")]), 0);
    assert_eq!(code(&["validate", &fixture("structures/theta_swap_half.json")]), 0);
    assert_eq!(code(&["validate", &fixture("rings/fibonacci_mutated.json")]), 1);

    let truncated = tmp("truncated.json");
    let text = std::fs::read_to_string(fixture("rings/fibonacci.json")).unwrap();
    std::fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&["validate", truncated.to_str().unwrap()]), 2);

    let garbage = tmp("garbage.json");
    std::fs::write(&garbage, "not json at all").unwrap();
    assert_eq!(code(&["validate", garbage.to_str().unwrap()]), 2);

    let wrong_shape = tmp("wrong_shape.json");
    std::fs::write(&wrong_shape, r#"{"hello": [1, 2, 3]}"#).unwrap();
    assert_eq!(code(&["validate", wrong_shape.to_str().unwrap()]), 2);

    assert_eq!(code(&["validate", &fixture("rings/does_not_exist.json")]), 2);
}

#[test]
fn categorify_reports_obstruction() {
    let out = qconv(&["categorify", &fixture("rings/obstructed_rank3.json"), "--budget", "16"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(code(&["categorify", &fixture("rings/fibonacci.json"), "--budget", "16"]), 0);
}

#[test]
fn usage_errors_exit_two() {
    let z2 = fixture("rings/z2.json");
    assert_eq!(code(&["inequalities", &z2, "--suite", "nope"]), 2);
    assert_eq!(code(&["entropy", &z2, "--op", "nope"]), 2);
    assert_eq!(code(&["entropy", &z2, "--op", "smooth", "--params", "eps=5,eta=5"]), 2);
    // inside [0, 1] but beyond the radius where the smooth bound is meaningful
    assert_eq!(code(&["entropy", &z2, "--op", "smooth", "--params", "eps=0.9,eta=0.9"]), 2);
    assert_eq!(code(&["entropy", &z2, "--op", "continuity", "--params", "eps=0.1,bogus=1"]), 2);
    assert_eq!(code(&["entropy", &fixture("specs/m2_plus_c.json"), "--op", "smooth"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn theta_swap_young_violation_has_reproducible_witness() {
    let path = fixture("structures/theta_swap_half.json");
    let out = qconv(&["inequalities", &path, "--suite", "young", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["passed"], false);
    let report = &doc["reports"][0];
    assert_eq!(report["verdict"], "violation");

    let w: InequalityWitness = serde_json::from_value(report["worst"].clone()).unwrap();
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let (s, _) = serde_json::from_value::<StructureJson>(raw).unwrap().into_parts().unwrap();
    let (lhs, rhs, slack) = w.reevaluate(&s).unwrap();
    assert!((lhs - w.lhs).abs() <= 1e-12 * w.lhs.abs().max(1.0));
    assert!((rhs - w.rhs).abs() <= 1e-12 * w.rhs.abs().max(1.0));
    assert!((slack - w.slack).abs() <= 1e-12 * w.slack.abs().max(1.0));
    assert!(w.slack < 0.0);
}

#[test]
fn theta_weighted_qeci_passes_on_theta_swap() {
    let path = fixture("structures/theta_swap_half.json");
    let out = qconv(&["inequalities", &path, "--suite", "qeci", "--theta", "0.5", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    assert_eq!(doc["manifest"]["theta"], 0.5);
    assert_eq!(doc["passed"], true);
}

#[test]
fn fn_fixture_suites_pass() {
    for f in ["groups/s3.json", "rings/fibonacci.json", "structures/z4_group_algebra.json"] {
        let out = qconv(&["inequalities", &fixture(f), "--samples", "60"]);
        assert_eq!(out.status.code(), Some(0), "{f}: {}", String::from_utf8_lossy(&out.stderr));
        let doc = json(&out);
        assert_eq!(doc["fn_algebra"], true, "{f}");
        assert_eq!(doc["reports"].as_array().unwrap().len(), 6);
    }
}

#[test]
fn identical_manifests_give_identical_bytes() {
    let path = fixture("rings/ising.json");
    let args = ["inequalities", &path, "--suite", "young", "--samples", "80", "--seed", "7"];
    let a = qconv(&args);
    let b = qconv(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let mut four = args.to_vec();
    four.extend(["--threads", "4"]);
    assert_eq!(qconv(&one).stdout, qconv(&four).stdout);

    let other = qconv(&["inequalities", &path, "--suite", "young", "--samples", "80", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn out_flag_and_markdown() {
    let dest = tmp("axioms.json");
    let _ = std::fs::remove_file(&dest);
    let out = qconv(&["axioms", &fixture("groups/z4.json"), "--samples", "40", "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["manifest"]["command"], "axioms");

    let md = qconv(&["axioms", &fixture("groups/z4.json"), "--samples", "40", "--format", "markdown"]);
    assert_eq!(md.status.code(), Some(0));
    let text = String::from_utf8(md.stdout).unwrap();
    assert!(text.starts_with('#'));
    assert!(text.contains("schema_version"));
}

#[test]
fn floats_round_trip_exactly() {
    let out = qconv(&["entropy", "--op", "tlogt", "--params", "s=0.2,t=0.3,r=1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    let lhs = doc["lhs"].as_f64().unwrap();
    let (l, _) = qconv::inequality::tlogt_bound(0.2, 0.3, 1.0).unwrap();
    assert_eq!(lhs.to_bits(), l.to_bits());
}
