//! End-to-end tests of the `blstrip` binary: every subcommand once, the
//! exit-code contract, and byte-stability of the reports.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn blstrip(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blstrip"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn write(dir: &Path, name: &str, content: &str) {
    fs::write(dir.join(name), content).expect("fixture written");
}

/// Generates the named family into `dir` and returns the instance file name.
fn generate(dir: &Path, spec: &str) -> String {
    write(dir, "spec.json", spec);
    let out = blstrip(dir, &["gen", "spec.json", "--out-dir", "corpus"]);
    assert!(out.status.success(), "gen failed: {}", stderr(&out));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("corpus/manifest.json")).unwrap())
            .unwrap();
    let file = manifest["entries"][0]["file"].as_str().expect("entry file");
    format!("corpus/{file}")
}

#[test]
fn pack_reports_the_worked_example_height() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let out = blstrip(dir.path(), &["pack", &instance]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["height"], serde_json::json!(25));
    assert_eq!(doc["placements"].as_array().unwrap().len(), 15);
    // Byte-stable: a second run prints the identical document.
    let again = blstrip(dir.path(), &["pack", &instance]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn pack_handles_the_empty_instance() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "empty.json", r#"{"width": 5, "rects": []}"#);
    let out = blstrip(dir.path(), &["pack", "empty.json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["height"], serde_json::json!(0));
}

#[test]
fn pack_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let out = blstrip(
        dir.path(),
        &[
            "pack", &instance, "--out", "packing.json", "--svg", "packing.svg", "--trace",
            "trace.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("height 25"));
    let svg = fs::read_to_string(dir.path().join("packing.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("#5b8dd9").count(), 6, "six shelf rects in blue");
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["ordering"], serde_json::json!("fqw"));
    assert_eq!(trace["steps"].as_array().unwrap().len(), 15);
    assert!(trace["steps"][0]["evaluated_candidates"].is_number());
}

#[test]
fn unparsable_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.json", "not json");
    let out = blstrip(dir.path(), &["pack", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.json"));
}

#[test]
fn verify_accepts_packed_output_and_flags_overlaps() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let out = blstrip(dir.path(), &["pack", &instance, "--out", "packing.json"]);
    assert!(out.status.success());
    let ok = blstrip(dir.path(), &["verify", "packing.json"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("feasible: 15 rects, height 25"));

    let mut doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("packing.json")).unwrap())
            .unwrap();
    doc["placements"][1]["x"] = serde_json::json!(0);
    doc["placements"][1]["y"] = serde_json::json!(0);
    write(dir.path(), "corrupt.json", &doc.to_string());
    let bad = blstrip(dir.path(), &["verify", "corrupt.json"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("overlap"));
}

#[test]
fn partition_prints_the_class_split() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let out = blstrip(dir.path(), &["partition", &instance]);
    assert!(out.status.success());
    let split: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(split["F"].as_array().unwrap().len(), 6);
    assert_eq!(split["a"], serde_json::json!(6));
    assert_eq!(split["W"], serde_json::json!(["r14", "r15"]));
}

#[test]
fn analyze_passes_on_a_fixture_and_rejects_non_shelf_orders() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let out = blstrip(dir.path(), &["analyze", &instance]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["certificate"]["holds"], serde_json::json!(true));
    assert_eq!(report["suite"]["context"]["top_leftover"], serde_json::json!("r11"));

    write(
        dir.path(),
        "qfirst.json",
        r#"{"width": 10, "rects": [{"id": "s", "w": 2, "h": 2}, {"id": "t", "w": 10, "h": 5}]}"#,
    );
    let rejected = blstrip(dir.path(), &["analyze", "qfirst.json", "--order", "input-order"]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(stderr(&rejected).contains("not shelf-ordered"));
}

#[test]
fn bounds_reports_the_area_bound_for_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let out = blstrip(dir.path(), &["bounds", &instance]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["lb"], serde_json::json!("75/4"));
    assert_eq!(report["lb_hmax"], serde_json::json!(11));
}

#[test]
fn opt_solves_the_staircase_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "staircase", "w": 3, "h": 4}"#);
    let out = blstrip(dir.path(), &["opt", &instance]);
    assert!(out.status.success());
    let result: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(result["status"], serde_json::json!("exact"));
    assert_eq!(result["height"], serde_json::json!(9));
    assert!(result["witness"]["placements"].as_array().unwrap().len() == 5);
}

#[test]
fn ratio_against_the_exact_optimum_is_four_thirds_on_the_staircase() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "staircase", "w": 3, "h": 4}"#);
    let out = blstrip(dir.path(), &["ratio", &instance, "--exact"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("reference exact optimum 9"), "{text}");
    assert!(text.contains("ratio 4/3"), "{text}");
}

#[test]
fn ratio_requires_exactly_one_reference() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "staircase", "w": 3, "h": 4}"#);
    let neither = blstrip(dir.path(), &["ratio", &instance]);
    assert_eq!(neither.status.code(), Some(2));
    let both = blstrip(dir.path(), &["ratio", &instance, "--exact", "--lb"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn ratio_against_the_lower_bound_flags_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "single.json",
        r#"{"width": 4, "rects": [{"id": "only", "w": 3, "h": 2}]}"#,
    );
    let out = blstrip(dir.path(), &["ratio", "single.json", "--lb"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("reference lower bound 2"), "{text}");
    assert!(text.contains("ratio 1 "), "{text}");
}

#[test]
fn gen_is_byte_reproducible_and_validates_params() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "specs.json",
        r#"[{"family": "staircase", "w": 3, "h": 4},
            {"family": "random_rects", "n": 4, "seed": 9, "width": 8,
             "w_range": [1, 6], "h_range": [1, 6]}]"#,
    );
    let first = blstrip(dir.path(), &["gen", "specs.json", "--out-dir", "a"]);
    let second = blstrip(dir.path(), &["gen", "specs.json", "--out-dir", "b"]);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    for name in ["manifest.json", "000_staircase.json", "001_random_rects.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name} differs between runs"
        );
    }

    write(dir.path(), "degenerate.json", r#"{"family": "staircase", "w": 2, "h": 4}"#);
    let rejected = blstrip(dir.path(), &["gen", "degenerate.json", "--out-dir", "c"]);
    assert_eq!(rejected.status.code(), Some(2));
}

#[test]
fn qp_check_defaults_and_stated_point_agree() {
    let dir = tempfile::tempdir().unwrap();
    let stated = blstrip(dir.path(), &["qp-check", "--samples", "0"]);
    assert!(stated.status.success());
    let text = stdout(&stated);
    assert!(text.contains("best value 7/12"), "{text}");
    assert!(text.contains("stated optimum 7/12"), "{text}");

    let sampled = blstrip(
        dir.path(),
        &["qp-check", "--k-max", "3", "--samples", "500", "--seed", "7"],
    );
    assert!(sampled.status.success());
    assert!(stdout(&sampled).contains("best value 7/12"));
}

#[test]
fn render_draws_regions_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let instance = generate(dir.path(), r#"{"family": "worked_example"}"#);
    let pack = blstrip(dir.path(), &["pack", &instance, "--out", "packing.json"]);
    assert!(pack.status.success());
    let out = blstrip(
        dir.path(),
        &["render", "packing.json", "--out", "image.svg", "--regions"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = fs::read_to_string(dir.path().join("image.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    assert!(svg.contains("stroke-dasharray"), "region boundaries drawn");
    assert_eq!(svg.matches("<rect").count(), 16, "strip outline plus 15 rects");
}

#[test]
fn bench_tabulates_orders_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "specs.json",
        r#"[{"family": "staircase", "w": 3, "h": 4},
            {"family": "random_squares", "n": 5, "seed": 3, "width": 9, "side_range": [1, 5]}]"#,
    );
    let gen = blstrip(dir.path(), &["gen", "specs.json", "--out-dir", "corpus"]);
    assert!(gen.status.success());
    let out = blstrip(dir.path(), &["bench", "corpus", "--orders", "fqw,input-order"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("order"), "{text}");
    assert_eq!(text.lines().count(), 3, "header plus one row per order");
    assert!(text.contains("fqw"), "{text}");
    let again = blstrip(dir.path(), &["bench", "corpus", "--orders", "fqw,input-order"]);
    assert_eq!(out.stdout, again.stdout);

    let missing = blstrip(dir.path(), &["bench", "nowhere"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("manifest.json"));
}
