//! End-to-end tests of the command-line interface: parsing, reports, exit
//! codes, determinism, and the bit-order flag.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbgroup"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sbox_report_carries_expected_facts() {
    let out = run(&["sbox", fixture("present_sbox.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("delta: 4"), "{text}");
    assert!(text.contains("max_r_strong: 1"), "{text}");
    assert!(text.contains("nonlinearity: 4"), "{text}");
    assert!(text.contains("holds: false"), "{text}"); // anti-crooked
}

#[test]
fn sbox_group_check_flag() {
    let out = run(&[
        "sbox",
        fixture("present_sbox.txt").to_str().unwrap(),
        "--with-group-check",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("conjugate_translation_condition: true"));
}

#[test]
fn layer_reports_present_wall_witness() {
    let out = run(&[
        "layer",
        fixture("present_layer.txt").to_str().unwrap(),
        "--bricks",
        "4,16",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("wall_count: 65534"), "{text}");
    assert!(text.contains("proper:\n  holds: true"), "{text}");
    assert!(text.contains("strongly_proper:\n  holds: false"), "{text}");
    assert!(text.contains("bricks: [0, 1, 2, 3]"), "{text}");
    assert!(text.contains("bricks: [0, 4, 8, 12]"), "{text}");
}

#[test]
fn layer_verdicts_survive_msb0_convention() {
    for (layer, shape, strongly) in [
        ("present_layer.txt", "4,16", "holds: false"),
        ("rectangle_layer.txt", "4,16", "holds: true"),
        ("rotation_layer.txt", "4,4", "holds: false"),
    ] {
        for flag in [&[][..], &["--msb0"][..]] {
            let layer_path = fixture(layer);
            let mut args = vec!["layer", layer_path.to_str().unwrap(), "--bricks", shape];
            args.extend_from_slice(flag);
            let out = run(&args);
            assert_eq!(out.status.code(), Some(0));
            let text = stdout(&out);
            let section = text.split("strongly_proper:").nth(1).unwrap();
            assert!(section.trim_start().starts_with(strongly), "{layer} {flag:?}: {text}");
        }
    }
}

#[test]
fn cipher_verdicts_for_bundled_specs() {
    let out = run(&["cipher", fixture("rectangle.cipher").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("status: proven_alt"), "{text}");
    assert!(text.contains("rule: brick width 4 in 3..=5"), "{text}");

    let out = run(&["cipher", fixture("printcipher.cipher").to_str().unwrap()]);
    assert!(stdout(&out).contains("status: proven_alt"));

    // The rotation example must not reach the alternating conclusion.
    let out = run(&["cipher", fixture("inversion_rotation.cipher").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("status: proven_primitive"), "{text}");
    assert!(!text.contains("proven_alt"), "{text}");
}

#[test]
fn cipher_desk_check_classifies_reduced_rotation_example() {
    let out = run(&[
        "cipher",
        fixture("inversion_rotation.cipher").to_str().unwrap(),
        "--desk-check",
        "2",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // The reduction swaps in a strongly proper auto layer, so the reduced
    // group is the alternating group even though the full-size layer blocks
    // the theorem route.
    assert!(text.contains("degree: 256"), "{text}");
    assert!(text.contains("classification: giant_alt"), "{text}");
}

#[test]
fn reports_are_deterministic() {
    let spec_path = fixture("present.cipher");
    let args = [
        "cipher",
        spec_path.to_str().unwrap(),
        "--desk-check",
        "2",
        "--seed",
        "9",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(a.contains("order: "), "{a}");
}

#[test]
fn json_reports_parse_and_match_kind() {
    let out = run(&[
        "sbox",
        fixture("printcipher_sbox.txt").to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["kind"], "sbox-analysis");
    assert_eq!(value["uniformity"]["delta"], 2);
}

#[test]
fn malformed_inputs_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad_sbox.txt");
    std::fs::write(&bad, "m=4\nC56B90AD3EF8471Z\n").unwrap();
    let out = run(&["sbox", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert!(err.contains("bad_sbox.txt:2"), "{err}");

    let missing = dir.path().join("missing.txt");
    let out = run(&["sbox", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let non_bijective = dir.path().join("nb.txt");
    std::fs::write(&non_bijective, "m=2\n0 1 1 3\n").unwrap();
    let out = run(&["sbox", non_bijective.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn resource_caps_exit_3() {
    // Group check on a 6-bit S-box exceeds the instant-check width bound.
    let dir = tempfile::tempdir().unwrap();
    let wide = dir.path().join("wide.txt");
    let table: Vec<String> = (0..64u32).map(|x| (x ^ 5).to_string()).collect();
    std::fs::write(&wide, format!("m=6\n{}\n", table.join(" "))).unwrap();
    let out = run(&["sbox", wide.to_str().unwrap(), "--with-group-check"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn validate_suites_pass_and_exit_0() {
    let out = run(&[
        "validate",
        "--suite",
        "fact4uniform",
        "--trials",
        "5000",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("violations: 0"), "{text}");
    assert!(text.contains("passed: true"), "{text}");

    let out = run(&["validate", "--suite", "nonlin-equiv", "--width", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("checked: 40320"));

    let out = run(&[
        "validate",
        "--suite",
        "affine-prop",
        "--dim",
        "3",
        "--trials",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&[
        "validate",
        "--suite",
        "oracle-xcheck",
        "--trials",
        "10",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("disagreements: 0"));
}

#[test]
fn spec_files_roundtrip_through_serialization() {
    use tbgroup::formats;
    let dir = tempfile::tempdir().unwrap();
    for name in ["present_sbox.txt", "rectangle_sbox.txt", "printcipher_sbox.txt", "inversion_sbox.txt"] {
        let parsed = formats::read_sbox_file(&fixture(name), false).unwrap();
        let reserialized = formats::sbox_to_text(&parsed);
        let path = dir.path().join(name);
        std::fs::write(&path, &reserialized).unwrap();
        assert_eq!(formats::read_sbox_file(&path, false).unwrap(), parsed, "{name}");
    }
    for name in ["present_layer.txt", "rectangle_layer.txt", "printcipher_layer.txt", "rotation_layer.txt"] {
        let parsed = formats::read_layer_file(&fixture(name), false).unwrap();
        let reserialized = formats::layer_to_text(&parsed);
        let path = dir.path().join(name);
        std::fs::write(&path, &reserialized).unwrap();
        assert_eq!(formats::read_layer_file(&path, false).unwrap(), parsed, "{name}");
    }
}

#[test]
fn bundled_fixture_files_match_library_tables() {
    use tbgroup::{fixtures, formats};
    assert_eq!(
        formats::read_sbox_file(&fixture("present_sbox.txt"), false).unwrap(),
        fixtures::present_sbox()
    );
    assert_eq!(
        formats::read_sbox_file(&fixture("rectangle_sbox.txt"), false).unwrap(),
        fixtures::rectangle_sbox()
    );
    assert_eq!(
        formats::read_sbox_file(&fixture("printcipher_sbox.txt"), false).unwrap(),
        fixtures::printcipher_sbox()
    );
    assert_eq!(
        formats::read_sbox_file(&fixture("inversion_sbox.txt"), false).unwrap(),
        fixtures::inversion_sbox()
    );
    assert_eq!(
        formats::read_layer_file(&fixture("present_layer.txt"), false).unwrap(),
        fixtures::present_layer()
    );
    assert_eq!(
        formats::read_layer_file(&fixture("rectangle_layer.txt"), false).unwrap(),
        fixtures::rectangle_layer()
    );
    assert_eq!(
        formats::read_layer_file(&fixture("printcipher_layer.txt"), false).unwrap(),
        fixtures::printcipher_layer()
    );
    assert_eq!(
        formats::read_layer_file(&fixture("rotation_layer.txt"), false).unwrap(),
        fixtures::block_rotation_layer(4, 4)
    );
}
