//! End-to-end tests of the command-line surface: exit codes, report
//! contents, pipeline consistency, and output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tmesh"))
}

fn reference_script() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/reference.hspec")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn dim_reports_all_three_paths_and_exits_zero() {
    let out = run(&["dim", reference_script().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("crossing-vertices 166"));
    assert!(text.contains("interior-horizontal-ledges 21"));
    assert!(text.contains("interior-vertical-ledges 19"));
    assert!(text.contains("isolated-subdomains 3"));
    assert!(text.contains("formula 93"));
    assert!(text.contains("conformality-dim 93"));
    assert!(text.contains("cellwise-dim 93"));
    assert!(text.contains("agreement true"));
}

#[test]
fn dim_formula_only_on_plain_mesh_exits_two() {
    let dir = std::env::temp_dir().join("tmesh-cli-dim");
    std::fs::create_dir_all(&dir).unwrap();
    let mesh_path = dir.join("mesh.tmesh");
    let gen = run(&[
        "gen",
        reference_script().to_str().unwrap(),
        "-o",
        mesh_path.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = run(&["dim", mesh_path.to_str().unwrap(), "--formula-only"]);
    assert_eq!(out.status.code(), Some(2));
    // Without the flag both oracles still run and agree.
    let out = run(&["dim", mesh_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("formula -"), "{text}");
    assert!(text.contains("agreement true"));
}

#[test]
fn basis_then_check_round_trips_conformal_vectors() {
    let dir = std::env::temp_dir().join("tmesh-cli-basis");
    std::fs::create_dir_all(&dir).unwrap();
    let vectors = dir.join("reference.vectors");
    let out = run(&[
        "basis",
        reference_script().to_str().unwrap(),
        "-o",
        vectors.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("count 93"));
    assert!(text.contains("count-ok true"));
    assert!(text.contains("independent true"));
    assert!(text.contains("conformal true"));
    assert!(text.contains("span-matches true"));

    let out = run(&[
        "check",
        reference_script().to_str().unwrap(),
        "--vectors",
        vectors.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("conformal 93/93"));
}

#[test]
fn eval_prints_exact_rationals() {
    let dir = std::env::temp_dir().join("tmesh-cli-eval");
    std::fs::create_dir_all(&dir).unwrap();
    // A handwritten bilinear hat: the truncated-power sum of its vector
    // evaluates to exact rationals.
    let hat = dir.join("hat.vectors");
    let mut doc = String::from("tmesh vectors v1\nm 1\nn 1\ncount 1\nfn level 0 window 0 alpha 0 correction no\n");
    for (x, kx) in [(0, 1i64), (1, -2), (2, 1)] {
        for (y, ky) in [(0, 1i64), (1, -2), (2, 1)] {
            doc.push_str(&format!("v {x} {y} {}\n", kx * ky));
        }
    }
    std::fs::write(&hat, doc).unwrap();
    let out = run(&[
        "eval",
        "--vectors",
        hat.to_str().unwrap(),
        "--at",
        "1,1",
        "--at",
        "1/2,1/2",
        "--at",
        "5,5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("at 1,1 = 1"), "{text}");
    assert!(text.contains("at 1/2,1/2 = 1/4"), "{text}");
    assert!(text.contains("at 5,5 = 0"), "{text}");

    // Every emitted basis function vanishes outside the extended domain.
    let vectors = dir.join("small.vectors");
    let script = dir.join("small.hspec");
    std::fs::write(&script, "tmesh hierspec v1\nm 1\nn 1\np 2\nq 2\n").unwrap();
    let out = run(&["basis", script.to_str().unwrap(), "-o", vectors.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["eval", "--vectors", vectors.to_str().unwrap(), "--at", "50,50"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().all(|l| l.ends_with("= 0")), "{text}");
}

#[test]
fn render_is_deterministic_and_colored_by_level() {
    let a = run(&[
        "render",
        reference_script().to_str().unwrap(),
        "--color-by-level",
        "--extend",
    ]);
    let b = run(&[
        "render",
        reference_script().to_str().unwrap(),
        "--color-by-level",
        "--extend",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let svg = stdout(&a);
    // Three refinement levels, three stroke colors.
    assert!(svg.contains("stroke=\"#000000\""));
    assert!(svg.contains("stroke=\"#d62728\""));
    assert!(svg.contains("stroke=\"#1f77b4\""));
    assert!(!svg.contains("stroke=\"#2ca02c\""));
}

#[test]
fn formula_only_skips_the_oracles_in_the_report() {
    let out = run(&[
        "dim",
        reference_script().to_str().unwrap(),
        "--formula-only",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("formula 93"));
    assert!(text.contains("conformality-dim -"));
    assert!(text.contains("cellwise-dim -"));
}

#[test]
fn highlight_requires_vectors_and_draws_a_rectangle() {
    let dir = std::env::temp_dir().join("tmesh-cli-highlight");
    std::fs::create_dir_all(&dir).unwrap();
    let vectors = dir.join("ref.vectors");
    run(&[
        "basis",
        reference_script().to_str().unwrap(),
        "-o",
        vectors.to_str().unwrap(),
    ]);
    let missing = run(&[
        "render",
        reference_script().to_str().unwrap(),
        "--highlight-fn",
        "0",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    let out = run(&[
        "render",
        reference_script().to_str().unwrap(),
        "--extend",
        "--vectors",
        vectors.to_str().unwrap(),
        "--highlight-fn",
        "0",
        "--highlight-fn",
        "92",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).matches("fill=\"#ffd54f\"").count(), 2);
}

#[test]
fn order_labels_require_provenance() {
    let out = run(&[
        "render",
        reference_script().to_str().unwrap(),
        "--order-labels",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("<text"));
}

#[test]
fn malformed_documents_exit_two() {
    let dir = std::env::temp_dir().join("tmesh-cli-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tmesh");
    std::fs::write(&bad, "tmesh mesh v1\nm 2\nn 2\nsegment h 3/0 0 1 -\n").unwrap();
    let out = run(&["dim", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let stale = dir.join("stale.hspec");
    std::fs::write(
        &stale,
        "tmesh hierspec v1\nm 2\nn 2\np 3\nq 3\nlevel 0\nsubdivide 0,0\nlevel 1\nsubdivide 1,1/0,0\n",
    )
    .unwrap();
    let out = run(&["dim", stale.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_output_parses_back_to_the_same_mesh() {
    let dir = std::env::temp_dir().join("tmesh-cli-roundtrip");
    std::fs::create_dir_all(&dir).unwrap();
    let mesh_path = dir.join("ref.tmesh");
    let out = run(&[
        "gen",
        reference_script().to_str().unwrap(),
        "-o",
        mesh_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&mesh_path).unwrap();
    let reparsed = run(&["check", mesh_path.to_str().unwrap()]);
    assert_eq!(reparsed.status.code(), Some(0));
    // Serialization is deterministic: generating again gives identical bytes.
    let mesh2 = dir.join("ref2.tmesh");
    run(&[
        "gen",
        reference_script().to_str().unwrap(),
        "-o",
        mesh2.to_str().unwrap(),
    ]);
    assert_eq!(text, std::fs::read_to_string(&mesh2).unwrap());
}

#[test]
fn literal_pairing_disagrees_with_the_unextended_oracle_when_degrees_differ() {
    // With m != n the literal copy counts make the extended space differ
    // from the spline space over the original mesh, so the dimension paths
    // split and the command reports the failure.
    let dir = std::env::temp_dir().join("tmesh-cli-literal-dim");
    std::fs::create_dir_all(&dir).unwrap();
    let script = dir.join("asym.hspec");
    std::fs::write(&script, "tmesh hierspec v1\nm 2\nn 3\np 4\nq 4\n").unwrap();
    let out = run(&[
        "dim",
        script.to_str().unwrap(),
        "--extension-pairing",
        "literal",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("pairing literal"));
    assert!(text.contains("agreement false"), "{text}");
    // The default pairing agrees on the same input.
    let out = run(&["dim", script.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn literal_pairing_changes_the_extension_of_asymmetric_degrees() {
    let dir = std::env::temp_dir().join("tmesh-cli-pairing");
    std::fs::create_dir_all(&dir).unwrap();
    let script = dir.join("asym.hspec");
    std::fs::write(&script, "tmesh hierspec v1\nm 2\nn 3\np 4\nq 4\n").unwrap();
    let alg = run(&["extend", script.to_str().unwrap()]);
    let lit = run(&[
        "extend",
        script.to_str().unwrap(),
        "--extension-pairing",
        "literal",
    ]);
    assert_eq!(alg.status.code(), Some(0));
    assert_eq!(lit.status.code(), Some(0));
    assert_ne!(alg.stdout, lit.stdout);
    assert!(stdout(&lit).contains("pairing literal"));
}
