use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ohb_core::automorphisms::AutReport;
use ohb_core::codes::{CodeInvariants, Verdict};
use ohb_core::oracle::OracleReport;
use ohb_core::Symmetry;
use serde_json::Value;
use tempfile::TempDir;

const CHAIN: &str = r#"{"field":{"p":2},"m":1,"n":2,"pi":[[1,1]]}"#;
const HAMMING: &str = r#"{"field":{"p":2},"m":2,"n":1,"pi":[[1],[1]]}"#;
const BLOCKS: &str = r#"{"field":{"p":2},"m":2,"n":1,"pi":[[2],[1]]}"#;
const ORDERED: &str = r#"{"field":{"p":2},"m":2,"n":2,"pi":[[1,1],[1,1]]}"#;

fn ohb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ohb"))
        .args(args)
        .env_remove("OHB_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = ohb(&full);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("one JSON document")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn weight_example() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "s.json", CHAIN);
    let doc = json(&["weight", "--space", s(&space), "--vec", "0,1"]);
    assert_eq!(doc["weight"], 2);
    let human = ohb(&["weight", "--space", s(&space), "--vec", "0,1"]);
    assert!(String::from_utf8(human.stdout)
        .unwrap()
        .contains("weight: 2"));
}

#[test]
fn dist_sums_chain_distances() {
    let doc = json(&[
        "dist", "--space", ORDERED, "--u", "1,0;0,1", "--v", "0,0;0,0",
    ]);
    assert_eq!(doc["distance"], 3);
    assert_eq!(doc["per_chain"], serde_json::json!([1, 2]));
}

#[test]
fn order_both_on_chain() {
    let doc = json(&["order", "--space", CHAIN, "--both"]);
    assert_eq!(doc["formula"]["full_order"], "8");
    let report: OracleReport = serde_json::from_value(doc["oracle"].clone()).unwrap();
    assert_eq!(report.isometry_count, 8u32.into());
    assert!(report.formula_match);
    assert!(report.discrepancies().any(|c| c.value == 16u32.into()));
}

#[test]
fn order_lists_maps() {
    let doc = json(&["order", "--space", HAMMING, "--oracle", "--list"]);
    let maps: Vec<Vec<u64>> = serde_json::from_value(doc["maps"].clone()).unwrap();
    assert_eq!(maps.len(), 8);
    assert!(doc.get("formula").is_none());
}

#[test]
fn cap_guardrail_is_a_usage_error() {
    let out = ohb(&["order", "--space", CHAIN, "--oracle", "--cap", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--cap"), "{err}");
}

#[test]
fn verify_rejects_non_isometry_with_witness() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "f.tbl", "0 -> 2\n1 -> 1\n2 -> 0\n3 -> 3\n");
    let out = ohb(&[
        "--format",
        "json",
        "sym",
        "verify",
        "--space",
        CHAIN,
        "--map",
        s(&map),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["error"]["kind"], "not-isometry");
    assert!(doc["error"]["witness"]["u"].is_u64());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn verify_rejects_non_bijection() {
    let dir = TempDir::new().unwrap();
    let map = write(&dir, "f.tbl", "0 0 1 2");
    let out = ohb(&["sym", "verify", "--space", CHAIN, "--map", s(&map)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn symmetry_round_trips_through_files() {
    let dir = TempDir::new().unwrap();
    let gen = ohb(&[
        "--format", "json", "sym", "gen", "--space", ORDERED, "--seed", "7",
    ]);
    assert!(gen.status.success());
    let t: Symmetry = serde_json::from_slice(&gen.stdout).unwrap();
    let sym = write(&dir, "t.json", std::str::from_utf8(&gen.stdout).unwrap());

    let table = json(&["sym", "table", "--space", ORDERED, s(&sym)]);
    let map = write(&dir, "t.tbl", &table.to_string());
    let ok = json(&["sym", "verify", "--space", ORDERED, "--map", s(&map)]);
    assert_eq!(ok["isometry"], true);
    let back: Symmetry = serde_json::from_value(json(&[
        "sym",
        "decompose",
        "--space",
        ORDERED,
        "--map",
        s(&map),
    ]))
    .unwrap();
    assert_eq!(back, t);

    let inv = json(&["sym", "invert", "--space", ORDERED, s(&sym)]);
    let inv_path = write(&dir, "inv.json", &inv.to_string());
    let id: Symmetry = serde_json::from_value(json(&[
        "sym",
        "compose",
        "--space",
        ORDERED,
        s(&sym),
        s(&inv_path),
    ]))
    .unwrap();
    assert!(id.is_identity());

    let applied = json(&[
        "sym",
        "apply",
        "--space",
        ORDERED,
        "--sym",
        s(&sym),
        "--vec",
        "0,0;0,0",
    ]);
    assert_eq!(applied["image"]["rank"], table[0]);
}

#[test]
fn apply_to_code_preserves_invariants() {
    let dir = TempDir::new().unwrap();
    let gen = ohb(&[
        "--format", "json", "sym", "gen", "--space", ORDERED, "--seed", "1",
    ]);
    let sym = write(&dir, "t.json", std::str::from_utf8(&gen.stdout).unwrap());
    let code = write(&dir, "c.txt", "# three words\n0,0;0,0\n1,0;0,1\n1,1;1,1\n");
    let doc = json(&[
        "sym",
        "apply",
        "--space",
        ORDERED,
        "--sym",
        s(&sym),
        "--code",
        s(&code),
    ]);
    let inv: CodeInvariants = serde_json::from_value(doc["invariants"].clone()).unwrap();
    assert_eq!(inv.size, 3);
}

#[test]
fn seeds_are_mandatory_and_reproducible() {
    let out = ohb(&["sym", "gen", "--space", ORDERED]);
    assert_eq!(out.status.code(), Some(2));

    let a = ohb(&[
        "--format", "json", "sym", "gen", "--space", ORDERED, "--seed", "42",
    ]);
    let b = Command::new(env!("CARGO_BIN_EXE_ohb"))
        .args(["--format", "json", "sym", "gen", "--space", ORDERED])
        .env("OHB_SEED", "42")
        .output()
        .unwrap();
    assert!(b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = ohb(&[
        "--format", "json", "sym", "gen", "--space", ORDERED, "--seed", "43",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn golden_seed() {
    let out = ohb(&[
        "--format", "json", "sym", "gen", "--space", CHAIN, "--seed", "42",
    ]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        doc.to_string(),
        r#"{"chains":[{"pi":[1,1],"tables":[[[1,0],[0,1]],[[1,0]]]}],"sigma":[1]}"#
    );
}

#[test]
fn sym_gen_kinds() {
    let chain: Symmetry = serde_json::from_value(json(&[
        "sym", "gen", "--space", ORDERED, "--seed", "5", "--kind", "chain",
    ]))
    .unwrap();
    assert!(chain.is_chain_only());
    let sigma: Symmetry = serde_json::from_value(json(&[
        "sym", "gen", "--space", ORDERED, "--seed", "5", "--kind", "sigma",
    ]))
    .unwrap();
    assert!(sigma.is_sigma_only());
}

#[test]
fn json_output_is_byte_identical() {
    for args in [
        vec!["--format", "json", "report", "--space", ORDERED],
        vec!["--format", "json", "order", "--space", BLOCKS],
        vec!["--format", "json", "aut", "--space", BLOCKS],
    ] {
        assert_eq!(ohb(&args).stdout, ohb(&args).stdout);
    }
}

#[test]
fn aut_formula_and_enumeration() {
    let r: AutReport = serde_json::from_value(json(&["aut", "--space", BLOCKS])).unwrap();
    assert_eq!(r.formula_order, Some(6u32.into()));
    assert_eq!(r.enumerated_order, Some(6u32.into()));
    assert!(!r.discrepant);
    let out = ohb(&["aut", "--space", CHAIN, "--formula"]);
    assert_eq!(out.status.code(), Some(2));
    let r: AutReport =
        serde_json::from_value(json(&["aut", "--space", CHAIN, "--enumerate"])).unwrap();
    assert_eq!(r.enumerated_order, Some(2u32.into()));
}

#[test]
fn equiv_examples() {
    let dir = TempDir::new().unwrap();
    let c1 = write(&dir, "c1.txt", "0;0\n0;1\n");
    let c2 = write(&dir, "c2.txt", "0;0\n1;0\n");
    let c3 = write(&dir, "c3.txt", "0;0\n1;1\n");
    let doc = json(&["equiv", "--space", HAMMING, s(&c1), s(&c2)]);
    let v: Verdict = serde_json::from_value({
        let mut d = doc.clone();
        d.as_object_mut().unwrap().remove("invariants");
        d
    })
    .unwrap();
    assert_eq!(v.witness().unwrap().sigma(), &[1, 0]);
    let doc = json(&["equiv", "--space", HAMMING, s(&c3), s(&c2)]);
    assert_eq!(doc["verdict"], "not-equivalent");
    assert_eq!(doc["method"], "screen");
}

#[test]
fn equiv_json_code_file() {
    let dir = TempDir::new().unwrap();
    let c1 = write(
        &dir,
        "c1.json",
        &format!(r#"{{"config":{ORDERED},"vectors":["1,0;0,0",5]}}"#),
    );
    let c2 = write(&dir, "c2.txt", "0,0;1,0\n0,1;0,1\n");
    let doc = json(&["equiv", "--space", ORDERED, s(&c1), s(&c2)]);
    assert!(doc["verdict"].is_string());
}

#[test]
fn report_skips_out_of_reach_oracle() {
    let big = r#"{"field":{"p":2},"m":1,"n":8,"pi":[[1,1,1,1,1,1,1,1]]}"#;
    let doc = json(&["report", "--space", big]);
    assert!(doc["oracle"]["skipped"].is_string());
    assert_eq!(doc["points"], 256);
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        "{\"field\":{\"p\":4},\"m\":1,\"n\":1,\"pi\":[[1]]}",
    );
    for args in [
        vec!["weight", "--space", s(&bad), "--vec", "0"],
        vec!["weight", "--space", "/nonexistent/space.json", "--vec", "0"],
        vec!["weight", "--space", CHAIN, "--vec", "0;1"],
        vec!["weight", "--space", CHAIN, "--bogus"],
        vec!["frobnicate"],
    ] {
        let out = ohb(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = ohb(&["weight", "--space", CHAIN, "--vec", "2,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}
