use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn plhomeo(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plhomeo")).args(args.split_whitespace()).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn composing_with_the_inverse_gives_the_identity() {
    let dir = workdir("inverse");
    assert_eq!(plhomeo(&dir, "pl bump 1/4 3/4 1/2 1/8 --output f.json").status.code(), Some(0));
    assert_eq!(plhomeo(&dir, "pl invert f.json --output g.json").status.code(), Some(0));
    let out = plhomeo(&dir, "pl compose f.json g.json");
    assert_eq!(out.status.code(), Some(0));
    let id: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(id, serde_json::json!({"breakpoints": [["0", "0"], ["1", "1"]]}));
}

#[test]
fn matrix_relation_for_the_level_one_pair() {
    let dir = workdir("relation");
    fs::write(dir.join("sl2gens.json"), r#"{"a": [["1","1"],["0","1"]], "b": [["1","0"],["1","1"]]}"#).unwrap();
    let out = plhomeo(&dir, "matrix relations --max-len 12 --verify sl2gens.json");
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["claim"]["kind"], "RelationCert");
    let word = cert["claim"]["payload"]["word"].as_str().unwrap();
    assert!(!word.is_empty() && word.len() <= 12);
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = workdir("budget");
    plhomeo(&dir, "pl bump 0 1 1/2 1/4 --output f.json");
    plhomeo(&dir, "pl bump 1/4 3/4 1/2 1/8 --output g.json");
    let f: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("f.json")).unwrap()).unwrap();
    let g: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("g.json")).unwrap()).unwrap();
    fs::write(dir.join("noncommuting.json"), serde_json::json!({"f": f, "g": g}).to_string()).unwrap();
    let out = plhomeo(&dir, "pl classify --depth 0 noncommuting.json");
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("Inconclusive"));
}

#[test]
fn malformed_input_exits_two() {
    let dir = workdir("malformed");
    fs::write(dir.join("bad.json"), r#"{"breakpoints": [["0","0"],["1/2","3/4"]]}"#).unwrap();
    assert_eq!(plhomeo(&dir, "pl invert bad.json").status.code(), Some(2));
    assert_eq!(plhomeo(&dir, "pl invert missing.json").status.code(), Some(2));
    assert_eq!(plhomeo(&dir, "pl eval bad.json x").status.code(), Some(2));
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = workdir("tamper");
    fs::write(dir.join("sanov.json"), r#"{"a": [["1","2"],["0","1"]], "b": [["1","0"],["2","1"]]}"#).unwrap();
    assert_eq!(plhomeo(&dir, "matrix pingpong sanov.json --output cert.json").status.code(), Some(0));
    assert_eq!(plhomeo(&dir, "verify cert.json").status.code(), Some(0));
    let text = fs::read_to_string(dir.join("cert.json")).unwrap();
    let mut cert: serde_json::Value = serde_json::from_str(&text).unwrap();
    cert["subject"]["a"] = serde_json::json!([["1", "1"], ["0", "1"]]);
    fs::write(dir.join("cert.json"), cert.to_string()).unwrap();
    assert_eq!(plhomeo(&dir, "verify cert.json").status.code(), Some(1));
}
