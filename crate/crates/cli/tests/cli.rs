use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const K22: &str = r#"{
  "a": 2,
  "p": 2,
  "lambda": 0,
  "mu": 1,
  "r": 1,
  "k": 2,
  "edges": [
    { "from": "p1.v1", "to": "p2.v1", "color": 1 },
    { "from": "p1.v1", "to": "p2.v2", "color": 2 },
    { "from": "p1.v2", "to": "p2.v1", "color": 2 },
    { "from": "p1.v2", "to": "p2.v2", "color": 1 }
  ]
}"#;

fn hamembed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamembed"))
        .args(args)
        .env_remove("HAMEMBED_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn check_reports_yes() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "k22.json", K22);
    let out = hamembed(&["check", &file]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["regime"], "UnitR");
    assert_eq!(v["classes"].as_array().unwrap().len(), 2);

    let table = hamembed(&["check", &file, "--format", "table"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("verdict   yes"));
}

#[test]
fn check_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let one_color = K22.replace("\"color\": 2", "\"color\": 1");
    let file = write(dir.path(), "bad.json", &one_color);
    let out = hamembed(&["check", &file]);
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert_eq!(v["violated"], serde_json::json!(["thm1.2.iii", "thm1.2.iv"]));
}

#[test]
fn input_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("{ not json", "schema"),
        (&K22.replace("\"lambda\": 0", "\"lambda\": 1") as &str, "lambda-equals-mu"),
        (&K22.replace("p2.v2\", \"color\": 2", "p9.v2\", \"color\": 2"), "unknown-vertex"),
        (&K22.replace("\"color\": 2 },\n    { \"from\": \"p1.v2\"", "\"color\": 7 },\n    { \"from\": \"p1.v2\""), "color-out-of-range"),
    ];
    for (i, (text, code)) in cases.iter().enumerate() {
        let file = write(dir.path(), &format!("case{i}.json"), text);
        let out = hamembed(&["check", &file]);
        assert_eq!(out.status.code(), Some(4), "{code}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains(&format!("error[{code}]")), "{err}");
    }
    let out = hamembed(&["check", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn embed_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "k22.json", K22);
    let result = dir.path().join("result.json");
    let out = hamembed(&["embed", &file, "--seed", "5", "--out", result.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(v["verdict"], "yes");
    assert_eq!(v["embedding"]["cycles"].as_array().unwrap().len(), 2);

    let ok = hamembed(&["verify", &file, result.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["ok"], true);

    // swap two colors on an original edge
    let text = fs::read_to_string(&result).unwrap();
    let tampered = text.replacen("\"color\": 1", "\"color\": 2", 1);
    let bad = write(dir.path(), "tampered.json", &tampered);
    let out = hamembed(&["verify", &file, &bad]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(stdout_json(&out)["ok"], false);
}

#[test]
fn seed_from_environment_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "k22.json", K22);
    let flag = hamembed(&["embed", &file, "--seed", "11"]);
    let env = Command::new(env!("CARGO_BIN_EXE_hamembed"))
        .args(["embed", &file])
        .env("HAMEMBED_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn gen_feeds_embed() {
    let dir = tempfile::tempdir().unwrap();
    let instance = dir.path().join("gen.json");
    let out = hamembed(&[
        "gen", "--a", "2", "--p", "2", "--lambda", "2", "--mu", "1", "--r", "2", "--seed", "4", "--out",
        instance.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let embedded = hamembed(&["embed", instance.to_str().unwrap()]);
    assert_eq!(embedded.status.code(), Some(0));
    let result = write(dir.path(), "result.json", &String::from_utf8(embedded.stdout).unwrap());
    let verified = hamembed(&["verify", instance.to_str().unwrap(), &result]);
    assert_eq!(verified.status.code(), Some(0));
}

#[test]
fn oracle_decomposes_and_refuses() {
    let out = hamembed(&["oracle", "--a", "2", "--p", "3", "--lambda", "0", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["k"], 2);
    assert_eq!(v["edges"].as_array().unwrap().len(), 12);

    let odd = hamembed(&["oracle", "--a", "3", "--p", "2", "--lambda", "0", "--mu", "1"]);
    assert_eq!(odd.status.code(), Some(2));
    assert_eq!(stdout_json(&odd)["decomposable"], false);

    let bad = hamembed(&["oracle", "--a", "2", "--p", "2", "--lambda", "1", "--mu", "1"]);
    assert_eq!(bad.status.code(), Some(4));
}
