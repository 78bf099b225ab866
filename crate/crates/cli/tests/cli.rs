use std::path::Path;
use std::process::{Command, Output};

use multialloc::harness::instance::InstanceFile;
use multialloc::harness::search::all_shared_unit;
use multialloc::{ItemSet, MultiAllocation, Valuation};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multialloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, file: &InstanceFile) -> String {
    let path = dir.join(name);
    std::fs::write(&path, file.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

fn pair_max_file() -> InstanceFile {
    let v = Valuation::xos_ints(&[&[1, 1, 0, 0], &[0, 0, 1, 1]]).unwrap();
    InstanceFile::new(4, &[v])
}

#[test]
fn omega_on_pair_max() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "pm.json", &pair_max_file());
    let out = run(&["omega", "--instance", &path, "--sequence", "pqpq"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("omega = 1\n"), "{}", stdout(&out));
    let out = run(&["omega", "--instance", &path, "--sequence", "qppq"]);
    assert!(stdout(&out).contains("omega = 2\n"));
}

#[test]
fn guarantee_for_1805() {
    let out = run(&["guarantee", "--n", "1805"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("d = 4\n") && text.contains("alpha = 1/14\n"), "{text}");
    let out = run(&["guarantee", "--n", "10^50"]);
    assert!(stdout(&out).contains("alpha = 1/30\n"));
}

#[test]
fn transform_tight_instance_passes_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (alloc, v) = all_shared_unit(4, 3);
    let file = InstanceFile::new(3, &vec![v; 4]).with_multi_allocation(&alloc, 4);
    let path = write(dir.path(), "tight.json", &file);
    let report = dir.path().join("report.json");
    let out = run(&[
        "transform",
        "--instance",
        &path,
        "--d",
        "4",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = json["agents"].as_array().unwrap();
    let zeros = rows.iter().filter(|r| r["value"] == "0").count();
    assert_eq!(zeros, 1);
    assert!(rows.iter().all(|r| r["pass"] == true));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2)
        .map(|k| dir.path().join(format!("g{k}.json")).to_str().unwrap().to_string())
        .collect();
    for p in &paths {
        let out = run(&["gen", "--family", "xos", "--seed", "42", "--d", "2", "--out", p]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert_eq!(a, b);
    InstanceFile::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
}

#[test]
fn pipeline_with_insufficient_provider_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let v = Valuation::additive_ints(&[1; 14]).unwrap();
    let file = InstanceFile::new(14, &[v.clone(), v]);
    let path = write(dir.path(), "units.json", &file);
    let empty = MultiAllocation::new(14, vec![ItemSet::EMPTY, ItemSet::EMPTY]).unwrap();
    let provided = file.clone().with_multi_allocation(&empty, 2);
    let provider = write(dir.path(), "provided.json", &provided);
    let witness = dir.path().join("witness.json");
    let out = run(&[
        "pipeline",
        "--instance",
        &path,
        "--rho",
        "1/2",
        "--d",
        "2",
        "--provider",
        "file",
        "--provider-file",
        &provider,
        "--witness",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    let text = std::fs::read_to_string(&witness).unwrap();
    assert_eq!(InstanceFile::from_json(&text).unwrap(), file);
}

#[test]
fn pipeline_with_brute_provider_passes() {
    let dir = tempfile::tempdir().unwrap();
    let v1 = Valuation::additive_ints(&[10, 1, 1]).unwrap();
    let v2 = Valuation::additive_ints(&[1, 1, 1]).unwrap();
    let path = write(dir.path(), "worked.json", &InstanceFile::new(3, &[v1, v2]));
    let out = run(&["pipeline", "--instance", &path, "--rho", "1/2", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("alpha = 1/6"));
}

#[test]
fn bad_input_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["omega", "--instance", bad.to_str().unwrap(), "--sequence", "p"]);
    assert_eq!(out.status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    let out = run(&["mms", "--instance", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(run(&["transform"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn verify_passes_on_a_seed() {
    let out = run(&["verify", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("[FAIL]"));
}
