use std::path::Path;
use std::process::{Command, Output};

const GENERATE: &str = r#"
[data.generate]
n_rows = 400
base_positive_rate = 0.6
bias_strength = 0.3
proxy_correlation = 0.8
noise_features = 2
seed = 7
"#;

fn repairlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repairlab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_writes_reports_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("[train]\nkind = \"logistic\"\n{GENERATE}"));
    let out_dir = dir.path().join("out");
    let o = repairlab(&["run", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap(), "--verbose"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "report.csv", "decisions.csv", "model.json", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    assert!(String::from_utf8_lossy(&o.stderr).contains("train: logistic"));
}

#[test]
fn reruns_and_manifest_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("[preprocess]\nkind = \"massage\"\n[train]\nkind = \"logistic\"\n[postprocess]\nkind = \"reject_option\"\ntheta = 0.1\n{GENERATE}"),
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    assert!(repairlab(&["run", "--config", &cfg, "--out-dir", a.to_str().unwrap()]).status.success());
    assert!(repairlab(&["run", "--config", &cfg, "--out-dir", b.to_str().unwrap()]).status.success());
    let manifest = a.join("manifest.json").display().to_string();
    assert!(repairlab(&["run", "--config", &manifest, "--out-dir", c.to_str().unwrap()]).status.success());
    let strip = |v: Vec<(String, Vec<u8>)>| v.into_iter().filter(|(n, _)| n != "manifest.json").collect::<Vec<_>>();
    let ra = strip(read_dir_sorted(&a));
    assert_eq!(ra, strip(read_dir_sorted(&b)));
    assert_eq!(ra, strip(read_dir_sorted(&c)));
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("seed = 1\n[train]\nkind = \"logistic\"\n{GENERATE}"));
    let out = dir.path().join("o");
    assert!(repairlab(&["run", "--config", &cfg, "--seed", "99", "--out-dir", out.to_str().unwrap()]).status.success());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 99);
    assert_eq!(m["config"]["seed"], 99);
}

#[test]
fn missing_csv_exits_2_with_one_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[data.csv]\npath = \"missing.csv\"\nschema = \"missing.schema\"\n");
    let o = repairlab(&["run", "--config", &cfg, "--out-dir", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "config_parse");
    assert!(v["message"].as_str().unwrap().contains("missing.csv"));
}

#[test]
fn stage_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // SMOTE needs a numeric feature; the generator emits none here.
    let cfg = write_config(dir.path(), &format!("[preprocess]\nkind = \"smote\"\n[train]\nkind = \"logistic\"\n{GENERATE}"));
    let o = repairlab(&["run", "--config", &cfg, "--out-dir", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(String::from_utf8(o.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "stage_failure");
    assert_eq!(v["stage"], "preprocess");
}

#[test]
fn optimize_prints_the_budget_note() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("[preprocess]\nkind = \"optimize\"\n[preprocess.problem]\nepsilon = 0.05\ndistortion_budget = 0.4\n{GENERATE}"),
    );
    let o = repairlab(&["run", "--config", &cfg, "--out-dir", dir.path().join("o").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no default"));
}

#[test]
fn compare_writes_comparison_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("[audit]\nmax_probes = 20\n{GENERATE}\n[[sweep]]\nname = \"none\"\n[[sweep]]\nname = \"massage\"\npreprocess = {{ kind = \"massage\" }}\n"),
    );
    let out = dir.path().join("o");
    let o = repairlab(&["compare", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("stack,preprocess,train,postprocess,accuracy,"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = repairlab(&["run", "--config", "x.toml", "--interactive"]);
    assert_eq!(o.status.code(), Some(2));
}
