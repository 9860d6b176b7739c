use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_ftqlab");

fn ftqlab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("FTQLAB_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn column(text: &str, name: &str) -> Vec<String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let idx = rd.headers().unwrap().iter().position(|h| h == name).unwrap();
    rd.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

#[test]
fn noise_bounds_passes_with_exit_zero() {
    let o = ftqlab(&["noise-bounds"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("n,delta,t,tail_sum,chernoff_bound,pass,seed,streams,version,config\n"));
    assert!(!text.contains('\r'));
    assert_eq!(csv_rows(&text).len(), 12);
    assert!(column(&text, "pass").iter().all(|p| p == "true"));
    assert_eq!(stderr(&o).lines().count(), 12);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.conf",
        "# toric run\nseed = 11\n\n[toric-comm]\nL = 3\nnu = 0.002\ntrials = 300\n",
    );
    let o = ftqlab(&["--config", &cfg, "toric-comm", "--L", "5", "--nu", "1e-3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(column(&text, "L"), ["5"]);
    assert_eq!(column(&text, "trials"), ["300"]);
    assert_eq!(column(&text, "seed"), ["11"]);
    assert_eq!(column(&text, "streams"), ["0..300"]);
    let nu: f64 = column(&text, "nu")[0].parse().unwrap();
    assert_eq!(nu, 1e-3);
    let embedded: Value = serde_json::from_str(&column(&text, "config")[0]).unwrap();
    assert_eq!(embedded["command"], "toric-comm");
    assert_eq!(embedded["seed"], 11);
    assert_eq!(embedded["params"]["trials"], 300);
}

fn assert_usage_error(args: &[&str], key: &str) {
    let o = ftqlab(args);
    assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    assert!(stderr(&o).contains(key), "{args:?}: {}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_values_name_the_key() {
    assert_usage_error(&["toric-comm", "--L", "banana", "--nu", "1e-3"], "\"L\"");
    assert_usage_error(&["toric-comm", "--nu", "1e-3"], "\"L\"");
    assert_usage_error(
        &["toric-comm", "--L", "5", "--nu", "1e-3", "--trials", "0"],
        "\"trials\"",
    );
    assert_usage_error(&["toric-comm", "--L", "5", "--nu", "2.0"], "\"nu\"");
    assert_usage_error(&["single-shot", "--decoder", "psychic"], "\"decoder\"");
    assert_usage_error(&["rec-sim", "--code", "bit-flip-3", "--t", "1"], "\"t\"");
    assert_usage_error(&["toric-comm", "--bogus", "1"], "--bogus");
}

#[test]
fn bad_config_files_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.conf", "[noise-bounds]\nflavour = 3\n");
    assert_usage_error(&["--config", &unknown, "noise-bounds"], "\"flavour\"");
    let mistyped = write(dir.path(), "b.conf", "[noise-bounds]\nn = 10,x\n");
    assert_usage_error(&["--config", &mistyped, "noise-bounds"], "\"n\"");
    let section = write(dir.path(), "c.conf", "[warp-drive]\n");
    assert_usage_error(&["--config", &section, "noise-bounds"], "warp-drive");
    let missing = dir.path().join("absent.conf");
    assert_usage_error(&["--config", missing.to_str().unwrap(), "noise-bounds"], "absent.conf");
}

#[test]
fn seed_falls_back_to_environment() {
    let base = ["toric-comm", "--L", "3", "--nu", "0.01", "--trials", "200"];
    let env = Command::new(BIN).args(base).env("FTQLAB_SEED", "77").output().unwrap();
    assert_eq!(column(&stdout(&env), "seed"), ["77"]);
    let flag = Command::new(BIN)
        .args(base)
        .args(["--seed", "5"])
        .env("FTQLAB_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(column(&stdout(&flag), "seed"), ["5"]);
    assert_eq!(column(&stdout(&ftqlab(&base)), "seed"), ["0"]);
}

#[test]
fn reruns_are_byte_identical_and_thread_independent() {
    let args = [
        "single-shot",
        "--trials",
        "300",
        "--rounds",
        "2",
        "--delta",
        "0.01",
        "--seed",
        "9",
    ];
    let a = ftqlab(&args);
    let b = ftqlab(&args);
    assert!(a.status.code().is_some_and(|c| c <= 1));
    assert_eq!(a.stdout, b.stdout);
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    assert_eq!(ftqlab(&one).stdout, a.stdout);
    let other = ftqlab(&[
        "single-shot",
        "--trials",
        "300",
        "--rounds",
        "2",
        "--delta",
        "0.01",
        "--seed",
        "10",
    ]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn out_flag_writes_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bounds.csv");
    let o = ftqlab(&[
        "noise-bounds",
        "--n",
        "100",
        "--delta",
        "0.05",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv_rows(&text).len(), 1);
    assert!(
        !text.contains("bounds.csv"),
        "output path leaked into the embedded config"
    );
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("no-such-dir").join("x.csv");
    let o = ftqlab(&["noise-bounds", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn json_records_carry_version_and_config() {
    let o = ftqlab(&["rep-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["version"].as_str().unwrap().starts_with("ftqlab "));
    assert_eq!(v["config"]["command"], "rep-check");
    assert!(!v["cases"].as_array().unwrap().is_empty());
}

#[test]
fn swapped_correction_table_fails_with_witnesses() {
    let o = ftqlab(&[
        "teleport-verify",
        "--gate-set",
        "cnot",
        "--table",
        "swapped",
        "--trials",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], false);
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
    assert!(stderr(&o).contains("FAIL"));
}

#[test]
fn rec_sim_single_faults_on_a_small_rectangle() {
    let o = ftqlab(&["rec-sim", "--gate", "prep_z"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r = &v["reports"][0];
    assert_eq!(r["correct_given_good"], r["total_paths"]);
    assert!(r["max_rounds"].as_u64().unwrap() <= 9);
}
