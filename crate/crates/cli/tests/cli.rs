use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn myotune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_myotune")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = myotune(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn output_hashes(manifest: &Path) -> Vec<(String, String)> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    v["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| (o["path"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
        .collect()
}

/// Synthesizes `subjects` subjects, extracts features and returns the table.
fn toy_features(dir: &Path, subjects: u32) -> PathBuf {
    let synth_cfg = write(dir, "synth.cfg", &format!("subjects = {subjects}\ntrials = 3\nduration_s = 1.0\n"));
    let corpus = dir.join("corpus");
    ok(&["synth", "--config", s(&synth_cfg), "--seed", "3", "--out", s(&corpus)]);
    let extract_cfg = write(dir, "extract.cfg", "window_ms = 100\nstride_ms = 50\n");
    let features = dir.join("features.csv");
    ok(&["extract", s(&corpus.join("manifest.csv")), "--config", s(&extract_cfg), "--out", s(&features)]);
    features
}

fn tune_cfg(dir: &Path) -> PathBuf {
    write(dir, "tune.cfg", "population_size = 8\ngenerations = 3\nts2_per_class = 40\n")
}

#[test]
fn synth_counts_and_repeatable_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "synth.cfg", "subjects = 1\ntrials = 2\nduration_s = 0.3\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["synth", "--config", s(&cfg), "--seed", "5", "--out", s(&a)]);
    ok(&["synth", "--config", s(&cfg), "--seed", "5", "--out", s(&b), "--jobs", "2"]);
    assert_eq!(fs::read_dir(a.join("signals")).unwrap().count(), 5 * 8 * 2);
    let manifest_rows = fs::read_to_string(a.join("manifest.csv")).unwrap().lines().count();
    assert_eq!(manifest_rows, 1 + 5 * 8 * 2);
    let hashes = output_hashes(&a.join("run_manifest.json"));
    assert_eq!(hashes.len(), 1 + 80);
    assert_eq!(hashes, output_hashes(&b.join("run_manifest.json")));
}

#[test]
fn invalid_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "subjects = 1\nsubjectz = 2\n");
    let out = myotune(&["synth", "--config", s(&cfg), "--out", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subjectz"));
}

#[test]
fn extract_columns_and_idempotence() {
    let dir = tempfile::tempdir().unwrap();
    let features = toy_features(dir.path(), 1);
    let text = fs::read_to_string(&features).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 5 + 42);
    assert_eq!(header[5], "ch1_f1");
    assert_eq!(header[46], "ch7_f6");
    // 5 positions, 8 classes, 3 trials, 19 windows each.
    assert_eq!(text.lines().count(), 1 + 5 * 8 * 3 * 19);

    let again = dir.path().join("again.csv");
    let extract_cfg = dir.path().join("extract.cfg");
    ok(&["extract", s(&dir.path().join("corpus/manifest.csv")), "--config", s(&extract_cfg), "--out", s(&again)]);
    assert_eq!(fs::read(&again).unwrap(), fs::read(&features).unwrap());
}

#[test]
fn tune_smoke_run_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let features = toy_features(dir.path(), 2);
    let cfg = tune_cfg(dir.path());
    let runs = dir.path().join("runs");
    let start = Instant::now();
    ok(&["tune", s(&features), "--config", s(&cfg), "--seed", "7", "--out", s(&runs), "--subject", "1"]);
    assert!(start.elapsed().as_secs() < 60, "smoke run took {:?}", start.elapsed());

    let run1 = runs.join("subject_01_seed_7");
    for g in 1..=3 {
        assert!(run1.join(format!("fronts/gen_{g:03}.csv")).exists());
    }
    for name in ["accuracy_dominant_ts1.csv", "fn_dominant_ts2.csv", "fn_dominant_validation.csv"] {
        assert!(run1.join("confusion").join(name).exists(), "{name}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run1.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["generations"].as_array().unwrap().len(), 3);
    assert_eq!(report["extremes"].as_array().unwrap().len(), 2);

    // Same inputs, same outputs.
    let rerun = dir.path().join("rerun");
    ok(&["tune", s(&features), "--config", s(&cfg), "--seed", "7", "--out", s(&rerun), "--subject", "1"]);
    let manifest = |root: &Path| output_hashes(&root.join("subject_01_seed_7/run_manifest.json"));
    assert_eq!(manifest(&runs), manifest(&rerun));

    // A single run summarizes to its own values.
    let out = ok(&["report", s(&run1)]);
    let summary = String::from_utf8(out.stdout).unwrap();
    let ts1 = &report["extremes"][0]["ts1"];
    let row = summary.lines().find(|l| l.starts_with("accuracy_dominant,ts1,")).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[5].parse::<f64>().unwrap(), ts1["accuracy"].as_f64().unwrap());
    assert_eq!(cells[6].parse::<f64>().unwrap(), ts1["rest_fn"].as_f64().unwrap());

    // Two subjects average arithmetically.
    ok(&["tune", s(&features), "--config", s(&cfg), "--seed", "7", "--out", s(&runs), "--subject", "2"]);
    let run2 = runs.join("subject_02_seed_7");
    let out_csv = dir.path().join("summary.csv");
    ok(&["report", s(&run1), s(&run2), "--out", s(&out_csv)]);
    let summary = fs::read_to_string(&out_csv).unwrap();
    let r2: serde_json::Value = serde_json::from_str(&fs::read_to_string(run2.join("report.json")).unwrap()).unwrap();
    let mean = (ts1["rest_fn"].as_f64().unwrap() + r2["extremes"][0]["ts1"]["rest_fn"].as_f64().unwrap()) / 2.0;
    let row = summary.lines().find(|l| l.starts_with("accuracy_dominant,ts1,")).unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells[2], "2");
    assert_eq!(cells[4], "1;2");
    assert_eq!(cells[6].parse::<f64>().unwrap(), mean);

    // Mixed seeds need --force.
    ok(&["tune", s(&features), "--config", s(&cfg), "--seed", "8", "--out", s(&runs), "--subject", "1"]);
    let other = runs.join("subject_01_seed_8");
    let refused = myotune(&["report", s(&run1), s(&other)]);
    assert!(!refused.status.success());
    let err = String::from_utf8_lossy(&refused.stderr);
    assert!(err.contains('7') && err.contains('8') && err.contains("--force"), "{err}");
    let forced = ok(&["report", s(&run1), s(&other), "--force"]);
    assert!(String::from_utf8(forced.stdout).unwrap().contains(",7;8,"));
}

#[test]
fn missing_feature_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = myotune(&["tune", s(&missing), "--out", s(&dir.path().join("runs"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));
}

#[test]
fn full_scale_operator_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "full.cfg",
        "# full-scale settings\npopulation_size = 98\ngenerations = 10\npc = 0.6\neta_c = 15\npm = 0.4\neta_m = 20\n\
         objective_set = ts2\nts1_per_class = 1521\nts2_per_class = 880\nts2_allow_train_windows = true\n",
    );
    // An empty feature table fails after the config has been accepted.
    let features = write(dir.path(), "empty.csv", "subject,position,class,trial,window\n");
    let out = myotune(&["tune", s(&features), "--config", s(&cfg), "--out", s(&dir.path().join("runs"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no feature rows"));
}
