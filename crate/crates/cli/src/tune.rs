use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use myotune::config::KvConfig;
use myotune::emg_data::make_splits;
use myotune::features::{read_features, FeatureVector};
use myotune::tuner::{
    run_dir_name, run_tuning_observed, write_generation, write_run, ObjectiveSet, SolutionTag, TuneConfig, TuneReport,
    REPORT_FILE,
};

use crate::manifest::{Recorder, RUN_MANIFEST_FILE};

pub struct Overrides {
    pub seed: Option<u64>,
    pub objective_set: Option<ObjectiveSet>,
    pub ts2_allow_train_windows: bool,
    pub subject: Option<u32>,
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<TuneConfig> {
    let mut cfg = match path {
        Some(p) => TuneConfig::from_kv(KvConfig::load(p)?)?,
        None => TuneConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(set) = overrides.objective_set {
        cfg.objective_set = set;
    }
    if overrides.ts2_allow_train_windows {
        cfg.split.reserve_ts2_trials = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(features: &Path, config: Option<&Path>, overrides: &Overrides, out: &Path) -> Result<()> {
    let cfg = load_config(config, overrides)?;
    let all = read_features(features)?;
    let mut by_subject: BTreeMap<u32, Vec<FeatureVector>> = BTreeMap::new();
    for f in all {
        by_subject.entry(f.tag.subject).or_default().push(f);
    }
    if let Some(s) = overrides.subject {
        by_subject.retain(|&k, _| k == s);
        ensure!(!by_subject.is_empty(), "subject {s} not found in {}", features.display());
    }
    ensure!(!by_subject.is_empty(), "{} holds no feature rows", features.display());

    for (subject, rows) in &by_subject {
        let mut recorder = Recorder::start("tune", config, Some(cfg.seed));
        recorder.input(features);
        let dir = out.join(run_dir_name(Some(*subject), cfg.seed));
        let split = make_splits(rows, &cfg.split, cfg.seed).with_context(|| format!("subject {subject}"))?;
        let mut flush_error = None;
        let report = run_tuning_observed(&split, &cfg, cfg.seed, |g| {
            if let Err(e) = write_generation(&dir, g) {
                flush_error.get_or_insert(e);
            }
        })
        .with_context(|| format!("tuning subject {subject}"))?;
        if let Some(e) = flush_error {
            return Err(e.into());
        }
        let written: Vec<PathBuf> = write_run(&dir, &report)?;
        let text = std::fs::read_to_string(dir.join(REPORT_FILE))?;
        ensure!(TuneReport::from_json(&text)? == report, "{} did not read back identically", dir.display());
        recorder.finish(&dir.join(RUN_MANIFEST_FILE), &written)?;

        let acc = report.extreme(SolutionTag::AccuracyDominant);
        let fnd = report.extreme(SolutionTag::FnDominant);
        eprintln!(
            "subject {subject}: accuracy-dominant TS1 acc {:.4} rest_fn {} | fn-dominant TS1 acc {:.4} rest_fn {} -> {}",
            acc.ts1.accuracy,
            acc.ts1.rest_fn,
            fnd.ts1.accuracy,
            fnd.ts1.rest_fn,
            dir.display()
        );
    }
    Ok(())
}
