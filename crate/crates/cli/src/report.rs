use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use myotune::metrics::EvalSummary;
use myotune::tuner::{SolutionTag, TuneReport, REPORT_FILE};

use crate::manifest::{write_atomic, Recorder};

const SETS: [&str; 3] = ["validation", "ts1", "ts2"];

fn pick<'a>(report: &'a TuneReport, tag: SolutionTag, set: &str) -> &'a EvalSummary {
    let e = report.extreme(tag);
    match set {
        "validation" => &e.validation,
        "ts1" => &e.ts1,
        _ => &e.ts2,
    }
}

/// Summary CSV: one row per (tag, set) with metric means over runs.
pub fn summarize(reports: &[TuneReport]) -> String {
    let seeds: BTreeSet<u64> = reports.iter().map(|r| r.seed).collect();
    let seeds = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(";");
    let subjects: BTreeSet<String> =
        reports.iter().map(|r| r.subject.map_or("all".to_string(), |s| s.to_string())).collect();
    let subjects = subjects.into_iter().collect::<Vec<_>>().join(";");
    let n = reports.len() as f64;
    let mut out = String::from("tag,set,runs,seeds,subjects,mean_accuracy,mean_rest_fn,mean_rest_fn_rate,mean_rest_recall\n");
    for tag in [SolutionTag::AccuracyDominant, SolutionTag::FnDominant] {
        for set in SETS {
            let mean = |f: &dyn Fn(&EvalSummary) -> f64| reports.iter().map(|r| f(pick(r, tag, set))).sum::<f64>() / n;
            writeln!(
                out,
                "{},{set},{},{seeds},{subjects},{},{},{},{}",
                tag.as_str(),
                reports.len(),
                mean(&|s| s.accuracy),
                mean(&|s| s.rest_fn as f64),
                mean(&|s| s.rest_fn_rate),
                mean(&|s| s.rest_recall),
            )
            .expect("writing to a String");
        }
    }
    out
}

pub fn run(run_dirs: &[PathBuf], out: Option<&Path>, force: bool) -> Result<()> {
    let mut recorder = Recorder::start("report", None, None);
    let mut reports = Vec::with_capacity(run_dirs.len());
    for dir in run_dirs {
        let path = dir.join(REPORT_FILE);
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        reports.push(TuneReport::from_json(&text).with_context(|| format!("cannot parse {}", path.display()))?);
        recorder.input(&path);
    }
    let seeds: BTreeSet<u64> = reports.iter().map(|r| r.seed).collect();
    if seeds.len() > 1 && !force {
        let listed = seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(", ");
        bail!("runs mix seeds {listed}; pass --force to pool them");
    }
    let summary = summarize(&reports);
    match out {
        Some(path) => {
            write_atomic(path, summary.as_bytes())?;
            let mut manifest = path.as_os_str().to_owned();
            manifest.push(".run_manifest.json");
            recorder.finish(Path::new(&manifest), &[path.to_path_buf()])?;
        }
        None => print!("{summary}"),
    }
    Ok(())
}
