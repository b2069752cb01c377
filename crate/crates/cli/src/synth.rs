use std::fs;
use std::path::Path;

use anyhow::{ensure, Context, Result};
use myotune::config::KvConfig;
use myotune::emg_data::{synth_generate, write_recordings, SynthConfig};

use crate::manifest::{Recorder, RUN_MANIFEST_FILE};

pub fn run(config: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let recorder = Recorder::start("synth", config, Some(seed));
    let cfg = match config {
        Some(path) => SynthConfig::from_kv(KvConfig::load(path)?)?,
        None => SynthConfig::default(),
    };
    let recordings = synth_generate(&cfg, seed)?;
    let manifest = write_recordings(out, &recordings)?;

    let signals = out.join("signals");
    let mut outputs = vec![manifest];
    for entry in fs::read_dir(&signals).with_context(|| format!("cannot list {}", signals.display()))? {
        outputs.push(entry?.path());
    }
    outputs[1..].sort();
    ensure!(
        outputs.len() == recordings.len() + 1,
        "{} holds {} files, expected {}",
        signals.display(),
        outputs.len() - 1,
        recordings.len()
    );
    recorder.finish(&out.join(RUN_MANIFEST_FILE), &outputs)?;
    eprintln!("wrote {} recordings to {}", recordings.len(), out.display());
    Ok(())
}
