use std::path::Path;

use anyhow::{ensure, Context, Result};
use myotune::config::KvConfig;
use myotune::emg_data::{load_recordings, WindowParams};
use myotune::features::{extract_recordings, read_features, write_features, FeatureConfig};

use crate::manifest::Recorder;

pub struct ExtractConfig {
    pub window: WindowParams,
    pub features: FeatureConfig,
    /// Used when the manifest has no `sample_rate_hz` column.
    pub sample_rate_hz: f64,
}

impl ExtractConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Self { window: WindowParams::default(), features: FeatureConfig::default(), sample_rate_hz: 1000.0 };
        if let Some(path) = path {
            let mut kv = KvConfig::load(path)?;
            kv.take("window_ms", &mut cfg.window.window_ms)?;
            kv.take("stride_ms", &mut cfg.window.stride_ms)?;
            kv.take("sample_rate_hz", &mut cfg.sample_rate_hz)?;
            cfg.features = FeatureConfig::take_from(&mut kv)?;
            kv.finish()?;
        }
        Ok(cfg)
    }
}

pub fn run(manifest: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let mut recorder = Recorder::start("extract", config, None);
    recorder.input(manifest);
    let cfg = ExtractConfig::load(config)?;
    let recordings = load_recordings(manifest, cfg.sample_rate_hz)?;
    let features = extract_recordings(recordings, cfg.window, &cfg.features)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    write_features(out, &features)?;
    let reread = read_features(out)?;
    ensure!(reread == features, "{} did not read back identically", out.display());

    let mut run_manifest = out.as_os_str().to_owned();
    run_manifest.push(".run_manifest.json");
    recorder.finish(Path::new(&run_manifest), &[out.to_path_buf()])?;
    eprintln!("wrote {} feature rows to {}", features.len(), out.display());
    Ok(())
}
