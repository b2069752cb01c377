//! Seeded synthetic recordings.
//!
//! Each channel is unit-variance AR(1) noise (a band-limited carrier whose
//! pole is class specific) scaled by a per-(class, position) gain profile, a
//! slow amplitude envelope and per-trial gain jitter, plus a white noise
//! floor. Every class modulates one per-subject base profile by log-normal
//! per-channel factors; rest additionally scales it down by `rest_gain` and
//! the last movement class, a low-effort gesture, by `low_effort_gain`.
//! Limb position multiplies the class profile by a smooth per-channel factor,
//! so unseen positions lie between the trained ones.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{DataError, Movement, Position, RawRecording, RecordingId};
use crate::config::{ConfigError, KvConfig};
use crate::rng::{stream, tag};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    pub subjects: u32,
    /// Uses positions `P1..=P{positions}`.
    pub positions: usize,
    /// Uses classes `C1..=C{classes}`.
    pub classes: usize,
    pub trials: u32,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub channels: usize,
    /// Base channel gains are drawn from `min + spread * U(0,1)`.
    pub movement_gain_min: f64,
    pub movement_gain_spread: f64,
    /// Standard deviation of the per-class, per-channel log-gain modulation.
    pub class_contrast: f64,
    /// Carrier poles are drawn from `0.5 ± pole_spread`.
    pub pole_spread: f64,
    /// Rest profile relative to the base profile.
    pub rest_gain: f64,
    /// Profile of the last movement class relative to the base profile.
    pub low_effort_gain: f64,
    /// Log-gain shift between the outermost positions.
    pub position_shift: f64,
    /// Standard deviation of per-trial log-gain jitter.
    pub trial_jitter: f64,
    pub noise_floor: f64,
    pub envelope_depth: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects: 11,
            positions: 5,
            classes: 8,
            trials: 6,
            duration_s: 5.0,
            sample_rate_hz: 1000.0,
            channels: 7,
            movement_gain_min: 0.15,
            movement_gain_spread: 1.0,
            class_contrast: 0.3,
            pole_spread: 0.1,
            rest_gain: 0.55,
            low_effort_gain: 0.65,
            position_shift: 0.3,
            trial_jitter: 0.1,
            noise_floor: 0.02,
            envelope_depth: 0.3,
        }
    }
}

impl SynthConfig {
    pub fn from_kv(mut kv: KvConfig) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        kv.take("subjects", &mut c.subjects)?;
        kv.take("positions", &mut c.positions)?;
        kv.take("classes", &mut c.classes)?;
        kv.take("trials", &mut c.trials)?;
        kv.take("duration_s", &mut c.duration_s)?;
        kv.take("sample_rate_hz", &mut c.sample_rate_hz)?;
        kv.take("channels", &mut c.channels)?;
        kv.take("movement_gain_min", &mut c.movement_gain_min)?;
        kv.take("movement_gain_spread", &mut c.movement_gain_spread)?;
        kv.take("class_contrast", &mut c.class_contrast)?;
        kv.take("pole_spread", &mut c.pole_spread)?;
        kv.take("rest_gain", &mut c.rest_gain)?;
        kv.take("low_effort_gain", &mut c.low_effort_gain)?;
        kv.take("position_shift", &mut c.position_shift)?;
        kv.take("trial_jitter", &mut c.trial_jitter)?;
        kv.take("noise_floor", &mut c.noise_floor)?;
        kv.take("envelope_depth", &mut c.envelope_depth)?;
        kv.finish()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let bad = |m: String| Err(DataError::InvalidSynthConfig(m));
        if self.subjects == 0 || self.trials == 0 || self.channels == 0 {
            return bad("subjects, trials and channels must be positive".into());
        }
        if !(1..=Position::COUNT).contains(&self.positions) {
            return bad(format!("positions must be in 1..={}", Position::COUNT));
        }
        if !(1..=Movement::COUNT).contains(&self.classes) {
            return bad(format!("classes must be in 1..={}", Movement::COUNT));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return bad(format!("duration_s {} must be positive", self.duration_s));
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad(format!("sample_rate_hz {} must be positive", self.sample_rate_hz));
        }
        if self.samples_per_trial() == 0 {
            return bad("duration shorter than one sample".into());
        }
        let knobs = [
            self.movement_gain_min,
            self.movement_gain_spread,
            self.class_contrast,
            self.rest_gain,
            self.low_effort_gain,
            self.position_shift,
            self.trial_jitter,
            self.noise_floor,
            self.envelope_depth,
        ];
        if knobs.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || self.envelope_depth >= 1.0 {
            return bad("gain knobs must be finite and non-negative, envelope_depth < 1".into());
        }
        if !(0.0..0.5).contains(&self.pole_spread) {
            return bad(format!("pole_spread {} not in [0, 0.5)", self.pole_spread));
        }
        Ok(())
    }

    pub fn samples_per_trial(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }

    pub fn recording_count(&self) -> usize {
        self.subjects as usize * self.positions * self.classes * self.trials as usize
    }
}

/// Per-subject, per-class channel profile.
struct ClassProfile {
    gains: Vec<f64>,
    /// AR(1) pole of the carrier.
    pole: f64,
}

fn base_profile(cfg: &SynthConfig, seed: u64, subject: u32) -> Vec<f64> {
    let mut rng = stream(seed, &[tag("base"), subject as u64]);
    (0..cfg.channels).map(|_| cfg.movement_gain_min + cfg.movement_gain_spread * rng.random::<f64>()).collect()
}

fn class_profile(cfg: &SynthConfig, seed: u64, subject: u32, class: Movement, base: &[f64]) -> ClassProfile {
    let mut rng = stream(seed, &[tag("profile"), subject as u64, class.index() as u64]);
    let level = if class == Movement::REST {
        cfg.rest_gain
    } else if class.index() + 2 == cfg.classes {
        cfg.low_effort_gain
    } else {
        1.0
    };
    let gains = base
        .iter()
        .map(|b| {
            let z: f64 = rng.sample(StandardNormal);
            level * b * (cfg.class_contrast * z).exp()
        })
        .collect();
    let pole = 0.5 + cfg.pole_spread * rng.random_range(-1.0..=1.0);
    ClassProfile { gains, pole }
}

fn position_factors(cfg: &SynthConfig, seed: u64, subject: u32) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, &[tag("position"), subject as u64]);
    let direction: Vec<f64> = (0..cfg.channels).map(|_| rng.random_range(-1.0..1.0)).collect();
    Position::ALL
        .iter()
        .map(|p| {
            let offset = (p.index() as f64 - 2.0) / 2.0;
            direction.iter().map(|w| (cfg.position_shift * offset * w).exp()).collect()
        })
        .collect()
}

fn generate_one(
    cfg: &SynthConfig,
    seed: u64,
    id: RecordingId,
    profile: &ClassProfile,
    position: &[f64],
) -> Result<RawRecording, DataError> {
    let mut rng = stream(
        seed,
        &[tag("rec"), id.subject as u64, id.position.index() as u64, id.class.index() as u64, id.trial as u64],
    );
    let n = cfg.samples_per_trial();
    let innovation = (1.0 - profile.pole * profile.pole).sqrt();
    let samples = (0..cfg.channels)
        .map(|ch| {
            let jitter: f64 = rng.sample(StandardNormal);
            let gain = profile.gains[ch] * position[ch] * (cfg.trial_jitter * jitter).exp();
            let freq = rng.random_range(0.5..2.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            let mut y: f64 = rng.sample(StandardNormal);
            (0..n)
                .map(|t| {
                    let e: f64 = rng.sample(StandardNormal);
                    y = profile.pole * y + innovation * e;
                    let time = t as f64 / cfg.sample_rate_hz;
                    let envelope = 1.0 + cfg.envelope_depth * (2.0 * PI * freq * time + phase).sin();
                    let floor: f64 = rng.sample(StandardNormal);
                    gain * envelope * y + cfg.noise_floor * floor
                })
                .collect()
        })
        .collect();
    RawRecording::new(id, cfg.sample_rate_hz, samples)
}

/// Generates `subjects × positions × classes × trials` recordings ordered by
/// subject, position, class, trial. A pure function of `(cfg, seed)`.
pub fn synth_generate(cfg: &SynthConfig, seed: u64) -> Result<Vec<RawRecording>, DataError> {
    cfg.validate()?;
    let mut jobs = Vec::with_capacity(cfg.recording_count());
    for subject in 1..=cfg.subjects {
        for &position in &Position::ALL[..cfg.positions] {
            for &class in &Movement::ALL[..cfg.classes] {
                for trial in 1..=cfg.trials {
                    jobs.push(RecordingId { subject, position, class, trial });
                }
            }
        }
    }
    let subjects: Vec<(Vec<ClassProfile>, Vec<Vec<f64>>)> = (1..=cfg.subjects)
        .map(|s| {
            let base = base_profile(cfg, seed, s);
            let profiles = Movement::ALL.iter().map(|&c| class_profile(cfg, seed, s, c, &base)).collect();
            (profiles, position_factors(cfg, seed, s))
        })
        .collect();
    jobs.par_iter()
        .map(|id| {
            let (profiles, positions) = &subjects[id.subject as usize - 1];
            generate_one(cfg, seed, *id, &profiles[id.class.index()], &positions[id.position.index()])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthConfig {
        SynthConfig { subjects: 1, trials: 1, duration_s: 0.2, ..SynthConfig::default() }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = synth_generate(&small(), 7).unwrap();
        let b = synth_generate(&small(), 7).unwrap();
        let c = synth_generate(&small(), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn full_scale_count() {
        let cfg = SynthConfig { duration_s: 0.005, ..SynthConfig::default() };
        let recs = synth_generate(&cfg, 1).unwrap();
        assert_eq!(recs.len(), 2640);
        assert_eq!(recs[0].channels(), 7);
    }

    #[test]
    fn default_trial_is_five_seconds() {
        let cfg = SynthConfig { subjects: 1, positions: 1, classes: 1, trials: 1, ..SynthConfig::default() };
        let recs = synth_generate(&cfg, 3).unwrap();
        assert_eq!(recs[0].duration_s(), 5.0);
    }

    #[test]
    fn rejects_bad_config() {
        for cfg in [
            SynthConfig { duration_s: 0.0, ..small() },
            SynthConfig { sample_rate_hz: -1.0, ..small() },
            SynthConfig { channels: 0, ..small() },
            SynthConfig { positions: 6, ..small() },
        ] {
            assert!(synth_generate(&cfg, 0).is_err());
        }
    }

    #[test]
    fn rest_has_lowest_mean_amplitude() {
        // Mean absolute amplitude per class, pooled over 100 seeds.
        let cfg = SynthConfig { subjects: 1, positions: 1, trials: 1, duration_s: 0.05, ..SynthConfig::default() };
        let mut means = [0.0; 8];
        for seed in 0..100 {
            for rec in synth_generate(&cfg, seed).unwrap() {
                let total: f64 = rec.samples().iter().flatten().map(|v| v.abs()).sum();
                means[rec.id.class.index()] += total / (rec.len() * rec.channels()) as f64;
            }
        }
        let rest = means[Movement::REST.index()];
        assert!(means[..7].iter().all(|&m| m > rest), "{means:?}");
    }

    #[test]
    fn config_keys() {
        let kv = KvConfig::parse("t", "subjects = 2\ntrials = 3\n").unwrap();
        let cfg = SynthConfig::from_kv(kv).unwrap();
        assert_eq!((cfg.subjects, cfg.trials), (2, 3));
        let kv = KvConfig::parse("t", "subjectz = 2\n").unwrap();
        assert!(SynthConfig::from_kv(kv).unwrap_err().to_string().contains("subjectz"));
    }
}
