//! Time-domain descriptors.
//!
//! Per channel, six log-compressed coefficients derived from the root-squared
//! zeroth, second and fourth order moments (the signal, its first and its
//! second difference) after a power transform:
//!
//! | coefficient | value |
//! |---|---|
//! | f1 | `ln(m0 + eps)` |
//! | f2 | `ln(|m0 - m2| + eps)` |
//! | f3 | `ln(|m0 - m4| + eps)` |
//! | f4 sparseness | `ln(m0 / (sqrt(|(m0 - m2)(m0 - m4)|) + eps) + eps)` |
//! | f5 irregularity factor | `ln(m2 / (sqrt(m0 m4) + eps) + eps)` |
//! | f6 waveform length | `ln(sum |dx| + eps)` |
//!
//! with `m_k = (sqrt(sum (d^k x)^2))^lambda / lambda`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, KvConfig};
use std::sync::Arc;

use crate::emg_data::{segment_windows, DataError, RawRecording, Tagged, Window, WindowParams, WindowTag};

pub const COEFFICIENTS: usize = 6;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("signal of length {0} is too short, need at least 3 samples")]
    TooShort(usize),
    #[error("invalid feature config: {0}")]
    InvalidConfig(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    RawOnly,
    NonlinearFusion,
}

impl FromStr for FusionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "raw_only" | "raw" => Ok(Self::RawOnly),
            "nonlinear_fusion" | "fusion" => Ok(Self::NonlinearFusion),
            _ => Err(format!("expected raw_only or nonlinear_fusion, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub fusion: FusionMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { lambda: 0.1, epsilon: 1e-8, fusion: FusionMode::RawOnly }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(FeatureError::InvalidConfig(format!("lambda {} must lie in (0, 1]", self.lambda)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(FeatureError::InvalidConfig(format!("epsilon {} must be positive", self.epsilon)));
        }
        Ok(())
    }

    /// Consumes `lambda`, `epsilon` and `fusion_mode` from `kv`.
    pub fn take_from(kv: &mut KvConfig) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        kv.take("lambda", &mut c.lambda)?;
        kv.take("epsilon", &mut c.epsilon)?;
        kv.take("fusion_mode", &mut c.fusion)?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub m0: f64,
    pub m2: f64,
    pub m4: f64,
}

fn power(sum_sq: f64, lambda: f64) -> f64 {
    sum_sq.sqrt().powf(lambda) / lambda
}

pub fn td_moments(x: &[f64], cfg: &FeatureConfig) -> Result<Moments, FeatureError> {
    if x.len() < 3 {
        return Err(FeatureError::TooShort(x.len()));
    }
    let s0: f64 = x.iter().map(|v| v * v).sum();
    let s2: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    let s4: f64 = x.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).powi(2)).sum();
    Ok(Moments { m0: power(s0, cfg.lambda), m2: power(s2, cfg.lambda), m4: power(s4, cfg.lambda) })
}

pub fn tdd_six(x: &[f64], cfg: &FeatureConfig) -> Result<[f64; COEFFICIENTS], FeatureError> {
    let Moments { m0, m2, m4 } = td_moments(x, cfg)?;
    let eps = cfg.epsilon;
    let wl: f64 = x.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok([
        (m0 + eps).ln(),
        ((m0 - m2).abs() + eps).ln(),
        ((m0 - m4).abs() + eps).ln(),
        (m0 / (((m0 - m2) * (m0 - m4)).abs().sqrt() + eps) + eps).ln(),
        (m2 / ((m0 * m4).sqrt() + eps) + eps).ln(),
        (wl + eps).ln(),
    ])
}

/// Bounded similarity of raw and log-power descriptors, in `[-1, 1]`.
fn fuse(a: &[f64; COEFFICIENTS], b: &[f64; COEFFICIENTS], eps: f64) -> [f64; COEFFICIENTS] {
    std::array::from_fn(|j| -2.0 * a[j] * b[j] / (a[j] * a[j] + b[j] * b[j] + eps))
}

/// Features of one channel under `cfg.fusion`.
pub fn channel_features(x: &[f64], cfg: &FeatureConfig) -> Result<[f64; COEFFICIENTS], FeatureError> {
    let a = tdd_six(x, cfg)?;
    match cfg.fusion {
        FusionMode::RawOnly => Ok(a),
        FusionMode::NonlinearFusion => {
            let nonlinear: Vec<f64> = x.iter().map(|v| (v * v + cfg.epsilon).ln()).collect();
            let b = tdd_six(&nonlinear, cfg)?;
            Ok(fuse(&a, &b, cfg.epsilon))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub tag: WindowTag,
    pub values: Vec<f64>,
}

impl Tagged for FeatureVector {
    fn tag(&self) -> WindowTag {
        self.tag
    }
}

/// Concatenates per-channel coefficients: dimension `6 × channels`.
pub fn extract(window: &Window, cfg: &FeatureConfig) -> Result<FeatureVector, FeatureError> {
    let mut values = Vec::with_capacity(COEFFICIENTS * window.channels());
    for c in 0..window.channels() {
        values.extend_from_slice(&channel_features(window.channel(c), cfg)?);
    }
    Ok(FeatureVector { tag: window.tag(), values })
}

pub fn extract_all(windows: &[Window], cfg: &FeatureConfig) -> Result<Vec<FeatureVector>, FeatureError> {
    cfg.validate()?;
    windows.par_iter().map(|w| extract(w, cfg)).collect()
}

/// Segments every recording and extracts all windows, in recording order.
pub fn extract_recordings(
    recordings: Vec<RawRecording>,
    params: WindowParams,
    cfg: &FeatureConfig,
) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut windows = Vec::new();
    for rec in recordings {
        windows.extend(segment_windows(&Arc::new(rec), params)?);
    }
    extract_all(&windows, cfg)
}

const TAG_COLUMNS: [&str; 5] = ["subject", "position", "class", "trial", "window"];

/// CSV text: identity columns then `ch{c}_f{k}` columns. Rows keep input order.
pub fn features_to_csv(features: &[FeatureVector]) -> String {
    let dim = features.first().map_or(0, |f| f.values.len());
    let mut out = TAG_COLUMNS.join(",");
    for i in 0..dim {
        write!(out, ",ch{}_f{}", i / COEFFICIENTS + 1, i % COEFFICIENTS + 1).expect("string write");
    }
    out.push('\n');
    for f in features {
        let t = f.tag;
        write!(out, "{},{},{},{},{}", t.subject, t.position, t.class, t.trial, t.index).expect("string write");
        for v in &f.values {
            write!(out, ",{v}").expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn write_features(path: &Path, features: &[FeatureVector]) -> Result<(), FeatureError> {
    std::fs::write(path, features_to_csv(features))
        .map_err(|source| FeatureError::Io { path: path.display().to_string(), source })
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureVector>, FeatureError> {
    let shown = path.display().to_string();
    let text =
        std::fs::read_to_string(path).map_err(|source| FeatureError::Io { path: shown.clone(), source })?;
    let err = |line: usize, message: String| FeatureError::Parse { path: shown.clone(), line, message };
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, h)| h).unwrap_or("");
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < TAG_COLUMNS.len() || columns[..TAG_COLUMNS.len()] != TAG_COLUMNS {
        return Err(err(1, format!("header must start with {}", TAG_COLUMNS.join(","))));
    }
    let dim = columns.len() - TAG_COLUMNS.len();
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(err(i + 1, format!("expected {} columns, found {}", columns.len(), cells.len())));
        }
        let tag = WindowTag {
            subject: cells[0].parse().map_err(|e| err(i + 1, format!("subject: {e}")))?,
            position: cells[1].parse().map_err(|e| err(i + 1, e))?,
            class: cells[2].parse().map_err(|e| err(i + 1, e))?,
            trial: cells[3].parse().map_err(|e| err(i + 1, format!("trial: {e}")))?,
            index: cells[4].parse().map_err(|e| err(i + 1, format!("window: {e}")))?,
        };
        let values = cells[TAG_COLUMNS.len()..]
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| err(i + 1, "non-numeric or non-finite feature value".into()))?;
        debug_assert_eq!(values.len(), dim);
        out.push(FeatureVector { tag, values });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emg_data::{segment_windows, Movement, Position, RawRecording, RecordingId, WindowParams};
    use proptest::prelude::*;
    use rand::Rng;
    use std::sync::Arc;

    const CFG: FeatureConfig = FeatureConfig { lambda: 0.1, epsilon: 1e-8, fusion: FusionMode::RawOnly };

    /// Straight-line re-derivation of the six coefficients with explicit
    /// difference vectors.
    fn oracle(x: &[f64], lambda: f64, eps: f64) -> [f64; 6] {
        let d1: Vec<f64> = (1..x.len()).map(|i| x[i] - x[i - 1]).collect();
        let d2: Vec<f64> = (1..d1.len()).map(|i| d1[i] - d1[i - 1]).collect();
        let rs = |v: &[f64]| {
            let mut s = 0.0;
            for e in v {
                s += e * e;
            }
            s.sqrt().powf(lambda) / lambda
        };
        let (m0, m2, m4) = (rs(x), rs(&d1), rs(&d2));
        let mut wl = 0.0;
        for d in &d1 {
            wl += d.abs();
        }
        [
            (m0 + eps).ln(),
            ((m0 - m2).abs() + eps).ln(),
            ((m0 - m4).abs() + eps).ln(),
            (m0 / (((m0 - m2) * (m0 - m4)).abs().sqrt() + eps) + eps).ln(),
            (m2 / ((m0 * m4).sqrt() + eps) + eps).ln(),
            (wl + eps).ln(),
        ]
    }

    #[test]
    fn zero_signal() {
        let m = td_moments(&[0.0; 10], &CFG).unwrap();
        assert_eq!((m.m0, m.m2, m.m4), (0.0, 0.0, 0.0));
        let f = tdd_six(&[0.0; 10], &CFG).unwrap();
        for v in f {
            assert!((v - 1e-8f64.ln()).abs() < 1e-9, "{f:?}");
        }
    }

    #[test]
    fn alternating_signal_moments() {
        // x = [1,-1,1,-1]: sum x^2 = 4, dx = [-2,2,-2] -> 12, d2x = [4,-4] -> 32.
        let m = td_moments(&[1.0, -1.0, 1.0, -1.0], &CFG).unwrap();
        let expect = |s: f64| s.sqrt().powf(0.1) / 0.1;
        assert!((m.m0 - expect(4.0)).abs() < 1e-12);
        assert!((m.m2 - expect(12.0)).abs() < 1e-12);
        assert!((m.m4 - expect(32.0)).abs() < 1e-12);
        assert!((m.m0 - 10.717734625362931).abs() < 1e-12);
    }

    #[test]
    fn homogeneity() {
        let x = [0.3, -1.2, 0.8, 2.0, -0.4];
        let a = td_moments(&x, &CFG).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| v * 3.0).collect();
        let b = td_moments(&scaled, &CFG).unwrap();
        let k = 3f64.powf(0.1);
        assert!((b.m0 - k * a.m0).abs() < 1e-12);
        assert!((b.m2 - k * a.m2).abs() < 1e-12);
        assert!((b.m4 - k * a.m4).abs() < 1e-12);
    }

    #[test]
    fn ramp_waveform_length() {
        let f = tdd_six(&[0.0, 1.0, 2.0, 3.0, 4.0], &CFG).unwrap();
        assert_eq!(f[5], (4.0 + 1e-8f64).ln());
    }

    #[test]
    fn matches_oracle_on_random_vectors() {
        let mut rng = crate::rng::stream(5, &[]);
        for _ in 0..200 {
            let x: Vec<f64> = (0..32).map(|_| rng.random_range(-3.0..3.0)).collect();
            let got = tdd_six(&x, &CFG).unwrap();
            let want = oracle(&x, 0.1, 1e-8);
            for k in 0..6 {
                assert!((got[k] - want[k]).abs() < 1e-12, "f{}: {} vs {}", k + 1, got[k], want[k]);
            }
        }
    }

    #[test]
    fn short_input_rejected() {
        assert!(matches!(td_moments(&[1.0, 2.0], &CFG), Err(FeatureError::TooShort(2))));
        assert!(tdd_six(&[], &CFG).is_err());
    }

    #[test]
    fn symmetric_fusion_is_minus_one() {
        let a = [1.5, -2.0, 0.3, 4.0, -0.7, 2.2];
        for d in fuse(&a, &a, 1e-8) {
            assert!((d + 1.0).abs() < 1e-6);
        }
    }

    fn window(channels: usize, len: usize, f: impl Fn(usize, usize) -> f64) -> Window {
        let id = RecordingId { subject: 1, position: Position::P1, class: Movement::C2, trial: 1 };
        let samples = (0..channels).map(|c| (0..len).map(|t| f(c, t)).collect()).collect();
        let rec = Arc::new(RawRecording::new(id, 1000.0, samples).unwrap());
        segment_windows(&rec, WindowParams { window_ms: len as f64, stride_ms: 1.0 }).unwrap().remove(0)
    }

    #[test]
    fn seven_channels_give_42() {
        let w = window(7, 100, |c, t| ((c + 1) as f64 * t as f64 * 0.1).sin());
        let f = extract(&w, &CFG).unwrap();
        assert_eq!(f.values.len(), 42);
        assert!(f.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn constant_and_zero_windows_are_finite() {
        for fusion in [FusionMode::RawOnly, FusionMode::NonlinearFusion] {
            let cfg = FeatureConfig { fusion, ..CFG };
            for w in [window(2, 50, |_, _| 0.0), window(2, 50, |_, _| 3.0)] {
                assert!(extract(&w, &cfg).unwrap().values.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn invalid_config() {
        assert!(FeatureConfig { lambda: 0.0, ..CFG }.validate().is_err());
        assert!(FeatureConfig { lambda: 1.5, ..CFG }.validate().is_err());
        assert!(FeatureConfig { epsilon: 0.0, ..CFG }.validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let w = window(2, 40, |c, t| (t as f64 * 0.3 + c as f64).cos());
        let f = vec![extract(&w, &CFG).unwrap()];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_features(&p, &f).unwrap();
        assert_eq!(read_features(&p).unwrap(), f);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("subject,position,class,trial,window,ch1_f1,"));
    }

    proptest! {
        #[test]
        fn outputs_finite_and_fusion_bounded(x in proptest::collection::vec(-1e3f64..1e3, 3..64)) {
            let raw = channel_features(&x, &CFG).unwrap();
            prop_assert!(raw.iter().all(|v| v.is_finite()));
            let fused = channel_features(&x, &FeatureConfig { fusion: FusionMode::NonlinearFusion, ..CFG }).unwrap();
            prop_assert!(fused.iter().all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-6));
        }

        #[test]
        fn channel_permutation_permutes_blocks(seed in 0u64..1000) {
            let mut rng = crate::rng::stream(seed, &[]);
            let data: Vec<Vec<f64>> = (0..3).map(|_| (0..30).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let a = extract(&window(3, 30, |c, t| data[c][t]), &CFG).unwrap();
            let perm = [2usize, 0, 1];
            let b = extract(&window(3, 30, |c, t| data[perm[c]][t]), &CFG).unwrap();
            for (c, &p) in perm.iter().enumerate() {
                prop_assert_eq!(&b.values[c * 6..c * 6 + 6], &a.values[p * 6..p * 6 + 6]);
            }
        }
    }
}
