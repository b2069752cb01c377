//! Recordings, windows and the train/TS1/TS2 protocol.

mod io;
mod split;
mod synth;
mod window;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load_recordings, write_recordings, MANIFEST_FILE};
pub use split::{make_splits, DatasetSplit, SplitConfig, TEST_POSITIONS, TRAIN_POSITIONS};
pub use synth::{synth_generate, SynthConfig};
pub use window::{segment_windows, window_count, Window, WindowParams};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Manifest { path: String, line: u64, message: String },
    #[error("{path}:{line}: row has {found} columns, expected {expected}")]
    Ragged { path: String, line: usize, expected: usize, found: usize },
    #[error("{path}:{line}: column {column} is not a number: `{value}`")]
    NonNumeric { path: String, line: usize, column: usize, value: String },
    #[error("{path}: {found} channels, but earlier recordings have {expected}")]
    ChannelMismatch { path: String, expected: usize, found: usize },
    #[error("{path}: signal file has no samples")]
    Empty { path: String },
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("invalid synth config: {0}")]
    InvalidSynthConfig(String),
    #[error("window of {window_samples} samples does not fit a recording of {recording_samples} samples")]
    WindowTooLong { window_samples: usize, recording_samples: usize },
    #[error("invalid window parameters: {0}")]
    InvalidWindow(String),
    #[error("no windows for class {class} at position {position}")]
    MissingGroup { class: Movement, position: Position },
    #[error("{set}: need {needed} windows of class {class} at position {position}, only {available} available")]
    InsufficientWindows {
        set: &'static str,
        class: Movement,
        position: Position,
        needed: usize,
        available: usize,
    },
    #[error("{set} is not class-balanced: {counts:?}")]
    Unbalanced { set: &'static str, counts: Vec<usize> },
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident, $prefix:literal, [$($variant:ident),+]) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = Self::ALL.len();

            /// Zero-based index.
            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(i: usize) -> Option<Self> {
                Self::ALL.get(i).copied()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $prefix, self.index() + 1)
            }
        }

        impl FromStr for $name {
            type Err = String;

            /// Accepts `P3`/`p3`/`3` style labels.
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let t = s.trim();
                let digits = t
                    .strip_prefix($prefix)
                    .or_else(|| t.strip_prefix(&$prefix.to_ascii_lowercase()))
                    .unwrap_or(t);
                digits
                    .parse::<usize>()
                    .ok()
                    .and_then(|n| n.checked_sub(1))
                    .and_then(Self::from_index)
                    .ok_or_else(|| format!("unknown {} label `{}`", stringify!($name).to_lowercase(), s))
            }
        }
    };
}

label_enum!(
    /// Limb position during recording.
    Position, "P", [P1, P2, P3, P4, P5]
);

label_enum!(
    /// The eight movement classes. `C8` is rest; the others are wrist
    /// flexion, extension, pronation, supination, power grip, pinch grip and
    /// open hand, in that order.
    Movement, "C", [C1, C2, C3, C4, C5, C6, C7, C8]
);

impl Movement {
    pub const REST: Movement = Movement::C8;
}

/// Identity of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordingId {
    pub subject: u32,
    pub position: Position,
    pub class: Movement,
    pub trial: u32,
}

/// Identity of one window: its trial plus the window's ordinal in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WindowTag {
    pub subject: u32,
    pub position: Position,
    pub class: Movement,
    pub trial: u32,
    pub index: u32,
}

impl WindowTag {
    pub fn recording(&self) -> RecordingId {
        RecordingId {
            subject: self.subject,
            position: self.position,
            class: self.class,
            trial: self.trial,
        }
    }
}

/// Anything that carries a window identity (windows, feature vectors).
pub trait Tagged {
    fn tag(&self) -> WindowTag;
}

/// One trial of multichannel samples, stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    pub id: RecordingId,
    pub sample_rate_hz: f64,
    samples: Vec<Vec<f64>>,
}

impl RawRecording {
    pub fn new(id: RecordingId, sample_rate_hz: f64, samples: Vec<Vec<f64>>) -> Result<Self, DataError> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(DataError::InvalidRecording(format!("sample rate {sample_rate_hz} must be positive")));
        }
        if id.trial < 1 {
            return Err(DataError::InvalidRecording("trial numbers start at 1".into()));
        }
        let Some(first) = samples.first() else {
            return Err(DataError::InvalidRecording("at least one channel required".into()));
        };
        let len = first.len();
        if samples.iter().any(|c| c.len() != len) {
            return Err(DataError::InvalidRecording("channels have unequal lengths".into()));
        }
        Ok(Self { id, sample_rate_hz, samples })
    }

    pub fn channels(&self) -> usize {
        self.samples.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.samples[c]
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for p in Position::ALL {
            assert_eq!(p.to_string().parse::<Position>().unwrap(), *p);
        }
        assert_eq!("c8".parse::<Movement>().unwrap(), Movement::REST);
        assert_eq!("3".parse::<Movement>().unwrap(), Movement::C3);
        assert!("C9".parse::<Movement>().is_err());
        assert!("P0".parse::<Position>().is_err());
        assert_eq!(Movement::COUNT, 8);
    }

    #[test]
    fn recording_invariants() {
        let id = RecordingId { subject: 1, position: Position::P1, class: Movement::C1, trial: 1 };
        assert!(RawRecording::new(id, 1000.0, vec![vec![0.0; 3], vec![0.0; 2]]).is_err());
        assert!(RawRecording::new(id, 0.0, vec![vec![0.0; 3]]).is_err());
        assert!(RawRecording::new(id, 1000.0, vec![]).is_err());
        let r = RawRecording::new(id, 4000.0, vec![vec![0.0; 20000]; 7]).unwrap();
        assert_eq!(r.channels(), 7);
        assert_eq!(r.duration_s(), 5.0);
    }
}
