use std::sync::Arc;

use super::{DataError, RawRecording, Tagged, WindowTag};

/// Window geometry in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WindowParams {
    pub window_ms: f64,
    pub stride_ms: f64,
}

impl Default for WindowParams {
    /// 100 ms windows every 25 ms: 197 windows per 5 s trial.
    fn default() -> Self {
        Self { window_ms: 100.0, stride_ms: 25.0 }
    }
}

/// A view of `length_samples` consecutive samples of a recording.
#[derive(Debug, Clone)]
pub struct Window {
    recording: Arc<RawRecording>,
    pub index: usize,
    pub start_sample: usize,
    pub length_samples: usize,
}

impl Window {
    pub fn recording(&self) -> &RawRecording {
        &self.recording
    }

    pub fn channels(&self) -> usize {
        self.recording.channels()
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.recording.channel(c)[self.start_sample..self.start_sample + self.length_samples]
    }
}

impl Tagged for Window {
    fn tag(&self) -> WindowTag {
        let id = self.recording.id;
        WindowTag {
            subject: id.subject,
            position: id.position,
            class: id.class,
            trial: id.trial,
            index: self.index as u32,
        }
    }
}

fn ms_to_samples(ms: f64, rate_hz: f64) -> usize {
    (ms * rate_hz / 1000.0).round() as usize
}

/// Number of windows of `window` samples at `stride` that fit in `total`.
pub fn window_count(total: usize, window: usize, stride: usize) -> usize {
    if window > total || stride == 0 {
        0
    } else {
        (total - window) / stride + 1
    }
}

/// Cuts `rec` into overlapping windows in temporal order.
///
/// Millisecond lengths are rounded to whole samples at the recording's rate.
pub fn segment_windows(rec: &Arc<RawRecording>, params: WindowParams) -> Result<Vec<Window>, DataError> {
    if !(params.window_ms > 0.0 && params.stride_ms > 0.0) {
        return Err(DataError::InvalidWindow(format!(
            "window {} ms and stride {} ms must be positive",
            params.window_ms, params.stride_ms
        )));
    }
    let window = ms_to_samples(params.window_ms, rec.sample_rate_hz);
    let stride = ms_to_samples(params.stride_ms, rec.sample_rate_hz);
    if window < 2 {
        return Err(DataError::InvalidWindow(format!("window of {window} samples, need at least 2")));
    }
    if stride < 1 {
        return Err(DataError::InvalidWindow("stride rounds to zero samples".into()));
    }
    if window > rec.len() {
        return Err(DataError::WindowTooLong { window_samples: window, recording_samples: rec.len() });
    }
    Ok((0..window_count(rec.len(), window, stride))
        .map(|i| Window {
            recording: Arc::clone(rec),
            index: i,
            start_sample: i * stride,
            length_samples: window,
        })
        .collect())
}
