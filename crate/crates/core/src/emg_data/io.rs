//! CSV layout: a manifest `subject,position,class,trial,path[,sample_rate_hz]`
//! plus one headerless signal file per trial, one row per sample and one
//! column per channel. Relative paths resolve against the manifest's folder.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{DataError, Movement, Position, RawRecording, RecordingId};

pub const MANIFEST_FILE: &str = "manifest.csv";

struct ManifestRow {
    id: RecordingId,
    path: PathBuf,
    rate: f64,
}

fn manifest_error(path: &Path, line: u64, message: impl Into<String>) -> DataError {
    DataError::Manifest { path: path.display().to_string(), line, message: message.into() }
}

fn read_manifest(manifest: &Path, default_rate_hz: f64) -> Result<Vec<ManifestRow>, DataError> {
    let text = fs::read_to_string(manifest)
        .map_err(|source| DataError::Io { path: manifest.display().to_string(), source })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| manifest_error(manifest, 1, e.to_string()))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let required = ["subject", "position", "class", "trial", "path"];
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(required) {
        *slot = column(name).ok_or_else(|| manifest_error(manifest, 1, format!("missing column `{name}`")))?;
    }
    let rate_col = column("sample_rate_hz");

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            manifest_error(manifest, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let subject = field(idx[0])
            .parse::<u32>()
            .map_err(|e| manifest_error(manifest, line, format!("subject: {e}")))?;
        let position = field(idx[1]).parse::<Position>().map_err(|e| manifest_error(manifest, line, e))?;
        let class = field(idx[2]).parse::<Movement>().map_err(|e| manifest_error(manifest, line, e))?;
        let trial = field(idx[3])
            .parse::<u32>()
            .map_err(|e| manifest_error(manifest, line, format!("trial: {e}")))?;
        let rate = match rate_col {
            Some(c) => field(c)
                .parse::<f64>()
                .map_err(|e| manifest_error(manifest, line, format!("sample_rate_hz: {e}")))?,
            None => default_rate_hz,
        };
        rows.push(ManifestRow {
            id: RecordingId { subject, position, class, trial },
            path: base.join(field(idx[4])),
            rate,
        });
    }
    Ok(rows)
}

fn read_signal(path: &Path) -> Result<Vec<Vec<f64>>, DataError> {
    let shown = || path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io { path: shown(), source })?;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if channels.is_empty() {
            channels = vec![Vec::new(); cells.len()];
        } else if cells.len() != channels.len() {
            return Err(DataError::Ragged { path: shown(), line: i + 1, expected: channels.len(), found: cells.len() });
        }
        for (c, cell) in cells.iter().enumerate() {
            let v = cell.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                DataError::NonNumeric { path: shown(), line: i + 1, column: c + 1, value: cell.trim().to_string() }
            })?;
            channels[c].push(v);
        }
    }
    if channels.is_empty() {
        return Err(DataError::Empty { path: shown() });
    }
    Ok(channels)
}

/// Loads every recording listed in `manifest`, in manifest order.
///
/// `default_rate_hz` applies when the manifest has no `sample_rate_hz` column.
pub fn load_recordings(manifest: &Path, default_rate_hz: f64) -> Result<Vec<RawRecording>, DataError> {
    let rows = read_manifest(manifest, default_rate_hz)?;
    let recordings = rows
        .par_iter()
        .map(|row| {
            let samples = read_signal(&row.path)?;
            RawRecording::new(row.id, row.rate, samples)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(first) = recordings.first() {
        let expected = first.channels();
        for (row, rec) in rows.iter().zip(&recordings) {
            if rec.channels() != expected {
                return Err(DataError::ChannelMismatch {
                    path: row.path.display().to_string(),
                    expected,
                    found: rec.channels(),
                });
            }
        }
    }
    Ok(recordings)
}

/// File name used for a recording's signal CSV.
pub(crate) fn signal_file_name(id: &RecordingId) -> String {
    format!("s{:02}_{}_{}_t{}.csv", id.subject, id.position, id.class, id.trial)
}

/// Writes `recs` under `dir` as `signals/*.csv` plus [`MANIFEST_FILE`].
/// Returns the manifest path. Output bytes depend only on the recordings.
pub fn write_recordings(dir: &Path, recs: &[RawRecording]) -> Result<PathBuf, DataError> {
    let io_err = |p: &Path| {
        let path = p.display().to_string();
        move |source| DataError::Io { path, source }
    };
    let signals = dir.join("signals");
    fs::create_dir_all(&signals).map_err(io_err(&signals))?;
    recs.par_iter().try_for_each(|rec| {
        let mut out = String::with_capacity(rec.len() * rec.channels() * 12);
        for t in 0..rec.len() {
            for c in 0..rec.channels() {
                if c > 0 {
                    out.push(',');
                }
                write!(out, "{}", rec.channel(c)[t]).expect("string write");
            }
            out.push('\n');
        }
        let path = signals.join(signal_file_name(&rec.id));
        fs::write(&path, out).map_err(io_err(&path))
    })?;
    let mut manifest = String::from("subject,position,class,trial,path,sample_rate_hz\n");
    for rec in recs {
        let id = &rec.id;
        writeln!(
            manifest,
            "{},{},{},{},signals/{},{}",
            id.subject,
            id.position,
            id.class,
            id.trial,
            signal_file_name(id),
            rec.sample_rate_hz
        )
        .expect("string write");
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(io_err(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) {
        fs::write(dir.join(name), text).unwrap();
    }

    fn signal(rows: usize, cols: usize) -> String {
        let mut s = String::new();
        for r in 0..rows {
            let line: Vec<String> = (0..cols).map(|c| format!("{}", (r * cols + c) as f64 * 0.001)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    #[test]
    fn loads_shape_and_duration() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", &signal(20000, 7));
        write(dir.path(), "m.csv", "subject,position,class,trial,path\n3,P2,C8,1,a.csv\n");
        let recs = load_recordings(&dir.path().join("m.csv"), 4000.0).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].channels(), 7);
        assert_eq!(recs[0].duration_s(), 5.0);
        assert_eq!(recs[0].id.class, Movement::REST);
    }

    #[test]
    fn missing_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "m.csv", "subject,position,class,trial,path\n1,P1,C1,1,nope.csv\n");
        let err = load_recordings(&dir.path().join("m.csv"), 1000.0).unwrap_err();
        assert!(err.to_string().contains("nope.csv"), "{err}");
    }

    #[test]
    fn channel_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", &signal(10, 7));
        write(dir.path(), "b.csv", &signal(10, 6));
        write(dir.path(), "m.csv", "subject,position,class,trial,path\n1,P1,C1,1,a.csv\n1,P1,C1,2,b.csv\n");
        let err = load_recordings(&dir.path().join("m.csv"), 1000.0).unwrap_err();
        assert!(matches!(err, DataError::ChannelMismatch { expected: 7, found: 6, .. }), "{err}");
        assert!(err.to_string().contains("b.csv"));
    }

    #[test]
    fn ragged_and_non_numeric_report_line() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.csv", "1,2\n3,4\n5\n");
        write(dir.path(), "b.csv", "1,2\n3,x\n");
        write(dir.path(), "m1.csv", "subject,position,class,trial,path\n1,P1,C1,1,a.csv\n");
        write(dir.path(), "m2.csv", "subject,position,class,trial,path\n1,P1,C1,1,b.csv\n");
        let err = load_recordings(&dir.path().join("m1.csv"), 1000.0).unwrap_err();
        assert!(matches!(err, DataError::Ragged { line: 3, .. }), "{err}");
        let err = load_recordings(&dir.path().join("m2.csv"), 1000.0).unwrap_err();
        assert!(matches!(err, DataError::NonNumeric { line: 2, column: 2, .. }), "{err}");
    }

    #[test]
    fn bad_manifest_rows() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "m.csv", "subject,position,class,trial,path\n1,P9,C1,1,a.csv\n");
        let err = load_recordings(&dir.path().join("m.csv"), 1000.0).unwrap_err();
        assert!(matches!(err, DataError::Manifest { line: 2, .. }), "{err}");
        write(dir.path(), "m2.csv", "subject,class,trial,path\n");
        assert!(load_recordings(&dir.path().join("m2.csv"), 1000.0).is_err());
    }

    #[test]
    fn write_then_load_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let id = RecordingId { subject: 2, position: Position::P4, class: Movement::C3, trial: 5 };
        let rec = RawRecording::new(id, 1000.0, vec![vec![0.1, -2.5e-7, 3.0], vec![1.0 / 3.0, 0.0, -7.25]]).unwrap();
        let manifest = write_recordings(dir.path(), std::slice::from_ref(&rec)).unwrap();
        let back = load_recordings(&manifest, 1.0).unwrap();
        assert_eq!(back, vec![rec]);
    }
}
