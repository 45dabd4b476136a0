//! Dataset directory layout:
//!
//! ```text
//! <dir>/manifest.json                      format tag, sensor geometry, one entry per trace
//! <dir>/object_<id:03>_trial_<t:02>.csv    "# ICLAP-DS-1", a header row, one row per frame
//! ```
//!
//! Frame rows are `object_id,trial,frame_index,x,y,z,p000,...,p135` with pressures in
//! row-major order over the 14×6 grid. Floats are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    Dataset, ExplorationTrace, ObjectId, TactileFrame, CELL_PITCH_MM, SENSOR_CELLS, SENSOR_COLS,
    SENSOR_ROWS,
};
use crate::error::{Error, Result};
use crate::util::{atomic_create_dir, parse_field};

pub const DATASET_MAGIC: &str = "ICLAP-DS-1";
pub const MANIFEST_FILE: &str = "manifest.json";
const FIXED_COLUMNS: usize = 6;

#[derive(Debug, Serialize, Deserialize)]
struct SensorInfo {
    rows: usize,
    cols: usize,
    pitch_mm: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceEntry {
    object_id: ObjectId,
    trial: usize,
    frames: usize,
    file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    sensor: SensorInfo,
    traces: Vec<TraceEntry>,
}

fn trace_file_name(object: ObjectId, trial: usize) -> String {
    format!("object_{:03}_trial_{:02}.csv", object.0, trial)
}

fn header_row() -> String {
    let mut h = String::from("object_id,trial,frame_index,x,y,z");
    for r in 0..SENSOR_ROWS {
        for c in 0..SENSOR_COLS {
            let _ = write!(h, ",p{r:02}{c}");
        }
    }
    h
}

fn encode_trace(trace: &ExplorationTrace) -> String {
    let mut out = format!("# {DATASET_MAGIC}\n{}\n", header_row());
    for f in &trace.frames {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            trace.object_id, trace.trial_index, f.timestamp_index, f.position[0], f.position[1], f.position[2]
        );
        for p in f.flat_pressures() {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    out
}

/// Writes `traces` into a new directory at `path`. Refuses to touch an existing path.
pub fn save_dataset(traces: &[ExplorationTrace], path: &Path) -> Result<()> {
    let mut entries = Vec::with_capacity(traces.len());
    let mut files = Vec::with_capacity(traces.len() + 1);
    for t in traces {
        let name = trace_file_name(t.object_id, t.trial_index);
        if entries.iter().any(|e: &TraceEntry| e.file == name) {
            return Err(Error::Config(format!(
                "duplicate trace for object {} trial {}",
                t.object_id, t.trial_index
            )));
        }
        files.push((name.clone(), encode_trace(t)));
        entries.push(TraceEntry {
            object_id: t.object_id,
            trial: t.trial_index,
            frames: t.frames.len(),
            file: name,
        });
    }
    let manifest = Manifest {
        format: DATASET_MAGIC.into(),
        sensor: SensorInfo {
            rows: SENSOR_ROWS,
            cols: SENSOR_COLS,
            pitch_mm: CELL_PITCH_MM,
        },
        traces: entries,
    };
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    files.push((MANIFEST_FILE.to_string(), manifest_json));
    atomic_create_dir(path, &files)
}

fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::format(&path, None, "no dataset manifest found"),
        _ => Error::io(&path, e),
    })?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&path, Some(e.line()), e.to_string()))?;
    if manifest.format != DATASET_MAGIC {
        return Err(Error::format(
            &path,
            None,
            format!("unsupported format tag {:?}", manifest.format),
        ));
    }
    if manifest.sensor.rows != SENSOR_ROWS || manifest.sensor.cols != SENSOR_COLS {
        return Err(Error::format(
            &path,
            None,
            format!(
                "sensor grid {}×{} is not {SENSOR_ROWS}×{SENSOR_COLS}",
                manifest.sensor.rows, manifest.sensor.cols
            ),
        ));
    }
    Ok(manifest)
}

fn decode_trace(path: &Path, text: &str, entry: &TraceEntry) -> Result<ExplorationTrace> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == format!("# {DATASET_MAGIC}") => {}
        _ => return Err(Error::format(path, Some(1), format!("missing '# {DATASET_MAGIC}' header"))),
    }
    match lines.next() {
        Some((_, l)) if l.trim() == header_row() => {}
        _ => return Err(Error::format(path, Some(2), "missing or malformed column header")),
    }
    let mut frames = Vec::with_capacity(entry.frames);
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FIXED_COLUMNS + SENSOR_CELLS {
            return Err(Error::format(
                path,
                Some(line_no),
                format!(
                    "expected {} columns, found {}",
                    FIXED_COLUMNS + SENSOR_CELLS,
                    fields.len()
                ),
            ));
        }
        let at = |what: &str, msg: String| Error::format(path, Some(line_no), format!("{what}: {msg}"));
        let object: u32 = parse_field(fields[0]).map_err(|m| at("object_id", m))?;
        let trial: usize = parse_field(fields[1]).map_err(|m| at("trial", m))?;
        let index: u64 = parse_field(fields[2]).map_err(|m| at("frame_index", m))?;
        if ObjectId(object) != entry.object_id || trial != entry.trial {
            return Err(at("record", "object/trial disagree with manifest".into()));
        }
        if index != frames.len() as u64 {
            return Err(at("frame_index", format!("expected {}, found {index}", frames.len())));
        }
        let mut position = [0.0; 3];
        for (k, p) in position.iter_mut().enumerate() {
            *p = parse_field::<f64>(fields[3 + k]).map_err(|m| at("position", m))?;
        }
        let mut pressures = [[0.0; SENSOR_COLS]; SENSOR_ROWS];
        for (k, raw) in fields[FIXED_COLUMNS..].iter().enumerate() {
            let v: f64 = parse_field(raw).map_err(|m| at("pressure", m))?;
            pressures[k / SENSOR_COLS][k % SENSOR_COLS] = v;
        }
        let frame = TactileFrame {
            pressures,
            position,
            timestamp_index: index,
        };
        if !frame.is_valid() {
            return Err(at("frame", "negative or non-finite values".into()));
        }
        frames.push(frame);
    }
    if frames.len() != entry.frames {
        return Err(Error::format(
            path,
            None,
            format!("manifest lists {} frames, file has {}", entry.frames, frames.len()),
        ));
    }
    if frames.is_empty() {
        return Err(Error::format(path, None, "trace has no frames"));
    }
    Ok(ExplorationTrace {
        object_id: entry.object_id,
        trial_index: entry.trial,
        frames,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let manifest = read_manifest(path)?;
    let traces = manifest
        .traces
        .iter()
        .map(|entry| {
            let file = path.join(&entry.file);
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            decode_trace(&file, &text, entry)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(traces))
}

/// SHA-256 over the manifest and every trace file, in manifest order.
pub fn dataset_checksum(path: &Path) -> Result<String> {
    let manifest = read_manifest(path)?;
    let mut files: Vec<PathBuf> = vec![path.join(MANIFEST_FILE)];
    files.extend(manifest.traces.iter().map(|e| path.join(&e.file)));
    let mut hasher = Sha256::new();
    for f in files {
        let bytes = fs::read(&f).map_err(|e| Error::io(&f, e))?;
        hasher.update(&bytes);
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}
