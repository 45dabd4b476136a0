//! Model library directory layout:
//!
//! ```text
//! <dir>/manifest.json       {"format": "ICLAP-ML-1", "codebook": "codebook.txt", "models": [...]}
//! <dir>/codebook.txt        codebook in its ICLAP-CB-1 text form
//! <dir>/model_<id:03>.csv   "# ICLAP-ML-1 object_id=<id>", header "record,a,b,c,d",
//!                           then "point,x,y,z,mu" rows and "count,<word>,<occurrences>" rows
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ModelLibrary, ObjectModel};
use crate::codebook::{Codebook, WordHistogram};
use crate::dataset::ObjectId;
use crate::error::{Error, Result};
use crate::geometry::Point4;
use crate::registration::LabeledCloud;
use crate::util::{atomic_create_dir, parse_field};

pub const LIBRARY_MAGIC: &str = "ICLAP-ML-1";
const MANIFEST: &str = "manifest.json";
const CODEBOOK_FILE: &str = "codebook.txt";
const HEADER: &str = "record,a,b,c,d";

#[derive(Debug, Serialize, Deserialize)]
struct ModelEntry {
    object_id: ObjectId,
    file: String,
    points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format: String,
    codebook: String,
    extractor: String,
    k: usize,
    models: Vec<ModelEntry>,
}

fn encode_model(m: &ObjectModel) -> String {
    let mut out = format!("# {LIBRARY_MAGIC} object_id={}\n{HEADER}\n", m.object_id);
    for p in &m.labeled_cloud.points {
        let [x, y, z, mu] = p.coords();
        let _ = writeln!(out, "point,{x},{y},{z},{mu}");
    }
    for (i, c) in m.histogram.raw_counts().iter().enumerate() {
        let _ = writeln!(out, "count,{},{c}", i + 1);
    }
    out
}

pub fn save_library(library: &ModelLibrary, path: &Path) -> Result<()> {
    let mut files = vec![(CODEBOOK_FILE.to_string(), library.codebook().to_text())];
    let mut entries = Vec::new();
    for m in library.models() {
        let file = format!("model_{:03}.csv", m.object_id.0);
        files.push((file.clone(), encode_model(m)));
        entries.push(ModelEntry {
            object_id: m.object_id,
            file,
            points: m.labeled_cloud.len(),
        });
    }
    let manifest = Manifest {
        format: LIBRARY_MAGIC.into(),
        codebook: CODEBOOK_FILE.into(),
        extractor: library.codebook().extractor().to_string(),
        k: library.codebook().k(),
        models: entries,
    };
    files.push((
        MANIFEST.into(),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    ));
    atomic_create_dir(path, &files)
}

fn decode_model(path: &Path, text: &str, entry: &ModelEntry, k: usize) -> Result<ObjectModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let expected = format!("# {LIBRARY_MAGIC} object_id={}", entry.object_id);
    if lines.next().map(|(_, l)| l.trim()) != Some(expected.as_str()) {
        return Err(Error::format(path, Some(1), format!("expected {expected:?}")));
    }
    if lines.next().map(|(_, l)| l.trim()) != Some(HEADER) {
        return Err(Error::format(path, Some(2), format!("expected header {HEADER:?}")));
    }
    let mut points = Vec::new();
    let mut counts = vec![0u64; k];
    for (n, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        let err = |m: String| Error::format(path, Some(n), m);
        match fields.as_slice() {
            ["point", rest @ ..] if rest.len() == 4 => {
                let mut c = [0.0; 4];
                for (slot, raw) in c.iter_mut().zip(rest) {
                    *slot = parse_field(raw).map_err(err)?;
                }
                points.push(Point4::new(c).map_err(|e| err(e.to_string()))?);
            }
            ["count", word, count] => {
                let word: usize = parse_field(word).map_err(err)?;
                if word == 0 || word > k {
                    return Err(err(format!("word {word} outside 1..={k}")));
                }
                counts[word - 1] = parse_field(count).map_err(err)?;
            }
            _ => return Err(err(format!("unrecognized record {line:?}"))),
        }
    }
    if points.len() != entry.points || points.is_empty() {
        return Err(Error::format(
            path,
            None,
            format!("manifest lists {} points, file has {}", entry.points, points.len()),
        ));
    }
    let labeled = LabeledCloud::new(points, Some(entry.object_id)).map_err(|e| Error::format(path, None, e.to_string()))?;
    Ok(ObjectModel {
        object_id: entry.object_id,
        spatial_cloud: labeled.spatial(),
        labeled_cloud: labeled,
        histogram: WordHistogram::from_counts(counts),
    })
}

pub fn load_library(path: &Path) -> Result<ModelLibrary> {
    let manifest_path = path.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::format(&manifest_path, None, "no library manifest found"),
        _ => Error::io(&manifest_path, e),
    })?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::format(&manifest_path, Some(e.line()), e.to_string()))?;
    if manifest.format != LIBRARY_MAGIC {
        return Err(Error::format(&manifest_path, None, format!("unsupported format {:?}", manifest.format)));
    }
    let codebook = Codebook::load(&path.join(&manifest.codebook))?;
    if codebook.k() != manifest.k || codebook.extractor().to_string() != manifest.extractor {
        return Err(Error::format(&manifest_path, None, "codebook disagrees with manifest"));
    }
    let models = manifest
        .models
        .iter()
        .map(|entry| {
            let file = path.join(&entry.file);
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            decode_model(&file, &text, entry, codebook.k())
        })
        .collect::<Result<Vec<_>>>()?;
    ModelLibrary::new(codebook, models)
}
