//! JSON manifests: one problem per file, images stored next to it.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Problem, ProblemError};
use crate::bitmap::{encode_pgm, load_binary, RasterError};

pub const DEFAULT_THRESHOLD: u8 = 128;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    MissingFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest {path}: {source}")]
    MalformedJson {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: dim {dim} needs {expected} cells, found {got}")]
    CellCountMismatch {
        path: String,
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path}: threshold {value} is outside 0..=255")]
    ThresholdOutOfRange { path: String, value: i64 },
    #[error(transparent)]
    Image(#[from] RasterError),
    #[error("{path}: {source}")]
    Invalid {
        path: String,
        #[source]
        source: ProblemError,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ManifestError {
    /// Stable identifier for each failure kind.
    pub fn code(&self) -> &'static str {
        match self {
            ManifestError::MissingFile { .. } => "missing_file",
            ManifestError::MalformedJson { .. } => "malformed_json",
            ManifestError::CellCountMismatch { .. } => "cell_count_mismatch",
            ManifestError::ThresholdOutOfRange { .. } => "threshold_out_of_range",
            ManifestError::Image(_) => "image",
            ManifestError::Invalid { .. } => "invalid_problem",
            ManifestError::Write { .. } => "write",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub id: String,
    pub dim: usize,
    #[serde(default = "default_threshold")]
    pub threshold: i64,
    pub cells: Vec<String>,
    pub options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<usize>,
}

fn default_threshold() -> i64 {
    DEFAULT_THRESHOLD as i64
}

pub fn load_manifest(path: &Path) -> Result<Problem, ManifestError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::MissingFile {
        path: name.clone(),
        source,
    })?;
    let m: Manifest = serde_json::from_str(&text).map_err(|source| ManifestError::MalformedJson {
        path: name.clone(),
        source,
    })?;
    if !(0..=255).contains(&m.threshold) {
        return Err(ManifestError::ThresholdOutOfRange {
            path: name,
            value: m.threshold,
        });
    }
    let expected = (m.dim * m.dim).saturating_sub(1);
    if (m.dim == 2 || m.dim == 3) && m.cells.len() != expected {
        return Err(ManifestError::CellCountMismatch {
            path: name,
            dim: m.dim,
            expected,
            got: m.cells.len(),
        });
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let threshold = m.threshold as u8;
    let load = |rel: &String| load_binary(&base.join(rel), threshold);
    let cells = m.cells.iter().map(load).collect::<Result<Vec<_>, _>>()?;
    let options = m.options.iter().map(load).collect::<Result<Vec<_>, _>>()?;
    Problem::new(m.id, m.dim, cells, options, m.answer).map_err(|source| ManifestError::Invalid { path: name, source })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{file_name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Saves the problem's images as PGM plus `<id>.json` in `dir`; returns the
/// manifest path.
pub fn save_manifest(problem: &Problem, dir: &Path) -> Result<PathBuf, ManifestError> {
    let write = |path: &Path, bytes: &[u8]| {
        write_atomic(path, bytes).map_err(|source| ManifestError::Write {
            path: path.display().to_string(),
            source,
        })
    };
    fs::create_dir_all(dir).map_err(|source| ManifestError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    let mut cells = Vec::new();
    for (i, img) in problem.cells().iter().enumerate() {
        let name = format!("{}_cell{}.pgm", problem.id, i);
        write(&dir.join(&name), &encode_pgm(img))?;
        cells.push(name);
    }
    let mut options = Vec::new();
    for (i, img) in problem.options.iter().enumerate() {
        let name = format!("{}_opt{}.pgm", problem.id, i);
        write(&dir.join(&name), &encode_pgm(img))?;
        options.push(name);
    }
    let manifest = Manifest {
        id: problem.id.clone(),
        dim: problem.dim,
        threshold: DEFAULT_THRESHOLD as i64,
        cells,
        options,
        answer: problem.answer,
    };
    let path = dir.join(format!("{}.json", problem.id));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&path, json.as_bytes())?;
    Ok(path)
}
