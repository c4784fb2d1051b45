//! Stratified corpora: every (analogy group, transformation group) pair,
//! written as manifests plus an index.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::generator::{generate, GenerateError, GeneratorSpec};
use super::glyphs::GlyphSet;
use super::manifest::{load_manifest, save_manifest, write_atomic, ManifestError};
use super::Problem;
use crate::analogies::AnalogyGroup;
use crate::bitmap::encode_pgm;
use crate::transforms::{TransformGroup, TransformId};

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("item {id}: {source}")]
    Generate {
        id: String,
        #[source]
        source: GenerateError,
    },
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error("index {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("index {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub id: String,
    pub manifest: String,
    /// A: 2x2 items; B: 3x3 S items; C, D, E: 3x3 H, V and R items.
    pub set: String,
    pub dim: usize,
    pub seed: u64,
    pub transform: TransformId,
    pub transform_group: TransformGroup,
    pub analogy_group: AnalogyGroup,
    pub answer: usize,
    pub repetition_option: Option<usize>,
    pub o_trap: bool,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusIndex {
    pub seed: u64,
    /// SHA-256 over every item's images and answer.
    pub hash: String,
    pub items: Vec<IndexEntry>,
}

pub fn set_label(dim: usize, group: AnalogyGroup) -> &'static str {
    match (dim, group) {
        (2, _) => "A",
        (_, AnalogyGroup::S) => "B",
        (_, AnalogyGroup::H) => "C",
        (_, AnalogyGroup::V) => "D",
        (_, AnalogyGroup::R) => "E",
    }
}

fn candidates(group: TransformGroup, dim: usize) -> Vec<TransformId> {
    use TransformId::*;
    match group {
        TransformGroup::Affine => vec![Rot90, Rot180, Rot270, MirrorH, MirrorV, MirrorDiag, MirrorAntidiag, ScaleDoubleArea],
        TransformGroup::Diff if dim == 2 => vec![AddDiff, SubDiff],
        TransformGroup::Diff => vec![AddDiff, SubDiff, PreservingSubDiff],
        TransformGroup::Match => vec![Duplicate, Rearrange],
        TransformGroup::Set => vec![Unite, Intersect, InverseUnite, Xor, ShadowMaskUnite],
    }
}

/// Item `i` covers group pair `i mod 16`; unary S items alternate between
/// 2x2 and 3x3 across rounds.
pub fn plan_corpus(n: usize, seed: u64, glyphs: &GlyphSet) -> Vec<(String, GeneratorSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<(AnalogyGroup, TransformGroup)> = AnalogyGroup::ALL
        .iter()
        .flat_map(|&g| TransformGroup::ALL.iter().map(move |&t| (g, t)))
        .collect();
    (0..n)
        .map(|i| {
            let (group, tg) = cells[i % cells.len()];
            let round = i / cells.len();
            let dim = if group == AnalogyGroup::S && tg != TransformGroup::Set && round.is_multiple_of(2) { 2 } else { 3 };
            let transform = *candidates(tg, dim).choose(&mut rng).expect("candidates");
            let spec = GeneratorSpec {
                seed: rng.random(),
                dim,
                transform,
                analogy_group: group,
                distractors: GeneratorSpec::standard_distractors(dim),
                glyphs: glyphs.clone(),
            };
            (format!("item{i:03}"), spec)
        })
        .collect()
}

/// Generates the planned items in parallel; the result is independent of
/// the thread count.
pub fn generate_corpus(n: usize, seed: u64, glyphs: &GlyphSet) -> Result<Vec<(IndexEntry, Problem)>, CorpusError> {
    plan_corpus(n, seed, glyphs)
        .into_par_iter()
        .map(|(id, spec)| {
            let g = generate(&id, &spec).map_err(|source| CorpusError::Generate { id: id.clone(), source })?;
            let entry = IndexEntry {
                manifest: format!("{id}.json"),
                set: set_label(spec.dim, spec.analogy_group).to_string(),
                dim: spec.dim,
                seed: spec.seed,
                transform: spec.transform,
                transform_group: spec.transform.group(),
                analogy_group: spec.analogy_group,
                answer: g.problem.answer.expect("generated items carry answers"),
                repetition_option: g.meta.repetition_option,
                o_trap: g.meta.o_trap,
                attempts: g.meta.attempts,
                id,
            };
            Ok((entry, g.problem))
        })
        .collect()
}

pub fn corpus_hash(problems: &[Problem]) -> String {
    let mut h = Sha256::new();
    for p in problems {
        h.update(p.id.as_bytes());
        for img in p.cells().iter().chain(&p.options) {
            h.update(encode_pgm(img));
        }
        h.update(format!("{:?}", p.answer).as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Generates `n` items into `dir` and writes the index last.
pub fn corpus_build(n: usize, seed: u64, glyphs: &GlyphSet, dir: &Path) -> Result<CorpusIndex, CorpusError> {
    let items = generate_corpus(n, seed, glyphs)?;
    for (_, p) in &items {
        save_manifest(p, dir)?;
    }
    let problems: Vec<Problem> = items.iter().map(|(_, p)| p.clone()).collect();
    let index = CorpusIndex {
        seed,
        hash: corpus_hash(&problems),
        items: items.into_iter().map(|(e, _)| e).collect(),
    };
    let path = dir.join(INDEX_FILE);
    let json = serde_json::to_string_pretty(&index).expect("index serializes");
    write_atomic(&path, json.as_bytes()).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(index)
}

pub fn load_index(dir: &Path) -> Result<CorpusIndex, CorpusError> {
    let path: PathBuf = dir.join(INDEX_FILE);
    let name = path.display().to_string();
    let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io { path: name.clone(), source })?;
    serde_json::from_str(&text).map_err(|source| CorpusError::Json { path: name, source })
}

pub fn load_corpus(dir: &Path) -> Result<(CorpusIndex, Vec<Problem>), CorpusError> {
    let index = load_index(dir)?;
    let problems = index
        .items
        .iter()
        .map(|e| load_manifest(&dir.join(&e.manifest)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((index, problems))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn sixteen_items_cover_every_cell() {
        let plan = plan_corpus(16, 1, &GlyphSet::default());
        let cells: BTreeSet<_> = plan.iter().map(|(_, s)| (s.analogy_group, s.transform.group())).collect();
        assert_eq!(cells.len(), 16);
        for (_, s) in &plan {
            assert!(s.check().is_ok(), "{s:?}");
        }
    }

    #[test]
    fn plan_is_seeded() {
        let g = GlyphSet::default();
        assert_eq!(plan_corpus(40, 9, &g), plan_corpus(40, 9, &g));
        assert_ne!(plan_corpus(40, 9, &g), plan_corpus(40, 10, &g));
    }
}
