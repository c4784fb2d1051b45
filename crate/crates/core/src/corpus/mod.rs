//! Problems, their on-disk manifests, and the synthetic corpus generator.

mod build;
mod generator;
mod glyphs;
mod manifest;
mod problem;

pub use build::{
    corpus_build, corpus_hash, generate_corpus, load_corpus, load_index, plan_corpus, set_label, CorpusError, CorpusIndex, IndexEntry,
    INDEX_FILE,
};
pub use generator::{generate, DistractorKind, GenerateError, Generated, GeneratorSpec, ItemMeta, CANVAS};
pub use glyphs::{draw, GlyphSet, Primitive};
pub use manifest::{load_manifest, save_manifest, write_atomic, Manifest, ManifestError, DEFAULT_THRESHOLD};
pub use problem::{Problem, ProblemError};
