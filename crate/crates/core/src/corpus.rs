//! The bundled problem corpus: `problems/*.search` plus `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{parse_spec, LangError, SearchSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("corpus entry `{name}`: {source}")]
    Spec { name: String, source: LangError },
    #[error("no corpus entry matches `{0}`")]
    UnknownEntry(String),
}

/// |T|, |Q| and |Φ| as enumerated from our encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub targets: u64,
    pub queries: u64,
    pub outcomes: usize,
}

/// Published reference figures for this problem, where they exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub table: String,
    pub targets: Option<u64>,
    pub queries: Option<u64>,
    pub outcomes: Option<usize>,
    pub paths: Option<u64>,
    pub rounds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub file: String,
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, i64>,
    /// Too expensive for routine test runs.
    #[serde(default)]
    pub slow: bool,
    /// Every pair of distinct targets is separated by some query.
    #[serde(default = "yes")]
    pub identifiable: bool,
    pub expected: Expected,
    pub published: Option<PublishedRow>,
    #[serde(default)]
    pub note: Option<String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    entries: Vec<CorpusEntry>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    dir: PathBuf,
    entries: Vec<CorpusEntry>,
}

/// The `problems/` directory of the source tree.
pub fn default_problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

impl Corpus {
    /// Reads `manifest.json` from `dir`.
    pub fn load(dir: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
        let dir = dir.as_ref().to_path_buf();
        let text = read(&dir.join("manifest.json"))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| CorpusError::Manifest(e.to_string()))?;
        Ok(Corpus {
            dir,
            entries: manifest.entries,
        })
    }

    pub fn load_default() -> Result<Corpus, CorpusError> {
        Corpus::load(default_problems_dir())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[CorpusEntry] {
        &self.entries
    }

    pub fn entry(&self, name: &str) -> Result<&CorpusEntry, CorpusError> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| CorpusError::UnknownEntry(name.to_string()))
    }

    pub fn source(&self, entry: &CorpusEntry) -> Result<String, CorpusError> {
        read(&self.dir.join(&entry.file))
    }

    pub fn spec(&self, entry: &CorpusEntry) -> Result<SearchSpec, CorpusError> {
        parse_spec(&entry.name, &self.source(entry)?).map_err(|source| CorpusError::Spec {
            name: entry.name.clone(),
            source,
        })
    }

    pub fn spec_by_name(&self, name: &str) -> Result<SearchSpec, CorpusError> {
        self.spec(self.entry(name)?)
    }

    /// Entries matching a comma-separated selector. Each item is an entry
    /// name, a family name, `ci` (every entry not marked slow) or `all`.
    pub fn select(&self, selector: &str) -> Result<Vec<&CorpusEntry>, CorpusError> {
        let mut out: Vec<&CorpusEntry> = Vec::new();
        for item in selector.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let matched: Vec<&CorpusEntry> = self
                .entries
                .iter()
                .filter(|e| match item {
                    "all" => true,
                    "ci" => !e.slow,
                    _ => e.name == item || e.family == item,
                })
                .collect();
            if matched.is_empty() {
                return Err(CorpusError::UnknownEntry(item.to_string()));
            }
            for e in matched {
                if !out.iter().any(|o| o.name == e.name) {
                    out.push(e);
                }
            }
        }
        Ok(out)
    }
}

/// Loads the bundled corpus and parses every entry.
pub fn load_corpus() -> Result<Vec<(CorpusEntry, SearchSpec)>, CorpusError> {
    let corpus = Corpus::load_default()?;
    corpus
        .entries()
        .iter()
        .map(|e| Ok((e.clone(), corpus.spec(e)?)))
        .collect()
}
