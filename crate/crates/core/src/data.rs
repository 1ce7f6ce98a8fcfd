//! Knowledge-graph triple storage: vocabularies, splits, and the
//! filtered-setting candidate index.
//!
//! Triple files are UTF-8 TSV, one `head<TAB>relation<TAB>tail` per line,
//! LF line endings, no header. Entity and relation ids are assigned by first
//! appearance (train, then valid, then test) unless `entity2id.tsv` /
//! `relation2id.tsv` sidecars pin them.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected 3 tab-separated columns, found {found}")]
    Malformed {
        path: String,
        line: usize,
        found: usize,
    },
    #[error("{path}:{line}: unknown {kind} name {name:?}")]
    UnknownName {
        path: String,
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("{path}:{line}: duplicate triple within split")]
    DuplicateTriple { path: String, line: usize },
    #[error("{path}:{line}: {msg}")]
    BadSidecar {
        path: String,
        line: usize,
        msg: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// An integer-coded `(head, relation, tail)` fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: usize,
    pub rel: usize,
    pub tail: usize,
}

/// Whether a load may introduce new names or must resolve against known ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabMode {
    Build,
    Reuse,
}

/// Entity and relation name tables with dense ids.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
    entity_ids: HashMap<String, usize>,
    relation_ids: HashMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn entity_id(&self, name: &str) -> Option<usize> {
        self.entity_ids.get(name).copied()
    }

    pub fn relation_id(&self, name: &str) -> Option<usize> {
        self.relation_ids.get(name).copied()
    }

    pub fn entity_name(&self, id: usize) -> &str {
        &self.entities[id]
    }

    pub fn relation_name(&self, id: usize) -> &str {
        &self.relations[id]
    }

    fn intern_entity(&mut self, name: &str) -> usize {
        if let Some(&id) = self.entity_ids.get(name) {
            return id;
        }
        let id = self.entities.len();
        self.entities.push(name.to_string());
        self.entity_ids.insert(name.to_string(), id);
        id
    }

    fn intern_relation(&mut self, name: &str) -> usize {
        if let Some(&id) = self.relation_ids.get(name) {
            return id;
        }
        let id = self.relations.len();
        self.relations.push(name.to_string());
        self.relation_ids.insert(name.to_string(), id);
        id
    }

    /// SHA-256 over the newline-joined entity names, hex-encoded. Used to tie
    /// checkpoints to the vocabulary they were trained against.
    pub fn entity_hash(&self) -> String {
        hash_names(&self.entities)
    }

    pub fn relation_hash(&self) -> String {
        hash_names(&self.relations)
    }
}

fn hash_names(names: &[String]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for name in names {
        hasher.update(name.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads one TSV split. Under [`VocabMode::Build`] unseen names are appended
/// to the vocab in first-appearance order; under [`VocabMode::Reuse`] they
/// are an error. Duplicate triples within the file are rejected.
pub fn load_triples(
    path: &Path,
    vocab: &mut Vocab,
    mode: VocabMode,
) -> Result<Vec<Triple>, DataError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut triples = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(DataError::Malformed {
                path: path.display().to_string(),
                line: lineno,
                found: cols.len(),
            });
        }
        let resolve_entity = |vocab: &mut Vocab, name: &str| -> Result<usize, DataError> {
            match mode {
                VocabMode::Build => Ok(vocab.intern_entity(name)),
                VocabMode::Reuse => vocab.entity_id(name).ok_or_else(|| DataError::UnknownName {
                    path: path.display().to_string(),
                    line: lineno,
                    kind: "entity",
                    name: name.to_string(),
                }),
            }
        };
        let head = resolve_entity(vocab, cols[0])?;
        let rel = match mode {
            VocabMode::Build => vocab.intern_relation(cols[1]),
            VocabMode::Reuse => {
                vocab
                    .relation_id(cols[1])
                    .ok_or_else(|| DataError::UnknownName {
                        path: path.display().to_string(),
                        line: lineno,
                        kind: "relation",
                        name: cols[1].to_string(),
                    })?
            }
        };
        let tail = resolve_entity(vocab, cols[2])?;
        let triple = Triple { head, rel, tail };
        if !seen.insert(triple) {
            return Err(DataError::DuplicateTriple {
                path: path.display().to_string(),
                line: lineno,
            });
        }
        triples.push(triple);
    }
    Ok(triples)
}

/// Loads a `name<TAB>id` sidecar and pins those ids in the vocab. Ids must be
/// dense `0..count`.
fn load_id_sidecar(path: &Path, kind: &'static str, vocab: &mut Vocab) -> Result<(), DataError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut pairs: Vec<(String, usize)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 2 {
            return Err(DataError::BadSidecar {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("expected 2 columns, found {}", cols.len()),
            });
        }
        let id: usize = cols[1].parse().map_err(|_| DataError::BadSidecar {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("id {:?} is not an integer", cols[1]),
        })?;
        pairs.push((cols[0].to_string(), id));
    }
    pairs.sort_by_key(|(_, id)| *id);
    for (expected, (name, id)) in pairs.iter().enumerate() {
        if *id != expected {
            return Err(DataError::BadSidecar {
                path: path.display().to_string(),
                line: 0,
                msg: format!("ids are not dense: expected {expected}, found {id}"),
            });
        }
        let assigned = match kind {
            "entity" => vocab.intern_entity(name),
            _ => vocab.intern_relation(name),
        };
        if assigned != *id {
            return Err(DataError::BadSidecar {
                path: path.display().to_string(),
                line: 0,
                msg: format!("name {name:?} maps to {assigned}, sidecar says {id}"),
            });
        }
    }
    Ok(())
}

/// Train/valid/test splits plus the union of everything known to be true.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
    pub all_known: HashSet<Triple>,
}

impl Dataset {
    pub fn from_splits(train: Vec<Triple>, valid: Vec<Triple>, test: Vec<Triple>) -> Self {
        let all_known = train
            .iter()
            .chain(valid.iter())
            .chain(test.iter())
            .copied()
            .collect();
        Self {
            train,
            valid,
            test,
            all_known,
        }
    }

    /// Loads `train.tsv` / `valid.tsv` / `test.tsv` from a directory,
    /// honoring `entity2id.tsv` / `relation2id.tsv` sidecars when present.
    pub fn load_dir(dir: &Path) -> Result<(Vocab, Self), DataError> {
        let mut vocab = Vocab::new();
        let ent_sidecar = dir.join("entity2id.tsv");
        if ent_sidecar.exists() {
            load_id_sidecar(&ent_sidecar, "entity", &mut vocab)?;
        }
        let rel_sidecar = dir.join("relation2id.tsv");
        if rel_sidecar.exists() {
            load_id_sidecar(&rel_sidecar, "relation", &mut vocab)?;
        }
        let train = load_triples(&dir.join("train.tsv"), &mut vocab, VocabMode::Build)?;
        let valid = load_triples(&dir.join("valid.tsv"), &mut vocab, VocabMode::Build)?;
        let test = load_triples(&dir.join("test.tsv"), &mut vocab, VocabMode::Build)?;
        Ok((vocab, Self::from_splits(train, valid, test)))
    }
}

/// Candidate index for the filtered evaluation setting: for every observed
/// `(head, rel)` the set of true tails, and for every `(rel, tail)` the set
/// of true heads, over the union of all splits.
#[derive(Debug, Clone, Default)]
pub struct FilterIndex {
    tails: HashMap<(usize, usize), HashSet<usize>>,
    heads: HashMap<(usize, usize), HashSet<usize>>,
}

impl FilterIndex {
    pub fn true_tails(&self, head: usize, rel: usize) -> Option<&HashSet<usize>> {
        self.tails.get(&(head, rel))
    }

    pub fn true_heads(&self, rel: usize, tail: usize) -> Option<&HashSet<usize>> {
        self.heads.get(&(rel, tail))
    }

    pub fn contains_tail(&self, head: usize, rel: usize, tail: usize) -> bool {
        self.tails
            .get(&(head, rel))
            .is_some_and(|s| s.contains(&tail))
    }

    pub fn contains_head(&self, head: usize, rel: usize, tail: usize) -> bool {
        self.heads
            .get(&(rel, tail))
            .is_some_and(|s| s.contains(&head))
    }

    pub fn is_empty(&self) -> bool {
        self.tails.is_empty() && self.heads.is_empty()
    }
}

/// Builds the filtered-setting index over the union of all splits.
pub fn build_filter_index(dataset: &Dataset) -> FilterIndex {
    let mut index = FilterIndex::default();
    for t in &dataset.all_known {
        index
            .tails
            .entry((t.head, t.rel))
            .or_default()
            .insert(t.tail);
        index
            .heads
            .entry((t.rel, t.tail))
            .or_default()
            .insert(t.head);
    }
    index
}
