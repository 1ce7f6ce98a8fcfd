//! Per-entity text embeddings: enriched representations, sliced initializers,
//! and the mixed random/text entity initialization.
//!
//! This module only consumes precomputed matrices; description generation
//! lives behind the chat client in [`crate::refine`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{s, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::data::Vocab;
use crate::kgfe::{self, KgfeError};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("name matrix is {name_rows}x{name_cols} but description matrix is {desc_rows}x{desc_cols}")]
    ShapeMismatch {
        name_rows: usize,
        name_cols: usize,
        desc_rows: usize,
        desc_cols: usize,
    },
    #[error("non-finite value in {which} matrix at row {row}")]
    NonFinite { which: &'static str, row: usize },
    #[error("embedding width is zero")]
    ZeroWidth,
    #[error("target entity dimension {n} must be even")]
    OddTargetDim { n: usize },
    #[error("target half-width {half} exceeds text embedding width {dim_f}")]
    TargetTooWide { half: usize, dim_f: usize },
    #[error("mix ratio {rho} outside [0, 1]")]
    BadRatio { rho: f64 },
    #[error(transparent)]
    Kgfe(#[from] KgfeError),
    #[error("descriptions {path}:{line}: {msg}")]
    BadDescriptions {
        path: String,
        line: usize,
        msg: String,
    },
}

/// Name and description text embeddings for every entity, by entity id.
#[derive(Debug, Clone)]
pub struct TextEmbeddingStore {
    pub dim_f: usize,
    pub name: Array2<f64>,
    pub desc: Array2<f64>,
    pub descriptions: Option<HashMap<usize, String>>,
}

impl TextEmbeddingStore {
    pub fn new(name: Array2<f64>, desc: Array2<f64>) -> Result<Self, EmbedError> {
        if name.nrows() != desc.nrows() || name.ncols() != desc.ncols() {
            return Err(EmbedError::ShapeMismatch {
                name_rows: name.nrows(),
                name_cols: name.ncols(),
                desc_rows: desc.nrows(),
                desc_cols: desc.ncols(),
            });
        }
        for (which, m) in [("name", &name), ("description", &desc)] {
            for (row, r) in m.rows().into_iter().enumerate() {
                if r.iter().any(|v| !v.is_finite()) {
                    return Err(EmbedError::NonFinite { which, row });
                }
            }
        }
        let dim_f = name.ncols();
        Ok(Self {
            name,
            desc,
            dim_f,
            descriptions: None,
        })
    }

    pub fn entity_count(&self) -> usize {
        self.name.nrows()
    }

    pub fn load(name_path: &Path, desc_path: &Path) -> Result<Self, EmbedError> {
        let name = kgfe::read_matrix(name_path)?;
        let desc = kgfe::read_matrix(desc_path)?;
        Self::new(name, desc)
    }
}

#[derive(Deserialize)]
struct DescriptionLine {
    entity: String,
    description: String,
}

/// Reads a `{"entity": name, "description": text}` JSONL file, resolving
/// entity names against the vocab.
pub fn load_descriptions(path: &Path, vocab: &Vocab) -> Result<HashMap<usize, String>, EmbedError> {
    let file = File::open(path).map_err(|e| EmbedError::BadDescriptions {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let mut out = HashMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| EmbedError::BadDescriptions {
            path: path.display().to_string(),
            line: lineno,
            msg: e.to_string(),
        })?;
        if line.is_empty() {
            continue;
        }
        let parsed: DescriptionLine =
            serde_json::from_str(&line).map_err(|e| EmbedError::BadDescriptions {
                path: path.display().to_string(),
                line: lineno,
                msg: e.to_string(),
            })?;
        let id = vocab
            .entity_id(&parsed.entity)
            .ok_or_else(|| EmbedError::BadDescriptions {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("unknown entity {:?}", parsed.entity),
            })?;
        out.insert(id, parsed.description);
    }
    Ok(out)
}

/// Concatenates name and description embeddings row-wise: row `i` becomes
/// `[name_i; desc_i]` of width `2 * dim_f`.
pub fn enrich(store: &TextEmbeddingStore) -> Result<Array2<f64>, EmbedError> {
    if store.dim_f == 0 {
        return Err(EmbedError::ZeroWidth);
    }
    let rows = store.entity_count();
    let width = 2 * store.dim_f;
    let mut out = Array2::zeros((rows, width));
    out.slice_mut(s![.., ..store.dim_f]).assign(&store.name);
    out.slice_mut(s![.., store.dim_f..]).assign(&store.desc);
    Ok(out)
}

/// Row `i` becomes the first `n/2` coordinates of the name embedding followed
/// by the first `n/2` of the description embedding.
pub fn slice_init(store: &TextEmbeddingStore, n: usize) -> Result<Array2<f64>, EmbedError> {
    if n % 2 != 0 {
        return Err(EmbedError::OddTargetDim { n });
    }
    let half = n / 2;
    if half > store.dim_f {
        return Err(EmbedError::TargetTooWide {
            half,
            dim_f: store.dim_f,
        });
    }
    let rows = store.entity_count();
    let mut out = Array2::zeros((rows, n));
    out.slice_mut(s![.., ..half])
        .assign(&store.name.slice(s![.., ..half]));
    out.slice_mut(s![.., half..])
        .assign(&store.desc.slice(s![.., ..half]));
    Ok(out)
}

/// Mixes a uniform random initializer with the sliced text embedding:
/// `e_i = rho * e'_i + (1 - rho) * v'_i`, with `e'` drawn i.i.d. from
/// `U(-1/sqrt(n), 1/sqrt(n))`. Deterministic given the seed; `rho = 0`
/// returns the sliced matrix bit for bit, `rho = 1` ignores it entirely.
pub fn init_entities(sliced: &Array2<f64>, rho: f64, seed: u64) -> Result<Array2<f64>, EmbedError> {
    if !(0.0..=1.0).contains(&rho) || rho.is_nan() {
        return Err(EmbedError::BadRatio { rho });
    }
    if rho == 0.0 {
        return Ok(sliced.clone());
    }
    let (rows, n) = (sliced.nrows(), sliced.ncols());
    let bound = 1.0 / (n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Array2::zeros((rows, n));
    for i in 0..rows {
        for j in 0..n {
            let random: f64 = rng.random_range(-bound..bound);
            out[[i, j]] = if rho == 1.0 {
                random
            } else {
                rho * random + (1.0 - rho) * sliced[[i, j]]
            };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn store(name: Array2<f64>, desc: Array2<f64>) -> TextEmbeddingStore {
        TextEmbeddingStore::new(name, desc).unwrap()
    }

    #[test]
    fn enrich_concatenates() {
        let s = store(array![[1.0, 0.0]], array![[0.0, 1.0]]);
        let v = enrich(&s).unwrap();
        assert_eq!(v, array![[1.0, 0.0, 0.0, 1.0]]);
    }

    #[test]
    fn enrich_shape() {
        let s = store(Array2::zeros((3, 2)), Array2::zeros((3, 2)));
        let v = enrich(&s).unwrap();
        assert_eq!(v.dim(), (3, 4));
    }

    #[test]
    fn enrich_rejects_zero_width() {
        let s = store(Array2::zeros((2, 0)), Array2::zeros((2, 0)));
        assert!(matches!(enrich(&s), Err(EmbedError::ZeroWidth)));
    }

    #[test]
    fn store_rejects_shape_mismatch() {
        let err = TextEmbeddingStore::new(Array2::zeros((2, 3)), Array2::zeros((2, 4))).unwrap_err();
        assert!(matches!(err, EmbedError::ShapeMismatch { .. }));
    }

    #[test]
    fn store_rejects_non_finite() {
        let err =
            TextEmbeddingStore::new(array![[f64::NAN, 0.0]], array![[0.0, 0.0]]).unwrap_err();
        assert!(matches!(err, EmbedError::NonFinite { which: "name", row: 0 }));
    }

    #[test]
    fn slice_takes_prefixes() {
        let s = store(array![[1.0, 2.0, 3.0, 4.0]], array![[5.0, 6.0, 7.0, 8.0]]);
        let v = slice_init(&s, 4).unwrap();
        assert_eq!(v, array![[1.0, 2.0, 5.0, 6.0]]);
    }

    #[test]
    fn slice_full_width_equals_enriched() {
        let s = store(array![[1.0, 2.0]], array![[3.0, 4.0]]);
        assert_eq!(slice_init(&s, 4).unwrap(), enrich(&s).unwrap());
    }

    #[test]
    fn slice_rejects_odd_dim() {
        let s = store(array![[1.0, 2.0]], array![[3.0, 4.0]]);
        assert!(matches!(slice_init(&s, 3), Err(EmbedError::OddTargetDim { n: 3 })));
    }

    #[test]
    fn slice_rejects_too_wide() {
        let s = store(array![[1.0, 2.0]], array![[3.0, 4.0]]);
        assert!(matches!(slice_init(&s, 6), Err(EmbedError::TargetTooWide { .. })));
    }

    #[test]
    fn enrich_split_round_trip() {
        let mut rng = crate::seeds::stage_rng(3, "embed-test");
        let name = Array2::from_shape_fn((5, 4), |_| rng.random_range(-1.0..1.0));
        let desc = Array2::from_shape_fn((5, 4), |_| rng.random_range(-1.0..1.0));
        let s = store(name.clone(), desc.clone());
        let v = enrich(&s).unwrap();
        assert_eq!(v.slice(s![.., ..4]), name);
        assert_eq!(v.slice(s![.., 4..]), desc);
    }

    #[test]
    fn init_rho_zero_is_sliced_and_seed_independent() {
        let sliced = array![[1.0, -2.0], [0.5, 0.25]];
        let a = init_entities(&sliced, 0.0, 1).unwrap();
        let b = init_entities(&sliced, 0.0, 99).unwrap();
        assert_eq!(a, sliced);
        assert_eq!(a, b);
    }

    #[test]
    fn init_mixes_linearly() {
        // rho = 0.5 with e' = [2, 0] and v' = [0, 2] gives [1, 1]; emulate by
        // checking the linear identity against the pure-random draw.
        let sliced = array![[0.0, 2.0, -4.0, 8.0]];
        let random = init_entities(&sliced, 1.0, 42).unwrap();
        let mixed = init_entities(&sliced, 0.5, 42).unwrap();
        for j in 0..4 {
            let expect = 0.5 * random[[0, j]] + 0.5 * sliced[[0, j]];
            assert!((mixed[[0, j]] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn init_rho_one_ignores_sliced() {
        let a = init_entities(&array![[1.0, 2.0]], 1.0, 7).unwrap();
        let b = init_entities(&array![[-9.0, 4.5]], 1.0, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_deterministic_given_seed() {
        let sliced = array![[1.0, 2.0], [3.0, 4.0]];
        let a = init_entities(&sliced, 0.7, 5).unwrap();
        let b = init_entities(&sliced, 0.7, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_rejects_bad_ratio() {
        let sliced = array![[1.0]];
        assert!(matches!(
            init_entities(&sliced, 1.5, 0),
            Err(EmbedError::BadRatio { .. })
        ));
    }

    #[test]
    fn random_component_within_bounds() {
        let sliced = Array2::zeros((10, 16));
        let m = init_entities(&sliced, 1.0, 3).unwrap();
        let bound = 1.0 / 4.0;
        assert!(m.iter().all(|v| v.abs() < bound));
    }
}
