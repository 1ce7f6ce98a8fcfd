//! Entity-hierarchy-aware fine-tuning of knowledge graph embeddings.
//!
//! The pipeline, end to end:
//!
//! 1. [`embed`] ingests per-entity name and description text embeddings and
//!    forms enriched representations plus sliced initializers.
//! 2. [`cluster`] runs average-linkage agglomerative clustering over the
//!    enriched matrix with a silhouette-driven threshold sweep.
//! 3. [`tree`] turns the dendrogram and chosen labels into a seed hierarchy;
//!    [`refine`] improves it with LLM-guided cluster splitting and bottom-up
//!    refinement (via the pluggable [`llm`] chat client).
//! 4. [`precompute`] caches, per entity, the cluster / neighbor / ancestor
//!    embeddings the hierarchical constraint needs during training.
//! 5. [`train`] fine-tunes the embedding tables ([`models`]) under the
//!    hierarchical, anchoring, and link-prediction losses.
//! 6. [`eval`] scores filtered link prediction (MR / MRR / Hits@N).
//!
//! [`fixtures`] provides deterministic synthetic graphs and independent
//! brute-force oracles used by the test suites.

pub mod cluster;
pub mod data;
pub mod embed;
pub mod eval;
pub mod fixtures;
pub mod kgfe;
pub mod llm;
pub mod models;
pub mod precompute;
pub mod refine;
pub mod seeds;
pub mod train;
pub mod tree;
