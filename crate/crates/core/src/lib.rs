//! Phonetic error detection toolkit.
//!
//! The crate is organized around a closed phoneme inventory:
//!
//! - [`inventory`]: ARPAbet phonemes, the phonological feature table, and a
//!   CMUdict lexicon parser.
//! - [`similarity`]: phoneme similarity matrices built from features
//!   (heuristic) or from reference vectors (embedding), plus the row-normalized
//!   soft-label form.
//! - [`metrics`]: edit-distance alignment, PER, similarity-weighted PER and the
//!   articulatory error rate.
//! - [`ctc`]: soft CTC and soft-mapping losses with analytic gradients,
//!   standard CTC, greedy and prefix beam decoding, and a small logit-fitting
//!   optimizer.
//! - [`simulate`]: text-level mispronunciation injection over a lexicon.
//! - [`records`]: JSON wire formats shared by the CLI and the browser demo.

pub mod ctc;
mod error;
pub mod inventory;
pub mod metrics;
pub mod records;
pub mod similarity;
pub mod simulate;

pub use error::{Error, Result};
pub use inventory::{load_inventory, FeatureTable, Lexicon, PhonemeId, PhonemeInventory};
pub use similarity::{EmbeddingTable, NormalizedSimilarity, SimilarityMatrix};
