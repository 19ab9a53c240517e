//! Automated cognate-dataset construction and evaluation.
//!
//! The pipeline runs from multilingual synset dumps through grapheme-to-phoneme
//! transcription, IPA tokenization and sound-class conversion, to per-concept
//! cognate clustering, binary character matrices, coverage statistics and
//! generalized quartet distances against reference language trees.
//!
//! Every stage reads and writes plain files (JSON-Lines dumps, TSV wordlists,
//! PHYLIP/NEXUS matrices, Newick trees), so each one can be run on its own.

pub mod cluster;
pub mod corpus;
pub mod error;
pub mod g2p;
pub mod harness;
pub mod ipa;
pub mod matrix;
pub mod select;
pub mod tree;

pub use error::{Error, Result};
