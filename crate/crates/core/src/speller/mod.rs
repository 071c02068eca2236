//! Binary-tree speller simulator: probability-split tree construction, a
//! character language model for the priors, contextual labels from the tree
//! position, and buffered online context-aware learning over synthetic
//! nonstationary feature streams.

mod lm;
mod online;
mod simulate;
mod stream;
mod tree;

pub use lm::{symbol_char, symbol_of, CharLm, ALPHABET_SIZE, BACKSPACE, SPACE};
pub use online::{OnlineBuffer, OnlineConfig};
pub use simulate::{
    run_speller_study, simulate_spelling, speller_csv, BaPoint, SimConfig, SpellerAlgorithm,
    SpellerRow, SpellerTrace,
};
pub use stream::{synth_stream, DriftPreset, StreamConfig, SubjectStream, FEATURE_DIM};
pub use tree::{build_tree, context_label_at_node, Side, SpellerTree, TreeNode};
