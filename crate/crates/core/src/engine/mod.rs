//! Enumeration of matrix products over words.

mod fold;
mod resistance;
mod search;
mod system;
mod word;

pub use fold::{
    fold_words, CountWords, ExecConfig, FoldSpec, Leaf, LogNormSum, LogSumExp, MinNorm, DEFAULT_BUDGET,
    DEFAULT_MAX_DEPTH, DEFAULT_PREFIX_LEN,
};
pub use resistance::{admissible_words, resistance_check, ResistanceReport, ResistanceRow};
pub use search::{min_norm, min_norm_with, MinNormResult};
pub use system::{MatrixSystem, INVERTIBILITY_FLOOR};
pub use word::{RunWord, Word};
