//! Evaluation metrics: layout coverage, text accuracy, pixel error, and
//! pairwise-preference ratings.

mod agreement;
mod elo;
mod iou;
mod ocr;
mod report;

pub use agreement::{kendalls_w, top_rank_frequency, RankingSet};
pub use elo::{
    decompose_ranking, elo_update, win_rate, EloTable, PairOutcome, DEFAULT_INITIAL_RATING, DEFAULT_K_FACTOR,
};
pub use iou::{covered_area, miou, symmetric_iou, CoverageScores};
pub use ocr::{concatenated_text, levenshtein, normalized_similarity, ocr_accuracy};
pub use report::{evaluate_sample, records_jsonl, summarize, summary_csv, ExternalScorer, MetricRecord, SummaryRow};

use crate::raster::RasterError;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("method {0:?} appears more than once")]
    DuplicateMethod(String),
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("external scorer: {0}")]
    Scorer(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}
