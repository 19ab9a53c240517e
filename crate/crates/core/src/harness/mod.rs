//! Evaluation harness: transcription error rates, the transcription
//! ablation, and the configured end-to-end pipeline.

mod ablate;
mod pipeline;
mod reveng;

pub use ablate::{
    ablate, ablation_tsv, infer_tree, score_on_common_leaves, variant_rows, AblationConfig, AblationRow, TreeSource,
    Variant,
};
pub use pipeline::{run_pipeline, ClusterConfig, EvaluationConfig, InputConfig, PipelineConfig, RunSummary, SelectionConfig, MANIFEST, TOOL_VERSION};
pub use reveng::{
    error_rate_exact, error_rate_soundclass, error_rates, tokenization_error_rate, transcription_pairs,
    ErrorRateReport, LanguageErrorRate, TranscriptionPair,
};
