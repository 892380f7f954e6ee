//! The two LLM agents: a curator that turns the analysis into a Markdown
//! report for teachers, and an evaluator that scores that report.
//!
//! Backends are pluggable. [`HttpBackend`] talks to an OpenAI-compatible
//! chat-completions endpoint; [`MockBackend`] fills templates so the whole
//! pipeline runs offline and deterministically.

mod backend;
mod evaluator;
mod mock;
mod prompt;
mod report;

use thiserror::Error;

pub use backend::{extract_content, BackendError, CompletionRequest, HttpBackend, HttpSettings, LlmBackend};
pub use evaluator::{
    aggregate, build_evaluator_prompt, criterion_names, evaluate_report, parse_evaluation, CriterionScore,
    CriterionSummary, EvaluationRun, EvaluationSet, EvaluatorOptions, CRITERIA, EVALUATOR_MARKER,
};
pub use mock::{MockBackend, MockScript};
pub use prompt::{
    build_curator_prompt, build_prompt_bundle, extract_bundle, render_template, BundleCluster, BundleFeature,
    BundleInputs, BundleOutlier, BundleQuality, BundleQuestion, BundleScores, PromptBundle, CURATOR_TEMPLATE,
    DEFAULT_ROLE,
};
pub use report::{
    generate_report, parse_report, repair_prompt, strip_code_fences, CuratorOptions, CuratorReport, ReportCluster,
    ReportSection,
};

pub const REQUIRED_SECTIONS: [&str; 7] = [
    "Status",
    "Summary",
    "Content",
    "Skills",
    "Clusters",
    "Outliers",
    "Recommendations",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("unresolved template placeholder {placeholder:?}")]
    Template { placeholder: String },
    #[error("question {question} references unknown standard {code}")]
    UnresolvedStandard { question: String, code: String },
    #[error("malformed report: {detail}")]
    MalformedReport { detail: String },
    #[error("report names student {id:?}, who is not in the roster")]
    UnknownStudent { id: String },
    #[error("malformed evaluation: {0}")]
    MalformedEvaluation(String),
    #[error("JSON error: {0}")]
    Json(String),
}
