//! Reading-assessment analytics from eye-tracking logs.
//!
//! The crate turns raw gaze samples into per-student reading features and
//! clusters the cohort. A two-agent LLM loop (report curator and report
//! evaluator) then writes the numbers up as a teacher-facing Markdown report.
//!
//! Stages, in pipeline order:
//!
//! - [`ingest`]: input file parsing and validation
//! - [`gaze_events`]: I-VT fixation detection and saccades
//! - [`aoi`]: AOI assignment and phase segmentation
//! - [`features`]: the ten gaze features and z-scoring
//! - [`clustering`]: K-Means, GMM, spectral clustering and their validation
//! - [`textmetrics`]: readability and score distributions
//! - [`agents`]: prompt assembly, LLM backends, report parsing, evaluation
//! - [`synth`]: deterministic synthetic cohort generator

pub mod agents;
pub mod aoi;
pub mod clustering;
pub mod features;
pub mod gaze_events;
pub mod ingest;
pub mod synth;
pub mod textmetrics;

pub use ingest::ScreenGeometry;
