//! Pipeline stages. Each stage reads the previous stage's files from the
//! output directory and writes its own, so any stage can be rerun alone.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use readlens_core::agents::{
    build_curator_prompt, build_prompt_bundle, evaluate_report, generate_report, BundleInputs, HttpBackend, LlmBackend,
    MockBackend, MockScript, PromptBundle, CURATOR_TEMPLATE,
};
use readlens_core::aoi::{encode_fixations, group_by_recorded_phase, phase_of};
use readlens_core::clustering::{
    anova_per_feature, cluster_profile, detect_outliers, select_model, write_anova_csv, write_heatmap_csv,
    write_quality_csv, write_sweep_csv, ClusterProfile, ClusterResult, Method, Outlier, QualityMetrics, SweepRow,
};
use readlens_core::features::{
    build_feature_matrix, extract_student_features, read_features_csv, standardize, write_features_csv,
};
use readlens_core::gaze_events::{detect_fixations_ivt, fill_gaps, read_fixations_csv, write_fixations_csv};
use readlens_core::ingest::{
    parse_aoi_layout, parse_assessment, parse_gaze_log, parse_responses, parse_session_events,
};
use readlens_core::synth::{generate_cohort, write_dataset, SynthConfig};
use readlens_core::textmetrics::{flesch_kincaid, score_distribution};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{ingest, CliError};

type Result<T> = std::result::Result<T, CliError>;

pub const FIXATIONS_DIR: &str = "fixations";
pub const FEATURES_RAW: &str = "features_raw.csv";
pub const FEATURES_NORM: &str = "features_norm.csv";
pub const CLUSTER_QUALITY: &str = "cluster_quality.csv";
pub const CLUSTER_SWEEP: &str = "cluster_sweep.csv";
pub const ANOVA: &str = "anova.csv";
pub const CLUSTERS_JSON: &str = "clusters.json";
pub const HEATMAP: &str = "heatmap.csv";
pub const PROMPT_JSON: &str = "prompt.json";
pub const REPORT_MD: &str = "report.md";
pub const EVALUATIONS_JSON: &str = "evaluations.json";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::pipeline("serialize", e))?;
    text.push('\n');
    write_text(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::pipeline(path.display().to_string(), e))
}

/// Sorted ids of every `<id>.<ext>` file in `dir`.
fn ids_in(dir: &Path, ext: &str) -> Result<Vec<String>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    if ids.is_empty() {
        return Err(CliError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("no .{ext} files")),
        ));
    }
    Ok(ids)
}

fn timeline_path(cfg: &Config, id: &str) -> PathBuf {
    cfg.data_dir.join("timeline").join(format!("{id}.json"))
}

/// Gaze logs to AOI-encoded, phase-labelled fixation CSVs.
pub fn fixations(cfg: &Config) -> Result<usize> {
    let layout = parse_aoi_layout(&cfg.data_dir.join("aoi_layout.json")).map_err(|e| ingest("aoi layout", e))?;
    let gaze_dir = cfg.data_dir.join("gaze");
    let ids = ids_in(&gaze_dir, "csv")?;
    let out_dir = cfg.out_dir.join(FIXATIONS_DIR);
    ids.par_iter()
        .map(|id| -> Result<()> {
            let samples =
                parse_gaze_log(&gaze_dir.join(format!("{id}.csv")), &cfg.screen).map_err(|e| ingest(id, e))?;
            let timeline = parse_session_events(&timeline_path(cfg, id)).map_err(|e| ingest(id, e))?;
            let filled = fill_gaps(&samples, cfg.ivt.gap_fill_max_ms);
            let mut fx = detect_fixations_ivt(&filled, &cfg.ivt, &cfg.screen)
                .map_err(|e| CliError::pipeline(format!("fixations for {id}"), e))?;
            encode_fixations(&mut fx, &layout, &timeline);
            for f in &mut fx {
                f.phase = phase_of(f, &timeline);
            }
            let path = out_dir.join(format!("{id}.csv"));
            write_fixations_csv(create(&path)?, &fx).map_err(|e| CliError::io(&path, e))
        })
        .collect::<Result<Vec<()>>>()?;
    log::info!("wrote fixations for {} students", ids.len());
    Ok(ids.len())
}

/// Fixation CSVs to `features_raw.csv` and `features_norm.csv`.
pub fn features(cfg: &Config) -> Result<usize> {
    let layout = parse_aoi_layout(&cfg.data_dir.join("aoi_layout.json")).map_err(|e| ingest("aoi layout", e))?;
    let fix_dir = cfg.out_dir.join(FIXATIONS_DIR);
    let ids = ids_in(&fix_dir, "csv")?;
    let rows = ids
        .par_iter()
        .map(|id| -> Result<_> {
            let timeline = parse_session_events(&timeline_path(cfg, id)).map_err(|e| ingest(id, e))?;
            let fx = read_fixations_csv(open(&fix_dir.join(format!("{id}.csv")))?)?;
            let segments = group_by_recorded_phase(&fx);
            Ok(extract_student_features(id, &segments, &timeline, &layout, &cfg.screen))
        })
        .collect::<Result<Vec<_>>>()?;
    let (raw, imputed) = build_feature_matrix(rows)?;
    if !imputed.is_empty() {
        log::info!("{} feature cells imputed with column medians", imputed.len());
    }
    let (norm, _) = standardize(&raw);
    for (name, m) in [(FEATURES_RAW, &raw), (FEATURES_NORM, &norm)] {
        let path = cfg.out_dir.join(name);
        write_features_csv(create(&path)?, m).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(raw.n_students())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub selected_k: usize,
    pub metrics: QualityMetrics,
    pub result: ClusterResult,
    pub profiles: Vec<ClusterProfile>,
    pub outliers: Vec<Outlier>,
    pub sweep: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustersFile {
    pub seed: u64,
    pub gamma: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub report_method: Method,
    pub student_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub methods: Vec<MethodOutcome>,
}

impl ClustersFile {
    pub fn report_outcome(&self) -> Result<&MethodOutcome> {
        self.methods
            .iter()
            .find(|m| m.method == self.report_method)
            .ok_or_else(|| CliError::Config(format!("clusters.json has no {} result", self.report_method)))
    }
}

/// Standardized features to model selection, ANOVA, profiles and outliers.
pub fn cluster(cfg: &Config) -> Result<ClustersFile> {
    let c = &cfg.clustering;
    let m = read_features_csv(open(&cfg.out_dir.join(FEATURES_NORM))?, true)?;
    let mut outcomes = Vec::with_capacity(c.methods.len());
    for &method in &c.methods {
        let sel = select_model(&m.values, method, c.k_min..=c.k_max, c.seed, c.gamma)?;
        outcomes.push(MethodOutcome {
            method,
            selected_k: sel.best.k,
            profiles: cluster_profile(&sel.best, &m.feature_names, &m.student_ids),
            outliers: detect_outliers(&m.values, &sel.best, &m.student_ids),
            metrics: sel.best_metrics,
            result: sel.best,
            sweep: sel.sweep,
        });
    }
    let file = ClustersFile {
        seed: c.seed,
        gamma: c.gamma,
        k_min: c.k_min,
        k_max: c.k_max,
        report_method: c.report_method,
        student_ids: m.student_ids.clone(),
        feature_names: m.feature_names.clone(),
        methods: outcomes,
    };
    let chosen = file.report_outcome()?;

    let out = &cfg.out_dir;
    let quality: Vec<QualityMetrics> = file.methods.iter().map(|o| o.metrics.clone()).collect();
    let sweep: Vec<SweepRow> = file.methods.iter().flat_map(|o| o.sweep.clone()).collect();
    let anova = anova_per_feature(&m.values, &chosen.result.labels, &m.feature_names)?;
    let path = out.join(CLUSTER_QUALITY);
    write_quality_csv(create(&path)?, &quality).map_err(|e| CliError::io(&path, e))?;
    let path = out.join(CLUSTER_SWEEP);
    write_sweep_csv(create(&path)?, &sweep).map_err(|e| CliError::io(&path, e))?;
    let path = out.join(ANOVA);
    write_anova_csv(create(&path)?, &anova).map_err(|e| CliError::io(&path, e))?;
    let path = out.join(HEATMAP);
    write_heatmap_csv(create(&path)?, &chosen.profiles).map_err(|e| CliError::io(&path, e))?;
    write_json(&out.join(CLUSTERS_JSON), &file)?;
    Ok(file)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptFile {
    pub backend: String,
    pub model: String,
    pub roster: Vec<String>,
    pub bundle: PromptBundle,
    pub prompt: String,
}

pub fn make_backend(cfg: &Config) -> Result<Box<dyn LlmBackend>> {
    if cfg.llm.mock {
        return Ok(Box::new(MockBackend::new(MockScript::default())));
    }
    Ok(Box::new(
        HttpBackend::from_env(cfg.llm.http.clone()).map_err(readlens_core::agents::AgentError::from)?,
    ))
}

/// Clustering output plus assessment data to `prompt.json` and `report.md`.
pub fn report(cfg: &Config, backend: &dyn LlmBackend) -> Result<()> {
    let clusters: ClustersFile = read_json(&cfg.out_dir.join(CLUSTERS_JSON))?;
    let chosen = clusters.report_outcome()?;
    let assessment = parse_assessment(&cfg.data_dir.join("assessment.json")).map_err(|e| ingest("assessment", e))?;
    let responses = parse_responses(&cfg.data_dir.join("responses.csv")).map_err(|e| ingest("responses", e))?;
    let complexity = flesch_kincaid(&assessment.passage_text)?;
    let scores = score_distribution(&responses, &assessment)?;
    let bundle = build_prompt_bundle(&BundleInputs {
        assessment: &assessment,
        complexity: &complexity,
        scores: &scores,
        profiles: &chosen.profiles,
        quality: &chosen.metrics,
        outliers: &chosen.outliers,
        role_instruction: cfg.llm.role_instruction.as_deref(),
    })?;
    let prompt = build_curator_prompt(&bundle, CURATOR_TEMPLATE)?;
    let roster = clusters.student_ids.clone();
    write_json(
        &cfg.out_dir.join(PROMPT_JSON),
        &PromptFile {
            backend: backend.name().to_string(),
            model: backend.model_id().to_string(),
            roster: roster.clone(),
            bundle,
            prompt: prompt.clone(),
        },
    )?;
    let report = generate_report(&prompt, backend, &roster, &cfg.llm.curator)?;
    let mut md = report.raw_markdown;
    md.push('\n');
    write_text(&cfg.out_dir.join(REPORT_MD), &md)
}

/// `prompt.json` and `report.md` to `evaluations.json`.
pub fn evaluate(cfg: &Config, backend: &dyn LlmBackend) -> Result<()> {
    let prompt: PromptFile = read_json(&cfg.out_dir.join(PROMPT_JSON))?;
    let path = cfg.out_dir.join(REPORT_MD);
    let report = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let set = evaluate_report(&prompt.prompt, report.trim_end(), backend, &cfg.llm.evaluator)?;
    write_json(&cfg.out_dir.join(EVALUATIONS_JSON), &set)
}

pub fn pipeline(cfg: &Config, backend: &dyn LlmBackend) -> Result<()> {
    fixations(cfg)?;
    features(cfg)?;
    cluster(cfg)?;
    report(cfg, backend)?;
    evaluate(cfg, backend)
}

pub fn gen_fixture(dir: &Path, synth: &SynthConfig) -> Result<()> {
    let cohort = generate_cohort(synth);
    write_dataset(&cohort, dir).map_err(|e| CliError::io(dir, e))
}
