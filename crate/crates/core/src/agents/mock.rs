use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::backend::{BackendError, CompletionRequest, LlmBackend};
use super::evaluator::{criterion_names, EVALUATOR_MARKER};
use super::prompt::{extract_bundle, BundleCluster, PromptBundle};
use super::REQUIRED_SECTIONS;
use crate::clustering::ZTag;

/// Knobs for scripted misbehaviour.
#[derive(Debug, Clone, Default)]
pub struct MockScript {
    /// Required sections to leave out of every report.
    pub omit_sections: Vec<String>,
    /// Ids appended to the first cluster's student list.
    pub extra_student_ids: Vec<String>,
    /// Number of criteria in evaluator replies (default 9).
    pub criteria_count: Option<usize>,
    /// Score for every criterion (default 4).
    pub score: Option<u8>,
    /// Wrap reports in a ```markdown fence.
    pub fenced: bool,
    /// Replies returned verbatim, in order, before falling back to templates.
    pub queued: Vec<String>,
}

/// Deterministic offline backend. Fills a fixed report template from the
/// bundle embedded in a curator prompt and returns fixed scores for
/// evaluator prompts.
pub struct MockBackend {
    script: MockScript,
    queue: Mutex<VecDeque<String>>,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        MockBackend {
            queue: Mutex::new(script.queued.iter().cloned().collect()),
            script,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn evaluation(&self) -> String {
        let n = self.script.criteria_count.unwrap_or(9);
        let score = self.script.score.unwrap_or(4);
        let m: serde_json::Map<String, serde_json::Value> = criterion_names()
            .take(n)
            .map(|c| {
                (
                    c.to_string(),
                    serde_json::json!({"score": score, "justification": format!("Fixed mock score for {c}.")}),
                )
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::Value::Object(m)).expect("serializable")
    }

    fn report(&self, bundle: &PromptBundle) -> String {
        let mut out = format!("# {} report\n", bundle.assessment_title);
        for section in REQUIRED_SECTIONS {
            if self.script.omit_sections.iter().any(|s| s == section) {
                continue;
            }
            let _ = writeln!(out, "\n## {section}");
            out.push_str(&self.section_body(section, bundle));
        }
        if self.script.fenced {
            format!("```markdown\n{out}```\n")
        } else {
            out
        }
    }

    fn section_body(&self, section: &str, b: &PromptBundle) -> String {
        let s = &b.score_distribution;
        let mut out = String::new();
        match section {
            "Status" => {
                let _ = writeln!(
                    out,
                    "{} students completed {} questions. Mean score {} of {} ({}%).",
                    s.n_students, s.n_questions, s.mean_total, s.n_questions, s.mean_percent
                );
            }
            "Summary" => {
                let _ = writeln!(
                    out,
                    "Scores ranged from {} to {}. The class splits into {} reading groups ({}, silhouette {}).",
                    s.min_total,
                    s.max_total,
                    b.cluster_quality.k,
                    b.cluster_quality.method,
                    b.cluster_quality.silhouette
                );
            }
            "Content" => {
                let _ = writeln!(
                    out,
                    "The passage has {} words in {} sentences, Flesch-Kincaid grade {}.",
                    b.text_complexity.word_count,
                    b.text_complexity.sentence_count,
                    b.text_complexity.flesch_kincaid_grade
                );
                for q in &b.question_performance {
                    let acc = q
                        .accuracy_percent
                        .map_or("no answers".to_string(), |p| format!("{p}% correct"));
                    let _ = writeln!(out, "- {} ({}): {acc}", q.question_id, q.standard_codes.join(", "));
                }
            }
            "Skills" => {
                for st in &b.reading_standards {
                    let _ = writeln!(out, "- {}: {}", st.code, st.description);
                }
                for f in &b.fluency_skills {
                    let _ = writeln!(out, "- Fluency: {f}");
                }
            }
            "Clusters" => {
                for (i, c) in b.cluster_profiles.iter().enumerate() {
                    let mut ids = c.student_ids.clone();
                    if i == 0 {
                        ids.extend(self.script.extra_student_ids.iter().cloned());
                    }
                    let _ = writeln!(out, "\n### Cluster {}: {}", c.cluster, cluster_name(c));
                    let _ = writeln!(out, "Students: {}", ids.join(", "));
                    let _ = writeln!(out, "- Characteristics: {}", characteristics(c));
                }
            }
            "Outliers" => {
                if b.outliers.is_empty() {
                    out.push_str("No students were flagged as outliers.\n");
                }
                for o in &b.outliers {
                    let _ = writeln!(
                        out,
                        "- Student {} (distance {} from their group centre)",
                        o.student_id, o.distance
                    );
                }
            }
            "Recommendations" => {
                for c in &b.cluster_profiles {
                    let _ = writeln!(
                        out,
                        "- Cluster {}: plan targeted practice around {}.",
                        c.cluster,
                        characteristics(c)
                    );
                }
            }
            _ => {}
        }
        out
    }
}

fn tag_words(tag: ZTag) -> &'static str {
    match tag {
        ZTag::VeryLow => "very low",
        ZTag::Low => "low",
        ZTag::Average => "average",
        ZTag::High => "high",
        ZTag::VeryHigh => "very high",
    }
}

fn readable(feature: &str) -> String {
    feature.trim_start_matches("norm_").replace('_', " ")
}

fn cluster_name(c: &BundleCluster) -> String {
    c.features
        .iter()
        .max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
        .map_or("Mixed profile".to_string(), |f| {
            let mut s = format!("{} {}", tag_words(f.tag), readable(&f.feature));
            if let Some(first) = s.get_mut(0..1) {
                first.make_ascii_uppercase();
            }
            s
        })
}

fn characteristics(c: &BundleCluster) -> String {
    let notable: Vec<String> = c
        .features
        .iter()
        .filter(|f| f.tag != ZTag::Average)
        .map(|f| format!("{} {} (z = {})", tag_words(f.tag), readable(&f.feature), f.z))
        .collect();
    if notable.is_empty() {
        "close to the class average on every measure".into()
    } else {
        notable.join("; ")
    }
}

impl LlmBackend for MockBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(r) = self.queue.lock().expect("mock queue").pop_front() {
            return Ok(r);
        }
        if request.prompt.starts_with(EVALUATOR_MARKER) {
            return Ok(self.evaluation());
        }
        Ok(match extract_bundle(request.prompt) {
            Some(b) => self.report(&b),
            None => "The prompt held no data to report on.".to_string(),
        })
    }

    fn name(&self) -> &str {
        "mock"
    }

    fn model_id(&self) -> &str {
        "mock-template-v1"
    }
}
