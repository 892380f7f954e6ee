use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AgentError, REQUIRED_SECTIONS};
use crate::clustering::{ClusterProfile, Outlier, QualityMetrics, ZTag};
use crate::ingest::{AssessmentContent, Standard};
use crate::textmetrics::{ScoreDistribution, TextComplexity};

pub const DEFAULT_ROLE: &str = "You are an experienced educational analyst. You help a middle-school \
teacher understand how their class read a passage and answered the questions about it, using \
eye-tracking measures and assessment results.";

pub const CURATOR_TEMPLATE: &str = r###"{{role_instruction}}

Task: write a teacher-facing report on the assessment "{{assessment_title}}" from the data below.

Reason step by step before writing. First read the score distribution and the question-level results, then compare the student groups feature by feature, then decide which findings matter most for instruction. Do not show this reasoning; output only the final report.

Output format: Markdown with exactly these level-2 headers, in this order:
{{section_list}}

Under "## Clusters", write one subsection per student group:
### Cluster <number>: <short descriptive name>
Students: <comma-separated student ids>
- Characteristics: <what distinguishes the group>

Only use student ids that appear in the data. Percentages are whole numbers. Z-values are relative to the class average.

Data (JSON):
```json
{{bundle_json}}
```
"###;

fn round_to(v: f64, places: i32) -> f64 {
    let s = 10f64.powi(places);
    let r = (v * s).round() / s;
    // avoid "-0.0" in the JSON
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn percent(v: f64) -> u32 {
    (v * 100.0).round() as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleScores {
    pub n_students: usize,
    pub n_questions: usize,
    pub mean_total: f64,
    pub std_total: f64,
    pub min_total: usize,
    pub max_total: usize,
    pub mean_percent: u32,
    pub histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleQuestion {
    pub question_id: String,
    pub text: String,
    pub standard_codes: Vec<String>,
    pub accuracy_percent: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleFeature {
    pub feature: String,
    pub z: f64,
    pub tag: ZTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleCluster {
    /// 1-based, as the report names it.
    pub cluster: usize,
    pub size: usize,
    pub student_ids: Vec<String>,
    pub features: Vec<BundleFeature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleQuality {
    pub method: String,
    pub k: usize,
    pub avg_within_cluster_variance: f64,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleOutlier {
    pub student_id: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub role_instruction: String,
    pub assessment_title: String,
    pub reading_standards: Vec<Standard>,
    pub fluency_skills: Vec<String>,
    pub text_complexity: TextComplexity,
    pub score_distribution: BundleScores,
    pub question_performance: Vec<BundleQuestion>,
    pub cluster_profiles: Vec<BundleCluster>,
    pub cluster_quality: BundleQuality,
    pub outliers: Vec<BundleOutlier>,
}

pub struct BundleInputs<'a> {
    pub assessment: &'a AssessmentContent,
    pub complexity: &'a TextComplexity,
    pub scores: &'a ScoreDistribution,
    pub profiles: &'a [ClusterProfile],
    pub quality: &'a QualityMetrics,
    pub outliers: &'a [Outlier],
    pub role_instruction: Option<&'a str>,
}

fn digest(text: &str, max_words: usize) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if words.len() <= max_words {
        words.join(" ")
    } else {
        format!("{} ...", words[..max_words].join(" "))
    }
}

pub fn build_prompt_bundle(inputs: &BundleInputs<'_>) -> Result<PromptBundle, AgentError> {
    let a = inputs.assessment;
    let known: std::collections::HashSet<&str> = a.standards.iter().map(|s| s.code.as_str()).collect();
    let accuracy: HashMap<&str, Option<f64>> = inputs
        .scores
        .questions
        .iter()
        .map(|q| (q.question_id.as_str(), q.accuracy))
        .collect();
    let mut questions = Vec::with_capacity(a.questions.len());
    for q in &a.questions {
        if let Some(code) = q.standard_codes.iter().find(|c| !known.contains(c.as_str())) {
            return Err(AgentError::UnresolvedStandard {
                question: q.id.clone(),
                code: code.clone(),
            });
        }
        questions.push(BundleQuestion {
            question_id: q.id.clone(),
            text: digest(&q.text, 20),
            standard_codes: q.standard_codes.clone(),
            accuracy_percent: accuracy.get(q.id.as_str()).copied().flatten().map(percent),
        });
    }
    let s = inputs.scores;
    let mean_percent = if s.n_questions > 0 {
        percent(s.mean / s.n_questions as f64)
    } else {
        0
    };
    let tc = inputs.complexity;
    Ok(PromptBundle {
        role_instruction: inputs.role_instruction.unwrap_or(DEFAULT_ROLE).to_string(),
        assessment_title: a.title.clone(),
        reading_standards: a.standards.clone(),
        fluency_skills: a.fluency_skills.clone(),
        text_complexity: TextComplexity {
            flesch_kincaid_grade: round_to(tc.flesch_kincaid_grade, 1),
            ..tc.clone()
        },
        score_distribution: BundleScores {
            n_students: s.student_totals.len(),
            n_questions: s.n_questions,
            mean_total: round_to(s.mean, 2),
            std_total: round_to(s.std, 2),
            min_total: s.min,
            max_total: s.max,
            mean_percent,
            histogram: s.histogram.clone(),
        },
        question_performance: questions,
        cluster_profiles: inputs
            .profiles
            .iter()
            .map(|p| BundleCluster {
                cluster: p.cluster + 1,
                size: p.student_ids.len(),
                student_ids: p.student_ids.clone(),
                features: p
                    .features
                    .iter()
                    .map(|f| BundleFeature {
                        feature: f.feature.clone(),
                        z: round_to(f.z, 2),
                        tag: f.tag,
                    })
                    .collect(),
            })
            .collect(),
        cluster_quality: BundleQuality {
            method: inputs.quality.method.to_string(),
            k: inputs.quality.k,
            avg_within_cluster_variance: round_to(inputs.quality.avg_within_cluster_variance, 3),
            silhouette: round_to(inputs.quality.silhouette, 3),
        },
        outliers: inputs
            .outliers
            .iter()
            .map(|o| BundleOutlier {
                student_id: o.student_id.clone(),
                distance: round_to(o.distance, 2),
            })
            .collect(),
    })
}

/// Substitutes `{{name}}` placeholders. Every placeholder in the template
/// must have a value; values are inserted verbatim and not rescanned.
pub fn render_template(template: &str, vars: &[(&str, String)]) -> Result<String, AgentError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or_else(|| AgentError::Template {
            placeholder: after.chars().take(20).collect(),
        })?;
        let name = after[..end].trim();
        let value = vars
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| v)
            .ok_or_else(|| AgentError::Template {
                placeholder: name.to_string(),
            })?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn build_curator_prompt(bundle: &PromptBundle, template: &str) -> Result<String, AgentError> {
    let json = serde_json::to_string_pretty(bundle).map_err(|e| AgentError::Json(e.to_string()))?;
    let sections = REQUIRED_SECTIONS
        .iter()
        .map(|s| format!("## {s}"))
        .collect::<Vec<_>>()
        .join("\n");
    render_template(
        template,
        &[
            ("role_instruction", bundle.role_instruction.clone()),
            ("assessment_title", bundle.assessment_title.clone()),
            ("section_list", sections),
            ("bundle_json", json),
        ],
    )
}

/// The JSON bundle embedded in a curator prompt (the last ```json block).
pub fn extract_bundle(prompt: &str) -> Option<PromptBundle> {
    let start = prompt.rfind("```json")? + "```json".len();
    let body = &prompt[start..];
    let end = body.find("```")?;
    serde_json::from_str(body[..end].trim()).ok()
}
