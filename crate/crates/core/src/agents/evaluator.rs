use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backend::{CompletionRequest, LlmBackend};
use super::report::strip_code_fences;
use super::AgentError;

pub const EVALUATOR_MARKER: &str = "You are the Report Evaluator.";

pub const CRITERIA: [(&str, &str); 9] = [
    ("clarity", "Is the report easy for a teacher to read and understand?"),
    (
        "relevance",
        "Does it focus on what matters for this class and this assessment?",
    ),
    ("coherence", "Do the sections fit together without contradictions?"),
    ("applicability", "Can the teacher act on it in the classroom?"),
    ("depth_of_insight", "Does it go beyond restating the numbers?"),
    (
        "specificity",
        "Does it name concrete skills, questions, groups and students?",
    ),
    (
        "engagement",
        "Is it written in a way that holds the teacher's attention?",
    ),
    (
        "bias_and_fairness",
        "Does it describe students fairly and without stereotyping?",
    ),
    ("use_of_evidence", "Are claims backed by the data in the prompt?"),
];

pub fn criterion_names() -> impl Iterator<Item = &'static str> {
    CRITERIA.iter().map(|(n, _)| *n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionScore {
    pub criterion: String,
    pub score: u8,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRun {
    pub run: usize,
    /// In the fixed criterion order.
    pub criteria: Vec<CriterionScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionSummary {
    pub criterion: String,
    pub mean: f64,
    /// Counts for scores 1 to 5.
    pub histogram: BTreeMap<u8, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSet {
    pub backend: String,
    pub model: String,
    pub runs: Vec<EvaluationRun>,
    pub per_criterion: Vec<CriterionSummary>,
    /// Counts for scores 1 to 5 over all runs and criteria.
    pub histogram: BTreeMap<u8, usize>,
}

pub fn build_evaluator_prompt(curator_prompt: &str, report_markdown: &str) -> String {
    let mut criteria = String::new();
    for (name, question) in CRITERIA {
        criteria.push_str(&format!("- {name}: {question}\n"));
    }
    let example = CRITERIA
        .iter()
        .map(|(n, _)| format!("  \"{n}\": {{\"score\": <1-5>, \"justification\": \"<one or two sentences>\"}}"))
        .collect::<Vec<_>>()
        .join(",\n");
    format!(
        "{EVALUATOR_MARKER}\n\
         You review reports that an assistant wrote for a teacher. Judge the report below against \
         the original prompt it answered, on each criterion, using a 1 (poor) to 5 (excellent) scale.\n\n\
         Criteria:\n{criteria}\n\
         Reply with a single JSON object and nothing else, with exactly these nine keys:\n{{\n{example}\n}}\n\
         Scores are integers from 1 to 5.\n\n\
         <<<ORIGINAL PROMPT\n{curator_prompt}\nORIGINAL PROMPT>>>\n\n\
         <<<REPORT\n{report_markdown}\nREPORT>>>\n"
    )
}

fn malformed(msg: impl Into<String>) -> AgentError {
    AgentError::MalformedEvaluation(msg.into())
}

/// Parses one evaluator reply. The reply must hold a JSON object with
/// exactly the nine criteria, each with an integer score in 1..=5.
pub fn parse_evaluation(response: &str, run: usize) -> Result<EvaluationRun, AgentError> {
    let text = strip_code_fences(response);
    let start = text.find('{').ok_or_else(|| malformed("no JSON object"))?;
    let end = text.rfind('}').ok_or_else(|| malformed("no JSON object"))?;
    if end < start {
        return Err(malformed("no JSON object"));
    }
    let v: serde_json::Value = serde_json::from_str(&text[start..=end]).map_err(|e| malformed(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| malformed("top level is not an object"))?;
    if obj.len() != CRITERIA.len() {
        return Err(malformed(format!("expected 9 criteria, found {}", obj.len())));
    }
    let mut criteria = Vec::with_capacity(CRITERIA.len());
    for name in criterion_names() {
        let entry = obj
            .get(name)
            .ok_or_else(|| malformed(format!("missing criterion {name}")))?;
        let score = entry
            .get("score")
            .and_then(serde_json::Value::as_u64)
            .filter(|s| (1..=5).contains(s))
            .ok_or_else(|| malformed(format!("{name}: score must be an integer from 1 to 5")))?;
        let justification = entry
            .get("justification")
            .and_then(serde_json::Value::as_str)
            .unwrap_or_default()
            .to_string();
        criteria.push(CriterionScore {
            criterion: name.to_string(),
            score: score as u8,
            justification,
        });
    }
    Ok(EvaluationRun { run, criteria })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluatorOptions {
    pub runs: usize,
    pub temperature: f64,
    pub max_tokens: u32,
    /// Concurrent requests in flight.
    pub concurrency: usize,
}

impl Default for EvaluatorOptions {
    fn default() -> Self {
        EvaluatorOptions {
            runs: 5,
            temperature: 0.2,
            max_tokens: 2048,
            concurrency: 2,
        }
    }
}

fn run_once(
    prompt: &str,
    backend: &dyn LlmBackend,
    options: &EvaluatorOptions,
    run: usize,
) -> Result<EvaluationRun, AgentError> {
    let request = |p: &str| {
        backend.complete(&CompletionRequest {
            prompt: p,
            temperature: options.temperature,
            max_tokens: options.max_tokens,
        })
    };
    let first = request(prompt)?;
    match parse_evaluation(&first, run) {
        Ok(r) => Ok(r),
        Err(e) => {
            log::warn!("evaluation run {run} rejected: {e}");
            let repair = format!(
                "{prompt}\n\nYour previous reply could not be used: {e}.\n\
                 Reply again with only the JSON object described above.\n"
            );
            parse_evaluation(&request(&repair)?, run)
        }
    }
}

fn empty_histogram() -> BTreeMap<u8, usize> {
    (1..=5).map(|s| (s, 0)).collect()
}

pub fn aggregate(runs: Vec<EvaluationRun>, backend: &str, model: &str) -> EvaluationSet {
    let mut histogram = empty_histogram();
    let per_criterion = criterion_names()
        .enumerate()
        .map(|(i, name)| {
            let mut h = empty_histogram();
            let mut sum = 0.0;
            for r in &runs {
                let s = r.criteria[i].score;
                *h.entry(s).or_default() += 1;
                *histogram.entry(s).or_default() += 1;
                sum += f64::from(s);
            }
            CriterionSummary {
                criterion: name.to_string(),
                mean: if runs.is_empty() { 0.0 } else { sum / runs.len() as f64 },
                histogram: h,
            }
        })
        .collect();
    EvaluationSet {
        backend: backend.to_string(),
        model: model.to_string(),
        runs,
        per_criterion,
        histogram,
    }
}

/// Runs the evaluator `options.runs` times, at most `options.concurrency`
/// requests at once. Results are kept in run order.
pub fn evaluate_report(
    curator_prompt: &str,
    report_markdown: &str,
    backend: &dyn LlmBackend,
    options: &EvaluatorOptions,
) -> Result<EvaluationSet, AgentError> {
    let prompt = build_evaluator_prompt(curator_prompt, report_markdown);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.concurrency.max(1))
        .build()
        .map_err(|e| AgentError::Backend(super::BackendError::Transport(e.to_string())))?;
    let results: Vec<Result<EvaluationRun, AgentError>> = pool.install(|| {
        (0..options.runs)
            .into_par_iter()
            .map(|i| run_once(&prompt, backend, options, i))
            .collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(runs, backend.name(), backend.model_id()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reply(n: usize, score: u64) -> String {
        let m: serde_json::Map<String, serde_json::Value> = criterion_names()
            .take(n)
            .map(|c| {
                (
                    c.to_string(),
                    serde_json::json!({"score": score, "justification": "ok"}),
                )
            })
            .collect();
        serde_json::Value::Object(m).to_string()
    }

    #[test]
    fn parses_nine() {
        let r = parse_evaluation(&format!("```json\n{}\n```", reply(9, 4)), 0).unwrap();
        assert_eq!(r.criteria.len(), 9);
        assert!(r.criteria.iter().all(|c| c.score == 4));
    }

    #[test]
    fn rejects_eight_and_out_of_range() {
        assert!(parse_evaluation(&reply(8, 4), 0).is_err());
        assert!(parse_evaluation(&reply(9, 6), 0).is_err());
        assert!(parse_evaluation(&reply(9, 0), 0).is_err());
        assert!(parse_evaluation("no json here", 0).is_err());
    }

    #[test]
    fn aggregate_all_fours() {
        let runs: Vec<_> = (0..5).map(|i| parse_evaluation(&reply(9, 4), i).unwrap()).collect();
        let set = aggregate(runs, "mock", "m");
        assert!(set.per_criterion.iter().all(|c| c.mean == 4.0));
        assert_eq!(set.histogram[&4], 45);
        assert_eq!(set.histogram.values().sum::<usize>(), 45);
    }

    #[test]
    fn prompt_embeds_inputs() {
        let p = build_evaluator_prompt("ORIGINAL", "REPORT BODY");
        assert!(p.starts_with(EVALUATOR_MARKER));
        assert!(p.contains("ORIGINAL") && p.contains("REPORT BODY"));
        for c in criterion_names() {
            assert!(p.contains(c));
        }
    }
}
