//! Readability of the passage and the cohort's score distribution.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{AssessmentContent, StudentResponse};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextMetricsError {
    #[error("text contains no words")]
    EmptyText,
    #[error("response references unknown question {question_id:?} (student {student_id})")]
    UnknownQuestion { student_id: String, question_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextComplexity {
    pub word_count: usize,
    pub sentence_count: usize,
    pub syllable_count: usize,
    pub flesch_kincaid_grade: f64,
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate. Counts maximal runs of `aeiouy`, drops a
/// trailing silent `e` (but not in a consonant + `le` ending), minimum 1.
pub fn syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let mut count = 0usize;
    let mut prev_vowel = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev_vowel {
            count += 1;
        }
        prev_vowel = v;
    }
    let n = w.len();
    if n > 0 && w[n - 1] == 'e' {
        let consonant_le = n >= 3 && w[n - 2] == 'l' && !is_vowel(w[n - 3]);
        if !consonant_le {
            count = count.saturating_sub(1);
        }
    }
    count.max(1)
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| {
            t.chars()
                .filter(|c| c.is_alphanumeric() || *c == '\'')
                .collect::<String>()
        })
        .filter(|w| w.chars().any(char::is_alphanumeric))
        .collect()
}

fn sentence_count(text: &str) -> usize {
    text.split(['.', '!', '?'])
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .count()
        .max(1)
}

pub fn flesch_kincaid(text: &str) -> Result<TextComplexity, TextMetricsError> {
    let words = words(text);
    if words.is_empty() {
        return Err(TextMetricsError::EmptyText);
    }
    let word_count = words.len();
    let sentence_count = sentence_count(text);
    let syllable_count: usize = words.iter().map(|w| syllables(w)).sum();
    let grade =
        0.39 * (word_count as f64 / sentence_count as f64) + 11.8 * (syllable_count as f64 / word_count as f64) - 15.59;
    Ok(TextComplexity {
        word_count,
        sentence_count,
        syllable_count,
        flesch_kincaid_grade: grade,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionAccuracy {
    pub question_id: String,
    pub respondents: usize,
    pub correct: usize,
    /// `None` when nobody answered.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentTotal {
    pub student_id: String,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDistribution {
    pub n_questions: usize,
    /// In assessment order.
    pub questions: Vec<QuestionAccuracy>,
    /// Sorted by student id.
    pub student_totals: Vec<StudentTotal>,
    pub mean: f64,
    /// Population standard deviation of the totals.
    pub std: f64,
    pub min: usize,
    pub max: usize,
    /// `histogram[s]` = number of students with total `s`.
    pub histogram: Vec<usize>,
}

pub fn score_distribution(
    responses: &[StudentResponse],
    assessment: &AssessmentContent,
) -> Result<ScoreDistribution, TextMetricsError> {
    let index: HashMap<&str, usize> = assessment
        .questions
        .iter()
        .enumerate()
        .map(|(i, q)| (q.id.as_str(), i))
        .collect();
    let mut respondents = vec![0usize; index.len()];
    let mut correct = vec![0usize; index.len()];
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for r in responses {
        let q = *index
            .get(r.question_id.as_str())
            .ok_or_else(|| TextMetricsError::UnknownQuestion {
                student_id: r.student_id.clone(),
                question_id: r.question_id.clone(),
            })?;
        respondents[q] += 1;
        let t = totals.entry(r.student_id.as_str()).or_insert(0);
        if r.correct {
            correct[q] += 1;
            *t += 1;
        }
    }

    let questions = assessment
        .questions
        .iter()
        .enumerate()
        .map(|(i, q)| QuestionAccuracy {
            question_id: q.id.clone(),
            respondents: respondents[i],
            correct: correct[i],
            accuracy: (respondents[i] > 0).then(|| correct[i] as f64 / respondents[i] as f64),
        })
        .collect();

    let values: Vec<usize> = totals.values().copied().collect();
    let n = values.len() as f64;
    let (mean, std) = if values.is_empty() {
        (0.0, 0.0)
    } else {
        let m = values.iter().sum::<usize>() as f64 / n;
        let v = values.iter().map(|&t| (t as f64 - m).powi(2)).sum::<f64>() / n;
        (m, v.sqrt())
    };
    let max = values.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; assessment.questions.len().max(max) + 1];
    for &t in &values {
        histogram[t] += 1;
    }
    Ok(ScoreDistribution {
        n_questions: assessment.questions.len(),
        questions,
        student_totals: totals
            .into_iter()
            .map(|(id, total)| StudentTotal {
                student_id: id.to_string(),
                total,
            })
            .collect(),
        mean,
        std,
        min: values.iter().copied().min().unwrap_or(0),
        max,
        histogram,
    })
}
