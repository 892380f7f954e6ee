use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::backend::{CompletionRequest, LlmBackend};
use super::{AgentError, REQUIRED_SECTIONS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSection {
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCluster {
    pub name: String,
    pub student_ids: Vec<String>,
    pub characteristics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuratorReport {
    pub raw_markdown: String,
    /// In document order. Required sections use their canonical names.
    pub sections: Vec<ReportSection>,
    pub clusters: Vec<ReportCluster>,
}

impl CuratorReport {
    pub fn section(&self, name: &str) -> Option<&str> {
        self.sections.iter().find(|s| s.title == name).map(|s| s.body.as_str())
    }
}

/// Removes a surrounding ``` fence (with or without a language tag).
pub fn strip_code_fences(text: &str) -> String {
    let t = text.trim();
    if let Some(rest) = t.strip_prefix("```") {
        let body = rest.split_once('\n').map_or("", |(_, b)| b);
        let body = body.trim_end();
        return body.strip_suffix("```").unwrap_or(body).trim().to_string();
    }
    t.to_string()
}

/// A header line: ATX (`#`..`######`) or a line that is entirely bold.
/// Returns the level (bold counts as 2) and the title.
fn header(line: &str) -> Option<(usize, String)> {
    let t = line.trim();
    let hashes = t.chars().take_while(|&c| c == '#').count();
    if (1..=6).contains(&hashes) && t[hashes..].starts_with(' ') {
        return Some((hashes, clean_title(&t[hashes..])));
    }
    let inner = t.strip_prefix("**")?;
    let (title, tail) = inner.split_once("**")?;
    let tail = tail.trim();
    if tail.is_empty() || tail == ":" {
        return Some((2, clean_title(title)));
    }
    None
}

fn clean_title(t: &str) -> String {
    t.trim()
        .trim_matches(|c: char| c == '*' || c == '#')
        .trim()
        .trim_end_matches(':')
        .trim()
        .to_string()
}

fn canonical_section(title: &str) -> Option<&'static str> {
    let lower = title.to_lowercase();
    let lower = lower.trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == ' ');
    REQUIRED_SECTIONS.iter().copied().find(|s| {
        let s_lower = s.to_lowercase();
        lower
            .strip_prefix(&s_lower)
            .is_some_and(|rest| !rest.starts_with(char::is_alphanumeric))
    })
}

fn split_sections(md: &str) -> Vec<ReportSection> {
    let mut sections: Vec<ReportSection> = Vec::new();
    let mut current: Option<ReportSection> = None;
    for line in md.lines() {
        if let Some((level, title)) = header(line) {
            let canon = canonical_section(&title);
            if canon.is_some() || level <= 2 {
                if let Some(s) = current.take() {
                    sections.push(s);
                }
                current = Some(ReportSection {
                    title: canon.map_or(title, str::to_string),
                    body: String::new(),
                });
                continue;
            }
        }
        if let Some(s) = current.as_mut() {
            s.body.push_str(line);
            s.body.push('\n');
        }
    }
    sections.extend(current);
    for s in &mut sections {
        s.body = s.body.trim().to_string();
    }
    sections
}

fn strip_label<'a>(line: &'a str, label: &str) -> Option<&'a str> {
    let t = line.trim().trim_start_matches(['-', '*', ' ']);
    let t = t.trim_start_matches("**");
    let lower = t.to_lowercase();
    if !lower.starts_with(label) {
        return None;
    }
    let rest = &t[label.len()..];
    let rest = rest.trim_start_matches("**").trim_start();
    let rest = rest.strip_prefix(':')?;
    Some(rest.trim_start_matches("**").trim())
}

fn parse_ids(list: &str) -> Vec<String> {
    list.split([',', ';', ' '])
        .map(|s| s.trim_matches(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-')))
        .filter(|s| !s.is_empty() && !s.eq_ignore_ascii_case("and"))
        .map(str::to_string)
        .collect()
}

fn parse_clusters(body: &str) -> Vec<ReportCluster> {
    let mut out: Vec<ReportCluster> = Vec::new();
    let mut in_characteristics = false;
    for line in body.lines() {
        if let Some((_, title)) = header(line) {
            if title.to_lowercase().starts_with("cluster") {
                let name = title
                    .split_once(':')
                    .map_or(title.as_str(), |(_, n)| n)
                    .trim()
                    .to_string();
                out.push(ReportCluster {
                    name,
                    student_ids: Vec::new(),
                    characteristics: Vec::new(),
                });
                in_characteristics = false;
                continue;
            }
        }
        let Some(c) = out.last_mut() else { continue };
        if let Some(ids) = strip_label(line, "students") {
            c.student_ids.extend(parse_ids(ids));
            in_characteristics = false;
        } else if let Some(text) = strip_label(line, "characteristics") {
            if !text.is_empty() {
                c.characteristics.push(text.to_string());
            }
            in_characteristics = true;
        } else if in_characteristics {
            let t = line.trim().trim_start_matches(['-', '*']).trim();
            if !t.is_empty() {
                c.characteristics.push(t.to_string());
            }
        }
    }
    out
}

/// Parses and validates a curator response against the cohort roster.
pub fn parse_report(response: &str, roster: &[String]) -> Result<CuratorReport, AgentError> {
    let md = strip_code_fences(response);
    let sections = split_sections(&md);
    let present: HashSet<&str> = sections.iter().map(|s| s.title.as_str()).collect();
    let missing: Vec<String> = REQUIRED_SECTIONS
        .iter()
        .filter(|s| !present.contains(**s))
        .map(|s| s.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(AgentError::MalformedReport {
            detail: format!("missing sections: {}", missing.join(", ")),
        });
    }
    let clusters_body = sections
        .iter()
        .find(|s| s.title == "Clusters")
        .map_or("", |s| s.body.as_str());
    let clusters = parse_clusters(clusters_body);
    if clusters.is_empty() {
        return Err(AgentError::MalformedReport {
            detail: "the Clusters section has no \"### Cluster <n>: <name>\" subsections".into(),
        });
    }
    let known: HashSet<&str> = roster.iter().map(String::as_str).collect();
    for c in &clusters {
        if let Some(id) = c.student_ids.iter().find(|id| !known.contains(id.as_str())) {
            return Err(AgentError::UnknownStudent { id: id.clone() });
        }
    }
    Ok(CuratorReport {
        raw_markdown: md,
        sections,
        clusters,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CuratorOptions {
    pub retries: usize,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for CuratorOptions {
    fn default() -> Self {
        CuratorOptions {
            retries: 3,
            temperature: 0.7,
            max_tokens: 4096,
        }
    }
}

pub fn repair_prompt(prompt: &str, previous: &str, problem: &AgentError) -> String {
    format!(
        "{prompt}\n\nYour previous answer was rejected: {problem}.\n\
         Previous answer:\n<<<\n{previous}\n>>>\n\
         Write the complete report again and fix this problem. Keep every required header \
         and use only student ids from the data.\n"
    )
}

/// Calls the curator, validates its report and re-prompts with the
/// validation problem up to `options.retries` times.
pub fn generate_report(
    prompt: &str,
    backend: &dyn LlmBackend,
    roster: &[String],
    options: &CuratorOptions,
) -> Result<CuratorReport, AgentError> {
    let mut text = prompt.to_string();
    let mut attempt = 0;
    loop {
        let response = backend.complete(&CompletionRequest {
            prompt: &text,
            temperature: options.temperature,
            max_tokens: options.max_tokens,
        })?;
        match parse_report(&response, roster) {
            Ok(r) => return Ok(r),
            Err(e) if attempt < options.retries => {
                log::warn!("curator attempt {} rejected: {e}", attempt + 1);
                text = repair_prompt(prompt, &response, &e);
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
