//! Input parsing: gaze logs, AOI layouts, session timelines, assessment
//! content and student responses.
//!
//! Every parser validates the invariants of the record it produces and
//! reports failures as [`IngestError`]; nothing in here panics on bad input.
//!
//! File formats:
//!
//! | file | format |
//! |------|--------|
//! | `gaze/{student_id}.csv` | `t_s,x_px,y_px,valid` |
//! | `aoi_layout.json` | array of [`AoiRegion`] |
//! | `timeline/{student_id}.json` | [`SessionTimeline`] |
//! | `assessment.json` | [`AssessmentContent`] |
//! | `responses.csv` | `student_id,question_id,chosen_option,correct,latency_s` |

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const GAZE_HEADER: [&str; 4] = ["t_s", "x_px", "y_px", "valid"];
pub const RESPONSES_HEADER: [&str; 5] = ["student_id", "question_id", "chosen_option", "correct", "latency_s"];

/// Maximum tolerated overlap between two line AOIs on the same page, as a
/// fraction of the smaller box.
pub const MAX_LINE_OVERLAP: f64 = 0.25;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("timestamp decreases at line {line}")]
    NonMonotonicTime { line: u64 },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid region {id}: {reason}")]
    InvalidRegion { id: String, reason: String },
    #[error("line regions {a} and {b} overlap by {fraction:.2} of the smaller box")]
    Overlap { a: String, b: String, fraction: f64 },
    #[error("phase order violated for {student_id}: {reason}")]
    PhaseOrder { student_id: String, reason: String },
    #[error("question {question} cites unknown standard {code}")]
    DanglingStandard { question: String, code: String },
}

pub type Result<T> = std::result::Result<T, IngestError>;

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(s)
}

// ---------------------------------------------------------------------------
// Screen geometry
// ---------------------------------------------------------------------------

/// Physical and pixel size of the display plus the assumed viewing distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenGeometry {
    pub width_cm: f64,
    pub height_cm: f64,
    pub width_px: f64,
    pub height_px: f64,
    pub viewing_distance_cm: f64,
}

impl Default for ScreenGeometry {
    fn default() -> Self {
        Self {
            width_cm: 34.5,
            height_cm: 19.5,
            width_px: 1528.0,
            height_px: 704.0,
            viewing_distance_cm: 60.0,
        }
    }
}

impl ScreenGeometry {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.width_cm,
            self.height_cm,
            self.width_px,
            self.height_px,
            self.viewing_distance_cm,
        ];
        if dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(IngestError::Schema(
                "screen dimensions must be strictly positive".into(),
            ))
        }
    }

    pub fn cm_per_px_x(&self) -> f64 {
        self.width_cm / self.width_px
    }

    pub fn cm_per_px_y(&self) -> f64 {
        self.height_cm / self.height_px
    }

    /// Pixel point to centimetres from the screen's top-left corner.
    pub fn px_to_cm(&self, x_px: f64, y_px: f64) -> (f64, f64) {
        (x_px * self.cm_per_px_x(), y_px * self.cm_per_px_y())
    }

    /// Visual angle, in degrees, subtended by a pixel displacement.
    pub fn visual_angle_deg(&self, dx_px: f64, dy_px: f64) -> f64 {
        let dx = dx_px * self.cm_per_px_x();
        let dy = dy_px * self.cm_per_px_y();
        let d = dx.hypot(dy);
        2.0 * (d / (2.0 * self.viewing_distance_cm)).atan().to_degrees()
    }

    pub fn on_screen(&self, x_px: f64, y_px: f64) -> bool {
        (0.0..self.width_px).contains(&x_px) && (0.0..self.height_px).contains(&y_px)
    }
}

// ---------------------------------------------------------------------------
// Gaze logs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub t_s: f64,
    pub x_px: Option<f64>,
    pub y_px: Option<f64>,
    pub valid: bool,
}

impl GazeSample {
    pub fn valid(t_s: f64, x_px: f64, y_px: f64) -> Self {
        Self {
            t_s,
            x_px: Some(x_px),
            y_px: Some(y_px),
            valid: true,
        }
    }

    pub fn invalid(t_s: f64) -> Self {
        Self {
            t_s,
            x_px: None,
            y_px: None,
            valid: false,
        }
    }

    /// Coordinates of a valid sample.
    pub fn point(&self) -> Option<(f64, f64)> {
        match (self.valid, self.x_px, self.y_px) {
            (true, Some(x), Some(y)) => Some((x, y)),
            _ => None,
        }
    }
}

fn parse_flag(field: &str) -> Option<bool> {
    match field.trim() {
        "1" | "true" | "TRUE" | "True" => Some(true),
        "0" | "false" | "FALSE" | "False" => Some(false),
        _ => None,
    }
}

fn parse_opt_f64(field: &str) -> std::result::Result<Option<f64>, String> {
    let field = field.trim();
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(Some)
        .ok_or_else(|| format!("not a finite number: {field:?}"))
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(IngestError::Schema(format!(
            "expected header {:?}, found {:?}",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn csv_err(e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    IngestError::MalformedRow {
        line,
        reason: e.to_string(),
    }
}

/// Parses a gaze CSV from any reader.
///
/// Rows flagged valid but falling outside the screen are demoted to invalid
/// (their coordinates are kept). Invalid rows are never dropped.
pub fn read_gaze_log<R: Read>(reader: R, geom: &ScreenGeometry) -> Result<Vec<GazeSample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    check_header(rdr.headers().map_err(csv_err)?, &GAZE_HEADER)?;

    let mut out = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| IngestError::MalformedRow { line, reason };

        let t_s = parse_opt_f64(&rec[0])
            .map_err(bad)?
            .ok_or_else(|| bad("missing t_s".into()))?;
        let x_px = parse_opt_f64(&rec[1]).map_err(bad)?;
        let y_px = parse_opt_f64(&rec[2]).map_err(bad)?;
        let mut valid = parse_flag(&rec[3]).ok_or_else(|| bad(format!("bad validity flag {:?}", &rec[3])))?;
        if valid {
            match (x_px, y_px) {
                (Some(x), Some(y)) => {
                    if !geom.on_screen(x, y) {
                        valid = false;
                    }
                }
                _ => return Err(bad("valid row without coordinates".into())),
            }
        }
        if t_s < last_t {
            return Err(IngestError::NonMonotonicTime { line });
        }
        last_t = t_s;
        out.push(GazeSample { t_s, x_px, y_px, valid });
    }
    Ok(out)
}

pub fn parse_gaze_log(path: &Path, geom: &ScreenGeometry) -> Result<Vec<GazeSample>> {
    read_gaze_log(open(path)?, geom)
}

pub fn write_gaze_log<W: Write>(writer: W, samples: &[GazeSample]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GAZE_HEADER)?;
    let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for s in samples {
        w.write_record([
            s.t_s.to_string(),
            fmt(s.x_px),
            fmt(s.y_px),
            if s.valid { "1" } else { "0" }.to_string(),
        ])?;
    }
    w.flush()
}

// ---------------------------------------------------------------------------
// AOI layout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoiKind {
    PassageLine,
    PassagePage,
    QuizPanel,
    QuizQuestion,
}

impl AoiKind {
    pub fn is_passage(self) -> bool {
        matches!(self, AoiKind::PassageLine | AoiKind::PassagePage)
    }

    pub fn is_quiz(self) -> bool {
        matches!(self, AoiKind::QuizPanel | AoiKind::QuizQuestion)
    }

    /// Lower wins when regions nest.
    pub(crate) fn specificity_rank(self) -> u8 {
        match self {
            AoiKind::PassageLine => 0,
            AoiKind::QuizQuestion => 1,
            AoiKind::PassagePage => 2,
            AoiKind::QuizPanel => 3,
        }
    }
}

/// Axis-aligned pixel box, half-open: `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(a: [f64; 4]) -> Self {
        Self {
            x0: a[0],
            y0: a[1],
            x1: a[2],
            y1: a[3],
        }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x0, b.y0, b.x1, b.y1]
    }
}

impl BBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x1.min(other.x1) - self.x0.max(other.x0);
        let h = self.y1.min(other.y1) - self.y0.max(other.y0);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }
}

/// A labelled screen region.
///
/// `page` 0 marks a region that stays on screen regardless of which passage
/// page is shown (the quiz panel, typically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiRegion {
    pub id: String,
    pub kind: AoiKind,
    pub page: u32,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_index: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_count: Option<u32>,
}

impl AoiRegion {
    pub fn visible_on(&self, page: u32) -> bool {
        self.page == 0 || self.page == page
    }
}

/// A validated AOI layout, sorted by `(page, line_index)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AoiLayout {
    regions: Vec<AoiRegion>,
    /// Line ids in global reading order.
    line_order: Vec<String>,
    /// id -> (region index, reading ordinal for lines, words before the line)
    index: BTreeMap<String, (usize, Option<usize>, u64)>,
}

impl AoiLayout {
    pub fn new(mut regions: Vec<AoiRegion>) -> Result<Self> {
        let mut ids = HashSet::new();
        for r in &regions {
            if !ids.insert(r.id.as_str()) {
                return Err(IngestError::InvalidRegion {
                    id: r.id.clone(),
                    reason: "duplicate id".into(),
                });
            }
            let b = &r.bbox;
            let finite = [b.x0, b.y0, b.x1, b.y1].iter().all(|v| v.is_finite());
            if !finite || b.x0 >= b.x1 || b.y0 >= b.y1 {
                return Err(IngestError::InvalidRegion {
                    id: r.id.clone(),
                    reason: "bbox must satisfy x0 < x1 and y0 < y1".into(),
                });
            }
            if r.kind == AoiKind::PassageLine {
                if r.line_index.is_none() {
                    return Err(IngestError::InvalidRegion {
                        id: r.id.clone(),
                        reason: "passage_line requires line_index".into(),
                    });
                }
                if r.word_count.unwrap_or(0) < 1 {
                    return Err(IngestError::InvalidRegion {
                        id: r.id.clone(),
                        reason: "passage_line requires word_count >= 1".into(),
                    });
                }
            }
        }

        regions.sort_by(|a, b| {
            (a.page, a.line_index.unwrap_or(u32::MAX), a.kind, &a.id).cmp(&(
                b.page,
                b.line_index.unwrap_or(u32::MAX),
                b.kind,
                &b.id,
            ))
        });

        let lines: Vec<&AoiRegion> = regions.iter().filter(|r| r.kind == AoiKind::PassageLine).collect();
        for pair in lines.windows(2) {
            if pair[0].page == pair[1].page && pair[0].line_index == pair[1].line_index {
                return Err(IngestError::InvalidRegion {
                    id: pair[1].id.clone(),
                    reason: format!(
                        "line_index {} repeated on page {}",
                        pair[1].line_index.unwrap_or_default(),
                        pair[1].page
                    ),
                });
            }
        }
        for (i, a) in lines.iter().enumerate() {
            for b in lines[i + 1..].iter().take_while(|b| b.page == a.page) {
                let inter = a.bbox.intersection_area(&b.bbox);
                let fraction = inter / a.bbox.area().min(b.bbox.area());
                if fraction > MAX_LINE_OVERLAP {
                    return Err(IngestError::Overlap {
                        a: a.id.clone(),
                        b: b.id.clone(),
                        fraction,
                    });
                }
            }
        }

        let mut index = BTreeMap::new();
        let mut line_order = Vec::new();
        let mut words_before = 0u64;
        for (i, r) in regions.iter().enumerate() {
            if r.kind == AoiKind::PassageLine {
                index.insert(r.id.clone(), (i, Some(line_order.len()), words_before));
                line_order.push(r.id.clone());
                words_before += u64::from(r.word_count.unwrap_or(0));
            } else {
                index.insert(r.id.clone(), (i, None, 0));
            }
        }
        Ok(Self {
            regions,
            line_order,
            index,
        })
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let regions: Vec<AoiRegion> = serde_json::from_str(json).map_err(|e| IngestError::Schema(e.to_string()))?;
        Self::new(regions)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.regions).expect("regions serialize")
    }

    pub fn regions(&self) -> &[AoiRegion] {
        &self.regions
    }

    pub fn get(&self, id: &str) -> Option<&AoiRegion> {
        self.index.get(id).map(|&(i, _, _)| &self.regions[i])
    }

    pub fn kind_of(&self, id: &str) -> Option<AoiKind> {
        self.get(id).map(|r| r.kind)
    }

    /// Position of a line AOI in global reading order (page, then line).
    pub fn line_ordinal(&self, id: &str) -> Option<usize> {
        self.index.get(id).and_then(|&(_, ord, _)| ord)
    }

    /// Words on all lines preceding this one in reading order.
    pub fn words_before(&self, id: &str) -> Option<u64> {
        self.index.get(id).and_then(|&(_, ord, w)| ord.map(|_| w))
    }

    pub fn line_count(&self) -> usize {
        self.line_order.len()
    }

    pub fn count_of(&self, kind: AoiKind) -> usize {
        self.regions.iter().filter(|r| r.kind == kind).count()
    }
}

impl std::ops::Deref for AoiLayout {
    type Target = [AoiRegion];

    fn deref(&self) -> &[AoiRegion] {
        &self.regions
    }
}

pub fn parse_aoi_layout(path: &Path) -> Result<AoiLayout> {
    AoiLayout::from_json_str(&read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Session timeline
// ---------------------------------------------------------------------------

/// Half-open time interval `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(a: [f64; 2]) -> Self {
        Self {
            start_s: a[0],
            end_s: a[1],
        }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.start_s, i.end_s]
    }
}

impl Interval {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t < self.end_s
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionEvent {
    pub question_id: String,
    pub shown_s: f64,
    pub answered_s: f64,
}

/// The passage page on screen from `t_s` until the next page event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageEvent {
    pub t_s: f64,
    pub page: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTimeline {
    pub student_id: String,
    pub cold_read: Interval,
    pub qa: Interval,
    #[serde(default)]
    pub question_events: Vec<QuestionEvent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub page_events: Vec<PageEvent>,
}

impl SessionTimeline {
    pub fn validate(&self) -> Result<()> {
        let order = |reason: String| IngestError::PhaseOrder {
            student_id: self.student_id.clone(),
            reason,
        };
        for (name, iv) in [("cold_read", self.cold_read), ("qa", self.qa)] {
            if !(iv.start_s.is_finite() && iv.end_s.is_finite() && iv.start_s < iv.end_s) {
                return Err(order(format!("{name} interval is empty or not finite")));
            }
        }
        if self.qa.start_s < self.cold_read.end_s {
            return Err(order(format!(
                "qa starts at {} before cold_read ends at {}",
                self.qa.start_s, self.cold_read.end_s
            )));
        }
        for q in &self.question_events {
            if q.answered_s < q.shown_s {
                return Err(order(format!(
                    "question {} answered before it was shown",
                    q.question_id
                )));
            }
        }
        if self.page_events.windows(2).any(|w| w[1].t_s < w[0].t_s) {
            return Err(order("page events out of order".into()));
        }
        Ok(())
    }

    /// Page on screen at time `t`; page 1 when the log has no page events.
    pub fn page_at(&self, t: f64) -> u32 {
        let idx = self.page_events.partition_point(|e| e.t_s <= t);
        if idx == 0 {
            1
        } else {
            self.page_events[idx - 1].page
        }
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let tl: Self = serde_json::from_str(json).map_err(|e| IngestError::Schema(e.to_string()))?;
        tl.validate()?;
        Ok(tl)
    }
}

pub fn parse_session_events(path: &Path) -> Result<SessionTimeline> {
    SessionTimeline::from_json_str(&read_to_string(path)?)
}

// ---------------------------------------------------------------------------
// Responses
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct StudentResponse {
    pub student_id: String,
    pub question_id: String,
    pub chosen_option: String,
    pub correct: bool,
    pub latency_s: f64,
}

pub fn read_responses<R: Read>(reader: R) -> Result<Vec<StudentResponse>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(rdr.headers().map_err(csv_err)?, &RESPONSES_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |reason: String| IngestError::MalformedRow { line, reason };
        let correct = parse_flag(&rec[3]).ok_or_else(|| bad(format!("bad correct flag {:?}", &rec[3])))?;
        let latency_s = parse_opt_f64(&rec[4])
            .map_err(bad)?
            .ok_or_else(|| bad("missing latency_s".into()))?;
        if latency_s < 0.0 {
            return Err(bad(format!("negative latency {latency_s}")));
        }
        if rec[0].trim().is_empty() || rec[1].trim().is_empty() {
            return Err(bad("empty student_id or question_id".into()));
        }
        out.push(StudentResponse {
            student_id: rec[0].trim().to_string(),
            question_id: rec[1].trim().to_string(),
            chosen_option: rec[2].trim().to_string(),
            correct,
            latency_s,
        });
    }
    Ok(out)
}

pub fn parse_responses(path: &Path) -> Result<Vec<StudentResponse>> {
    read_responses(open(path)?)
}

pub fn write_responses<W: Write>(writer: W, responses: &[StudentResponse]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESPONSES_HEADER)?;
    for r in responses {
        w.write_record([
            r.student_id.as_str(),
            r.question_id.as_str(),
            r.chosen_option.as_str(),
            if r.correct { "1" } else { "0" },
            &r.latency_s.to_string(),
        ])?;
    }
    w.flush()
}

// ---------------------------------------------------------------------------
// Assessment content
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub options: Vec<String>,
    pub correct_option: String,
    #[serde(default)]
    pub standard_codes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standard {
    pub code: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentContent {
    pub title: String,
    pub passage_text: String,
    pub questions: Vec<Question>,
    pub standards: Vec<Standard>,
    #[serde(default)]
    pub fluency_skills: Vec<String>,
}

impl AssessmentContent {
    pub fn validate(&self) -> Result<()> {
        let codes: HashSet<&str> = self.standards.iter().map(|s| s.code.as_str()).collect();
        let mut qids = HashSet::new();
        for q in &self.questions {
            if !qids.insert(q.id.as_str()) {
                return Err(IngestError::Schema(format!("duplicate question id {}", q.id)));
            }
            if !q.options.is_empty() && !q.options.contains(&q.correct_option) {
                return Err(IngestError::Schema(format!(
                    "question {}: correct option {:?} is not among its options",
                    q.id, q.correct_option
                )));
            }
            if let Some(code) = q.standard_codes.iter().find(|c| !codes.contains(c.as_str())) {
                return Err(IngestError::DanglingStandard {
                    question: q.id.clone(),
                    code: code.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn question(&self, id: &str) -> Option<&Question> {
        self.questions.iter().find(|q| q.id == id)
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(json).map_err(|e| IngestError::Schema(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }
}

pub fn parse_assessment(path: &Path) -> Result<AssessmentContent> {
    AssessmentContent::from_json_str(&read_to_string(path)?)
}
