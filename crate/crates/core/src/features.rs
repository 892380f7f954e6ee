//! Per-student gaze features and the standardized cohort matrix.
//!
//! Five gaze metrics (gaze-based WPM, line coverage, dwell time, fixation
//! dispersion and saccade regression rate) are computed per assessment
//! phase and assembled into ten columns, in this order:
//!
//! ```text
//! norm_qa_coverage_line_%            norm_qa_dwell_time_quiz
//! norm_coldread_coverage_line_%      norm_coldread_gaze_wpm_median
//! norm_qa_saccade_regression_rate_%  norm_coldread_saccade_regression_rate_%
//! norm_qa_fix_dispersion_mean        norm_coldread_fix_dispersion_mean
//! norm_qa_dwell_time_pdf             norm_coldread_dwell_time_pdf
//! ```
//!
//! Windowed metrics use consecutive 10-second windows anchored at the start
//! of the phase; a fixation belongs to the window containing its start.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use thiserror::Error;

use crate::aoi::PhaseSegments;
use crate::gaze_events::{derive_saccades, Fixation, Saccade};
use crate::ingest::{AoiKind, AoiLayout, ScreenGeometry, SessionTimeline};

pub const FEATURE_NAMES: [&str; 10] = [
    "norm_qa_coverage_line_%",
    "norm_coldread_coverage_line_%",
    "norm_qa_saccade_regression_rate_%",
    "norm_qa_fix_dispersion_mean",
    "norm_qa_dwell_time_pdf",
    "norm_qa_dwell_time_quiz",
    "norm_coldread_gaze_wpm_median",
    "norm_coldread_saccade_regression_rate_%",
    "norm_coldread_fix_dispersion_mean",
    "norm_coldread_dwell_time_pdf",
];

pub const N_FEATURES: usize = FEATURE_NAMES.len();

pub const WINDOW_S: f64 = 10.0;

/// A windowed or ratio metric had nothing to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no signal for {metric}")]
pub struct NoSignal {
    pub metric: &'static str,
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("empty cohort")]
    EmptyCohort,
    #[error("cannot impute {feature}: {reason}")]
    ImputationImpossible { feature: String, reason: String },
    #[error("malformed feature table at line {line}: {reason}")]
    BadTable { line: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwellKind {
    Passage,
    Quiz,
}

fn windows(fixations: &[Fixation], phase_start_s: f64) -> BTreeMap<i64, Vec<&Fixation>> {
    let mut map: BTreeMap<i64, Vec<&Fixation>> = BTreeMap::new();
    for f in fixations {
        let w = ((f.start_s - phase_start_s) / WINDOW_S).floor().max(0.0) as i64;
        map.entry(w).or_default().push(f);
    }
    map
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Estimated word position of a fixation on a passage line: words on all
/// earlier lines plus the horizontal fraction of this line times its word
/// count.
pub fn word_position(fixation: &Fixation, layout: &AoiLayout) -> Option<f64> {
    let id = fixation.aoi_id.as_deref()?;
    let region = layout.get(id).filter(|r| r.kind == AoiKind::PassageLine)?;
    let before = layout.words_before(id)? as f64;
    let frac = ((fixation.cx_px - region.bbox.x0) / region.bbox.width()).clamp(0.0, 1.0);
    Some(before + frac * f64::from(region.word_count.unwrap_or(0)))
}

/// Median over 10-s windows of words advanced per minute of fixation time.
///
/// Within a window only fixations on passage lines count: travel is the sum
/// of forward word-position steps between consecutive line fixations, time
/// is their summed duration. Windows with fewer than two line fixations are
/// skipped.
pub fn gaze_wpm_median(fixations: &[Fixation], layout: &AoiLayout, phase_start_s: f64) -> Result<f64, NoSignal> {
    let mut per_window = Vec::new();
    for members in windows(fixations, phase_start_s).values() {
        let on_lines: Vec<(f64, f64)> = members
            .iter()
            .filter_map(|f| word_position(f, layout).map(|p| (p, f.duration_s)))
            .collect();
        if on_lines.len() < 2 {
            continue;
        }
        let travel: f64 = on_lines.windows(2).map(|w| (w[1].0 - w[0].0).max(0.0)).sum();
        let minutes = on_lines.iter().map(|&(_, d)| d).sum::<f64>() / 60.0;
        if minutes > 0.0 {
            per_window.push(travel / minutes);
        }
    }
    if per_window.is_empty() {
        return Err(NoSignal {
            metric: "gaze_wpm_median",
        });
    }
    Ok(median(per_window))
}

/// Fraction of passage lines with at least one fixation.
pub fn line_coverage(fixations: &[Fixation], layout: &AoiLayout) -> f64 {
    let total = layout.line_count();
    if total == 0 {
        return 0.0;
    }
    let touched: BTreeSet<&str> = fixations
        .iter()
        .filter_map(|f| f.aoi_id.as_deref())
        .filter(|id| layout.kind_of(id) == Some(AoiKind::PassageLine))
        .collect();
    touched.len() as f64 / total as f64
}

pub fn dwell_time(fixations: &[Fixation], layout: &AoiLayout, kind: DwellKind) -> f64 {
    fixations
        .iter()
        .filter(|f| {
            f.aoi_id
                .as_deref()
                .and_then(|id| layout.kind_of(id))
                .is_some_and(|k| match kind {
                    DwellKind::Passage => k.is_passage(),
                    DwellKind::Quiz => k.is_quiz(),
                })
        })
        .map(|f| f.duration_s)
        .sum()
}

/// Mean over 10-s windows of the average distance (cm) between each
/// fixation and the window's fixation centroid.
pub fn fixation_dispersion_mean(
    fixations: &[Fixation],
    phase_start_s: f64,
    geom: &ScreenGeometry,
) -> Result<f64, NoSignal> {
    let mut per_window = Vec::new();
    for members in windows(fixations, phase_start_s).values() {
        if members.len() < 2 {
            continue;
        }
        let pts: Vec<(f64, f64)> = members.iter().map(|f| geom.px_to_cm(f.cx_px, f.cy_px)).collect();
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let mean = pts.iter().map(|p| (p.0 - cx).hypot(p.1 - cy)).sum::<f64>() / n;
        per_window.push(mean);
    }
    if per_window.is_empty() {
        return Err(NoSignal {
            metric: "fixation_dispersion_mean",
        });
    }
    Ok(per_window.iter().sum::<f64>() / per_window.len() as f64)
}

/// Fills `line_delta` and `is_regression` on saccades derived from
/// `fixations`. A saccade is a regression when it moves to an earlier line,
/// or stays on the same line and moves left.
pub fn finalize_saccades(saccades: &mut [Saccade], fixations: &[Fixation], layout: &AoiLayout) {
    let ordinal = |f: &Fixation| f.aoi_id.as_deref().and_then(|id| layout.line_ordinal(id));
    for s in saccades.iter_mut() {
        let from = ordinal(&fixations[s.from_idx]);
        let to = ordinal(&fixations[s.to_idx]);
        s.line_delta = match (from, to) {
            (Some(a), Some(b)) => Some(b as i64 - a as i64),
            _ => None,
        };
        s.is_regression = match s.line_delta {
            Some(d) => d < 0 || (d == 0 && s.dx_px < 0.0),
            None => false,
        };
    }
}

/// Percentage of line-to-line saccades that are regressions. Saccades with
/// an end off the passage lines do not count.
pub fn saccade_regression_rate(
    saccades: &[Saccade],
    fixations: &[Fixation],
    layout: &AoiLayout,
) -> Result<f64, NoSignal> {
    let mut s = saccades.to_vec();
    finalize_saccades(&mut s, fixations, layout);
    let qualifying = s.iter().filter(|s| s.line_delta.is_some()).count();
    if qualifying == 0 {
        return Err(NoSignal {
            metric: "saccade_regression_rate",
        });
    }
    let regressions = s.iter().filter(|s| s.is_regression).count();
    Ok(100.0 * regressions as f64 / qualifying as f64)
}

fn regression_rate_for(fixations: &[Fixation], layout: &AoiLayout) -> Result<f64, NoSignal> {
    let no_signal = NoSignal {
        metric: "saccade_regression_rate",
    };
    let saccades = derive_saccades(fixations).map_err(|_| no_signal)?;
    saccade_regression_rate(&saccades, fixations, layout)
}

/// Raw feature values for one student, in [`FEATURE_NAMES`] order.
/// `None` marks a metric with no signal.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentFeatures {
    pub student_id: String,
    pub values: [Option<f64>; N_FEATURES],
}

pub fn extract_student_features(
    student_id: &str,
    segments: &PhaseSegments,
    timeline: &SessionTimeline,
    layout: &AoiLayout,
    geom: &ScreenGeometry,
) -> StudentFeatures {
    let cold = &segments.cold_read;
    let qa = &segments.qa;
    let cold_start = timeline.cold_read.start_s;
    let qa_start = timeline.qa.start_s;
    StudentFeatures {
        student_id: student_id.to_string(),
        values: [
            Some(line_coverage(qa, layout)),
            Some(line_coverage(cold, layout)),
            regression_rate_for(qa, layout).ok(),
            fixation_dispersion_mean(qa, qa_start, geom).ok(),
            Some(dwell_time(qa, layout, DwellKind::Passage)),
            Some(dwell_time(qa, layout, DwellKind::Quiz)),
            gaze_wpm_median(cold, layout, cold_start).ok(),
            regression_rate_for(cold, layout).ok(),
            fixation_dispersion_mean(cold, cold_start, geom).ok(),
            Some(dwell_time(cold, layout, DwellKind::Passage)),
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub student_ids: Vec<String>,
    /// One row per student.
    pub values: Vec<Vec<f64>>,
    pub feature_names: Vec<String>,
    pub column_means: Vec<f64>,
    /// Population standard deviations.
    pub column_stds: Vec<f64>,
    pub standardized: bool,
}

/// A cell filled with its column median.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputation {
    pub student_id: String,
    pub feature: String,
    pub value: f64,
}

fn column_stats(values: &[Vec<f64>], n_cols: usize) -> (Vec<f64>, Vec<f64>) {
    let n = values.len() as f64;
    let means: Vec<f64> = (0..n_cols)
        .map(|j| values.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let stds = (0..n_cols)
        .map(|j| {
            let var = values.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
            var.sqrt()
        })
        .collect();
    (means, stds)
}

impl FeatureMatrix {
    pub fn from_rows(
        student_ids: Vec<String>,
        values: Vec<Vec<f64>>,
        feature_names: Vec<String>,
        standardized: bool,
    ) -> Self {
        let (column_means, column_stds) = column_stats(&values, feature_names.len());
        Self {
            student_ids,
            values,
            feature_names,
            column_means,
            column_stds,
            standardized,
        }
    }

    pub fn n_students(&self) -> usize {
        self.values.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

/// Assembles the raw matrix, sorted by student id. Missing cells are filled
/// with the column median of the students that do have a value.
pub fn build_feature_matrix(
    mut students: Vec<StudentFeatures>,
) -> Result<(FeatureMatrix, Vec<Imputation>), FeatureError> {
    if students.is_empty() {
        return Err(FeatureError::EmptyCohort);
    }
    students.sort_by(|a, b| a.student_id.cmp(&b.student_id));

    let mut medians = [None; N_FEATURES];
    for (j, slot) in medians.iter_mut().enumerate() {
        if students.iter().all(|s| s.values[j].is_some()) {
            continue;
        }
        let present: Vec<f64> = students.iter().filter_map(|s| s.values[j]).collect();
        if students.len() < 2 || present.is_empty() {
            return Err(FeatureError::ImputationImpossible {
                feature: FEATURE_NAMES[j].to_string(),
                reason: if students.len() < 2 {
                    "single-student cohort".into()
                } else {
                    "no student has a value".into()
                },
            });
        }
        *slot = Some(median(present));
    }

    let mut imputations = Vec::new();
    let mut values = Vec::with_capacity(students.len());
    for s in &students {
        let row: Vec<f64> = (0..N_FEATURES)
            .map(|j| match s.values[j] {
                Some(v) => v,
                None => {
                    let v = medians[j].expect("median computed for columns with gaps");
                    log::warn!(
                        "student {}: no signal for {}, imputed column median {v}",
                        s.student_id,
                        FEATURE_NAMES[j]
                    );
                    imputations.push(Imputation {
                        student_id: s.student_id.clone(),
                        feature: FEATURE_NAMES[j].to_string(),
                        value: v,
                    });
                    v
                }
            })
            .collect();
        values.push(row);
    }
    let matrix = FeatureMatrix::from_rows(
        students.into_iter().map(|s| s.student_id).collect(),
        values,
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        false,
    );
    Ok((matrix, imputations))
}

/// Z-scores every column with its population mean and std. Columns with
/// zero spread become all zeros; their names are returned.
pub fn standardize(matrix: &FeatureMatrix) -> (FeatureMatrix, Vec<String>) {
    let (means, stds) = column_stats(&matrix.values, matrix.n_features());
    let mut constant = Vec::new();
    for (j, sd) in stds.iter().enumerate() {
        if *sd == 0.0 {
            log::warn!(
                "feature {} has zero variance; standardized to zeros",
                matrix.feature_names[j]
            );
            constant.push(matrix.feature_names[j].clone());
        }
    }
    let values = matrix
        .values
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &x)| if stds[j] > 0.0 { (x - means[j]) / stds[j] } else { 0.0 })
                .collect()
        })
        .collect();
    let mut out = FeatureMatrix::from_rows(matrix.student_ids.clone(), values, matrix.feature_names.clone(), true);
    // keep the raw statistics so z-values can be mapped back
    out.column_means = means;
    out.column_stds = stds;
    (out, constant)
}

pub fn write_features_csv<W: Write>(writer: W, matrix: &FeatureMatrix) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["student_id".to_string()];
    header.extend(matrix.feature_names.iter().cloned());
    w.write_record(&header)?;
    for (id, row) in matrix.student_ids.iter().zip(&matrix.values) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn read_features_csv<R: Read>(reader: R, standardized: bool) -> Result<FeatureMatrix, FeatureError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| FeatureError::BadTable {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.get(0) != Some("student_id") || header.len() < 2 {
        return Err(FeatureError::BadTable {
            line: 1,
            reason: "header must start with student_id followed by features".into(),
        });
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FeatureError::BadTable {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or(FeatureError::BadTable {
                        line,
                        reason: format!("not a finite number: {v:?}"),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        ids.push(rec[0].to_string());
        values.push(row);
    }
    if ids.is_empty() {
        return Err(FeatureError::EmptyCohort);
    }
    Ok(FeatureMatrix::from_rows(ids, values, names, standardized))
}
