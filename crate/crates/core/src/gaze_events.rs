//! Velocity-threshold (I-VT) fixation detection.
//!
//! The detector follows the usual screen-based I-VT chain: gap fill-in,
//! optional noise reduction, windowed angular velocity, threshold
//! classification, merging of adjacent fixations and a minimum-duration
//! filter. Saccades are then derived between consecutive fixations.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{GazeSample, ScreenGeometry};

pub const FIXATION_HEADER: [&str; 7] = ["start_s", "end_s", "duration_s", "cx_px", "cy_px", "aoi_id", "phase"];

#[derive(Debug, Error)]
pub enum GazeError {
    #[error("insufficient data: need at least {needed} {what}, found {found}")]
    InsufficientData {
        what: &'static str,
        needed: usize,
        found: usize,
    },
    #[error("invalid fixation export at line {line}: {reason}")]
    BadExport { line: u64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    ColdRead,
    Qa,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::ColdRead => "cold_read",
            Phase::Qa => "qa",
        }
    }

    pub fn parse(s: &str) -> Option<Phase> {
        match s {
            "cold_read" => Some(Phase::ColdRead),
            "qa" => Some(Phase::Qa),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixation {
    pub start_s: f64,
    pub end_s: f64,
    pub duration_s: f64,
    pub cx_px: f64,
    pub cy_px: f64,
    pub aoi_id: Option<String>,
    pub phase: Option<Phase>,
}

impl Fixation {
    pub fn new(start_s: f64, end_s: f64, cx_px: f64, cy_px: f64) -> Self {
        Self {
            start_s,
            end_s,
            duration_s: end_s - start_s,
            cx_px,
            cy_px,
            aoi_id: None,
            phase: None,
        }
    }

    pub fn midpoint_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Saccade {
    pub from_idx: usize,
    pub to_idx: usize,
    pub dx_px: f64,
    pub dy_px: f64,
    /// Target line minus source line in reading order, when both ends sit on
    /// passage lines.
    pub line_delta: Option<i64>,
    pub is_regression: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseFilter {
    #[default]
    None,
    /// Centered moving median over `window` samples (odd).
    MovingMedian { window: usize },
    /// Centered moving average over `window` samples (odd).
    MovingAverage { window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IvtParams {
    pub velocity_threshold_deg_s: f64,
    pub velocity_window_ms: f64,
    pub gap_fill_max_ms: f64,
    pub merge_max_gap_ms: f64,
    pub merge_max_angle_deg: f64,
    pub min_fixation_duration_ms: f64,
    pub noise_filter: NoiseFilter,
}

impl Default for IvtParams {
    fn default() -> Self {
        Self {
            velocity_threshold_deg_s: 30.0,
            velocity_window_ms: 20.0,
            gap_fill_max_ms: 75.0,
            merge_max_gap_ms: 75.0,
            merge_max_angle_deg: 0.5,
            min_fixation_duration_ms: 60.0,
            noise_filter: NoiseFilter::None,
        }
    }
}

impl IvtParams {
    pub fn validate(&self) -> Result<(), String> {
        let vals = [
            self.velocity_threshold_deg_s,
            self.velocity_window_ms,
            self.gap_fill_max_ms,
            self.merge_max_gap_ms,
            self.merge_max_angle_deg,
            self.min_fixation_duration_ms,
        ];
        if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("all I-VT parameters must be positive".into());
        }
        match self.noise_filter {
            NoiseFilter::MovingMedian { window } | NoiseFilter::MovingAverage { window }
                if window == 0 || window % 2 == 0 =>
            {
                Err("noise filter window must be odd and positive".into())
            }
            _ => Ok(()),
        }
    }
}

// Slack for timestamps that went through a decimal round-trip.
const TIME_EPS_MS: f64 = 1e-6;

/// Linear interpolation over short runs of missing samples.
///
/// A run's length is measured from its first missing sample to the next
/// valid one, so three dropped samples at 60 Hz count as 50 ms. Runs at the
/// start or end of the log have no flanking sample and stay invalid.
pub fn fill_gaps(samples: &[GazeSample], max_gap_ms: f64) -> Vec<GazeSample> {
    let mut out = samples.to_vec();
    let n = samples.len();
    let mut i = 0;
    while i < n {
        if samples[i].point().is_some() {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < n && samples[i].point().is_none() {
            i += 1;
        }
        if run_start == 0 || i == n {
            continue;
        }
        let before = samples[run_start - 1];
        let after = samples[i];
        let gap_ms = (after.t_s - samples[run_start].t_s) * 1000.0;
        if gap_ms > max_gap_ms + TIME_EPS_MS {
            continue;
        }
        let (x0, y0) = before.point().expect("flanking sample is valid");
        let (x1, y1) = after.point().expect("flanking sample is valid");
        let span = after.t_s - before.t_s;
        for s in &mut out[run_start..i] {
            let f = if span > 0.0 { (s.t_s - before.t_s) / span } else { 0.5 };
            *s = GazeSample::valid(s.t_s, x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        }
    }
    out
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn apply_noise_filter(samples: &[GazeSample], filter: NoiseFilter) -> Vec<GazeSample> {
    let (window, use_median) = match filter {
        NoiseFilter::None => return samples.to_vec(),
        NoiseFilter::MovingMedian { window } => (window, true),
        NoiseFilter::MovingAverage { window } => (window, false),
    };
    let half = window / 2;
    let mut out = samples.to_vec();
    for i in 0..samples.len() {
        if samples[i].point().is_none() {
            continue;
        }
        // shrink the window symmetrically so it only spans valid samples
        let mut h = 0;
        while h < half
            && i > h
            && i + h + 1 < samples.len()
            && samples[i - h - 1].point().is_some()
            && samples[i + h + 1].point().is_some()
        {
            h += 1;
        }
        let pts: Vec<(f64, f64)> = samples[i - h..=i + h].iter().filter_map(GazeSample::point).collect();
        let (mut xs, mut ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let (x, y) = if use_median {
            (median(&mut xs), median(&mut ys))
        } else {
            let n = xs.len() as f64;
            (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n)
        };
        out[i] = GazeSample::valid(samples[i].t_s, x, y);
    }
    out
}

/// Angular velocity (deg/s) per sample over a centered window.
///
/// The window spans samples within half the window length on either side;
/// when that leaves a side empty (e.g. 20 ms at 60 Hz) it is widened to the
/// adjacent sample. Only valid samples take part, and a sample with no valid
/// neighbour at all gets no velocity.
pub fn angular_velocities(samples: &[GazeSample], window_ms: f64, geom: &ScreenGeometry) -> Vec<Option<f64>> {
    let half_s = window_ms / 2000.0 + TIME_EPS_MS / 1000.0;
    let n = samples.len();
    (0..n)
        .map(|i| {
            samples[i].point()?;
            let t = samples[i].t_s;
            let mut left = i;
            while left > 0 && samples[left - 1].point().is_some() && t - samples[left - 1].t_s <= half_s {
                left -= 1;
            }
            if left == i && i > 0 && samples[i - 1].point().is_some() {
                left = i - 1;
            }
            let mut right = i;
            while right + 1 < n && samples[right + 1].point().is_some() && samples[right + 1].t_s - t <= half_s {
                right += 1;
            }
            if right == i && i + 1 < n && samples[i + 1].point().is_some() {
                right = i + 1;
            }
            if left == right {
                return None;
            }
            let (x0, y0) = samples[left].point()?;
            let (x1, y1) = samples[right].point()?;
            let dt = samples[right].t_s - samples[left].t_s;
            (dt > 0.0).then(|| geom.visual_angle_deg(x1 - x0, y1 - y0) / dt)
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Candidate {
    start_s: f64,
    end_s: f64,
    sum_x: f64,
    sum_y: f64,
    count: usize,
}

impl Candidate {
    fn centroid(&self) -> (f64, f64) {
        (self.sum_x / self.count as f64, self.sum_y / self.count as f64)
    }
}

/// Nominal sample period: median of positive inter-sample intervals.
fn nominal_period(samples: &[GazeSample]) -> f64 {
    let mut dts: Vec<f64> = samples
        .windows(2)
        .map(|w| w[1].t_s - w[0].t_s)
        .filter(|dt| *dt > 0.0)
        .collect();
    if dts.is_empty() {
        0.0
    } else {
        median(&mut dts)
    }
}

/// Detects fixations in a time-ordered (and normally gap-filled) trace.
///
/// Each fixation sample is taken to cover one nominal sample period, so a
/// fixation ends one period after its last sample (or at the next sample,
/// whichever is earlier).
pub fn detect_fixations_ivt(
    samples: &[GazeSample],
    params: &IvtParams,
    geom: &ScreenGeometry,
) -> Result<Vec<Fixation>, GazeError> {
    let n_valid = samples.iter().filter(|s| s.point().is_some()).count();
    if n_valid < 2 {
        return Err(GazeError::InsufficientData {
            what: "valid samples",
            needed: 2,
            found: n_valid,
        });
    }
    let filtered = apply_noise_filter(samples, params.noise_filter);
    let velocity = angular_velocities(&filtered, params.velocity_window_ms, geom);
    let period = nominal_period(&filtered);

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut current: Option<Candidate> = None;
    for (i, s) in filtered.iter().enumerate() {
        let is_fix = velocity[i].is_some_and(|v| v < params.velocity_threshold_deg_s);
        if !is_fix {
            if let Some(c) = current.take() {
                candidates.push(c);
            }
            continue;
        }
        let (x, y) = s.point().expect("velocity implies a valid sample");
        let end = match filtered.get(i + 1) {
            Some(next) => (s.t_s + period).min(next.t_s),
            None => s.t_s + period,
        };
        let c = current.get_or_insert(Candidate {
            start_s: s.t_s,
            end_s: end,
            sum_x: 0.0,
            sum_y: 0.0,
            count: 0,
        });
        c.end_s = end;
        c.sum_x += x;
        c.sum_y += y;
        c.count += 1;
    }
    if let Some(c) = current.take() {
        candidates.push(c);
    }

    let mut merged: Vec<Candidate> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if let Some(prev) = merged.last_mut() {
            let gap_ms = (c.start_s - prev.end_s) * 1000.0;
            let (px, py) = prev.centroid();
            let (cx, cy) = c.centroid();
            let angle = geom.visual_angle_deg(cx - px, cy - py);
            if gap_ms <= params.merge_max_gap_ms + TIME_EPS_MS && angle <= params.merge_max_angle_deg {
                prev.end_s = c.end_s;
                prev.sum_x += c.sum_x;
                prev.sum_y += c.sum_y;
                prev.count += c.count;
                continue;
            }
        }
        merged.push(c);
    }

    Ok(merged
        .into_iter()
        .filter(|c| (c.end_s - c.start_s) * 1000.0 + TIME_EPS_MS >= params.min_fixation_duration_ms)
        .map(|c| {
            let (x, y) = c.centroid();
            Fixation::new(c.start_s, c.end_s, x, y)
        })
        .collect())
}

pub fn derive_saccades(fixations: &[Fixation]) -> Result<Vec<Saccade>, GazeError> {
    if fixations.len() < 2 {
        return Err(GazeError::InsufficientData {
            what: "fixations",
            needed: 2,
            found: fixations.len(),
        });
    }
    Ok(fixations
        .windows(2)
        .enumerate()
        .map(|(i, w)| Saccade {
            from_idx: i,
            to_idx: i + 1,
            dx_px: w[1].cx_px - w[0].cx_px,
            dy_px: w[1].cy_px - w[0].cy_px,
            line_delta: None,
            is_regression: false,
        })
        .collect())
}

pub fn write_fixations_csv<W: Write>(writer: W, fixations: &[Fixation]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(FIXATION_HEADER)?;
    for f in fixations {
        w.write_record([
            f.start_s.to_string(),
            f.end_s.to_string(),
            f.duration_s.to_string(),
            f.cx_px.to_string(),
            f.cy_px.to_string(),
            f.aoi_id.clone().unwrap_or_default(),
            f.phase.map(Phase::as_str).unwrap_or("").to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_fixations_csv<R: Read>(reader: R) -> Result<Vec<Fixation>, GazeError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let bad = |line: u64, reason: String| GazeError::BadExport { line, reason };
    let header = rdr.headers().map_err(|e| bad(1, e.to_string()))?;
    if header.iter().collect::<Vec<_>>() != FIXATION_HEADER {
        return Err(bad(1, format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, GazeError> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| bad(line, format!("field {} is not a number", FIXATION_HEADER[i])))
        };
        let phase = match &rec[6] {
            "" => None,
            p => Some(Phase::parse(p).ok_or_else(|| bad(line, format!("unknown phase {p:?}")))?),
        };
        out.push(Fixation {
            start_s: num(0)?,
            end_s: num(1)?,
            duration_s: num(2)?,
            cx_px: num(3)?,
            cy_px: num(4)?,
            aoi_id: (!rec[5].is_empty()).then(|| rec[5].to_string()),
            phase,
        });
    }
    Ok(out)
}
