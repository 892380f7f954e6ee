//! Clustering of the standardized feature matrix and its validation.
//!
//! Three methods are available (K-Means, full-covariance GMM, normalized
//! spectral clustering). Each is swept over a range of cluster counts and
//! the count with the best silhouette is kept. The chosen model is then
//! checked with per-feature one-way ANOVA, profiled (centroid z-values with
//! qualitative tags) and screened for outlying students.
//!
//! Data is passed as rows (`&[Vec<f64>]`), one per student.

mod anova;
pub mod eigen;
mod gmm;
mod kmeans;
mod metrics;
pub mod special;
mod spectral;

use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use anova::{anova_one_way, anova_per_feature, AnovaResult, P_FLOOR};
pub use gmm::{gmm_em, gmm_fit, GmmFit};
pub use kmeans::{inertia, kmeans, kmeans_restarts, KMeansRun};
pub use metrics::{silhouette, within_cluster_variance};
pub use spectral::{affinity_matrix, normalized_laplacian, spectral, spectral_embedding};

pub const DEFAULT_GAMMA: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("covariance of component {component} is not positive definite")]
    SingularCovariance { component: usize },
    #[error("affinity graph is disconnected: point {index} has zero degree")]
    DisconnectedGraph { index: usize },
    #[error("all points share one cluster")]
    SingleCluster,
    #[error("{method} with k={k} left a cluster without members")]
    EmptyCluster { method: Method, k: usize },
    #[error("labels ({labels}) do not match data rows ({rows})")]
    LabelMismatch { labels: usize, rows: usize },
}

pub type Result<T> = std::result::Result<T, ClusterError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Kmeans,
    Gmm,
    Spectral,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Kmeans, Method::Gmm, Method::Spectral];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Kmeans => "kmeans",
            Method::Gmm => "gmm",
            Method::Spectral => "spectral",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "kmeans" => Ok(Method::Kmeans),
            "gmm" => Ok(Method::Gmm),
            "spectral" => Ok(Method::Spectral),
            other => Err(format!("unknown clustering method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Extras {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub method: Method,
    pub k: usize,
    /// Cluster index per row, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Member means, one row per cluster.
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
    pub extras: Extras,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    pub method: Method,
    pub k: usize,
    pub avg_within_cluster_variance: f64,
    pub silhouette: f64,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

pub(crate) fn check_finite(data: &[Vec<f64>]) -> Result<()> {
    let d = data.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(ClusterError::DegenerateData("no features".into()));
    }
    if data.iter().any(|r| r.len() != d) {
        return Err(ClusterError::DegenerateData("ragged rows".into()));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ClusterError::DegenerateData("non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn check_k(data: &[Vec<f64>], k: usize) -> Result<()> {
    if k < 2 {
        return Err(ClusterError::InvalidK(k));
    }
    check_finite(data)?;
    if data.len() <= k {
        return Err(ClusterError::DegenerateData(format!(
            "need more than k={k} points, got {}",
            data.len()
        )));
    }
    Ok(())
}

/// Renumbers labels by order of first appearance.
pub fn canonicalize_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Member mean per cluster; `None` for a cluster without members.
pub fn member_means(data: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Option<Vec<f64>>> {
    let d = data.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in data.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(row) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, c)| (c > 0).then(|| s.into_iter().map(|v| v / c as f64).collect()))
        .collect()
}

/// Builds a result from raw labels: canonical numbering, every cluster
/// non-empty, centroids as member means.
pub(crate) fn finish_result(
    method: Method,
    data: &[Vec<f64>],
    labels: &[usize],
    k: usize,
    seed: u64,
    extras: Extras,
) -> Result<ClusterResult> {
    let labels = canonicalize_labels(labels);
    let centroids = member_means(data, &labels, k)
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(ClusterError::EmptyCluster { method, k })?;
    Ok(ClusterResult {
        method,
        k,
        labels,
        centroids,
        seed,
        extras,
    })
}

/// Per-run seed, independent of scheduling order.
pub fn run_seed(seed: u64, method: Method, k: usize) -> u64 {
    // FNV-1a, stable across platforms and toolchains
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in method.as_str().bytes().chain((k as u64).to_le_bytes()) {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed.wrapping_add(h)
}

pub fn run_method(data: &[Vec<f64>], method: Method, k: usize, seed: u64, gamma: f64) -> Result<ClusterResult> {
    match method {
        Method::Kmeans => kmeans(data, k, seed),
        Method::Gmm => gmm_em(data, k, seed),
        Method::Spectral => spectral(data, k, gamma, seed),
    }
}

pub fn quality_metrics(data: &[Vec<f64>], result: &ClusterResult) -> Result<QualityMetrics> {
    Ok(QualityMetrics {
        method: result.method,
        k: result.k,
        avg_within_cluster_variance: within_cluster_variance(data, &result.labels)?,
        silhouette: silhouette(data, &result.labels)?,
    })
}

/// One row of a k sweep. A k whose fit failed keeps its error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: Method,
    pub k: usize,
    pub metrics: Option<QualityMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSelection {
    pub best: ClusterResult,
    pub best_metrics: QualityMetrics,
    pub sweep: Vec<SweepRow>,
}

/// Runs `method` for every k in `k_range` and keeps the k with the highest
/// silhouette (smaller k on ties).
///
/// Individual k values may fail (an empty GMM component, say); those rows
/// carry the error and are skipped. If every k fails, the first error is
/// returned.
pub fn select_model(
    data: &[Vec<f64>],
    method: Method,
    k_range: RangeInclusive<usize>,
    seed: u64,
    gamma: f64,
) -> Result<ModelSelection> {
    check_finite(data)?;
    let ks: Vec<usize> = k_range.collect();
    if ks.is_empty() {
        return Err(ClusterError::InvalidK(0));
    }
    let runs: Vec<(usize, Result<(ClusterResult, QualityMetrics)>)> = ks
        .par_iter()
        .map(|&k| {
            let r = run_method(data, method, k, run_seed(seed, method, k), gamma)
                .and_then(|res| quality_metrics(data, &res).map(|m| (res, m)));
            (k, r)
        })
        .collect();

    let mut best: Option<(ClusterResult, QualityMetrics)> = None;
    let mut first_err = None;
    let mut sweep = Vec::with_capacity(runs.len());
    for (k, r) in runs {
        match r {
            Ok((res, m)) => {
                sweep.push(SweepRow {
                    method,
                    k,
                    metrics: Some(m.clone()),
                    error: None,
                });
                if best.as_ref().is_none_or(|(_, bm)| m.silhouette > bm.silhouette) {
                    best = Some((res, m));
                }
            }
            Err(e) => {
                log::warn!("{method} k={k} failed: {e}");
                sweep.push(SweepRow {
                    method,
                    k,
                    metrics: None,
                    error: Some(e.to_string()),
                });
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((best, best_metrics)) => Ok(ModelSelection {
            best,
            best_metrics,
            sweep,
        }),
        None => Err(first_err.expect("non-empty sweep")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub student_id: String,
    /// Euclidean distance to the assigned centroid.
    pub distance: f64,
}

/// Students farther from their centroid than mean + 2·std of all such
/// distances (population std).
pub fn detect_outliers(data: &[Vec<f64>], result: &ClusterResult, student_ids: &[String]) -> Vec<Outlier> {
    let d: Vec<f64> = data
        .iter()
        .zip(&result.labels)
        .map(|(row, &l)| dist(row, &result.centroids[l]))
        .collect();
    if d.is_empty() {
        return Vec::new();
    }
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let std = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let cut = mean + 2.0 * std;
    d.iter()
        .zip(student_ids)
        .filter(|(v, _)| **v > cut)
        .map(|(v, id)| Outlier {
            student_id: id.clone(),
            distance: *v,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZTag {
    VeryLow,
    Low,
    Average,
    High,
    VeryHigh,
}

impl ZTag {
    pub fn from_z(z: f64) -> ZTag {
        if z < -1.0 {
            ZTag::VeryLow
        } else if z < -0.33 {
            ZTag::Low
        } else if z <= 0.33 {
            ZTag::Average
        } else if z <= 1.0 {
            ZTag::High
        } else {
            ZTag::VeryHigh
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ZTag::VeryLow => "very_low",
            ZTag::Low => "low",
            ZTag::Average => "average",
            ZTag::High => "high",
            ZTag::VeryHigh => "very_high",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTag {
    pub feature: String,
    pub z: f64,
    pub tag: ZTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub student_ids: Vec<String>,
    pub features: Vec<FeatureTag>,
}

pub fn cluster_profile(
    result: &ClusterResult,
    feature_names: &[String],
    student_ids: &[String],
) -> Vec<ClusterProfile> {
    result
        .centroids
        .iter()
        .enumerate()
        .map(|(c, centroid)| ClusterProfile {
            cluster: c,
            student_ids: student_ids
                .iter()
                .zip(&result.labels)
                .filter(|(_, &l)| l == c)
                .map(|(id, _)| id.clone())
                .collect(),
            features: feature_names
                .iter()
                .zip(centroid)
                .map(|(name, &z)| FeatureTag {
                    feature: name.clone(),
                    z,
                    tag: ZTag::from_z(z),
                })
                .collect(),
        })
        .collect()
}

/// Rows = clusters, columns = features, cells = centroid z-values.
pub fn write_heatmap_csv<W: Write>(writer: W, profiles: &[ClusterProfile]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["cluster".to_string()];
    if let Some(p) = profiles.first() {
        header.extend(p.features.iter().map(|f| f.feature.clone()));
    }
    w.write_record(&header)?;
    for p in profiles {
        let mut rec = vec![p.cluster.to_string()];
        rec.extend(p.features.iter().map(|f| f.z.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()
}

pub const QUALITY_HEADER: [&str; 4] = ["method", "k", "avg_within_cluster_variance", "silhouette"];

pub fn write_quality_csv<W: Write>(writer: W, rows: &[QualityMetrics]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(QUALITY_HEADER)?;
    for m in rows {
        w.write_record([
            m.method.to_string(),
            m.k.to_string(),
            m.avg_within_cluster_variance.to_string(),
            m.silhouette.to_string(),
        ])?;
    }
    w.flush()
}

/// Full k sweep; failed fits leave the metric cells empty.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(QUALITY_HEADER)?;
    for r in rows {
        let (v, s) = r
            .metrics
            .as_ref()
            .map(|m| (m.avg_within_cluster_variance.to_string(), m.silhouette.to_string()))
            .unwrap_or_default();
        w.write_record([r.method.to_string(), r.k.to_string(), v, s])?;
    }
    w.flush()
}

fn fmt_p(p: f64) -> String {
    if p < 1e-4 {
        format!("{p:e}")
    } else {
        p.to_string()
    }
}

pub const ANOVA_HEADER: [&str; 3] = ["feature", "F", "p"];

pub fn write_anova_csv<W: Write>(writer: W, rows: &[AnovaResult]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ANOVA_HEADER)?;
    for r in rows {
        let (f, p) = if r.zero_within_variance && r.f_stat.is_infinite() {
            ("inf".to_string(), format!("<{P_FLOOR}"))
        } else {
            (r.f_stat.to_string(), fmt_p(r.p_value))
        };
        w.write_record([r.feature.clone(), f, p])?;
    }
    w.flush()
}

/// Fraction of points whose cluster's majority class matches their class.
pub fn purity(labels: &[usize], truth: &[usize]) -> f64 {
    use std::collections::BTreeMap;
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&l, &t) in labels.iter().zip(truth) {
        *table.entry(l).or_default().entry(t).or_default() += 1;
    }
    let hits: usize = table.values().map(|m| m.values().copied().max().unwrap_or(0)).sum();
    hits as f64 / labels.len() as f64
}
