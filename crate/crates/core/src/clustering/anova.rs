use serde::{Deserialize, Serialize};

use super::special::f_survival;
use super::{ClusterError, Result};

/// Reported p-value when the within-group variance is exactly zero.
pub const P_FLOOR: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub feature: String,
    pub f_stat: f64,
    pub p_value: f64,
    /// Every group was constant in this feature.
    pub zero_within_variance: bool,
}

/// One-way ANOVA over `groups`. Returns `(F, p, zero_within_variance)`.
///
/// With zero within-group variance, F is infinite and p is [`P_FLOOR`] when
/// the group means differ, and `(0, 1)` when they do not.
pub fn anova_one_way(groups: &[Vec<f64>]) -> Result<(f64, f64, bool)> {
    let k = groups.iter().filter(|g| !g.is_empty()).count();
    let n: usize = groups.iter().map(Vec::len).sum();
    if k < 2 {
        return Err(ClusterError::SingleCluster);
    }
    if n <= k {
        return Err(ClusterError::DegenerateData(format!("{n} observations for {k} groups")));
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups.iter().filter(|g| !g.is_empty()) {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    }
    let d1 = (k - 1) as f64;
    let d2 = (n - k) as f64;
    let msb = ssb / d1;
    let msw = ssw / d2;
    // relative cut keeps rounding noise in constant groups from counting
    let scale = groups.iter().flatten().map(|v| v * v).sum::<f64>().max(1.0);
    if ssw <= 1e-24 * scale {
        return Ok(if ssb <= 1e-24 * scale {
            (0.0, 1.0, true)
        } else {
            (f64::INFINITY, P_FLOOR, true)
        });
    }
    let f = msb / msw;
    // an underflowed tail still reports a positive p
    Ok((f, f_survival(f, d1, d2).max(f64::MIN_POSITIVE), false))
}

/// ANOVA of every column of `data` across the clusters in `labels`,
/// sorted by F descending.
pub fn anova_per_feature(data: &[Vec<f64>], labels: &[usize], feature_names: &[String]) -> Result<Vec<AnovaResult>> {
    if labels.len() != data.len() {
        return Err(ClusterError::LabelMismatch {
            labels: labels.len(),
            rows: data.len(),
        });
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = Vec::with_capacity(feature_names.len());
    for (f, name) in feature_names.iter().enumerate() {
        let mut groups = vec![Vec::new(); k];
        for (row, &l) in data.iter().zip(labels) {
            groups[l].push(row[f]);
        }
        let (f_stat, p_value, zero_within_variance) = anova_one_way(&groups)?;
        out.push(AnovaResult {
            feature: name.clone(),
            f_stat,
            p_value,
            zero_within_variance,
        });
    }
    out.sort_by(|a, b| b.f_stat.total_cmp(&a.f_stat));
    Ok(out)
}
