use std::collections::BTreeMap;

use super::{dist, ClusterError, Result};

fn groups(n_rows: usize, labels: &[usize]) -> Result<BTreeMap<usize, Vec<usize>>> {
    if labels.len() != n_rows {
        return Err(ClusterError::LabelMismatch {
            labels: labels.len(),
            rows: n_rows,
        });
    }
    let mut g: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        g.entry(l).or_default().push(i);
    }
    if g.len() < 2 {
        return Err(ClusterError::SingleCluster);
    }
    Ok(g)
}

/// Mean silhouette over all points, Euclidean distance. Points in singleton
/// clusters score 0.
pub fn silhouette(data: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    let g = groups(data.len(), labels)?;
    let mut total = 0.0;
    for (i, x) in data.iter().enumerate() {
        let own = &g[&labels[i]];
        if own.len() == 1 {
            continue;
        }
        let a = own.iter().filter(|&&j| j != i).map(|&j| dist(x, &data[j])).sum::<f64>() / (own.len() - 1) as f64;
        let b = g
            .iter()
            .filter(|(l, _)| **l != labels[i])
            .map(|(_, m)| m.iter().map(|&j| dist(x, &data[j])).sum::<f64>() / m.len() as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / data.len() as f64)
}

/// Sample variance (ddof = 1) per feature within each cluster, averaged
/// over features and then over clusters. Singleton clusters contribute 0.
pub fn within_cluster_variance(data: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    let g = groups(data.len(), labels)?;
    let d = data[0].len();
    let mut sum = 0.0;
    for members in g.values() {
        if members.len() < 2 {
            continue;
        }
        let m = members.len() as f64;
        let per_feature: f64 = (0..d)
            .map(|f| {
                let mean = members.iter().map(|&i| data[i][f]).sum::<f64>() / m;
                members.iter().map(|&i| (data[i][f] - mean).powi(2)).sum::<f64>() / (m - 1.0)
            })
            .sum();
        sum += per_feature / d as f64;
    }
    Ok(sum / g.len() as f64)
}
