use nalgebra::DMatrix;

use super::eigen::jacobi_eigen;
use super::kmeans::kmeans;
use super::{check_k, finish_result, sq_dist, ClusterError, ClusterResult, Extras, Method, Result};

/// RBF affinity `exp(-gamma·‖xi − xj‖²)` with a zero diagonal.
pub fn affinity_matrix(data: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let n = data.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (-gamma * sq_dist(&data[i], &data[j])).exp()
        }
    })
}

/// `I − D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(affinity: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = affinity.nrows();
    let mut inv_sqrt = Vec::with_capacity(n);
    for i in 0..n {
        let deg: f64 = affinity.row(i).sum();
        if deg <= 0.0 {
            return Err(ClusterError::DisconnectedGraph { index: i });
        }
        inv_sqrt.push(1.0 / deg.sqrt());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - inv_sqrt[i] * affinity[(i, j)] * inv_sqrt[j]
    }))
}

/// Rows of the `k` smallest eigenvectors of the normalized Laplacian,
/// each scaled to unit length. Also returns all eigenvalues, ascending.
pub fn spectral_embedding(data: &[Vec<f64>], k: usize, gamma: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_k(data, k)?;
    let lap = normalized_laplacian(&affinity_matrix(data, gamma))?;
    let eig = jacobi_eigen(&lap);
    let rows = (0..data.len())
        .map(|i| {
            let row: Vec<f64> = (0..k).map(|c| eig.vectors[(i, c)]).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.into_iter().map(|v| v / norm).collect()
            } else {
                row
            }
        })
        .collect();
    Ok((rows, eig.values))
}

/// Normalized spectral clustering. K-Means on the embedding uses `seed`;
/// centroids are reported in the original feature space.
pub fn spectral(data: &[Vec<f64>], k: usize, gamma: f64, seed: u64) -> Result<ClusterResult> {
    let (embedding, _) = spectral_embedding(data, k, gamma)?;
    let inner = kmeans(&embedding, k, seed).map_err(|e| match e {
        ClusterError::DegenerateData(m) => ClusterError::DegenerateData(format!("spectral embedding: {m}")),
        other => other,
    })?;
    finish_result(
        Method::Spectral,
        data,
        &inner.labels,
        k,
        seed,
        Extras {
            gamma: Some(gamma),
            ..Extras::default()
        },
    )
}
