use nalgebra::{DMatrix, DVector};

use super::kmeans::kmeans;
use super::{check_k, finish_result, ClusterError, ClusterResult, Extras, Method, Result};

pub const COV_REG: f64 = 1e-6;
pub const LL_TOL: f64 = 1e-4;
pub const MAX_ITER: usize = 500;

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub result: ClusterResult,
    /// Log-likelihood after initialization and after every EM iteration.
    pub log_likelihood_trace: Vec<f64>,
    pub responsibilities: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
}

struct Params {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covs: Vec<DMatrix<f64>>,
}

fn regularized(mut cov: DMatrix<f64>) -> DMatrix<f64> {
    for i in 0..cov.nrows() {
        cov[(i, i)] += COV_REG;
    }
    cov
}

fn weighted_cov(xs: &[DVector<f64>], w: &[f64], mean: &DVector<f64>, total: f64) -> DMatrix<f64> {
    let d = mean.len();
    let mut cov = DMatrix::zeros(d, d);
    for (x, &wi) in xs.iter().zip(w) {
        let diff = x - mean;
        cov += wi * &diff * diff.transpose();
    }
    regularized(cov / total)
}

/// Responsibilities and total log-likelihood for the current parameters.
fn e_step(xs: &[DVector<f64>], p: &Params) -> Result<(Vec<Vec<f64>>, f64)> {
    let d = xs[0].len() as f64;
    let k = p.weights.len();
    let mut logp = vec![vec![0.0; k]; xs.len()];
    for (j, cov) in p.covs.iter().enumerate() {
        let chol = cov
            .clone()
            .cholesky()
            .ok_or(ClusterError::SingularCovariance { component: j })?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let norm = p.weights[j].ln() - 0.5 * (d * (2.0 * std::f64::consts::PI).ln() + log_det);
        for (i, x) in xs.iter().enumerate() {
            let z = l
                .solve_lower_triangular(&(x - &p.means[j]))
                .ok_or(ClusterError::SingularCovariance { component: j })?;
            logp[i][j] = norm - 0.5 * z.norm_squared();
        }
    }
    let mut ll = 0.0;
    for row in logp.iter_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        ll += lse;
        for v in row.iter_mut() {
            *v = (*v - lse).exp();
        }
    }
    Ok((logp, ll))
}

fn m_step(xs: &[DVector<f64>], resp: &[Vec<f64>], prev: Params) -> Params {
    let n = xs.len() as f64;
    let k = prev.weights.len();
    let mut out = prev;
    for j in 0..k {
        let w: Vec<f64> = resp.iter().map(|r| r[j]).collect();
        let nk: f64 = w.iter().sum();
        out.weights[j] = nk / n;
        if nk < 1e-12 {
            // vanished component keeps its shape; weight alone goes to zero
            continue;
        }
        let mean = xs
            .iter()
            .zip(&w)
            .fold(DVector::zeros(xs[0].len()), |acc, (x, &wi)| acc + wi * x)
            / nk;
        out.covs[j] = weighted_cov(xs, &w, &mean, nk);
        out.means[j] = mean;
    }
    out
}

fn n_params(k: usize, d: usize) -> usize {
    (k - 1) + k * d + k * d * (d + 1) / 2
}

/// Full-covariance Gaussian mixture fitted by EM, initialized from K-Means.
pub fn gmm_fit(data: &[Vec<f64>], k: usize, seed: u64) -> Result<GmmFit> {
    check_k(data, k)?;
    let init = kmeans(data, k, seed)?;
    let xs: Vec<DVector<f64>> = data.iter().map(|r| DVector::from_column_slice(r)).collect();
    let n = xs.len();
    let d = data[0].len();

    let mut params = Params {
        weights: vec![0.0; k],
        means: Vec::with_capacity(k),
        covs: Vec::with_capacity(k),
    };
    for j in 0..k {
        let members: Vec<DVector<f64>> = xs
            .iter()
            .zip(&init.labels)
            .filter(|(_, &l)| l == j)
            .map(|(x, _)| x.clone())
            .collect();
        let mean = DVector::from_column_slice(&init.centroids[j]);
        let ones = vec![1.0; members.len()];
        params.weights[j] = members.len() as f64 / n as f64;
        params
            .covs
            .push(weighted_cov(&members, &ones, &mean, members.len() as f64));
        params.means.push(mean);
    }

    let (mut resp, mut ll) = e_step(&xs, &params)?;
    let mut trace = vec![ll];
    for _ in 0..MAX_ITER {
        params = m_step(&xs, &resp, params);
        let (r, next) = e_step(&xs, &params)?;
        resp = r;
        trace.push(next);
        let gain = next - ll;
        ll = next;
        if gain < LL_TOL {
            break;
        }
    }

    let labels: Vec<usize> = resp
        .iter()
        .map(|r| {
            let mut best = 0;
            for j in 1..k {
                if r[j] > r[best] {
                    best = j;
                }
            }
            best
        })
        .collect();
    let bic = -2.0 * ll + n_params(k, d) as f64 * (n as f64).ln();
    let result = finish_result(
        Method::Gmm,
        data,
        &labels,
        k,
        seed,
        Extras {
            log_likelihood: Some(ll),
            bic: Some(bic),
            ..Extras::default()
        },
    )?;
    Ok(GmmFit {
        result,
        log_likelihood_trace: trace,
        responsibilities: resp,
        weights: params.weights,
        means: params.means,
        covariances: params.covs,
    })
}

pub fn gmm_em(data: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    gmm_fit(data, k, seed).map(|f| f.result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_blobs() -> Vec<Vec<f64>> {
        let mut v = Vec::new();
        for i in 0..20 {
            let a = i as f64 * 0.9;
            v.push(vec![a.sin() * 0.5, a.cos() * 0.3]);
            v.push(vec![8.0 + a.cos() * 0.4, 5.0 + a.sin() * 0.6]);
        }
        v
    }

    #[test]
    fn log_likelihood_is_monotone() {
        let fit = gmm_fit(&two_blobs(), 3, 4).unwrap();
        for w in fit.log_likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn responsibilities_sum_to_one() {
        let fit = gmm_fit(&two_blobs(), 2, 1).unwrap();
        for r in &fit.responsibilities {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!((fit.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bic_parameter_count() {
        assert_eq!(n_params(2, 10), 1 + 20 + 110);
        let fit = gmm_fit(&two_blobs(), 2, 1).unwrap();
        let ll = fit.result.extras.log_likelihood.unwrap();
        let expected = -2.0 * ll + n_params(2, 2) as f64 * (40f64).ln();
        assert!((fit.result.extras.bic.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn recovers_blobs() {
        let r = gmm_em(&two_blobs(), 2, 1).unwrap();
        for (i, l) in r.labels.iter().enumerate() {
            assert_eq!(*l, i % 2);
        }
    }
}
