use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_k, finish_result, sq_dist, ClusterError, ClusterResult, Extras, Method, Result};

pub const N_RESTARTS: usize = 10;
pub const MAX_ITER: usize = 300;
pub const SHIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Inertia of the seeded centroids before any Lloyd step.
    pub initial_inertia: f64,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sum of squared distances from each row to its assigned centroid.
pub fn inertia(data: &[Vec<f64>], labels: &[usize], centroids: &[Vec<f64>]) -> f64 {
    data.iter().zip(labels).map(|(x, &l)| sq_dist(x, &centroids[l])).sum()
}

fn distinct_rows(data: &[Vec<f64>], at_least: usize) -> bool {
    let mut seen: Vec<&Vec<f64>> = Vec::new();
    for row in data {
        if !seen.contains(&row) {
            seen.push(row);
            if seen.len() >= at_least {
                return true;
            }
        }
    }
    false
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    data.iter().map(|x| nearest(x, centroids).0).collect()
}

fn plus_plus_init(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![data[rng.random_range(0..data.len())].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let r = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = d2.iter().rposition(|&v| v > 0.0).unwrap_or(0);
        for (i, &v) in d2.iter().enumerate() {
            acc += v;
            if v > 0.0 && acc > r {
                pick = i;
                break;
            }
        }
        let c = data[pick].clone();
        for (di, x) in d2.iter_mut().zip(data) {
            *di = di.min(sq_dist(x, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Member means for `labels`. A cluster left empty takes the point farthest
/// from its current centroid (`prev`), drawn from a cluster that can spare it.
fn update(data: &[Vec<f64>], labels: &mut [usize], prev: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let d = data[0].len();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            let mut sums = vec![vec![0.0; d]; k];
            for (x, &l) in data.iter().zip(labels.iter()) {
                for (s, v) in sums[l].iter_mut().zip(x) {
                    *s += v;
                }
            }
            return sums
                .into_iter()
                .zip(counts)
                .map(|(s, c)| s.into_iter().map(|v| v / c as f64).collect())
                .collect();
        };
        let mut far = None;
        let mut far_d = f64::NEG_INFINITY;
        for (i, x) in data.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let dd = sq_dist(x, &prev[labels[i]]);
            if dd > far_d {
                far_d = dd;
                far = Some(i);
            }
        }
        // data.len() > k guarantees a donor cluster exists
        labels[far.expect("donor cluster")] = empty;
    }
}

fn lloyd(data: &[Vec<f64>], init: Vec<Vec<f64>>, k: usize) -> KMeansRun {
    let mut centroids = init;
    let mut labels = assign(data, &centroids);
    let initial_inertia = inertia(data, &labels, &centroids);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let means = update(data, &mut labels, &centroids, k);
        let shift = means
            .iter()
            .zip(&centroids)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = means;
        iterations += 1;
        if shift < SHIFT_TOL {
            converged = true;
            break;
        }
        if iterations >= MAX_ITER {
            break;
        }
        labels = assign(data, &centroids);
    }
    KMeansRun {
        inertia: inertia(data, &labels, &centroids),
        labels,
        centroids,
        initial_inertia,
        iterations,
        converged,
    }
}

/// All restarts, in the order they were drawn from the seeded generator.
pub fn kmeans_restarts(data: &[Vec<f64>], k: usize, seed: u64) -> Result<Vec<KMeansRun>> {
    check_k(data, k)?;
    if !distinct_rows(data, k) {
        return Err(ClusterError::DegenerateData(format!(
            "fewer than k={k} distinct points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..N_RESTARTS)
        .map(|_| {
            let init = plus_plus_init(data, k, &mut rng);
            lloyd(data, init, k)
        })
        .collect())
}

/// K-Means with k-means++ seeding; the restart with the lowest inertia wins.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64) -> Result<ClusterResult> {
    let runs = kmeans_restarts(data, k, seed)?;
    let mut best = &runs[0];
    for r in &runs[1..] {
        if r.inertia < best.inertia {
            best = r;
        }
    }
    if !best.converged {
        log::warn!("kmeans k={k} hit the iteration cap");
    }
    finish_result(
        Method::Kmeans,
        data,
        &best.labels,
        k,
        seed,
        Extras {
            inertia: Some(best.inertia),
            ..Extras::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_groups() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![10.0, 10.0],
            vec![10.0, 11.0],
            vec![11.0, 10.0],
        ]
    }

    #[test]
    fn separates_two_groups() {
        let r = kmeans(&two_groups(), 2, 1).unwrap();
        assert_eq!(r.labels, vec![0, 0, 0, 1, 1, 1]);
        assert!((r.centroids[0][0] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_result() {
        let a = kmeans(&two_groups(), 3, 9).unwrap();
        let b = kmeans(&two_groups(), 3, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lloyd_never_increases_inertia() {
        let data: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 1.7).sin() * 5.0, (i as f64).cos()])
            .collect();
        for r in kmeans_restarts(&data, 4, 3).unwrap() {
            assert!(r.inertia <= r.initial_inertia + 1e-9);
        }
    }

    #[test]
    fn too_few_distinct_points() {
        let data = vec![vec![1.0], vec![1.0], vec![1.0], vec![2.0]];
        assert!(matches!(kmeans(&data, 3, 0), Err(ClusterError::DegenerateData(_))));
    }

    #[test]
    fn invalid_k() {
        assert_eq!(kmeans(&two_groups(), 1, 0), Err(ClusterError::InvalidK(1)));
    }

    #[test]
    fn empty_cluster_is_refilled() {
        // centroid 2 starts far from everything
        let data = two_groups();
        let run = lloyd(&data, vec![vec![0.0, 0.0], vec![10.0, 10.0], vec![100.0, 100.0]], 3);
        let mut counts = [0; 3];
        for &l in &run.labels {
            counts[l] += 1;
        }
        assert!(counts.iter().all(|&c| c > 0));
    }
}
