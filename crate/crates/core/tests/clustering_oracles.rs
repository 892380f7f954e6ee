#[path = "common/oracles.rs"]
mod oracles;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use readlens_core::clustering::eigen::jacobi_eigen;
use readlens_core::clustering::special::f_survival;
use readlens_core::clustering::{
    affinity_matrix, anova_one_way, gmm_fit, kmeans, kmeans_restarts, normalized_laplacian, purity, run_method,
    silhouette, spectral, within_cluster_variance, Method,
};
use readlens_core::synth::concentric_rings;

/// Random points plus labels that use every cluster id in `0..k`.
fn labelled_instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>)> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(k, d)| {
        (k + 1..=25).prop_flat_map(move |n| {
            (
                prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), n),
                prop::collection::vec(0..k, n - k),
                Just(k),
            )
                .prop_map(|(data, mut rest, k)| {
                    let mut labels: Vec<usize> = (0..k).collect();
                    labels.append(&mut rest);
                    (data, labels)
                })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn silhouette_matches_brute_force((data, labels) in labelled_instance()) {
        let fast = silhouette(&data, &labels).unwrap();
        let slow = oracles::silhouette_brute(&data, &labels);
        prop_assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        prop_assert!((-1.0..=1.0).contains(&fast));
    }

    #[test]
    fn variance_matches_brute_force((data, labels) in labelled_instance()) {
        let fast = within_cluster_variance(&data, &labels).unwrap();
        let slow = oracles::within_variance_brute(&data, &labels);
        prop_assert!((fast - slow).abs() < 1e-9 * slow.max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn f_survival_matches_quadrature(d1 in 1u32..=10, d2 in 2u32..=100, f in 0.05f64..20.0) {
        let p = f_survival(f, d1 as f64, d2 as f64);
        let q = oracles::f_survival_quadrature(f, d1 as f64, d2 as f64);
        prop_assert!((p - q).abs() < 1e-4, "F={f} df=({d1},{d2}): {p} vs {q}");
    }

    #[test]
    fn purity_matches_brute_force(labels in prop::collection::vec(0usize..4, 1..30), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth: Vec<usize> = labels.iter().map(|_| rng.random_range(0..3)).collect();
        prop_assert!((purity(&labels, &truth) - oracles::purity_brute(&labels, &truth)).abs() < 1e-12);
    }
}

#[test]
fn silhouette_hand_example() {
    let data = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
    let s = silhouette(&data, &[0, 0, 1, 1]).unwrap();
    assert!((s - 0.8997).abs() < 1e-4);
    assert!((s - oracles::silhouette_brute(&data, &[0, 0, 1, 1])).abs() < 1e-12);
}

#[test]
fn anova_reference_against_quadrature() {
    let (f, p, _) = anova_one_way(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
    assert!((f - 13.5).abs() < 1e-9);
    assert!((p - oracles::f_survival_quadrature(13.5, 1.0, 4.0)).abs() < 1e-4);
    let (f, p, _) = anova_one_way(&[vec![1.0, 2.0, 3.0], vec![3.0, 1.0, 2.0]]).unwrap();
    assert_eq!((f, p), (0.0, 1.0));
}

#[test]
fn quadrature_oracle_self_check() {
    // F(2, d2) has the closed-form tail (1 + 2f/d2)^(-d2/2)
    for &(f, d2) in &[(0.5, 3.0), (2.0, 10.0), (7.0, 60.0)] {
        let exact = (1.0f64 + 2.0 * f / d2).powf(-d2 / 2.0);
        assert!((oracles::f_survival_quadrature(f, 2.0, d2) - exact).abs() < 1e-7);
    }
}

/// Well-separated groups of 2-4 points each, jittered.
fn separated_instance(seed: u64, k: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    for c in 0..k {
        let size = rng.random_range(2..=3);
        for _ in 0..size {
            data.push(
                (0..dim)
                    .map(|d| if d == 0 { 20.0 * c as f64 } else { 15.0 * (c % 2) as f64 } + rng.random_range(-1.0..1.0))
                    .collect(),
            );
        }
    }
    data
}

#[test]
fn kmeans_reaches_exhaustive_optimum() {
    let mut checked = 0;
    for seed in 0..8u64 {
        for k in 2..=4 {
            for dim in 1..=2 {
                let data = separated_instance(seed * 31 + k as u64, k, dim);
                assert!(data.len() <= 12);
                let r = kmeans(&data, k, seed).unwrap();
                let best = oracles::optimal_inertia(&data, k);
                let got = r.extras.inertia.unwrap();
                assert!(
                    (got - best).abs() < 1e-9,
                    "seed {seed} k {k} dim {dim}: {got} vs {best}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 48);
}

#[test]
fn oracle_inertia_small_case() {
    // {0,1} and {10}: optimum 0.5
    let data = vec![vec![0.0], vec![1.0], vec![10.0]];
    assert!((oracles::optimal_inertia(&data, 2) - 0.5).abs() < 1e-12);
}

#[test]
fn kmeans_restarts_never_worsen_initial_inertia() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let data: Vec<Vec<f64>> = (0..40)
        .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
        .collect();
    for run in kmeans_restarts(&data, 4, 9).unwrap() {
        assert!(run.inertia <= run.initial_inertia + 1e-12);
    }
}

fn random_mixture(seed: u64) -> (Vec<Vec<f64>>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=3);
    let centres: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
        .collect();
    let n = rng.random_range(20..=40);
    let data = (0..n)
        .map(|i| {
            let (cx, cy) = centres[i % k];
            vec![cx + rng.random_range(-1.5..1.5), cy + rng.random_range(-1.5..1.5)]
        })
        .collect();
    (data, k)
}

#[test]
fn gmm_log_likelihood_never_decreases() {
    for seed in 0..20 {
        let (data, k) = random_mixture(seed);
        let fit = gmm_fit(&data, k, seed).unwrap();
        for w in fit.log_likelihood_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: {} -> {}", w[0], w[1]);
        }
        for r in &fit.responsibilities {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn gmm_separates_two_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for (label, c) in [(0, -6.0), (1, 6.0)] {
        for _ in 0..25 {
            data.push(vec![c + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            truth.push(label);
        }
    }
    let r = run_method(&data, Method::Gmm, 2, 7, 1.0).unwrap();
    assert_eq!(purity(&r.labels, &truth), 1.0);
}

#[test]
fn spectral_rings_beat_kmeans() {
    let (data, truth) = concentric_rings(40, 5);
    let s = spectral(&data, 2, 1.0, 7).unwrap();
    assert_eq!(purity(&s.labels, &truth), 1.0);
    let k = kmeans(&data, 2, 7).unwrap();
    assert!(purity(&k.labels, &truth) < 0.9);
}

#[test]
fn jacobi_residual_on_laplacians() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)])
            .collect();
        let lap = normalized_laplacian(&affinity_matrix(&data, 1.0)).unwrap();
        let eig = jacobi_eigen(&lap);
        for (j, &lambda) in eig.values.iter().enumerate() {
            let v = eig.vectors.column(j);
            let r = &lap * v - v * lambda;
            assert!(r.amax() < 1e-8, "seed {seed} pair {j}: {}", r.amax());
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn jacobi_random_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 15;
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let sym = &a + a.transpose();
    let eig = jacobi_eigen(&sym);
    let recon = &eig.vectors
        * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eig.values.clone()))
        * eig.vectors.transpose();
    assert!((recon - &sym).amax() < 1e-10);
}

#[test]
fn methods_are_bit_identical_across_runs() {
    let (data, _) = random_mixture(4);
    for m in Method::ALL {
        let a = run_method(&data, m, 3, 99, 1.0).unwrap();
        let b = run_method(&data, m, 3, 99, 1.0).unwrap();
        assert_eq!(a, b);
        let mut seen = [false; 3];
        for &l in &a.labels {
            seen[l] = true;
        }
        assert!(seen.iter().all(|&s| s), "{m} left a cluster empty");
    }
}
