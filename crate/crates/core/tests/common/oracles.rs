//! Slow, direct reference implementations used to check the library.

#![allow(dead_code)]

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Silhouette from the textbook definition, using a full distance matrix.
pub fn silhouette_brute(data: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = data.len();
    let dm: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| euclid(&data[i], &data[j])).collect())
        .collect();
    let k = labels.iter().max().unwrap() + 1;
    let mut s = vec![0.0; n];
    for i in 0..n {
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dm[i][j];
                counts[labels[j]] += 1;
            }
        }
        if counts[labels[i]] == 0 {
            continue;
        }
        let a = sums[labels[i]] / counts[labels[i]] as f64;
        let mut b = f64::MAX;
        for c in 0..k {
            if c != labels[i] && counts[c] > 0 {
                b = b.min(sums[c] / counts[c] as f64);
            }
        }
        let m = if a > b { a } else { b };
        s[i] = if m == 0.0 { 0.0 } else { (b - a) / m };
    }
    s.iter().sum::<f64>() / n as f64
}

/// Sample variance from pairwise squared differences:
/// var = Σ_{i<j} (x_i − x_j)² / (n (n − 1)).
fn pairwise_var(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            acc += (xs[i] - xs[j]).powi(2);
        }
    }
    acc / (n * (n - 1)) as f64
}

pub fn within_variance_brute(data: &[Vec<f64>], labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let d = data[0].len();
    let mut total = 0.0;
    let mut clusters = 0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = data
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == c)
            .map(|(r, _)| r)
            .collect();
        if members.is_empty() {
            continue;
        }
        clusters += 1;
        let per: f64 = (0..d)
            .map(|f| pairwise_var(&members.iter().map(|r| r[f]).collect::<Vec<_>>()))
            .sum();
        total += per / d as f64;
    }
    total / clusters as f64
}

/// lnΓ from the Stirling series after shifting the argument above 10.
pub fn ln_gamma_stirling(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

pub fn f_density(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_b = ln_gamma_stirling(d1 / 2.0) + ln_gamma_stirling(d2 / 2.0) - ln_gamma_stirling((d1 + d2) / 2.0);
    let ln = 0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * x.ln() - 0.5 * (d1 + d2) * (1.0 + d1 * x / d2).ln() - ln_b;
    ln.exp()
}

/// P(F > f0) by composite Simpson over the density after mapping
/// [f0, ∞) onto [0, 1) with x = f0 + s / (1 − s). Needs f0 > 0.
pub fn f_survival_quadrature(f0: f64, d1: f64, d2: f64) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let x = f0 + s / (1.0 - s);
        f_density(x, d1, d2) / (1.0 - s).powi(2)
    };
    let mut acc = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    acc * h / 3.0
}

/// Minimum k-means objective over every partition of the rows into exactly
/// `k` non-empty groups (restricted growth strings).
pub fn optimal_inertia(data: &[Vec<f64>], k: usize) -> f64 {
    fn sse(data: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
        let d = data[0].len();
        let mut total = 0.0;
        for c in 0..k {
            let rows: Vec<&Vec<f64>> = data
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r)
                .collect();
            let m = rows.len() as f64;
            for f in 0..d {
                let mean = rows.iter().map(|r| r[f]).sum::<f64>() / m;
                total += rows.iter().map(|r| (r[f] - mean).powi(2)).sum::<f64>();
            }
        }
        total
    }
    fn rec(data: &[Vec<f64>], k: usize, labels: &mut Vec<usize>, used: usize, best: &mut f64) {
        let i = labels.len();
        if i == data.len() {
            if used == k {
                *best = best.min(sse(data, labels, k));
            }
            return;
        }
        if k - used > data.len() - i {
            return;
        }
        for c in 0..=used.min(k - 1) {
            labels.push(c);
            rec(data, k, labels, used.max(c + 1), best);
            labels.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(data, k, &mut Vec::with_capacity(data.len()), 0, &mut best);
    best
}

/// Fraction of rows whose cluster's majority truth label matches their own.
pub fn purity_brute(labels: &[usize], truth: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let t = truth.iter().max().unwrap() + 1;
    let mut hits = 0;
    for c in 0..k {
        let mut counts = vec![0; t];
        for (l, tr) in labels.iter().zip(truth) {
            if *l == c {
                counts[*tr] += 1;
            }
        }
        hits += counts.iter().max().unwrap();
    }
    hits as f64 / labels.len() as f64
}
