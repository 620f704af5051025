//! Brute-force references shared by the integration tests.

use nnscit::mi::digamma;

/// Quadratic-time evaluation of the k-NN estimator, written from the
/// definition: l-infinity radius to the k-th other point, marginal counts
/// with `<=`.
pub fn mi_brute_force(xs: &[f64], ys: &[f64], k: usize) -> f64 {
    let n = xs.len();
    let psi = |v: f64| digamma(v).unwrap();
    let mut total = 0.0;
    for i in 0..n {
        let mut dists: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (xs[i] - xs[j]).abs().max((ys[i] - ys[j]).abs()))
            .collect();
        dists.sort_by(f64::total_cmp);
        let r = dists[k - 1];
        let nx = (0..n).filter(|&j| j != i && (xs[i] - xs[j]).abs() <= r).count();
        let ny = (0..n).filter(|&j| j != i && (ys[i] - ys[j]).abs() <= r).count();
        total += psi(k as f64) - psi(nx as f64) - psi(ny as f64) + psi(n as f64);
    }
    (total / n as f64).max(0.0)
}

/// Lowest-index argmin of the squared distance.
pub fn nearest_brute_force(points: &[f64], dim: usize, query: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (row, p) in points.chunks(dim).enumerate() {
        let d2: f64 = p.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 < best.0 {
            best = (d2, row);
        }
    }
    best.1
}
