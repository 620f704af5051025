//! k-nearest-neighbor mutual information between two scalar samples.
//!
//! For each point `(x_i, y_i)` let `eps_i` be the max-norm distance to its
//! k-th nearest neighbor (the point itself excluded). With
//! `n_x(i) = #{j != i : |x_i - x_j| <= eps_i}` and `n_y(i)` defined the same
//! way, the estimate is
//!
//! ```text
//! max{ psi(k) + psi(n) - mean_i[ psi(n_x(i)) + psi(n_y(i)) ], 0 }
//! ```
//!
//! Both marginal counts include the k-th neighbor itself, so every digamma
//! argument is at least 1 even with duplicated points.

mod digamma;

pub use digamma::digamma;
pub(crate) use digamma::digamma_unchecked;

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 3;

/// Mutual information estimate in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MiEstimate {
    /// Clipped estimate, always `>= 0`.
    pub value: f64,
    /// Average of the per-point terms before clipping at zero.
    pub raw: f64,
    pub k: usize,
    pub n: usize,
}

pub fn estimate_mi(xs: &[f64], ys: &[f64], k: usize) -> Result<MiEstimate> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::LengthMismatch(format!(
            "xs has {n} entries, ys has {}",
            ys.len()
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::Domain(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite sample {v}")));
    }

    let radii = kth_neighbor_radii(xs, ys, k);

    let mut sorted_x = xs.to_vec();
    sorted_x.sort_unstable_by(f64::total_cmp);
    let mut sorted_y = ys.to_vec();
    sorted_y.sort_unstable_by(f64::total_cmp);

    let const_part = digamma_unchecked(k as f64) + digamma_unchecked(n as f64);
    let mut total = 0.0;
    for i in 0..n {
        let nx = count_within(&sorted_x, xs[i], radii[i]);
        let ny = count_within(&sorted_y, ys[i], radii[i]);
        total += const_part - (digamma_unchecked(nx as f64) + digamma_unchecked(ny as f64));
    }
    let raw = total / n as f64;
    Ok(MiEstimate {
        value: raw.max(0.0),
        raw,
        k,
        n,
    })
}

/// Number of `j != i` with `|center - v_j| <= radius`, where `center` is one
/// of the entries of `sorted`.
///
/// The two binary-search predicates evaluate exactly the floating-point
/// differences a direct scan would, so the counts agree bit-for-bit with
/// `(center - v).abs() <= radius`.
fn count_within(sorted: &[f64], center: f64, radius: f64) -> usize {
    let lo = sorted.partition_point(|&v| center - v > radius);
    let hi = sorted.partition_point(|&v| v - center <= radius);
    hi - lo - 1
}

/// Max-norm distance from every point to its k-th nearest other point.
///
/// Points are visited in x order; the scan in each direction stops once the
/// x gap alone exceeds the current k-th best distance.
fn kth_neighbor_radii(xs: &[f64], ys: &[f64], k: usize) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| xs[a].total_cmp(&xs[b]));

    let mut radii = vec![0.0; n];
    // ascending list of the k smallest distances seen so far
    let mut best: Vec<f64> = Vec::with_capacity(k + 1);
    for (pos, &i) in order.iter().enumerate() {
        best.clear();
        let (xi, yi) = (xs[i], ys[i]);
        let offer = |d: f64, best: &mut Vec<f64>| {
            if best.len() < k || d < best[k - 1] {
                let at = best.partition_point(|&b| b <= d);
                best.insert(at, d);
                best.truncate(k);
            }
        };
        let mut left = pos;
        let mut right = pos + 1;
        loop {
            let bound = if best.len() == k { best[k - 1] } else { f64::INFINITY };
            let left_gap = (left > 0).then(|| (xi - xs[order[left - 1]]).abs());
            let right_gap = (right < n).then(|| (xi - xs[order[right]]).abs());
            let go_left = match (left_gap, right_gap) {
                (Some(l), Some(r)) => l <= r,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            let (j, gap) = if go_left {
                left -= 1;
                (order[left], left_gap.unwrap())
            } else {
                let j = order[right];
                right += 1;
                (j, right_gap.unwrap())
            };
            if gap > bound {
                // nearest remaining candidate in x order is already too far
                break;
            }
            let d = gap.max((yi - ys[j]).abs());
            offer(d, &mut best);
        }
        radii[i] = best[k - 1];
    }
    radii
}
