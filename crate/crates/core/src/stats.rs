//! Small summary statistics for goodness-of-fit reports.

use crate::error::{Error, Result};

pub const GOF_BINS: usize = 25;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Two-sample Kolmogorov-Smirnov statistic `sup_t |F_a(t) - F_b(t)|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSamples {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut sup) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        // step past every copy of the smallest remaining value in both samples
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Smallest and largest value over both samples.
pub fn pooled_range(a: &[f64], b: &[f64]) -> (f64, f64) {
    a.iter()
        .chain(b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Counts of each sample in `bins` equal-width bins over `[0, 1]`, after
/// mapping both samples with their common min-max range. A constant pooled
/// sample lands in the first bin.
pub fn paired_histogram(a: &[f64], b: &[f64], bins: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if bins == 0 {
        return Err(Error::InvalidConfig(vec!["bins must be at least 1".into()]));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::TooFewSamples {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let (lo, hi) = pooled_range(a, b);
    let span = hi - lo;
    let count = |v: &[f64]| {
        let mut c = vec![0; bins];
        for &x in v {
            let u = if span > 0.0 { (x - lo) / span } else { 0.0 };
            c[((u * bins as f64) as usize).min(bins - 1)] += 1;
        }
        c
    };
    Ok((count(a), count(b)))
}

/// `sum_i |p_i - q_i|` between the normalized histograms.
pub fn l1_distance(a: &[usize], b: &[usize]) -> f64 {
    let (na, nb) = (a.iter().sum::<usize>() as f64, b.iter().sum::<usize>() as f64);
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |v: &[f64], t: f64| v.iter().filter(|&&x| x <= t).count() as f64 / v.len() as f64;
        a.iter()
            .chain(b)
            .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_matches_definition() {
        let a = [0.1, 0.4, 0.4, 0.9, 2.0];
        let b = [0.4, 0.5, 0.6];
        assert!((ks_statistic(&a, &b).unwrap() - ks_brute(&a, &b)).abs() < 1e-15);
        assert_eq!(ks_statistic(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0, 1.0], &[5.0]).unwrap(), 1.0);
        assert!(ks_statistic(&[], &b).is_err());
    }

    #[test]
    fn histogram_shares_range() {
        let (ca, cb) = paired_histogram(&[0.0, 0.5, 1.0], &[2.0], 4).unwrap();
        assert_eq!(ca, vec![1, 1, 1, 0]);
        assert_eq!(cb, vec![0, 0, 0, 1]);
        let (cc, _) = paired_histogram(&[3.0, 3.0], &[3.0], 5).unwrap();
        assert_eq!(cc, vec![2, 0, 0, 0, 0]);
        assert!(paired_histogram(&[], &[1.0], 5).is_err());
        assert_eq!(pooled_range(&[0.5, -1.0], &[2.0]), (-1.0, 2.0));
    }

    #[test]
    fn l1_of_disjoint_and_equal() {
        assert_eq!(l1_distance(&[2, 0], &[0, 5]), 2.0);
        assert_eq!(l1_distance(&[1, 3], &[2, 6]), 0.0);
    }

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
    }
}
