//! Statistical routines the benchmark needs: median, Spearman rank
//! correlation, a one-sided Wilcoxon signed-rank test, and a chi-squared
//! uniformity test.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Ranks with ties averaged.
fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation coefficient.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() >= 2);
    let ra = ranks(a);
    let rb = ranks(b);
    pearson(&ra, &rb)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// One-sided Wilcoxon signed-rank test of H1: x > y over paired samples,
/// using the normal approximation with tie correction and continuity
/// correction. Returns the p-value (1.0 when no informative pairs exist).
pub fn wilcoxon_signed_rank_greater(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let diffs: Vec<f64> = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return 1.0;
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let r = ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(r.iter())
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, rank)| rank)
        .sum();
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    // Tie correction: subtract sum(t^3 - t) / 48 from the variance.
    let mut var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        if t > 1.0 {
            var -= (t * t * t - t) / 48.0;
        }
        i = j + 1;
    }
    if var <= 0.0 {
        return if w_plus > mean { 0.0 } else { 1.0 };
    }
    let z = (w_plus - 0.5 - mean) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    1.0 - normal.cdf(z)
}

/// Chi-squared goodness-of-fit p-value against the uniform distribution.
pub fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    assert!(counts.len() >= 2);
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 1.0;
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("valid dof");
    1.0 - dist.cdf(statistic)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_odd_and_even_lists() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn spearman_perfect_monotone_is_one() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [10.0, 20.0, 25.0, 40.0, 100.0];
        assert!((spearman_rho(&a, &b) - 1.0).abs() < 1e-12);
        let rev: Vec<f64> = b.iter().rev().copied().collect();
        assert!((spearman_rho(&a, &rev) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_handles_ties() {
        let a = [1.0, 1.0, 2.0, 3.0];
        let b = [5.0, 5.0, 6.0, 9.0];
        assert!(spearman_rho(&a, &b) > 0.9);
    }

    #[test]
    fn wilcoxon_detects_a_clear_shift() {
        let x: Vec<f64> = (0..20).map(|i| 0.6 + 0.01 * i as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| 0.4 + 0.01 * i as f64).collect();
        assert!(wilcoxon_signed_rank_greater(&x, &y) < 0.001);
        assert!(wilcoxon_signed_rank_greater(&y, &x) > 0.99);
    }

    #[test]
    fn wilcoxon_on_identical_samples_is_one() {
        let x = [0.5, 0.6, 0.7];
        assert_eq!(wilcoxon_signed_rank_greater(&x, &x), 1.0);
    }

    #[test]
    fn chi_square_accepts_uniform_counts() {
        let counts = vec![1000u64; 10];
        assert!(chi_square_uniform_p(&counts) > 0.99);
    }

    #[test]
    fn chi_square_rejects_skewed_counts() {
        let counts = vec![1000, 10, 10, 10];
        assert!(chi_square_uniform_p(&counts) < 1e-6);
    }
}
