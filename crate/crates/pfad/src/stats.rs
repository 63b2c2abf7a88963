//! Two-sided Mann-Whitney U test with midrank tie handling.
//!
//! Small pooled samples (`n1 + n2 <= 10`) get the exact permutation
//! distribution by enumerating every way of assigning pooled ranks to the
//! first sample; larger ones use the normal approximation with tie
//! correction and a 0.5 continuity correction.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{PfadError, Result};

/// Largest pooled size that takes the exact-enumeration path.
pub const EXACT_ENUMERATION_LIMIT: usize = 10;

/// Outcome of one U test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTestResult {
    /// U statistic of the first sample; in `[0, n1 * n2]`.
    pub u_statistic: f64,
    /// Two-sided p-value in `[0, 1]`.
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Compares two samples; two-sided alternative.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<UTestResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(PfadError::InvalidSample("empty sample".into()));
    }
    if sample_a.iter().chain(sample_b).any(|v| !v.is_finite()) {
        return Err(PfadError::InvalidSample("non-finite value".into()));
    }
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    let n = n1 + n2;

    // Midranks of the pooled sample; `ranks[i]` belongs to pooled index i,
    // with sample_a occupying indices 0..n1.
    let mut order: Vec<usize> = (0..n).collect();
    let value = |i: usize| -> f64 {
        if i < n1 {
            sample_a[i]
        } else {
            sample_b[i - n1]
        }
    };
    order.sort_by(|&i, &j| value(i).partial_cmp(&value(j)).unwrap());
    let mut ranks = vec![0.0_f64; n];
    let mut tie_sizes = Vec::new();
    let mut pos = 0;
    while pos < n {
        let mut end = pos + 1;
        while end < n && value(order[end]) == value(order[pos]) {
            end += 1;
        }
        // 1-based ranks pos+1 ..= end averaged over the tie group.
        let mid = (pos + 1 + end) as f64 / 2.0;
        for &idx in &order[pos..end] {
            ranks[idx] = mid;
        }
        tie_sizes.push(end - pos);
        pos = end;
    }

    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let p_value = if n <= EXACT_ENUMERATION_LIMIT {
        exact_two_sided_p(&ranks, n1)
    } else {
        normal_two_sided_p(u, n1, n2, &tie_sizes)
    };
    Ok(UTestResult {
        u_statistic: u,
        p_value,
        n1,
        n2,
    })
}

/// Exact permutation p: the fraction of all C(n, n1) rank assignments whose
/// U is at least as far from the null mean as the observed one. Midranks
/// make every U a multiple of 0.5, so a half-ulp guard suffices for the
/// comparison.
fn exact_two_sided_p(ranks: &[f64], n1: usize) -> f64 {
    let n = ranks.len();
    let n2 = n - n1;
    let mu = (n1 * n2) as f64 / 2.0;
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let observed: f64 = ranks[..n1].iter().sum::<f64>() - offset;
    let threshold = (observed - mu).abs() - 1e-9;

    let mut extreme = 0_u64;
    let mut total = 0_u64;
    let mut chosen: Vec<usize> = (0..n1).collect();
    loop {
        let u: f64 = chosen.iter().map(|&i| ranks[i]).sum::<f64>() - offset;
        total += 1;
        if (u - mu).abs() >= threshold {
            extreme += 1;
        }
        // Advance to the next n1-combination of 0..n in lexicographic order.
        let mut i = n1;
        loop {
            if i == 0 {
                return extreme as f64 / total as f64;
            }
            i -= 1;
            if chosen[i] != i + n - n1 {
                break;
            }
        }
        chosen[i] += 1;
        for j in i + 1..n1 {
            chosen[j] = chosen[j - 1] + 1;
        }
    }
}

/// Normal approximation with tie-corrected variance and 0.5 continuity
/// correction. Degenerate pooled samples (all values equal) report p = 1.
fn normal_two_sided_p(u: f64, n1: usize, n2: usize, tie_sizes: &[usize]) -> f64 {
    let n = (n1 + n2) as f64;
    let mu = (n1 * n2) as f64 / 2.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| (t * t * t - t) as f64)
        .sum::<f64>()
        / (n * (n - 1.0));
    let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((u - mu).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal is valid");
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_triples_enumerate_to_one_tenth() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        // 2 of the C(6,3) = 20 assignments are as extreme: U = 0 and U = 9.
        assert!((r.p_value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples_sit_at_the_midpoint() {
        let v = [0.4, 0.7, 0.9];
        let r = mann_whitney_u(&v, &v).unwrap();
        assert_eq!(r.u_statistic, 4.5); // n^2 / 2
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn swapping_samples_reflects_u_and_keeps_p() {
        let a = [1.0, 3.0, 5.0, 7.0];
        let b = [2.0, 2.0, 6.0];
        let fwd = mann_whitney_u(&a, &b).unwrap();
        let rev = mann_whitney_u(&b, &a).unwrap();
        assert_eq!(fwd.u_statistic, 12.0 - rev.u_statistic);
        assert_eq!(fwd.p_value, rev.p_value);
    }

    #[test]
    fn exact_path_matches_independent_enumeration() {
        // Brute force over bitmasks, written independently of the
        // combination walker in the implementation.
        fn brute_force_p(a: &[f64], b: &[f64]) -> f64 {
            let n1 = a.len();
            let n = n1 + b.len();
            let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
            let rank_of = |x: f64| -> f64 {
                let below = pooled.iter().filter(|&&v| v < x).count() as f64;
                let tied = pooled.iter().filter(|&&v| v == x).count() as f64;
                below + (tied + 1.0) / 2.0
            };
            let u_of = |idx: &[usize]| -> f64 {
                idx.iter().map(|&i| rank_of(pooled[i])).sum::<f64>()
                    - (n1 * (n1 + 1)) as f64 / 2.0
            };
            let mu = (n1 * (n - n1)) as f64 / 2.0;
            let obs = u_of(&(0..n1).collect::<Vec<_>>());
            let mut extreme = 0u32;
            let mut total = 0u32;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != n1 {
                    continue;
                }
                let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                total += 1;
                if (u_of(&idx) - mu).abs() >= (obs - mu).abs() - 1e-9 {
                    extreme += 1;
                }
            }
            extreme as f64 / total as f64
        }

        let cases: [(&[f64], &[f64]); 4] = [
            (&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]),
            (&[1.0, 2.0, 2.0, 7.0], &[2.0, 3.0, 9.0]),
            (&[5.0], &[1.0, 2.0, 3.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0]),
            (&[0.1, 0.1, 0.1], &[0.1, 0.1]),
        ];
        for (a, b) in cases {
            assert!(a.len() + b.len() <= EXACT_ENUMERATION_LIMIT);
            let r = mann_whitney_u(a, b).unwrap();
            let want = brute_force_p(a, b);
            assert_eq!(r.p_value, want, "exact p mismatch for {a:?} vs {b:?}");
        }
    }

    #[test]
    fn disjoint_large_samples_are_significant() {
        let a: Vec<f64> = (0..8).map(|i| 1.0 + i as f64).collect();
        let b: Vec<f64> = (0..8).map(|i| 20.0 + i as f64).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert!(r.p_value < 0.05, "p = {}", r.p_value);
    }

    #[test]
    fn u_statistic_stays_in_range() {
        let a = [3.0, 3.0, 3.0, 1.0];
        let b = [3.0, 3.0, 2.0];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(r.u_statistic >= 0.0 && r.u_statistic <= (r.n1 * r.n2) as f64);
    }

    #[test]
    fn all_tied_large_sample_reports_p_one() {
        let a = vec![2.0; 12];
        let b = vec![2.0; 12];
        let r = mann_whitney_u(&a, &b).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[1.0], &[]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }
}
