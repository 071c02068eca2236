//! Two-sided Wilcoxon rank-sum test: exact permutation distribution for small
//! pooled samples, normal approximation with tie correction otherwise.

use statrs::distribution::{ContinuousCDF, Normal};

/// Pooled midranks.
fn ranks(pooled: &[f64]) -> Vec<f64> {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pooled[i].partial_cmp(&pooled[j]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = mid;
        }
        i = j + 1;
    }
    out
}

const EXACT_LIMIT: usize = 20;

/// Two-sided p-value for the hypothesis that `a` and `b` come from the same
/// distribution. Pooled sizes below 20 use the exact permutation distribution
/// of the rank sum; larger samples use the normal approximation with tie
/// correction and continuity correction.
pub fn wilcoxon_ranksum(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "both samples must be non-empty");
    let na = a.len();
    let nb = b.len();
    let n = na + nb;
    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    let r = ranks(&pooled);
    let r_a: f64 = r[..na].iter().sum();

    if n < EXACT_LIMIT {
        return exact_two_sided(&r, na, r_a);
    }

    let mean = na as f64 * (n as f64 + 1.0) / 2.0;
    // tie correction on the rank-sum variance
    let mut tie_term = 0.0;
    let mut sorted = pooled.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let nf = n as f64;
    let var = (na as f64 * nb as f64 / 12.0) * (nf + 1.0 - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((r_a - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Enumerates every way of assigning `na` of the pooled ranks to group a and
/// doubles the smaller tail.
fn exact_two_sided(ranks: &[f64], na: usize, observed: f64) -> f64 {
    let n = ranks.len();
    let mut le = 0u64;
    let mut ge = 0u64;
    let mut total = 0u64;
    let mut comb: Vec<usize> = (0..na).collect();
    loop {
        let sum: f64 = comb.iter().map(|&i| ranks[i]).sum();
        if sum <= observed + 1e-9 {
            le += 1;
        }
        if sum >= observed - 1e-9 {
            ge += 1;
        }
        total += 1;
        // next combination in lexicographic order
        let mut i = na;
        loop {
            if i == 0 {
                return {
                    let p = 2.0 * (le.min(ge) as f64) / total as f64;
                    p.min(1.0)
                };
            }
            i -= 1;
            if comb[i] != i + n - na {
                break;
            }
        }
        comb[i] += 1;
        for j in i + 1..na {
            comb[j] = comb[j - 1] + 1;
        }
    }
}
