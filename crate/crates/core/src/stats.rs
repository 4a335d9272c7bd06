//! Descriptive statistics and the Wilcoxon rank-sum (Mann–Whitney) test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Both samples at most this size and tie-free use the exact null distribution.
pub const EXACT_MAX_SAMPLE: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    Empty,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); absent when n = 1.
    pub sd: Option<f64>,
}

/// Mean and sample standard deviation, accumulated in one pass (Welford).
pub fn summarize(values: &[f64]) -> Result<SummaryStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = values.len();
    let sd = (n > 1).then(|| (m2.max(0.0) / (n - 1) as f64).sqrt());
    Ok(SummaryStats { n, mean, sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Mann–Whitney U of the first sample: its rank sum minus n(n+1)/2.
    #[serde(rename = "W")]
    pub w: f64,
    pub p_value: f64,
    pub method: TestMethod,
}

/// Midranks (1-based) of `values`; tied values share the mean of their ranks.
/// Also returns the tie group sizes.
pub fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Number of arrangements giving each U value for sample sizes `m` and `n`,
/// indexed by U in `0..=m*n`.
pub fn exact_u_counts(m: usize, n: usize) -> Vec<u64> {
    // counts[i][j] holds the distribution for sizes (i, j); build row by row.
    let mut prev: Vec<Vec<u64>> = (0..=n).map(|_| vec![1]).collect();
    for i in 1..=m {
        let mut row: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
        row.push(vec![1]);
        for j in 1..=n {
            let mut dist = vec![0u64; i * j + 1];
            // Largest element is from the first sample: it beats all j others.
            for (u, &c) in prev[j].iter().enumerate() {
                dist[u + j] += c;
            }
            // Largest element is from the second sample.
            for (u, &c) in row[j - 1].iter().enumerate() {
                dist[u] += c;
            }
            row.push(dist);
        }
        prev = row;
    }
    prev.swap_remove(n)
}

/// Two-sided Wilcoxon rank-sum test.
///
/// Exact when both samples have at most [`EXACT_MAX_SAMPLE`] values and no
/// ties; otherwise a normal approximation with tie and continuity
/// corrections. The two-sided p is twice the smaller tail, capped at 1.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<WilcoxonResult, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::Empty);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (m, n) = (x.len(), y.len());
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum: f64 = ranks[..m].iter().sum();
    let w = rank_sum - (m * (m + 1)) as f64 / 2.0;

    if ties.is_empty() && m <= EXACT_MAX_SAMPLE && n <= EXACT_MAX_SAMPLE {
        let counts = exact_u_counts(m, n);
        let total: u64 = counts.iter().sum();
        let u = w.round() as usize;
        let lower: u64 = counts[..=u].iter().sum();
        let upper: u64 = counts[u..].iter().sum();
        let p = (2.0 * lower.min(upper) as f64 / total as f64).min(1.0);
        return Ok(WilcoxonResult {
            w,
            p_value: p,
            method: TestMethod::Exact,
        });
    }

    let (mf, nf) = (m as f64, n as f64);
    let big_n = mf + nf;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    let variance = mf * nf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    let mean = mf * nf / 2.0;
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((w - mean).abs() - 0.5).max(0.0) / variance.sqrt();
        let normal = Normal::standard();
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(WilcoxonResult {
        w,
        p_value: p.clamp(0.0, 1.0),
        method: TestMethod::NormalApprox,
    })
}
