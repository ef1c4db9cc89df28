//! Mann-Whitney U test and small order statistics.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

/// Pooled sizes up to this bound use the exact permutation distribution.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample `{0}` is empty")]
    Empty(&'static str),
    #[error("sample contains NaN")]
    NaN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMethod {
    Exact,
    Normal,
    /// Every value in both samples is identical.
    NoEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UTest {
    pub u_a: f64,
    pub u_b: f64,
    /// One-sided p for "a tends to be smaller than b".
    pub p: f64,
    pub method: PMethod,
}

/// Midranks (1-based) of the pooled values, in input order.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        // positions start..end share the mean of ranks start+1..=end
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

fn pooled(a: &[f64], b: &[f64]) -> Result<Vec<f64>, StatsError> {
    if a.is_empty() {
        return Err(StatsError::Empty("a"));
    }
    if b.is_empty() {
        return Err(StatsError::Empty("b"));
    }
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    if all.iter().any(|v| v.is_nan()) {
        return Err(StatsError::NaN);
    }
    Ok(all)
}

fn u_from_ranks(ranks: &[f64], na: usize) -> f64 {
    let sum: f64 = ranks[..na].iter().sum();
    sum - (na * (na + 1)) as f64 / 2.0
}

/// P(U_a <= observed) under random relabelling of the pooled midranks.
pub fn exact_p(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    let all = pooled(a, b)?;
    let n = all.len();
    assert!(n <= 20, "exact enumeration is for small samples");
    let ranks = midranks(&all);
    let na = a.len();
    let observed = u_from_ranks(&ranks, na);
    let offset = (na * (na + 1)) as f64 / 2.0;
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        if s - offset <= observed + 1e-9 {
            hits += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Normal approximation with tie-corrected variance and continuity correction.
/// `None` when the variance vanishes (all values equal).
pub fn normal_p(a: &[f64], b: &[f64]) -> Result<Option<f64>, StatsError> {
    let all = pooled(a, b)?;
    let ranks = midranks(&all);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let u = u_from_ranks(&ranks, a.len());
    let mut sorted = ranks.clone();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    let var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(None);
    }
    let z = (u - na * nb / 2.0 + 0.5) / var.sqrt();
    Ok(Some(Normal::new(0.0, 1.0).expect("unit normal").cdf(z)))
}

/// One-sided Mann-Whitney U test of "a tends to be smaller than b".
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTest, StatsError> {
    let all = pooled(a, b)?;
    let ranks = midranks(&all);
    let u_a = u_from_ranks(&ranks, a.len());
    let u_b = (a.len() * b.len()) as f64 - u_a;
    if all.iter().all(|&v| v == all[0]) {
        return Ok(UTest { u_a, u_b, p: 0.5, method: PMethod::NoEvidence });
    }
    let (p, method) = if all.len() <= EXACT_MAX_N {
        (exact_p(a, b)?, PMethod::Exact)
    } else {
        (normal_p(a, b)?.unwrap_or(0.5), PMethod::Normal)
    };
    Ok(UTest { u_a, u_b, p, method })
}

/// Median; the mean of the two middle values for even sizes. Infinities sort last.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else if v[m - 1] == v[m] {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}
