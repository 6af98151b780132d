//! Integer partitions, total content and shifted symmetric power sums.

use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::qseries::partition_count;

/// A nonincreasing sequence of positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::Validation(format!("partition parts must be positive: {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Validation(format!("partition parts must be nonincreasing: {parts:?}")));
        }
        Ok(Self { parts })
    }

    /// Sort and drop zeros; never fails.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self { parts }
    }

    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Part `i` (1-based), zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i - 1).copied().unwrap_or(0)
    }

    pub fn total_content(&self) -> i64 {
        content_of(&self.parts)
    }

    pub fn conjugate(&self) -> Partition {
        let first = self.parts.first().copied().unwrap_or(0);
        let parts = (1..=first)
            .map(|j| self.parts.iter().take_while(|&&p| p >= j).count() as u32)
            .collect();
        Partition { parts }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        write!(f, "({})", body.join(","))
    }
}

/// `K = 1/2 sum_i p_i (p_i + 1 - 2i)` on a raw nonincreasing slice.
pub(crate) fn content_of(parts: &[u32]) -> i64 {
    let twice: i64 = parts
        .iter()
        .enumerate()
        .map(|(i, &p)| p as i64 * (p as i64 + 1 - 2 * (i as i64 + 1)))
        .sum();
    twice / 2
}

pub fn total_content(lambda: &Partition) -> i64 {
    lambda.total_content()
}

pub fn conjugate(lambda: &Partition) -> Partition {
    lambda.conjugate()
}

/// Streams the partitions of `n` in reverse-lexicographic order.
pub struct Partitions {
    parts: Vec<u32>,
    first: bool,
    done: bool,
}

impl Partitions {
    pub fn new(n: u32) -> Self {
        Self {
            parts: if n == 0 { Vec::new() } else { vec![n] },
            first: true,
            done: false,
        }
    }

    fn advance(&mut self) -> bool {
        let parts = &mut self.parts;
        let mut ones = 0u32;
        while let Some(&1) = parts.last() {
            parts.pop();
            ones += 1;
        }
        let Some(last) = parts.last_mut() else {
            return false;
        };
        *last -= 1;
        let v = *last;
        let mut rest = ones + 1;
        while rest >= v {
            parts.push(v);
            rest -= v;
        }
        if rest > 0 {
            parts.push(rest);
        }
        true
    }

    /// Visit every partition without allocating per item.
    pub fn for_each(mut self, mut f: impl FnMut(&[u32])) {
        loop {
            if self.first {
                self.first = false;
            } else if !self.advance() {
                return;
            }
            f(&self.parts);
        }
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        if self.first {
            self.first = false;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        Some(Partition {
            parts: self.parts.clone(),
        })
    }
}

/// Default cap on how many partitions `enumerate_partitions` materializes.
pub const DEFAULT_MATERIALIZE_BUDGET: usize = 5_000_000;

pub fn enumerate_partitions(n: u32) -> Vec<Partition> {
    Partitions::new(n).collect()
}

/// Materialize the partitions of `n` only if there are at most `budget`.
pub fn enumerate_partitions_within(n: u32, budget: usize) -> Result<Vec<Partition>> {
    let count = partition_count(n as usize);
    if count > budget.into() {
        return Err(Error::resource(
            format!("p({n}) = {count} exceeds the materialization budget {budget}; stream instead"),
            f64::INFINITY,
        ));
    }
    Ok(enumerate_partitions(n))
}

/// Partitions of `n` with at most `max_len` parts, reverse-lex order.
pub fn partitions_with_max_len(n: u32, max_len: usize) -> Vec<Partition> {
    Partitions::new(n).filter(|p| p.len() <= max_len).collect()
}

/// Largest `n` for which `content_histogram` will enumerate partitions.
pub const MAX_HISTOGRAM_N: u32 = 100;

/// Number of partitions of `n` with each total content value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContentHistogram {
    n: u32,
    counts: Vec<u64>,
}

impl ContentHistogram {
    pub fn n(&self) -> u32 {
        self.n
    }

    fn offset(&self) -> i64 {
        (self.counts.len() as i64 - 1) / 2
    }

    /// `(K, #{lambda |- n : K(lambda) = K})` for every K with a nonzero count.
    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        let off = self.offset();
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (i as i64 - off, c))
    }

    pub fn count(&self, k: i64) -> u64 {
        let i = k + self.offset();
        if i < 0 {
            return 0;
        }
        self.counts.get(i as usize).copied().unwrap_or(0)
    }

    /// Largest |K| attained, `n(n-1)/2`.
    pub fn max_abs_content(&self) -> i64 {
        self.offset()
    }
}

fn content_dfs(rem: u32, max_part: u32, row: i64, k: i64, counts: &mut [u64], off: i64) {
    if rem == 0 {
        counts[(k + off) as usize] += 1;
        return;
    }
    for p in (1..=rem.min(max_part)).rev() {
        let p64 = p as i64;
        content_dfs(rem - p, p, row + 1, k + p64 * (p64 + 1) / 2 - p64 * row, counts, off);
    }
}

fn build_histogram(n: u32) -> ContentHistogram {
    let off = n as i64 * (n as i64 - 1).max(0) / 2;
    let len = (2 * off + 1) as usize;
    if n == 0 {
        return ContentHistogram { n, counts: vec![1] };
    }
    // Split on the first part so large n spreads across threads.
    let parts: Vec<Vec<u64>> = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut counts = vec![0u64; len];
            let f = first as i64;
            content_dfs(n - first, first, 2, f * (f + 1) / 2 - f, &mut counts, off);
            counts
        })
        .collect();
    let mut counts = vec![0u64; len];
    for part in parts {
        for (c, x) in counts.iter_mut().zip(part) {
            *c += x;
        }
    }
    ContentHistogram { n, counts }
}

fn histogram_cache() -> &'static RwLock<HashMap<u32, Arc<ContentHistogram>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<ContentHistogram>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Distribution of the total content over partitions of `n`, cached.
pub fn content_histogram(n: u32) -> Result<Arc<ContentHistogram>> {
    if n > MAX_HISTOGRAM_N {
        return Err(Error::resource(
            format!("content histogram for n = {n} exceeds the enumeration guard {MAX_HISTOGRAM_N}"),
            f64::INFINITY,
        ));
    }
    if let Some(h) = histogram_cache().read().unwrap().get(&n) {
        return Ok(Arc::clone(h));
    }
    let h = Arc::new(build_histogram(n));
    let mut cache = histogram_cache().write().unwrap();
    Ok(Arc::clone(cache.entry(n).or_insert(h)))
}

/// Histograms for every size in `0..=n_max`, built in parallel.
pub fn content_histograms(n_max: u32) -> Result<Vec<Arc<ContentHistogram>>> {
    (0..=n_max).into_par_iter().map(content_histogram).collect()
}

/// Default number of cached Bernoulli numbers.
pub const BERNOULLI_CACHE: usize = 64;

fn bernoulli_table() -> &'static RwLock<Vec<BigRational>> {
    static TABLE: OnceLock<RwLock<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(bernoulli_upto(BERNOULLI_CACHE)))
}

/// `B_0..=B_n` with the `B_1 = -1/2` convention, from
/// `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
fn bernoulli_upto(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for m in 1..=n {
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            acc += bj * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// Bernoulli number `B_k` with `B_1 = -1/2`.
pub fn bernoulli(k: usize) -> BigRational {
    {
        let table = bernoulli_table().read().unwrap();
        if k < table.len() {
            return table[k].clone();
        }
    }
    let mut table = bernoulli_table().write().unwrap();
    if k >= table.len() {
        *table = bernoulli_upto(k.max(2 * table.len()));
    }
    table[k].clone()
}

/// `zeta(-k) = -B_{k+1}/(k+1)`, with `zeta(0) = -1/2`.
pub fn zeta_negative(k: u32) -> BigRational {
    if k == 0 {
        return BigRational::new((-1).into(), 2.into());
    }
    -bernoulli(k as usize + 1) / BigRational::from_integer(BigInt::from(k + 1))
}

fn half_shift(p: i64, i: i64) -> BigRational {
    // p + 1/2 - i as a rational with denominator 2.
    BigRational::new(BigInt::from(2 * (p - i) + 1), BigInt::from(2))
}

/// Shifted symmetric power sum
/// `sum_i ((l_i + 1/2 - i)^k - (1/2 - i)^k) + (1 - 2^{-k}) zeta(-k)`.
pub fn shifted_power_sum(lambda: &Partition, k: u32) -> BigRational {
    let mut acc = BigRational::zero();
    let e = k as i32;
    for (idx, &p) in lambda.parts().iter().enumerate() {
        let i = idx as i64 + 1;
        acc += num_traits::pow::Pow::pow(half_shift(p as i64, i), e as u32)
            - num_traits::pow::Pow::pow(half_shift(0, i), e as u32);
    }
    let two_k = BigRational::from_integer(BigInt::one() << k as usize);
    let factor = BigRational::one() - BigRational::one() / two_k;
    acc + factor * zeta_negative(k)
}

/// `e(lambda, z) = sum_{i>=1} exp(z (lambda_i + 1/2 - i))` with the closed
/// geometric tail beyond the last part.
pub fn exp_generating_e(lambda: &Partition, z: f64) -> Result<DoubleDouble> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("e(lambda, z) needs z > 0, got {z}")));
    }
    let zd = DoubleDouble::new(z);
    let mut sum = DoubleDouble::ZERO;
    for (idx, &p) in lambda.parts().iter().enumerate() {
        let x = p as f64 + 0.5 - (idx as f64 + 1.0);
        sum += (zd * x).exp();
    }
    let l = lambda.len() as f64;
    let tail = (zd * -(l + 0.5)).exp() / (DoubleDouble::ONE - (-zd).exp());
    Ok(sum + tail)
}

/// `e(lambda, z) - 1/z - sum_{k<=order} p_k(lambda) z^k / k!`, the measured
/// gap between the exponential generating function and its power-sum series.
pub fn e_expansion_discrepancy(lambda: &Partition, z: f64, order: u32) -> Result<DoubleDouble> {
    let e = exp_generating_e(lambda, z)?;
    let zd = DoubleDouble::new(z);
    let mut series = zd.recip();
    let mut zk = DoubleDouble::ONE;
    let mut fact = DoubleDouble::ONE;
    for k in 0..=order {
        if k > 0 {
            zk *= zd;
            fact *= k as f64;
        }
        series += DoubleDouble::from_rational(&shifted_power_sum(lambda, k)) * zk / fact;
    }
    Ok(e - series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_partitions(0), vec![Partition::empty()]);
        let three: Vec<Vec<u32>> = enumerate_partitions(3).into_iter().map(|p| p.parts).collect();
        assert_eq!(three, vec![vec![3], vec![2, 1], vec![1, 1, 1]]);
        assert_eq!(enumerate_partitions(20).len(), 627);
    }

    #[test]
    fn histogram_matches_enumeration() {
        for n in 0..=15u32 {
            let h = content_histogram(n).unwrap();
            let mut direct = HashMap::new();
            for p in Partitions::new(n) {
                *direct.entry(p.total_content()).or_insert(0u64) += 1;
            }
            let got: HashMap<i64, u64> = h.iter().collect();
            assert_eq!(got, direct, "n={n}");
        }
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_negative(0), BigRational::new((-1).into(), 2.into()));
        assert_eq!(zeta_negative(1), BigRational::new((-1).into(), 12.into()));
        assert_eq!(zeta_negative(2), BigRational::zero());
        assert_eq!(zeta_negative(3), BigRational::new(1.into(), 120.into()));
    }

    #[test]
    fn rejects_bad_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
    }
}
