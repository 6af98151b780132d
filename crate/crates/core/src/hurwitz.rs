//! Hurwitz numbers of the torus, their generating functions, and the
//! integrals over random coverings that reproduce the heat trace.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use rayon::prelude::*;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::group_duals::{FamilyType, GroupFamily};
use crate::partitions::{content_histogram, MAX_HISTOGRAM_N};
use crate::qseries::{
    check_q, choose_cutoff, factorial, factorial_dd, jacobi_theta_moment, partition_count, poly_partition_sum_upper,
    q_of_t, rounding, tail_bound_poly_partition_sum, CertifiedValue, QPolynomial,
};

/// `H_1(n, k) = sum_{alpha |- n} K(alpha)^k`, exactly. Odd `k` gives 0.
pub fn hurwitz_number(n: u32, k: u32) -> Result<BigInt> {
    let h = content_histogram(n)?;
    let mut acc = BigInt::zero();
    for (c, count) in h.iter() {
        acc += Pow::pow(BigInt::from(c), k) * count;
    }
    Ok(acc)
}

fn hurwitz_cache() -> &'static RwLock<HashMap<(u32, u32), DoubleDouble>> {
    static CACHE: OnceLock<RwLock<HashMap<(u32, u32), DoubleDouble>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `H_1(n, k)` rounded to double-double, cached.
pub(crate) fn hurwitz_dd(n: u32, k: u32) -> Result<DoubleDouble> {
    if k % 2 == 1 {
        return Ok(DoubleDouble::ZERO);
    }
    if let Some(v) = hurwitz_cache().read().unwrap().get(&(n, k)) {
        return Ok(*v);
    }
    let v = DoubleDouble::from_bigint(&hurwitz_number(n, k)?);
    hurwitz_cache().write().unwrap().insert((n, k), v);
    Ok(v)
}

/// `H_1(n, k)` for `n = 0..=m`, computed in parallel.
fn hurwitz_column(m: usize, k: u32) -> Result<Vec<DoubleDouble>> {
    (0..=m as u32).into_par_iter().map(|n| hurwitz_dd(n, k)).collect()
}

/// Exact Hurwitz numbers for `1 <= n <= n_max` and even `k <= k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzTable {
    n_max: u32,
    k_max: u32,
    entries: BTreeMap<(u32, u32), BigInt>,
}

impl HurwitzTable {
    pub fn build(n_max: u32, k_max: u32) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::Validation("HurwitzTable needs n_max >= 1".into()));
        }
        let rows: Vec<Vec<((u32, u32), BigInt)>> = (1..=n_max)
            .into_par_iter()
            .map(|n| {
                (0..=k_max)
                    .step_by(2)
                    .map(|k| hurwitz_number(n, k).map(|h| ((n, k), h)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_max,
            k_max,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Entry lookup; odd `k` is zero, out-of-range is `None`.
    pub fn get(&self, n: u32, k: u32) -> Option<BigInt> {
        if n == 0 || n > self.n_max || k > self.k_max {
            return None;
        }
        if k % 2 == 1 {
            return Some(BigInt::zero());
        }
        self.entries.get(&(n, k)).cloned()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &BigInt)> {
        self.entries.iter().map(|(&(n, k), h)| (n, k, h))
    }

    /// CSV with columns `n,k,H1`; big integers as plain decimal text.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Validation(format!("csv write failed: {e}"));
        w.write_record(["n", "k", "H1"]).map_err(io)?;
        for (n, k, h) in self.iter() {
            w.write_record([n.to_string(), k.to_string(), h.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Validation(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Largest degree the monodromy oracle accepts.
pub const ORACLE_MAX_N: u32 = 7;
/// Largest number of transpositions the monodromy oracle accepts.
pub const ORACLE_MAX_K: u32 = 6;

fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..n as u8).collect();
    loop {
        out.push(cur.clone());
        // Next permutation in lexicographic order.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Lexicographic rank of a permutation (Lehmer code).
fn perm_rank(p: &[u8]) -> usize {
    let n = p.len();
    let mut rank = 0;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&x| x < p[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    b.iter().map(|&i| a[i as usize]).collect()
}

fn inverse(a: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x as usize] = i as u8;
    }
    inv
}

/// `#{(s1, s2, t_1..t_k) : [s1, s2] t_1 ... t_k = id} / n!` over `S_n`, with
/// the `t_i` transpositions, by convolution in the group algebra.
pub fn hurwitz_monodromy_oracle(n: u32, k: u32) -> Result<BigRational> {
    if n < 1 {
        return Err(Error::Validation("the monodromy oracle needs n >= 1".into()));
    }
    if n > ORACLE_MAX_N || k > ORACLE_MAX_K {
        return Err(Error::resource(
            format!("monodromy oracle limited to n <= {ORACLE_MAX_N}, k <= {ORACLE_MAX_K} (got n={n}, k={k})"),
            f64::INFINITY,
        ));
    }
    let n = n as usize;
    let perms = all_permutations(n);
    let size = perms.len();
    let mut transpositions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut t: Vec<u8> = (0..n as u8).collect();
            t.swap(i, j);
            transpositions.push(t);
        }
    }
    // times[t][g] = index of g * t.
    let times: Vec<Vec<usize>> = transpositions
        .iter()
        .map(|t| perms.iter().map(|g| perm_rank(&compose(g, t))).collect())
        .collect();
    // w[g] = number of ways to write g as a product of k transpositions.
    let mut w = vec![0u64; size];
    w[0] = 1;
    for _ in 0..k {
        let mut next = vec![0u64; size];
        for (g, slot) in next.iter_mut().enumerate() {
            *slot = times.iter().map(|m| w[m[g]]).sum();
        }
        w = next;
    }
    let total: u128 = perms
        .par_iter()
        .map(|s1| {
            let s1_inv = inverse(s1);
            let mut acc: u128 = 0;
            for s2 in &perms {
                let s2_inv = inverse(s2);
                let comm = compose(&compose(s1, s2), &compose(&s1_inv, &s2_inv));
                acc += w[perm_rank(&inverse(&comm))] as u128;
            }
            acc
        })
        .sum();
    Ok(BigRational::new(BigInt::from(total), factorial(n as u32)))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// `D^m F_{1,k}(q) = sum_{n>=0} n^m H_1(n, k) q^n`, with the tail bounded
/// through `|K| <= n^2/2`.
pub fn hurwitz_gf(q: impl Into<DoubleDouble>, k: u32, m: u32, tol: f64) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    check_tol(tol)?;
    if k % 2 == 1 {
        return Ok(CertifiedValue::zero());
    }
    let scale = 2f64.powi(k as i32);
    let (cut, _) = choose_cutoff(q.upper_f64(), m + 2 * k, tol / 2.0 * scale, MAX_HISTOGRAM_N as usize)?;
    hurwitz_gf_at_cutoff(q, k, m, cut)
}

/// `D^m F_{1,k}(q)` summed over `n <= cut`, with the tail bound at that cutoff.
pub(crate) fn hurwitz_gf_at_cutoff(q: DoubleDouble, k: u32, m: u32, cut: usize) -> Result<CertifiedValue> {
    if k % 2 == 1 {
        return Ok(CertifiedValue::zero());
    }
    let tail = tail_bound_poly_partition_sum(q.upper_f64(), cut, m + 2 * k)? / 2f64.powi(k as i32);
    let h = hurwitz_column(cut, k)?;
    let mut sum = DoubleDouble::ZERO;
    let mut qn = DoubleDouble::ONE;
    for (n, hn) in h.iter().enumerate() {
        if n > 0 {
            qn *= q;
        }
        if !hn.is_zero() {
            sum += DoubleDouble::from_i64(n as i64).powi(m) * *hn * qn;
        }
    }
    Ok(CertifiedValue::new(sum, tail + rounding(sum) * (cut as f64 + 4.0), cut))
}

/// Exact truncation `sum_{n<=n_max} H_1(n, k) q^n` of `F_{1,k}`.
pub fn hurwitz_series(k: u32, n_max: u32) -> Result<QPolynomial> {
    let coeffs = (0..=n_max)
        .into_par_iter()
        .map(|n| hurwitz_number(n, k))
        .collect::<Result<Vec<_>>>()?;
    QPolynomial::from_integers(coeffs)
}

fn fact(n: u32) -> DoubleDouble {
    factorial_dd(n)
}

/// Coefficients multiplying generating functions in the duality formula.
/// Indices are `(k1, k2, k3, k4)` for types A', A and `(k1, k2)` otherwise.
pub fn kappa_coefficient(family: FamilyType, indices: &[u32], t: f64) -> Result<CertifiedValue> {
    let q = q_of_t(t)?;
    let td = DoubleDouble::new(t);
    let arity = if family.is_unitary() { 4 } else { 2 };
    if indices.len() != arity {
        return Err(Error::Validation(format!(
            "type {family} takes {arity} kappa indices, got {}",
            indices.len()
        )));
    }
    let v = match family {
        FamilyType::APrime | FamilyType::A => {
            let (k1, k2, k3, k4) = (indices[0], indices[1], indices[2], indices[3]);
            if (k1 + k2) % 2 == 1 {
                return Err(Error::Validation(format!("kappa for type {family} needs k1 + k2 even, got {k1} + {k2}")));
            }
            let half = (k1 + k2) / 2;
            let sign = if k2 % 2 == 1 { -1.0 } else { 1.0 };
            let denom = fact(k1) * fact(k2) * fact(2 * k3) * fact(2 * k4);
            if family == FamilyType::APrime {
                let theta = jacobi_theta_moment(q, half, 1e-28)?;
                let c = td.powi(k1 + k2 + 2 * k3 + 2 * k4) / denom * sign;
                theta.scale(c)
            } else {
                let c = fact(k1 + k2) * td.powi(half + 2 * k3 + 2 * k4) * sign
                    / (DoubleDouble::new(2.0).powi(half) * fact(half) * denom);
                CertifiedValue::new(c, rounding(c), 0)
            }
        }
        FamilyType::B | FamilyType::C | FamilyType::D => {
            let (k1, k2) = (indices[0], indices[1]);
            let sign = if family == FamilyType::C && k1 % 2 == 1 { -1.0 } else { 1.0 };
            let c = td.powi(k1 + 2 * k2) * sign / (DoubleDouble::new(2.0).powi(k1) * fact(k1) * fact(2 * k2));
            CertifiedValue::new(c, rounding(c), 0)
        }
    };
    Ok(v)
}

/// Sums certified terms, halving every per-term tolerance until the total
/// bound meets `tol`.
pub(crate) fn sum_to_tol(tol: f64, mut eval: impl FnMut(f64) -> Result<CertifiedValue>) -> Result<CertifiedValue> {
    let mut inner = tol / 16.0;
    let mut last = None;
    for _ in 0..6 {
        let v = eval(inner)?;
        if v.tail_bound <= tol {
            return Ok(v);
        }
        inner = inner * tol / v.tail_bound / 4.0;
        last = Some(v);
    }
    let v = last.expect("at least one attempt");
    Err(Error::resource("coefficient tolerance not reached", v.tail_bound))
}

/// `a_k` assembled from kappa coefficients and Hurwitz generating functions.
pub fn coefficient_via_gf(family: FamilyType, t: f64, k: u32, tol: f64) -> Result<CertifiedValue> {
    let q = q_of_t(t)?;
    check_tol(tol)?;
    if family.is_unitary() && k % 2 == 1 {
        return Ok(CertifiedValue::zero());
    }
    sum_to_tol(tol, |inner| {
        let mut gf: HashMap<(u32, u32), CertifiedValue> = HashMap::new();
        let mut get = |m: u32, kk: u32| -> Result<CertifiedValue> {
            if let Some(v) = gf.get(&(m, kk)) {
                return Ok(*v);
            }
            let v = hurwitz_gf(q, kk, m, inner)?;
            gf.insert((m, kk), v);
            Ok(v)
        };
        let mut acc = CertifiedValue::zero();
        if family.is_unitary() {
            for k3 in 0..=k / 2 {
                for k4 in 0..=(k / 2 - k3) {
                    let rest = k - 2 * k3 - 2 * k4;
                    for k1 in 0..=rest {
                        let k2 = rest - k1;
                        if (k1 + k2) % 2 == 1 {
                            continue;
                        }
                        let kappa = kappa_coefficient(family, &[k1, k2, k3, k4], t)?;
                        let term = kappa.mul(&get(k1, 2 * k3)?).mul(&get(k2, 2 * k4)?);
                        acc = acc.add(&term);
                    }
                }
            }
        } else {
            for k2 in 0..=k / 2 {
                let k1 = k - 2 * k2;
                let kappa = kappa_coefficient(family, &[k1, k2], t)?;
                acc = acc.add(&kappa.mul(&get(k1, 2 * k2)?));
            }
        }
        Ok(acc)
    })
}

/// Double sums `sum_{n1,n2<=M} q^{n1+n2} H(n1,2a) H(n2,2b) (n1-n2)^{2c}`.
pub(crate) struct PairSums {
    qf: f64,
    cutoff: usize,
    qn: Vec<DoubleDouble>,
    h: Vec<Vec<DoubleDouble>>,
    full_sums: HashMap<u32, f64>,
}

impl PairSums {
    pub fn new(q: DoubleDouble, a_max: u32, cutoff: usize) -> Result<Self> {
        let mut qn = Vec::with_capacity(cutoff + 1);
        let mut x = DoubleDouble::ONE;
        for _ in 0..=cutoff {
            qn.push(x);
            x *= q;
        }
        let h = (0..=a_max).map(|a| hurwitz_column(cutoff, 2 * a)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            qf: q.upper_f64(),
            cutoff,
            qn,
            h,
            full_sums: HashMap::new(),
        })
    }

    pub fn sum(&self, a: u32, b: u32, c: u32) -> DoubleDouble {
        let (ha, hb) = (&self.h[a as usize], &self.h[b as usize]);
        let mut acc = DoubleDouble::ZERO;
        for n1 in 0..=self.cutoff {
            if ha[n1].is_zero() {
                continue;
            }
            let mut row = DoubleDouble::ZERO;
            for n2 in 0..=self.cutoff {
                if hb[n2].is_zero() {
                    continue;
                }
                let d = n1 as i64 - n2 as i64;
                if c > 0 && d == 0 {
                    continue;
                }
                row += self.qn[n2] * hb[n2] * DoubleDouble::from_i64(d * d).powi(c);
            }
            acc += row * self.qn[n1] * ha[n1];
        }
        acc
    }

    fn full(&mut self, d: u32) -> Option<f64> {
        if let Some(v) = self.full_sums.get(&d) {
            return Some(*v);
        }
        let v = poly_partition_sum_upper(self.qf, d).ok()?;
        self.full_sums.insert(d, v);
        Some(v)
    }

    /// Bound on the terms with `max(n1, n2) > M`, from `H(n,2a) <= p(n) n^{4a}/4^a`
    /// and `max(n1,n2)^{2c} <= n1^{2c} + n2^{2c}`.
    pub fn tail(&mut self, m: usize, a: u32, b: u32, c: u32) -> Option<f64> {
        let qf = self.qf;
        let t = move |d: u32| tail_bound_poly_partition_sum(qf, m, d).ok();
        let one_side = |s: &mut Self, x: u32, y: u32| -> Option<f64> {
            Some(t(4 * x + 2 * c)? * s.full(4 * y)? + t(4 * x)? * s.full(4 * y + 2 * c)?)
        };
        let both = one_side(self, a, b)? + one_side(self, b, a)?;
        Some(both / 4f64.powi((a + b) as i32) * (1.0 + 1e-12))
    }
}

fn check_t(t: f64) -> Result<()> {
    q_of_t(t).map(|_| ())
}

/// Right-hand side of the Euler-characteristic cutoff representation:
/// coverings (pairs of coverings for types A', A) with `chi >= -p`
/// (resp. `chi_1 + chi_2 >= -2p`) weighted by the coupling function and
/// `N^chi`. Degree 0 (the empty covering) is included.
pub fn covering_integral_euler_cutoff(g: &GroupFamily, t: f64, p: u32, tol: f64) -> Result<CertifiedValue> {
    check_t(t)?;
    check_tol(tol)?;
    if p < 1 {
        return Err(Error::Validation("the Euler cutoff needs p >= 1".into()));
    }
    let n_mat = g.matrix_size() as f64;
    let q = q_of_t(t)?;
    let td = DoubleDouble::new(t);
    let inv_n2 = DoubleDouble::ONE / (n_mat * n_mat);
    match g.family() {
        FamilyType::B | FamilyType::C | FamilyType::D => {
            let shift = if g.family() == FamilyType::C { -t } else { t } / (2.0 * n_mat);
            let x = q * DoubleDouble::new(shift).exp();
            let terms = p / 2 + 1;
            sum_to_tol(tol, |inner| {
                let mut acc = CertifiedValue::zero();
                for k in 0..terms {
                    let coef = (td * td * inv_n2).powi(k) / fact(2 * k);
                    let f = hurwitz_gf(x, 2 * k, 0, inner / terms as f64)?;
                    acc = acc.add(&f.scale(coef));
                }
                Ok(acc)
            })
        }
        FamilyType::A | FamilyType::APrime => {
            let prime = g.family() == FamilyType::APrime;
            // (k1, k2, k3, coefficient) with the theta moment split off for A'.
            let mut combos = Vec::new();
            for k1 in 0..=p {
                for k2 in 0..=(p - k1) {
                    let outer = (td * td * inv_n2).powi(k1 + k2) / (fact(2 * k1) * fact(2 * k2));
                    for k3 in 0..=(2 * p - k1 - k2) {
                        let inner = if prime {
                            (td * td * inv_n2).powi(k3) / fact(2 * k3)
                        } else {
                            (td * inv_n2 * 0.5).powi(k3) / fact(k3)
                        };
                        combos.push((k1, k2, k3, outer * inner));
                    }
                }
            }
            let thetas = if prime {
                (0..=2 * p)
                    .map(|m| jacobi_theta_moment(q, m, tol / 64.0))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            let theta_upper = |k3: u32| -> f64 {
                if prime {
                    thetas[k3 as usize].value.upper_f64() + thetas[k3 as usize].tail_bound
                } else {
                    1.0
                }
            };
            let mut pairs = PairSums::new(q, 0, 0)?;
            let target = tol / 4.0;
            let mut bound_at = |m: usize| -> Option<f64> {
                let mut total = 0.0;
                for &(k1, k2, k3, c) in &combos {
                    total += c.upper_f64() * theta_upper(k3) * pairs.tail(m, k1, k2, k3)?;
                }
                Some(total)
            };
            let mut cut = 4usize;
            while !matches!(bound_at(cut), Some(b) if b <= target) {
                if cut >= MAX_HISTOGRAM_N as usize {
                    return Err(Error::resource(
                        "degree cutoff for the covering integral exceeds the enumeration guard",
                        bound_at(cut).unwrap_or(f64::INFINITY),
                    ));
                }
                cut = (cut + 4).min(MAX_HISTOGRAM_N as usize);
            }
            let size_tail = bound_at(cut).expect("checked");
            let sums = PairSums::new(q, p, cut)?;
            let mut acc = CertifiedValue::new(DoubleDouble::ZERO, size_tail, cut);
            for &(k1, k2, k3, c) in &combos {
                let s = sums.sum(k1, k2, k3);
                let term = CertifiedValue::new(s * c, rounding(s * c) * (cut as f64 + 4.0), cut);
                let term = if prime { term.mul(&thetas[k3 as usize]) } else { term };
                acc = acc.add(&term);
            }
            Ok(acc)
        }
    }
}

/// Largest admissible degree `floor(N^gamma)`.
pub fn degree_cutoff(n_mat: u32, gamma: f64) -> usize {
    ((n_mat as f64).powf(gamma) + 1e-9).floor() as usize
}

/// `sum_{lambda |- n} cosh(x K(lambda))` as the series
/// `sum_k x^{2k} H_1(n,2k)/(2k)!`, stopped by a Taylor remainder bound.
fn cosh_series(n: u32, x: DoubleDouble, tol: f64) -> Result<CertifiedValue> {
    let kmax_abs = (n as f64) * (n as f64 - 1.0).max(0.0) / 2.0;
    let y = x.abs().upper_f64() * kmax_abs;
    let pn = num_traits::ToPrimitive::to_f64(&partition_count(n as usize)).unwrap_or(f64::INFINITY);
    let mut acc = DoubleDouble::ZERO;
    let mut k = 0u32;
    loop {
        acc += x.powi(2 * k) * hurwitz_dd(n, 2 * k)? / fact(2 * k);
        // Remainder of the cosh series beyond order 2k, for every partition.
        let next = 2 * k + 2;
        let log_rem = next as f64 * y.ln() - ln_factorial(next) + y;
        let rem = if y == 0.0 { 0.0 } else { pn * log_rem.exp() };
        if rem <= tol {
            return Ok(CertifiedValue::new(acc, rem + rounding(acc) * (k as f64 + 4.0), k as usize));
        }
        k += 1;
        if k > 400 {
            return Err(Error::resource("cosh series did not reach tolerance", rem));
        }
    }
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// `sum_{n in Z} q^{n^2} cosh(t n d / N)` with a certified window.
fn unitary_coupling(t: f64, d: i64, n_mat: f64, tol: f64) -> Result<CertifiedValue> {
    let td = DoubleDouble::new(t);
    let slope = t * d.unsigned_abs() as f64 / n_mat;
    let log_term = |n: f64| -t * n * n / 2.0 + slope * n;
    let mut w = 1i64;
    let bound = loop {
        let n = (w + 1) as f64;
        let log_ratio = -t * (2.0 * n + 1.0) / 2.0 + slope;
        if log_ratio < 0.0 {
            let b = 2.0 * log_term(n).exp() / (1.0 - log_ratio.exp()) * (1.0 + 1e-12);
            if b <= tol {
                break b;
            }
        }
        w += 1;
        if w > 1_000_000 {
            return Err(Error::resource("coupling window did not converge", f64::INFINITY));
        }
    };
    let mut acc = DoubleDouble::ZERO;
    for n in -w..=w {
        let arg = td * (-(n * n) as f64 / 2.0) + td * (n * d) as f64 / n_mat;
        acc += arg.exp();
    }
    Ok(CertifiedValue::new(acc, bound + rounding(acc) * (2 * w + 4) as f64, w as usize))
}

/// Right-hand side of the degree cutoff representation: coverings of
/// degree at most `N^gamma` with the full (un-truncated) coupling function.
pub fn covering_integral_degree_cutoff(g: &GroupFamily, t: f64, gamma: f64, tol: f64) -> Result<CertifiedValue> {
    check_t(t)?;
    check_tol(tol)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let n_mat = g.matrix_size() as f64;
    let deg = degree_cutoff(g.matrix_size(), gamma);
    if deg > MAX_HISTOGRAM_N as usize {
        return Err(Error::resource(
            format!("degree cutoff {deg} exceeds the enumeration guard {MAX_HISTOGRAM_N}"),
            f64::INFINITY,
        ));
    }
    let q = q_of_t(t)?;
    let td = DoubleDouble::new(t);
    let x = td / n_mat;
    let slots = ((deg + 1) * (deg + 1)) as f64;
    let piece_tol = tol / (4.0 * slots);
    let cosh: Vec<CertifiedValue> = (0..=deg as u32)
        .into_par_iter()
        .map(|n| cosh_series(n, x, piece_tol))
        .collect::<Result<Vec<_>>>()?;
    let mut qn = Vec::with_capacity(deg + 1);
    let mut y = DoubleDouble::ONE;
    for _ in 0..=deg {
        qn.push(y);
        y *= q;
    }
    let mut acc = CertifiedValue::zero();
    match g.family() {
        FamilyType::B | FamilyType::C | FamilyType::D => {
            let sign = if g.family() == FamilyType::C { -1.0 } else { 1.0 };
            for n in 0..=deg {
                let w = qn[n] * (td * (sign * n as f64 / (2.0 * n_mat))).exp();
                acc = acc.add(&cosh[n].scale(w));
            }
        }
        FamilyType::A | FamilyType::APrime => {
            let mut couplings = HashMap::new();
            for d in -(deg as i64)..=deg as i64 {
                let c = if g.family() == FamilyType::APrime {
                    unitary_coupling(t, d, n_mat, piece_tol)?
                } else {
                    CertifiedValue::exact((td * ((d * d) as f64 / (2.0 * n_mat * n_mat))).exp())
                };
                couplings.insert(d, c);
            }
            for n1 in 0..=deg {
                for n2 in 0..=deg {
                    let d = n1 as i64 - n2 as i64;
                    let term = cosh[n1].mul(&cosh[n2]).mul(&couplings[&d]).scale(qn[n1] * qn[n2]);
                    acc = acc.add(&term);
                }
            }
        }
    }
    Ok(CertifiedValue::new(acc.value, acc.tail_bound, deg))
}

/// The measure on torus coverings: weight `q_t^n t^{2k}/(2k)!` per covering
/// of degree `n` with `2k` simple ramification points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoveringMeasure {
    t: f64,
}

impl CoveringMeasure {
    pub fn new(t: f64) -> Result<Self> {
        check_t(t)?;
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn q(&self) -> DoubleDouble {
        q_of_t(self.t).expect("validated t")
    }

    /// Weight of a single covering.
    pub fn weight(&self, degree: u32, ramification_points: u32) -> DoubleDouble {
        self.q().powi(degree) * DoubleDouble::new(self.t).powi(ramification_points) / fact(ramification_points)
    }

    /// Total mass of the slice of degree-`n` coverings with `2k` ramifications.
    pub fn slice_mass(&self, degree: u32, half_ramification: u32) -> Result<DoubleDouble> {
        Ok(self.weight(degree, 2 * half_ramification) * hurwitz_dd(degree, 2 * half_ramification)?)
    }

    /// `int f(deg, chi) d rho` restricted to `deg <= max_degree`, `2k <= 2 max_half`.
    pub fn integrate_truncated(
        &self,
        max_degree: u32,
        max_half: u32,
        f: impl Fn(u32, i64) -> DoubleDouble,
    ) -> Result<DoubleDouble> {
        let mut acc = DoubleDouble::ZERO;
        for n in 0..=max_degree {
            for k in 0..=max_half {
                let chi = torus_generic_euler(2 * k)?;
                acc += self.slice_mass(n, k)? * f(n, chi);
            }
        }
        Ok(acc)
    }
}

/// `(partial, closed)` with `partial = sum_{k<=k_max} t^{2k} H_1(n,2k)/(2k)!`
/// and `closed = sum_{lambda |- n} cosh(t K(lambda))`.
pub fn mass_slice(n: u32, t: f64, k_max: u32) -> Result<(DoubleDouble, DoubleDouble)> {
    if n < 1 {
        return Err(Error::Validation("mass_slice needs n >= 1".into()));
    }
    check_t(t)?;
    let td = DoubleDouble::new(t);
    let h = content_histogram(n)?;
    let top = h.max_abs_content();
    let peak = t * top as f64;
    // Terms as (H_1(n,2k)/top^{2k}) * (t top)^{2k}/(2k)!, since H_1 alone overflows.
    let top_big = BigInt::from(top.max(1));
    let x2 = (td * top.max(1) as f64).sqr();
    let mut power = DoubleDouble::ONE;
    let mut partial = DoubleDouble::ZERO;
    for k in 0..=k_max {
        if k > 0 {
            power = power * x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
        }
        let ratio = BigRational::new(hurwitz_number(n, 2 * k)?, Pow::pow(&top_big, 2 * k));
        let term = DoubleDouble::from_rational(&ratio) * power;
        if (2 * k) as f64 > peak && term.abs().to_f64() < 1e-40 * partial.abs().to_f64() {
            break;
        }
        partial += term;
    }
    let closed = h
        .iter()
        .map(|(c, count)| (td * c as f64).cosh() * count as f64)
        .sum();
    Ok((partial, closed))
}

/// `ln(q_t^n A_n)` with `A_n = sum_{lambda |- n} cosh(t K(lambda))`, evaluated
/// stably for large `n`.
pub fn log_mass_term(n: u32, t: f64) -> Result<f64> {
    check_t(t)?;
    let h = content_histogram(n)?;
    let top = t * h.max_abs_content() as f64;
    let s: f64 = h
        .iter()
        .map(|(c, count)| {
            let x = t * c as f64;
            count as f64 * ((x - top).exp() + (-x - top).exp()) / 2.0
        })
        .sum();
    Ok(-t * n as f64 / 2.0 + top + s.ln())
}

/// Logarithms of the partial sums, over `n1, n2 <= D` for `D = 1..=max_degree`,
/// of the integrand obtained by using the limit coupling function for
/// types A', A at fixed `(k1, k2, N)`. They grow without bound.
pub fn non_integrability_partial_sums(
    family: FamilyType,
    n_mat: u32,
    t: f64,
    k1: u32,
    k2: u32,
    max_degree: u32,
) -> Result<Vec<f64>> {
    if !family.is_unitary() {
        return Err(Error::Validation(format!("non-integrability applies to types A' and A, not {family}")));
    }
    check_t(t)?;
    let nf = n_mat as f64;
    let log_h = |n: u32, k: u32| -> Result<f64> {
        let h = hurwitz_dd(n, 2 * k)?;
        Ok(if h.is_zero() { f64::NEG_INFINITY } else { h.to_f64().ln() })
    };
    let log_coupling = |d: i64| -> f64 {
        match family {
            FamilyType::A => t * (d * d) as f64 / (2.0 * nf * nf),
            _ => {
                let center = (d as f64 / nf).round() as i64;
                let terms: Vec<f64> = (center - 60..=center + 60)
                    .map(|n| -t * (n * n) as f64 / 2.0 + t * (n * d) as f64 / nf)
                    .collect();
                let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
            }
        }
    };
    let scale = -2.0 * (k1 + k2) as f64 * nf.ln();
    let mut out = Vec::with_capacity(max_degree as usize);
    let mut running = f64::NEG_INFINITY;
    for deg in 1..=max_degree {
        // Add the new shell max(n1, n2) = deg.
        let mut shell = Vec::new();
        let pairs = (1..=deg).map(|o| (deg, o)).chain((1..deg).map(|o| (o, deg)));
        for (n1, n2) in pairs {
            {
                let v = -t * (n1 + n2) as f64 / 2.0
                    + log_coupling(n1 as i64 - n2 as i64)
                    + log_h(n1, k1)?
                    + log_h(n2, k2)?
                    + scale;
                shell.push(v);
            }
        }
        for v in shell {
            running = log_add(running, v);
        }
        out.push(running);
    }
    Ok(out)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Euler characteristic of a degree-`degree` covering of a genus-`base_genus`
/// surface with the given ramification indices: `deg (2 - 2g) - sum (e_p - 1)`.
pub fn riemann_hurwitz_euler(degree: u32, ram_indices: &[u32], base_genus: u32) -> Result<i64> {
    if degree < 1 {
        return Err(Error::Validation("covering degree must be at least 1".into()));
    }
    let mut total = 0i64;
    for &e in ram_indices {
        if e < 2 || e > degree {
            return Err(Error::Validation(format!(
                "ramification index {e} must lie in 2..={degree}"
            )));
        }
        total += e as i64 - 1;
    }
    if total % 2 != 0 {
        return Err(Error::Validation(format!(
            "total ramification {total} is odd, so no covering surface exists"
        )));
    }
    Ok(degree as i64 * (2 - 2 * base_genus as i64) - total)
}

/// Euler characteristic of a torus covering with `points` simple branch
/// points, independent of the degree.
pub fn torus_generic_euler(points: u32) -> Result<i64> {
    if points % 2 == 1 {
        return Err(Error::Validation(format!(
            "a torus covering cannot have an odd number ({points}) of simple branch points"
        )));
    }
    Ok(-(points as i64))
}
