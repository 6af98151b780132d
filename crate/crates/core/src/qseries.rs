//! Euler's function, theta moments, partition counts, truncated q-series and
//! the certified tail bounds every other module leans on.

use std::f64::consts::PI;
use std::ops::Add;
use std::sync::{OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};

/// Relative allowance for double-double rounding folded into every reported
/// tail bound, so that bounds cover rounding as well as truncation.
pub(crate) const ROUNDING_REL: f64 = 1e-29;

/// Largest truncation index any series search will try.
pub(crate) const MAX_CUTOFF: usize = 1 << 20;

/// A real value with a rigorous bound on everything discarded to produce it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedValue {
    pub value: DoubleDouble,
    pub tail_bound: f64,
    /// Truncation index chosen to meet the tolerance (0 when not applicable).
    pub cutoff: usize,
}

impl CertifiedValue {
    pub fn new(value: DoubleDouble, tail_bound: f64, cutoff: usize) -> Self {
        Self {
            value,
            tail_bound,
            cutoff,
        }
    }

    pub fn exact(value: DoubleDouble) -> Self {
        Self::new(value, 0.0, 0)
    }

    pub fn zero() -> Self {
        Self::exact(DoubleDouble::ZERO)
    }

    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Whether `other` is compatible with this value given both bounds.
    pub fn agrees_with(&self, other: &CertifiedValue) -> bool {
        (self.value - other.value).abs().to_f64() <= self.tail_bound + other.tail_bound
    }

    pub fn add(&self, other: &CertifiedValue) -> CertifiedValue {
        let v = self.value + other.value;
        Self::new(
            v,
            self.tail_bound + other.tail_bound + rounding(v),
            self.cutoff.max(other.cutoff),
        )
    }

    pub fn sub(&self, other: &CertifiedValue) -> CertifiedValue {
        self.add(&other.scale(DoubleDouble::new(-1.0)))
    }

    pub fn mul(&self, other: &CertifiedValue) -> CertifiedValue {
        let v = self.value * other.value;
        let a = self.value.abs().upper_f64();
        let b = other.value.abs().upper_f64();
        let bound = a * other.tail_bound + b * self.tail_bound + self.tail_bound * other.tail_bound;
        Self::new(v, bound + rounding(v), self.cutoff.max(other.cutoff))
    }

    /// Quotient; the divisor's bound must be smaller than its magnitude.
    pub fn div(&self, other: &CertifiedValue) -> CertifiedValue {
        let v = self.value / other.value;
        let b = other.value.abs().to_f64();
        let denom = (b - other.tail_bound).max(f64::MIN_POSITIVE);
        let bound = (self.tail_bound + v.abs().to_f64() * other.tail_bound) / denom;
        Self::new(v, bound + rounding(v), self.cutoff.max(other.cutoff))
    }

    pub fn scale(&self, c: DoubleDouble) -> CertifiedValue {
        let v = self.value * c;
        Self::new(v, self.tail_bound * c.abs().upper_f64() + rounding(v), self.cutoff)
    }

    pub fn recip(&self) -> CertifiedValue {
        CertifiedValue::exact(DoubleDouble::ONE).div(self)
    }
}

pub(crate) fn rounding(v: DoubleDouble) -> f64 {
    v.abs().to_f64() * ROUNDING_REL
}

/// `q_t = exp(-t/2)` in double-double precision.
pub fn q_of_t(t: f64) -> Result<DoubleDouble> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be a positive finite real, got {t}")));
    }
    Ok(DoubleDouble::new(-t / 2.0).exp())
}

pub(crate) fn check_q(q: DoubleDouble) -> Result<()> {
    if q.hi() > 0.0 && q < DoubleDouble::ONE {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0,1), got {}", q.to_f64())))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// Euler's function `phi(q) = prod_{m>=1} (1 - q^m)`.
pub fn euler_phi(q: impl Into<DoubleDouble>, tol: f64) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    check_tol(tol)?;
    let qf = q.upper_f64();
    let mut prod = DoubleDouble::ONE;
    let mut qm = DoubleDouble::ONE;
    for m in 1..MAX_CUTOFF {
        qm *= q;
        prod *= DoubleDouble::ONE - qm;
        // -log of the discarded factors is at most q^{m+1}/((1-q)(1-q^{m+1})).
        let next = qm.upper_f64() * qf;
        let log_tail = next / ((1.0 - qf) * (1.0 - next)) * (1.0 + 1e-12);
        let bound = prod.to_f64() * log_tail + rounding(prod) * m as f64;
        if bound <= tol {
            return Ok(CertifiedValue::new(prod, bound, m));
        }
        if log_tail < 1e-300 {
            return Err(Error::resource("tolerance below the rounding floor of euler_phi", bound));
        }
    }
    Err(Error::resource("euler_phi cutoff exceeded", f64::INFINITY))
}

/// `sum_{n in Z} n^{2m} q^{n^2}`, i.e. `D^m theta(q)`.
pub fn jacobi_theta_moment(q: impl Into<DoubleDouble>, m: u32, tol: f64) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    check_tol(tol)?;
    let qf = q.upper_f64();
    let q2 = q * q;
    let mut sum = if m == 0 { DoubleDouble::ONE } else { DoubleDouble::ZERO };
    // q^{n^2} and q^{2n+1}, updated together.
    let mut qsq = DoubleDouble::ONE;
    let mut step = q;
    for n in 1..MAX_CUTOFF {
        qsq *= step;
        step *= q2;
        let nn = DoubleDouble::from_i64(n as i64);
        sum += nn.powi(2 * m) * qsq * 2.0;
        // Majorant for the two-sided tail beyond n.
        let k = (n + 1) as f64;
        let log_term = 2.0 * m as f64 * k.ln() + k * k * qf.ln();
        let log_ratio = 2.0 * m as f64 * ((k + 1.0) / k).ln() + (2.0 * k + 1.0) * qf.ln();
        if log_ratio < 0.0 {
            let bound = 2.0 * log_term.exp() / (1.0 - log_ratio.exp()) * (1.0 + 1e-12)
                + rounding(sum) * n as f64;
            if bound <= tol {
                return Ok(CertifiedValue::new(sum, bound, n));
            }
            if log_term < -745.0 {
                return Err(Error::resource("tolerance below the rounding floor of theta", bound));
            }
        }
    }
    Err(Error::resource("theta cutoff exceeded", f64::INFINITY))
}

fn partition_table() -> &'static RwLock<Vec<BigUint>> {
    static TABLE: OnceLock<RwLock<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![BigUint::from(1u32)]))
}

/// Partition numbers p(0..=n) by the pentagonal-number recurrence.
pub fn partition_counts(n: usize) -> Vec<BigUint> {
    {
        let table = partition_table().read().unwrap();
        if table.len() > n {
            return table[..=n].to_vec();
        }
    }
    let mut table = partition_table().write().unwrap();
    let mut signed: Vec<BigInt> = table.iter().map(|x| BigInt::from(x.clone())).collect();
    for i in signed.len()..=n {
        let mut acc = BigInt::zero();
        let mut k: usize = 1;
        loop {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > i {
                break;
            }
            let plus = k % 2 == 1;
            let mut term = signed[i - g1].clone();
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= i {
                term += &signed[i - g2];
            }
            if plus {
                acc += term;
            } else {
                acc -= term;
            }
            k += 1;
        }
        signed.push(acc);
    }
    *table = signed.iter().map(|x| x.to_biguint().expect("p(n) is positive")).collect();
    table[..=n].to_vec()
}

pub fn partition_count(n: usize) -> BigUint {
    partition_counts(n).pop().expect("nonempty table")
}

/// `p(n)` rounded up to an `f64`, for bound arithmetic.
pub(crate) fn partition_count_upper(n: usize) -> f64 {
    partition_count(n).to_f64().unwrap_or(f64::INFINITY).next_up()
}

/// `prod_{i=1}^{L} (1 - q^i)^{-1}`, the generating function of partitions
/// with at most `L` parts.
pub fn bounded_length_partition_gf(q: impl Into<DoubleDouble>, l: usize, tol: f64) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    check_tol(tol)?;
    let mut prod = DoubleDouble::ONE;
    let mut qi = DoubleDouble::ONE;
    for _ in 0..l {
        qi *= q;
        prod *= DoubleDouble::ONE - qi;
    }
    let v = prod.recip();
    let bound = rounding(v) * (l as f64 + 1.0);
    Ok(CertifiedValue::new(v, bound, l))
}

/// Rigorous bound on `sum_{n>M} n^d p(n) q^n` from the majorant
/// `n^d exp(pi sqrt(2n/3)) q^n` and a ratio test.
pub fn tail_bound_poly_partition_sum(q: f64, m: usize, d: u32) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("q must lie in (0,1), got {q}")));
    }
    let c = PI * (2.0f64 / 3.0).sqrt();
    let n = (m + 1) as f64;
    let log_ratio = d as f64 * ((n + 1.0) / n).ln() + c * ((n + 1.0).sqrt() - n.sqrt()) + q.ln();
    if log_ratio >= 0.0 {
        return Err(Error::CutoffTooSmall(format!(
            "ratio test fails at M={m} for q={q}, d={d}; increase M"
        )));
    }
    let log_term = d as f64 * n.ln() + c * n.sqrt() + n * q.ln();
    let bound = (log_term - (-log_ratio.exp()).ln_1p()).exp() * (1.0 + 1e-12);
    Ok(bound.max(f64::MIN_POSITIVE))
}

/// Smallest `M` whose tail bound is at most `target`, searched by doubling
/// then bisection (the bound decreases once the ratio test passes).
pub(crate) fn choose_cutoff(q: f64, d: u32, target: f64, max_cutoff: usize) -> Result<(usize, f64)> {
    let ok = |m: usize| matches!(tail_bound_poly_partition_sum(q, m, d), Ok(b) if b <= target);
    let mut hi = 4usize;
    while !ok(hi) {
        if hi >= max_cutoff {
            let best = tail_bound_poly_partition_sum(q, max_cutoff, d).unwrap_or(f64::INFINITY);
            return Err(Error::resource(
                format!("no cutoff up to {max_cutoff} reaches the requested tolerance"),
                best,
            ));
        }
        hi = (hi * 2).min(max_cutoff);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if ok(lo) {
        hi = lo;
    }
    Ok((hi, tail_bound_poly_partition_sum(q, hi, d)?))
}

/// Upper bound on the full sum `sum_{n>=0} n^d p(n) q^n`.
pub(crate) fn poly_partition_sum_upper(q: f64, d: u32) -> Result<f64> {
    let (m, tail) = choose_cutoff(q, d, 1e-30, MAX_CUTOFF)?;
    let mut s = if d == 0 { 1.0 } else { 0.0 };
    for n in 1..=m {
        s += (n as f64).powi(d as i32) * partition_count_upper(n) * q.powi(n as i32);
    }
    Ok((s + tail) * (1.0 + 1e-12))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * i)
}

pub(crate) fn factorial_dd(n: u32) -> DoubleDouble {
    DoubleDouble::from_bigint(&factorial(n))
}

/// Exact truncated power series `sum_{n<=max_degree} c_n q^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct QPolynomial {
    coeffs: Vec<BigRational>,
}

impl QPolynomial {
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Validation("a QPolynomial needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(max_degree: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); max_degree + 1],
        }
    }

    pub fn from_integers<I: IntoIterator<Item = BigInt>>(coeffs: I) -> Result<Self> {
        Self::new(coeffs.into_iter().map(BigRational::from_integer).collect())
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// The derivation `D = q d/dq`: `c_n -> n c_n`.
    pub fn derive(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * BigRational::from_integer(BigInt::from(n)))
            .collect();
        Self { coeffs }
    }

    pub fn derive_n(&self, m: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..m {
            out = out.derive();
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Evaluate in ascending order of `n`.
    pub fn evaluate(&self, q: impl Into<DoubleDouble>) -> DoubleDouble {
        let q = q.into();
        let mut qn = DoubleDouble::ONE;
        let mut sum = DoubleDouble::ZERO;
        for c in &self.coeffs {
            if !c.is_zero() {
                sum += DoubleDouble::from_rational(c) * qn;
            }
            qn *= q;
        }
        sum
    }
}

impl Add for &QPolynomial {
    type Output = QPolynomial;

    /// Sum truncated to the smaller of the two degrees.
    fn add(self, other: &QPolynomial) -> QPolynomial {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        QPolynomial { coeffs }
    }
}
