//! Coefficients of the large-N expansion of the heat trace, assembled from
//! moments of random partitions, and empirical checks of the remainder order.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::group_duals::{FamilyType, GroupFamily};
use crate::heat_trace::{central_heat_trace, TraceRequest};
use crate::hurwitz::{hurwitz_gf, hurwitz_gf_at_cutoff, sum_to_tol};
use crate::partitions::MAX_HISTOGRAM_N;
use crate::qseries::{check_q, choose_cutoff, euler_phi, jacobi_theta_moment, q_of_t, CertifiedValue};

/// Residuals below this are treated as floating-point noise by the fits.
pub const SATURATION_FLOOR: f64 = 1e-14;

const GAUSSIAN_TOL: f64 = 1e-28;

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// `E[K(alpha)^k |alpha|^m]` for a `q`-uniform random partition `alpha`.
pub fn partition_moment(q: impl Into<DoubleDouble>, k: u32, m: u32, tol: f64) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    check_tol(tol)?;
    if k % 2 == 1 {
        return Ok(CertifiedValue::zero());
    }
    let s = hurwitz_gf(q, k, m, tol / 2.0)?;
    let phi = euler_phi(q, tol / (4.0 * s.value.abs().to_f64().max(1.0)))?;
    Ok(s.mul(&phi))
}

/// `E[n^{2m}]` for the discrete Gaussian `P(n) = q^{n^2}/theta(q)` on `Z`.
/// Odd moments vanish and are not represented.
pub fn gaussian_moment(q: impl Into<DoubleDouble>, m: u32) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    if m == 0 {
        return Ok(CertifiedValue::exact(DoubleDouble::ONE));
    }
    let num = jacobi_theta_moment(q, m, GAUSSIAN_TOL)?;
    let theta = jacobi_theta_moment(q, 0, GAUSSIAN_TOL)?;
    Ok(num.div(&theta))
}

/// `(power of K, power of size)` of one random partition.
type Moment = (u32, u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct TermKey {
    t_pow: u32,
    alpha: Moment,
    beta: Option<Moment>,
    gauss: u32,
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn fact(n: u32) -> BigInt {
    crate::qseries::factorial(n)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Exact multinomial expansion of `a_k` into products of independent
/// moments. Odd unitary indices give no terms.
fn symbolic_terms(family: FamilyType, k: u32) -> BTreeMap<TermKey, BigRational> {
    let mut out: BTreeMap<TermKey, BigRational> = BTreeMap::new();
    let mut push = |key: TermKey, c: BigRational| {
        if c.is_zero() {
            return;
        }
        let e = out.entry(key).or_insert_with(BigRational::zero);
        *e += c;
    };
    match family {
        FamilyType::B | FamilyType::C | FamilyType::D => {
            // ((-t)^k/k!) E[(K + s|mu|)^k] with s = -1/2 (B, D) or +1/2 (C).
            let shift_sign = if family == FamilyType::C { 1 } else { -1 };
            for j in (0..=k).step_by(2) {
                let rest = k - j;
                let mut sign = if k % 2 == 1 { -1 } else { 1 };
                if shift_sign < 0 && rest % 2 == 1 {
                    sign = -sign;
                }
                let c = ratio(binomial(k, j) * sign, fact(k) * BigInt::from(2).pow(rest));
                let key = TermKey { t_pow: k, alpha: (j, rest), beta: None, gauss: 0 };
                push(key, c);
            }
        }
        FamilyType::A | FamilyType::APrime if k % 2 == 0 => {
            let half = k / 2;
            for a in 0..=half {
                for b in 0..=(half - a) {
                    let l = half - a - b;
                    // (|alpha| - |beta|)^{2l} expanded binomially.
                    for j in 0..=2 * l {
                        let sign = if j % 2 == 1 { -1 } else { 1 };
                        let (t_pow, base, gauss) = if family == FamilyType::A {
                            let den = fact(2 * a) * fact(2 * b) * BigInt::from(2).pow(l) * fact(l);
                            (2 * a + 2 * b + l, den, 0)
                        } else {
                            (k, fact(2 * a) * fact(2 * b) * fact(2 * l), l)
                        };
                        let c = ratio(binomial(2 * l, j) * sign, base);
                        let key = TermKey {
                            t_pow,
                            alpha: (2 * a, 2 * l - j),
                            beta: Some((2 * b, j)),
                            gauss,
                        };
                        push(key, c);
                    }
                }
            }
        }
        FamilyType::A | FamilyType::APrime => {}
    }
    out
}

/// Evaluates the symbolic terms with one shared truncation of all moments.
fn assemble(
    family: FamilyType,
    q: DoubleDouble,
    t: f64,
    terms: &BTreeMap<TermKey, BigRational>,
    inner: f64,
) -> Result<CertifiedValue> {
    let mut moments: BTreeSet<Moment> = BTreeSet::new();
    for key in terms.keys() {
        moments.insert(key.alpha);
        if let Some(b) = key.beta {
            moments.insert(b);
        }
    }
    let qf = q.upper_f64();
    let mut cut = 0usize;
    for &(k, m) in &moments {
        let target = inner * 2f64.powi(k as i32);
        cut = cut.max(choose_cutoff(qf, m + 2 * k, target, MAX_HISTOGRAM_N as usize)?.0);
    }
    let phi = euler_phi(q, (inner * 1e-3).max(1e-25))?;
    let values: HashMap<Moment, CertifiedValue> = moments
        .par_iter()
        .map(|&(k, m)| hurwitz_gf_at_cutoff(q, k, m, cut).map(|v| ((k, m), v.mul(&phi))))
        .collect::<Result<_>>()?;
    let mut gauss: HashMap<u32, CertifiedValue> = HashMap::new();
    let td = DoubleDouble::new(t);
    let mut acc = CertifiedValue::zero();
    for (key, c) in terms {
        let coef = DoubleDouble::from_rational(c) * td.powi(key.t_pow);
        let mut term = values[&key.alpha].scale(coef);
        if let Some(b) = key.beta {
            term = term.mul(&values[&b]);
        }
        if key.gauss > 0 {
            if !gauss.contains_key(&key.gauss) {
                gauss.insert(key.gauss, gaussian_moment(q, key.gauss)?);
            }
            term = term.mul(&gauss[&key.gauss]);
        }
        acc = acc.add(&term);
    }
    let prefactor = match family {
        FamilyType::B | FamilyType::C | FamilyType::D => phi.recip(),
        FamilyType::A => phi.mul(&phi).recip(),
        FamilyType::APrime => jacobi_theta_moment(q, 0, (inner * 1e-3).max(1e-25))?.div(&phi.mul(&phi)),
    };
    Ok(acc.mul(&prefactor))
}

/// The coefficient `a_k` of `N^{-k}` in the expansion of the heat trace,
/// where `N` is the matrix size.
pub fn expansion_coefficient(family: FamilyType, t: f64, k: u32, tol: f64) -> Result<CertifiedValue> {
    let q = q_of_t(t)?;
    check_tol(tol)?;
    if family.is_unitary() && k % 2 == 1 {
        return Ok(CertifiedValue::zero());
    }
    let terms = symbolic_terms(family, k);
    sum_to_tol(tol, |inner| assemble(family, q, t, &terms, inner))
}

/// `a_k` to roughly 23 significant digits or `tol`, whichever is looser.
fn coefficient_relative(family: FamilyType, t: f64, k: u32, tol: f64) -> Result<CertifiedValue> {
    let rough = expansion_coefficient(family, t, k, 1.0)?;
    let tol = tol.max(rough.value.abs().to_f64() * 1e-23);
    expansion_coefficient(family, t, k, tol)
}

/// `a_0 .. a_p` for one family and time.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionCoefficients {
    pub family: FamilyType,
    pub t: f64,
    pub coeffs: Vec<CertifiedValue>,
    pub order: u32,
}

impl ExpansionCoefficients {
    /// Computes each coefficient to `tol` or 23 significant digits, in parallel.
    pub fn compute(family: FamilyType, t: f64, order: u32, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        let coeffs = (0..=order)
            .into_par_iter()
            .map(|k| coefficient_relative(family, t, k, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { family, t, coeffs, order })
    }

    pub fn get(&self, k: u32) -> Option<&CertifiedValue> {
        self.coeffs.get(k as usize)
    }

    /// `sum_{k<=order} a_k N^{-k}`.
    pub fn evaluate(&self, matrix_size: u32) -> CertifiedValue {
        let inv = DoubleDouble::ONE / matrix_size as f64;
        let mut acc = CertifiedValue::zero();
        for (k, a) in self.coeffs.iter().enumerate() {
            acc = acc.add(&a.scale(inv.powi(k as u32)));
        }
        acc
    }
}

const EXPANSION_TOL: f64 = 1e-22;

/// Truncated expansion `sum_{k<=p} a_k/N^k` at matrix size `N`.
pub fn evaluate_expansion(family: FamilyType, matrix_size: u32, t: f64, p: u32) -> Result<CertifiedValue> {
    GroupFamily::new(family, matrix_size)?;
    q_of_t(t)?;
    let n = matrix_size as f64;
    let coeffs = (0..=p)
        .into_par_iter()
        .map(|k| coefficient_relative(family, t, k, EXPANSION_TOL * n.powi(k as i32) / (p + 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionCoefficients { family, t, coeffs, order: p }.evaluate(matrix_size))
}

/// One point of a remainder fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualPoint {
    pub matrix_size: u32,
    pub residual: f64,
    /// Combined certification noise of the two values being compared.
    pub noise: f64,
}

impl ResidualPoint {
    pub fn is_resolved(&self) -> bool {
        self.residual > 10.0 * self.noise && self.residual > SATURATION_FLOOR
    }
}

/// Least-squares slope of `log residual` against `log N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    /// `None` when fewer than two residuals rise above the noise.
    pub slope: Option<f64>,
    pub points: Vec<ResidualPoint>,
    pub saturated: bool,
}

impl PowerLawFit {
    pub fn from_points(points: Vec<ResidualPoint>) -> Self {
        let used: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.is_resolved())
            .map(|p| ((p.matrix_size as f64).ln(), p.residual.ln()))
            .collect();
        let slope = least_squares_slope(&used);
        Self {
            saturated: slope.is_none(),
            slope,
            points,
        }
    }

    /// Passes when the slope is at most `threshold` or the remainder is
    /// below `floor` everywhere.
    pub fn passes(&self, threshold: f64, floor: f64) -> bool {
        match self.slope {
            Some(s) if s <= threshold => true,
            _ => self.points.iter().all(|p| p.residual < floor),
        }
    }
}

/// Slope of the least-squares line through `(x, y)`; needs two distinct `x`.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Number of expansion terms kept for a fit at order `p`: `1/N^p` for
/// types B, C, D and `1/N^{2p}` for the unitary types.
pub fn expansion_degree(family: FamilyType, p: u32) -> u32 {
    if family.is_unitary() {
        2 * p
    } else {
        p
    }
}

/// Slope the remainder should reach at order `p`.
pub fn expected_remainder_slope(family: FamilyType, p: u32) -> f64 {
    -(expansion_degree(family, p) as f64 + if family.is_unitary() { 2.0 } else { 1.0 })
}

/// Fits `|trace(N) - expansion(N)|` against `N` over a geometric grid.
pub fn remainder_order_fit(family: FamilyType, t: f64, p: u32, grid: &[u32]) -> Result<PowerLawFit> {
    if grid.len() < 3 {
        return Err(Error::Validation(format!(
            "remainder fit needs at least 3 sizes, got {}",
            grid.len()
        )));
    }
    let groups = grid
        .iter()
        .map(|&n| GroupFamily::new(family, n))
        .collect::<Result<Vec<_>>>()?;
    let degree = expansion_degree(family, p);
    let coeffs = ExpansionCoefficients::compute(family, t, degree, EXPANSION_TOL)?;
    let points = groups
        .par_iter()
        .map(|g| {
            let trace = central_heat_trace(&TraceRequest::new(*g, t, EXPANSION_TOL)?)?;
            let approx = coeffs.evaluate(g.matrix_size());
            let diff = trace.sub(&approx);
            Ok(ResidualPoint {
                matrix_size: g.matrix_size(),
                residual: diff.value.abs().to_f64(),
                noise: diff.tail_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerLawFit::from_points(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_unitary_coefficients_have_no_terms() {
        assert!(symbolic_terms(FamilyType::A, 3).is_empty());
        assert!(symbolic_terms(FamilyType::APrime, 5).is_empty());
    }

    #[test]
    fn b_and_d_share_terms() {
        for k in 0..7 {
            assert_eq!(symbolic_terms(FamilyType::B, k), symbolic_terms(FamilyType::D, k));
        }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [16.0f64, 32.0, 64.0].iter().map(|n| (n.ln(), 3.0 * n.powi(-4).ln())).collect();
        let s = least_squares_slope(&pts).unwrap();
        assert!((s + 12.0).abs() < 1e-9);
        assert!(least_squares_slope(&pts[..1]).is_none());
    }
}
