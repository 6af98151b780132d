//! Stationary Gromov-Witten invariants of the elliptic curve through the
//! GW/Hurwitz correspondence, and the generating series built from them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, shifted_power_sum, Partition};
use crate::qseries::{check_q, factorial, rounding, tail_bound_poly_partition_sum, CertifiedValue};

/// Largest number of (degree, partition, exponent tuple) triples a series may touch.
pub const SERIES_BUDGET: f64 = 2e7;

fn check_degree(d: u32) -> Result<()> {
    if d < 1 {
        return Err(Error::Validation("GW invariants need degree d >= 1".into()));
    }
    Ok(())
}

/// `p_1(lambda) .. p_top(lambda)` divided by the matching factorials.
fn scaled_power_sums(lambda: &Partition, top: u32) -> Vec<BigRational> {
    (0..=top)
        .map(|j| shifted_power_sum(lambda, j) / BigRational::from_integer(factorial(j)))
        .collect()
}

/// `<tau_{k_1} ... tau_{k_n}>_d = sum_{lambda |- d} prod_i p_{k_i+1}(lambda)/(k_i+1)!`.
pub fn gw_invariant_torus(d: u32, k_list: &[u32]) -> Result<BigRational> {
    check_degree(d)?;
    let top = k_list.iter().map(|k| k + 1).max().unwrap_or(0);
    let total = enumerate_partitions(d)
        .par_iter()
        .map(|lambda| {
            let p = scaled_power_sums(lambda, top);
            k_list
                .iter()
                .fold(BigRational::from_integer(1.into()), |acc, &k| acc * &p[k as usize + 1])
        })
        .reduce(BigRational::zero, |a, b| a + b);
    Ok(total)
}

/// Truncation of the partition function: for each degree `1..=d_max`, the
/// coefficients of `z_1^{e_1} ... z_n^{e_n}` with `1 <= e_i <= z_cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct GWSeries {
    n: u32,
    d_max: u32,
    z_cap: u32,
    degrees: BTreeMap<u32, BTreeMap<Vec<u32>, BigRational>>,
}

fn exponent_tuples(n: u32, z_cap: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=z_cap).map(move |e| {
                    let mut t = t.clone();
                    t.push(e);
                    t
                })
            })
            .collect();
    }
    out
}

/// Builds every coefficient of the truncated series.
pub fn build_gw_series(n: u32, d_max: u32, z_cap: u32) -> Result<GWSeries> {
    if n < 1 || d_max < 1 || z_cap < 1 {
        return Err(Error::Validation(format!(
            "build_gw_series needs n, d_max, z_cap >= 1 (got {n}, {d_max}, {z_cap})"
        )));
    }
    let tuples_f = (z_cap as f64).powi(n as i32);
    let parts_f = crate::qseries::partition_count(d_max as usize).to_f64().unwrap_or(f64::INFINITY);
    let work = tuples_f * parts_f * d_max as f64;
    if work > SERIES_BUDGET {
        return Err(Error::resource(
            format!("GW series with n={n}, d_max={d_max}, z_cap={z_cap} needs about {work:.3e} terms"),
            f64::INFINITY,
        ));
    }
    let tuples = exponent_tuples(n, z_cap);
    let degrees = (1..=d_max)
        .into_par_iter()
        .map(|d| {
            let mut slice: BTreeMap<Vec<u32>, BigRational> =
                tuples.iter().map(|t| (t.clone(), BigRational::zero())).collect();
            for lambda in enumerate_partitions(d) {
                let p = scaled_power_sums(&lambda, z_cap);
                for (t, c) in slice.iter_mut() {
                    let term = t
                        .iter()
                        .fold(BigRational::from_integer(1.into()), |acc, &e| acc * &p[e as usize]);
                    *c += term;
                }
            }
            (d, slice)
        })
        .collect();
    Ok(GWSeries { n, d_max, z_cap, degrees })
}

impl GWSeries {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn z_cap(&self) -> u32 {
        self.z_cap
    }

    /// Coefficient of `q^d z^exponents`; `None` outside the truncation.
    pub fn coefficient(&self, d: u32, exponents: &[u32]) -> Option<&BigRational> {
        self.degrees.get(&d)?.get(exponents)
    }

    /// `{ "d": { "(e1,...,en)": "num/den" } }` with exact rational text.
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        for (d, slice) in &self.degrees {
            let mut inner = Map::new();
            for (t, c) in slice {
                let key = format!("({})", t.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","));
                inner.insert(key, Value::String(c.to_string()));
            }
            root.insert(d.to_string(), Value::Object(inner));
        }
        Value::Object(root)
    }

    /// Numeric value of the truncated series at `(q, z)`.
    pub fn evaluate(&self, q: f64, z: &[f64]) -> Result<DoubleDouble> {
        if z.len() != self.n as usize {
            return Err(Error::Validation(format!("expected {} variables, got {}", self.n, z.len())));
        }
        let qd = DoubleDouble::new(q);
        let mut acc = DoubleDouble::ZERO;
        for (d, slice) in &self.degrees {
            let mut s = DoubleDouble::ZERO;
            for (t, c) in slice {
                let mono = t
                    .iter()
                    .zip(z)
                    .fold(DoubleDouble::ONE, |m, (&e, &zi)| m * DoubleDouble::new(zi).powi(e));
                s += DoubleDouble::from_rational(c) * mono;
            }
            acc += qd.powi(*d) * s;
        }
        Ok(acc)
    }
}

/// `F_{1,k}(q)` rebuilt from GW invariants: the coefficient of
/// `z_1^2 ... z_k^2` in degree `d` is `<tau_1^k>_d = H_1(d, k)`.
pub fn hurwitz_gf_from_gw(q: impl Into<DoubleDouble>, k: u32, d_max: u32) -> Result<CertifiedValue> {
    let q = q.into();
    check_q(q)?;
    check_degree(d_max)?;
    if k % 2 == 1 {
        return Ok(CertifiedValue::zero());
    }
    let mut sum = DoubleDouble::ZERO;
    for d in 1..=d_max {
        let c = if k == 0 {
            gw_invariant_torus(d, &[])?
        } else {
            let series = build_gw_series(k, d, 2)?;
            let two = vec![2; k as usize];
            series.coefficient(d, &two).cloned().unwrap_or_else(BigRational::zero)
        };
        sum += q.powi(d) * DoubleDouble::from_rational(&c);
    }
    let tail = tail_bound_poly_partition_sum(q.upper_f64(), d_max as usize, 2 * k)? / 2f64.powi(k as i32);
    Ok(CertifiedValue::new(sum, tail + rounding(sum) * (d_max as f64 + 4.0), d_max as usize))
}

/// `sum_i t^{lambda_i + 1/2 - i}` with the geometric tail in closed form.
fn shifted_exponential_sum(lambda: &Partition, t: DoubleDouble) -> DoubleDouble {
    let ln_t = t.ln();
    let mut s = DoubleDouble::ZERO;
    for (idx, &p) in lambda.parts().iter().enumerate() {
        s += (ln_t * (p as f64 + 0.5 - (idx as f64 + 1.0))).exp();
    }
    let l = lambda.len() as f64;
    s + (ln_t * -(l + 0.5)).exp() / (DoubleDouble::ONE - t.recip())
}

/// The n-point function `sum_{d>=1} q^d sum_{lambda |- d} prod_j sum_i t_j^{lambda_i+1/2-i}`
/// for real `t_j > 1` with `q prod t_j < 1`.
pub fn npoint_function(q: f64, t_list: &[f64], d_max: u32) -> Result<CertifiedValue> {
    let qd = DoubleDouble::new(q);
    check_q(qd)?;
    check_degree(d_max)?;
    if t_list.is_empty() {
        return Err(Error::Validation("npoint_function needs at least one variable".into()));
    }
    if let Some(t) = t_list.iter().find(|&&t| !(t > 1.0) || !t.is_finite()) {
        return Err(Error::Convergence(format!("n-point function diverges: t = {t} is not > 1")));
    }
    let x = q * t_list.iter().product::<f64>();
    if x >= 1.0 {
        return Err(Error::Convergence(format!("n-point function diverges: q * prod t = {x} >= 1")));
    }
    let ts: Vec<DoubleDouble> = t_list.iter().map(|&t| DoubleDouble::new(t)).collect();
    let slices: Vec<DoubleDouble> = (1..=d_max)
        .into_par_iter()
        .map(|d| {
            enumerate_partitions(d)
                .iter()
                .map(|lambda| ts.iter().fold(DoubleDouble::ONE, |m, &t| m * shifted_exponential_sum(lambda, t)))
                .sum::<DoubleDouble>()
                * qd.powi(d)
        })
        .collect();
    let sum: DoubleDouble = slices.into_iter().sum();
    // Each factor is at most t^{|lambda|} t^{-1/2}/(1 - 1/t).
    let c: f64 = t_list.iter().map(|&t| t.powf(-0.5) / (1.0 - 1.0 / t)).product();
    let tail = c * tail_bound_poly_partition_sum(x * (1.0 + 1e-15), d_max as usize, 0)?;
    Ok(CertifiedValue::new(sum, tail + rounding(sum) * (d_max as f64 + 4.0), d_max as usize))
}

/// Both sides of the n-point/partition-function correspondence at
/// `t_j = e^{z_j}`, and their difference. The difference is reported, not
/// required to vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct NPointComparison {
    pub npoint: CertifiedValue,
    pub series: f64,
    pub residual: f64,
}

pub fn npoint_series_comparison(q: f64, z: &[f64], d_max: u32, z_cap: u32) -> Result<NPointComparison> {
    let t: Vec<f64> = z.iter().map(|zi| zi.exp()).collect();
    let npoint = npoint_function(q, &t, d_max)?;
    let series = build_gw_series(z.len() as u32, d_max, z_cap)?.evaluate(q, z)?.to_f64();
    Ok(NPointComparison {
        residual: npoint.value_f64() - series,
        npoint,
        series,
    })
}

/// `<tau_1^k>_d` and `H_1(d, k)` as exact numbers, for comparison.
pub fn gw_hurwitz_pair(d: u32, k: u32) -> Result<(BigRational, BigInt)> {
    let gw = gw_invariant_torus(d, &vec![1; k as usize])?;
    Ok((gw, crate::hurwitz::hurwitz_number(d, k)?))
}
