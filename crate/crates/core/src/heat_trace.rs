//! Certified evaluation of the central heat trace `sum_lambda exp(-(t/2) c2(lambda))`
//! for every family, its large-N limits and tail probabilities of the
//! q-uniform measure on partitions.

use rayon::prelude::*;

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::group_duals::{FamilyType, GroupFamily};
use crate::partitions::Partition;
use crate::qseries::{
    choose_cutoff, euler_phi, jacobi_theta_moment, partition_counts, q_of_t, rounding,
    tail_bound_poly_partition_sum, CertifiedValue,
};

/// Largest partition-size cutoff the trace will use before giving up.
pub const MAX_SIZE_CUTOFF: usize = 600;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRequest {
    pub group: GroupFamily,
    pub t: f64,
    pub tol: f64,
}

impl TraceRequest {
    pub fn new(group: GroupFamily, t: f64, tol: f64) -> Result<Self> {
        let req = Self { group, t, tol };
        req.validate()?;
        Ok(req)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Domain(format!("t must be a positive finite real, got {}", self.t)));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn q(&self) -> DoubleDouble {
        q_of_t(self.t).expect("validated t")
    }
}

/// `exp(-x t)` rounded up, for bound arithmetic.
fn qpow_upper(t: f64, x: f64) -> f64 {
    (-(t * x)).exp() * (1.0 + 1e-14)
}

/// Upper bound on `sum_n p(n) x^n = 1/phi(x)`.
fn inverse_phi_upper(x: f64) -> Result<f64> {
    let phi = euler_phi(x, 1e-20)?;
    Ok(1.0 / (phi.value.to_f64() - phi.tail_bound) * (1.0 + 1e-14))
}

fn size_tail(x: f64, m: usize) -> Option<f64> {
    tail_bound_poly_partition_sum(x, m, 0).ok()
}

/// Smallest `m` in `1..=max` with `f(m) <= target`, assuming `f` is
/// eventually decreasing once defined.
fn search_cutoff(f: impl Fn(usize) -> Option<f64>, target: f64, max: usize) -> Result<(usize, f64)> {
    let ok = |m: usize| matches!(f(m), Some(b) if b <= target);
    let mut hi = 4usize;
    while !ok(hi) {
        if hi >= max {
            let best = f(max).unwrap_or(f64::INFINITY);
            return Err(Error::resource(
                format!("no size cutoff up to {max} reaches tolerance {target:e}"),
                best,
            ));
        }
        hi = (hi * 2).min(max);
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
    Ok((hi, f(hi).expect("checked")))
}

/// Sums of `exp(-s K(mu) - gamma |mu|)` over partitions grouped by size and
/// length, with `gamma = s R / 2` so every entry is at most `p(n)`.
pub(crate) struct ContentSums {
    pub gamma: DoubleDouble,
    by_len: Vec<Vec<DoubleDouble>>,
}

impl ContentSums {
    /// Partitions of size at most `max_size` and length at most `max_len`.
    pub fn new(s: DoubleDouble, max_size: usize, max_len: usize) -> Self {
        let rows = max_len.min(max_size);
        let gamma = s * (rows as f64 / 2.0);
        let half_s = s * 0.5;
        // exp(-(s/2) J) for J = 2 dK + rows c v, over the reachable range.
        let j_min = -((max_size * rows) as i64);
        let j_max = (max_size * (max_size + 1) + rows * max_size) as i64;
        let table: Vec<DoubleDouble> = (j_min..=j_max)
            .into_par_iter()
            .map(|j| (half_s * -(j as f64)).exp())
            .collect();
        let factor = |v: usize, above: usize, c: usize| -> DoubleDouble {
            let (v, i0, c) = (v as i64, above as i64, c as i64);
            let j = c * v * (v + 1) - 2 * v * (c * i0 + c * (c + 1) / 2) + rows as i64 * c * v;
            table[(j - j_min) as usize]
        };

        let mut dp = vec![vec![DoubleDouble::ZERO; rows + 1]; max_size + 1];
        dp[0][0] = DoubleDouble::ONE;
        // Place part values from the largest down; c copies of v go to rows
        // above+1 ..= above+c.
        for v in (1..=max_size).rev() {
            let old = dp.clone();
            dp.par_iter_mut().enumerate().skip(v).for_each(|(size, row)| {
                for (len, cell) in row.iter_mut().enumerate().skip(1) {
                    let mut acc = DoubleDouble::ZERO;
                    let mut c = 1;
                    while c * v <= size && c <= len {
                        let w = old[size - c * v][len - c];
                        if !w.is_zero() {
                            acc += w * factor(v, len - c, c);
                        }
                        c += 1;
                    }
                    *cell += acc;
                }
            });
        }
        Self { gamma, by_len: dp }
    }

    /// Sum over partitions of `n` with at most `cap` parts.
    pub fn capped(&self, n: usize, cap: usize) -> DoubleDouble {
        self.by_len[n].iter().take(cap + 1).copied().sum()
    }
}

/// `sum_{m > m_max} (2m+1) x^m`.
fn odd_weighted_geometric_tail(x: f64, m_max: usize) -> f64 {
    let k = (m_max + 1) as f64;
    let xk = x.powf(k);
    xk * ((2.0 * k + 1.0) * (1.0 - x) + 2.0 * x) / ((1.0 - x) * (1.0 - x)) * (1.0 + 1e-12)
}

/// `m`-cutoff for the type-D factor so that the geometric tail is at most `target`.
fn d_m_cutoff(rank: u32, t: f64, target: f64) -> Result<(usize, f64)> {
    let x = qpow_upper(t, (rank as f64 - 1.0) / 4.0);
    for m in 0..100_000 {
        let b = odd_weighted_geometric_tail(x, m);
        if b <= target {
            return Ok((m, b));
        }
    }
    Err(Error::resource("type D m-cutoff exceeded", odd_weighted_geometric_tail(x, 100_000)))
}

/// `L_r(n)` for `n = 0..=max_n`, truncated at `m <= m_max`.
fn d_factors(rank: u32, t: f64, max_n: usize, m_max: usize) -> Vec<DoubleDouble> {
    let r = rank as f64;
    let th = DoubleDouble::new(t) * 0.5;
    let mut gauss = Vec::with_capacity(m_max + 1);
    let mut g = DoubleDouble::ONE;
    gauss.push(g);
    for m in 1..=m_max {
        let mm = (m * m) as f64;
        g += (th * (-mm / (2.0 * r))).exp() * 2.0;
        gauss.push(g);
    }
    (0..=max_n)
        .into_par_iter()
        .map(|n| {
            let mut acc = DoubleDouble::ZERO;
            for (m, gm) in gauss.iter().enumerate() {
                let m = m as f64;
                // F2 without the n^2 part: (r-1)m/2 + (r-1)m^2/(2r) + |mu| m / r.
                let f2 = DoubleDouble::new((r - 1.0) * m) / 2.0
                    + DoubleDouble::new((r - 1.0) * m * m) / (2.0 * r)
                    + DoubleDouble::new(n as f64 * m) / r;
                acc += (-(th * f2)).exp() * *gm;
            }
            acc
        })
        .collect()
}

/// `L_r(mu) = sum_{m>=0} sum_{|n|<=m} exp(-(t/2) F2(mu, m, n))` for the even
/// orthogonal group of rank `rank`.
pub fn so_even_l_factor(rank: u32, mu: &Partition, t: f64, tol: f64) -> Result<CertifiedValue> {
    if rank < 2 {
        return Err(Error::Validation(format!("even orthogonal rank must be at least 2, got {rank}")));
    }
    if mu.len() > rank as usize - 2 {
        return Err(Error::Validation(format!(
            "length cutoff violated: l(mu) = {} exceeds {}",
            mu.len(),
            rank - 2
        )));
    }
    q_of_t(t)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let (m_max, tail) = d_m_cutoff(rank, t, tol / 2.0)?;
    let size = mu.size() as usize;
    let v = d_factors(rank, t, size, m_max)[size];
    Ok(CertifiedValue::new(v, tail + rounding(v) * (m_max as f64 + 4.0), m_max))
}

/// Pieces shared between the trace and its N-independent approximations.
struct Assembly {
    value: DoubleDouble,
    bound: f64,
    cutoff: usize,
}

pub fn central_heat_trace(req: &TraceRequest) -> Result<CertifiedValue> {
    req.validate()?;
    let g = req.group;
    let t = req.t;
    // Split the budget: half for the size tail, a quarter for the other tails.
    let size_budget = req.tol / 2.0;
    let other_budget = req.tol / 4.0;
    let a = match g.family() {
        FamilyType::B | FamilyType::C | FamilyType::D => orthosymplectic_trace(&g, t, size_budget, other_budget)?,
        FamilyType::A | FamilyType::APrime => unitary_trace(&g, t, size_budget, other_budget)?,
    };
    let bound = a.bound + rounding(a.value) * (a.cutoff as f64 + 16.0);
    Ok(CertifiedValue::new(a.value, bound, a.cutoff))
}

fn orthosymplectic_trace(g: &GroupFamily, t: f64, size_budget: f64, other_budget: f64) -> Result<Assembly> {
    let n_mat = g.matrix_size() as f64;
    let r = g.rank();
    let family = g.family();
    // Every discarded label has c2 >= rho |mu| (+ F2 for type D).
    let rho = match family {
        FamilyType::B => r as f64 / (2.0 * r as f64 + 1.0),
        _ => 0.5,
    };
    let x = qpow_upper(t, rho / 2.0);
    let (m_cut, m_tail, l0_upper) = if family == FamilyType::D {
        let x_half = qpow_upper(t, 0.25);
        let (m_max, tail) = d_m_cutoff(r, t, other_budget / inverse_phi_upper(x_half)?)?;
        let l0 = d_factors(r, t, 0, m_max)[0].to_f64() + tail;
        (m_max, tail * inverse_phi_upper(x_half)?, l0 * (1.0 + 1e-12))
    } else {
        (0, 0.0, 1.0)
    };
    let (m, size_tail_bound) = search_cutoff(
        |m| size_tail(x, m).map(|b| b * l0_upper),
        size_budget,
        MAX_SIZE_CUTOFF,
    )?;

    let s = DoubleDouble::new(t) / n_mat;
    let sums = ContentSums::new(s, m, g.mu_cap());
    let th = DoubleDouble::new(t) * 0.5;
    let shift = DoubleDouble::new(t) / (2.0 * n_mat);
    let per_size = match family {
        FamilyType::C => sums.gamma - th - shift,
        _ => sums.gamma - th + shift,
    };
    let l = if family == FamilyType::D {
        d_factors(r, t, m, m_cut)
    } else {
        vec![DoubleDouble::ONE; m + 1]
    };
    let cap = g.mu_cap();
    let mut value = DoubleDouble::ZERO;
    for n in 0..=m {
        value += (per_size * n as f64).exp() * sums.capped(n, cap) * l[n];
    }
    Ok(Assembly {
        value,
        bound: size_tail_bound + m_tail,
        cutoff: m,
    })
}

fn unitary_trace(g: &GroupFamily, t: f64, size_budget: f64, other_budget: f64) -> Result<Assembly> {
    let n_mat = g.matrix_size() as f64;
    let prime = g.family() == FamilyType::APrime;
    let q = q_of_t(t)?;
    let x = qpow_upper(t, 0.25);
    let z = inverse_phi_upper(x)?;
    let c1 = if prime {
        let theta = jacobi_theta_moment(q, 0, 1e-20)?;
        1.0 + theta.value.to_f64() + theta.tail_bound
    } else {
        1.0
    };
    let (m, size_tail_bound) = search_cutoff(
        |m| size_tail(x, m).map(|b| 2.0 * b * z * c1 * (1.0 + 1e-12)),
        size_budget,
        MAX_SIZE_CUTOFF,
    )?;
    // Window half-width for the n-sum around -d/N.
    let qf = q.upper_f64();
    let mut window = 0usize;
    let mut window_tail = 0.0;
    if prime {
        loop {
            let w = window as f64;
            let b = 2.0 * qf.powf((w + 0.5) * (w + 0.5)) / (1.0 - qf.powf(2.0 * w + 2.0)) * z * z * (1.0 + 1e-12);
            if b <= other_budget {
                window_tail = b;
                break;
            }
            window += 1;
        }
    }

    let s = DoubleDouble::new(t) / n_mat;
    let sums = ContentSums::new(s, m, g.alpha_cap().max(g.beta_cap()));
    let wa: Vec<DoubleDouble> = (0..=m).map(|n| sums.capped(n, g.alpha_cap())).collect();
    let wb: Vec<DoubleDouble> = (0..=m).map(|n| sums.capped(n, g.beta_cap())).collect();
    let th = DoubleDouble::new(t) * 0.5;
    let td = DoubleDouble::new(t);
    let per_size = sums.gamma - th;
    let w = window as i64;
    let rows: Vec<DoubleDouble> = (0..=m)
        .into_par_iter()
        .map(|n1| {
            let mut acc = DoubleDouble::ZERO;
            for n2 in 0..=m {
                let base = per_size * (n1 + n2) as f64;
                let d = n1 as i64 - n2 as i64;
                let weight = wa[n1] * wb[n2];
                if prime {
                    let center = (-(d as f64) / n_mat).round() as i64;
                    let mut inner = DoubleDouble::ZERO;
                    for k in center - w..=center + w {
                        let arg = base - th * (k * k) as f64 - td * (k * d) as f64 / n_mat;
                        inner += arg.exp();
                    }
                    acc += inner * weight;
                } else {
                    let arg = base + th * (d * d) as f64 / (n_mat * n_mat);
                    acc += arg.exp() * weight;
                }
            }
            acc
        })
        .collect();
    let value = rows.into_iter().sum();
    Ok(Assembly {
        value,
        bound: size_tail_bound + window_tail,
        cutoff: m,
    })
}

/// Default tolerance used by `limit_trace`.
pub const LIMIT_TOL: f64 = 1e-24;

/// The large-N limit of the trace.
pub fn limit_trace(family: FamilyType, t: f64) -> Result<CertifiedValue> {
    limit_trace_with_tol(family, t, LIMIT_TOL)
}

pub fn limit_trace_with_tol(family: FamilyType, t: f64, tol: f64) -> Result<CertifiedValue> {
    let q = q_of_t(t)?;
    let part_tol = tol / 8.0;
    let phi = euler_phi(q, part_tol)?;
    let inv_phi = phi.recip();
    let v = match family {
        FamilyType::APrime => {
            let theta = jacobi_theta_moment(q, 0, part_tol)?;
            theta.mul(&inv_phi).mul(&inv_phi)
        }
        FamilyType::A => inv_phi.mul(&inv_phi),
        FamilyType::B | FamilyType::C | FamilyType::D => inv_phi,
    };
    Ok(v)
}

fn check_q_f64(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0,1), got {q}")))
    }
}

/// Largest size index the exact size tail will sum to.
const SIZE_TAIL_LIMIT: usize = 20_000;

/// `P(|alpha| > M)` under the q-uniform measure, `phi(q) sum_{n>M} p(n) q^n`.
pub fn size_tail_probability(q: f64, m: usize) -> Result<f64> {
    check_q_f64(q)?;
    let first = (m + 1) as f64 * q.ln();
    let (end, _) = choose_cutoff(q, 0, (first - 45.0).exp().max(f64::MIN_POSITIVE), SIZE_TAIL_LIMIT)?;
    let end = end.max(m + 1);
    let counts = partition_counts(end);
    let lq = q.ln();
    let mut sum = 0.0;
    for (n, p) in counts.iter().enumerate().skip(m + 1) {
        let lp = num_traits::ToPrimitive::to_f64(p).unwrap_or(f64::INFINITY).ln();
        sum += (lp + n as f64 * lq).exp();
    }
    let phi = euler_phi(q, 1e-18)?;
    Ok(phi.value.to_f64() * sum)
}

/// `P(l(alpha) > L)` under the q-uniform measure, `1 - prod_{i>L} (1 - q^i)`.
pub fn length_tail_probability(q: f64, l: usize) -> Result<f64> {
    check_q_f64(q)?;
    // T_L = x_{L+1} + (1 - x_{L+1}) T_{L+1}, started where the remaining
    // tail is far below the first term.
    let lq = q.ln();
    let extra = ((1e-22 * (1.0 - q)).ln() / lq).ceil().max(1.0) as usize;
    let k = l + 1 + extra;
    let mut tail = (k as f64 * lq).exp() / (1.0 - q);
    for i in (l + 1..=k).rev() {
        let x = (i as f64 * lq).exp();
        tail = x + (1.0 - x) * tail;
    }
    Ok(tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_sums_match_enumeration() {
        let s = DoubleDouble::new(0.3);
        let sums = ContentSums::new(s, 12, 4);
        for n in 0..=12u32 {
            let direct: f64 = crate::partitions::Partitions::new(n)
                .filter(|p| p.len() <= 3)
                .map(|p| (-0.3 * p.total_content() as f64).exp())
                .sum();
            let got = (sums.capped(n as usize, 3) * (sums.gamma * n as f64).exp()).to_f64();
            assert!((got - direct).abs() <= 1e-12 * direct, "n={n}: {got} vs {direct}");
        }
    }

    #[test]
    fn trivial_tails() {
        let q = (-4.0f64).exp();
        let phi = euler_phi(q, 1e-18).unwrap().value.to_f64();
        assert!((size_tail_probability(q, 0).unwrap() - (1.0 - phi)).abs() < 1e-15);
        assert!((length_tail_probability(q, 0).unwrap() - (1.0 - phi)).abs() < 1e-15);
    }
}
