//! The acceptance suite, shared by `heattrace verify` and the test harness.

use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expansion::{
    expansion_coefficient, expected_remainder_slope, least_squares_slope, remainder_order_fit, partition_moment,
    PowerLawFit, ResidualPoint,
};
use crate::group_duals::{
    casimir_label, casimir_weight, embed_label, random_label, random_partition, spectral_gap, FamilyType, GroupFamily,
};
use crate::gw::{build_gw_series, gw_invariant_torus};
use crate::heat_trace::{central_heat_trace, limit_trace, limit_trace_with_tol, so_even_l_factor, TraceRequest};
use crate::hurwitz::{
    coefficient_via_gf, covering_integral_degree_cutoff, covering_integral_euler_cutoff, hurwitz_gf, hurwitz_monodromy_oracle,
    hurwitz_number, log_mass_term, mass_slice,
};
use crate::partitions::{enumerate_partitions, Partition};
use crate::qseries::{euler_phi, jacobi_theta_moment, partition_count, q_of_t, CertifiedValue};

pub const CHECK_COUNT: u32 = 15;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{:>2}] {}: {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

pub fn check_name(id: u32) -> &'static str {
    match id {
        1 => "Hurwitz numbers vs monodromy count",
        2 => "Hurwitz numbers at k=0 and odd k",
        3 => "Hurwitz number bounds",
        4 => "Casimir identity",
        5 => "expansion coefficients, two routes",
        6 => "B/D coincidence and unitary zeros",
        7 => "limit values",
        8 => "expansion remainder order",
        9 => "Euler cutoff remainder order",
        10 => "degree cutoff residual decay",
        11 => "GW/Hurwitz identity",
        12 => "p_2 = 2K",
        13 => "spectral gap",
        14 => "mass structure",
        15 => "tail certification",
        _ => "unknown check",
    }
}

/// Runs criterion `id`; `quick` shrinks the heavier grids.
pub fn run_check(id: u32, quick: bool) -> CheckResult {
    let start = Instant::now();
    let outcome = match id {
        1 => check_oracle(quick),
        2 => check_trivial_hurwitz(),
        3 => check_bounds(),
        4 => check_casimir(quick),
        5 => check_cross_route(),
        6 => check_b_d(),
        7 => check_limits(),
        8 => check_expansion_fit(),
        9 => check_euler_fit(),
        10 => check_degree_cutoff(),
        11 => check_gw(quick),
        12 => check_p2(),
        13 => check_gap(quick),
        14 => check_mass(),
        15 => check_tails(quick),
        _ => Err(Error::Validation(format!("no acceptance check numbered {id}"))),
    };
    let elapsed = start.elapsed();
    let (passed, detail) = match outcome {
        Ok(o) => o,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult {
        id,
        name: check_name(id),
        passed,
        detail,
        elapsed,
    }
}

pub fn run_all(quick: bool) -> Vec<CheckResult> {
    (1..=CHECK_COUNT).map(|id| run_check(id, quick)).collect()
}

type Outcome = Result<(bool, String)>;

/// Matrix sizes used for a nominal size: type B needs odd sizes, so it runs
/// one above.
pub fn family_size(family: FamilyType, nominal: u32) -> u32 {
    family.nearest_size(nominal)
}

fn grid(family: FamilyType, nominal: &[u32]) -> Vec<u32> {
    nominal.iter().map(|&n| family_size(family, n)).collect()
}

fn check_oracle(quick: bool) -> Outcome {
    let n_max = if quick { 5 } else { 6 };
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut count = 0;
    for n in 1..=n_max {
        for k in (0..=4).step_by(2) {
            let h = BigRational::from_integer(hurwitz_number(n, k)?);
            if h != hurwitz_monodromy_oracle(n, k)? {
                bad.push((n, k));
            }
            count += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        bad.is_empty() && secs < 60.0,
        format!("{count} pairs (n <= {n_max}, even k <= 4), mismatches {bad:?}, {secs:.2}s of 60s"),
    ))
}

fn check_trivial_hurwitz() -> Outcome {
    let mut bad = Vec::new();
    for n in 0..=60u32 {
        if hurwitz_number(n, 0)? != BigInt::from(partition_count(n as usize)) {
            bad.push(format!("H(n={n},0)"));
        }
    }
    for n in 0..=20u32 {
        for k in (1..=9).step_by(2) {
            if !hurwitz_number(n, k)?.is_zero() {
                bad.push(format!("H({n},{k})"));
            }
        }
    }
    Ok((bad.is_empty(), format!("H(n,0)=p(n) for n<=60, odd k<=9 vanish for n<=20; failures {bad:?}")))
}

fn check_bounds() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=30u32 {
        let p = BigInt::from(partition_count(n as usize));
        for k in 0..=5u32 {
            let h = hurwitz_number(n, 2 * k)?;
            let lower = num_traits::pow(BigInt::from(n - 1), 4 * k as usize);
            let upper = &p * num_traits::pow(BigInt::from(n), 4 * k as usize);
            let four_k = num_traits::pow(BigInt::from(4), k as usize);
            if lower > &h * four_k || h > upper {
                bad.push((n, k));
            }
        }
    }
    Ok((bad.is_empty(), format!("n<=30, k<=5, violations {bad:?}")))
}

fn check_casimir(quick: bool) -> Outcome {
    let per_type = if quick { 200 } else { 500 };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0;
    let mut bad = 0;
    for family in FamilyType::ALL {
        let sizes: Vec<u32> = (4..=16).filter(|&n| family.accepts_size(n)).collect();
        for i in 0..per_type {
            let g = GroupFamily::new(family, sizes[i % sizes.len()])?;
            let label = random_label(&g, &mut rng, 12);
            if casimir_label(&g, &label)? != casimir_weight(&g, &embed_label(&g, &label)?)? {
                bad += 1;
            }
            total += 1;
        }
    }
    Ok((bad == 0, format!("{total} random labels ({per_type} per type), {bad} mismatches")))
}

fn relative_gap(a: &CertifiedValue, b: &CertifiedValue) -> f64 {
    let scale = a.value.abs().to_f64().max(b.value.abs().to_f64());
    if scale == 0.0 {
        0.0
    } else {
        (a.value - b.value).abs().to_f64() / scale
    }
}

const COEFF_TOL: f64 = 1e-20;

fn check_cross_route() -> Outcome {
    let start = Instant::now();
    let jobs: Vec<(f64, FamilyType, u32)> = [4.0, 8.0]
        .iter()
        .flat_map(|&t| FamilyType::ALL.into_iter().flat_map(move |f| (0..=6).map(move |k| (t, f, k))))
        .collect();
    let gaps = jobs
        .par_iter()
        .map(|&(t, f, k)| {
            let a = expansion_coefficient(f, t, k, COEFF_TOL)?;
            let b = coefficient_via_gf(f, t, k, COEFF_TOL)?;
            Ok(((t, f, k), relative_gap(&a, &b)))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = gaps.iter().cloned().fold(((0.0, FamilyType::A, 0), 0.0f64), |w, g| if g.1 > w.1 { g } else { w });
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst.1 <= 1e-10 && secs < 300.0,
        format!(
            "{} coefficients, worst relative gap {:.2e} at t={} {} k={} (need <= 1e-10), {secs:.1}s of 300s",
            gaps.len(),
            worst.1,
            worst.0 .0,
            worst.0 .1,
            worst.0 .2
        ),
    ))
}

fn check_b_d() -> Outcome {
    let mut worst = 0.0f64;
    let mut zeros_ok = true;
    for t in [4.0, 8.0] {
        for k in 0..=6 {
            let b = expansion_coefficient(FamilyType::B, t, k, COEFF_TOL)?;
            let d = expansion_coefficient(FamilyType::D, t, k, COEFF_TOL)?;
            worst = worst.max(relative_gap(&b, &d));
            if k % 2 == 1 {
                for f in [FamilyType::A, FamilyType::APrime] {
                    let a = expansion_coefficient(f, t, k, COEFF_TOL)?;
                    zeros_ok &= a.value.is_zero() && a.tail_bound == 0.0;
                }
            }
        }
    }
    Ok((
        worst <= 1e-12 && zeros_ok,
        format!("max relative |a_k^B - a_k^D| {worst:.2e} (need <= 1e-12); odd unitary coefficients exact zeros: {zeros_ok}"),
    ))
}

fn check_limits() -> Outcome {
    let t = 8.0;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut at_64 = Vec::new();
    for family in FamilyType::ALL {
        let lim = limit_trace(family, t)?;
        let mut diffs = Vec::new();
        for n in grid(family, &[16, 32, 64]) {
            let v = central_heat_trace(&TraceRequest::new(GroupFamily::new(family, n)?, t, 1e-14)?)?;
            diffs.push((v.value - lim.value).abs().to_f64());
            if n >= 64 {
                at_64.push((family, v));
            }
        }
        let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
        let last = *diffs.last().expect("grid");
        ok &= decreasing && last < 0.1;
        parts.push(format!("{family} {last:.1e}"));
    }
    let trace_of = |f: FamilyType| at_64.iter().find(|(g, _)| *g == f).map(|(_, v)| v.value).expect("computed");
    let ratio = (trace_of(FamilyType::APrime) / trace_of(FamilyType::A)).to_f64();
    let theta = jacobi_theta_moment(q_of_t(t)?, 0, 1e-20)?.value_f64();
    ok &= (ratio - theta).abs() < 1e-3;
    Ok((
        ok,
        format!(
            "|trace - limit| decreasing, at N=64: {}; A'/A ratio {ratio:.6} vs theta {theta:.6}",
            parts.join(", ")
        ),
    ))
}

fn slope_threshold(family: FamilyType, p: u32) -> f64 {
    expected_remainder_slope(family, p) + 0.5
}

const SATURATED_BELOW: f64 = 1e-13;

fn describe_fit(fit: &PowerLawFit) -> String {
    match fit.slope {
        Some(s) => format!("{s:.2}"),
        None => "saturated".into(),
    }
}

fn check_expansion_fit() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for family in FamilyType::ALL {
        let sizes = grid(family, &[16, 32, 64]);
        let mut slopes = Vec::new();
        for p in 1..=3 {
            let fit = remainder_order_fit(family, 8.0, p, &sizes)?;
            ok &= fit.passes(slope_threshold(family, p), SATURATED_BELOW);
            slopes.push(format!("{}<={:.1}", describe_fit(&fit), slope_threshold(family, p)));
        }
        parts.push(format!("{family}: {}", slopes.join(" ")));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((ok && secs < 600.0, format!("{}; {secs:.1}s of 600s", parts.join("; "))))
}

fn check_euler_fit() -> Outcome {
    let t = 8.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for family in FamilyType::ALL {
        let groups = grid(family, &[16, 32, 64])
            .into_iter()
            .map(|n| GroupFamily::new(family, n))
            .collect::<Result<Vec<_>>>()?;
        let traces = groups
            .iter()
            .map(|g| central_heat_trace(&TraceRequest::new(*g, t, 1e-22)?))
            .collect::<Result<Vec<_>>>()?;
        let mut slopes = Vec::new();
        for p in 1..=3 {
            let points = groups
                .iter()
                .zip(&traces)
                .map(|(g, tr)| {
                    let v = covering_integral_euler_cutoff(g, t, p, 1e-22)?;
                    let diff = v.sub(tr);
                    Ok(ResidualPoint {
                        matrix_size: g.matrix_size(),
                        residual: diff.value.abs().to_f64(),
                        noise: diff.tail_bound,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let fit = PowerLawFit::from_points(points);
            ok &= fit.passes(slope_threshold(family, p), SATURATED_BELOW);
            slopes.push(format!("{}<={:.1}", describe_fit(&fit), slope_threshold(family, p)));
        }
        parts.push(format!("{family}: {}", slopes.join(" ")));
    }
    Ok((ok, parts.join("; ")))
}

fn check_degree_cutoff() -> Outcome {
    let t = 8.0;
    let gamma = 0.5;
    let target = -t / 12.0 * 0.8;
    let mut ok = true;
    let mut parts = Vec::new();
    for family in FamilyType::ALL {
        let mut pts = Vec::new();
        for n in grid(family, &[32, 64, 128]) {
            let g = GroupFamily::new(family, n)?;
            let tr = central_heat_trace(&TraceRequest::new(g, t, 1e-26)?)?;
            let v = covering_integral_degree_cutoff(&g, t, gamma, 1e-26)?;
            let diff = v.sub(&tr);
            let r = diff.value.abs().to_f64();
            if r > 10.0 * diff.tail_bound {
                pts.push(((n as f64).powf(gamma), r.ln()));
            }
        }
        let slope = least_squares_slope(&pts);
        let pass = pts.len() >= 2 && matches!(slope, Some(s) if s <= target);
        ok &= pass;
        parts.push(format!(
            "{family} {}",
            slope.map(|s| format!("{s:.2}")).unwrap_or_else(|| "unresolved".into())
        ));
    }
    Ok((
        ok,
        format!("slope of ln residual vs N^0.5: {} (need <= {target:.3})", parts.join(", ")),
    ))
}

fn check_gw(quick: bool) -> Outcome {
    let n_max = if quick { 8 } else { 10 };
    let mut bad = Vec::new();
    for n in 1..=n_max {
        for m in 0..=3u32 {
            let gw = gw_invariant_torus(n, &vec![1; 2 * m as usize])?;
            if gw != BigRational::from_integer(hurwitz_number(n, 2 * m)?) {
                bad.push(format!("<tau_1^{}>_{n}", 2 * m));
            }
        }
    }
    for k in 0..=3u32 {
        let series = if k == 0 { None } else { Some(build_gw_series(k, 8, 2)?) };
        for d in 1..=8 {
            let c = match &series {
                None => gw_invariant_torus(d, &[])?,
                Some(s) => s.coefficient(d, &vec![2; k as usize]).cloned().unwrap_or_else(BigRational::zero),
            };
            // 2^{-k} d^2/dz_1^2 ... d^2/dz_k^2 at z = 0 picks 2^{-k} 2^k c.
            if c != BigRational::from_integer(hurwitz_number(d, k)?) {
                bad.push(format!("extraction d={d} k={k}"));
            }
        }
    }
    Ok((
        bad.is_empty(),
        format!("n<={n_max}, m<=3 and extraction d<=8, k<=3; failures {bad:?}"),
    ))
}

fn check_p2() -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for n in 0..=12 {
        for lambda in enumerate_partitions(n) {
            let p2 = crate::partitions::shifted_power_sum(&lambda, 2);
            if p2 != BigRational::from_integer(BigInt::from(2 * lambda.total_content())) {
                bad.push(lambda.to_string());
            }
            count += 1;
        }
    }
    Ok((bad.is_empty(), format!("{count} partitions of n<=12, failures {bad:?}")))
}

fn check_gap(quick: bool) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 6..=12 {
        let report = spectral_gap(&GroupFamily::new(FamilyType::APrime, n)?, 4)?;
        if report.gap != BigRational::one() || !report.is_certified() {
            ok = false;
            notes.push(format!("A' N={n} gap {}", report.gap));
        }
    }
    let step = if quick { 4 } else { 1 };
    let mut worst = 0.0f64;
    let mut checked = 0;
    for family in [FamilyType::B, FamilyType::C, FamilyType::D] {
        for n in (6..=64).step_by(step).filter(|&n| family.accepts_size(n)) {
            let report = spectral_gap(&GroupFamily::new(family, n)?, 4)?;
            let dist = (report.gap - BigRational::one()).abs().to_f64().unwrap_or(f64::INFINITY);
            worst = worst.max(dist * n as f64 / 2.0);
            if dist > 2.0 / n as f64 {
                ok = false;
                notes.push(format!("{family} N={n}"));
            }
            checked += 1;
        }
    }
    Ok((
        ok,
        format!(
            "A' gap = 1 for N=6..12; B/C/D over {checked} sizes, worst |gap-1|/(2/N) = {worst:.2}; failures {notes:?}"
        ),
    ))
}

fn check_mass() -> Outcome {
    let t = 1.0;
    let mut worst = 0.0f64;
    let mut needed = 0;
    for n in 1..=12 {
        let mut k_max = 10;
        loop {
            let (partial, closed) = mass_slice(n, t, k_max)?;
            let rel = ((closed - partial) / closed).abs().to_f64();
            if rel <= 1e-10 {
                worst = worst.max(rel);
                needed = needed.max(k_max);
                break;
            }
            k_max += 10;
            if k_max > 300 {
                return Ok((false, format!("partial sums for n={n} did not converge")));
            }
        }
    }
    let logs = (1..=40).map(|n| log_mass_term(n, t)).collect::<Result<Vec<_>>>()?;
    let last_drop = logs.windows(2).rposition(|w| w[1] <= w[0]).map(|i| i + 2).unwrap_or(1);
    let increasing_from = last_drop;
    let diverges = increasing_from <= 30;
    Ok((
        diverges,
        format!(
            "partial sums within {worst:.1e} relative for n<=12 (k <= {needed}); q^n A_n increasing from n={increasing_from} to 40"
        ),
    ))
}

/// A certified computation that can be repeated at a tighter tolerance.
type Recompute = Box<dyn Fn(f64) -> Result<CertifiedValue> + Send + Sync>;

fn random_request(rng: &mut ChaCha8Rng) -> Result<(String, f64, Recompute)> {
    let kind = rng.gen_range(0..11);
    let tol = 10f64.powf(rng.gen_range(-16.0..-8.0));
    let t = rng.gen_range(5.0..10.0f64);
    let family = FamilyType::ALL[rng.gen_range(0..5)];
    let size = family_size(family, rng.gen_range(4..40));
    let g = GroupFamily::new(family, size)?;
    let q = q_of_t(t)?;
    let k = 2 * rng.gen_range(0..3u32);
    let m = rng.gen_range(0..3u32);
    let order = rng.gen_range(0..5u32);
    let p = rng.gen_range(1..4u32);
    let rank = rng.gen_range(3..10u32);
    let mu: Partition = random_partition(rng, 6, rank as usize - 2);
    let out: (String, Recompute) = match kind {
        0 => (
            format!("trace {g} t={t:.2}"),
            Box::new(move |tol| central_heat_trace(&TraceRequest::new(g, t, tol)?)),
        ),
        1 => (format!("limit {family} t={t:.2}"), Box::new(move |tol| limit_trace_with_tol(family, t, tol))),
        2 => (format!("phi t={t:.2}"), Box::new(move |tol| euler_phi(q, tol))),
        3 => (format!("theta moment m={m} t={t:.2}"), Box::new(move |tol| jacobi_theta_moment(q, m, tol))),
        4 => (format!("F_(1,{k}) D^{m} t={t:.2}"), Box::new(move |tol| hurwitz_gf(q, k, m, tol))),
        5 => (format!("moment k={k} m={m} t={t:.2}"), Box::new(move |tol| partition_moment(q, k, m, tol))),
        6 => (
            format!("a_{order} {family} t={t:.2}"),
            Box::new(move |tol| expansion_coefficient(family, t, order, tol)),
        ),
        7 => (
            format!("a_{order} {family} via kappa t={t:.2}"),
            Box::new(move |tol| coefficient_via_gf(family, t, order, tol)),
        ),
        8 => (
            format!("Euler cutoff {g} p={p} t={t:.2}"),
            Box::new(move |tol| covering_integral_euler_cutoff(&g, t, p, tol)),
        ),
        9 => (
            format!("degree cutoff {g} t={t:.2}"),
            Box::new(move |tol| covering_integral_degree_cutoff(&g, t, 0.5, tol)),
        ),
        _ => (
            format!("L factor rank {rank} mu={mu} t={t:.2}"),
            Box::new(move |tol| so_even_l_factor(rank, &mu, t, tol)),
        ),
    };
    Ok((out.0, tol, out.1))
}

fn check_tails(quick: bool) -> Outcome {
    let samples = if quick { 20 } else { 50 };
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let requests = (0..samples).map(|_| random_request(&mut rng)).collect::<Result<Vec<_>>>()?;
    let results: Vec<(String, Result<bool>)> = requests
        .par_iter()
        .map(|(label, tol, f)| {
            let outcome = (|| {
                let coarse = f(*tol)?;
                let fine = f(*tol / 10.0)?;
                Ok((coarse.value - fine.value).abs().to_f64() <= coarse.tail_bound)
            })();
            (label.clone(), outcome)
        })
        .collect();
    let failures: Vec<String> = results
        .iter()
        .filter_map(|(label, r)| match r {
            Ok(true) => None,
            Ok(false) => Some(format!("{label}: moved beyond bound")),
            Err(e) => Some(format!("{label}: {e}")),
        })
        .collect();
    Ok((
        failures.is_empty(),
        format!("{samples} randomized requests, failures {failures:?}"),
    ))
}
