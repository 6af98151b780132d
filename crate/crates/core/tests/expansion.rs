use std::collections::BTreeMap;

use heattrace::expansion::{
    evaluate_expansion, expansion_coefficient, expected_remainder_slope, gaussian_moment, least_squares_slope,
    partition_moment, remainder_order_fit, ExpansionCoefficients, PowerLawFit, ResidualPoint,
};
use heattrace::group_duals::FamilyType;
use heattrace::heat_trace::limit_trace;
use heattrace::hurwitz::coefficient_via_gf;
use heattrace::partitions::enumerate_partitions;

const T: f64 = 8.0;
const MAX_SIZE: u32 = 24;

fn content(parts: &[u32]) -> i64 {
    let mut k = 0i64;
    for (i, &p) in parts.iter().enumerate() {
        for j in 0..p as i64 {
            k += j - i as i64;
        }
    }
    k
}

/// `(size, total content) -> count`, built by brute force.
fn histogram() -> BTreeMap<(u32, i64), f64> {
    let mut h = BTreeMap::new();
    for n in 0..=MAX_SIZE {
        for lambda in enumerate_partitions(n) {
            *h.entry((n, content(lambda.parts()))).or_insert(0.0) += 1.0;
        }
    }
    h
}

fn q() -> f64 {
    (-T / 2.0).exp()
}

fn euler_phi_direct(q: f64) -> f64 {
    (1..400).map(|m| 1.0 - q.powi(m)).product()
}

fn theta_direct(q: f64) -> f64 {
    (-20i32..=20).map(|n| q.powi(n * n)).sum()
}

/// `[x^order] exp(c1 x + c2 x^2)` by the power-series exponential recurrence.
fn exp_coeff(c1: f64, c2: f64, order: usize) -> f64 {
    let p = [0.0, c1, c2];
    let mut e = vec![1.0];
    for n in 1..=order {
        let s: f64 = (1..=n.min(2)).map(|j| j as f64 * p[j] * e[n - j]).sum();
        e.push(s / n as f64);
    }
    e[order]
}

/// `a_k` for B, C, D as a direct sum over single partitions.
fn orthogonal_oracle(family: FamilyType, k: usize) -> f64 {
    let shift = if family == FamilyType::C { 0.5 } else { -0.5 };
    let mut s = 0.0;
    for (&(n, c), &count) in &histogram() {
        let x = -T * (c as f64 + shift * n as f64);
        s += count * q().powi(n as i32) * exp_coeff(x, 0.0, k);
    }
    s
}

/// `a_k` for type A as a direct sum over pairs of partitions.
fn special_unitary_oracle(k: usize) -> f64 {
    let h = histogram();
    let mut s = 0.0;
    for (&(n1, c1), &m1) in &h {
        for (&(n2, c2), &m2) in &h {
            let d = n1 as f64 - n2 as f64;
            let w = m1 * m2 * q().powi((n1 + n2) as i32);
            s += w * exp_coeff(-T * (c1 + c2) as f64, T * d * d / 2.0, k);
        }
    }
    s
}

/// `a_k` for type A' as a direct sum over pairs of partitions and a charge `n`.
fn unitary_oracle(k: usize) -> f64 {
    let h = histogram();
    let mut s = 0.0;
    for (&(n1, c1), &m1) in &h {
        for (&(n2, c2), &m2) in &h {
            for charge in -12i32..=12 {
                let x = -T * ((c1 + c2) as f64 + charge as f64 * (n1 as f64 - n2 as f64));
                let w = m1 * m2 * q().powi((n1 + n2) as i32 + charge * charge);
                s += w * exp_coeff(x, 0.0, k);
            }
        }
    }
    s
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn partition_moment_matches_enumeration() {
    let h = histogram();
    for (k, m) in [(2u32, 0u32), (2, 1), (4, 0), (0, 3)] {
        let direct: f64 = h
            .iter()
            .map(|(&(n, c), &cnt)| cnt * (c as f64).powi(k as i32) * (n as f64).powi(m as i32) * q().powi(n as i32))
            .sum::<f64>()
            * euler_phi_direct(q());
        let v = partition_moment(q(), k, m, 1e-20).unwrap().value_f64();
        assert!(close(v, direct, 1e-12), "k={k} m={m}: {v} vs {direct}");
    }
    assert_eq!(partition_moment(q(), 3, 2, 1e-20).unwrap().value_f64(), 0.0);
}

#[test]
fn gaussian_moment_matches_direct_sum() {
    for m in 0..4u32 {
        let num: f64 = (-20i32..=20).map(|n| (n as f64).powi(2 * m as i32) * q().powi(n * n)).sum();
        let v = gaussian_moment(q(), m).unwrap().value_f64();
        assert!(close(v, num / theta_direct(q()), 1e-13), "m={m}");
    }
}

#[test]
fn orthogonal_coefficients_match_enumeration() {
    for family in [FamilyType::B, FamilyType::C, FamilyType::D] {
        for k in 0..=4u32 {
            let v = expansion_coefficient(family, T, k, 1e-18).unwrap().value_f64();
            let direct = orthogonal_oracle(family, k as usize);
            assert!(close(v, direct, 1e-12), "{family} a_{k}: {v} vs {direct}");
        }
    }
}

#[test]
fn special_unitary_coefficients_match_enumeration() {
    for k in [0u32, 2, 4] {
        let v = expansion_coefficient(FamilyType::A, T, k, 1e-18).unwrap().value_f64();
        let direct = special_unitary_oracle(k as usize);
        assert!(close(v, direct, 1e-12), "a_{k}: {v} vs {direct}");
    }
}

#[test]
fn unitary_coefficients_match_enumeration() {
    for k in [2u32, 4] {
        let v = expansion_coefficient(FamilyType::APrime, T, k, 1e-18).unwrap().value_f64();
        let direct = unitary_oracle(k as usize);
        assert!(close(v, direct, 1e-12), "a_{k}: {v} vs {direct}");
    }
}

#[test]
fn moment_route_agrees_with_generating_function_route() {
    for family in FamilyType::ALL {
        for k in 0..=4u32 {
            let a = expansion_coefficient(family, 4.0, k, 1e-20).unwrap();
            let b = coefficient_via_gf(family, 4.0, k, 1e-20).unwrap();
            let gap = (a.value - b.value).abs().to_f64();
            assert!(gap <= a.tail_bound + b.tail_bound + 1e-20, "{family} a_{k}: gap {gap:e}");
        }
    }
}

#[test]
fn leading_coefficient_is_the_limit_and_odd_unitary_vanish() {
    for family in FamilyType::ALL {
        let a0 = expansion_coefficient(family, 3.0, 0, 1e-20).unwrap();
        let lim = limit_trace(family, 3.0).unwrap();
        assert!(((a0.value - lim.value) / lim.value).abs().to_f64() < 1e-18, "{family}");
        let p0 = evaluate_expansion(family, family.nearest_size(20), 3.0, 0).unwrap();
        assert!(((p0.value - a0.value) / a0.value).abs().to_f64() < 1e-18);
    }
    for family in [FamilyType::A, FamilyType::APrime] {
        for k in [1u32, 3, 5] {
            let v = expansion_coefficient(family, 3.0, k, 1e-20).unwrap();
            assert!(v.value.is_zero() && v.tail_bound == 0.0);
        }
    }
    let b = ExpansionCoefficients::compute(FamilyType::B, 5.0, 3, 1e-20).unwrap();
    let d = ExpansionCoefficients::compute(FamilyType::D, 5.0, 3, 1e-20).unwrap();
    for k in 0..=3 {
        assert_eq!(b.get(k).unwrap().value, d.get(k).unwrap().value);
    }
}

#[test]
fn remainder_slopes_follow_the_truncation_order() {
    for (family, p) in [(FamilyType::C, 1u32), (FamilyType::B, 2), (FamilyType::APrime, 1)] {
        let grid: Vec<u32> = [16u32, 32, 64].iter().map(|&n| family.nearest_size(n)).collect();
        let fit = remainder_order_fit(family, 8.0, p, &grid).unwrap();
        let threshold = expected_remainder_slope(family, p) + 0.5;
        assert!(fit.passes(threshold, 1e-13), "{family} p={p}: {fit:?}");
        assert!(fit.slope.is_some());
    }
    assert!(remainder_order_fit(FamilyType::C, 8.0, 1, &[16, 32]).is_err());
}

#[test]
fn power_law_fit_drops_saturated_points() {
    let exact: Vec<(f64, f64)> = [10.0f64, 20.0, 40.0].iter().map(|&n| (n.ln(), (3.0 * n.powi(-3)).ln())).collect();
    assert!((least_squares_slope(&exact).unwrap() + 3.0).abs() < 1e-12);
    assert!(least_squares_slope(&exact[..1]).is_none());
    let points = vec![
        ResidualPoint { matrix_size: 8, residual: 1e-4, noise: 1e-20 },
        ResidualPoint { matrix_size: 16, residual: 1.25e-5, noise: 1e-20 },
        ResidualPoint { matrix_size: 32, residual: 1e-16, noise: 1e-20 },
    ];
    let fit = PowerLawFit::from_points(points);
    assert!((fit.slope.unwrap() + 3.0).abs() < 1e-12);
    let flat = PowerLawFit::from_points(vec![
        ResidualPoint { matrix_size: 8, residual: 1e-15, noise: 0.0 },
        ResidualPoint { matrix_size: 16, residual: 1e-15, noise: 0.0 },
    ]);
    assert!(flat.saturated && flat.passes(-10.0, 1e-13));
}
