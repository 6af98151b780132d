use heattrace::partitions::{
    bernoulli, content_histogram, e_expansion_discrepancy, enumerate_partitions, zeta_negative, Partition,
};
use heattrace::qseries::{
    bounded_length_partition_gf, euler_phi, jacobi_theta_moment, partition_count, partition_counts, q_of_t,
    tail_bound_poly_partition_sum, QPolynomial,
};
use heattrace::{DoubleDouble, Error};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn euler_phi_matches_pentagonal_series() {
    for q in [0.1, 0.5, (-0.5f64).exp(), 0.9] {
        let pent: f64 = (-60i64..=60)
            .map(|k| {
                let e = k * (3 * k - 1) / 2;
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * q.powi(e as i32)
            })
            .sum();
        let v = euler_phi(q, 1e-20).unwrap();
        assert!((v.value_f64() - pent).abs() < 1e-14, "q={q}");
        assert!(v.tail_bound <= 1e-20);
    }
    assert!(matches!(euler_phi(1.0, 1e-10), Err(Error::Domain(_))));
    assert!(matches!(euler_phi(0.5, 0.0), Err(Error::Domain(_))));
}

#[test]
fn theta_matches_triple_product() {
    for q in [0.2, (-1.0f64).exp(), 0.7] {
        let product: f64 = (1..2000)
            .map(|m| (1.0 - q.powi(2 * m)) * (1.0 + q.powi(2 * m - 1)).powi(2))
            .product();
        let v = jacobi_theta_moment(q, 0, 1e-20).unwrap().value_f64();
        assert!((v - product).abs() < 1e-13 * product, "q={q}");
        let m2: f64 = (1..200).map(|n| 2.0 * (n as f64).powi(4) * q.powi(n * n)).sum();
        let v2 = jacobi_theta_moment(q, 2, 1e-20).unwrap().value_f64();
        assert!((v2 - m2).abs() < 1e-12 * m2);
    }
}

#[test]
fn q_of_t_and_phi_precision() {
    let q = q_of_t(4.0).unwrap();
    assert!((q.to_f64() - (-2.0f64).exp()).abs() < 1e-17);
    assert!(q_of_t(0.0).is_err() && q_of_t(f64::NAN).is_err());
    let phi = euler_phi(q, 1e-26).unwrap();
    assert!(phi.tail_bound <= 1e-26);
    assert!(matches!(euler_phi(q, 1e-40), Err(Error::Resource { .. })));
}

#[test]
fn partition_counts_match_enumeration() {
    let counts = partition_counts(30);
    for (n, c) in counts.iter().enumerate() {
        assert_eq!(c, &BigUint::from(enumerate_partitions(n as u32).len()), "n={n}");
    }
    assert_eq!(partition_count(100), BigUint::from(190_569_292u64));
    assert_eq!(partition_count(200), BigUint::from(3_972_999_029_388u64));
}

#[test]
fn tail_bounds_dominate_actual_tails() {
    let counts = partition_counts(600);
    for (q, m, d) in [(0.5, 20usize, 0u32), (0.5, 40, 4), ((-1.0f64).exp(), 10, 2), (0.9, 200, 1)] {
        let actual: f64 = (m + 1..=600)
            .map(|n| (n as f64).powi(d as i32) * counts[n].to_f64().unwrap() * q.powi(n as i32))
            .sum();
        let bound = tail_bound_poly_partition_sum(q, m, d).unwrap();
        assert!(bound >= actual, "q={q} m={m} d={d}: {bound:e} < {actual:e}");
        assert!(bound <= 1e4 * actual.max(1e-300));
    }
    assert!(matches!(tail_bound_poly_partition_sum(0.99, 2, 6), Err(Error::CutoffTooSmall(_))));
}

#[test]
fn bounded_length_generating_function() {
    let q = 0.3f64;
    for l in [0usize, 1, 3, 6] {
        let direct: f64 = (0..=60u32)
            .map(|n| {
                let c = enumerate_partitions(n).iter().filter(|p| p.len() <= l).count();
                c as f64 * q.powi(n as i32)
            })
            .sum();
        let v = bounded_length_partition_gf(q, l, 1e-20).unwrap().value_f64();
        assert!((v - direct).abs() < 1e-14, "L={l}");
    }
}

#[test]
fn polynomial_derivation_and_evaluation() {
    let p = QPolynomial::from_integers([1, 2, 3].map(BigInt::from)).unwrap();
    assert_eq!(p.max_degree(), 2);
    let d = p.derive_n(2);
    assert_eq!(d.coeffs(), &[rat(0, 1), rat(2, 1), rat(12, 1)]);
    let v = d.evaluate(0.5).to_f64();
    assert!((v - (1.0 + 3.0)).abs() < 1e-15);
    assert_eq!(p.scale(&rat(1, 2)).coeff(1), &rat(1, 1));
}

#[test]
fn bernoulli_and_zeta_values() {
    assert_eq!(bernoulli(1), rat(-1, 2));
    assert_eq!(bernoulli(2), rat(1, 6));
    assert_eq!(bernoulli(4), rat(-1, 30));
    assert_eq!(bernoulli(12), rat(-691, 2730));
    assert_eq!(bernoulli(7), rat(0, 1));
    assert_eq!(bernoulli(80) * rat(1, 1), bernoulli(80));
    assert_eq!(zeta_negative(0), rat(-1, 2));
    assert_eq!(zeta_negative(1), rat(-1, 12));
    assert_eq!(zeta_negative(3), rat(1, 120));
    assert_eq!(zeta_negative(2), rat(0, 1));
}

#[test]
fn content_histograms_are_symmetric() {
    for n in [0u32, 1, 7, 15, 30] {
        let h = content_histogram(n).unwrap();
        let total: u64 = h.iter().map(|(_, c)| c).sum();
        assert_eq!(BigUint::from(total), partition_count(n as usize));
        for (k, c) in h.iter() {
            assert_eq!(h.count(-k), c);
        }
        assert_eq!(h.max_abs_content(), (n as i64) * (n as i64 - 1).max(0) / 2);
    }
    assert!(content_histogram(101).is_err());
}

#[test]
fn exponential_generating_function_expansion() {
    let lambda = Partition::new(vec![3, 1]).unwrap();
    let mut last = f64::INFINITY;
    for z in [0.4, 0.2, 0.1, 0.05] {
        let gap = e_expansion_discrepancy(&lambda, z, 6).unwrap().abs().to_f64();
        assert!(gap < last, "z={z}");
        assert!(gap < z.powi(7));
        last = gap;
    }
    assert!(e_expansion_discrepancy(&lambda, 0.0, 4).is_err());
}

#[test]
fn double_double_arithmetic() {
    let two = DoubleDouble::from_i64(2);
    let s = two.sqrt();
    assert!((s * s - two).abs().to_f64() < 1e-30);
    let x = DoubleDouble::new(0.7);
    assert!((x.exp().ln() - x).abs().to_f64() < 1e-30);
    let third = DoubleDouble::from_rational(&rat(1, 3));
    assert_eq!(third.to_sci_string(30), "3.33333333333333333333333333333e-1");
    assert_eq!(DoubleDouble::from_i64(1000).to_sci_string(5), "1.0000e3");
    let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(3) * BigInt::from(10).pow(399));
    assert!((DoubleDouble::from_rational(&big).to_f64() - 10.0 / 3.0).abs() < 1e-15);
    let huge = BigRational::from_integer(BigInt::from(7) * BigInt::from(2).pow(1100));
    assert!(DoubleDouble::from_rational(&huge).to_f64().is_infinite());
    let back = third.to_rational().unwrap();
    assert!(((back - rat(1, 3)) * rat(1_000_000_000_000, 1)).to_f64().unwrap().abs() < 1e-18);
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(parts in proptest::collection::vec(1u32..9, 0..8)) {
        let lambda = Partition::from_unsorted(parts);
        let conj = lambda.conjugate();
        prop_assert_eq!(conj.size(), lambda.size());
        prop_assert_eq!(conj.conjugate(), lambda.clone());
        prop_assert_eq!(conj.total_content(), -lambda.total_content());
        prop_assert_eq!(conj.len() as u32, lambda.part(1));
    }

    #[test]
    fn partition_new_rejects_increasing(a in 1u32..9, b in 1u32..9) {
        prop_assume!(a < b);
        prop_assert!(Partition::new(vec![a, b]).is_err());
    }
}
