use heattrace::gw::{
    build_gw_series, gw_hurwitz_pair, gw_invariant_torus, hurwitz_gf_from_gw, npoint_function, npoint_series_comparison,
};
use heattrace::hurwitz::{hurwitz_gf, hurwitz_number};
use heattrace::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn degree_one_values() {
    // For the single box, p_k = (1/2)^k - (-1/2)^k + (1 - 2^{-k}) zeta(-k).
    assert_eq!(gw_invariant_torus(1, &[1]).unwrap(), rat(0, 1));
    let p3 = rat(1, 4) + rat(7, 8) * rat(1, 120);
    assert_eq!(gw_invariant_torus(1, &[2]).unwrap(), p3 / rat(6, 1));
    assert_eq!(gw_invariant_torus(1, &[]).unwrap(), rat(1, 1));
    assert_eq!(gw_invariant_torus(7, &[]).unwrap(), rat(15, 1));
    assert!(matches!(gw_invariant_torus(0, &[1]), Err(Error::Validation(_))));
}

#[test]
fn stationary_descendants_of_tau_one_are_hurwitz_numbers() {
    for d in 1..=8 {
        for k in 0..=3 {
            let (gw, h) = gw_hurwitz_pair(d, k).unwrap();
            assert_eq!(gw, BigRational::from_integer(h), "d={d} k={k}");
        }
    }
}

#[test]
fn series_coefficients_and_json() {
    let s = build_gw_series(2, 4, 3).unwrap();
    assert_eq!((s.n(), s.d_max(), s.z_cap()), (2, 4, 3));
    for d in 1..=4 {
        let two = s.coefficient(d, &[2, 2]).unwrap();
        assert_eq!(two, &BigRational::from_integer(hurwitz_number(d, 2).unwrap()));
        assert_eq!(s.coefficient(d, &[1, 3]).unwrap(), &gw_invariant_torus(d, &[0, 2]).unwrap());
    }
    assert!(s.coefficient(5, &[1, 1]).is_none());
    assert!(s.coefficient(1, &[4, 1]).is_none());
    let json = s.to_json();
    assert_eq!(json["3"]["(2,2)"], serde_json::Value::String(hurwitz_number(3, 2).unwrap().to_string()));
    assert_eq!(json.as_object().unwrap().len(), 4);
    assert_eq!(json["1"].as_object().unwrap().len(), 9);
}

#[test]
fn invalid_and_oversized_series() {
    assert!(matches!(build_gw_series(0, 3, 3), Err(Error::Validation(_))));
    assert!(matches!(build_gw_series(2, 0, 3), Err(Error::Validation(_))));
    assert!(matches!(build_gw_series(6, 40, 12), Err(Error::Resource { .. })));
}

#[test]
fn generating_function_from_invariants() {
    let q = (-1.5f64).exp();
    for k in [2u32, 4] {
        let from_gw = hurwitz_gf_from_gw(q, k, 30).unwrap();
        let direct = hurwitz_gf(q, k, 0, 1e-20).unwrap();
        let gap = (from_gw.value - direct.value).abs().to_f64();
        assert!(gap <= from_gw.tail_bound + direct.tail_bound, "k={k}: {gap:e}");
    }
    // The degree-0 term is absent from the invariant side.
    let g0 = hurwitz_gf_from_gw(q, 0, 30).unwrap();
    let h0 = hurwitz_gf(q, 0, 0, 1e-20).unwrap();
    assert!(((h0.value - g0.value).to_f64() - 1.0).abs() <= g0.tail_bound + 1e-15);
    assert!(hurwitz_gf_from_gw(q, 3, 5).unwrap().value.is_zero());
}

#[test]
fn npoint_function_examples() {
    let q = 0.05;
    let t = 2.0f64;
    let one = npoint_function(q, &[t], 1).unwrap().value_f64();
    let single_box = q * (t.sqrt() + t.powf(-1.5) / (1.0 - 1.0 / t));
    assert!((one - single_box).abs() < 1e-15);
    let values: Vec<f64> = (1..=12).map(|d| npoint_function(q, &[t, 1.5], d).unwrap().value_f64()).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    let full = npoint_function(q, &[t, 1.5], 12).unwrap();
    let coarse = npoint_function(q, &[t, 1.5], 6).unwrap();
    assert!((full.value - coarse.value).abs().to_f64() <= coarse.tail_bound);
    assert!(matches!(npoint_function(q, &[1.0], 4), Err(Error::Convergence(_))));
    assert!(matches!(npoint_function(0.4, &[2.0, 2.0], 4), Err(Error::Convergence(_))));
    assert!(npoint_function(q, &[], 4).is_err());
}

#[test]
fn comparison_reports_a_finite_residual() {
    let c = npoint_series_comparison(0.05, &[0.3, 0.2], 5, 6).unwrap();
    assert!(c.residual.is_finite());
    assert_eq!(c.residual, c.npoint.value_f64() - c.series);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariants_are_symmetric_in_insertions(d in 1u32..7, a in 0u32..4, b in 0u32..4, c in 0u32..4) {
        let x = gw_invariant_torus(d, &[a, b, c]).unwrap();
        prop_assert_eq!(&x, &gw_invariant_torus(d, &[c, a, b]).unwrap());
        prop_assert_eq!(&x, &gw_invariant_torus(d, &[b, c, a]).unwrap());
    }

    #[test]
    fn tau_zero_insertion_multiplies_by_degree(d in 1u32..9, k in 0u32..4) {
        // p_1(lambda) = |lambda| - 1/24.
        let base = gw_invariant_torus(d, &[k]).unwrap();
        let with = gw_invariant_torus(d, &[k, 0]).unwrap();
        prop_assert_eq!(with, base * (BigRational::from_integer(d.into()) - rat(1, 24)));
    }
}
