use heattrace::group_duals::{
    casimir_label, casimir_lower_bound, casimir_weight, check_weight, embed_label, extract_label, f_functionals,
    labels_up_to, random_label, spectral_gap, DualLabel, FamilyType, GroupFamily, HighestWeight,
};
use heattrace::partitions::Partition;
use heattrace::qseries::partition_count;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Casimir of a highest weight from the per-type closed formulas, in f64.
fn casimir_direct(family: FamilyType, n: u32, w: &[i64]) -> f64 {
    let nf = n as f64;
    let mut w = w.to_vec();
    if family == FamilyType::A {
        w.push(0);
    }
    let shift = match family {
        FamilyType::APrime | FamilyType::A => nf + 1.0,
        FamilyType::B | FamilyType::D => nf,
        FamilyType::C => nf + 2.0,
    };
    let mut c: f64 = w
        .iter()
        .enumerate()
        .map(|(i, &x)| x as f64 * (x as f64 + shift - 2.0 * (i as f64 + 1.0)))
        .sum::<f64>()
        / nf;
    if family == FamilyType::A {
        let s: i64 = w.iter().sum();
        c -= (s * s) as f64 / (nf * nf);
    }
    c
}

fn sizes() -> impl Strategy<Value = GroupFamily> {
    (0usize..5, 2u32..40).prop_map(|(f, n)| {
        let family = FamilyType::ALL[f];
        GroupFamily::new(family, family.nearest_size(n.max(6))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embedding_round_trips(g in sizes(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let label = random_label(&g, &mut rng, 12);
        let w = embed_label(&g, &label).unwrap();
        prop_assert!(check_weight(&g, &w).is_ok());
        prop_assert_eq!(extract_label(&g, &w).unwrap(), label);
    }

    #[test]
    fn casimir_of_label_matches_weight_formula(g in sizes(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let label = random_label(&g, &mut rng, 12);
        let w = embed_label(&g, &label).unwrap();
        let c = casimir_label(&g, &label).unwrap();
        prop_assert_eq!(&c, &casimir_weight(&g, &w).unwrap());
        let direct = casimir_direct(g.family(), g.matrix_size(), &w.0);
        prop_assert!((c.to_f64().unwrap() - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        let bound = casimir_lower_bound(&g, &label).unwrap();
        prop_assert!(c >= bound.casimir);
        prop_assert!(c >= BigRational::zero());
        if label.is_empty() {
            prop_assert!(c.is_zero());
        }
    }
}

#[test]
fn family_names_and_sizes() {
    for family in FamilyType::ALL {
        assert_eq!(family.name().parse::<FamilyType>().unwrap(), family);
        assert!(family.accepts_size(family.nearest_size(17)));
    }
    assert!("E".parse::<FamilyType>().is_err());
    assert!(GroupFamily::new(FamilyType::B, 32).is_err());
    assert!(GroupFamily::new(FamilyType::D, 2).is_err());
    assert_eq!(FamilyType::B.nearest_size(32), 33);
    let ranks: Vec<u32> = [(FamilyType::APrime, 8), (FamilyType::A, 8), (FamilyType::B, 9), (FamilyType::C, 8), (FamilyType::D, 8)]
        .iter()
        .map(|&(f, n)| GroupFamily::new(f, n).unwrap().rank())
        .collect();
    assert_eq!(ranks, vec![8, 7, 4, 4, 4]);
}

#[test]
fn label_shape_is_validated() {
    let g = GroupFamily::new(FamilyType::D, 8).unwrap();
    let long = DualLabel::EvenOrthogonal { mu: Partition::new(vec![1, 1, 1]).unwrap(), m: 0, n: 0 };
    assert!(embed_label(&g, &long).is_err());
    let wrong = DualLabel::Orthosymplectic { mu: Partition::empty() };
    assert!(embed_label(&g, &wrong).is_err());
    assert!(extract_label(&g, &HighestWeight(vec![1, 2, 0, 0])).is_err());
    let trivial = DualLabel::empty(FamilyType::D);
    assert!(casimir_label(&g, &trivial).unwrap().is_zero());
    assert!(f_functionals(&g, &trivial).unwrap().primary().is_zero());
}

#[test]
fn label_counts_match_partition_counts() {
    let g = GroupFamily::new(FamilyType::C, 40).unwrap();
    let expected: usize = (0..=8).map(|s| partition_count(s).to_usize().unwrap()).sum();
    assert_eq!(labels_up_to(&g, 8).len(), expected);
    let labels = labels_up_to(&GroupFamily::new(FamilyType::A, 10).unwrap(), 5);
    assert!(labels.windows(2).all(|w| w[0].total_size() <= w[1].total_size()));
}

fn weights(len: usize, lo: i64, hi: i64, out: &mut Vec<Vec<i64>>, cur: &mut Vec<i64>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    let top = cur.last().copied().unwrap_or(hi);
    for x in (lo..=top).rev() {
        cur.push(x);
        weights(len, lo, hi, out, cur);
        cur.pop();
    }
}

/// Smallest nonzero Casimir over dominant weights in a box.
fn gap_by_weights(family: FamilyType, n: u32) -> f64 {
    let g = GroupFamily::new(family, n).unwrap();
    let r = g.rank() as usize;
    let mut all = Vec::new();
    match family {
        FamilyType::APrime => weights(r, -4, 4, &mut all, &mut Vec::new()),
        FamilyType::A => weights(r, 0, 4, &mut all, &mut Vec::new()),
        FamilyType::B | FamilyType::C => weights(r, 0, 4, &mut all, &mut Vec::new()),
        FamilyType::D => {
            let mut head = Vec::new();
            weights(r - 1, 0, 4, &mut head, &mut Vec::new());
            for h in head {
                let last = *h.last().unwrap();
                for x in -last..=last {
                    let mut v = h.clone();
                    v.push(x);
                    all.push(v);
                }
            }
        }
    }
    all.iter()
        .map(|w| casimir_direct(family, n, w))
        .filter(|&c| c > 1e-12)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn spectral_gap_matches_weight_scan() {
    for (family, n) in [
        (FamilyType::APrime, 6),
        (FamilyType::A, 6),
        (FamilyType::B, 9),
        (FamilyType::C, 8),
        (FamilyType::D, 8),
    ] {
        let g = GroupFamily::new(family, n).unwrap();
        let report = spectral_gap(&g, 4).unwrap();
        let direct = gap_by_weights(family, n);
        assert!((report.gap.to_f64().unwrap() - direct).abs() < 1e-12, "{family}: {} vs {direct}", report.gap);
        assert_eq!(casimir_label(&g, &report.argmin).unwrap(), report.gap);
    }
    for n in 6..=12 {
        let report = spectral_gap(&GroupFamily::new(FamilyType::APrime, n).unwrap(), 4).unwrap();
        assert_eq!(report.gap, BigRational::from_integer(1.into()));
        assert!(report.is_certified());
    }
    assert!(spectral_gap(&GroupFamily::new(FamilyType::C, 8).unwrap(), 0).is_err());
}
