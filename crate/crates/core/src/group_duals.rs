//! The five classical families, their partition-labelled irreducible
//! representations and Casimir numbers in both coordinate systems.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::partitions::{Partition, Partitions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyType {
    /// Unitary group U(N).
    APrime,
    /// Special unitary group SU(N).
    A,
    /// Odd orthogonal group SO(2r+1).
    B,
    /// Compact symplectic group Sp(r) inside GL_{2r}.
    C,
    /// Even orthogonal group SO(2r).
    D,
}

impl FamilyType {
    pub const ALL: [FamilyType; 5] = [
        FamilyType::APrime,
        FamilyType::A,
        FamilyType::B,
        FamilyType::C,
        FamilyType::D,
    ];

    pub fn dyson_beta(self) -> u32 {
        match self {
            FamilyType::B | FamilyType::D => 1,
            FamilyType::A | FamilyType::APrime => 2,
            FamilyType::C => 4,
        }
    }

    pub fn is_unitary(self) -> bool {
        matches!(self, FamilyType::A | FamilyType::APrime)
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyType::APrime => "A'",
            FamilyType::A => "A",
            FamilyType::B => "B",
            FamilyType::C => "C",
            FamilyType::D => "D",
        }
    }

    /// Whether `n` is a valid matrix size for this family.
    pub fn accepts_size(self, n: u32) -> bool {
        match self {
            FamilyType::APrime | FamilyType::A => n >= 2,
            FamilyType::B => n >= 3 && n % 2 == 1,
            FamilyType::C => n >= 2 && n % 2 == 0,
            FamilyType::D => n >= 4 && n % 2 == 0,
        }
    }

    /// The valid matrix size closest to `n` from above.
    pub fn nearest_size(self, n: u32) -> u32 {
        (n..).find(|&m| self.accepts_size(m)).expect("unbounded search")
    }
}

impl fmt::Display for FamilyType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A'" | "A′" | "APRIME" | "U" => Ok(FamilyType::APrime),
            "A" | "SU" => Ok(FamilyType::A),
            "B" => Ok(FamilyType::B),
            "C" | "SP" => Ok(FamilyType::C),
            "D" => Ok(FamilyType::D),
            _ => Err(Error::Validation(format!("unknown family type '{s}' (expected A', A, B, C or D)"))),
        }
    }
}

/// A family together with the size `N` of its defining `GL_N` embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupFamily {
    family: FamilyType,
    matrix_size: u32,
}

impl GroupFamily {
    pub fn new(family: FamilyType, matrix_size: u32) -> Result<Self> {
        if !family.accepts_size(matrix_size) {
            let rule = match family {
                FamilyType::APrime | FamilyType::A => "N >= 2",
                FamilyType::B => "odd N >= 3",
                FamilyType::C => "even N >= 2",
                FamilyType::D => "even N >= 4",
            };
            return Err(Error::Validation(format!(
                "matrix size {matrix_size} is invalid for type {family}: need {rule}"
            )));
        }
        Ok(Self { family, matrix_size })
    }

    pub fn family(&self) -> FamilyType {
        self.family
    }

    pub fn matrix_size(&self) -> u32 {
        self.matrix_size
    }

    pub fn dyson_beta(&self) -> u32 {
        self.family.dyson_beta()
    }

    pub fn rank(&self) -> u32 {
        let n = self.matrix_size;
        match self.family {
            FamilyType::APrime => n,
            FamilyType::A => n - 1,
            FamilyType::B => (n - 1) / 2,
            FamilyType::C | FamilyType::D => n / 2,
        }
    }

    /// Length cutoff for `alpha` in the unitary labels.
    pub fn alpha_cap(&self) -> usize {
        ((self.matrix_size as usize + 1) / 2).saturating_sub(1)
    }

    /// Length cutoff for `beta` in the unitary labels.
    pub fn beta_cap(&self) -> usize {
        self.matrix_size as usize - (self.matrix_size as usize + 1) / 2
    }

    /// Length cutoff for `mu` (types B, C, D).
    pub fn mu_cap(&self) -> usize {
        match self.family {
            FamilyType::B | FamilyType::C => self.rank() as usize,
            FamilyType::D => self.rank() as usize - 2,
            _ => 0,
        }
    }
}

impl fmt::Display for GroupFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(N={})", self.family, self.matrix_size)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DualLabel {
    Unitary { alpha: Partition, beta: Partition, n: i64 },
    SpecialUnitary { alpha: Partition, beta: Partition },
    /// Types B and C.
    Orthosymplectic { mu: Partition },
    EvenOrthogonal { mu: Partition, m: i64, n: i64 },
}

impl DualLabel {
    /// The trivial representation's label for a family.
    pub fn empty(family: FamilyType) -> DualLabel {
        let e = Partition::empty();
        match family {
            FamilyType::APrime => DualLabel::Unitary { alpha: e.clone(), beta: e, n: 0 },
            FamilyType::A => DualLabel::SpecialUnitary { alpha: e.clone(), beta: e },
            FamilyType::B | FamilyType::C => DualLabel::Orthosymplectic { mu: e },
            FamilyType::D => DualLabel::EvenOrthogonal { mu: e, m: 0, n: 0 },
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            DualLabel::Unitary { alpha, beta, n } => alpha.is_empty() && beta.is_empty() && *n == 0,
            DualLabel::SpecialUnitary { alpha, beta } => alpha.is_empty() && beta.is_empty(),
            DualLabel::Orthosymplectic { mu } => mu.is_empty(),
            DualLabel::EvenOrthogonal { mu, m, n } => mu.is_empty() && *m == 0 && *n == 0,
        }
    }

    /// Total partition size plus `|n| + m`.
    pub fn total_size(&self) -> u64 {
        match self {
            DualLabel::Unitary { alpha, beta, n } => alpha.size() + beta.size() + n.unsigned_abs(),
            DualLabel::SpecialUnitary { alpha, beta } => alpha.size() + beta.size(),
            DualLabel::Orthosymplectic { mu } => mu.size(),
            DualLabel::EvenOrthogonal { mu, m, n } => mu.size() + m.unsigned_abs() + n.unsigned_abs(),
        }
    }
}

impl fmt::Display for DualLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualLabel::Unitary { alpha, beta, n } => write!(f, "(alpha={alpha}, beta={beta}, n={n})"),
            DualLabel::SpecialUnitary { alpha, beta } => write!(f, "(alpha={alpha}, beta={beta})"),
            DualLabel::Orthosymplectic { mu } => write!(f, "(mu={mu})"),
            DualLabel::EvenOrthogonal { mu, m, n } => write!(f, "(mu={mu}, m={m}, n={n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HighestWeight(pub Vec<i64>);

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn variant_error(g: &GroupFamily, label: &DualLabel) -> Error {
    Error::Validation(format!("label {label} has the wrong shape for type {}", g.family()))
}

fn check_len(name: &str, p: &Partition, cap: usize) -> Result<()> {
    if p.len() > cap {
        return Err(Error::Validation(format!(
            "length cutoff violated: l({name}) = {} exceeds {cap}",
            p.len()
        )));
    }
    Ok(())
}

/// Checks that `label` belongs to the dual set of `g`.
pub fn check_label(g: &GroupFamily, label: &DualLabel) -> Result<()> {
    match (g.family(), label) {
        (FamilyType::APrime, DualLabel::Unitary { alpha, beta, .. })
        | (FamilyType::A, DualLabel::SpecialUnitary { alpha, beta }) => {
            check_len("alpha", alpha, g.alpha_cap())?;
            check_len("beta", beta, g.beta_cap())
        }
        (FamilyType::B | FamilyType::C, DualLabel::Orthosymplectic { mu }) => check_len("mu", mu, g.mu_cap()),
        (FamilyType::D, DualLabel::EvenOrthogonal { mu, m, n }) => {
            check_len("mu", mu, g.mu_cap())?;
            if *m < 0 || n.abs() > *m {
                return Err(Error::Validation(format!("type D needs |n| <= m with m >= 0, got m={m}, n={n}")));
            }
            Ok(())
        }
        _ => Err(variant_error(g, label)),
    }
}

fn unitary_weight(g: &GroupFamily, alpha: &Partition, beta: &Partition, n: i64) -> Vec<i64> {
    let size = g.matrix_size() as usize;
    let mut w = vec![n; size];
    for i in 1..=g.alpha_cap() {
        w[i - 1] = n + alpha.part(i) as i64;
    }
    for j in 1..=g.beta_cap() {
        w[size - j] = n - beta.part(j) as i64;
    }
    w
}

pub fn embed_label(g: &GroupFamily, label: &DualLabel) -> Result<HighestWeight> {
    check_label(g, label)?;
    let r = g.rank() as usize;
    let w = match label {
        DualLabel::Unitary { alpha, beta, n } => unitary_weight(g, alpha, beta, *n),
        DualLabel::SpecialUnitary { alpha, beta } => {
            let mut w = unitary_weight(g, alpha, beta, beta.part(1) as i64);
            w.pop();
            w
        }
        DualLabel::Orthosymplectic { mu } => (1..=r).map(|i| mu.part(i) as i64).collect(),
        DualLabel::EvenOrthogonal { mu, m, n } => {
            let mut w: Vec<i64> = (1..=r - 2).map(|i| mu.part(i) as i64 + m).collect();
            w.push(*m);
            w.push(*n);
            w
        }
    };
    Ok(HighestWeight(w))
}

/// Validates the ordering constraints of a highest weight for `g`.
pub fn check_weight(g: &GroupFamily, w: &HighestWeight) -> Result<()> {
    let w = &w.0;
    let r = g.rank() as usize;
    if w.len() != r {
        return Err(Error::Validation(format!(
            "weight has {} components, type {} at N={} needs {r}",
            w.len(),
            g.family(),
            g.matrix_size()
        )));
    }
    let bad = |msg: &str| Err(Error::Validation(format!("malformed weight {w:?}: {msg}")));
    match g.family() {
        FamilyType::APrime => {
            if w.windows(2).any(|p| p[0] < p[1]) {
                return bad("components must be nonincreasing");
            }
        }
        FamilyType::A | FamilyType::B | FamilyType::C => {
            if w.windows(2).any(|p| p[0] < p[1]) || w.last().is_some_and(|&x| x < 0) {
                return bad("components must be nonincreasing and nonnegative");
            }
        }
        FamilyType::D => {
            if w[..r - 1].windows(2).any(|p| p[0] < p[1]) || w[r - 2] < w[r - 1].abs() {
                return bad("need w_1 >= ... >= w_{r-1} >= |w_r|");
            }
        }
    }
    Ok(())
}

fn partition_from_diffs(values: impl Iterator<Item = i64>) -> Partition {
    Partition::from_unsorted(values.map(|v| v as u32).collect())
}

pub fn extract_label(g: &GroupFamily, w: &HighestWeight) -> Result<DualLabel> {
    check_weight(g, w)?;
    let r = g.rank() as usize;
    let label = match g.family() {
        FamilyType::APrime | FamilyType::A => {
            let mut full = w.0.clone();
            if g.family() == FamilyType::A {
                full.push(0);
            }
            let size = full.len();
            let n = full[g.alpha_cap()];
            let alpha = partition_from_diffs((0..g.alpha_cap()).map(|i| full[i] - n));
            let beta = partition_from_diffs((1..=g.beta_cap()).map(|j| n - full[size - j]));
            if g.family() == FamilyType::APrime {
                DualLabel::Unitary { alpha, beta, n }
            } else {
                DualLabel::SpecialUnitary { alpha, beta }
            }
        }
        FamilyType::B | FamilyType::C => DualLabel::Orthosymplectic {
            mu: partition_from_diffs(w.0.iter().copied()),
        },
        FamilyType::D => {
            let n = w.0[r - 1];
            let m = w.0[r - 2];
            let mu = partition_from_diffs((0..r - 2).map(|i| w.0[i] - m));
            DualLabel::EvenOrthogonal { mu, m, n }
        }
    };
    Ok(label)
}

/// Casimir number from the closed per-type formula in weight coordinates.
pub fn casimir_weight(g: &GroupFamily, w: &HighestWeight) -> Result<BigRational> {
    check_weight(g, w)?;
    let n = g.matrix_size() as i64;
    // sum_i w_i (w_i + shift - 2i)
    let quad = |shift: i64| -> i64 {
        w.0.iter()
            .enumerate()
            .map(|(i, &x)| x * (x + shift - 2 * (i as i64 + 1)))
            .sum()
    };
    let c = match g.family() {
        FamilyType::APrime => rat(quad(n + 1), n),
        FamilyType::A => {
            let s: i64 = w.0.iter().sum();
            rat(quad(n + 1), n) - rat(s * s, n * n)
        }
        FamilyType::B | FamilyType::D => rat(quad(n), n),
        FamilyType::C => rat(quad(n + 2), n),
    };
    Ok(c)
}

/// Named components of the partition-side decomposition of the Casimir.
#[derive(Clone, Debug, PartialEq)]
pub struct FFunctionals(pub Vec<(&'static str, BigRational)>);

impl FFunctionals {
    pub fn get(&self, name: &str) -> Option<&BigRational> {
        self.0.iter().find(|(k, _)| *k == name).map(|(_, v)| v)
    }

    /// The first (content-carrying) functional.
    pub fn primary(&self) -> &BigRational {
        &self.0[0].1
    }
}

pub fn f_functionals(g: &GroupFamily, label: &DualLabel) -> Result<FFunctionals> {
    let r = g.rank() as i64;
    let f = match (g.family(), label) {
        (FamilyType::APrime, DualLabel::Unitary { alpha, beta, n }) => {
            let diff = alpha.size() as i64 - beta.size() as i64;
            vec![("F_A'", int(alpha.total_content() + beta.total_content() + n * diff))]
        }
        (FamilyType::A, DualLabel::SpecialUnitary { alpha, beta }) => {
            let diff = alpha.size() as i64 - beta.size() as i64;
            vec![
                ("F1_A", int(alpha.total_content() + beta.total_content())),
                ("F2_A", int(diff * diff)),
            ]
        }
        (FamilyType::B, DualLabel::Orthosymplectic { mu }) => {
            vec![("F_B", int(mu.total_content()) - rat(mu.size() as i64, 2))]
        }
        (FamilyType::C, DualLabel::Orthosymplectic { mu }) => {
            vec![("F_C", int(mu.total_content()) + rat(mu.size() as i64, 2))]
        }
        (FamilyType::D, DualLabel::EvenOrthogonal { mu, m, n }) => {
            let s = mu.size() as i64;
            let f2 = rat((r - 1) * m, 2) + rat((r - 1) * m * m, 2 * r) + rat(s * m, r) + rat(n * n, 2 * r);
            vec![("F1_D", int(mu.total_content()) - rat(s, 2)), ("F2_D", f2)]
        }
        _ => return Err(variant_error(g, label)),
    };
    Ok(FFunctionals(f))
}

/// Casimir number assembled from partition data.
pub fn casimir_label(g: &GroupFamily, label: &DualLabel) -> Result<BigRational> {
    check_label(g, label)?;
    let f = f_functionals(g, label)?;
    let n = g.matrix_size() as i64;
    let two_over_n = rat(2, n);
    let c = match label {
        DualLabel::Unitary { alpha, beta, n: k } => {
            int(alpha.size() as i64 + beta.size() as i64 + k * k) + &two_over_n * f.primary()
        }
        DualLabel::SpecialUnitary { alpha, beta } => {
            int(alpha.size() as i64 + beta.size() as i64) + &two_over_n * f.primary()
                - f.get("F2_A").expect("F2_A present") / int(n * n)
        }
        DualLabel::Orthosymplectic { mu } => int(mu.size() as i64) + &two_over_n * f.primary(),
        DualLabel::EvenOrthogonal { mu, .. } => {
            int(mu.size() as i64) + &two_over_n * f.primary() + f.get("F2_D").expect("F2_D present")
        }
    };
    Ok(c)
}

/// Lower bounds for one label: `f_part` bounds the N-dependent part of the
/// Casimir, `casimir` the Casimir itself.
#[derive(Clone, Debug, PartialEq)]
pub struct CasimirLowerBound {
    pub f_part: BigRational,
    pub casimir: BigRational,
}

pub fn casimir_lower_bound(g: &GroupFamily, label: &DualLabel) -> Result<CasimirLowerBound> {
    check_label(g, label)?;
    let n = g.matrix_size() as i64;
    let r = g.rank() as i64;
    let bound = match label {
        DualLabel::Unitary { alpha, beta, n: k } => {
            let s = alpha.size() as i64 + beta.size() as i64;
            let shift = int(*k) + rat(alpha.size() as i64 - beta.size() as i64, n);
            let casimir = rat(s, 2) + &shift * &shift;
            let f_part = &casimir - int(s + k * k);
            CasimirLowerBound { f_part, casimir }
        }
        DualLabel::SpecialUnitary { alpha, beta } => {
            let s = alpha.size() as i64 + beta.size() as i64;
            CasimirLowerBound {
                f_part: rat(-s, 2),
                casimir: rat(s, 2),
            }
        }
        DualLabel::Orthosymplectic { mu } => {
            let s = mu.size() as i64;
            let f_part = match g.family() {
                FamilyType::B => rat(-(r + 1) * s, 2 * r + 1),
                _ => rat(-s, 2),
            };
            let casimir = int(s) + &f_part;
            CasimirLowerBound { f_part, casimir }
        }
        DualLabel::EvenOrthogonal { mu, .. } => {
            let s = mu.size() as i64;
            let f2 = f_functionals(g, label)?.get("F2_D").cloned().expect("F2_D present");
            CasimirLowerBound {
                f_part: rat(-s, 2),
                casimir: rat(s, 2) + f2,
            }
        }
    };
    Ok(bound)
}

/// All admissible labels of `g` with total size at most `budget`, ordered
/// by total size and then by enumeration order of the parts.
pub fn labels_up_to(g: &GroupFamily, budget: u32) -> Vec<DualLabel> {
    let parts_upto = |cap: usize, max: u32| -> Vec<Partition> {
        (0..=max)
            .flat_map(|s| Partitions::new(s).filter(move |p| p.len() <= cap))
            .collect()
    };
    let mut out = Vec::new();
    match g.family() {
        FamilyType::APrime | FamilyType::A => {
            let alphas = parts_upto(g.alpha_cap(), budget);
            let betas = parts_upto(g.beta_cap(), budget);
            for a in &alphas {
                for b in &betas {
                    let used = (a.size() + b.size()) as i64;
                    if used > budget as i64 {
                        continue;
                    }
                    if g.family() == FamilyType::A {
                        out.push(DualLabel::SpecialUnitary { alpha: a.clone(), beta: b.clone() });
                        continue;
                    }
                    let room = budget as i64 - used;
                    for n in -room..=room {
                        out.push(DualLabel::Unitary { alpha: a.clone(), beta: b.clone(), n });
                    }
                }
            }
        }
        FamilyType::B | FamilyType::C => {
            for mu in parts_upto(g.mu_cap(), budget) {
                out.push(DualLabel::Orthosymplectic { mu });
            }
        }
        FamilyType::D => {
            for mu in parts_upto(g.mu_cap(), budget) {
                let room = budget as i64 - mu.size() as i64;
                for m in 0..=room {
                    for n in -m..=m {
                        if mu.size() as i64 + m + n.abs() <= budget as i64 {
                            out.push(DualLabel::EvenOrthogonal { mu: mu.clone(), m, n });
                        }
                    }
                }
            }
        }
    }
    out.sort_by_key(|l| l.total_size());
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub gap: BigRational,
    pub argmin: DualLabel,
    pub size_budget: u32,
    /// Every label beyond the budget has Casimir at least this value.
    pub beyond_budget_bound: BigRational,
}

impl GapReport {
    /// The scan is a certified gap when nothing beyond the budget can beat it.
    pub fn is_certified(&self) -> bool {
        self.beyond_budget_bound >= self.gap
    }
}

pub fn spectral_gap(g: &GroupFamily, size_budget: u32) -> Result<GapReport> {
    if size_budget == 0 {
        return Err(Error::Validation("size budget must be at least 1".into()));
    }
    let mut best: Option<(BigRational, DualLabel)> = None;
    for label in labels_up_to(g, size_budget) {
        if label.is_empty() {
            continue;
        }
        let c = casimir_label(g, &label)?;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, label));
        }
    }
    let (gap, argmin) =
        best.ok_or_else(|| Error::Validation(format!("no nonzero label of {g} fits budget {size_budget}")))?;
    let b1 = size_budget as i64 + 1;
    let n = g.matrix_size() as i64;
    let r = g.rank() as i64;
    let beyond_budget_bound = match g.family() {
        FamilyType::APrime => {
            let gauss = rat(b1 * (n - 1), 2 * n);
            let gauss = &gauss * &gauss;
            std::cmp::min(rat(b1, 4), gauss)
        }
        FamilyType::A | FamilyType::C => rat(b1, 2),
        FamilyType::B => rat(r * b1, 2 * r + 1),
        FamilyType::D => rat(b1, 4),
    };
    Ok(GapReport {
        gap,
        argmin,
        size_budget,
        beyond_budget_bound,
    })
}

/// Random partition of size at most `max_size` with at most `max_len` parts.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, max_size: u32, max_len: usize) -> Partition {
    let size = rng.gen_range(0..=max_size);
    if size == 0 || max_len == 0 {
        return Partition::empty();
    }
    let len = rng.gen_range(1..=max_len.min(size as usize));
    // Stars and bars: len-1 distinct cut points in 1..size.
    let mut cuts: Vec<u32> = rand::seq::index::sample(rng, size as usize - 1, len - 1)
        .into_iter()
        .map(|c| c as u32 + 1)
        .collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(len);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(size)) {
        parts.push(c - prev);
        prev = c;
    }
    Partition::from_unsorted(parts)
}

/// Random admissible label of `g` whose partitions have size at most `max_size`.
pub fn random_label<R: Rng + ?Sized>(g: &GroupFamily, rng: &mut R, max_size: u32) -> DualLabel {
    match g.family() {
        FamilyType::APrime => DualLabel::Unitary {
            alpha: random_partition(rng, max_size, g.alpha_cap()),
            beta: random_partition(rng, max_size, g.beta_cap()),
            n: rng.gen_range(-(max_size as i64)..=max_size as i64),
        },
        FamilyType::A => DualLabel::SpecialUnitary {
            alpha: random_partition(rng, max_size, g.alpha_cap()),
            beta: random_partition(rng, max_size, g.beta_cap()),
        },
        FamilyType::B | FamilyType::C => DualLabel::Orthosymplectic {
            mu: random_partition(rng, max_size, g.mu_cap()),
        },
        FamilyType::D => {
            let m = rng.gen_range(0..=max_size as i64);
            DualLabel::EvenOrthogonal {
                mu: random_partition(rng, max_size, g.mu_cap()),
                m,
                n: rng.gen_range(-m..=m),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn spec_examples() {
        let b7 = GroupFamily::new(FamilyType::B, 7).unwrap();
        let w = embed_label(&b7, &DualLabel::Orthosymplectic { mu: p(&[2, 1]) }).unwrap();
        assert_eq!(w.0, vec![2, 1, 0]);
        assert_eq!(casimir_weight(&b7, &HighestWeight(vec![1, 0, 0])).unwrap(), rat(6, 7));

        let d8 = GroupFamily::new(FamilyType::D, 8).unwrap();
        let label = DualLabel::EvenOrthogonal { mu: p(&[1]), m: 2, n: -1 };
        let w = embed_label(&d8, &label).unwrap();
        assert_eq!(w.0, vec![3, 2, 2, -1]);
        assert_eq!(extract_label(&d8, &w).unwrap(), label);
    }

    #[test]
    fn parity_rules() {
        assert!(GroupFamily::new(FamilyType::B, 8).is_err());
        assert!(GroupFamily::new(FamilyType::C, 7).is_err());
        assert!(GroupFamily::new(FamilyType::D, 2).is_err());
        assert!(GroupFamily::new(FamilyType::A, 1).is_err());
    }
}
