//! Double-double floating point: an unevaluated sum `hi + lo` of two `f64`
//! giving roughly 31 significant decimal digits.
//!
//! Used for every certified real evaluation so that differences between
//! nearly equal quantities (trace minus expansion, say) stay meaningful far
//! below the `f64` floor.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Unit roundoff of double-double arithmetic, 2^-104.
pub const DD_EPS: f64 = 4.930380657631324e-32;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Smallest `f64` that is certainly not below the represented value.
    pub fn upper_f64(self) -> f64 {
        if self.lo > 0.0 {
            self.hi.next_up()
        } else {
            self.hi
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn from_i64(n: i64) -> Self {
        let hi = n as f64;
        // Exact for |n| < 2^106: the remainder fits in an f64.
        let lo = (n as i128 - hi as i128) as f64;
        Self { hi, lo }
    }

    pub fn from_bigint(n: &BigInt) -> Self {
        let hi = n.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return Self { hi, lo: 0.0 };
        }
        let rest = n - float_to_bigint(hi);
        let lo = rest.to_f64().unwrap_or(0.0);
        let (hi, lo) = quick_two_sum(hi, lo);
        Self { hi, lo }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        if r.is_zero() {
            return Self::ZERO;
        }
        let num = Self::from_bigint(r.numer());
        let den = Self::from_bigint(r.denom());
        if num.is_finite() && den.is_finite() {
            return num / den;
        }
        // Huge numerator or denominator: keep the leading bits of each.
        let keep = 120u64;
        let top = |x: &BigInt| -> (Self, i64) {
            let bits = x.bits();
            if bits <= keep {
                (Self::from_bigint(x), 0)
            } else {
                let shift = bits - keep;
                (Self::from_bigint(&(x >> shift as usize)), shift as i64)
            }
        };
        let (n, ns) = top(r.numer());
        let (d, ds) = top(r.denom());
        (n / d).ldexp((ns - ds) as i32)
    }

    /// Multiply by 2^k exactly.
    pub fn ldexp(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        if f.is_finite() && f != 0.0 {
            Self {
                hi: self.hi * f,
                lo: self.lo * f,
            }
        } else {
            let half = k / 2;
            self.ldexp(half).ldexp(k - half)
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn powi(self, mut n: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base = base.sqr();
            n >>= 1;
        }
        acc
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = self.hi.sqrt();
        // One Newton step: x + (a - x^2) / (2x).
        let x_dd = Self::new(x);
        x_dd + (self - x_dd.sqr()) / (2.0 * x)
    }

    /// `exp(x) - 1` for small |x| by Taylor series.
    fn expm1_small(r: Self) -> Self {
        let mut term = r;
        let mut sum = r;
        let mut k = 2.0;
        loop {
            term = term * r / k;
            sum += term;
            if term.hi.abs() <= 1e-36 * sum.hi.abs().max(1e-300) {
                break;
            }
            k += 1.0;
        }
        sum
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Self::new(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Self::ZERO;
        }
        if self.hi == 0.0 {
            return Self::ONE;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * k).ldexp(-10);
        let mut p = Self::expm1_small(r);
        // (1 + p)^2 - 1 = p (2 + p), repeated.
        for _ in 0..10 {
            p = p * (p + 2.0);
        }
        (p + 1.0).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Self::new(f64::NAN);
        }
        let y = Self::new(self.hi.ln());
        // Newton on exp: y + x exp(-y) - 1.
        y + self * (-y).exp() - 1.0
    }

    pub fn cosh(self) -> Self {
        let e = self.abs().exp();
        (e + e.recip()) * 0.5
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other { self } else { other }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other { self } else { other }
    }

    /// Exact value `hi + lo` as a rational; `None` for non-finite values.
    pub fn to_rational(self) -> Option<BigRational> {
        Some(BigRational::from_float(self.hi)? + BigRational::from_float(self.lo)?)
    }

    /// Scientific notation with `digits` significant digits, rounded from the
    /// exact value, e.g. `1.0190055743114700e0`.
    pub fn to_sci_string(self, digits: usize) -> String {
        let digits = digits.max(1);
        let Some(r) = self.to_rational() else {
            return format!("{}", self.hi);
        };
        if r.is_zero() {
            return format!("{:.*}e0", digits - 1, 0.0);
        }
        let sign = if r.is_negative() { "-" } else { "" };
        let r = r.abs();
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut exp = self.hi.abs().log10().floor() as i32;
        let scaled = |e: i32| -> BigInt {
            let shift = digits as i32 - 1 - e;
            let factor = num_traits::pow(ten.clone(), shift.unsigned_abs() as usize);
            let v = if shift >= 0 { &r * factor } else { &r / factor };
            v.round().to_integer()
        };
        let mut m = scaled(exp);
        // Fix the exponent estimate so the mantissa has exactly `digits` digits.
        let lower = num_traits::pow(BigInt::from(10), digits - 1);
        let upper = &lower * 10;
        while m >= upper {
            exp += 1;
            m = scaled(exp);
        }
        while m < lower {
            exp -= 1;
            m = scaled(exp);
        }
        let text = m.to_string();
        let (head, tail) = text.split_at(1);
        if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        }
    }
}

fn float_to_bigint(x: f64) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = if exp == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    let e = exp - 1075;
    let m = BigInt::from(mant) * sign;
    if e >= 0 {
        m << e as usize
    } else {
        // Integral inputs only; truncation is exact for them.
        m >> (-e) as usize
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = f.precision() {
            write!(f, "{:.*e}", p, self.to_f64())
        } else {
            write!(f, "{:e}", self.to_f64())
        }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::new(x)
    }
}

impl From<i64> for DoubleDouble {
    fn from(n: i64) -> Self {
        Self::from_i64(n)
    }
}

impl From<&BigInt> for DoubleDouble {
    fn from(n: &BigInt) -> Self {
        Self::from_bigint(n)
    }
}

impl From<&BigRational> for DoubleDouble {
    fn from(r: &BigRational) -> Self {
        Self::from_rational(r)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    fn add(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = Self;
    fn sub(self, b: f64) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, b: f64) -> Self {
        self / Self::new(b)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl AddAssign<f64> for DoubleDouble {
    fn add_assign(&mut self, b: f64) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl MulAssign<f64> for DoubleDouble {
    fn mul_assign(&mut self, b: f64) {
        *self = *self * b;
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: DoubleDouble, hi: f64, lo: f64, rel: f64) -> bool {
        let d = (a - DoubleDouble::from_parts(hi, lo)).to_f64().abs();
        d <= rel * hi.abs()
    }

    #[test]
    fn exp_and_ln_reference_values() {
        let one = DoubleDouble::ONE;
        assert!(close(one.exp(), 2.718281828459045, 1.4456468917292502e-16, 1e-30));
        assert!(close(DoubleDouble::new(-4.0).exp(), 0.01831563888873418, 1.6250688994271399e-18, 1e-30));
        assert!(close(DoubleDouble::new(20.5).exp(), 799902177.4755054, 5.468433516540899e-08, 1e-30));
        assert!(close((one / 3.0).exp(), 1.3956124250860895, 1.444687188480344e-17, 1e-30));
        assert!(close(DoubleDouble::new(-37.25).exp(), 6.64554417291507e-17, -5.891784267265031e-34, 1e-30));
        assert!(close(DoubleDouble::new(3.0).ln(), 1.0986122886681098, -9.07129723500153e-17, 1e-30));
        assert!(close(DoubleDouble::new(2.0).ln(), 0.6931471805599453, 2.3190468138462996e-17, 1e-30));
    }

    #[test]
    fn bigint_conversion_keeps_low_word() {
        let n = (BigInt::from(1) << 80) + BigInt::from(12345);
        let d = DoubleDouble::from_bigint(&n);
        assert_eq!(d.hi(), 2f64.powi(80));
        assert_eq!(d.lo(), 12345.0);
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        let third = DoubleDouble::from_rational(&r);
        assert!(((third * 3.0) - 1.0).to_f64().abs() < 1e-31);
    }

    #[test]
    fn division_and_sqrt() {
        let x = DoubleDouble::new(2.0).sqrt();
        assert!((x * x - 2.0).to_f64().abs() < 1e-31);
        let y = DoubleDouble::new(7.0) / DoubleDouble::new(3.0);
        assert!((y * 3.0 - 7.0).to_f64().abs() < 1e-30);
    }
}
