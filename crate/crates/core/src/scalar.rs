//! Scalar field abstraction shared by the exact (rational) and the
//! floating-point (empirical) coefficient paths.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

/// A field the polynomial and cumulant machinery can run over.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// `true` when arithmetic is exact.
    const EXACT: bool;

    fn from_bigint(v: &BigInt) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    /// Converts a float. For rationals the conversion is exact (floats are dyadic).
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Square root when it is representable in this field.
    fn sqrt_exact(&self) -> Option<Self>;

    fn abs_value(&self) -> Self;

    fn is_negative_value(&self) -> bool;

    /// Exact numerator/denominator strings (floats are expanded to their dyadic value).
    fn ratio_strings(&self) -> (String, String);

    fn pow_u32(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_bigint(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sqrt_exact(&self) -> Option<Self> {
        (*self >= 0.0).then(|| self.sqrt())
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }

    fn is_negative_value(&self) -> bool {
        *self < 0.0
    }

    fn ratio_strings(&self) -> (String, String) {
        match Rational::from_float(*self) {
            Some(r) => r.ratio_strings(),
            None => (format!("{self}"), "1".to_string()),
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }

    fn from_f64(v: f64) -> Option<Self> {
        Rational::from_float(v)
    }

    fn to_f64(&self) -> f64 {
        // numerator and denominator may individually overflow f64
        let sn = self.numer().bits().saturating_sub(60);
        let sd = self.denom().bits().saturating_sub(60);
        let n = (self.numer() >> sn).to_f64().unwrap_or(f64::NAN);
        let d = (self.denom() >> sd).to_f64().unwrap_or(f64::NAN);
        let e = sn as i64 - sd as i64;
        (n / d) * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }

    fn sqrt_exact(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        (&n * &n == *self.numer() && &d * &d == *self.denom()).then(|| Rational::new(n, d))
    }

    fn abs_value(&self) -> Self {
        self.abs()
    }

    fn is_negative_value(&self) -> bool {
        self.is_negative()
    }

    fn ratio_strings(&self) -> (String, String) {
        (self.numer().to_string(), self.denom().to_string())
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `n!!` with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> BigInt {
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Parses `"3"`, `"-2/5"`, `"0.4"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(digits);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

/// Shorthand for building small exact rationals in code and tests.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimal_and_fraction_forms() {
        assert_eq!(parse_rational("0.4"), Some(rat(2, 5)));
        assert_eq!(parse_rational("-6/5"), Some(rat(-6, 5)));
        assert_eq!(parse_rational("1.2"), Some(rat(6, 5)));
        assert_eq!(parse_rational("15e-1"), Some(rat(3, 2)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(rat(9, 4).sqrt_exact(), Some(rat(3, 2)));
        assert_eq!(rat(1, 12).sqrt_exact(), None);
        assert_eq!(rat(-1, 1).sqrt_exact(), None);
    }

    #[test]
    fn combinatorial_helpers() {
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(double_factorial(5), BigInt::from(15));
        assert_eq!(double_factorial(-1), BigInt::from(1));
        assert_eq!(binomial(6, 2), BigInt::from(15));
    }

    #[test]
    fn huge_rational_to_float() {
        let big = Rational::from_integer(factorial(200)) / Rational::from_integer(factorial(199));
        assert!((Scalar::to_f64(&big) - 200.0).abs() < 1e-9);
    }
}
