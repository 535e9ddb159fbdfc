//! Dense polynomials over a [`Scalar`] field, probabilists' Hermite
//! polynomials, and closed-form integration against the standard normal
//! density.
//!
//! Every integral in the expansion coefficients reduces to
//! `∫ P(x) φ(x) dx = Σ_n a_n E[Z^n]`, so with rational coefficients the
//! result is exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::scalar::{double_factorial, Scalar};

/// Dense polynomial, `coeffs[i]` multiplies `x^i`. Trailing zeros are never
/// stored, so the zero polynomial has no coefficients and degree `-1`.
#[derive(Clone, PartialEq)]
pub struct Poly<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `x`
    pub fn x() -> Self {
        Self::from_coeffs(vec![T::zero(), T::one()])
    }

    pub fn monomial(c: T, power: usize) -> Self {
        let mut coeffs = vec![T::zero(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a.clone() * T::from_i64(i as i64))
                .collect(),
        )
    }

    /// `x · P(x)`
    pub fn mul_x(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Horner evaluation in the field itself.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, a| acc * x.clone() + a.clone())
    }

    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a.to_f64())
    }

    /// Floating-point copy, for repeated evaluation on grids.
    pub fn to_f64(&self) -> Poly<f64> {
        Poly::from_coeffs(self.coeffs.iter().map(Scalar::to_f64).collect())
    }
}

impl<T: Scalar> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c:?}")?,
                1 => write!(f, "{c:?}·x")?,
                _ => write!(f, "{c:?}·x^{i}")?,
            }
        }
        Ok(())
    }
}

impl<T: Scalar> Add for &Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &Poly<T> {
    type Output = Poly<T>;

    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Mul for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::from_coeffs(out)
    }
}

impl<T: Scalar> Neg for &Poly<T> {
    type Output = Poly<T>;

    fn neg(self) -> Poly<T> {
        Poly::from_coeffs(self.coeffs.iter().map(|a| -a.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for Poly<T> {
            type Output = Poly<T>;

            fn $m(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Probabilists' Hermite polynomial `H_k` (leading coefficient 1), from
/// `H_{k+1} = x H_k − k H_{k−1}`.
pub fn hermite_poly<T: Scalar>(k: usize) -> Poly<T> {
    let mut prev = Poly::one();
    if k == 0 {
        return prev;
    }
    let mut cur = Poly::x();
    for i in 1..k {
        let next = &cur.mul_x() - &prev.scale(&T::from_i64(i as i64));
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// All Hermite polynomials `H_0..=H_kmax`.
pub fn hermite_table<T: Scalar>(kmax: usize) -> Vec<Poly<T>> {
    let mut out: Vec<Poly<T>> = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let h = match k {
            0 => Poly::one(),
            1 => Poly::x(),
            _ => &out[k - 1].mul_x() - &out[k - 2].scale(&T::from_i64(k as i64 - 1)),
        };
        out.push(h);
    }
    out
}

/// `E[Z^n]` for standard normal `Z`: zero for odd `n`, `(n−1)!!` otherwise.
pub fn gaussian_moment_int(n: usize) -> BigInt {
    if n % 2 == 1 {
        BigInt::zero()
    } else {
        double_factorial(n as i64 - 1)
    }
}

pub fn gaussian_moment<T: Scalar>(n: usize) -> T {
    T::from_bigint(&gaussian_moment_int(n))
}

/// `∫ P(x) φ(x) dx`, exact when `T` is exact.
pub fn integrate_against_gaussian<T: Scalar>(p: &Poly<T>) -> T {
    p.coeffs()
        .iter()
        .enumerate()
        .step_by(2)
        .filter(|(_, a)| !a.is_zero())
        .fold(T::zero(), |acc, (n, a)| acc + a.clone() * gaussian_moment::<T>(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{factorial, rat, Rational};

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_poly::<Rational>(0), Poly::one());
        assert_eq!(
            hermite_poly::<Rational>(3),
            Poly::from_coeffs(vec![r(0), r(-3), r(0), r(1)])
        );
        assert_eq!(
            hermite_poly::<Rational>(4),
            Poly::from_coeffs(vec![r(3), r(0), r(-6), r(0), r(1)])
        );
        let table = hermite_table::<Rational>(9);
        for (k, h) in table.iter().enumerate() {
            assert_eq!(*h, hermite_poly::<Rational>(k));
        }
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment::<Rational>(2), r(1));
        assert_eq!(gaussian_moment::<Rational>(3), r(0));
        assert_eq!(gaussian_moment::<Rational>(6), r(15));
        assert_eq!(gaussian_moment::<Rational>(0), r(1));
    }

    #[test]
    fn integration_spot_values() {
        let h = hermite_table::<Rational>(3);
        assert_eq!(integrate_against_gaussian(&Poly::<Rational>::one()), r(1));
        assert_eq!(integrate_against_gaussian(&(&h[2] * &h[3])), r(0));
        assert_eq!(integrate_against_gaussian(&(&h[2] * &h[2])), r(2));
    }

    #[test]
    fn zero_polynomial_conventions() {
        let z = Poly::<Rational>::zero();
        assert_eq!(z.degree(), -1);
        assert!(z.derivative().is_zero());
        assert!((&z * &hermite_poly(3)).is_zero());
        assert_eq!(integrate_against_gaussian(&z), r(0));
        assert_eq!(Poly::from_coeffs(vec![r(1), r(0), r(0)]).degree(), 0);
    }

    #[test]
    fn orthogonality_up_to_twelve() {
        let h = hermite_table::<Rational>(12);
        for m in 0..=12 {
            for n in 0..=12 {
                let v = integrate_against_gaussian(&(&h[m] * &h[n]));
                let want = if m == n { Rational::from_integer(factorial(n as u32)) } else { r(0) };
                assert_eq!(v, want, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn derivative_identity() {
        let h = hermite_table::<Rational>(12);
        for n in 1..=12 {
            assert_eq!(h[n].derivative(), h[n - 1].scale(&r(n as i64)));
        }
    }

    #[test]
    fn odd_index_sum_products_vanish() {
        let h = hermite_table::<Rational>(15);
        // every tuple (d1, d2, d3) with odd sum ≤ 15, plus some 4-tuples
        for a in 0..=15usize {
            for b in 0..=(15 - a) {
                for c in 0..=(15 - a - b) {
                    if (a + b + c) % 2 == 1 {
                        let p = &(&h[a] * &h[b]) * &h[c];
                        assert!(integrate_against_gaussian(&p).is_zero(), "({a},{b},{c})");
                    }
                }
            }
        }
        for tuple in [[1usize, 2, 3, 5], [3, 3, 3, 4], [2, 2, 2, 1], [0, 1, 6, 6]] {
            let p = tuple.iter().fold(Poly::one(), |acc, &d| &acc * &h[d]);
            assert!(integrate_against_gaussian(&p).is_zero());
        }
    }

    #[test]
    fn float_path_matches_exact_path() {
        let hq = hermite_poly::<Rational>(7);
        let hf = hermite_poly::<f64>(7);
        for x in [-2.5, -0.3, 0.0, 1.7, 4.0] {
            assert!((hq.eval_f64(x) - hf.eval_f64(x)).abs() < 1e-9);
        }
    }
}
