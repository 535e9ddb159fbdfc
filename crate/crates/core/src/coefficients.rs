//! Coefficients `c_j` of the expansion
//! `I(Z_n || Z) = c_1/n + c_2/n² + … + c_J/n^J + o(n^{−J})`.
//!
//! Two independent routes are provided. The direct one sums
//! `(−1)^k ∫ S_{r_1} S_{r_2} P_{r_3} ⋯ P_{r_k} φ` over positive compositions
//! `(r_1, …, r_k)` of `2j`, where `P_r φ = q_r` and `S_r φ = q_r' + x q_r`.
//! The series route expands `Σ_m (−1)^m ∫ w_s² u_s^m / φ` in powers of
//! `n^{−1/2}` and reads off the coefficients `a_j`; odd ones vanish and
//! `c_j = a_{2j}`.

use serde::{Deserialize, Serialize};

use crate::cumulants::{positive_compositions, CumulantVector};
use crate::edgeworth::{build_q_score, build_qk};
use crate::error::{Error, Result};
use crate::gauss_poly::{integrate_against_gaussian, Poly};
use crate::scalar::{factorial, Scalar};

/// Product of Hermite–Gauss factors, tracking how many `φ` factors it carries.
struct GaussPowerTerm<T: Scalar> {
    poly: Poly<T>,
    phi_power: usize,
}

impl<T: Scalar> GaussPowerTerm<T> {
    fn one() -> Self {
        GaussPowerTerm { poly: Poly::one(), phi_power: 0 }
    }

    /// Multiplies by `P φ`.
    fn times(self, p: &Poly<T>) -> Self {
        GaussPowerTerm { poly: &self.poly * p, phi_power: self.phi_power + 1 }
    }

    fn over_phi_power(self, m: usize) -> Self {
        assert!(m <= self.phi_power, "dividing φ^{} by φ^{m}", self.phi_power);
        GaussPowerTerm { poly: self.poly, phi_power: self.phi_power - m }
    }

    /// `∫ P φ dx`; only defined when exactly one `φ` remains.
    fn integrate(&self) -> T {
        assert_eq!(self.phi_power, 1, "integrand must carry exactly one Gaussian factor");
        integrate_against_gaussian(&self.poly)
    }
}

/// `P_1..P_m` and `S_1..S_m`.
fn correction_polys<T: Scalar>(c: &CumulantVector<T>, m: usize) -> Result<(Vec<Poly<T>>, Vec<Poly<T>>)> {
    let p = (1..=m).map(|k| build_qk(c, k).map(|f| f.poly)).collect::<Result<Vec<_>>>()?;
    let s = (1..=m).map(|k| build_q_score(c, k).map(|f| f.poly)).collect::<Result<Vec<_>>>()?;
    Ok((p, s))
}

/// Sum over compositions of `total` of `(−1)^k ∫ S S P ⋯ P φ`.
fn composition_sum<T: Scalar>(c: &CumulantVector<T>, total: usize) -> Result<T> {
    if total < 2 {
        return Ok(T::zero());
    }
    c.require_order(total + 1)?;
    let (p, s) = correction_polys(c, total - 1)?;
    let mut sum = T::zero();
    for k in 2..=total {
        for comp in positive_compositions(total, k) {
            let term = comp
                .iter()
                .enumerate()
                .fold(GaussPowerTerm::one(), |acc, (slot, &r)| acc.times(if slot < 2 { &s[r - 1] } else { &p[r - 1] }))
                .over_phi_power(k - 1);
            let v = term.integrate();
            sum = if k % 2 == 0 { sum + v } else { sum - v };
        }
    }
    Ok(sum)
}

/// `c_j` from the composition formula. Needs cumulants through `2j + 1`.
pub fn compute_cj<T: Scalar>(c: &CumulantVector<T>, j: usize) -> Result<T> {
    if j == 0 {
        return Err(Error::OutOfRange("coefficient index j must be ≥ 1".into()));
    }
    c.require_order(2 * j + 1)?;
    composition_sum(&c.truncated(2 * j + 1), 2 * j)
}

/// Coefficient `a_j` of `n^{−j/2}` in the expansion of the Fisher
/// distance, by the composition formula. Needs cumulants through `j + 1`.
pub fn half_power_coefficient<T: Scalar>(c: &CumulantVector<T>, j: usize) -> Result<T> {
    c.require_order(j + 1)?;
    composition_sum(&c.truncated(j + 1), j)
}

/// `a_j` as `Σ_m (−1)^m [ε^j] ∫ W² U^m φ` with `W = Σ S_k ε^k`,
/// `U = Σ P_k ε^k`, by truncated series multiplication.
pub fn half_power_coefficient_series<T: Scalar>(c: &CumulantVector<T>, j: usize) -> Result<T> {
    if j < 2 {
        return Ok(T::zero());
    }
    c.require_order(j + 1)?;
    let (p, s) = correction_polys(&c.truncated(j + 1), j - 1)?;
    // series indexed by power of ε, truncated at ε^j
    let series = |terms: &[Poly<T>]| -> Vec<Poly<T>> {
        std::iter::once(Poly::zero()).chain(terms.iter().cloned()).take(j + 1).collect()
    };
    let mul = |a: &[Poly<T>], b: &[Poly<T>]| -> Vec<Poly<T>> {
        let mut out = vec![Poly::zero(); j + 1];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (k, y) in b.iter().enumerate().take(j + 1 - i) {
                out[i + k] = &out[i + k] + &(x * y);
            }
        }
        out
    };
    let w = series(&s);
    let u = series(&p);
    let mut acc = mul(&w, &w);
    let mut total = Poly::zero();
    for m in 0..=j - 2 {
        let coef = acc[j].clone();
        total = if m % 2 == 0 { &total + &coef } else { &total - &coef };
        acc = mul(&acc, &u);
    }
    Ok(integrate_against_gaussian(&total))
}

/// `γ_k² / (k−1)!`: the first nonvanishing coefficient when
/// `γ_3 = … = γ_{k−1} = 0`.
pub fn leading_coefficient(k: usize, gamma_k: f64) -> f64 {
    leading_coefficient_exact(k, &gamma_k)
}

pub fn leading_coefficient_exact<T: Scalar>(k: usize, gamma_k: &T) -> T {
    assert!(k >= 3, "leading coefficient needs k ≥ 3");
    gamma_k.clone() * gamma_k.clone() / T::from_bigint(&factorial(k as u32 - 1))
}

/// `c_1..c_J` with `J = ⌊(s−2)/2⌋`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionCoefficients<T: Scalar> {
    pub s: usize,
    pub c: Vec<T>,
}

impl<T: Scalar> ExpansionCoefficients<T> {
    /// Computes every coefficient the order `s` supports.
    pub fn compute(cumulants: &CumulantVector<T>, s: usize) -> Result<Self> {
        cumulants.require_order(s)?;
        let big_j = s.saturating_sub(2) / 2;
        let c = (1..=big_j).map(|j| compute_cj(cumulants, j)).collect::<Result<_>>()?;
        Ok(ExpansionCoefficients { s, c })
    }

    /// Keeps `c_1..c_J`.
    pub fn truncated_to(&self, big_j: usize) -> Self {
        ExpansionCoefficients { s: self.s.min(2 * big_j + 2), c: self.c[..big_j.min(self.c.len())].to_vec() }
    }

    #[allow(non_snake_case)]
    pub fn J(&self) -> usize {
        self.c.len()
    }

    /// `c_j`, 1-based.
    pub fn get(&self, j: usize) -> Option<&T> {
        j.checked_sub(1).and_then(|i| self.c.get(i))
    }

    pub fn records(&self) -> Vec<CoefficientRecord> {
        self.c
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let (numerator, denominator) = v.ratio_strings();
                CoefficientRecord { j: i + 1, numerator, denominator, float: v.to_f64() }
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records())?)
    }
}

/// `Σ_{j≤J} c_j n^{−j}`
pub fn predict_distance<T: Scalar>(coeffs: &ExpansionCoefficients<T>, n: u64) -> f64 {
    let inv = 1.0 / n as f64;
    coeffs.c.iter().rev().fold(0.0, |acc, c| (acc + c.to_f64()) * inv)
}

/// One exported coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub j: usize,
    pub numerator: String,
    pub denominator: String,
    pub float: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::analytic_cumulants;
    use crate::family::Family;
    use crate::scalar::{rat, Rational};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn cv(g: &[Rational]) -> CumulantVector<Rational> {
        CumulantVector::from_higher(g.to_vec())
    }

    #[test]
    fn first_coefficients() {
        let c = cv(&[rat(1, 2), rat(1, 3), rat(1, 4)]);
        assert_eq!(compute_cj(&c, 1).unwrap(), rat(1, 8));
        assert_eq!(compute_cj(&c, 2).unwrap(), rat(41, 1728));
        let sym = cv(&[rat(0, 1), rat(-7, 3), rat(5, 2)]);
        assert_eq!(compute_cj(&sym, 2).unwrap(), rat(49, 54));
    }

    #[test]
    fn family_values() {
        let exp = analytic_cumulants::<Rational>(&Family::StandardizedExponential, 7).unwrap();
        let coeffs = ExpansionCoefficients::compute(&exp, 7).unwrap();
        assert_eq!(coeffs.c, vec![rat(2, 1), rat(4, 1)]);
        let c3 = compute_cj(&exp, 3).unwrap();
        assert_eq!(c3, rat(8, 1));
        assert!((predict_distance(&coeffs.truncated_to(1), 100) - 0.02).abs() < 1e-15);

        let unif = analytic_cumulants::<Rational>(&Family::StandardizedUniform, 9).unwrap();
        let coeffs = ExpansionCoefficients::compute(&unif, 9).unwrap();
        assert_eq!(coeffs.c, vec![rat(0, 1), rat(6, 25), rat(54, 125)]);
        assert!((predict_distance(&coeffs.truncated_to(2), 10) - 0.0024).abs() < 1e-15);
    }

    #[test]
    fn insufficient_order_and_empty_predictions() {
        let c = cv(&[rat(1, 1), rat(1, 1)]);
        assert!(matches!(compute_cj(&c, 2), Err(Error::InsufficientOrder { needed: 5, have: 4 })));
        let coeffs = ExpansionCoefficients::compute(&c, 3).unwrap();
        assert_eq!(coeffs.J(), 0);
        assert_eq!(predict_distance(&coeffs, 10), 0.0);
    }

    #[test]
    fn gaussian_coefficients_vanish() {
        let g = CumulantVector::<Rational>::gaussian(9);
        for j in 1..=4 {
            assert!(compute_cj(&g, j).unwrap().is_zero());
        }
    }

    #[test]
    fn leading_coefficient_values() {
        assert_eq!(leading_coefficient(3, 2.0), 2.0);
        assert_eq!(leading_coefficient(4, 3.0), 1.5);
        assert_eq!(leading_coefficient_exact(6, &rat(1, 1)), rat(1, 120));
    }

    #[test]
    fn json_export() {
        let c = cv(&[rat(1, 2), rat(1, 3), rat(1, 4)]);
        let coeffs = ExpansionCoefficients::compute(&c, 5).unwrap();
        let back: Vec<CoefficientRecord> = serde_json::from_str(&coeffs.to_json().unwrap()).unwrap();
        assert_eq!(back[0], CoefficientRecord { j: 1, numerator: "1".into(), denominator: "8".into(), float: 0.125 });
    }

    #[test]
    fn float_path_matches_exact_path() {
        let c = cv(&[rat(1, 2), rat(1, 3), rat(1, 4), rat(-1, 5), rat(2, 3)]);
        for j in 1..=3 {
            let exact = compute_cj(&c, j).unwrap().to_f64();
            let float = compute_cj(&c.to_f64(), j).unwrap();
            assert!((exact - float).abs() < 1e-12 * exact.abs().max(1.0));
        }
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-24i64..=24, 1i64..=12).prop_map(|(a, b)| rat(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn routes_agree(g in prop::collection::vec(small(), 6)) {
            let c = cv(&g);
            for j in 2..=7 {
                let a = half_power_coefficient(&c, j).unwrap();
                prop_assert_eq!(&a, &half_power_coefficient_series(&c, j).unwrap());
                if j % 2 == 1 {
                    prop_assert!(a.is_zero(), "a_{} = {}", j, a);
                } else {
                    prop_assert_eq!(a, compute_cj(&c, j / 2).unwrap());
                }
            }
        }

        #[test]
        fn truncation_independence(g in prop::collection::vec(small(), 7), extra in prop::collection::vec(small(), 3)) {
            let base = cv(&g);
            for j in 1..=2 {
                let mut altered = base.truncated(2 * j + 1).as_slice()[2..].to_vec();
                altered.extend(extra.iter().cloned());
                let v = compute_cj(&base, j).unwrap();
                prop_assert_eq!(&v, &compute_cj(&cv(&altered), j).unwrap());
                if j == 1 {
                    prop_assert_eq!(v, &g[0] * &g[0] / rat(2, 1));
                }
            }
        }
    }
}
