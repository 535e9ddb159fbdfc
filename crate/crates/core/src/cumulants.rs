//! Moments, cumulants and the index enumerations used by the expansion.
//!
//! Cumulants are always reported for the standardized variable
//! `(X − m_1) / √(m_2 − m_1²)`, so `γ_1 = 0` and `γ_2 = 1`. Empirical
//! cumulants use biased plug-in moments.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::Family;
use crate::scalar::{binomial, Scalar};

/// Standardized cumulants `γ_1..γ_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantVector<T: Scalar> {
    gamma: Vec<T>,
}

impl<T: Scalar> CumulantVector<T> {
    /// From the full vector `γ_1..γ_s`; requires `γ_1 = 0`, `γ_2 = 1`.
    pub fn new(gamma: Vec<T>) -> Result<Self> {
        if gamma.len() < 2 {
            return Err(Error::InvalidInput(format!("cumulant vector of order {} < 2", gamma.len())));
        }
        if !gamma[0].is_zero() || !gamma[1].is_one() {
            return Err(Error::NotStandardized(format!("γ_1 = {:?}, γ_2 = {:?}", gamma[0], gamma[1])));
        }
        Ok(CumulantVector { gamma })
    }

    /// From `γ_3..γ_s` only.
    pub fn from_higher(higher: Vec<T>) -> Self {
        let mut gamma = vec![T::zero(), T::one()];
        gamma.extend(higher);
        CumulantVector { gamma }
    }

    /// Standard normal cumulants up to order `s`.
    pub fn gaussian(s: usize) -> Self {
        Self::from_higher(vec![T::zero(); s.saturating_sub(2)])
    }

    pub fn order(&self) -> usize {
        self.gamma.len()
    }

    /// `γ_r`, 1-based; zero beyond the stored order is *not* assumed.
    pub fn gamma(&self, r: usize) -> Option<&T> {
        r.checked_sub(1).and_then(|i| self.gamma.get(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.gamma
    }

    /// Keeps `γ_1..γ_s`.
    pub fn truncated(&self, s: usize) -> Self {
        CumulantVector { gamma: self.gamma[..s.clamp(2, self.gamma.len())].to_vec() }
    }

    /// Errors unless the order is at least `needed`.
    pub fn require_order(&self, needed: usize) -> Result<()> {
        if self.order() < needed {
            Err(Error::InsufficientOrder { needed, have: self.order() })
        } else {
            Ok(())
        }
    }

    pub fn to_f64(&self) -> CumulantVector<f64> {
        CumulantVector { gamma: self.gamma.iter().map(Scalar::to_f64).collect() }
    }
}

/// Raw moments `m_1..m_s`, optionally with absolute moments `β_1..β_s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentVector<T: Scalar> {
    pub raw: Vec<T>,
    pub absolute: Option<Vec<f64>>,
}

impl<T: Scalar> MomentVector<T> {
    pub fn new(raw: Vec<T>) -> Self {
        MomentVector { raw, absolute: None }
    }

    pub fn order(&self) -> usize {
        self.raw.len()
    }
}

/// Unstandardized cumulants `κ_1..κ_s` from raw moments, by
/// `κ_r = m_r − Σ_{j<r} C(r−1, j−1) κ_j m_{r−j}`.
pub fn raw_cumulants<T: Scalar>(m: &[T]) -> Vec<T> {
    let mut kappa: Vec<T> = Vec::with_capacity(m.len());
    for r in 1..=m.len() {
        let mut k = m[r - 1].clone();
        for j in 1..r {
            let c = T::from_bigint(&binomial(r as u32 - 1, j as u32 - 1));
            k = k - c * kappa[j - 1].clone() * m[r - j - 1].clone();
        }
        kappa.push(k);
    }
    kappa
}

/// Cumulants of the affinely standardized variable.
pub fn moments_to_cumulants<T: Scalar>(m: &MomentVector<T>) -> Result<CumulantVector<T>> {
    if m.order() < 2 {
        return Err(Error::InvalidInput(format!("need at least two moments, got {}", m.order())));
    }
    let kappa = raw_cumulants(&m.raw);
    let var = kappa[1].clone();
    if var.is_negative_value() || var.is_zero() || (!T::EXACT && var.to_f64() <= 1e-300) {
        return Err(Error::DegenerateDistribution);
    }
    let sd = var.sqrt_exact();
    let mut gamma = vec![T::zero(), T::one()];
    for (idx, k) in kappa.iter().enumerate().skip(2) {
        let r = idx as u32 + 1;
        let g = if k.is_zero() {
            T::zero()
        } else if r % 2 == 0 {
            k.clone() / var.pow_u32(r / 2)
        } else {
            let sd = sd.clone().ok_or(Error::IrrationalStandardization { order: r as usize })?;
            k.clone() / sd.pow_u32(r)
        };
        gamma.push(g);
    }
    Ok(CumulantVector { gamma })
}

/// Exact standardized cumulants of a built-in family up to order `s`.
pub fn analytic_cumulants<T: Scalar>(family: &Family, s: usize) -> Result<CumulantVector<T>> {
    if s < 2 {
        return Err(Error::InvalidInput(format!("order s = {s} < 2")));
    }
    family.validate()?;
    moments_to_cumulants(&MomentVector::new(family.base_raw_moments::<T>(s)?))
}

/// Plug-in cumulants of a sample. Moments are taken about the sample mean,
/// which leaves the standardized cumulants unchanged and avoids cancellation.
pub fn empirical_cumulants(sample: &[f64], s: usize) -> Result<CumulantVector<f64>> {
    if s < 2 {
        return Err(Error::InvalidInput(format!("order s = {s} < 2")));
    }
    if sample.len() < s + 1 {
        return Err(Error::InvalidInput(format!("sample of size {} too small for order {s}", sample.len())));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("sample contains non-finite values".into()));
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let mut m = vec![0.0; s];
    for &v in sample {
        let d = v - mean;
        let mut p = 1.0;
        for slot in m.iter_mut() {
            p *= d;
            *slot += p;
        }
    }
    m.iter_mut().for_each(|v| *v /= n);
    m[0] = 0.0;
    let scale = mean.abs().max(1.0);
    if m[1] <= (1e-14 * scale).powi(2) {
        return Err(Error::DegenerateDistribution);
    }
    moments_to_cumulants(&MomentVector::new(m))
}

/// Reads one real per line; blank lines and `#` comments are skipped.
pub fn read_sample_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| l.parse::<f64>().map_err(|_| Error::Parse(format!("line {}: {l:?} is not a number", i + 1))))
        .collect()
}

/// One solution of `r_1 + 2 r_2 + … + k r_k = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSolution {
    pub r: Vec<usize>,
    /// `r_1 + … + r_k`
    pub j: usize,
}

/// All non-negative solutions of `r_1 + 2 r_2 + … + k r_k = k`, in
/// descending lexicographic order of `(r_1, …, r_k)`.
pub fn index_solutions(k: usize) -> Vec<IndexSolution> {
    fn rec(l: usize, k: usize, remaining: usize, cur: &mut Vec<usize>, out: &mut Vec<IndexSolution>) {
        if l > k {
            if remaining == 0 {
                out.push(IndexSolution { r: cur.clone(), j: cur.iter().sum() });
            }
            return;
        }
        for r in (0..=remaining / l).rev() {
            cur.push(r);
            rec(l + 1, k, remaining - r * l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 {
        rec(1, k, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Ordered tuples of `parts` positive integers summing to `total`, in
/// ascending lexicographic order.
pub fn positive_compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(total);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 1..=total - (parts - 1) {
            cur.push(first);
            rec(total - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts >= 1 && total >= parts {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use num_traits::{ToPrimitive, Zero};
    use proptest::prelude::*;

    /// Inverse direction, `m_r = Σ_{j=1}^{r} C(r−1, j−1) κ_j m_{r−j}` with `m_0 = 1`.
    fn cumulants_to_moments(kappa: &[Rational]) -> Vec<Rational> {
        let mut m = vec![rat(1, 1)];
        for r in 1..=kappa.len() {
            let mut v = rat(0, 1);
            for j in 1..=r {
                v += Rational::from_integer(binomial(r as u32 - 1, j as u32 - 1)) * &kappa[j - 1] * &m[r - j];
            }
            m.push(v);
        }
        m.split_off(1)
    }

    fn r(n: i64) -> Rational {
        rat(n, 1)
    }

    #[test]
    fn spot_conversions() {
        let normal = MomentVector::new([0, 1, 0, 3, 0, 15].map(r).to_vec());
        assert_eq!(moments_to_cumulants(&normal).unwrap(), CumulantVector::gaussian(6));

        let exp = MomentVector::new([1, 2, 6, 24].map(r).to_vec());
        assert_eq!(moments_to_cumulants(&exp).unwrap().as_slice(), &[0, 1, 2, 6].map(r));

        let unif = MomentVector::new(vec![r(0), r(1), r(0), rat(9, 5)]);
        assert_eq!(moments_to_cumulants(&unif).unwrap().as_slice(), &[r(0), r(1), r(0), rat(-6, 5)]);
    }

    #[test]
    fn family_catalog() {
        assert_eq!(analytic_cumulants::<Rational>(&Family::Gaussian, 6).unwrap(), CumulantVector::gaussian(6));
        assert_eq!(
            analytic_cumulants::<Rational>(&Family::StandardizedExponential, 4).unwrap().as_slice(),
            &[0, 1, 2, 6].map(r)
        );
        let u = analytic_cumulants::<Rational>(&Family::StandardizedUniform, 10).unwrap();
        assert_eq!(u.gamma(4), Some(&rat(-6, 5)));
        assert_eq!(u.gamma(6), Some(&rat(48, 7)));
        assert_eq!(u.gamma(8), Some(&rat(-432, 5)));
        assert_eq!(u.gamma(10), Some(&rat(20736, 11)));
        assert!(u.gamma(3).unwrap().is_zero() && u.gamma(9).unwrap().is_zero());
        // symmetric coin: γ_4 = −2
        let b = analytic_cumulants::<Rational>(&Family::bernoulli(), 4).unwrap();
        assert_eq!(b.gamma(4), Some(&r(-2)));
        // Beta(3,3): kurtosis excess −6/(2·3+3) = −2/3
        let beta = analytic_cumulants::<Rational>(&Family::Beta33, 4).unwrap();
        assert_eq!(beta.gamma(4), Some(&rat(-2, 3)));
    }

    #[test]
    fn odd_order_with_irrational_scale_is_reported() {
        let skewed = Family::TwoPoint { p: 0.25 };
        let err = analytic_cumulants::<Rational>(&skewed, 3).unwrap_err();
        assert!(matches!(err, Error::IrrationalStandardization { order: 3 }));
        let g = analytic_cumulants::<f64>(&skewed, 3).unwrap();
        // skewness of Bernoulli(p): (1−2p)/√(p(1−p))
        assert!((g.gamma(3).unwrap() - 0.5 / (0.1875f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mixture_cumulants_match_float_moments() {
        let mix = Family::default_mixture();
        let exact = analytic_cumulants::<f64>(&mix, 6).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
        let sample: Vec<f64> = (0..400_000).map(|_| mix.sample(&mut rng)).collect();
        let emp = empirical_cumulants(&sample, 4).unwrap();
        assert!((exact.gamma(3).unwrap() - emp.gamma(3).unwrap()).abs() < 0.03);
        assert!((exact.gamma(4).unwrap() - emp.gamma(4).unwrap()).abs() < 0.1);
    }

    #[test]
    fn empirical_examples() {
        let coin: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let g = empirical_cumulants(&coin, 4).unwrap();
        assert!(g.gamma(3).unwrap().abs() < 1e-12);
        assert!((g.gamma(4).unwrap() + 2.0).abs() < 1e-12);
        assert!(matches!(empirical_cumulants(&[3.0; 50], 4), Err(Error::DegenerateDistribution)));
        assert!(empirical_cumulants(&[1.0, 2.0], 4).is_err());

        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let normal: Vec<f64> = (0..1_000_000).map(|_| Family::Gaussian.sample(&mut rng)).collect();
        assert!(empirical_cumulants(&normal, 3).unwrap().gamma(3).unwrap().abs() < 0.02);
    }

    #[test]
    fn sample_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        std::fs::write(&path, "# draws\n1.5\n\n-2\n3e-1\n").unwrap();
        assert_eq!(read_sample_file(&path).unwrap(), vec![1.5, -2.0, 0.3]);
        std::fs::write(&path, "1\nabc\n").unwrap();
        assert!(matches!(read_sample_file(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn index_solution_examples() {
        let s = |k| index_solutions(k).into_iter().map(|x| (x.r, x.j)).collect::<Vec<_>>();
        assert_eq!(s(1), vec![(vec![1], 1)]);
        assert_eq!(s(2), vec![(vec![2, 0], 2), (vec![0, 1], 1)]);
        assert_eq!(s(3), vec![(vec![3, 0, 0], 3), (vec![1, 1, 0], 2), (vec![0, 0, 1], 1)]);
        let partitions = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42];
        for (k, &p) in (1..=10).zip(partitions.iter()) {
            let sols = index_solutions(k);
            assert_eq!(sols.len(), p, "k={k}");
            for x in &sols {
                assert_eq!(x.r.iter().enumerate().map(|(i, r)| (i + 1) * r).sum::<usize>(), k);
            }
        }
    }

    #[test]
    fn composition_examples() {
        assert_eq!(positive_compositions(2, 2), vec![vec![1, 1]]);
        assert_eq!(positive_compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(positive_compositions(4, 4), vec![vec![1, 1, 1, 1]]);
        assert!(positive_compositions(2, 3).is_empty());
        for total in 1..=10usize {
            for parts in 1..=total {
                let c = positive_compositions(total, parts);
                assert_eq!(c.len(), binomial(total as u32 - 1, parts as u32 - 1).to_usize().unwrap());
            }
        }
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-40i64..=40, 1i64..=12).prop_map(|(n, d)| rat(n, d))
    }

    proptest! {
        #[test]
        fn round_trip_through_cumulants(kappa in prop::collection::vec(small_rational(), 8), var in 1i64..9) {
            let mut kappa = kappa;
            kappa[1] = rat(var, 1);
            let m = cumulants_to_moments(&kappa);
            prop_assert_eq!(raw_cumulants(&m), kappa);
        }

        #[test]
        fn cumulant_scale_law(kappa in prop::collection::vec(small_rational(), 8), a in 1i64..5, shift in -5i64..5) {
            let mut kappa = kappa;
            kappa[1] = rat(1, 1);
            let m = cumulants_to_moments(&kappa);
            // moments of aX + b via binomial expansion
            let a = rat(a, 1);
            let b = rat(shift, 1);
            let full: Vec<Rational> = std::iter::once(rat(1, 1)).chain(m.iter().cloned()).collect();
            let scaled: Vec<Rational> = (1..=8u32)
                .map(|r| {
                    (0..=r).fold(rat(0, 1), |acc, k| {
                        acc + Rational::from_integer(binomial(r, k))
                            * a.pow_u32(k) * &full[k as usize] * b.pow_u32(r - k)
                    })
                })
                .collect();
            let ks = raw_cumulants(&scaled);
            for r in 2..=8usize {
                prop_assert_eq!(&ks[r - 1], &(a.pow_u32(r as u32) * &kappa[r - 1]));
            }
            prop_assert_eq!(&ks[0], &(&a * &kappa[0] + &b));
        }
    }
}
