//! Edgeworth corrections as polynomial-times-Gaussian functions.
//!
//! Only the polynomial factor is stored; `φ` is applied in floating point at
//! evaluation time, so all algebra on the corrections stays exact for
//! rational cumulants. `Φ` is evaluated through `erfc`, whose relative
//! accuracy is better than `1e-14`.
//!
//! Orders are capped at [`MAX_ORDER`]: beyond it the factorial growth of the
//! coefficients makes `P(x)·φ(x)` lose digits at large `|x|`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::cumulants::{index_solutions, CumulantVector};
use crate::error::{Error, Result};
use crate::gauss_poly::{hermite_table, integrate_against_gaussian, Poly};
use crate::scalar::{factorial, Scalar};

/// Largest order `s` accepted by [`EdgeworthModel`].
pub const MAX_ORDER: usize = 10;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn big_phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// The function `x ↦ P(x) φ(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteGaussFunction<T: Scalar> {
    pub poly: Poly<T>,
}

impl<T: Scalar> HermiteGaussFunction<T> {
    pub fn new(poly: Poly<T>) -> Self {
        HermiteGaussFunction { poly }
    }

    pub fn zero() -> Self {
        Self::new(Poly::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.poly + &other.poly)
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.poly.scale(c))
    }

    /// `(Pφ)' = (P' − xP) φ`
    pub fn derivative(&self) -> Self {
        Self::new(&self.poly.derivative() - &self.poly.mul_x())
    }

    /// `x · P φ`
    pub fn mul_x(&self) -> Self {
        Self::new(self.poly.mul_x())
    }

    /// `∫ P φ dx`
    pub fn integral(&self) -> T {
        integrate_against_gaussian(&self.poly)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval_f64(x) * phi(x)
    }
}

/// Index-solution weights `Π_l (γ_{l+2}/(l+2)!)^{r_l} / r_l!`, with the
/// associated `j`, for order `k`.
fn weighted_solutions<T: Scalar>(c: &CumulantVector<T>, k: usize) -> Result<Vec<(T, usize)>> {
    if k == 0 || k + 2 > c.order() {
        return Err(Error::OutOfRange(format!(
            "correction index k = {k} needs 1 ≤ k ≤ s − 2 with s = {}",
            c.order()
        )));
    }
    let mut out = Vec::new();
    for sol in index_solutions(k) {
        let mut w = T::one();
        for (idx, &r) in sol.r.iter().enumerate() {
            if r == 0 {
                continue;
            }
            let l = idx + 1;
            let g = c.gamma(l + 2).expect("order checked").clone() / T::from_bigint(&factorial(l as u32 + 2));
            w = w * g.pow_u32(r as u32) / T::from_bigint(&factorial(r as u32));
        }
        if !w.is_zero() {
            out.push((w, sol.j));
        }
    }
    Ok(out)
}

fn hermite_combination<T: Scalar>(terms: &[(T, usize)], shift: isize, factor: impl Fn(usize) -> T) -> Poly<T> {
    let top = terms.iter().map(|(_, m)| *m).max().unwrap_or(0);
    let h = hermite_table::<T>(top);
    terms.iter().fold(Poly::zero(), |acc, (w, m)| {
        let idx = (*m as isize + shift) as usize;
        &acc + &h[idx].scale(&(w.clone() * factor(*m)))
    })
}

/// `(weight, k + 2j)` pairs for `q_k`.
fn hermite_terms<T: Scalar>(c: &CumulantVector<T>, k: usize) -> Result<Vec<(T, usize)>> {
    Ok(weighted_solutions(c, k)?.into_iter().map(|(w, j)| (w, k + 2 * j)).collect())
}

/// `q_k = φ Σ H_{k+2j} Π_l (γ_{l+2}/(l+2)!)^{r_l}/r_l!`
pub fn build_qk<T: Scalar>(c: &CumulantVector<T>, k: usize) -> Result<HermiteGaussFunction<T>> {
    let terms = hermite_terms(c, k)?;
    Ok(HermiteGaussFunction::new(hermite_combination(&terms, 0, |_| T::one())))
}

/// `q_k' + x q_k = φ Σ (k+2j) H_{k+2j−1} (same weights)`.
pub fn build_q_score<T: Scalar>(c: &CumulantVector<T>, k: usize) -> Result<HermiteGaussFunction<T>> {
    let terms = hermite_terms(c, k)?;
    Ok(HermiteGaussFunction::new(hermite_combination(&terms, -1, |m| T::from_i64(m as i64))))
}

/// Distribution-function correction `Q_k = −φ Σ H_{k+2j−1}`, with `Q_k' = q_k`.
#[allow(non_snake_case)]
pub fn build_Qk<T: Scalar>(c: &CumulantVector<T>, k: usize) -> Result<HermiteGaussFunction<T>> {
    let terms = hermite_terms(c, k)?;
    Ok(HermiteGaussFunction::new(hermite_combination(&terms, -1, |_| -T::one())))
}

/// Edgeworth approximation of order `s` for the density of `Z_n`.
#[derive(Clone, Debug)]
pub struct EdgeworthModel<T: Scalar> {
    s: usize,
    cumulants: CumulantVector<T>,
    qk: Vec<HermiteGaussFunction<T>>,
    score: Vec<HermiteGaussFunction<T>>,
    big_qk: Vec<HermiteGaussFunction<T>>,
}

impl<T: Scalar> EdgeworthModel<T> {
    /// Uses `γ_3..γ_s` of `cumulants`.
    pub fn new(cumulants: &CumulantVector<T>, s: usize) -> Result<Self> {
        if !(2..=MAX_ORDER).contains(&s) {
            return Err(Error::OutOfRange(format!("order s = {s} outside 2..={MAX_ORDER}")));
        }
        cumulants.require_order(s)?;
        let cumulants = cumulants.truncated(s);
        let ks = 1..=s - 2;
        Ok(EdgeworthModel {
            s,
            qk: ks.clone().map(|k| build_qk(&cumulants, k)).collect::<Result<_>>()?,
            score: ks.clone().map(|k| build_q_score(&cumulants, k)).collect::<Result<_>>()?,
            big_qk: ks.map(|k| build_Qk(&cumulants, k)).collect::<Result<_>>()?,
            cumulants,
        })
    }

    pub fn order(&self) -> usize {
        self.s
    }

    pub fn cumulants(&self) -> &CumulantVector<T> {
        &self.cumulants
    }

    /// `q_1..q_{s−2}`
    pub fn qk(&self) -> &[HermiteGaussFunction<T>] {
        &self.qk
    }

    /// `q_k' + x q_k` for `k = 1..s−2`.
    pub fn q_scores(&self) -> &[HermiteGaussFunction<T>] {
        &self.score
    }

    #[allow(non_snake_case)]
    pub fn Qk(&self) -> &[HermiteGaussFunction<T>] {
        &self.big_qk
    }

    /// `φ_s(x) = φ(x) + Σ q_k(x) n^{−k/2}`
    pub fn phi_s(&self, n: u64, x: f64) -> f64 {
        let eps = 1.0 / (n as f64).sqrt();
        let corr: f64 = self.qk.iter().rev().fold(0.0, |acc, q| (acc + q.poly.eval_f64(x)) * eps);
        phi(x) * (1.0 + corr)
    }

    /// `Φ_s(x) = Φ(x) + Σ Q_k(x) n^{−k/2}`
    pub fn big_phi_s(&self, n: u64, x: f64) -> f64 {
        let eps = 1.0 / (n as f64).sqrt();
        let corr: f64 = self.big_qk.iter().rev().fold(0.0, |acc, q| (acc + q.poly.eval_f64(x)) * eps);
        big_phi(x) + phi(x) * corr
    }

    /// `u_s` and `w_s` at sample size `n`: `u_s` as the polynomial
    /// `Σ P_k n^{−k/2}` and `w_s` as a Hermite–Gauss function.
    pub fn u_w(&self, n: u64) -> (Poly<f64>, HermiteGaussFunction<f64>) {
        let eps = 1.0 / (n as f64).sqrt();
        let mut u = Poly::zero();
        let mut w = Poly::zero();
        let mut pw = 1.0;
        for (q, sc) in self.qk.iter().zip(&self.score) {
            pw *= eps;
            u = &u + &q.poly.to_f64().scale(&pw);
            w = &w + &sc.poly.to_f64().scale(&pw);
        }
        (u, HermiteGaussFunction::new(w))
    }

    /// `u_s` and `w_s/φ` as exact series in `ε = n^{−1/2}`: element `k−1`
    /// of each vector multiplies `ε^k`.
    pub fn u_w_series(&self) -> (Vec<Poly<T>>, Vec<Poly<T>>) {
        (
            self.qk.iter().map(|q| q.poly.clone()).collect(),
            self.score.iter().map(|q| q.poly.clone()).collect(),
        )
    }
}
