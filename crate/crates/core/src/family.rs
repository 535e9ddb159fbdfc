//! Built-in distribution families, always in standardized form
//! (zero mean, unit variance).
//!
//! Each family knows its exact raw moments (for exact cumulants), its
//! characteristic function with the first two derivatives in closed form,
//! and, where it has one, its density.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{binomial, double_factorial, factorial, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Distribution family of the summand `X_1`, standardized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    /// `E − 1` with `E ~ Exp(1)`.
    StandardizedExponential,
    /// Uniform on `[−√3, √3]`.
    StandardizedUniform,
    /// Beta(3,3) rescaled to `[−√7, √7]`.
    Beta33,
    /// Two-point law: 1 with probability `p`, 0 otherwise, standardized.
    TwoPoint { p: f64 },
    /// Finite Gaussian mixture, standardized by its own mean and variance.
    GaussianMixture { components: Vec<MixtureComponent> },
}

impl Family {
    /// Symmetric ±1 coin.
    pub fn bernoulli() -> Self {
        Family::TwoPoint { p: 0.5 }
    }

    /// A fixed skewed bimodal mixture used by the inequality suite.
    pub fn default_mixture() -> Self {
        Family::GaussianMixture {
            components: vec![
                MixtureComponent { weight: 0.3, mean: -1.5, sd: 0.5 },
                MixtureComponent { weight: 0.7, mean: 0.75, sd: 0.8 },
            ],
        }
    }

    pub fn tag(&self) -> String {
        self.to_string()
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Family::TwoPoint { p } if !(*p > 0.0 && *p < 1.0) => {
                Err(Error::InvalidInput(format!("two_point probability {p} not in (0,1)")))
            }
            Family::GaussianMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidInput("empty mixture".into()));
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if components.iter().any(|c| !(c.weight > 0.0) || !(c.sd > 0.0)) {
                    return Err(Error::InvalidInput("mixture weights and sds must be positive".into()));
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!("mixture weights sum to {total}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Raw moments `m_1..m_s` of the unstandardized base variable, exact when
    /// the parameters are (every float is a dyadic rational).
    pub fn base_raw_moments<T: Scalar>(&self, s: usize) -> Result<Vec<T>> {
        let conv = |v: f64| T::from_f64(v).ok_or_else(|| Error::InvalidInput(format!("non-finite parameter {v}")));
        let moments = match self {
            Family::Gaussian => (1..=s)
                .map(|r| T::from_bigint(&crate::gauss_poly::gaussian_moment_int(r)))
                .collect(),
            Family::StandardizedExponential => (1..=s).map(|r| T::from_bigint(&factorial(r as u32))).collect(),
            Family::StandardizedUniform => (1..=s).map(|r| T::one() / T::from_i64(r as i64 + 1)).collect(),
            Family::Beta33 => {
                // E B^r = Π_{i<r} (3+i)/(6+i)
                let mut acc = T::one();
                (0..s)
                    .map(|i| {
                        acc = acc.clone() * T::from_i64(3 + i as i64) / T::from_i64(6 + i as i64);
                        acc.clone()
                    })
                    .collect()
            }
            Family::TwoPoint { p } => {
                let p = conv(*p)?;
                vec![p; s]
            }
            Family::GaussianMixture { components } => {
                let mut out = vec![T::zero(); s];
                for c in components {
                    let (w, mu, sd) = (conv(c.weight)?, conv(c.mean)?, conv(c.sd)?);
                    for (idx, slot) in out.iter_mut().enumerate() {
                        let r = idx + 1;
                        // E (μ + σZ)^r = Σ_{k even} C(r,k) μ^{r−k} σ^k (k−1)!!
                        let mut m = T::zero();
                        for k in (0..=r).step_by(2) {
                            m = m + T::from_bigint(&binomial(r as u32, k as u32))
                                * mu.pow_u32((r - k) as u32)
                                * sd.pow_u32(k as u32)
                                * T::from_bigint(&double_factorial(k as i64 - 1));
                        }
                        *slot = slot.clone() + w.clone() * m;
                    }
                }
                out
            }
        };
        Ok(moments)
    }

    /// Mean and standard deviation of the base variable.
    fn base_location_scale(&self) -> (f64, f64) {
        match self {
            Family::Gaussian => (0.0, 1.0),
            Family::StandardizedExponential => (1.0, 1.0),
            Family::StandardizedUniform => (0.5, (1.0f64 / 12.0).sqrt()),
            Family::Beta33 => (0.5, (1.0f64 / 28.0).sqrt()),
            Family::TwoPoint { p } => (*p, (p * (1.0 - p)).sqrt()),
            Family::GaussianMixture { components } => {
                let m: f64 = components.iter().map(|c| c.weight * c.mean).sum();
                let m2: f64 = components.iter().map(|c| c.weight * (c.sd * c.sd + c.mean * c.mean)).sum();
                (m, (m2 - m * m).sqrt())
            }
        }
    }

    /// Mixture components after standardization.
    fn standardized_components(&self) -> Vec<MixtureComponent> {
        match self {
            Family::GaussianMixture { components } => {
                let (m, s) = self.base_location_scale();
                components
                    .iter()
                    .map(|c| MixtureComponent { weight: c.weight, mean: (c.mean - m) / s, sd: c.sd / s })
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    /// Support of the standardized law (may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Family::StandardizedExponential => (-1.0, f64::INFINITY),
            Family::StandardizedUniform => (-(3f64.sqrt()), 3f64.sqrt()),
            Family::Beta33 => (-(7f64.sqrt()), 7f64.sqrt()),
            Family::TwoPoint { p } => {
                let s = (p * (1.0 - p)).sqrt();
                (-p / s, (1.0 - p) / s)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Density of the standardized law; `None` for lattice laws.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Family::TwoPoint { .. } => None,
            Family::StandardizedExponential => Some(if x >= -1.0 { (-(x + 1.0)).exp() } else { 0.0 }),
            Family::StandardizedUniform => {
                let a = 3f64.sqrt();
                Some(if x.abs() <= a { 0.5 / a } else { 0.0 })
            }
            _ => self.smooth_density(x).map(|d| d[0]),
        }
    }

    /// `[p, p', p'']` for families whose density is continuously differentiable.
    pub fn smooth_density(&self, x: f64) -> Option<[f64; 3]> {
        match self {
            Family::Gaussian => {
                let p = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
                Some([p, -x * p, (x * x - 1.0) * p])
            }
            Family::Beta33 => {
                let c = 30.0 / 28f64.sqrt();
                if x.abs() >= 7f64.sqrt() {
                    return Some([0.0; 3]);
                }
                let u = 0.25 - x * x / 28.0;
                let du = -x / 14.0;
                Some([c * u * u, 2.0 * c * u * du, 2.0 * c * (du * du - u / 14.0)])
            }
            Family::GaussianMixture { .. } => {
                let mut out = [0.0; 3];
                for c in self.standardized_components() {
                    let z = (x - c.mean) / c.sd;
                    let p = c.weight * (-0.5 * z * z).exp() / (c.sd * (2.0 * PI).sqrt());
                    out[0] += p;
                    out[1] += -z / c.sd * p;
                    out[2] += (z * z - 1.0) / (c.sd * c.sd) * p;
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Characteristic function of the standardized law.
    pub fn cf(&self, t: f64) -> Complex64 {
        self.cf_derivs(t)[0]
    }

    /// `[f(t), f'(t), f''(t)]` of the standardized law.
    pub fn cf_derivs(&self, t: f64) -> [Complex64; 3] {
        let i = Complex64::i();
        match self {
            Family::Gaussian => {
                let f = Complex64::from((-0.5 * t * t).exp());
                [f, f * (-t), f * (t * t - 1.0)]
            }
            Family::StandardizedExponential => {
                let d = Complex64::new(1.0, -t);
                let f = (-i * t).exp() / d;
                let l1 = -i + i / d;
                let l2 = -(d * d).inv();
                [f, f * l1, f * (l1 * l1 + l2)]
            }
            Family::StandardizedUniform => {
                let a = 3f64.sqrt();
                poly_interval_cf_derivs(&[0.5 / a], -a, a, t)
            }
            Family::Beta33 => {
                let c = 30.0 / 28f64.sqrt();
                // c (1/4 − x²/28)² expanded
                let coeffs = [c / 16.0, 0.0, -c / 56.0, 0.0, c / 784.0];
                let a = 7f64.sqrt();
                poly_interval_cf_derivs(&coeffs, -a, a, t)
            }
            Family::TwoPoint { p } => {
                let s = (p * (1.0 - p)).sqrt();
                let (a, b) = (-p / s, (1.0 - p) / s);
                let ea = (i * a * t).exp() * (1.0 - p);
                let eb = (i * b * t).exp() * *p;
                [ea + eb, ea * (i * a) + eb * (i * b), -(ea * a * a + eb * b * b)]
            }
            Family::GaussianMixture { .. } => {
                let mut out = [Complex64::new(0.0, 0.0); 3];
                for c in self.standardized_components() {
                    let v = c.sd * c.sd;
                    let g = (i * c.mean * t - 0.5 * v * t * t).exp() * c.weight;
                    let l1 = i * c.mean - v * t;
                    out[0] += g;
                    out[1] += g * l1;
                    out[2] += g * (l1 * l1 - v);
                }
                out
            }
        }
    }

    /// Draws one standardized variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Family::Gaussian => rng.sample(StandardNormal),
            Family::StandardizedExponential => {
                let e: f64 = rng.sample(Exp1);
                e - 1.0
            }
            Family::StandardizedUniform => (rng.random::<f64>() - 0.5) * 12f64.sqrt(),
            Family::Beta33 => {
                let b = Beta::new(3.0, 3.0).expect("valid beta parameters").sample(rng);
                (b - 0.5) * 28f64.sqrt()
            }
            Family::TwoPoint { p } => {
                let s = (p * (1.0 - p)).sqrt();
                if rng.random::<f64>() < *p {
                    (1.0 - p) / s
                } else {
                    -p / s
                }
            }
            Family::GaussianMixture { .. } => {
                let comps = self.standardized_components();
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = comps.last().expect("validated mixture");
                for c in &comps {
                    acc += c.weight;
                    if u < acc {
                        chosen = c;
                        break;
                    }
                }
                let z: f64 = rng.sample(StandardNormal);
                chosen.mean + chosen.sd * z
            }
        }
    }
}

/// `∫_lo^hi (ix)^m P(x) e^{itx} dx` for `m = 0, 1, 2`, with `P` given by
/// its power coefficients. Repeated integration by parts away from the
/// origin, Taylor series near it.
fn poly_interval_cf_derivs(p: &[f64], lo: f64, hi: f64, t: f64) -> [Complex64; 3] {
    let reach = lo.abs().max(hi.abs());
    let near = (t * reach).abs() < 4.0;
    let i = Complex64::i();
    std::array::from_fn(|m| {
        // R(x) = x^m P(x)
        let mut r = vec![0.0; m];
        r.extend_from_slice(p);
        let integral = if near { poly_cf_series(&r, lo, hi, t) } else { poly_cf_by_parts(&r, lo, hi, t) };
        integral * i.powu(m as u32)
    })
}

/// `Σ_j (it)^j/j! ∫ x^j R(x) dx`, accurate while `|t|·max(|lo|,|hi|)` is small.
fn poly_cf_series(r: &[f64], lo: f64, hi: f64, t: f64) -> Complex64 {
    let i = Complex64::i();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for j in 0..48 {
        if j > 0 {
            term = term * i * t / j as f64;
        }
        let moment: f64 = r
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let e = (j + k + 1) as i32;
                a * (hi.powi(e) - lo.powi(e)) / e as f64
            })
            .sum();
        sum += term * moment;
    }
    sum
}

/// `Σ_k (−1)^k [R^(k)(x) e^{itx}]_lo^hi / (it)^{k+1}`.
fn poly_cf_by_parts(r: &[f64], lo: f64, hi: f64, t: f64) -> Complex64 {
    let it = Complex64::i() * t;
    let (e_hi, e_lo) = ((it * hi).exp(), (it * lo).exp());
    let mut deriv = r.to_vec();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut denom = it;
    let mut sign = 1.0;
    while !deriv.is_empty() {
        let at = |x: f64| deriv.iter().rev().fold(0.0, |acc, a| acc * x + a);
        sum += (e_hi * at(hi) - e_lo * at(lo)) * sign / denom;
        deriv = deriv.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
        denom *= it;
        sign = -sign;
    }
    sum
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Gaussian => write!(f, "gaussian"),
            Family::StandardizedExponential => write!(f, "exponential"),
            Family::StandardizedUniform => write!(f, "uniform"),
            Family::Beta33 => write!(f, "beta33"),
            Family::TwoPoint { p } => write!(f, "two_point:{p}"),
            Family::GaussianMixture { components } => {
                write!(f, "gaussian_mixture:")?;
                for (k, c) in components.iter().enumerate() {
                    if k > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{},{},{}", c.weight, c.mean, c.sd)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Accepts `gaussian`, `exponential`, `uniform`, `beta33`, `bernoulli`,
    /// `two_point:P` and `gaussian_mixture:w,m,s;w,m,s;...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, params) = s.split_once(':').map_or((s, None), |(h, p)| (h, Some(p)));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {v:?} in family {s:?}")));
        let family = match (head, params) {
            ("gaussian" | "normal", None) => Family::Gaussian,
            ("exponential" | "standardized_exponential", None) => Family::StandardizedExponential,
            ("uniform" | "standardized_uniform", None) => Family::StandardizedUniform,
            ("beta33", None) => Family::Beta33,
            ("bernoulli", None) => Family::bernoulli(),
            ("two_point" | "two_point_mixture", Some(p)) => Family::TwoPoint { p: num(p)? },
            ("gaussian_mixture", None) => Family::default_mixture(),
            ("gaussian_mixture", Some(p)) => {
                let components = p
                    .split(';')
                    .map(|c| {
                        let parts: Vec<&str> = c.split(',').collect();
                        match parts.as_slice() {
                            [w, m, sd] => Ok(MixtureComponent { weight: num(w)?, mean: num(m)?, sd: num(sd)? }),
                            _ => Err(Error::Parse(format!("mixture component {c:?} needs weight,mean,sd"))),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Family::GaussianMixture { components }
            }
            _ => return Err(Error::UnknownFamily(s.to_string())),
        };
        family.validate()?;
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_families() -> Vec<Family> {
        vec![
            Family::Gaussian,
            Family::StandardizedExponential,
            Family::StandardizedUniform,
            Family::Beta33,
            Family::TwoPoint { p: 0.3 },
            Family::default_mixture(),
        ]
    }

    #[test]
    fn cf_is_one_at_origin_with_standard_derivatives() {
        for f in all_families() {
            let [f0, f1, f2] = f.cf_derivs(0.0);
            assert!((f0 - 1.0).norm() < 1e-13, "{f}: f(0) = {f0}");
            // f'(0) = i E X = 0, f''(0) = −E X² = −1
            assert!(f1.norm() < 1e-12, "{f}: f'(0) = {f1}");
            assert!((f2 + 1.0).norm() < 1e-12, "{f}: f''(0) = {f2}");
        }
    }

    #[test]
    fn cf_derivatives_match_finite_differences() {
        let h = 1e-5;
        for f in all_families() {
            for t in [0.3, 1.1, 2.9, 4.7, 13.0] {
                let [_, d1, d2] = f.cf_derivs(t);
                let fd1 = (f.cf(t + h) - f.cf(t - h)) / (2.0 * h);
                let fd2 = (f.cf(t + h) - f.cf(t) * 2.0 + f.cf(t - h)) / (h * h);
                assert!((d1 - fd1).norm() < 1e-7, "{f} t={t}: {d1} vs {fd1}");
                assert!((d2 - fd2).norm() < 1e-4, "{f} t={t}: {d2} vs {fd2}");
            }
        }
    }

    #[test]
    fn uniform_cf_closed_form() {
        let a = 3f64.sqrt();
        for t in [0.01, 0.5, 2.0, 2.31, 10.0, 1234.5] {
            let want = (a * t).sin() / (a * t);
            let got = Family::StandardizedUniform.cf(t);
            assert!((got.re - want).abs() < 1e-13 && got.im.abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn series_and_parts_agree_near_switch() {
        let a = 7f64.sqrt();
        let c = 30.0 / 28f64.sqrt();
        let p = [c / 16.0, 0.0, -c / 56.0, 0.0, c / 784.0];
        for m in 0..3 {
            let mut r = vec![0.0; m];
            r.extend_from_slice(&p);
            for tc in [3.0, 4.0, 5.0] {
                let t = tc / a;
                let (s, b) = (poly_cf_series(&r, -a, a, t), poly_cf_by_parts(&r, -a, a, t));
                assert!((s - b).norm() < 1e-12, "m={m} t={t}: {s} vs {b}");
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for f in all_families() {
            let back: Family = f.to_string().parse().unwrap();
            assert_eq!(back, f);
        }
        assert!(matches!("cauchy".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!("two_point:1.5".parse::<Family>().is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for f in all_families().into_iter().filter(|f| !matches!(f, Family::TwoPoint { .. })) {
            let dx = 1e-4;
            let mass: f64 = (-200_000..200_000).map(|k| f.density(k as f64 * dx).unwrap() * dx).sum();
            assert!((mass - 1.0).abs() < 2e-4, "{f}: {mass}");
        }
    }
}
