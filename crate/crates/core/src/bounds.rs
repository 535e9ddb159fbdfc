//! Explicit upper bounds on the Fisher information of three-fold sums:
//! from interval lengths, from total-variation norms, and from
//! characteristic-function integrals.

use num_complex::Complex64;
use serde::Serialize;

use crate::decompose::StepDensity;
use crate::density::{CharFunctionGrid, GridDensity};
use crate::error::{Error, Result};
use crate::functionals::total_variation_norm;
use crate::scalar::Scalar;

/// `I(U_1 + U_2 + U_3) ≤ 2[1/(a_1a_2) + 1/(a_1a_3) + 1/(a_2a_3)]` for
/// independent uniforms on intervals of lengths `a_i > 0`.
pub fn three_uniform_fisher_bound(a1: f64, a2: f64, a3: f64) -> f64 {
    2.0 * (1.0 / (a1 * a2) + 1.0 / (a1 * a3) + 1.0 / (a2 * a3))
}

/// Densities with a computable total variation norm.
pub trait TotalVariation {
    fn tv_norm(&self) -> f64;
}

impl TotalVariation for StepDensity {
    fn tv_norm(&self) -> f64 {
        self.total_variation().to_f64()
    }
}

impl TotalVariation for GridDensity {
    fn tv_norm(&self) -> f64 {
        total_variation_norm(self)
    }
}

impl TotalVariation for f64 {
    fn tv_norm(&self) -> f64 {
        *self
    }
}

/// `½(T_1T_2 + T_1T_3 + T_2T_3)` with `T_i = ‖p_i‖_TV`.
pub fn tv_product_fisher_bound(p1: &impl TotalVariation, p2: &impl TotalVariation, p3: &impl TotalVariation) -> f64 {
    let (t1, t2, t3) = (p1.tv_norm(), p2.tv_norm(), p3.tv_norm());
    0.5 * (t1 * t2 + t1 * t3 + t2 * t3)
}

/// A bound that is either a number or could not be established because an
/// integral does not converge on the available grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CfBound {
    Finite { value: f64 },
    Inapplicable { reason: String },
}

impl CfBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            CfBound::Finite { value } => Some(*value),
            CfBound::Inapplicable { .. } => None,
        }
    }
}

/// Power-law exponent an integrand must exceed for its tail to be counted
/// as convergent.
const MIN_TAIL_EXPONENT: f64 = 1.2;

/// `∫ g(t) dt` for `g ≥ 0` sampled on the cf grid, with a power-law tail
/// beyond `tmax`. `None` when the envelope of `g` decays too slowly.
fn integral_with_tail(f: &CharFunctionGrid, g: &[f64]) -> Option<f64> {
    let dt = f.dt();
    let body: f64 = g.iter().sum::<f64>() * dt;
    let tmax = f.tmax();
    let (lo, hi) = (tmax / 100.0, tmax);
    // envelope: running sup of g over |τ| ≥ |t|, from the outside in
    let mid = f.len() / 2;
    let mut env = vec![0.0f64; f.len() - mid];
    let mut acc: f64 = 0.0;
    for k in (0..f.len() - mid).rev() {
        let right = g[mid + k];
        let left = if mid >= k { g[mid - k] } else { 0.0 };
        acc = acc.max(right).max(left);
        env[k] = acc;
    }
    let at = |t: f64| env[((t / dt).round() as usize).min(env.len() - 1)];
    if at(lo) * tmax <= 1e-14 * body.max(f64::MIN_POSITIVE) {
        return Some(body);
    }
    let samples = 200;
    let pts: Vec<(f64, f64)> = (0..samples)
        .map(|s| {
            let t = (lo.ln() + (hi.ln() - lo.ln()) * s as f64 / (samples - 1) as f64).exp();
            (t.ln(), at(t).max(1e-300).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let alpha = -sxy / sxx;
    if !(alpha > MIN_TAIL_EXPONENT) {
        return None;
    }
    let upper: Vec<f64> = (0..f.len())
        .filter(|&k| f.t(k).abs() >= 0.5 * hi)
        .map(|k| g[k] * f.t(k).abs().powf(alpha))
        .collect();
    let amp = upper.iter().sum::<f64>() / upper.len().max(1) as f64;
    Some(body + 2.0 * amp * tmax.powf(1.0 - alpha) / (alpha - 1.0))
}

fn derivatives(f: &CharFunctionGrid) -> Result<(&[Complex64], &[Complex64])> {
    f.derivative_values()
        .ok_or_else(|| Error::InvalidInput("cf grid carries no derivative tables".into()))
}

/// `½∫(|t f''| + 2|f'| + |t f|) dt`, an upper bound on `‖p‖_TV`.
pub fn cf_tv_bound_first(f: &CharFunctionGrid) -> Result<CfBound> {
    let (d1, d2) = derivatives(f)?;
    let g: Vec<f64> = (0..f.len())
        .map(|k| {
            let t = f.t(k).abs();
            t * d2[k].norm() + 2.0 * d1[k].norm() + t * f.values()[k].norm()
        })
        .collect();
    Ok(match integral_with_tail(f, &g) {
        Some(v) => CfBound::Finite { value: 0.5 * v },
        None => CfBound::Inapplicable { reason: "∫(|tf''| + 2|f'| + |tf|) diverges".into() },
    })
}

/// `(∫|t f|² dt · ∫|(t f)'|² dt)^{1/4}`, an upper bound on `‖p‖_TV`.
pub fn cf_tv_bound_second(f: &CharFunctionGrid) -> Result<CfBound> {
    let (d1, _) = derivatives(f)?;
    let g1: Vec<f64> = (0..f.len()).map(|k| (f.t(k) * f.values()[k]).norm_sqr()).collect();
    let g2: Vec<f64> = (0..f.len()).map(|k| (f.values()[k] + f.t(k) * d1[k]).norm_sqr()).collect();
    Ok(match (integral_with_tail(f, &g1), integral_with_tail(f, &g2)) {
        (Some(a), Some(b)) => CfBound::Finite { value: (a * b).powf(0.25) },
        _ => CfBound::Inapplicable { reason: "∫|tf|² or ∫|(tf)'|² diverges".into() },
    })
}

/// Fisher bounds for the sum of three independent copies of a variable with
/// cf `f`: `(3/2)·B²` for each applicable TV bound `B`, and their minimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreeFoldCfBound {
    pub from_first: CfBound,
    pub from_second: CfBound,
    pub best: Option<f64>,
}

pub fn three_fold_cf_fisher_bound(f: &CharFunctionGrid) -> Result<ThreeFoldCfBound> {
    let lift = |b: CfBound| match b {
        CfBound::Finite { value } => CfBound::Finite { value: 1.5 * value * value },
        other => other,
    };
    let from_first = lift(cf_tv_bound_first(f)?);
    let from_second = lift(cf_tv_bound_second(f)?);
    let best = [from_first.value(), from_second.value()].into_iter().flatten().reduce(f64::min);
    Ok(ThreeFoldCfBound { from_first, from_second, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{convolve, density_from_cf, AnalyticCf, InvertOptions};
    use crate::family::Family;
    use crate::functionals::{fisher_information, DEFAULT_REL_THRESHOLD};
    use crate::scalar::rat;

    fn cf(family: Family, n: u32) -> CharFunctionGrid {
        CharFunctionGrid::analytic(AnalyticCf::new(family, n).unwrap(), 1 << 16, std::f64::consts::PI / 40.0).unwrap()
    }

    fn uniform_grid(len: f64, m: usize) -> GridDensity {
        let dx = 1.0 / m as f64;
        GridDensity::from_fn(0.0, dx, (len * m as f64).round() as usize + 1, |x| if x < len { 1.0 / len } else { 0.0 })
            .unwrap()
    }

    #[test]
    fn three_uniform_values() {
        assert_eq!(three_uniform_fisher_bound(1.0, 1.0, 1.0), 6.0);
        let (a, c) = ([0.5, 1.0, 2.0], 3.0);
        let base = three_uniform_fisher_bound(a[0], a[1], a[2]);
        let scaled = three_uniform_fisher_bound(c * a[0], c * a[1], c * a[2]);
        assert!((scaled - base / (c * c)).abs() < 1e-12);
    }

    #[test]
    fn three_uniform_numeric_below_bound() {
        let u = uniform_grid(1.0, 1024);
        let s = convolve(&convolve(&u, &u).unwrap(), &u).unwrap();
        let i = fisher_information(&s, DEFAULT_REL_THRESHOLD).value;
        assert!(i <= 6.0 + 1e-3, "{i}");
        let tv = total_variation_norm(&u);
        assert!((tv_product_fisher_bound(&tv, &tv, &tv) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn tv_product_on_step_densities() {
        let u = StepDensity::new(vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1)]).unwrap();
        assert_eq!(tv_product_fisher_bound(&u, &u, &u), 6.0);
        let p = StepDensity::new(vec![rat(0, 1), rat(1, 1), rat(3, 2)], vec![rat(2, 5), rat(6, 5)]).unwrap();
        let q = StepDensity::normalized(vec![rat(-1, 1), rat(0, 1), rat(2, 1)], vec![rat(3, 1), rat(1, 1)]).unwrap();
        let t = p.tv_norm();
        assert!((tv_product_fisher_bound(&p, &p, &p) - 1.5 * t * t).abs() < 1e-12);
        let dx = 1.0 / 1024.0;
        let (gp, gq) = (p.to_grid(dx).unwrap(), q.to_grid(dx).unwrap());
        let s = convolve(&convolve(&gp, &gq).unwrap(), &gp).unwrap();
        let i = fisher_information(&s, DEFAULT_REL_THRESHOLD).value;
        assert!(i <= tv_product_fisher_bound(&p, &q, &p) + 1e-3);
    }

    #[test]
    fn gaussian_cf_bound_dominates_tv() {
        let f = cf(Family::Gaussian, 1);
        let tv = 2.0 * crate::edgeworth::phi(0.0);
        let second = cf_tv_bound_second(&f).unwrap().value().unwrap();
        // ∫t²e^{−t²} = √π/2 and ∫(1 − t²)²e^{−t²} = 3√π/4
        let pi = std::f64::consts::PI;
        let want = (pi.sqrt() / 2.0 * 3.0 * pi.sqrt() / 4.0).powf(0.25);
        assert!((second - want).abs() < 1e-10, "{second} vs {want}");
        assert!(second >= tv);
        let first = cf_tv_bound_first(&f).unwrap().value().unwrap();
        assert!(first >= tv);
    }

    #[test]
    fn uniform_first_bound_inapplicable() {
        let f = cf(Family::StandardizedUniform, 1);
        assert!(matches!(cf_tv_bound_first(&f).unwrap(), CfBound::Inapplicable { .. }));
    }

    #[test]
    fn three_fold_exponential_pair() {
        // X_i = Z_2 of the exponential family; X_1 + X_2 + X_3 = √3·Z_6
        let b = three_fold_cf_fisher_bound(&cf(Family::StandardizedExponential, 2)).unwrap();
        assert!(matches!(b.from_first, CfBound::Inapplicable { .. }));
        let best = b.best.expect("second bound applies");
        let opts = InvertOptions { tail_tolerance: 1e-8, ..InvertOptions::default() };
        let z6 = density_from_cf(&cf(Family::StandardizedExponential, 6), &opts).unwrap();
        let i = fisher_information(&z6, DEFAULT_REL_THRESHOLD).value / 3.0;
        assert!(best >= i, "{best} < {i}");
        assert!(cf_tv_bound_second(&CharFunctionGrid::from_values(1.0, vec![Complex64::new(1.0, 0.0); 8]).unwrap())
            .is_err());
    }
}
