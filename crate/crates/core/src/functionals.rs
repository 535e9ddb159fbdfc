//! Information functionals of grid densities.
//!
//! Every integral runs over `{p > threshold}` with the threshold taken
//! relative to `max p` (default [`DEFAULT_REL_THRESHOLD`]); the mass left
//! out is reported alongside the value. Logarithms are natural.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{GridDensity, GridMeta};
use crate::error::{Error, Result};

/// Default positivity threshold, relative to `max p`.
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-12;

/// A functional value with the positivity threshold that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub value: f64,
    /// Absolute threshold used.
    pub threshold: f64,
    /// Mass on `{p ≤ threshold}`.
    pub excluded_mass: f64,
    pub grid: GridMeta,
}

struct Support {
    threshold: f64,
    excluded_mass: f64,
}

fn support(p: &GridDensity, rel_threshold: f64) -> Support {
    let threshold = rel_threshold * p.max();
    let excluded_mass = p.values().iter().filter(|v| **v <= threshold).sum::<f64>() * p.dx();
    Support { threshold, excluded_mass }
}

fn report(p: &GridDensity, s: &Support, value: f64) -> FunctionalReport {
    FunctionalReport { value, threshold: s.threshold, excluded_mass: s.excluded_mass, grid: p.meta() }
}

/// `I(p) = ∫ p'²/p`
pub fn fisher_information(p: &GridDensity, rel_threshold: f64) -> FunctionalReport {
    let s = support(p, rel_threshold);
    let d1 = p.d1();
    let value = p
        .values()
        .iter()
        .zip(&d1)
        .filter(|(v, _)| **v > s.threshold)
        .map(|(v, d)| d * d / v)
        .sum::<f64>()
        * p.dx();
    report(p, &s, value)
}

/// Score `ρ = p'/p`, `None` where `p ≤ threshold`.
pub fn score(p: &GridDensity, rel_threshold: f64) -> Vec<Option<f64>> {
    let s = support(p, rel_threshold);
    p.values().iter().zip(p.d1()).map(|(v, d)| (*v > s.threshold).then(|| d / v)).collect()
}

/// `I(X||Z) = ∫ (p'/p + (x − a)/σ²)² p` against the Gaussian with the
/// density's own mean `a` and variance `σ²`.
pub fn relative_fisher(p: &GridDensity, rel_threshold: f64) -> FunctionalReport {
    let s = support(p, rel_threshold);
    let value = relative_fisher_terms(p, &s).iter().sum::<f64>() * p.dx();
    report(p, &s, value)
}

/// Pointwise integrand of [`relative_fisher`] (without `dx`), zero off the support.
pub(crate) fn relative_fisher_integrand(p: &GridDensity, rel_threshold: f64) -> Vec<f64> {
    relative_fisher_terms(p, &support(p, rel_threshold))
}

fn relative_fisher_terms(p: &GridDensity, s: &Support) -> Vec<f64> {
    let (a, var) = (p.mean(), p.variance());
    let d1 = p.d1();
    (0..p.len())
        .map(|i| {
            let v = p.values()[i];
            if v <= s.threshold {
                return 0.0;
            }
            let r = d1[i] + (p.x(i) - a) / var * v;
            r * r / v
        })
        .collect()
}

/// `D(X||Z) = ∫ p log(p/φ_{a,σ})` against the moment-matched Gaussian.
pub fn entropic_distance(p: &GridDensity, rel_threshold: f64) -> FunctionalReport {
    let s = support(p, rel_threshold);
    let (a, var) = (p.mean(), p.variance());
    let log_norm = 0.5 * (2.0 * PI * var).ln();
    let value = (0..p.len())
        .filter(|&i| p.values()[i] > s.threshold)
        .map(|i| {
            let v = p.values()[i];
            let log_phi = -log_norm - (p.x(i) - a).powi(2) / (2.0 * var);
            v * (v.ln() - log_phi)
        })
        .sum::<f64>()
        * p.dx();
    report(p, &s, value.max(0.0))
}

/// `Σ |p(x_{i+1}) − p(x_i)|`, counting the jumps from and to zero off the grid.
pub fn total_variation_norm(p: &GridDensity) -> f64 {
    tv_of(p.values())
}

fn tv_of(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() + v[0].abs() + v[v.len() - 1].abs()
}

/// Total variation norm of the function `p − q`, on `p`'s grid.
pub fn tv_distance(p: &GridDensity, q: &GridDensity) -> f64 {
    let diff: Vec<f64> = p.xs().zip(p.values()).map(|(x, v)| v - q.eval(x)).collect();
    tv_of(&diff)
}

/// Total variation norm of `p − φ_{a,σ}` for the moment-matched Gaussian.
pub fn tv_distance_to_gaussian(p: &GridDensity) -> f64 {
    let (a, sd) = (p.mean(), p.variance().sqrt());
    let diff: Vec<f64> = p
        .xs()
        .zip(p.values())
        .map(|(x, v)| v - crate::edgeworth::phi((x - a) / sd) / sd)
        .collect();
    tv_of(&diff)
}

/// Number of points on the uniform t-grid of [`fisher_via_quantile`].
pub const QUANTILE_POINTS: usize = 1 << 20;

/// `I = ∫_0^1 L'(t)² dt` with `L(t) = p(F^{−1}(t))`.
///
/// `F` is the cumulative trapezoid sum, inverted monotonically with linear
/// interpolation; `L'²` is integrated from cell differences. Power-law
/// behaviour `L ~ t^α` in the end cells is integrated in closed form.
pub fn fisher_via_quantile(p: &GridDensity, rel_threshold: f64) -> Result<f64> {
    let s = support(p, rel_threshold);
    let v = p.values();
    let first = v.iter().position(|x| *x > s.threshold).ok_or_else(|| Error::QuantileInapplicable("empty support".into()))?;
    let last = v.iter().rposition(|x| *x > s.threshold).expect("nonempty");
    if let Some(i) = (first..=last).find(|&i| v[i] <= 0.0) {
        return Err(Error::QuantileInapplicable(format!("density vanishes at interior point x = {}", p.x(i))));
    }
    // cumulative distribution at grid points
    let lo = first.saturating_sub(1);
    let hi = (last + 1).min(v.len() - 1);
    let mut cdf = Vec::with_capacity(hi - lo + 1);
    cdf.push(0.0);
    for i in lo + 1..=hi {
        cdf.push(cdf.last().unwrap() + 0.5 * (v[i - 1] + v[i]) * p.dx());
    }
    let total = *cdf.last().unwrap();
    cdf.iter_mut().for_each(|c| *c /= total);

    let m = QUANTILE_POINTS;
    let dt = 1.0 / m as f64;
    let mut l = Vec::with_capacity(m + 1);
    let mut cell = 0;
    for k in 0..=m {
        let t = k as f64 * dt;
        while cell + 1 < cdf.len() - 1 && cdf[cell + 1] < t {
            cell += 1;
        }
        let (c0, c1) = (cdf[cell], cdf[cell + 1]);
        let frac = if c1 > c0 { ((t - c0) / (c1 - c0)).clamp(0.0, 1.0) } else { 0.0 };
        l.push(v[lo + cell] * (1.0 - frac) + v[lo + cell + 1] * frac);
    }
    let mut sum: f64 = l.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / dt;
    // end cells: L(t) − L(0) ≈ C t^α ⇒ ∫_0^{dt} L'² = α² (ΔL)²/((2α − 1) dt)
    let mut end_cell = |a0: f64, a1: f64, a2: f64| {
        let (d1, d2) = (a1 - a0, a2 - a0);
        if d1.abs() > 0.0 && d2 / d1 > 0.0 {
            let alpha = (d2 / d1).ln() / 2f64.ln();
            if alpha > 0.5 && alpha < 1.0 {
                sum += (alpha * alpha / (2.0 * alpha - 1.0) - 1.0) * d1 * d1 / dt;
            }
        }
    };
    end_cell(l[0], l[1], l[2]);
    end_cell(l[m], l[m - 1], l[m - 2]);
    Ok(sum)
}

/// `I = −∫ p'' log p` over `{p > threshold}`, with `0·log 0 = 0`.
pub fn fisher_via_second_derivative(p: &GridDensity, rel_threshold: f64) -> FunctionalReport {
    let s = support(p, rel_threshold);
    let d2 = p.d2();
    let value = -p
        .values()
        .iter()
        .zip(&d2)
        .filter(|(v, _)| **v > s.threshold)
        .map(|(v, d)| d * v.ln())
        .sum::<f64>()
        * p.dx();
    report(p, &s, value)
}

/// Outcome of a grid-refinement study of the Fisher information.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementVerdict {
    Converged,
    Diverging,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub dx: Vec<f64>,
    pub values: Vec<f64>,
    /// `values[i+1] / values[i]`
    pub ratios: Vec<f64>,
    pub verdict: RefinementVerdict,
}

/// Computes `I` on grids `dx0, dx0/2, …` (`levels` of them, at least 3)
/// concurrently. Converging values have shrinking increments (or a last
/// relative change under `1e-3`); increments that stay comparable indicate
/// divergence under refinement.
pub fn refinement_study(
    build: impl Fn(f64) -> Result<GridDensity> + Sync,
    dx0: f64,
    levels: usize,
    rel_threshold: f64,
) -> Result<RefinementStudy> {
    let levels = levels.max(3);
    let dx: Vec<f64> = (0..levels).map(|k| dx0 / 2f64.powi(k as i32)).collect();
    let values = dx
        .par_iter()
        .map(|&h| build(h).map(|p| fisher_information(&p, rel_threshold).value))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let n = values.len();
    let (d_prev, d_last) = (values[n - 2] - values[n - 3], values[n - 1] - values[n - 2]);
    let converged = (d_last / values[n - 1]).abs() < 1e-3 || d_last.abs() <= 0.6 * d_prev.abs();
    let verdict = if converged { RefinementVerdict::Converged } else { RefinementVerdict::Diverging };
    Ok(RefinementStudy { dx, values, ratios, verdict })
}
