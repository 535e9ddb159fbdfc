//! Finite-window diagnostics for the decay of a characteristic function.
//! These are heuristic verdicts about asymptotic properties, not proofs.

use serde::Serialize;

use super::cf::CharFunctionGrid;
use crate::error::{Error, Result};

/// Least-squares slope `ε̂` of `log sup_{τ≥t} |f(τ)|` against `−log t`
/// over `window`, sampled at 200 log-spaced points.
pub fn decay_exponent(f: &CharFunctionGrid, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi <= f.tmax() * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange(format!("window ({lo}, {hi}) outside (0, {}]", f.tmax())));
    }
    // running supremum over t ≥ 0, from the right edge inward
    let mid = f.len() / 2;
    let vals = f.values();
    let mut sup = vec![0.0; f.len() - mid];
    let mut acc: f64 = 0.0;
    for k in (mid..f.len()).rev() {
        acc = acc.max(vals[k].norm());
        sup[k - mid] = acc;
    }
    let samples = 200;
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut pts = Vec::with_capacity(samples);
    for s in 0..samples {
        let t = (llo + (lhi - llo) * s as f64 / (samples - 1) as f64).exp();
        let k = ((t / f.dt()).round() as usize).min(sup.len() - 1);
        pts.push((-t.ln(), sup[k].max(1e-300).ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Result of [`weighted_cf_integral`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedIntegral {
    /// Grid integral plus extrapolated tail; infinite when divergent.
    pub value: f64,
    pub finite: bool,
    pub decay_exponent: f64,
}

/// Window used by [`weighted_cf_integral`] when none is given.
pub fn default_window(f: &CharFunctionGrid) -> (f64, f64) {
    (f.tmax() / 100.0, f.tmax())
}

/// `∫ |f(t)|^ν |t| dt` over the grid plus a power-law tail
/// `2 A^ν T^{2−νε̂}/(νε̂ − 2)` beyond `T = tmax`; finite iff `ν ε̂ > 2`.
pub fn weighted_cf_integral(f: &CharFunctionGrid, nu: f64) -> Result<WeightedIntegral> {
    weighted_cf_integral_in(f, nu, default_window(f))
}

pub fn weighted_cf_integral_in(f: &CharFunctionGrid, nu: f64, window: (f64, f64)) -> Result<WeightedIntegral> {
    if !(nu > 0.0) {
        return Err(Error::InvalidInput(format!("ν = {nu} must be positive")));
    }
    let eps = decay_exponent(f, window)?;
    let finite = nu * eps > 2.0;
    if !finite {
        return Ok(WeightedIntegral { value: f64::INFINITY, finite, decay_exponent: eps });
    }
    let body: f64 = (0..f.len()).map(|k| f.values()[k].norm().powf(nu) * f.t(k).abs()).sum::<f64>() * f.dt();
    // mean of |f|^ν t^{νε̂} over the upper half of the window estimates A^ν,
    // averaging over oscillation
    let t_end = window.1;
    let upper: Vec<f64> = (0..f.len())
        .filter(|&k| f.t(k) >= 0.5 * t_end && f.t(k) <= t_end)
        .map(|k| f.values()[k].norm().powf(nu) * f.t(k).powf(nu * eps))
        .collect();
    let amp_nu = upper.iter().sum::<f64>() / upper.len().max(1) as f64;
    let tail = 2.0 * amp_nu * f.tmax().powf(2.0 - nu * eps) / (nu * eps - 2.0);
    Ok(WeightedIntegral { value: body + tail, finite, decay_exponent: eps })
}
