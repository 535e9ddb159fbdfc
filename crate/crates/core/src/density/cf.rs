use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::grid::{uniform_spacing, DerivativeSource, GridDensity};
use crate::error::{Error, Result};
use crate::family::Family;

/// Largest `n` for which powering an interpolated cf is allowed by default.
pub const MAX_INTERPOLATED_POWER: u32 = 32;

/// Closed-form cf of `Z_n = (X_1 + … + X_n)/√n` for a built-in family.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCf {
    pub family: Family,
    pub n: u32,
}

impl AnalyticCf {
    pub fn new(family: Family, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("n must be at least 1".into()));
        }
        family.validate()?;
        Ok(AnalyticCf { family, n })
    }

    /// `[f_n, f_n', f_n'']` at `t`, from `f_n(t) = f_1(t/√n)^n`.
    pub fn eval(&self, t: f64) -> [Complex64; 3] {
        let n = self.n;
        let rn = (n as f64).sqrt();
        let [f, d1, d2] = self.family.cf_derivs(t / rn);
        if n == 1 {
            return [f, d1, d2];
        }
        let pm2 = f.powi(n as i32 - 2);
        let pm1 = pm2 * f;
        [pm1 * f, pm1 * d1 * rn, pm2 * d1 * d1 * (n - 1) as f64 + pm1 * d2]
    }
}

/// Characteristic function sampled at `t_k = (k − N/2)·dt`, `k = 0..N`.
#[derive(Clone, Debug)]
pub struct CharFunctionGrid {
    dt: f64,
    values: Vec<Complex64>,
    d1: Option<Vec<Complex64>>,
    d2: Option<Vec<Complex64>>,
    analytic: Option<AnalyticCf>,
}

/// Options for Fourier inversion.
#[derive(Clone, Copy, Debug)]
pub struct InvertOptions {
    /// Left end of the output grid.
    pub x0: f64,
    /// Largest allowed estimate of `(1/2π)∫|t|^l |f|` over the outer tenth
    /// of the t-grid.
    pub tail_tolerance: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions { x0: -40.0, tail_tolerance: 1e-10 }
    }
}

impl CharFunctionGrid {
    pub fn from_values(dt: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dt > 0.0) || values.len() < 4 || values.len() % 2 != 0 {
            return Err(Error::InvalidInput("cf grid needs dt > 0 and an even number of points".into()));
        }
        Ok(CharFunctionGrid { dt, values, d1: None, d2: None, analytic: None })
    }

    /// Samples an analytic cf (values and first two derivatives) on `len` points.
    pub fn analytic(cf: AnalyticCf, len: usize, dt: f64) -> Result<Self> {
        let mut g = Self::from_values(dt, vec![Complex64::new(0.0, 0.0); len])?;
        let evals: Vec<[Complex64; 3]> = (0..len).into_par_iter().map(|k| cf.eval(g.t(k))).collect();
        g.values = evals.iter().map(|e| e[0]).collect();
        g.d1 = Some(evals.iter().map(|e| e[1]).collect());
        g.d2 = Some(evals.iter().map(|e| e[2]).collect());
        g.analytic = Some(cf);
        Ok(g)
    }

    /// `f(t) = Σ p(x_j) e^{i t x_j} dx` on the reciprocal grid
    /// `dt = 2π/(N dx)`, with `N` the padded length; `f'` and `f''` come from
    /// the same sum weighted by `ix` and `−x²`.
    pub fn from_density(p: &GridDensity, min_len: usize) -> Self {
        let len = min_len.max(p.len()).next_power_of_two();
        let dt = 2.0 * PI / (len as f64 * p.dx());
        let transform = |weight: &dyn Fn(f64) -> Complex64| -> Vec<Complex64> {
            let mut buf: Vec<Complex64> = (0..len)
                .map(|j| {
                    if j < p.len() {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        weight(p.x(j)) * (p.values()[j] * sign)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
            buf.iter()
                .enumerate()
                .map(|(k, v)| {
                    let t = (k as f64 - (len / 2) as f64) * dt;
                    v * Complex64::from_polar(p.dx(), t * p.x0())
                })
                .collect()
        };
        let one = Complex64::new(1.0, 0.0);
        let values = transform(&|_| one);
        let d1 = transform(&|x| Complex64::new(0.0, x));
        let d2 = transform(&|x| Complex64::new(-x * x, 0.0));
        CharFunctionGrid { dt, values, d1: Some(d1), d2: Some(d2), analytic: None }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest sampled `|t|`.
    pub fn tmax(&self) -> f64 {
        (self.len() / 2) as f64 * self.dt
    }

    pub fn t(&self, k: usize) -> f64 {
        (k as f64 - (self.len() / 2) as f64) * self.dt
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn derivative_values(&self) -> Option<(&[Complex64], &[Complex64])> {
        Some((self.d1.as_deref()?, self.d2.as_deref()?))
    }

    pub fn analytic_form(&self) -> Option<&AnalyticCf> {
        self.analytic.as_ref()
    }

    /// Linear interpolation between grid values; exact when analytic.
    pub fn eval(&self, t: f64) -> Complex64 {
        if let Some(a) = &self.analytic {
            return a.eval(t)[0];
        }
        let u = t / self.dt + (self.len() / 2) as f64;
        if u < 0.0 || u > (self.len() - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i = (u.floor() as usize).min(self.len() - 2);
        let f = u - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// CSV with header `t,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "re", "im"])?;
        for (k, v) in self.values.iter().enumerate() {
            wr.serialize((self.t(k), v.re, v.im))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `t,re,im` CSV laid out as `t_k = (k − N/2)·dt`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for rec in rd.deserialize() {
            let (t, re, im): (f64, f64, f64) = rec?;
            ts.push(t);
            vs.push(Complex64::new(re, im));
        }
        let (t0, dt) = uniform_spacing(&ts)?;
        let g = Self::from_values(dt, vs)?;
        if (t0 - g.t(0)).abs() > 1e-9 * g.tmax() {
            return Err(Error::Parse("cf grid must be laid out as t_k = (k − N/2)·dt".into()));
        }
        Ok(g)
    }
}

/// `f_n(t) = f_1(t/√n)^n` on the same t-grid as `f1`.
///
/// Uses the analytic form when `f1` has one. Otherwise `f1` is linearly
/// interpolated, which is refused for `n > 32` unless `allow_interpolated`.
pub fn normalized_sum_cf(f1: &CharFunctionGrid, n: u32, allow_interpolated: bool) -> Result<CharFunctionGrid> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if let Some(a) = &f1.analytic {
        return CharFunctionGrid::analytic(AnalyticCf::new(a.family.clone(), a.n * n)?, f1.len(), f1.dt);
    }
    if n == 1 {
        return Ok(f1.clone());
    }
    if n > MAX_INTERPOLATED_POWER && !allow_interpolated {
        return Err(Error::InterpolatedPowerRefused { n });
    }
    let rn = (n as f64).sqrt();
    let values = (0..f1.len()).map(|k| f1.eval(f1.t(k) / rn).powi(n as i32)).collect();
    CharFunctionGrid::from_values(f1.dt, values)
}

/// `(dt/2π)·Σ_{|t| ≥ 0.9 tmax} |t|^l |f(t)|`
fn tail_estimate(f: &CharFunctionGrid, l: i32) -> f64 {
    let cut = 0.9 * f.tmax();
    (0..f.len())
        .filter(|&k| f.t(k).abs() >= cut)
        .map(|k| f.t(k).abs().powi(l) * f.values[k].norm())
        .sum::<f64>()
        * f.dt
        / (2.0 * PI)
}

/// Table of `p^{(l)}(x_j) = (1/2π) ∫ (−it)^l e^{−itx_j} f(t) dt` on
/// `x_j = x0 + j·dx`, `dx = 2π/(N dt)`.
pub fn invert_cf(f: &CharFunctionGrid, l: u32, opts: &InvertOptions) -> Result<Vec<f64>> {
    if l > 2 {
        return Err(Error::OutOfRange(format!("derivative order {l} > 2")));
    }
    let tail = tail_estimate(f, l as i32);
    if !(tail < opts.tail_tolerance) {
        return Err(Error::CfTailTooHeavy { tail });
    }
    let len = f.len();
    let mut buf: Vec<Complex64> = (0..len)
        .map(|k| {
            let t = f.t(k);
            let mult = match l {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -t),
                _ => Complex64::new(-t * t, 0.0),
            };
            f.values[k] * mult * Complex64::from_polar(1.0, -t * opts.x0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let scale = f.dt / (2.0 * PI);
    Ok(buf
        .iter()
        .enumerate()
        .map(|(j, v)| if j % 2 == 0 { v.re * scale } else { -v.re * scale })
        .collect())
}

/// Density with spectral `p'` and `p''`. Negative lobes of `p` are clipped
/// to zero, the clipped mass is recorded, and everything is renormalized.
pub fn density_from_cf(f: &CharFunctionGrid, opts: &InvertOptions) -> Result<GridDensity> {
    let mut p = invert_cf(f, 0, opts)?;
    let d1 = invert_cf(f, 1, opts)?;
    let d2 = invert_cf(f, 2, opts)?;
    let dx = 2.0 * PI / (f.len() as f64 * f.dt);
    let mut clipped = 0.0;
    for v in p.iter_mut() {
        if *v < 0.0 {
            clipped -= *v * dx;
            *v = 0.0;
        }
    }
    Ok(GridDensity::new(opts.x0, dx, p)?
        .with_derivatives(d1, d2, DerivativeSource::Spectral)?
        .with_clipped_mass(clipped)
        .normalized()?)
}
