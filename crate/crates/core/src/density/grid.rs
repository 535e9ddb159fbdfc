use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where the derivative tables of a [`GridDensity`] came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    /// Spectral multipliers on the characteristic function.
    Spectral,
    /// Closed-form derivatives of a known density.
    Analytic,
    /// Carried through a convolution from a factor's derivatives.
    Convolution,
    /// Central differences of the sampled values.
    FiniteDifference,
}

/// Density sampled at `x0 + i·dx`, `i = 0..len`.
#[derive(Clone, Debug)]
pub struct GridDensity {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    d1: Option<Vec<f64>>,
    d2: Option<Vec<f64>>,
    source: DerivativeSource,
    clipped_mass: f64,
}

/// Grid shape shared by a density and the report built from it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub x0: f64,
    pub dx: f64,
    pub len: usize,
    pub derivatives: DerivativeSource,
    pub clipped_mass: f64,
}

impl GridDensity {
    /// Takes the samples as given (no normalization).
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) {
            return Err(Error::InvalidInput(format!("grid x0 = {x0}, dx = {dx}")));
        }
        if values.len() < 3 {
            return Err(Error::InvalidInput("grid needs at least 3 points".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("density value {v} is negative or not finite")));
        }
        Ok(GridDensity { x0, dx, values, d1: None, d2: None, source: DerivativeSource::FiniteDifference, clipped_mass: 0.0 })
    }

    /// Samples `f` at `x0 + i·dx` and rescales to unit mass.
    pub fn from_fn(x0: f64, dx: f64, len: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(x0, dx, (0..len).map(|i| f(x0 + i as f64 * dx)).collect())?.normalized()
    }

    /// Samples `[p, p', p'']` and keeps the analytic derivatives.
    pub fn from_smooth_fn(x0: f64, dx: f64, len: usize, f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        let (mut p, mut d1, mut d2) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
        for i in 0..len {
            let [a, b, c] = f(x0 + i as f64 * dx);
            p.push(a);
            d1.push(b);
            d2.push(c);
        }
        Self::new(x0, dx, p)?.with_derivatives(d1, d2, DerivativeSource::Analytic)?.normalized()
    }

    /// Grid covering `[lo, hi]` with margins, widened until the mass outside
    /// the central 90% of the grid is below `1e-6`.
    pub fn covering(lo: f64, hi: f64, dx: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let center = 0.5 * (lo + hi);
        let mut half = 0.5 * (hi - lo) / 0.8;
        for _ in 0..40 {
            let len = (2.0 * half / dx).ceil() as usize + 1;
            let g = Self::from_fn(center - half, dx, len, &f)?;
            if g.mass_outside_center(0.9) < 1e-6 {
                return Ok(g);
            }
            half *= 1.5;
        }
        Err(Error::InvalidInput("density tails too heavy to fit on a grid".into()))
    }

    pub fn with_derivatives(mut self, d1: Vec<f64>, d2: Vec<f64>, source: DerivativeSource) -> Result<Self> {
        if d1.len() != self.values.len() || d2.len() != self.values.len() {
            return Err(Error::InvalidInput("derivative tables must match the grid length".into()));
        }
        self.d1 = Some(d1);
        self.d2 = Some(d2);
        self.source = source;
        Ok(self)
    }

    pub(crate) fn with_clipped_mass(mut self, clipped: f64) -> Self {
        self.clipped_mass = clipped;
        self
    }

    /// Rescales values (and derivatives) to unit mass.
    pub fn normalized(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::InvalidInput("density has zero mass".into()));
        }
        let inv = 1.0 / m;
        self.values.iter_mut().for_each(|v| *v *= inv);
        for d in [&mut self.d1, &mut self.d2].into_iter().flatten() {
            d.iter_mut().for_each(|v| *v *= inv);
        }
        Ok(self)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.x(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn clipped_mass(&self) -> f64 {
        self.clipped_mass
    }

    pub fn derivative_source(&self) -> DerivativeSource {
        self.source
    }

    pub fn has_derivatives(&self) -> bool {
        self.d1.is_some()
    }

    pub fn meta(&self) -> GridMeta {
        GridMeta { x0: self.x0, dx: self.dx, len: self.len(), derivatives: self.source, clipped_mass: self.clipped_mass }
    }

    /// `p'`: stored table, or central differences when none is stored.
    pub fn d1(&self) -> Vec<f64> {
        self.d1.clone().unwrap_or_else(|| central_first(&self.values, self.dx))
    }

    /// `p''`: stored table, or central differences when none is stored.
    pub fn d2(&self) -> Vec<f64> {
        self.d2.clone().unwrap_or_else(|| central_second(&self.values, self.dx))
    }

    pub(crate) fn stored_d1(&self) -> Option<&[f64]> {
        self.d1.as_deref()
    }

    pub(crate) fn stored_d2(&self) -> Option<&[f64]> {
        self.d2.as_deref()
    }

    /// `Σ p·dx`
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx
    }

    pub fn mean(&self) -> f64 {
        self.xs().zip(&self.values).map(|(x, p)| x * p).sum::<f64>() * self.dx / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.xs().zip(&self.values).map(|(x, p)| (x - m).powi(2) * p).sum::<f64>() * self.dx / self.mass()
    }

    /// `E|X|^s` on the grid.
    pub fn abs_moment(&self, s: f64) -> f64 {
        self.xs().zip(&self.values).map(|(x, p)| x.abs().powf(s) * p).sum::<f64>() * self.dx / self.mass()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Mass outside the central `frac` of the grid.
    pub fn mass_outside_center(&self, frac: f64) -> f64 {
        let n = self.len();
        let cut = ((1.0 - frac) * 0.5 * n as f64).floor() as usize;
        let outside: f64 = self.values[..cut].iter().chain(&self.values[n - cut..]).sum();
        outside * self.dx / self.mass()
    }

    /// Linear interpolation, zero off the grid.
    pub fn eval(&self, x: f64) -> f64 {
        interpolate(&self.values, self.x0, self.dx, x)
    }

    /// Density of `a·X + b` for `a > 0`: exact relabelling of the grid.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidInput(format!("scale {a} must be positive")));
        }
        let scale = |v: &Vec<f64>, p: i32| v.iter().map(|x| x / a.powi(p)).collect::<Vec<_>>();
        Ok(GridDensity {
            x0: a * self.x0 + b,
            dx: a * self.dx,
            values: scale(&self.values, 1),
            d1: self.d1.as_ref().map(|d| scale(d, 2)),
            d2: self.d2.as_ref().map(|d| scale(d, 3)),
            source: self.source,
            clipped_mass: self.clipped_mass,
        })
    }

    /// Affine image with zero mean and unit variance.
    pub fn standardize(&self) -> Result<Self> {
        let var = self.variance();
        if !(var > 1e-300) {
            return Err(Error::DegenerateDistribution);
        }
        let sd = var.sqrt();
        self.affine(1.0 / sd, -self.mean() / sd)
    }

    /// Linear resampling onto a new grid; derivatives are resampled too.
    pub fn resample(&self, x0: f64, dx: f64, len: usize) -> Result<Self> {
        let take = |v: &[f64]| (0..len).map(|i| interpolate(v, self.x0, self.dx, x0 + i as f64 * dx)).collect::<Vec<_>>();
        let mut g = GridDensity::new(x0, dx, take(&self.values))?;
        if let (Some(a), Some(b)) = (&self.d1, &self.d2) {
            g = g.with_derivatives(take(a), take(b), self.source)?;
        }
        g.normalized()
    }

    /// Mixture `α p + (1 − α) q` on a common grid.
    pub fn mix(&self, other: &GridDensity, alpha: f64) -> Result<Self> {
        if self.len() != other.len() || self.x0 != other.x0 || self.dx != other.dx {
            return Err(Error::InvalidInput("mixture components must share a grid".into()));
        }
        let comb = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect::<Vec<_>>();
        let g = GridDensity::new(self.x0, self.dx, comb(&self.values, &other.values))?;
        match (&self.d1, &self.d2, &other.d1, &other.d2) {
            (Some(a1), Some(a2), Some(b1), Some(b2)) => g.with_derivatives(comb(a1, b1), comb(a2, b2), self.source),
            _ => Ok(g),
        }
    }

    /// CSV with header `x,p`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "p"])?;
        for (x, p) in self.xs().zip(&self.values) {
            wr.serialize((x, p))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `x,p` CSV; `x` must be equally spaced.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut xs = Vec::new();
        let mut ps = Vec::new();
        for rec in rd.deserialize() {
            let (x, p): (f64, f64) = rec?;
            xs.push(x);
            ps.push(p);
        }
        let (x0, dx) = uniform_spacing(&xs)?;
        GridDensity::new(x0, dx, ps)
    }
}

/// Checks equal spacing and returns `(first, step)`.
pub(crate) fn uniform_spacing(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::Parse("need at least two grid points".into()));
    }
    let n = xs.len();
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let tol = 1e-9 * dx.abs().max(xs[0].abs().max(xs[n - 1].abs()) * 1e-6);
    for (i, x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * dx)).abs() > tol.max(1e-12 * dx.abs() * n as f64) {
            return Err(Error::Parse(format!("grid point {i} ({x}) breaks uniform spacing")));
        }
    }
    Ok((xs[0], dx))
}

fn interpolate(v: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let u = (x - x0) / dx;
    if u < 0.0 || u > (v.len() - 1) as f64 {
        return 0.0;
    }
    let i = (u.floor() as usize).min(v.len() - 2);
    let f = u - i as f64;
    v[i] * (1.0 - f) + v[i + 1] * f
}

/// Central first difference, zero outside the grid.
pub(crate) fn central_first(p: &[f64], dx: f64) -> Vec<f64> {
    let at = |i: isize| if i < 0 || i as usize >= p.len() { 0.0 } else { p[i as usize] };
    (0..p.len() as isize).map(|i| (at(i + 1) - at(i - 1)) / (2.0 * dx)).collect()
}

/// Central second difference, zero outside the grid.
pub(crate) fn central_second(p: &[f64], dx: f64) -> Vec<f64> {
    let at = |i: isize| if i < 0 || i as usize >= p.len() { 0.0 } else { p[i as usize] };
    (0..p.len() as isize).map(|i| (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (dx * dx)).collect()
}
