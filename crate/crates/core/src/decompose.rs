//! Exact decomposition of step densities into mixtures of uniform densities
//! with the same total variation.
//!
//! All arithmetic is over [`Rational`], so reconstruction and the
//! total-variation identity `‖p‖_TV = Σ w_i·2/(b_i − a_i)` are checked as
//! equalities.

use std::fmt;
use std::path::Path;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

/// Piecewise-constant density: `values[k]` on `[breakpoints[k], breakpoints[k+1])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepDensity {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl StepDensity {
    /// Validates ordering, nonnegativity and unit mass.
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        let p = Self::unchecked_mass(breakpoints, values)?;
        if !p.mass().is_one() {
            return Err(Error::InvalidInput(format!("step density has mass {}", p.mass())));
        }
        Ok(p)
    }

    /// Rescales nonnegative heights to unit mass.
    pub fn normalized(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        let p = Self::unchecked_mass(breakpoints, values)?;
        let m = p.mass();
        if m.is_zero() {
            return Err(Error::InvalidInput("step density has zero mass".into()));
        }
        let values = p.values.iter().map(|v| v / &m).collect();
        Ok(StepDensity { breakpoints: p.breakpoints, values })
    }

    fn unchecked_mass(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints for {} cells",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("breakpoints must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidInput("step heights must be nonnegative".into()));
        }
        Ok(StepDensity { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    pub fn mass(&self) -> Rational {
        self.values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(c, w)| c * (&w[1] - &w[0]))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// `c_1 + Σ |c_{k+1} − c_k| + c_n`
    pub fn total_variation(&self) -> Rational {
        let v = &self.values;
        let inner = v.windows(2).map(|w| (&w[1] - &w[0]).abs()).fold(Rational::zero(), |a, b| a + b);
        inner + &v[0] + &v[v.len() - 1]
    }

    /// Right-continuous value at `x`.
    pub fn eval(&self, x: &Rational) -> Rational {
        let b = &self.breakpoints;
        if x < &b[0] || x >= &b[b.len() - 1] {
            return Rational::zero();
        }
        let k = b.partition_point(|t| t <= x) - 1;
        self.values[k].clone()
    }

    /// Samples the density at `x0 + i·dx` as a grid density covering the support.
    pub fn to_grid(&self, dx: f64) -> Result<GridDensity> {
        let lo = crate::scalar::Scalar::to_f64(&self.breakpoints[0]);
        let hi = crate::scalar::Scalar::to_f64(&self.breakpoints[self.breakpoints.len() - 1]);
        let x0 = lo - dx;
        let len = ((hi - lo) / dx).ceil() as usize + 3;
        let b: Vec<f64> = self.breakpoints.iter().map(crate::scalar::Scalar::to_f64).collect();
        let c: Vec<f64> = self.values.iter().map(crate::scalar::Scalar::to_f64).collect();
        GridDensity::from_fn(x0, dx, len, |x| {
            if x < b[0] || x >= b[b.len() - 1] {
                0.0
            } else {
                c[b.partition_point(|t| *t <= x) - 1]
            }
        })
    }

    /// Reads `{"breakpoints": [...], "values": [...]}` with entries given as
    /// rational strings (`"3/5"`, `"0.4"`) or integers.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Repr {
            breakpoints: Vec<serde_json::Value>,
            values: Vec<serde_json::Value>,
            #[serde(default)]
            normalize: bool,
        }
        let r: Repr = serde_json::from_str(text)?;
        let conv = |v: &serde_json::Value| -> Result<Rational> {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) if n.is_i64() => n.to_string(),
                other => {
                    return Err(Error::Parse(format!(
                        "expected a rational string or integer, got {other}; write decimals as strings"
                    )))
                }
            };
            parse_rational(&s).ok_or_else(|| Error::Parse(format!("not a rational: {s:?}")))
        };
        let b = r.breakpoints.iter().map(conv).collect::<Result<Vec<_>>>()?;
        let v = r.values.iter().map(conv).collect::<Result<Vec<_>>>()?;
        if r.normalize {
            Self::normalized(b, v)
        } else {
            Self::new(b, v)
        }
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// The uniform density on `[a, b)` with mixture weight `weight`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ComponentRepr", into = "ComponentRepr")]
pub struct UniformComponent {
    pub a: Rational,
    pub b: Rational,
    pub weight: Rational,
}

#[derive(Serialize, Deserialize)]
struct ComponentRepr {
    a: String,
    b: String,
    weight: String,
}

impl From<UniformComponent> for ComponentRepr {
    fn from(c: UniformComponent) -> Self {
        ComponentRepr { a: c.a.to_string(), b: c.b.to_string(), weight: c.weight.to_string() }
    }
}

impl TryFrom<ComponentRepr> for UniformComponent {
    type Error = Error;

    fn try_from(r: ComponentRepr) -> Result<Self> {
        let p = |s: &str| parse_rational(s).ok_or_else(|| Error::Parse(format!("not a rational: {s:?}")));
        Ok(UniformComponent { a: p(&r.a)?, b: p(&r.b)?, weight: p(&r.weight)? })
    }
}

impl UniformComponent {
    pub fn height(&self) -> Rational {
        &self.weight / (&self.b - &self.a)
    }
}

impl fmt::Display for UniformComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U[{}, {}) w={}", self.a, self.b, self.weight)
    }
}

/// Convex mixture of uniform densities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UniformMixture {
    pub components: Vec<UniformComponent>,
}

impl UniformMixture {
    pub fn total_weight(&self) -> Rational {
        self.components.iter().fold(Rational::zero(), |a, c| a + &c.weight)
    }

    /// `Σ w_i·‖q_{a_i,b_i}‖_TV = Σ w_i·2/(b_i − a_i)`
    pub fn total_variation(&self) -> Rational {
        self.components.iter().fold(Rational::zero(), |a, c| a + c.height() * Rational::from_integer(2.into()))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.components
            .iter()
            .filter(|c| &c.a <= x && x < &c.b)
            .fold(Rational::zero(), |a, c| a + c.height())
    }

    /// Whether the mixture equals `p` on every cell of the common refinement
    /// of both partitions. Both are constant on those cells, so checking one
    /// interior point per cell is exact.
    pub fn reconstructs(&self, p: &StepDensity) -> bool {
        let mut pts: Vec<Rational> = p.breakpoints.clone();
        for c in &self.components {
            pts.push(c.a.clone());
            pts.push(c.b.clone());
        }
        pts.sort();
        pts.dedup();
        let two = Rational::from_integer(2.into());
        pts.windows(2).all(|w| {
            let mid = (&w[0] + &w[1]) / &two;
            self.eval(&mid) == p.eval(&mid)
        }) && self.components.iter().all(|c| c.a < c.b && c.weight.is_positive())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Peels off uniform layers: strip zero end cells, split at interior zero
/// cells, otherwise subtract the minimum height over the whole run as one
/// layer and recurse. Produces at most one component per cell.
pub fn decompose_step_density(p: &StepDensity) -> UniformMixture {
    let mut out = Vec::new();
    peel(&p.breakpoints, p.values.clone(), &mut out);
    UniformMixture { components: out }
}

fn peel(xs: &[Rational], mut cs: Vec<Rational>, out: &mut Vec<UniformComponent>) {
    let runs = positive_runs(&cs);
    if runs.as_slice() != [(0, cs.len())] {
        for (s, e) in runs {
            peel(&xs[s..=e], cs[s..e].to_vec(), out);
        }
        return;
    }
    let min = cs.iter().min().expect("nonempty run").clone();
    let (a, b) = (xs[0].clone(), xs[xs.len() - 1].clone());
    let weight = &min * (&b - &a);
    out.push(UniformComponent { a, b, weight });
    for c in cs.iter_mut() {
        *c -= &min;
    }
    peel(xs, cs, out);
}

/// Maximal `[start, end)` ranges of nonzero cells.
fn positive_runs(cs: &[Rational]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut k = 0;
    while k < cs.len() {
        if cs[k].is_zero() {
            k += 1;
            continue;
        }
        let start = k;
        while k < cs.len() && !cs[k].is_zero() {
            k += 1;
        }
        runs.push((start, k));
    }
    runs
}
