use serde::Serialize;

use super::config::StudyConfig;
use crate::density::{
    decay_exponent, invert_cf, weighted_cf_integral_in, AnalyticCf, CharFunctionGrid, GridDensity, InvertOptions,
    WeightedIntegral,
};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::functionals::total_variation_norm;

/// Points and spacing of the t-grid used for decay estimates.
pub const DECAY_GRID_POINTS: usize = 1 << 19;
pub const DECAY_GRID_DT: f64 = 0.005;

/// `ε̂` above this counts as power decay of `|f|`.
pub const DECAY_CUTOFF: f64 = 0.2;

/// Exponents `ν` at which `∫ |f|^ν |t| dt` is examined.
pub const NU_GRID: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 6.0];

/// Sums `Z_n` whose density total variation is examined.
pub const TV_N: [u32; 5] = [1, 2, 3, 4, 8];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedVerdict {
    pub nu: f64,
    #[serde(flatten)]
    pub integral: WeightedIntegral,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvVerdict {
    pub n: u32,
    /// `None` when the density of `Z_n` cannot be recovered from its cf.
    pub tv: Option<f64>,
}

/// Finite-window evidence for the equivalent smoothness conditions on the
/// summand's cf: power decay of `|f|`, finiteness of `∫|f|^ν|t|`, and a
/// density of bounded variation for some `Z_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfDecayReport {
    pub family: String,
    pub window: (f64, f64),
    pub decay_exponent: f64,
    pub decays: bool,
    pub weighted: Vec<WeightedVerdict>,
    pub tv: Vec<TvVerdict>,
    /// `⌈1/ε̂⌉` when `|f|` decays.
    pub n0_estimate: Option<u32>,
    pub all_pass: bool,
    pub all_fail: bool,
}

/// Upper end of the fitting window: `tmax`, or where the running sup of
/// `|f|` drops below `1e-250` if that happens first.
fn decay_window(f: &CharFunctionGrid) -> (f64, f64) {
    let mid = f.len() / 2;
    let mut acc: f64 = 0.0;
    let mut hi = f.tmax();
    for k in (mid..f.len()).rev() {
        acc = acc.max(f.values()[k].norm());
        if acc > 1e-250 {
            hi = f.t(k).min(f.tmax());
            break;
        }
    }
    (hi / 100.0, hi)
}

pub fn run_cf_decay_diagnostics(family: &Family, cfg: &StudyConfig) -> Result<CfDecayReport> {
    let f = CharFunctionGrid::analytic(AnalyticCf::new(family.clone(), 1)?, DECAY_GRID_POINTS, DECAY_GRID_DT)?;
    let window = decay_window(&f);
    let eps = decay_exponent(&f, window)?;
    let decays = eps > DECAY_CUTOFF;
    let weighted = NU_GRID
        .iter()
        .map(|&nu| Ok(WeightedVerdict { nu, integral: weighted_cf_integral_in(&f, nu, window)? }))
        .collect::<Result<Vec<_>>>()?;
    let tv = TV_N
        .iter()
        .map(|&n| {
            let fnn = CharFunctionGrid::analytic(AnalyticCf::new(family.clone(), n)?, cfg.grid.points, cfg.grid.dt())?;
            let opts = InvertOptions { x0: -cfg.grid.xmax, tail_tolerance: cfg.tail_tolerance };
            let tv = match invert_cf(&fnn, 0, &opts) {
                Ok(v) => {
                    let v: Vec<f64> = v.into_iter().map(|x| x.max(0.0)).collect();
                    Some(total_variation_norm(&GridDensity::new(opts.x0, cfg.grid.dx(), v)?.normalized()?))
                }
                Err(Error::CfTailTooHeavy { .. }) => None,
                Err(e) => return Err(e),
            };
            Ok(TvVerdict { n, tv })
        })
        .collect::<Result<Vec<_>>>()?;
    let n0_estimate = decays.then(|| (1.0 / eps).ceil().max(1.0) as u32);
    let any_weighted = weighted.iter().any(|w| w.integral.finite);
    let any_tv = tv.iter().any(|t| t.tv.is_some());
    Ok(CfDecayReport {
        family: family.tag(),
        window,
        decay_exponent: eps,
        decays,
        all_pass: decays && any_weighted && any_tv,
        all_fail: !decays && !any_weighted && !any_tv,
        weighted,
        tv,
        n0_estimate,
    })
}
