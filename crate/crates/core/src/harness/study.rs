use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::config::StudyConfig;
use crate::coefficients::{predict_distance, ExpansionCoefficients};
use crate::cumulants::analytic_cumulants;
use crate::density::{density_from_cf, AnalyticCf, CharFunctionGrid, GridDensity, InvertOptions};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::functionals::{entropic_distance, relative_fisher, relative_fisher_integrand, FunctionalReport};
use crate::scalar::Rational;

/// Values measured on one normalized sum `Z_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Measurement {
    pub i_rel: f64,
    pub d_rel: f64,
    /// `(I_rel − prediction)·n^{⌊(s−2)/2⌋}`
    pub residual_scaled: f64,
    /// `J_1/(J_0 + J_1)` for the split at `t_split`.
    pub tail_share: f64,
    pub t_split: f64,
    pub mean: f64,
    pub variance: f64,
    pub fisher: FunctionalReport,
    pub entropy: FunctionalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowOutcome {
    Measured(Measurement),
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u32,
    /// `Σ_j c_j n^{−j}`
    pub prediction: f64,
    #[serde(flatten)]
    pub outcome: RowOutcome,
}

impl ConvergenceRow {
    pub fn measurement(&self) -> Option<&Measurement> {
        match &self.outcome {
            RowOutcome::Measured(m) => Some(m),
            RowOutcome::Skipped { .. } => None,
        }
    }
}

/// `T_n = sqrt((s−2) log n + s log log n + ρ_n)`
pub fn split_point(s: usize, n: u32, rho: f64) -> f64 {
    let l = (n as f64).ln();
    ((s as f64 - 2.0) * l + s as f64 * l.ln() + rho).max(0.0).sqrt()
}

/// Splits the relative-Fisher integral of `p` at `|x| = t`: `(J_0, J_1)`
/// over `|x| < t` and `|x| ≥ t`.
pub fn tail_split(p: &GridDensity, t: f64, rel_threshold: f64) -> (f64, f64) {
    let terms = relative_fisher_integrand(p, rel_threshold);
    let (mut j0, mut j1) = (0.0, 0.0);
    for (i, v) in terms.iter().enumerate() {
        if p.x(i).abs() < t {
            j0 += v;
        } else {
            j1 += v;
        }
    }
    (j0 * p.dx(), j1 * p.dx())
}

/// Coefficients `c_j` for the prediction, exact when the standardization
/// is rational and in floating point otherwise.
pub fn expansion_coefficients(family: &Family, s: usize) -> Result<Vec<f64>> {
    let order = s.max(3);
    match analytic_cumulants::<Rational>(family, order) {
        Ok(c) => Ok(ExpansionCoefficients::compute(&c, s)?.c.iter().map(crate::scalar::Scalar::to_f64).collect()),
        Err(Error::IrrationalStandardization { .. }) => {
            let c = analytic_cumulants::<f64>(family, order)?;
            Ok(ExpansionCoefficients::compute(&c, s)?.c)
        }
        Err(e) => Err(e),
    }
}

/// Density of `Z_n` on the configured grid.
pub fn sum_density(family: &Family, n: u32, cfg: &StudyConfig) -> Result<GridDensity> {
    let f = CharFunctionGrid::analytic(AnalyticCf::new(family.clone(), n)?, cfg.grid.points, cfg.grid.dt())?;
    density_from_cf(&f, &InvertOptions { x0: -cfg.grid.xmax, tail_tolerance: cfg.tail_tolerance })
}

fn measure(p: &GridDensity, n: u32, prediction: f64, cfg: &StudyConfig) -> Measurement {
    let fisher = relative_fisher(p, cfg.threshold);
    let entropy = entropic_distance(p, cfg.threshold);
    let t_split = split_point(cfg.s, n, cfg.rho.at(n));
    let (j0, j1) = tail_split(p, t_split, cfg.threshold);
    let total = j0 + j1;
    let scale = (n as f64).powi(((cfg.s - 2) / 2) as i32);
    Measurement {
        i_rel: fisher.value,
        d_rel: entropy.value,
        residual_scaled: (fisher.value - prediction) * scale,
        tail_share: if total > 0.0 { j1 / total } else { 0.0 },
        t_split,
        mean: p.mean(),
        variance: p.variance(),
        fisher,
        entropy,
    }
}

/// Computes one row per `n` (concurrently) and returns them in `n` order.
/// Sums whose cf does not yet decay enough to invert are reported as
/// skipped rather than failing the study.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let coeffs = expansion_coefficients(&cfg.family, cfg.s)?;
    let expansion = ExpansionCoefficients { s: cfg.s, c: coeffs };
    cfg.n_list
        .par_iter()
        .map(|&n| {
            let prediction = predict_distance(&expansion, n as u64);
            let outcome = match sum_density(&cfg.family, n, cfg) {
                Ok(p) => RowOutcome::Measured(measure(&p, n, prediction, cfg)),
                Err(Error::CfTailTooHeavy { tail }) => RowOutcome::Skipped {
                    reason: format!("insufficient smoothing: cf tail estimate {tail:.3e}"),
                },
                Err(e) => return Err(e),
            };
            Ok(ConvergenceRow { n, prediction, outcome })
        })
        .collect()
}

pub const CSV_HEADER: &str = "n,I_rel,D_rel,prediction,residual_scaled,tail_share";

/// 12 significant digits.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// CSV rows; skipped rows leave the measured fields empty.
pub fn write_study_csv<W: Write>(rows: &[ConvergenceRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        match r.measurement() {
            Some(m) => writeln!(
                w,
                "{},{},{},{},{},{}",
                r.n,
                sig12(m.i_rel),
                sig12(m.d_rel),
                sig12(r.prediction),
                sig12(m.residual_scaled),
                sig12(m.tail_share)
            )?,
            None => writeln!(w, "{},,,{},,", r.n, sig12(r.prediction))?,
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct StudyDocument<'a> {
    config: &'a StudyConfig,
    coefficients: &'a [f64],
    rows: &'a [ConvergenceRow],
}

pub fn write_study_json<W: Write>(cfg: &StudyConfig, rows: &[ConvergenceRow], w: W) -> Result<()> {
    let coefficients = expansion_coefficients(&cfg.family, cfg.s)?;
    serde_json::to_writer_pretty(w, &StudyDocument { config: cfg, coefficients: &coefficients, rows })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::GridSpec;

    fn cfg(family: Family, s: usize, n: &[u32]) -> StudyConfig {
        StudyConfig { family, s, n_list: n.to_vec(), ..StudyConfig::default() }
    }

    #[test]
    fn gaussian_rows_vanish() {
        let rows = run_convergence_study(&cfg(Family::Gaussian, 4, &[4, 16])).unwrap();
        for r in &rows {
            let m = r.measurement().unwrap();
            assert!(m.i_rel < 1e-8 && r.prediction == 0.0, "{m:?}");
        }
    }

    #[test]
    fn uniform_symmetric_rate() {
        let rows = run_convergence_study(&cfg(Family::StandardizedUniform, 6, &[16, 32, 64])).unwrap();
        let scaled: Vec<f64> = rows.iter().map(|r| r.measurement().unwrap().i_rel * (r.n as f64).powi(2)).collect();
        assert!((scaled[2] - 0.24).abs() < 0.15 * 0.24, "{scaled:?}");
        assert!((rows[2].prediction * 64.0 * 64.0 - 0.24).abs() < 1e-12);
    }

    #[test]
    fn tail_split_conserves() {
        let c = cfg(Family::StandardizedExponential, 4, &[256]);
        let p = sum_density(&c.family, 256, &c).unwrap();
        let total = relative_fisher(&p, c.threshold).value;
        for t in [0.0, 1.0, split_point(4, 256, (256f64).ln().ln()), 40.0] {
            let (j0, j1) = tail_split(&p, t, c.threshold);
            assert!((j0 + j1 - total).abs() < 1e-10 * total.max(1.0));
        }
        assert_eq!(tail_split(&p, 0.0, c.threshold).0, 0.0);
        assert_eq!(tail_split(&p, 40.0, c.threshold).1, 0.0);
        let t = split_point(4, 256, (256f64).ln().ln());
        let (j0, j1) = tail_split(&p, t, c.threshold);
        assert!(j1 / (j0 + j1) < 0.05);
    }

    #[test]
    fn small_n_rows_are_skipped() {
        let rows = run_convergence_study(&cfg(Family::StandardizedExponential, 4, &[1, 64])).unwrap();
        assert!(matches!(rows[0].outcome, RowOutcome::Skipped { .. }));
        assert!(rows[1].measurement().is_some());
    }

    #[test]
    fn csv_is_deterministic() {
        let c = StudyConfig {
            grid: GridSpec { points: 1 << 14, xmax: 40.0 },
            ..cfg(Family::StandardizedExponential, 4, &[1, 64, 128])
        };
        let render = || {
            let mut buf = Vec::new();
            write_study_csv(&run_convergence_study(&c).unwrap(), &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render();
        assert_eq!(a, render());
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("1,,,"));
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[1].split('e').next().unwrap().replace(['.', '-'], "").len(), 12);
    }

    #[test]
    fn json_carries_metadata() {
        let c = cfg(Family::StandardizedExponential, 4, &[64]);
        let rows = run_convergence_study(&c).unwrap();
        let mut buf = Vec::new();
        write_study_json(&c, &rows, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["rows"][0]["status"], "measured");
        assert!(v["rows"][0]["fisher"]["threshold"].is_number());
        assert_eq!(v["coefficients"][0], 2.0);
    }
}
