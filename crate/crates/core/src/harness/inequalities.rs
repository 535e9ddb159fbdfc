use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::StudyConfig;
use super::study::sum_density;
use crate::bounds::{three_fold_cf_fisher_bound, three_uniform_fisher_bound, tv_product_fisher_bound};
use crate::decompose::StepDensity;
use crate::density::{convolve, density_from_cf, AnalyticCf, CharFunctionGrid, GridDensity, InvertOptions};
use crate::edgeworth::phi;
use crate::error::{Error, Result};
use crate::family::Family;
use crate::functionals::{
    entropic_distance, fisher_information, relative_fisher, total_variation_norm, tv_distance_to_gaussian,
};
use crate::scalar::rat;

/// One evaluated inequality `lhs ≤ rhs + slack`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub subject: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

impl InequalityCheck {
    pub fn margin(&self) -> f64 {
        self.rhs + self.slack - self.lhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InequalityReport {
    pub checks: Vec<InequalityCheck>,
    /// Subjects that could not be built (no density, or a cf too heavy to invert).
    pub skipped: Vec<String>,
}

impl InequalityReport {
    pub fn violations(&self) -> Vec<&InequalityCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Families the suite runs on by default.
pub fn builtin_families() -> Vec<Family> {
    vec![
        Family::Gaussian,
        Family::StandardizedExponential,
        Family::StandardizedUniform,
        Family::Beta33,
        Family::default_mixture(),
        Family::bernoulli(),
    ]
}

struct Slacks {
    cramer_rao: f64,
    entropy: f64,
    tv: f64,
    monotone: f64,
    pointwise: f64,
    bound: f64,
}

impl Slacks {
    fn new(cfg: &StudyConfig) -> Self {
        let d = Slacks { cramer_rao: 1e-6, entropy: 1e-8, tv: 1e-6, monotone: 1e-8, pointwise: 1e-6, bound: 1e-3 };
        match cfg.slack {
            Some(s) => Slacks { cramer_rao: s, entropy: s, tv: s, monotone: s, pointwise: s, bound: s },
            None => d,
        }
    }
}

struct Collector<'a> {
    subject: String,
    out: &'a mut Vec<InequalityCheck>,
}

impl Collector<'_> {
    fn le(&mut self, name: &str, lhs: f64, rhs: f64, slack: f64) {
        let passed = lhs <= rhs + slack;
        self.out.push(InequalityCheck { name: name.into(), subject: self.subject.clone(), lhs, rhs, slack, passed });
    }
}

/// `max_t |t|^k |g(t)|` over the t-grid.
fn max_weighted(f: &CharFunctionGrid, g: impl Fn(usize) -> Complex64) -> f64 {
    (0..f.len()).map(|k| f.t(k).abs() * g(k).norm()).fold(0.0, f64::max)
}

/// Checks on a single normalized sum `Z_n` and its two- and three-fold
/// self-convolutions.
fn single_sum_checks(family: &Family, n: u32, p: &GridDensity, cfg: &StudyConfig, sl: &Slacks) -> Result<Vec<InequalityCheck>> {
    let thr = cfg.threshold;
    let mut out = Vec::new();
    let mut c = Collector { subject: format!("{family} n={n}"), out: &mut out };
    let i = fisher_information(p, thr).value;
    let i_rel = relative_fisher(p, thr).value;
    let d = entropic_distance(p, thr).value;
    let var = p.variance();

    c.le("cramer_rao", 1.0 / var, i, sl.cramer_rao);
    c.le("entropy_vs_relative_fisher", d, 0.5 * var * i_rel, sl.entropy);
    c.le("tv_le_sqrt_fisher", total_variation_norm(p), i.sqrt(), sl.tv);
    c.le("max_le_sqrt_fisher", p.max(), i.sqrt(), sl.tv);
    c.le("tv_to_gaussian", tv_distance_to_gaussian(p), 4.0 * i_rel.sqrt(), sl.tv);

    let f = CharFunctionGrid::analytic(AnalyticCf::new(family.clone(), n)?, cfg.grid.points, cfg.grid.dt())?;
    let (f1, _) = f.derivative_values().expect("analytic grids carry derivatives");
    c.le("cf_decay", max_weighted(&f, |k| f.values()[k]), i.sqrt(), sl.pointwise);
    let beta = |s: f64| p.abs_moment(s);
    c.le("cf_derivative_decay", max_weighted(&f, |k| f1[k]), 1.0 + (beta(2.0) * i).sqrt(), sl.pointwise);

    let d1 = p.d1();
    for s in [1.0, 2.0] {
        let weighted: f64 = (0..p.len()).map(|k| p.x(k).abs().powf(s) * d1[k].abs()).sum::<f64>() * p.dx();
        c.le(&format!("moment_weighted_tv_s{s}"), weighted, (beta(2.0 * s) * i).sqrt(), sl.tv);
        let lhs = (0..p.len()).map(|k| (1.0 + p.x(k).abs().powf(s)) * p.values()[k]).fold(0.0, f64::max);
        let bound = s * beta(s - 1.0) + ((1.0 + beta(2.0 * s)) * i).sqrt();
        c.le(&format!("density_tail_s{s}"), lhs, bound, sl.pointwise);
    }

    // two-fold convolution: a member of the class built from two densities with I(p_i) ≤ i
    let q = convolve(p, p)?;
    let iq = fisher_information(&q, thr).value;
    c.le("stam", 2.0 / i, 1.0 / iq, sl.tv);
    let qthr = thr * q.max();
    let (q1, q2) = (q.d1(), q.d2());
    let on = |k: &usize| q.values()[*k] > qthr;
    let gap1 = (0..q.len()).filter(on).map(|k| q1[k].abs() - i.powf(0.75) * q.values()[k].sqrt()).fold(f64::MIN, f64::max);
    c.le("two_fold_first_derivative", gap1, 0.0, sl.pointwise);
    let max2 = q2.iter().map(|v| v.abs()).fold(0.0, f64::max);
    c.le("two_fold_second_derivative_sup", max2, i.powf(1.5), sl.pointwise);
    let int2: f64 = (0..q.len()).filter(on).map(|k| q2[k] * q2[k] / q.values()[k]).sum::<f64>() * q.dx();
    c.le("two_fold_second_derivative_integral", int2, i * i, sl.tv * i * i);

    let r = convolve(&q, p)?;
    let rthr = thr * r.max();
    let r2 = r.d2();
    let gap = (0..r.len())
        .filter(|k| r.values()[*k] > rthr)
        .map(|k| r2[k].abs() - i.powf(1.25) * r.values()[k].sqrt())
        .fold(f64::MIN, f64::max);
    c.le("three_fold_second_derivative", gap, 0.0, sl.pointwise);
    Ok(out)
}

fn normal_grid(mu: f64, sd: f64, x0: f64, dx: f64, len: usize) -> GridDensity {
    GridDensity::from_smooth_fn(x0, dx, len, |x| {
        let z = (x - mu) / sd;
        let p = phi(z) / sd;
        [p, -z / sd * p, (z * z - 1.0) / (sd * sd) * p]
    })
    .expect("finite gaussian samples")
}

/// Convexity of `I` and the mixture bound `I(Σ w_i N(μ_i, σ_i²)) ≤ Σ w_i/σ_i²`
/// on seeded random Gaussian mixtures.
fn mixture_checks(cfg: &StudyConfig, sl: &Slacks) -> Vec<InequalityCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (x0, dx, len) = (-30.0, 0.004, 15001);
    let mut out = Vec::new();
    for case in 0..4 {
        let (m1, m2): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (s1, s2): (f64, f64) = (rng.random_range(0.4..2.0), rng.random_range(0.4..2.0));
        let p = normal_grid(m1, s1, x0, dx, len);
        let q = normal_grid(m2, s2, x0, dx, len);
        let mut c = Collector { subject: format!("mixture #{case}: N({m1:.3},{s1:.3}²), N({m2:.3},{s2:.3}²)"), out: &mut out };
        let (ip, iq) = (fisher_information(&p, cfg.threshold).value, fisher_information(&q, cfg.threshold).value);
        for k in 1..=9 {
            let a = k as f64 / 10.0;
            let m = p.mix(&q, a).expect("shared grid");
            let im = fisher_information(&m, cfg.threshold).value;
            c.le(&format!("convexity_a{a:.1}"), im, a * ip + (1.0 - a) * iq, sl.tv);
            c.le(&format!("mixture_bound_a{a:.1}"), im, a / (s1 * s1) + (1.0 - a) / (s2 * s2), sl.tv);
        }
    }
    out
}

fn uniform_len(a: f64, dx: f64) -> GridDensity {
    let m = (a / dx).round() as usize;
    GridDensity::from_fn(0.0, dx, m + 1, |x| if x < a { 1.0 / a } else { 0.0 }).expect("uniform samples")
}

/// Three-fold sums of uniforms and step densities against their explicit bounds.
fn step_checks(cfg: &StudyConfig, sl: &Slacks) -> Result<Vec<InequalityCheck>> {
    let mut out = Vec::new();
    let dx = 1.0 / 1024.0;
    for a in [[1.0, 1.0, 1.0], [0.5, 1.0, 2.0], [1.0, 1.5, 2.0]] {
        let u: Vec<GridDensity> = a.iter().map(|&l| uniform_len(l, dx)).collect();
        let s = convolve(&convolve(&u[0], &u[1])?, &u[2])?;
        let i = fisher_information(&s, cfg.threshold).value;
        let mut c = Collector { subject: format!("uniforms {a:?}"), out: &mut out };
        c.le("three_uniform_bound", i, three_uniform_fisher_bound(a[0], a[1], a[2]), sl.bound);
        let tv: Vec<f64> = a.iter().map(|l| 2.0 / l).collect();
        c.le("tv_product_bound", i, tv_product_fisher_bound(&tv[0], &tv[1], &tv[2]), sl.bound);
    }
    let p1 = StepDensity::new(vec![rat(0, 1), rat(1, 1), rat(3, 2)], vec![rat(2, 5), rat(6, 5)])?;
    let p2 = StepDensity::normalized((0..4).map(|k| rat(k, 1)).collect(), vec![rat(3, 1), rat(2, 1), rat(1, 1)])?;
    let p3 = StepDensity::normalized(
        vec![rat(-1, 1), rat(0, 1), rat(1, 2), rat(2, 1)],
        vec![rat(1, 1), rat(0, 1), rat(2, 1)],
    )?;
    let g: Vec<GridDensity> = [&p1, &p2, &p3].iter().map(|p| p.to_grid(dx)).collect::<Result<_>>()?;
    let s = convolve(&convolve(&g[0], &g[1])?, &g[2])?;
    let i = fisher_information(&s, cfg.threshold).value;
    let mut c = Collector { subject: "step densities".into(), out: &mut out };
    c.le("tv_product_bound", i, tv_product_fisher_bound(&p1, &p2, &p3), sl.bound);
    Ok(out)
}

/// Three-fold sums `X_1 + X_2 + X_3` with `X_i ~ Z_m`, which is `√3·Z_{3m}`,
/// against the cf-integral bound.
fn cf_bound_checks(cfg: &StudyConfig, sl: &Slacks) -> Result<Vec<InequalityCheck>> {
    let mut out = Vec::new();
    for (family, m) in [(Family::Gaussian, 1), (Family::StandardizedExponential, 2), (Family::StandardizedUniform, 2)] {
        let f = CharFunctionGrid::analytic(AnalyticCf::new(family.clone(), m)?, cfg.grid.points, cfg.grid.dt())?;
        let bound = three_fold_cf_fisher_bound(&f)?;
        let Some(best) = bound.best else { continue };
        let f3 = CharFunctionGrid::analytic(AnalyticCf::new(family.clone(), 3 * m)?, cfg.grid.points, cfg.grid.dt())?;
        let opts = InvertOptions { x0: -cfg.grid.xmax, tail_tolerance: 1e-6 };
        let z = density_from_cf(&f3, &opts)?;
        let i = fisher_information(&z, cfg.threshold).value / 3.0;
        let mut c = Collector { subject: format!("{family} three copies of Z_{m}"), out: &mut out };
        c.le("cf_integral_bound", i, best, sl.bound);
    }
    Ok(out)
}

/// Evaluates every inequality on every family and `n`, plus the fixed
/// mixture, step-density and cf-bound cases. Pairs `n`, `2n` both in
/// `n_list` are also checked for monotonicity of `I(Z_n)`.
pub fn run_inequality_suite(families: &[Family], n_list: &[u32], cfg: &StudyConfig) -> Result<InequalityReport> {
    let sl = Slacks::new(cfg);
    let jobs: Vec<(usize, u32)> =
        (0..families.len()).flat_map(|f| n_list.iter().map(move |&n| (f, n))).collect();
    let built: Vec<(usize, u32, Option<(f64, Vec<InequalityCheck>)>)> = jobs
        .par_iter()
        .map(|&(fi, n)| {
            let family = &families[fi];
            match sum_density(family, n, cfg) {
                Ok(p) => {
                    let i = fisher_information(&p, cfg.threshold).value;
                    Ok((fi, n, Some((i, single_sum_checks(family, n, &p, cfg, &sl)?))))
                }
                Err(Error::CfTailTooHeavy { .. }) => Ok((fi, n, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut report = InequalityReport::default();
    for (fi, n, res) in &built {
        match res {
            Some((_, checks)) => report.checks.extend(checks.iter().cloned()),
            None => report.skipped.push(format!("{} n={n}: no invertible density", families[*fi])),
        }
    }
    for (fi, n, res) in &built {
        let Some((i_n, _)) = res else { continue };
        let twice = built.iter().find(|(fj, m, _)| fj == fi && *m == 2 * n);
        if let Some((_, _, Some((i_2n, _)))) = twice {
            report.checks.push(InequalityCheck {
                name: "fisher_monotone_in_n".into(),
                subject: format!("{} n={n} vs {}", families[*fi], 2 * n),
                lhs: *i_2n,
                rhs: *i_n,
                slack: sl.monotone,
                passed: *i_2n <= i_n + sl.monotone,
            });
        }
    }
    report.checks.extend(mixture_checks(cfg, &sl));
    report.checks.extend(step_checks(cfg, &sl)?);
    report.checks.extend(cf_bound_checks(cfg, &sl)?);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_green() {
        let cfg = StudyConfig::default();
        let report = run_inequality_suite(&[Family::StandardizedExponential, Family::Gaussian], &[8, 16], &cfg).unwrap();
        for v in report.violations() {
            eprintln!("{v:?}");
        }
        assert!(report.passed());
        assert!(report.checks.iter().any(|c| c.name == "fisher_monotone_in_n"));
        assert!(report.checks.iter().any(|c| c.name == "cf_integral_bound"));
    }

    #[test]
    fn lattice_family_is_skipped() {
        let cfg = StudyConfig::default();
        let report = run_inequality_suite(&[Family::bernoulli()], &[4], &cfg).unwrap();
        assert_eq!(report.skipped.len(), 1);
    }

    #[test]
    fn violation_is_reported() {
        let mut out = Vec::new();
        let mut c = Collector { subject: "x".into(), out: &mut out };
        c.le("t", 2.0, 1.0, 0.5);
        assert!(!out[0].passed);
        assert!((out[0].margin() + 0.5).abs() < 1e-15);
    }
}
