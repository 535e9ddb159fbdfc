//! Test oracles that share no code with the library: Gauss–Hermite
//! quadrature and complex-step differentiation of directly evaluated
//! Edgeworth terms.

#![allow(dead_code)]

use fisher_clt::scalar::{rat, Rational};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Orthonormal Hermite `h_n(z)` (weight `e^{−z²}`) and `√(2n)·h_{n−1}(z)`.
fn hermite_orthonormal(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = std::f64::consts::PI.powf(-0.25);
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

/// Nodes and weights for `∫ f(x) e^{−x²/2}/√(2π) dx ≈ Σ w_i f(x_i)`.
/// Roots of `h_n` are bracketed by a sign scan, then polished by bisection.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let top = (2.0 * n as f64 + 1.0).sqrt() + 1.0;
    let step = 1e-3;
    let mut roots = Vec::with_capacity(n);
    let mut a = if n % 2 == 1 { step / 2.0 } else { 0.0 };
    if n % 2 == 1 {
        roots.push(0.0);
    }
    let mut fa = hermite_orthonormal(n, a).0;
    while a < top {
        let b = a + step;
        let fb = hermite_orthonormal(n, b).0;
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = hermite_orthonormal(n, mid).0;
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            roots.push(r);
            roots.push(-r);
        }
        a = b;
        fa = fb;
    }
    assert_eq!(roots.len(), n, "missed Hermite roots");
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let s2 = std::f64::consts::SQRT_2;
    let sp = std::f64::consts::PI.sqrt();
    let w = roots.iter().map(|&z| 2.0 / hermite_orthonormal(n, z).1.powi(2) / sp).collect();
    (roots.iter().map(|z| z * s2).collect(), w)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Solutions `(r_1..r_k)` of `Σ l·r_l = k` in nonnegative integers.
fn solutions(k: usize) -> Vec<Vec<usize>> {
    fn rec(l: usize, k: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if l > k {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for r in 0..=left / l {
            cur.push(r);
            rec(l + 1, k, left - r * l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, k, k, &mut Vec::new(), &mut out);
    out
}

/// `q_k(z)/φ(z)` evaluated directly from the cumulants `γ_3, γ_4, …`
/// (`gamma[0] = γ_3`).
pub fn q_over_phi(k: usize, gamma: &[f64], z: Complex64) -> Complex64 {
    let mut h = vec![Complex64::new(1.0, 0.0), z];
    for m in 1..3 * k + 2 {
        let next = z * h[m] - m as f64 * h[m - 1];
        h.push(next);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for r in solutions(k) {
        let j: usize = r.iter().sum();
        let mut coeff = 1.0;
        for (l, &rl) in r.iter().enumerate().filter(|(_, rl)| **rl > 0) {
            coeff *= (gamma[l] / factorial(l + 3)).powi(rl as i32) / factorial(rl);
        }
        acc += h[k + 2 * j] * coeff;
    }
    acc
}

/// `(q_k' + x q_k)/φ = (q_k/φ)'` by complex-step differentiation.
pub fn score_over_phi(k: usize, gamma: &[f64], x: f64) -> f64 {
    let h = 1e-30;
    q_over_phi(k, gamma, Complex64::new(x, h)).im / h
}

/// Positive compositions of `total` into `parts` summands.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (1..=total - (parts - 1))
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// `c_j` by 200-node Gauss–Hermite quadrature of the composition-sum
/// integrand, with every factor evaluated pointwise.
pub fn quadrature_cj(gamma: &[f64], j: usize) -> f64 {
    let (xs, ws) = gauss_hermite(200);
    let mut total = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let q: Vec<f64> = (0..2 * j).map(|k| if k == 0 { 0.0 } else { q_over_phi(k, gamma, (*x).into()).re }).collect();
        let s: Vec<f64> = (0..2 * j).map(|k| if k == 0 { 0.0 } else { score_over_phi(k, gamma, *x) }).collect();
        let mut f = 0.0;
        for k in 2..=2 * j {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for r in compositions(2 * j, k) {
                let mut term = s[r[0]] * s[r[1]];
                for &ri in &r[2..] {
                    term *= q[ri];
                }
                f += sign * term;
            }
        }
        total += w * f;
    }
    total
}

/// Random rational with `|v| ≤ bound` and denominator at most 8.
pub fn random_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let d = rng.random_range(1..=8i64);
    rat(rng.random_range(-bound * d..=bound * d), d)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
