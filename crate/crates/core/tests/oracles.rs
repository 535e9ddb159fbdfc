mod common;

use common::{gauss_hermite, quadrature_cj, random_rational, rng};
use fisher_clt::coefficients::compute_cj;
use fisher_clt::cumulants::CumulantVector;
use fisher_clt::scalar::{Rational, Scalar};

#[test]
fn quadrature_rule_is_exact_on_gaussian_moments() {
    let (x, w) = gauss_hermite(200);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    let mut dfact = 1.0;
    for k in (2..=40).step_by(2) {
        dfact *= (k - 1) as f64;
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
        assert!((m / dfact - 1.0).abs() < 1e-11, "E x^{k}: {m} vs {dfact}");
    }
}

#[test]
fn exact_coefficients_match_quadrature() {
    let mut r = rng(2024);
    for case in 0..25 {
        let higher: Vec<Rational> = (3..=7).map(|_| random_rational(&mut r, 2)).collect();
        let floats: Vec<f64> = higher.iter().map(Scalar::to_f64).collect();
        let c = CumulantVector::from_higher(higher);
        for j in 1..=3 {
            let exact = compute_cj(&c, j).unwrap().to_f64();
            let quad = quadrature_cj(&floats, j);
            assert!(
                (exact - quad).abs() <= 1e-9 * exact.abs().max(1.0),
                "case {case}, j={j}: exact {exact} vs quadrature {quad}"
            );
        }
    }
}

#[test]
fn generic_second_coefficient() {
    let g = [0.5, 1.0 / 3.0, 0.25];
    let c = CumulantVector::from_higher(vec![
        fisher_clt::scalar::rat(1, 2),
        fisher_clt::scalar::rat(1, 3),
        fisher_clt::scalar::rat(1, 4),
    ]);
    let exact = compute_cj(&c, 2).unwrap().to_f64();
    assert!((exact - quadrature_cj(&g, 2)).abs() < 1e-10);
}
