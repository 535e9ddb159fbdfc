use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{DerivativeSource, GridDensity};
use crate::error::Result;

/// Linear convolution of two sequences by zero-padded FFT.
fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let len = out_len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let lift = |v: &[f64]| {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(len, Complex64::new(0.0, 0.0));
        fwd.process(&mut buf);
        buf
    };
    let (fa, fb) = (lift(a), lift(b));
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inv.process(&mut prod);
    prod.truncate(out_len);
    prod.iter().map(|v| v.re / len as f64).collect()
}

/// Density of `X + Y` for independent `X ~ p`, `Y ~ q`.
///
/// `q` is resampled onto `p`'s spacing when they differ. Derivatives carry
/// through as `(p*q)' = p'*q` and `(p*q)'' = p'*q'` when the factors have
/// them; otherwise the result falls back to central differences.
pub fn convolve(p: &GridDensity, q: &GridDensity) -> Result<GridDensity> {
    let q = if (q.dx() - p.dx()).abs() > 1e-12 * p.dx() {
        let len = ((q.len() - 1) as f64 * q.dx() / p.dx()).ceil() as usize + 1;
        q.resample(q.x0(), p.dx(), len)?
    } else {
        q.clone()
    };
    let dx = p.dx();
    let scaled = |v: Vec<f64>| v.into_iter().map(|x| x * dx).collect::<Vec<_>>();
    let values: Vec<f64> = scaled(fft_convolve(p.values(), q.values())).into_iter().map(|v| v.max(0.0)).collect();
    let out = GridDensity::new(p.x0() + q.x0(), dx, values)?;
    let (pd1, pd2, qd1) = (p.stored_d1(), p.stored_d2(), q.stored_d1());
    let out = match (pd1, qd1, pd2) {
        (Some(a), Some(b), _) => {
            let d1 = scaled(fft_convolve(a, q.values()));
            let d2 = scaled(fft_convolve(a, b));
            out.with_derivatives(d1, d2, DerivativeSource::Convolution)?
        }
        (Some(a), None, Some(a2)) => {
            let d1 = scaled(fft_convolve(a, q.values()));
            let d2 = scaled(fft_convolve(a2, q.values()));
            out.with_derivatives(d1, d2, DerivativeSource::Convolution)?
        }
        (None, Some(_), _) => return convolve(&q, p),
        _ => out,
    };
    out.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgeworth::phi;

    fn unit_uniform(m: usize) -> GridDensity {
        let dx = 1.0 / m as f64;
        GridDensity::from_fn(0.0, dx, m + 1, |x| if x < 1.0 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn triangle_apex() {
        let m = 1000;
        let u = unit_uniform(m);
        let t = convolve(&u, &u).unwrap();
        assert!((t.eval(1.0) - 1.0).abs() < 2.0 / m as f64);
        assert!((t.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_add() {
        let u = unit_uniform(500);
        let g = GridDensity::from_fn(-9.0, 0.002, 9001, |x| phi((x - 1.0) / 2.0) / 2.0).unwrap();
        let c = convolve(&g, &u).unwrap();
        assert!((c.mean() - (g.mean() + u.mean())).abs() < 1e-8);
        assert!((c.variance() - (g.variance() + u.variance())).abs() < 1e-8);
        assert!((c.mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn narrow_kernel_is_near_identity() {
        let dx = 0.01;
        let p = GridDensity::from_fn(-10.0, dx, 2001, |x| 0.5 * (-x.abs()).exp()).unwrap();
        let k = GridDensity::from_fn(-10.0 * dx, dx, 21, |x| phi(x / dx) / dx).unwrap();
        let c = convolve(&p, &k).unwrap();
        // modulus of continuity of e^{-|x|}/2 over a few dx
        for x in [-3.0, -0.5, 0.0, 0.7, 2.0] {
            assert!((c.eval(x) - p.eval(x)).abs() < 2.0 * dx, "x={x}");
        }
    }

    #[test]
    fn derivatives_carry_through() {
        let n = |mu: f64| {
            GridDensity::from_smooth_fn(mu - 10.0, 0.005, 4001, move |x| {
                let q = phi(x - mu);
                [q, -(x - mu) * q, ((x - mu).powi(2) - 1.0) * q]
            })
            .unwrap()
        };
        let c = convolve(&n(0.0), &n(1.0)).unwrap();
        assert_eq!(c.derivative_source(), DerivativeSource::Convolution);
        let s = 2f64.sqrt();
        let (d1, d2) = (c.d1(), c.d2());
        for i in (0..c.len()).step_by(211) {
            let z = (c.x(i) - 1.0) / s;
            let p = phi(z) / s;
            assert!((c.values()[i] - p).abs() < 1e-10);
            assert!((d1[i] + z / s * p).abs() < 1e-9);
            assert!((d2[i] - (z * z - 1.0) / 2.0 * p).abs() < 1e-9);
        }
    }

    #[test]
    fn mismatched_spacing_is_resampled() {
        let a = GridDensity::from_fn(-8.0, 0.01, 1601, phi).unwrap();
        let b = GridDensity::from_fn(-8.0, 0.02, 801, phi).unwrap();
        let c = convolve(&a, &b).unwrap();
        assert!((c.variance() - 2.0).abs() < 1e-4);
    }
}
