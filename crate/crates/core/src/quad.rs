//! Small quadrature helpers shared by the kernel evaluators: adaptive
//! Simpson for analytic integrands on parametrized paths, and a generic
//! node-doubling convergence loop.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Adaptive Simpson on `[a, b]` for a complex-valued integrand.
pub fn adaptive_simpson<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: usize,
) -> Complex64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Complex64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
}

/// Runs `eval(n)` with `n` doubling from `n0` until two successive values
/// agree within `tol`, or the doubling budget is exhausted.
pub fn converge_doubling<F: FnMut(usize) -> Result<Complex64>>(
    mut eval: F,
    n0: usize,
    tol: f64,
    max_doublings: usize,
) -> Result<(Complex64, f64, usize)> {
    let mut n = n0.max(4);
    let mut prev = eval(n)?;
    for _ in 0..max_doublings {
        n *= 2;
        let cur = eval(n)?;
        let diff = (cur - prev).norm();
        if diff <= tol {
            return Ok((cur, diff, n));
        }
        prev = cur;
    }
    Err(Error::QuadratureDiverged {
        prev,
        last: eval(n)?,
        tol,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre polynomial; adequate for the fixed panel sizes used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-style initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let pj = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = pj;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrates `f` along the straight segment from `a` to `b` with a fixed
/// Gauss-Legendre panel.
pub fn segment_gauss<F: Fn(Complex64) -> Complex64>(
    f: &F,
    a: Complex64,
    b: Complex64,
    nodes: &[f64],
    weights: &[f64],
) -> Complex64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_oscillatory() {
        let f = |x: f64| Complex64::new((3.0 * x).cos(), x.exp());
        let got = adaptive_simpson(&f, 0.0, 2.0, 1e-12, 40);
        assert_relative_eq!(got.re, (6.0f64).sin() / 3.0, epsilon = 1e-10);
        assert_relative_eq!(got.im, (2.0f64).exp() - 1.0, epsilon = 1e-10);
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        // degree-15 polynomial integrates exactly
        let int: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * (xi.powi(15) + 3.0 * xi.powi(8) - xi))
            .sum();
        assert_relative_eq!(int, 3.0 * 2.0 / 9.0, epsilon = 1e-13);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn doubling_converges() {
        // trapezoid rule for a smooth periodic function: spectral accuracy
        let eval = |n: usize| -> crate::Result<Complex64> {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                s += Complex64::new((th.sin()).exp(), 0.0);
            }
            Ok(s / n as f64)
        };
        let (v, err, _) = converge_doubling(eval, 8, 1e-12, 10).unwrap();
        // I_0(1), the modified Bessel value
        assert_relative_eq!(v.re, 1.2660658777520084, epsilon = 1e-11);
        assert!(err <= 1e-12);
    }
}
