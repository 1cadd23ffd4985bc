//! The three limit kernels: bulk near the right edge, turning points
//! (interlaced GUE-corners), and the middle-slice kernel at the `tau = 0`
//! phase transition, plus the incomplete beta kernel as an independent
//! reference implementation.
//!
//! Bulk and middle kernels are single contour integrals between the two
//! conjugate critical points of the action, evaluated on the circular arc
//! through a prescribed real crossing point. Turning-point kernels are
//! double integrals with a Gaussian factor `e^{c (xi^2 - omega^2)}`,
//! `c < 0`; the `xi` contour is a pair of rays at angles `+-pi/8` (so
//! `Re(c xi^2) -> -infinity`), the `omega` contour a vertical line left of
//! it, both crossing the axis left of the origin so the merged `xi^{-N}`
//! pole sits between the contour and `+infinity`, the way the finite-size
//! z-contour keeps the specialization poles outside.

use num_complex::Complex64;

use crate::asymptotics::{critical_points, turning_points, LimitSpec, MiddleModel, TurningPoint};
use crate::error::Error;
use crate::lattice::Half;
use crate::quad::{adaptive_simpson, converge_doubling, gauss_legendre};
use crate::Result;

/// Default tolerance for the limit-kernel quadratures.
const ARC_TOL: f64 = 1e-10;

/// Integrates `f` along the circular arc from `conj(z_cr)` to `z_cr`
/// crossing the real axis at `x0`, returning `(2 pi i)^{-1} int f dz`.
pub(crate) fn arc_integral<F: Fn(Complex64) -> Complex64>(
    z_cr: Complex64,
    x0: f64,
    f: F,
) -> Complex64 {
    let mut x0 = x0;
    if (z_cr.re - x0).abs() < 1e-12 * (1.0 + z_cr.norm()) {
        // center would sit at infinity; nudge the crossing point
        x0 -= 1e-9 * (1.0 + x0.abs());
    }
    let center = (z_cr.norm_sqr() - x0 * x0) / (2.0 * (z_cr.re - x0));
    let rad = (z_cr - center).norm();
    let phi = (z_cr - center).arg(); // in (0, pi) for Im z_cr > 0
    // x0 is one of the circle's two real intersections: the one at angle 0
    // from the center iff x0 > center, else the one at angle pi.
    let (th0, th1) = if x0 > center {
        (-phi, phi)
    } else {
        // reached by decreasing the angle from 2pi-phi through pi
        (2.0 * std::f64::consts::PI - phi, phi)
    };
    let g = |th: f64| {
        let z = center + Complex64::from_polar(rad, th);
        f(z) * Complex64::new(0.0, 1.0) * Complex64::from_polar(rad, th)
    };
    let int = adaptive_simpson(&g, th0, th1, ARC_TOL, 48);
    int / Complex64::new(0.0, 2.0 * std::f64::consts::PI)
}

/// A bulk kernel argument pair: a liquid point `(tau, chi)` plus finite
/// offsets; heights enter only through `dh = h1 - h2`.
#[derive(Debug, Clone, Copy)]
pub struct BulkQuery {
    pub tau: f64,
    pub chi: f64,
    pub t1: i64,
    pub t2: i64,
    pub dh: Half,
}

/// Signed per-class counts `Delta N_i` of the half-integers between `t2`
/// and `t1`; they sum to `t1 - t2`.
pub fn delta_n(l: &LimitSpec, t1: i64, t2: i64) -> Vec<i64> {
    let mut out = vec![0i64; l.beta().l()];
    let (lo, hi, sign) = if t1 >= t2 { (t2, t1, 1) } else { (t1, t2, -1) };
    for j in (lo + 1)..=hi {
        let n = l.d_mod_k() as i64 - j;
        out[l.beta().class_of_residue(n)] += sign;
    }
    out
}

/// The bulk-edge limit kernel,
/// `(2 pi i)^{-1} int_C prod_i (1 - z e^{-tau} / b_i)^{dN_i} z^{-dh-dt/2-1} dz`.
pub fn bulk_kernel(l: &LimitSpec, q: &BulkQuery) -> Result<Complex64> {
    let dt = q.t1 - q.t2;
    let exp_num = -q.dh.twice() - dt - 2;
    if exp_num % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "dh = {} has wrong parity for dt = {dt}",
            q.dh
        )));
    }
    let a = (exp_num / 2) as i32; // z-exponent
    let dn = delta_n(l, q.t1, q.t2);
    debug_assert_eq!(dn.iter().sum::<i64>(), dt);
    let phase = critical_points(l, q.tau, q.chi)?;
    if phase.n_complex_pairs != 1 {
        return Err(Error::NotLiquid {
            tau: q.tau,
            chi: q.chi,
            n_pairs: phase.n_complex_pairs,
        });
    }
    let z_cr = phase.z_cr().expect("liquid point has z_cr");
    let betas = l.beta().distinct().to_vec();
    let e_tau = q.tau.exp();
    let x0 = if dt >= 0 {
        // log-midpoint of (beta_l gamma, e^tau beta_1)
        (betas[betas.len() - 1] * l.gamma() * e_tau * betas[0]).sqrt()
    } else {
        -z_cr.norm()
    };
    let one = Complex64::new(1.0, 0.0);
    let f = |z: Complex64| {
        let mut acc = z.powi(a);
        for (i, &b) in betas.iter().enumerate() {
            acc *= (one - z * (-q.tau).exp() / b).powi(dn[i] as i32);
        }
        acc
    };
    Ok(arc_integral(z_cr, x0, f))
}

/// Independent direct coding of the incomplete beta kernel,
/// `(2 pi i)^{-1} int (1-u)^{dt} u^{-dh-dt/2-1} du` between the conjugate
/// critical points, crossing `(0,1)` for `dt >= 0` and `(-inf, 0)` otherwise.
///
/// Deliberately self-contained so it can serve as an oracle for the bulk
/// and middle kernels.
pub fn incomplete_beta_kernel(u_cr: Complex64, dt: i64, dh: Half) -> Result<Complex64> {
    let exp_num = -dh.twice() - dt - 2;
    if exp_num % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "dh = {dh} has wrong parity for dt = {dt}"
        )));
    }
    let a = (exp_num / 2) as i32;
    let x0 = if dt >= 0 { 0.5 } else { -u_cr.norm().max(1.0) };
    let one = Complex64::new(1.0, 0.0);
    let f = |u: Complex64| (one - u).powi(dt as i32) * u.powi(a);
    Ok(arc_integral(u_cr, x0, f))
}

/// Arguments for the turning-point kernel: distances from the boundary and
/// rescaled heights around turning point `j`.
#[derive(Debug, Clone, Copy)]
pub struct TurningQuery {
    /// 1-based turning point index.
    pub j: usize,
    pub t_hat1: i64,
    pub t_hat2: i64,
    pub h_hat1: f64,
    pub h_hat2: f64,
}

/// Number of class-`class` slots among the first `t_hat` residues from the
/// boundary (`class` is 0-based into the distinct betas).
pub fn count_n_hat(l: &LimitSpec, t_hat: i64, class: usize) -> usize {
    if t_hat <= 0 {
        return 0;
    }
    (0..t_hat)
        .filter(|&n| l.beta().class_of_residue(n) == class)
        .count()
}

/// The density-normalized turning-point kernel `Khat = K / sqrt(r)`.
pub fn turning_kernel(l: &LimitSpec, q: &TurningQuery) -> Result<f64> {
    if q.j == 0 || q.j > l.beta().l() {
        return Err(Error::OutOfRange(format!(
            "turning index {} out of range",
            q.j
        )));
    }
    if q.t_hat1 < 1 || q.t_hat2 < 1 {
        return Err(Error::OutOfRange("t_hat must be >= 1".into()));
    }
    let tp: TurningPoint = turning_points(l)[q.j - 1];
    let n1 = count_n_hat(l, q.t_hat1, q.j - 1) as i32;
    let n2 = count_n_hat(l, q.t_hat2, q.j - 1) as i32;
    gaussian_pair_integral(tp.curvature, n1, n2, q.h_hat1, q.h_hat2)
}

/// The GUE-corners kernel: level `t` carries `t` particles.
pub fn gue_corners_kernel(c: f64, t1: i64, t2: i64, h1: f64, h2: f64) -> Result<f64> {
    if !(c < 0.0) {
        return Err(Error::OutOfRange(format!("need c < 0, got {c}")));
    }
    if t1 < 1 || t2 < 1 {
        return Err(Error::OutOfRange("levels must be >= 1".into()));
    }
    gaussian_pair_integral(c, t1 as i32, t2 as i32, h1, h2)
}

/// Shared engine for the turning-type kernels:
/// `(2 pi i)^{-2} int int e^{c(xi^2 - w^2)} w^{n2} xi^{-n1}
///  e^{h2 w - h1 xi} / (xi - w) dxi dw`.
///
/// The two contour integrals reduce exactly: with the `omega` line left of
/// the `xi` rays, `1/(xi - w) = int_0^infty e^{-s(xi - w)} ds`; the `xi`
/// integral is then `minus` the residue at the enclosed pole (a polynomial
/// in `h1 + s`), and the `omega` integral completes the square to a
/// Gaussian times a polynomial. What is left is a one-dimensional integral
/// of a polynomial-times-Gaussian in `s`, which is free of the catastrophic
/// cancellation the raw 2D quadrature suffers at large heights. The raw
/// double quadrature survives in test code as an independent oracle.
fn gaussian_pair_integral(c: f64, n1: i32, n2: i32, h1: f64, h2: f64) -> Result<f64> {
    if n1 <= 0 {
        // no pole: the xi contour slides to +infinity, the kernel vanishes
        return Ok(0.0);
    }
    let b = -c; // positive
    let a_poly = residue_poly(c, n1 as usize);
    let h_poly = hermite_like_poly(b, n2 as usize);
    let norm = 1.0 / (2.0 * (std::f64::consts::PI * b).sqrt());
    // integrand(s) = -A_{n1}(h1+s) * H_{n2}(h2+s) * e^{-(h2+s)^2/(4b)} * norm
    let f = |s: f64| {
        let y1 = h1 + s;
        let y2 = h2 + s;
        -eval_poly(&a_poly, y1) * eval_poly(&h_poly, y2) * (-y2 * y2 / (4.0 * b)).exp() * norm
    };
    // The Gaussian is centered at s = -h2; integrate far enough past it.
    let spread = (4.0 * b).sqrt();
    let s_max = (-h2).max(0.0) + spread * (7.0 + (n1 + n2) as f64);
    let (nodes, weights) = gauss_legendre(24);
    let eval = |n: usize| -> Result<Complex64> {
        let panels = (n / 4).max(4);
        let mut acc = 0.0;
        for p in 0..panels {
            let a = s_max * p as f64 / panels as f64;
            let bnd = s_max * (p + 1) as f64 / panels as f64;
            for (&x, &w) in nodes.iter().zip(&weights) {
                let s = 0.5 * (a + bnd) + 0.5 * (bnd - a) * x;
                acc += 0.5 * (bnd - a) * w * f(s);
            }
        }
        Ok(Complex64::new(acc, 0.0))
    };
    let (v, _err, _n) = converge_doubling(eval, 16, 1e-11, 7)?;
    Ok(v.re)
}

/// `A_n(y) = [xi^{n-1}] e^{c xi^2 - y xi}` as polynomial coefficients in `y`
/// (ascending): `sum_{2j+m=n-1} c^j (-1)^m y^m / (j! m!)`.
fn residue_poly(c: f64, n: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; n];
    let mut j = 0usize;
    while 2 * j <= n - 1 {
        let m = n - 1 - 2 * j;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[m] = sign * c.powi(j as i32) / (factorial(j) * factorial(m));
        j += 1;
    }
    coeffs
}

/// `H_n` with `(d/dy)^n [e^{-y^2/(4b)}] = H_n(y) e^{-y^2/(4b)}`:
/// `H_{n+1} = H_n' - y/(2b) H_n`.
fn hermite_like_poly(b: f64, n: usize) -> Vec<f64> {
    let mut h = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; h.len() + 1];
        for (m, &cm) in h.iter().enumerate() {
            if m >= 1 {
                next[m - 1] += cm * m as f64; // derivative term
            }
            next[m + 1] -= cm / (2.0 * b); // -y/(2b) term
        }
        h = next;
    }
    h
}

fn eval_poly(coeffs: &[f64], y: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * y + c;
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Arguments for the middle-slice kernel at the phase transition.
#[derive(Debug, Clone, Copy)]
pub struct MiddleQuery {
    pub chi: f64,
    pub t1: i64,
    pub t2: i64,
    pub dh: Half,
}

/// Signed count of half-integers between `t1` and `t2` with `y_m = 1`
/// (those with `|m| = 1/2 mod 2`); positive when `t1 >= t2`.
pub fn middle_a_count(t1: i64, t2: i64) -> i64 {
    let (lo, hi, sign) = if t1 >= t2 { (t2, t1, 1) } else { (t1, t2, -1) };
    let mut count = 0i64;
    for j in (lo + 1)..=hi {
        // m = j - 1/2; y_m = 1 iff (|2m| - 1)/2 is even
        let twice_abs = (2 * j - 1).abs();
        if ((twice_abs - 1) / 2) % 2 == 0 {
            count += sign;
        }
    }
    count
}

/// The middle-slice kernel
/// `(2 pi i)^{-1} int_C (1-z)^A (1-z/alpha)^{dt-A} z^{-dh-dt/2-1} dz`.
pub fn middle_kernel(mm: &MiddleModel, q: &MiddleQuery) -> Result<Complex64> {
    let dt = q.t1 - q.t2;
    let exp_num = -q.dh.twice() - dt - 2;
    if exp_num % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "dh = {} has wrong parity for dt = {dt}",
            q.dh
        )));
    }
    let a_exp = (exp_num / 2) as i32;
    let a_count = middle_a_count(q.t1, q.t2);
    let z_cr = mm.z_cr(q.chi)?;
    let alpha = mm.alpha;
    let x0 = if dt >= 0 { alpha.sqrt() } else { -z_cr.norm() };
    let one = Complex64::new(1.0, 0.0);
    let f = |z: Complex64| {
        (one - z).powi(a_count as i32)
            * (one - z / alpha).powi((dt - a_count) as i32)
            * z.powi(a_exp)
    };
    Ok(arc_integral(z_cr, x0, f))
}

/// Integrates the diagonal of a turning-type kernel over heights, for the
/// level-sum identities; the diagonal decays like a Gaussian of scale
/// `sqrt(2 |c| n)`.
pub fn level_mass<F: Fn(f64) -> Result<f64>>(diag: F, c: f64, n: usize) -> Result<f64> {
    let sigma = (2.0 * c.abs()).sqrt() * (n as f64).sqrt().max(1.0);
    let half_width = 8.0 * sigma + 2.0;
    let (nodes, weights) = gauss_legendre(24);
    let panels = 20usize;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = -half_width + 2.0 * half_width * p as f64 / panels as f64;
        let b = -half_width + 2.0 * half_width * (p + 1) as f64 / panels as f64;
        for (&x, &w) in nodes.iter().zip(&weights) {
            let h = 0.5 * (a + b) + 0.5 * (b - a) * x;
            acc += 0.5 * (b - a) * w * diag(h)?;
        }
    }
    Ok(acc)
}
