//! Dense complex polynomials and an Aberth-Ehrlich simultaneous root
//! finder. Degrees here are small (at most `2k` for the critical-point
//! polynomial), so a dense representation and all-at-once iteration are
//! appropriate. The companion-matrix eigenvalue route is kept in test code
//! as an independent oracle.

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// A polynomial `c0 + c1 z + ... + cn z^n` with complex coefficients.
#[derive(Debug, Clone)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn one() -> Self {
        Poly::new(vec![Complex64::new(1.0, 0.0)])
    }

    /// `(z - a)^m`.
    pub fn linear_power(a: Complex64, m: usize) -> Self {
        let lin = Poly::new(vec![-a, Complex64::new(1.0, 0.0)]);
        let mut acc = Poly::one();
        for _ in 0..m {
            acc = acc.mul(&lin);
        }
        acc
    }

    fn trim(&mut self) {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        while self.coeffs.len() > 1 {
            if self.coeffs.last().unwrap().norm() > 1e-14 * scale {
                break;
            }
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        Poly::new(out)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn eval_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// All complex roots by Aberth-Ehrlich iteration with Newton polishing.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let mut coeffs = self.coeffs.clone();
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Err(Error::RootsDiverged { iters: 0 });
        }
        for c in coeffs.iter_mut() {
            *c /= scale;
        }
        // Deflate exact zero roots.
        let mut zero_roots = 0;
        while coeffs.len() > 1 && coeffs[0].norm() < 1e-300 {
            coeffs.remove(0);
            zero_roots += 1;
        }
        let n = coeffs.len() - 1;
        let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];
        if n == 0 {
            return Ok(roots);
        }
        let p = Poly {
            coeffs: coeffs.clone(),
        };

        // Initial guesses on a circle scaled by the root-magnitude estimate.
        let an = coeffs[n].norm();
        let radius = (coeffs[0].norm() / an).powf(1.0 / n as f64).max(1e-6);
        let mut zs: Vec<Complex64> = (0..n)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.37) / n as f64 + 0.5;
                Complex64::from_polar(radius * (1.0 + 0.05 * j as f64 / n as f64), th)
            })
            .collect();

        let max_iter = 600;
        for _ in 0..max_iter {
            let mut max_step = 0.0f64;
            for i in 0..n {
                let (pv, dpv) = p.eval_with_deriv(zs[i]);
                if pv.norm() == 0.0 {
                    continue;
                }
                let newton = if dpv.norm() > 0.0 {
                    pv / dpv
                } else {
                    Complex64::new(1e-8, 1e-8)
                };
                let mut sum = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        let d = zs[i] - zs[j];
                        if d.norm() > 1e-280 {
                            sum += 1.0 / d;
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - newton * sum;
                let step = if denom.norm() > 1e-280 {
                    newton / denom
                } else {
                    newton
                };
                zs[i] -= step;
                let rel = step.norm() / (1.0 + zs[i].norm());
                max_step = max_step.max(rel);
            }
            if max_step < 1e-14 {
                break;
            }
        }
        // Newton polish, then accept on residuals rather than step counts.
        for z in zs.iter_mut() {
            for _ in 0..5 {
                let (pv, dpv) = p.eval_with_deriv(*z);
                if dpv.norm() > 0.0 {
                    let step = pv / dpv;
                    if step.norm() < 1.0 + z.norm() {
                        *z -= step;
                    }
                }
            }
        }
        for &z in &zs {
            let scale: f64 = p
                .coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c.norm() * z.norm().powi(j as i32))
                .sum();
            let (pv, _) = p.eval_with_deriv(z);
            if !(pv.norm() <= 1e-9 * scale.max(1e-300)) {
                return Err(Error::RootsDiverged { iters: max_iter });
            }
        }
        roots.extend(zs);
        Ok(roots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sort_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn quadratic_roots() {
        // (z - 2)(z + 3i)
        let p = Poly::linear_power(Complex64::new(2.0, 0.0), 1)
            .mul(&Poly::linear_power(Complex64::new(0.0, -3.0), 1));
        let roots = sort_by_re_im(p.roots().unwrap());
        assert_relative_eq!(roots[0].re, 0.0, epsilon = 1e-10);
        assert_relative_eq!(roots[0].im, -3.0, epsilon = 1e-10);
        assert_relative_eq!(roots[1].re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn recovers_scattered_roots_degree_8() {
        let targets = vec![
            Complex64::new(0.3, 0.0),
            Complex64::new(-1.5, 0.0),
            Complex64::new(2.0, 1.0),
            Complex64::new(2.0, -1.0),
            Complex64::new(-0.25, 0.8),
            Complex64::new(-0.25, -0.8),
            Complex64::new(5.0, 0.0),
            Complex64::new(0.01, 0.0),
        ];
        let mut p = Poly::one();
        for &t in &targets {
            p = p.mul(&Poly::linear_power(t, 1));
        }
        let roots = p.roots().unwrap();
        for &t in &targets {
            let best = roots.iter().map(|r| (r - t).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-8, "missed root {t}, best distance {best}");
        }
    }

    #[test]
    fn matches_companion_matrix_oracle() {
        // Independent check via nalgebra's eigenvalue solver.
        let coeffs = [3.0, -2.0, 0.5, 1.0, -0.7, 2.0];
        let p = Poly::from_real(&coeffs);
        let n = p.degree();
        let mut companion = nalgebra::DMatrix::<f64>::zeros(n, n);
        let an = coeffs[n];
        for i in 0..n {
            companion[(i, n - 1)] = -coeffs[i] / an;
            if i + 1 < n {
                companion[(i + 1, i)] = 1.0;
            }
        }
        let eig = companion.complex_eigenvalues();
        let roots = p.roots().unwrap();
        for ev in eig.iter() {
            let best = roots
                .iter()
                .map(|r| (r - Complex64::new(ev.re, ev.im)).norm())
                .fold(f64::MAX, f64::min);
            assert!(best < 1e-8, "companion eigenvalue {ev} unmatched ({best})");
        }
    }

    #[test]
    fn handles_zero_roots() {
        // z^2 (z - 1)
        let p = Poly::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]);
        let roots = p.roots().unwrap();
        assert_eq!(roots.len(), 3);
        let ones = roots.iter().filter(|r| (*r - 1.0).norm() < 1e-9).count();
        assert_eq!(ones, 1);
    }
}
