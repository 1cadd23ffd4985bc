//! Complex dilogarithm on the principal branch (cut along `[1, oo)`).
//!
//! Used to evaluate the action integrals in closed form. The evaluation
//! strategy is the classical one: invert `|z| > 1` into the unit disk, then
//! sum the Bernoulli series in `w = -ln(1 - z)`, which converges rapidly for
//! `|z| <= 1` since `|w| < 2 pi` with a wide margin there.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `B_{2n}` for `2n = 0..=30`, plus `B_1 = -1/2` handled explicitly.
const BERNOULLI_EVEN: [f64; 16] = [
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// The dilogarithm `Li2(z) = -int_0^z ln(1-u)/u du`.
pub fn li2(z: Complex64) -> Complex64 {
    if z.norm_sqr() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.norm() > 1.0 {
        // Li2(z) = -Li2(1/z) - pi^2/6 - ln(-z)^2 / 2
        let ln_neg = (-z).ln();
        return -li2_disk(1.0 / z) - Complex64::new(PI * PI / 6.0, 0.0) - 0.5 * ln_neg * ln_neg;
    }
    li2_disk(z)
}

fn li2_disk(z: Complex64) -> Complex64 {
    let w = -(Complex64::new(1.0, 0.0) - z).ln();
    // Li2(z) = sum_k B_k w^{k+1} / (k+1)!
    let mut term = w; // k = 0
    let mut acc = term;
    // k = 1 term: B_1 w^2/2 with B_1 = -1/2
    acc -= 0.25 * w * w;
    let w2 = w * w;
    let mut fact_pow = w; // w^{k+1}/(k+1)! running value for even k
    for (n, &b) in BERNOULLI_EVEN.iter().enumerate().skip(1) {
        let k = 2 * n;
        // advance from w^{k-1}/(k-1)! to w^{k+1}/(k+1)!
        fact_pow = fact_pow * w2 / ((k * (k + 1)) as f64);
        term = b * fact_pow;
        acc += term;
        if term.norm() < 1e-17 * acc.norm().max(1e-30) {
            break;
        }
    }
    acc
}
