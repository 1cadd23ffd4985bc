//! The scaled action `S_{tau,chi}`, its critical points, the phase diagram,
//! the turning-point data with their edge expansions, and the k = 2 middle
//! model (`V = infinity`) with its closed-form frozen boundary.
//!
//! Critical points of `S` are found by exponentiating `k z S' = 0` into the
//! degree-`2k` polynomial
//!
//! ```text
//! z^k prod_i (z - b_i e^V)^{m_i}
//!   = e^{k(V + chi - tau/2)} prod_i (z - b_i g)^{m_i} (z - b_i e^tau)^{m_i}
//! ```
//!
//! (`b_i` the distinct betas, `g` = gamma) and filtering the spurious roots
//! the exponentiation introduces: a root is genuine iff the principal-branch
//! value of `z S'` actually vanishes, not just lies in `(2 pi i / k) Z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilog::li2;
use crate::error::Error;
use crate::poly::Poly;
use crate::weights::{BetaData, WeightSpec, ALPHA_PRODUCT_TOL};
use crate::Result;

/// Tolerance for accepting a polynomial root as a genuine critical point.
pub const SP_FILTER_TOL: f64 = 1e-8;
/// Imaginary parts below this (relative) threshold count as real roots.
const IM_TOL: f64 = 1e-7;

/// The `r -> 0` limit of a weight spec: `d` grows as `V / r` with
/// `d mod k` held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSpec {
    k: usize,
    alphas: Vec<f64>,
    v: f64,
    d_mod_k: usize,
    gamma: f64,
    beta: BetaData,
}

impl LimitSpec {
    pub fn new(k: usize, alphas: Vec<f64>, v: f64, d_mod_k: usize) -> Result<Self> {
        if k == 0 || alphas.len() != k {
            return Err(Error::InvalidSpec(format!(
                "need k >= 1 alphas, got k={k}, {} values",
                alphas.len()
            )));
        }
        if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidSpec("alphas must be positive finite".into()));
        }
        let prod: f64 = alphas.iter().product();
        if (prod - 1.0).abs() > ALPHA_PRODUCT_TOL {
            return Err(Error::InvalidSpec(format!(
                "prod(alpha) = {prod} differs from 1 beyond {ALPHA_PRODUCT_TOL:e}"
            )));
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidSpec(format!("need V > 0, got {v}")));
        }
        let gamma: f64 = alphas.iter().filter(|&&a| a < 1.0).product();
        let beta = BetaData::new(k, &alphas, d_mod_k % k);
        Ok(LimitSpec {
            k,
            alphas,
            v,
            d_mod_k: d_mod_k % k,
            gamma,
            beta,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn d_mod_k(&self) -> usize {
        self.d_mod_k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> &BetaData {
        &self.beta
    }

    /// The finite-size spec at rate `r`, with `d` snapped to the limit's
    /// residue class so the beta data match.
    pub fn at_r(&self, r: f64) -> Result<WeightSpec> {
        if !(r > 0.0) {
            return Err(Error::InvalidSpec(format!("need r > 0, got {r}")));
        }
        let raw = (self.v / r).round() as i64;
        let k = self.k as i64;
        let want = self.d_mod_k as i64;
        let mut best: Option<i64> = None;
        for cand in (raw - k)..=(raw + k) {
            if cand >= 1 && cand.rem_euclid(k) == want {
                let better = match best {
                    None => true,
                    Some(b) => (cand - raw).abs() < (b - raw).abs(),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        let d = best.ok_or_else(|| Error::InvalidSpec("no admissible depth".into()))?;
        WeightSpec::new(self.k, self.alphas.clone(), r, d as usize)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&LimitSpecRepr {
            k: self.k,
            alphas: self.alphas.clone(),
            v: self.v,
            d_mod_k: self.d_mod_k,
        })
        .expect("limit spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: LimitSpecRepr =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("limit spec: {e}")))?;
        LimitSpec::new(repr.k, repr.alphas, repr.v, repr.d_mod_k)
    }

    /// Distinct betas scaled to the right edge, `b_i e^V`.
    fn edge_points(&self) -> Vec<f64> {
        self.beta
            .distinct()
            .iter()
            .map(|&b| b * self.v.exp())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct LimitSpecRepr {
    k: usize,
    alphas: Vec<f64>,
    #[serde(rename = "V")]
    v: f64,
    d_mod_k: usize,
}

fn branch_segments(l: &LimitSpec, tau: f64) -> Vec<(f64, f64)> {
    // Branch segments of S: [0, b_i g e^{min(tau,0)}] and
    // [b_i e^{max(tau,0)}, b_i e^V].
    let e_min = tau.min(0.0).exp();
    let e_max = tau.max(0.0).exp();
    let mut segs = vec![(0.0, l.beta.distinct().last().unwrap() * l.gamma * e_min)];
    for &b in l.beta.distinct() {
        segs.push((b * e_max, b * l.v.exp()));
    }
    segs
}

fn on_branch_segment(l: &LimitSpec, tau: f64, z: Complex64) -> bool {
    if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
        return false;
    }
    branch_segments(l, tau)
        .iter()
        .any(|&(a, b)| z.re >= a - 1e-12 && z.re <= b + 1e-12)
}

/// The action `S_{tau,chi}(z)` via dilogarithms.
pub fn action_s(l: &LimitSpec, tau: f64, chi: f64, z: Complex64) -> Result<Complex64> {
    if on_branch_segment(l, tau, z) {
        return Err(Error::OnBranchCut { z });
    }
    let e_min = tau.min(0.0).exp();
    let e_max = tau.max(0.0).exp();
    let ev = l.v.exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &b) in l.beta.distinct().iter().enumerate() {
        let m = l.beta.mults()[i] as f64;
        acc += m
            * (-li2(b * l.gamma * e_min / z) - li2(z / (b * ev)) + li2(z / (b * e_max)));
    }
    acc /= l.k as f64;
    acc -= (chi + 0.5 * tau.abs()) * z.ln();
    Ok(acc)
}

/// `Sp(z) = z dS/dz` with principal-branch logarithms.
pub fn sp(l: &LimitSpec, tau: f64, chi: f64, z: Complex64) -> Complex64 {
    let e_min = tau.min(0.0).exp();
    let e_max = tau.max(0.0).exp();
    let ev = l.v.exp();
    // At tau = V the edge group is identically zero (and 0/0 at z = b e^V).
    let edge_active = e_max < ev;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &b) in l.beta.distinct().iter().enumerate() {
        let m = l.beta.mults()[i] as f64;
        acc -= m * ((z - b * l.gamma * e_min) / z).ln();
        if edge_active {
            acc += m * ((z - b * ev) / (z - b * e_max)).ln();
        }
    }
    acc / l.k as f64 + Complex64::new(-l.v - chi + 0.5 * tau, 0.0)
}

/// `Spp(z) = d/dz (z dS/dz)`; independent of `chi`.
pub fn spp(l: &LimitSpec, tau: f64, z: Complex64) -> Complex64 {
    let e_min = tau.min(0.0).exp();
    let e_max = tau.max(0.0).exp();
    let ev = l.v.exp();
    let edge_active = e_max < ev;
    let one = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &b) in l.beta.distinct().iter().enumerate() {
        let m = l.beta.mults()[i] as f64;
        acc -= m * (one / (z - b * l.gamma * e_min) - one / z);
        if edge_active {
            acc += m * (one / (z - b * ev) - one / (z - b * e_max));
        }
    }
    acc / l.k as f64
}

/// Critical-point data of `S_{tau,chi}` at a scaled point.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    pub tau: f64,
    pub chi: f64,
    /// Genuine critical points (spurious exponentiation roots removed).
    pub roots: Vec<Complex64>,
    /// Number of conjugate non-real pairs (0 = frozen, 1 = liquid).
    pub n_complex_pairs: usize,
}

impl PhasePoint {
    /// The critical point with positive imaginary part, if liquid.
    pub fn z_cr(&self) -> Option<Complex64> {
        self.roots
            .iter()
            .copied()
            .find(|z| z.im > IM_TOL * (1.0 + z.norm()))
    }
}

/// The exponentiated critical equation as a polynomial in `z`.
pub fn critical_polynomial(l: &LimitSpec, tau: f64, chi: f64) -> Result<Poly> {
    if tau < 0.0 || tau >= l.v {
        return Err(Error::OutOfRange(format!(
            "critical points want 0 <= tau < V, got tau={tau}"
        )));
    }
    let ev = l.v.exp();
    let et = tau.exp();
    let c = (l.k as f64 * (l.v + chi - 0.5 * tau)).exp();
    if !c.is_finite() {
        return Err(Error::OutOfRange(format!(
            "e^(k(V+chi-tau/2)) overflows at chi={chi}"
        )));
    }
    let mut lhs = Poly::linear_power(Complex64::new(0.0, 0.0), l.k);
    let mut rhs = Poly::one();
    for (i, &b) in l.beta.distinct().iter().enumerate() {
        let m = l.beta.mults()[i];
        lhs = lhs.mul(&Poly::linear_power(Complex64::new(b * ev, 0.0), m));
        rhs = rhs.mul(&Poly::linear_power(Complex64::new(b * l.gamma, 0.0), m));
        rhs = rhs.mul(&Poly::linear_power(Complex64::new(b * et, 0.0), m));
    }
    Ok(lhs.sub(&rhs.scale(Complex64::new(c, 0.0))))
}

/// Solves for the critical points of `S_{tau,chi}` and classifies the phase.
pub fn critical_points(l: &LimitSpec, tau: f64, chi: f64) -> Result<PhasePoint> {
    let poly = critical_polynomial(l, tau, chi)?;
    let candidates = poly.roots()?;
    let mut roots: Vec<Complex64> = candidates
        .into_iter()
        .filter(|&z| {
            let v = sp(l, tau, chi, z);
            v.is_finite() && v.norm() < SP_FILTER_TOL
        })
        .collect();
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let n_complex_pairs = roots
        .iter()
        .filter(|z| z.im > IM_TOL * (1.0 + z.norm()))
        .count();
    Ok(PhasePoint {
        tau,
        chi,
        roots,
        n_complex_pairs,
    })
}

/// One turning point at the right edge `tau = V`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TurningPoint {
    /// 1-based index; `j = 1` is the highest turning point.
    pub j: usize,
    /// The degenerate critical point `z_j = tilde beta_j e^V`.
    pub z: f64,
    /// Height `chi_j`.
    pub chi: f64,
    /// Square-root coefficient of the double-root location.
    pub f: f64,
    /// `c_j = S''(z_j) z_j^2 / 2 < 0`.
    pub curvature: f64,
}

/// All turning points, ordered by decreasing height (`j = 1` first).
pub fn turning_points(l: &LimitSpec) -> Vec<TurningPoint> {
    let ev = l.v.exp();
    let k = l.k as f64;
    let betas = l.beta.distinct();
    let mults = l.beta.mults();
    (0..betas.len())
        .map(|j| {
            let zj = betas[j] * ev;
            let mut log_sum = 0.0;
            let mut denom = 0.0;
            for (i, &bi) in betas.iter().enumerate() {
                let m = mults[i] as f64;
                log_sum += m * ((zj - bi * l.gamma) / zj).ln();
                denom += m * bi * l.gamma / (zj - bi * l.gamma);
            }
            let chi = -0.5 * l.v - log_sum / k;
            let f = (mults[j] as f64).sqrt() * zj / denom.sqrt();
            let curvature = -denom / (2.0 * k);
            TurningPoint {
                j: j + 1,
                z: zj,
                chi,
                f,
                curvature,
            }
        })
        .collect()
}

/// The `O(sqrt(eps))` expansion of the double-root heights at
/// `tau = V - eps`: returns `(chi_{j,+}, chi_{j,-})`.
///
/// Both square-root terms of the expansion reduce to
/// `(m_j / k) (z_j / f_j) sqrt(eps)` after inserting the definition of
/// `f_j`, so the two branches sit at `chi_j -+ 2 m_j z_j / (k f_j) sqrt(eps)`.
pub fn chi_expansion(l: &LimitSpec, j: usize, eps: f64) -> (f64, f64) {
    let tp = &turning_points(l)[j - 1];
    let m_j = l.beta.mults()[j - 1] as f64;
    let delta = 2.0 * m_j * tp.z / (l.k as f64 * tp.f) * eps.sqrt();
    (tp.chi - delta, tp.chi + delta)
}

/// Suggested cap on `eps = V - tau` for the edge expansions: a fraction of
/// the smallest relative spacing of the edge points `tilde beta_i e^V`.
pub fn epsilon_cap(l: &LimitSpec) -> f64 {
    let pts = l.edge_points();
    let mut cap: f64 = 0.5;
    for w in pts.windows(2) {
        cap = cap.min(0.1 * (w[1] - w[0]) / w[1]);
    }
    cap
}

/// Which side of a turning point a double-root branch sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `z > tilde beta_j e^V`: the lower liquid edge `chi_{j,+}`.
    Plus,
    /// `z < tilde beta_j e^{tau}` side: the upper edge `chi_{j,-}`.
    Minus,
}

/// Locates the real double root of `S_{tau, .}` on the given branch of
/// turning point `j` by a sign scan plus bisection on `Spp`, then reads
/// `chi` off `Sp = 0`. Independent of the edge expansions.
pub fn double_root(l: &LimitSpec, tau: f64, j: usize, branch: Branch) -> Result<(f64, f64)> {
    if tau < 0.0 || tau >= l.v {
        return Err(Error::OutOfRange(format!("double_root wants 0 <= tau < V, got {tau}")));
    }
    let betas = l.beta.distinct();
    let lnum = betas.len();
    if j == 0 || j > lnum {
        return Err(Error::OutOfRange(format!("turning index {j} out of 1..={lnum}")));
    }
    let ev = l.v.exp();
    let et = tau.exp();
    let f = |x: f64| spp(l, tau, Complex64::new(x, 0.0)).re;
    // Interval ends (open); Spp blows up at both, with the relevant zero
    // adjacent to the turning point's end.
    let (a, b, from_left) = match branch {
        Branch::Plus => {
            let a = betas[j - 1] * ev;
            let b = if j == lnum {
                a * 40.0
            } else {
                betas[j] * et
            };
            (a, b, true) // zero nearest a
        }
        Branch::Minus => {
            let b = betas[j - 1] * et;
            let a = if j == 1 {
                betas[lnum - 1] * l.gamma
            } else {
                betas[j - 2] * ev
            };
            (a, b, false) // zero nearest b
        }
    };
    // Log-spaced scan from the relevant endpoint inward.
    let span = b - a;
    let mut prev_x = None;
    let mut found = None;
    for i in 0..2400 {
        let s = 10f64.powf(-14.0 + 14.0 * i as f64 / 2399.0);
        let x = if from_left { a + span * s } else { b - span * s };
        let v = f(x);
        if !v.is_finite() {
            continue;
        }
        if let Some((px, pv)) = prev_x {
            if v * pv < 0.0 {
                found = Some(if px < x { (px, x) } else { (x, px) });
                break;
            }
        }
        prev_x = Some((x, v));
    }
    let (mut lo, mut hi) = found.ok_or(Error::RootsDiverged { iters: 2400 })?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if v * f(lo) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    let z = 0.5 * (lo + hi);
    // Sp(z) = G(z) - chi, so the double-root height is chi = G(z).
    let chi = sp(l, tau, 0.0, Complex64::new(z, 0.0)).re;
    Ok((z, chi))
}

/// The k = 2 frozen boundary in closed form together with the double-root
/// locations `z = +- e^{tau/2}`; `chi_plus` is infinite at `tau = 0`.
#[derive(Debug, Clone, Copy)]
pub struct FrozenBoundaryK2 {
    pub chi_plus: f64,
    pub chi_minus: f64,
    pub z_plus: f64,
    pub z_minus: f64,
}

/// `chi_+-(tau) = -ln(1 -+ e^{-|tau|/2}) - ln(1 -+ alpha^{-1} e^{-|tau|/2}) - |tau|/2`.
pub fn frozen_boundary_k2(alpha: f64, tau: f64) -> Result<FrozenBoundaryK2> {
    if !(alpha > 1.0) {
        return Err(Error::OutOfRange(format!("need alpha > 1, got {alpha}")));
    }
    let e = (-0.5 * tau.abs()).exp();
    let half = 0.5 * tau.abs();
    let chi_plus = if tau == 0.0 {
        f64::INFINITY
    } else {
        -(1.0 - e).ln() - (1.0 - e / alpha).ln() - half
    };
    let chi_minus = -(1.0 + e).ln() - (1.0 + e / alpha).ln() - half;
    Ok(FrozenBoundaryK2 {
        chi_plus,
        chi_minus,
        z_plus: (0.5 * tau).exp(),
        z_minus: -(0.5 * tau).exp(),
    })
}

/// The k = 2 middle model: `alpha_0 = alpha >= 1`, `alpha_1 = gamma = 1/alpha`,
/// `V = infinity`. Valid for either sign of `tau`; `alpha = 1` is the
/// homogeneous degeneration (the incomplete beta process).
#[derive(Debug, Clone, Copy)]
pub struct MiddleModel {
    pub alpha: f64,
}

impl MiddleModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::OutOfRange(format!("need alpha >= 1, got {alpha}")));
        }
        Ok(MiddleModel { alpha })
    }

    /// `z dS/dz` for the middle model.
    pub fn sp(&self, tau: f64, chi: f64, z: Complex64) -> Complex64 {
        let em = tau.min(0.0).exp();
        let ex = tau.max(0.0).exp();
        let a = self.alpha;
        let term = -((z - em) / z).ln() - ((z - em / a) / z).ln()
            + (-1.0 / (z - ex)).ln()
            + (-a / (z - a * ex)).ln();
        0.5 * term + Complex64::new(-chi + 0.5 * tau, 0.0)
    }

    /// `d/dz (z dS/dz)` for the middle model.
    pub fn spp(&self, tau: f64, z: Complex64) -> Complex64 {
        let em = tau.min(0.0).exp();
        let ex = tau.max(0.0).exp();
        let a = self.alpha;
        let one = Complex64::new(1.0, 0.0);
        0.5 * (2.0 * one / z - one / (z - em) - one / (z - em / a)
            - one / (z - ex)
            - one / (z - a * ex))
    }

    /// Critical points of `S_{0,chi}`: roots of the quartic
    /// `e^{2 chi} (z-1)^2 (z-1/alpha)(z-alpha) = alpha z^2`, filtered to the
    /// genuine ones.
    pub fn critical_points(&self, chi: f64) -> Result<Vec<Complex64>> {
        let a = self.alpha;
        let c = (2.0 * chi).exp();
        let one = Complex64::new(1.0, 0.0);
        let p = Poly::linear_power(one, 2)
            .mul(&Poly::linear_power(Complex64::new(1.0 / a, 0.0), 1))
            .mul(&Poly::linear_power(Complex64::new(a, 0.0), 1))
            .scale(Complex64::new(c, 0.0))
            .sub(&Poly::linear_power(Complex64::new(0.0, 0.0), 2).scale(Complex64::new(a, 0.0)));
        let roots = p.roots()?;
        Ok(roots
            .into_iter()
            .filter(|&z| {
                let v = self.sp(0.0, chi, z);
                v.is_finite() && v.norm() < SP_FILTER_TOL
            })
            .collect())
    }

    /// The conjugate critical point with positive imaginary part at
    /// `tau = 0`, if the point is liquid.
    pub fn z_cr(&self, chi: f64) -> Result<Complex64> {
        let roots = self.critical_points(chi)?;
        roots
            .iter()
            .copied()
            .find(|z| z.im > IM_TOL * (1.0 + z.norm()))
            .ok_or(Error::NotLiquid {
                tau: 0.0,
                chi,
                n_pairs: 0,
            })
    }

    /// `chi_-(0)`, the lower end of the liquid window on the middle slice.
    pub fn chi_minus_at_zero(&self) -> f64 {
        -(2.0f64.ln()) - (1.0 + 1.0 / self.alpha).ln()
    }

    /// Newton/bisection location of the real double root for either sign of
    /// `tau`, independent of the closed form `z = +- e^{tau/2}`.
    pub fn double_root(&self, tau: f64, branch: Branch) -> Result<(f64, f64)> {
        let f = |x: f64| self.spp(tau, Complex64::new(x, 0.0)).re;
        let (mut lo, mut hi) = match branch {
            Branch::Plus => {
                // allowed positive window between the pole groups
                let (lo, hi) = if tau >= 0.0 {
                    (1.0, tau.exp())
                } else {
                    (tau.exp(), 1.0)
                };
                (lo, hi)
            }
            Branch::Minus => (-(tau.abs().exp()) * 40.0 - 40.0, -1e-12),
        };
        // bisection seeded by a sign scan
        let n = 4000;
        let mut bracket = None;
        let mut prev: Option<(f64, f64)> = None;
        for i in 1..n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let v = f(x);
            if !v.is_finite() {
                continue;
            }
            if let Some((px, pv)) = prev {
                if pv * v < 0.0 {
                    bracket = Some((px, x));
                    break;
                }
            }
            prev = Some((x, v));
        }
        let (a_, b_) = bracket.ok_or(Error::RootsDiverged { iters: n })?;
        lo = a_;
        hi = b_;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) * f(lo) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        let z = 0.5 * (lo + hi);
        let chi = self.sp(tau, 0.0, Complex64::new(z, 0.0)).re;
        Ok((z, chi))
    }
}
