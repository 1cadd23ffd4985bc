//! Weight sequences `q_i`, the corner correction `gamma`, the `beta` data,
//! the kernel specializations `x^+-_m`, and the slice-class counters `N_{t,i}`.
//!
//! A spec is `k` positive reals `alpha_0..alpha_{k-1}` with unit product, a
//! rate `r > 0` (so `q = e^-r`), and a box depth `d`. Box columns on slice `t`
//! receive weight `q * alpha_{t mod k}`, except the corner slice `t = 0`
//! whose weight carries the extra factor `gamma = prod_{alpha_j < 1} alpha_j`;
//! without that correction the partition function diverges.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::Half;
use crate::Result;

/// Relative tolerance for the `prod alpha = 1` validation.
pub const ALPHA_PRODUCT_TOL: f64 = 1e-12;
/// Relative tolerance under which two partial products count as one beta.
const BETA_MERGE_TOL: f64 = 1e-9;

/// The multiset structure of `beta_1..beta_k`.
///
/// `beta_i = alpha_{d-1} * ... * alpha_{d-i}` (indices mod `k`); the sequence
/// is `k`-periodic because the alphas multiply to one. `distinct` lists the
/// sorted distinct values and `mults` their multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaData {
    betas: Vec<f64>,
    distinct: Vec<f64>,
    mults: Vec<usize>,
    class_of_residue: Vec<usize>,
}

impl BetaData {
    /// Builds the beta data for period `k`, weights `alphas`, and depth
    /// residue `d_mod_k`. Independent of `r`.
    pub fn new(k: usize, alphas: &[f64], d_mod_k: usize) -> Self {
        let idx = |s: i64| -> usize { s.rem_euclid(k as i64) as usize };
        let mut betas = Vec::with_capacity(k);
        let mut prod = 1.0;
        for i in 1..=k as i64 {
            prod *= alphas[idx(d_mod_k as i64 - i)];
            betas.push(prod);
        }
        let mut sorted: Vec<f64> = betas.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut distinct: Vec<f64> = Vec::new();
        let mut mults: Vec<usize> = Vec::new();
        for &b in &sorted {
            match distinct.last() {
                Some(&last) if (b - last).abs() <= BETA_MERGE_TOL * last.abs() => {
                    *mults.last_mut().unwrap() += 1;
                }
                _ => {
                    distinct.push(b);
                    mults.push(1);
                }
            }
        }
        // Residue n of d - m - 1/2 maps to beta_n with beta_0 = beta_k.
        let class_of_residue = (0..k)
            .map(|n| {
                let b = if n == 0 { betas[k - 1] } else { betas[n - 1] };
                Self::class_of_value(&distinct, b)
            })
            .collect();
        BetaData {
            betas,
            distinct,
            mults,
            class_of_residue,
        }
    }

    fn class_of_value(distinct: &[f64], b: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, &v) in distinct.iter().enumerate() {
            let d = (v - b).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// `beta_1..beta_k`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `beta_s` for any integer `s`, via the `k`-periodic extension
    /// (`beta_0 = beta_k = 1`).
    pub fn beta_periodic(&self, s: i64) -> f64 {
        let k = self.betas.len() as i64;
        let n = s.rem_euclid(k);
        if n == 0 {
            self.betas[(k - 1) as usize]
        } else {
            self.betas[(n - 1) as usize]
        }
    }

    /// Sorted distinct values `tilde beta_1 < ... < tilde beta_l`.
    pub fn distinct(&self) -> &[f64] {
        &self.distinct
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    pub fn l(&self) -> usize {
        self.distinct.len()
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    /// The class (0-based index into `distinct`) of residue `n = (d-m-1/2) mod k`.
    pub fn class_of_residue(&self, n: i64) -> usize {
        let k = self.betas.len() as i64;
        self.class_of_residue[n.rem_euclid(k) as usize]
    }

    /// For distinct betas, the permutation `i_j` with `tilde beta_j = beta_{i_j}`.
    pub fn insertion_indices(&self) -> Vec<usize> {
        self.distinct
            .iter()
            .map(|&b| {
                1 + self
                    .betas
                    .iter()
                    .position(|&x| (x - b).abs() <= BETA_MERGE_TOL * b.abs())
                    .expect("distinct value present")
            })
            .collect()
    }
}

/// A validated weight specification.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    k: usize,
    alphas: Vec<f64>,
    r: f64,
    d: usize,
    gamma: f64,
    beta: BetaData,
}

impl WeightSpec {
    pub fn new(k: usize, alphas: Vec<f64>, r: f64, d: usize) -> Result<Self> {
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
                "prod(alpha) = {prod} differs from 1 beyond {ALPHA_PRODUCT_TOL:e}; \
                 the measure is ill-defined"
            )));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidSpec(format!("need r > 0, got {r}")));
        }
        if d == 0 {
            return Err(Error::InvalidSpec("need box depth d >= 1".into()));
        }
        let gamma: f64 = alphas.iter().filter(|&&a| a < 1.0).product();
        let beta = BetaData::new(k, &alphas, d % k);
        let bd = beta.distinct();
        let chain_ok = bd[bd.len() - 1] * gamma <= bd[0] * (1.0 + 1e-12);
        if !chain_ok {
            return Err(Error::InvalidSpec(format!(
                "ordering beta_l * gamma <= beta_1 violated: {} vs {}",
                bd[bd.len() - 1] * gamma,
                bd[0]
            )));
        }
        Ok(WeightSpec {
            k,
            alphas,
            r,
            d,
            gamma,
            beta,
        })
    }

    pub fn from_q(k: usize, alphas: Vec<f64>, q: f64, d: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidSpec(format!("need 0 < q < 1, got {q}")));
        }
        WeightSpec::new(k, alphas, -q.ln(), d)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn q(&self) -> f64 {
        (-self.r).exp()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `V = r d`.
    pub fn v(&self) -> f64 {
        self.r * self.d as f64
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> &BetaData {
        &self.beta
    }

    /// Slice weight `q_i`: `q alpha_{i mod k}` away from the corner,
    /// `q alpha_0 gamma` at `i = 0`.
    pub fn q_weight(&self, i: i64) -> f64 {
        let q = self.q();
        if i == 0 {
            q * self.alphas[0] * self.gamma
        } else {
            q * self.alphas[i.rem_euclid(self.k as i64) as usize]
        }
    }

    /// `x^+_m` for half-integer `0 < m < d`.
    pub fn x_plus(&self, m: Half) -> Result<f64> {
        if !m.is_odd_half() || m.0 <= 0 || m.0 >= 2 * self.d as i64 {
            return Err(Error::OutOfRange(format!(
                "x_plus wants half-integer m in (0, d), got {m}"
            )));
        }
        Ok(self.x_plus_at(((m.0 + 1) / 2) as usize))
    }

    /// `x^+_{j - 1/2}` for `j = 1..=d`.
    pub(crate) fn x_plus_at(&self, j: usize) -> f64 {
        debug_assert!(j >= 1 && j <= self.d);
        (-self.r * j as f64).exp() / self.beta.beta_periodic(self.d as i64 - j as i64)
    }

    /// `x^-_m` for half-integer `m < 0`.
    pub fn x_minus(&self, m: Half) -> Result<f64> {
        if !m.is_odd_half() || m.0 >= 0 {
            return Err(Error::OutOfRange(format!(
                "x_minus wants half-integer m < 0, got {m}"
            )));
        }
        Ok(self.x_minus_at(((1 - m.0) / 2) as usize))
    }

    /// `x^-_{1/2 - j}` for `j = 1, 2, ...`.
    pub(crate) fn x_minus_at(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        (-self.r * (j as f64 - 1.0)).exp()
            * self.beta.beta_periodic(self.d as i64 + j as i64 - 1)
            * self.gamma
    }

    /// Largest `x^-` value (the admissible annulus floor).
    pub fn x_minus_max(&self) -> f64 {
        (1..=self.k).map(|j| self.x_minus_at(j)).fold(0.0, f64::max)
    }

    /// Largest `x^+` value; `1 / x_plus_max` is the admissible annulus ceiling.
    pub fn x_plus_max(&self) -> f64 {
        (1..=self.d).map(|j| self.x_plus_at(j)).fold(0.0, f64::max)
    }

    /// `N_{t,i}`: the number of half-integers `t < m < d` whose residue class
    /// `(d - m - 1/2) mod k` carries `tilde beta_{i+1}` (`i` is 0-based).
    pub fn count_n(&self, t: i64, class: usize) -> usize {
        if t >= self.d as i64 {
            return 0;
        }
        self.count_n_hat(self.d as i64 - t, class)
    }

    /// `N` indexed by distance from the boundary: counts residues
    /// `n = 0..t_hat-1` in the given class.
    pub fn count_n_hat(&self, t_hat: i64, class: usize) -> usize {
        if t_hat <= 0 {
            return 0;
        }
        let k = self.k as i64;
        let full = t_hat / k;
        let rem = t_hat % k;
        let per_period = (0..k)
            .filter(|&n| self.beta.class_of_residue(n) == class)
            .count();
        let partial = (0..rem)
            .filter(|&n| self.beta.class_of_residue(n) == class)
            .count();
        full as usize * per_period + partial
    }

    /// The `r -> 0` limit data of this spec.
    pub fn limit(&self) -> crate::asymptotics::LimitSpec {
        crate::asymptotics::LimitSpec::new(
            self.k,
            self.alphas.clone(),
            self.v(),
            self.d % self.k,
        )
        .expect("valid spec has a valid limit")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WeightSpecRepr {
            k: self.k,
            alphas: self.alphas.clone(),
            q: None,
            r: Some(self.r),
            d: self.d,
        })
        .expect("weight spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: WeightSpecRepr =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("weight spec: {e}")))?;
        match (repr.q, repr.r) {
            (Some(q), None) => WeightSpec::from_q(repr.k, repr.alphas, q, repr.d),
            (None, Some(r)) => WeightSpec::new(repr.k, repr.alphas, r, repr.d),
            _ => Err(Error::Parse(
                "weight spec must carry exactly one of \"q\" or \"r\"".into(),
            )),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WeightSpecRepr {
    k: usize,
    alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    d: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn desk() -> WeightSpec {
        WeightSpec::from_q(2, vec![2.0, 0.5], 0.3, 4).unwrap()
    }

    #[test]
    fn q_weight_examples() {
        let s = WeightSpec::from_q(2, vec![2.0, 0.5], 0.5, 4).unwrap();
        assert_relative_eq!(s.q_weight(1), 0.25, max_relative = 1e-14);
        assert_relative_eq!(s.q_weight(0), 0.5, max_relative = 1e-14);
        let s3 = WeightSpec::from_q(3, vec![2.0, 3.0, 1.0 / 6.0], 0.9, 3).unwrap();
        assert_relative_eq!(s3.q_weight(0), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn one_period_of_weights_multiplies_to_q_k() {
        let s = WeightSpec::from_q(3, vec![2.0, 3.0, 1.0 / 6.0], 0.7, 6).unwrap();
        let prod: f64 = (1..=3).map(|i| s.q_weight(i)).product();
        assert_relative_eq!(prod, 0.7f64.powi(3), max_relative = 1e-12);
    }

    #[test]
    fn beta_examples() {
        let s = desk(); // d = 4 even
        assert_eq!(s.beta().betas(), &[0.5, 1.0]);
        assert_eq!(s.beta().distinct(), &[0.5, 1.0]);
        assert_eq!(s.beta().mults(), &[1, 1]);

        let h = WeightSpec::from_q(1, vec![1.0], 0.3, 4).unwrap();
        assert_eq!(h.beta().distinct(), &[1.0]);
        assert_eq!(h.beta().l(), 1);

        // Two equal partial products merge into one class of multiplicity 2.
        let a = WeightSpec::from_q(4, vec![2.0, 2.0, 0.5, 0.5], 0.3, 8).unwrap();
        assert_eq!(a.beta().l(), 3);
        assert_eq!(a.beta().mults(), &[1, 2, 1]);
    }

    #[test]
    fn beta_k_is_one() {
        for (k, alphas, d) in [
            (2usize, vec![2.0, 0.5], 5usize),
            (3, vec![2.0, 3.0, 1.0 / 6.0], 7),
            (4, vec![0.3, 5.0, 0.9, 1.0 / 1.35], 10),
        ] {
            let s = WeightSpec::from_q(k, alphas, 0.4, d).unwrap();
            assert_relative_eq!(s.beta().betas()[k - 1], 1.0, max_relative = 1e-10);
            assert!(s.beta().distinct()[s.beta().l() - 1] * s.gamma() <= s.beta().distinct()[0] + 1e-12);
        }
    }

    #[test]
    fn x_specializations_satisfy_recurrences() {
        let s = WeightSpec::from_q(3, vec![2.0, 3.0, 1.0 / 6.0], 0.45, 7).unwrap();
        // x^+_{m+1} / x^+_m = q_{m+1/2} for 0 < m < d-1
        for j in 1..s.d() {
            let lhs = s.x_plus_at(j + 1) / s.x_plus_at(j);
            let rhs = s.q_weight(j as i64);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
        // x^-_m / x^-_{m+1} = q_{m+1/2} for m < -1; with m = 1/2 - j this is
        // x^-_{1/2-j} / x^-_{3/2-j} = q_{1-j}.
        for j in 2..12usize {
            let lhs = s.x_minus_at(j) / s.x_minus_at(j - 1);
            let rhs = s.q_weight(1 - j as i64);
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
        // The corner: x^-_{-1/2} x^+_{1/2} = q_0.
        assert_relative_eq!(
            s.x_minus_at(1) * s.x_plus_at(1),
            s.q_weight(0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn x_plus_matches_telescoped_product() {
        // x^+_m = a * q_{m+1/2}^{-1} ... q_{d-1}^{-1} with a = e^{-V}.
        let s = desk();
        let a = (-s.v()).exp();
        for j in 1..=s.d() {
            // m = j - 1/2, product over integer slice weights q_j..q_{d-1}
            let mut prod = a;
            for i in j..s.d() {
                prod /= s.q_weight(i as i64);
            }
            assert_relative_eq!(s.x_plus_at(j), prod, max_relative = 1e-12);
        }
        // Same telescoping on the negative side, including the corner factor.
        for j in 1..=6usize {
            // m = 1/2 - j: x^-_m = a^{-1} q_{1-j} q_{2-j} ... q_{d-1}
            let mut prod = 1.0 / a;
            for i in (1 - j as i64)..s.d() as i64 {
                prod *= s.q_weight(i);
            }
            assert_relative_eq!(s.x_minus_at(j), prod, max_relative = 1e-12);
        }
    }

    #[test]
    fn homogeneous_x_closed_form() {
        let s = WeightSpec::from_q(1, vec![1.0], 0.35, 6).unwrap();
        let r = s.r();
        for j in 1..=s.d() {
            assert_relative_eq!(s.x_plus_at(j), (-r * j as f64).exp(), max_relative = 1e-13);
        }
        for j in 1..=5usize {
            assert_relative_eq!(
                s.x_minus_at(j),
                (-r * (j as f64 - 1.0)).exp(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn x_minus_decays_geometrically() {
        let s = desk();
        let k = s.k();
        for j in 1..8usize {
            let ratio = s.x_minus_at(j + k) / s.x_minus_at(j);
            assert_relative_eq!(ratio, (-s.r() * k as f64).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn count_n_homogeneous_and_sum_rule() {
        let s = WeightSpec::from_q(1, vec![1.0], 0.3, 9).unwrap();
        for t in 0..9i64 {
            assert_eq!(s.count_n(t, 0), (9 - t) as usize);
        }
        // Per-class counts over all classes always sum to d - t.
        let s3 = WeightSpec::from_q(3, vec![2.0, 3.0, 1.0 / 6.0], 0.3, 8).unwrap();
        for t in 0..8i64 {
            let total: usize = (0..s3.beta().l()).map(|c| s3.count_n(t, c)).sum();
            assert_eq!(total, (8 - t) as usize);
        }
    }

    #[test]
    fn count_n_desk_by_brute_scan() {
        // k=2, alpha=(2,1/2), d=6, t=2: m in {2.5, 3.5, 4.5, 5.5}, residues
        // n = d-m-1/2 in {3, 2, 1, 0}; n = 0 carries beta_k = 1 via the
        // periodic extension, so the per-class counts sum to d - t = 4.
        let s = WeightSpec::from_q(2, vec![2.0, 0.5], 0.3, 6).unwrap();
        // beta_1 = 1/2 (class 0), beta_2 = 1 (class 1), beta_3 = 1/2, beta_0 = 1.
        assert_eq!(s.count_n(2, 0), 2);
        assert_eq!(s.count_n(2, 1), 2);
        assert_eq!(s.count_n(2, 0) + s.count_n(2, 1), 4);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(WeightSpec::from_q(2, vec![2.0, 0.6], 0.3, 4).is_err());
        assert!(WeightSpec::from_q(2, vec![2.0, 0.5], 1.3, 4).is_err());
        assert!(WeightSpec::new(2, vec![2.0, 0.5], -0.1, 4).is_err());
        assert!(WeightSpec::new(2, vec![2.0, 0.5], 0.1, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_exclusivity() {
        let s = desk();
        let back = WeightSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(WeightSpec::from_json(r#"{"k":1,"alphas":[1.0],"d":3}"#).is_err());
        assert!(
            WeightSpec::from_json(r#"{"k":1,"alphas":[1.0],"q":0.5,"r":0.3,"d":3}"#).is_err()
        );
        let q = WeightSpec::from_json(r#"{"k":1,"alphas":[1.0],"q":0.5,"d":3}"#).unwrap();
        assert_relative_eq!(q.q(), 0.5, max_relative = 1e-15);
    }

    proptest! {
        /// The x recurrences hold for random valid specs: the telescoping of
        /// the slice weights is an identity, not a numerical accident.
        #[test]
        fn prop_x_recurrences(
            raw in proptest::collection::vec(0.2f64..4.0, 1..5),
            q in 0.05f64..0.9,
            d_extra in 0usize..6,
        ) {
            let k = raw.len();
            let mut alphas = raw;
            let prod: f64 = alphas.iter().product();
            let scale = prod.powf(-1.0 / k as f64);
            for a in alphas.iter_mut() { *a *= scale; }
            // renormalize exactly enough for the validator
            let prod: f64 = alphas.iter().product();
            alphas[k - 1] /= prod;
            let d = k + d_extra + 1;
            let s = WeightSpec::from_q(k, alphas, q, d).unwrap();
            for j in 1..s.d() {
                let lhs = s.x_plus_at(j + 1) / s.x_plus_at(j);
                let rhs = s.q_weight(j as i64);
                prop_assert!((lhs - rhs).abs() <= 1e-11 * rhs.abs());
            }
            let corner = s.x_minus_at(1) * s.x_plus_at(1);
            prop_assert!((corner - s.q_weight(0)).abs() <= 1e-11 * corner.abs());
        }
    }
}
