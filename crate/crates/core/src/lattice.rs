//! Plane partitions, diagonal slices, interlacing, and the horizontal-lozenge
//! point configuration on the `(t, h)` lattice.
//!
//! A plane partition is stored as its row-major block of entries. The slice
//! `pi(t)` is the Young diagram read along the `t`-th diagonal, and the
//! horizontal lozenges of the associated tiling sit at
//!
//! ```text
//!     h = pi(t)_i - i + 1/2 - |t|/2,      i = 1, 2, ...
//! ```
//!
//! so for the empty partition column `t` is occupied exactly below `-|t|/2`.
//! Heights are half-integers; [`Half`] stores `2h` to keep parity exact.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A half-integer, stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Half(pub i64);

impl Half {
    pub fn new(twice: i64) -> Self {
        Half(twice)
    }

    /// The nearest half-integer to `x` (ties toward even doubles).
    pub fn from_f64(x: f64) -> Self {
        Half((2.0 * x).round() as i64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    /// True if the value is of the form `n + 1/2`.
    pub fn is_odd_half(self) -> bool {
        self.0.rem_euclid(2) == 1
    }
}

impl std::fmt::Display for Half {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// A point of the horizontal-lozenge lattice.
///
/// Centers of horizontal tiles live on `Z x (1/2)Z` with the parity
/// constraint that `2h + t` is odd: columns with even `t` carry
/// half-integer heights, odd columns integer heights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub t: i64,
    pub h: Half,
}

impl LatticePoint {
    pub fn new(t: i64, h: Half) -> Result<Self> {
        let p = LatticePoint { t, h };
        if !p.on_lattice() {
            return Err(Error::OffLattice { t, h: h.as_f64() });
        }
        Ok(p)
    }

    pub fn on_lattice(&self) -> bool {
        (self.h.0 + self.t).rem_euclid(2) == 1
    }

    /// The integer `a = h - 1/2 + |t|/2`, so that the point is occupied

    /// iff some particle satisfies `pi(t)_i - i = a`.
    pub fn diagonal_offset(&self) -> i64 {
        (self.h.0 - 1 + self.t.abs()) / 2
    }
}

/// A diagonal slice: a Young diagram with its column index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalSlice {
    parts: Vec<u32>,
    pub t: i64,
}

impl DiagonalSlice {
    /// Builds a slice, checking monotonicity and trimming trailing zeros.
    pub fn new(mut parts: Vec<u32>, t: i64) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec(format!(
                "slice at t={t} is not weakly decreasing: {parts:?}"
            )));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(DiagonalSlice { parts, t })
    }

    pub fn empty(t: i64) -> Self {
        DiagonalSlice { parts: Vec::new(), t }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|pi(t)|`: the number of boxes on the slice.
    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// True if the slice has a particle with `lambda_i - i = a`.
    pub fn occupied_offset(&self, a: i64) -> bool {
        if a < 0 && (-a) as usize > self.parts.len() {
            return true; // trailing zero part: lambda_i = 0 at i = -a
        }
        self.parts
            .iter()
            .enumerate()
            .any(|(idx, &p)| p as i64 - (idx as i64 + 1) == a)
    }

    /// Horizontal-lozenge center heights of this slice, highest first.
    pub fn particle_heights(&self, count: usize) -> Vec<Half> {
        (1..=count)
            .map(|i| Half(2 * self.part(i - 1) as i64 - 2 * i as i64 + 1 - self.t.abs()))
            .collect()
    }
}

/// Interlacing `mu >= nu`: `mu_1 >= nu_1 >= mu_2 >= nu_2 >= ...`.
pub fn interlaces(mu: &DiagonalSlice, nu: &DiagonalSlice) -> bool {
    interlaces_parts(mu.parts(), nu.parts())
}

pub(crate) fn interlaces_parts(mu: &[u32], nu: &[u32]) -> bool {
    if nu.len() > mu.len() {
        return false;
    }
    for i in 0..mu.len() {
        let n = nu.get(i).copied().unwrap_or(0);
        if mu[i] < n {
            return false;
        }
        if let Some(&m_next) = mu.get(i + 1) {
            if n < m_next {
                return false;
            }
        }
    }
    true
}

/// A finite rectangle of lattice points.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Window {
    pub t_min: i64,
    pub t_max: i64,
    pub h_min: f64,
    pub h_max: f64,
}

/// A plane partition: a finite array of non-negative integers, weakly
/// decreasing along rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PlanePartition {
    rows: Vec<Vec<u32>>,
}

impl PlanePartition {
    pub fn empty() -> Self {
        PlanePartition { rows: Vec::new() }
    }

    /// Builds from the row-major nonzero block, validating monotonicity.
    pub fn from_rows(mut rows: Vec<Vec<u32>>) -> Result<Self> {
        for row in rows.iter_mut() {
            while row.last() == Some(&0) {
                row.pop();
            }
        }
        while rows.last().map(|r| r.is_empty()) == Some(true) {
            rows.pop();
        }
        for (i, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::InvalidSpec(format!(
                    "row {} is not weakly decreasing",
                    i + 1
                )));
            }
            if i + 1 < rows.len() {
                let below = &rows[i + 1];
                if below.len() > row.len() {
                    return Err(Error::InvalidSpec(format!(
                        "row {} longer than row {}",
                        i + 2,
                        i + 1
                    )));
                }
                if below.iter().zip(row.iter()).any(|(b, a)| b > a) {
                    return Err(Error::InvalidSpec(format!(
                        "column monotonicity fails between rows {} and {}",
                        i + 1,
                        i + 2
                    )));
                }
            }
        }
        Ok(PlanePartition { rows })
    }

    /// The single-box partition `pi_{1,1} = 1`.
    pub fn single_box() -> Self {
        PlanePartition { rows: vec![vec![1]] }
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Entry `pi_{i,j}` with 1-based indices; zero outside the block.
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        if i == 0 || j == 0 {
            return 0;
        }
        self.rows
            .get(i - 1)
            .and_then(|r| r.get(j - 1))
            .copied()
            .unwrap_or(0)
    }

    /// Total number of boxes.
    pub fn volume(&self) -> u64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&e| e as u64).sum::<u64>())
            .sum()
    }

    /// The `t`-th diagonal slice.
    pub fn slice(&self, t: i64) -> DiagonalSlice {
        let mut parts = Vec::new();
        let mut p = 1usize;
        loop {
            let (i, j) = if t >= 0 {
                (p, p + t as usize)
            } else {
                (p + (-t) as usize, p)
            };
            let e = self.entry(i, j);
            if e == 0 {
                break;
            }
            parts.push(e);
            p += 1;
        }
        DiagonalSlice { parts, t }
    }

    /// Slices over an inclusive range of `t`.
    pub fn slices(&self, t_min: i64, t_max: i64) -> Vec<DiagonalSlice> {
        (t_min..=t_max).map(|t| self.slice(t)).collect()
    }

    /// True if a horizontal lozenge is centered at `p`.
    pub fn occupied(&self, p: LatticePoint) -> bool {
        self.slice(p.t).occupied_offset(p.diagonal_offset())
    }

    /// All horizontal-lozenge centers inside the window.
    pub fn horizontal_lozenges(&self, w: &Window) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        for t in w.t_min..=w.t_max {
            let slice = self.slice(t);
            // 2h has parity opposite to t; scan the admissible heights.
            let lo = (2.0 * w.h_min).ceil() as i64;
            let hi = (2.0 * w.h_max).floor() as i64;
            for twice_h in lo..=hi {
                if (twice_h + t).rem_euclid(2) != 1 {
                    continue;
                }
                let p = LatticePoint { t, h: Half(twice_h) };
                if slice.occupied_offset(p.diagonal_offset()) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Reconstructs a plane partition from its slice sequence.
    ///
    /// `slices[s]` must be the slice at `t = t_min + s`; slices outside the
    /// given range are taken empty.
    pub fn from_slices(t_min: i64, slices: &[Vec<u32>]) -> Result<Self> {
        let entry = |t: i64, p: usize| -> u32 {
            let s = t - t_min;
            if s < 0 || s as usize >= slices.len() || p == 0 {
                return 0;
            }
            slices[s as usize].get(p - 1).copied().unwrap_or(0)
        };
        let mut rows = Vec::new();
        for i in 1.. {
            let mut row = Vec::new();
            for j in 1.. {
                let t = j as i64 - i as i64;
                let e = entry(t, i.min(j));
                if e == 0 {
                    break;
                }
                row.push(e);
            }
            if row.is_empty() {
                break;
            }
            rows.push(row);
        }
        PlanePartition::from_rows(rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RowsRepr {
            rows: self.rows.clone(),
        })
        .expect("plane partition serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: RowsRepr =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("plane partition: {e}")))?;
        PlanePartition::from_rows(repr.rows)
    }
}

#[derive(Serialize, Deserialize)]
struct RowsRepr {
    rows: Vec<Vec<u32>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig1_partition() -> PlanePartition {
        // A small generic partition exercising uneven rows.
        PlanePartition::from_rows(vec![vec![5, 4, 2, 1], vec![4, 2, 1], vec![2, 1], vec![1]])
            .unwrap()
    }

    #[test]
    fn single_box_slices() {
        let pp = PlanePartition::single_box();
        let s = pp.slices(-1, 1);
        assert!(s[0].is_empty());
        assert_eq!(s[1].parts(), &[1]);
        assert!(s[2].is_empty());
    }

    #[test]
    fn empty_slices() {
        let pp = PlanePartition::empty();
        assert!(pp.slices(-5, 5).iter().all(|s| s.is_empty()));
    }

    #[test]
    fn slicing_preserves_volume() {
        let pp = fig1_partition();
        let total: u64 = pp.slices(-10, 10).iter().map(|s| s.weight()).sum();
        assert_eq!(total, pp.volume());
    }

    #[test]
    fn slices_interlace_toward_zero() {
        let pp = fig1_partition();
        for t in -10..10 {
            let a = pp.slice(t);
            let b = pp.slice(t + 1);
            if t < 0 {
                assert!(interlaces(&b, &a), "pi({}) < pi({}) fails", t, t + 1);
            } else {
                assert!(interlaces(&a, &b), "pi({}) > pi({}) fails", t, t + 1);
            }
        }
    }

    #[test]
    fn interlacing_examples() {
        let s = |p: &[u32]| DiagonalSlice::new(p.to_vec(), 0).unwrap();
        assert!(interlaces(&s(&[3, 1]), &s(&[2, 1])));
        assert!(!interlaces(&s(&[3, 1]), &s(&[4])));
        assert!(interlaces(&s(&[2, 2]), &s(&[2, 1])));
    }

    #[test]
    fn empty_floor_occupancy() {
        let pp = PlanePartition::empty();
        let w = Window {
            t_min: 0,
            t_max: 0,
            h_min: -3.0,
            h_max: 3.0,
        };
        let pts = pp.horizontal_lozenges(&w);
        let hs: Vec<f64> = pts.iter().map(|p| p.h.as_f64()).collect();
        assert_eq!(hs, vec![-2.5, -1.5, -0.5]);
        // Column t: occupied exactly below -|t|/2.
        for t in [-3i64, -1, 2, 5] {
            for twice_h in -9..9 {
                if (twice_h + t).rem_euclid(2) != 1 {
                    continue;
                }
                let p = LatticePoint { t, h: Half(twice_h) };
                assert_eq!(pp.occupied(p), (twice_h as f64) < -(t.abs() as f64));
            }
        }
    }

    #[test]
    fn one_box_shifts_one_particle() {
        let pp = PlanePartition::single_box();
        let w = Window {
            t_min: 0,
            t_max: 0,
            h_min: -2.0,
            h_max: 2.0,
        };
        let hs: Vec<f64> = pp
            .horizontal_lozenges(&w)
            .iter()
            .map(|p| p.h.as_f64())
            .collect();
        assert_eq!(hs, vec![-1.5, 0.5]);
        // At t = 1 the slice is empty, so particles sit at h = -i.
        let w1 = Window {
            t_min: 1,
            t_max: 1,
            h_min: -3.0,
            h_max: 3.0,
        };
        let hs1: Vec<f64> = pp
            .horizontal_lozenges(&w1)
            .iter()
            .map(|p| p.h.as_f64())
            .collect();
        assert_eq!(hs1, vec![-3.0, -2.0, -1.0]);
    }

    #[test]
    fn column_heights_strictly_decrease() {
        let pp = fig1_partition();
        for t in -4..6 {
            let w = Window {
                t_min: t,
                t_max: t,
                h_min: -12.0,
                h_max: 12.0,
            };
            let pts = pp.horizontal_lozenges(&w);
            for pair in pts.windows(2) {
                assert!(pair[0].h < pair[1].h);
            }
        }
    }

    #[test]
    fn from_slices_round_trip() {
        let pp = fig1_partition();
        let slices: Vec<Vec<u32>> = pp.slices(-6, 6).iter().map(|s| s.parts().to_vec()).collect();
        let back = PlanePartition::from_slices(-6, &slices).unwrap();
        assert_eq!(back, pp);
    }

    #[test]
    fn json_round_trip() {
        let pp = fig1_partition();
        let back = PlanePartition::from_json(&pp.to_json()).unwrap();
        assert_eq!(back, pp);
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(PlanePartition::from_rows(vec![vec![1, 2]]).is_err());
        assert!(PlanePartition::from_rows(vec![vec![1], vec![2]]).is_err());
    }

    proptest! {
        /// Volume is preserved by slicing and slices always interlace,
        /// for arbitrary valid plane partitions.
        #[test]
        fn prop_slices_consistent(cols in proptest::collection::vec(0u32..6, 1..5)) {
            // Build a valid plane partition by sorting a random matrix's
            // rows and columns via running minima.
            let mut rows: Vec<Vec<u32>> = Vec::new();
            let mut prev: Option<Vec<u32>> = None;
            for r in 0..cols.len() {
                let mut row: Vec<u32> = cols.iter().map(|&c| c.saturating_sub(r as u32)).collect();
                row.sort_unstable_by(|a, b| b.cmp(a));
                if let Some(p) = &prev {
                    for (j, e) in row.iter_mut().enumerate() {
                        *e = (*e).min(p[j]);
                    }
                }
                prev = Some(row.clone());
                rows.push(row);
            }
            let pp = PlanePartition::from_rows(rows).unwrap();
            let total: u64 = pp.slices(-8, 8).iter().map(|s| s.weight()).sum();
            prop_assert_eq!(total, pp.volume());
            for t in -8..8i64 {
                let a = pp.slice(t);
                let b = pp.slice(t + 1);
                if t < 0 {
                    prop_assert!(interlaces(&b, &a));
                } else {
                    prop_assert!(interlaces(&a, &b));
                }
            }
        }
    }
}
