//! Exact sampling from the corner-modified periodic measure.
//!
//! The measure is a Schur process whose Cauchy kernel factors over pairs of
//! specializations, so a sample is assembled from an array of independent
//! geometric variables `w_{ab} ~ Geom(x^-_{a-R-1/2} * x^+_{d-b+1/2})` via
//! RSK row insertion: the insertion tableau's sub-shapes give the slices on
//! the descending side, the recording tableau's the ascending side. Rows
//! beyond the cut are all-zero with probability `prod (1-p)`, which is
//! reported as the truncation bound; conditioning on that event is exact.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::lattice::{LatticePoint, PlanePartition};
use crate::weights::WeightSpec;
use crate::Result;

/// Truncation policy for the infinite row direction.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    /// Explicit row cut; `None` chooses the smallest cut meeting `tail_tol`.
    pub row_cut: Option<usize>,
    pub tail_tol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            row_cut: None,
            tail_tol: 1e-9,
        }
    }
}

const ROW_CUT_HARD_CAP: usize = 5_000_000;

/// A prepared sampler for one weight spec.
#[derive(Debug, Clone)]
pub struct Sampler {
    row_cut: usize,
    tail_bound: f64,
    /// Geometric parameter of cell `(a, b)`, `0 <= a < row_cut`, `0 <= b < d`:
    /// row `a` carries `X_{R-a}`, column `b` carries `Y_{d-b}`.
    x_by_row: Vec<f64>,
    y_by_col: Vec<f64>,
}

impl Sampler {
    pub fn new(spec: &WeightSpec, trunc: Truncation) -> Result<Self> {
        let d = spec.d();
        let ys: Vec<f64> = (1..=d).map(|j| spec.x_plus_at(j)).collect();
        let y_sum_neglog = |x: f64| -> f64 { ys.iter().map(|&y| -(-x * y).ln_1p()).sum() };
        // per-row contributions to -log prod(1 - p); geometric decay in i
        let mut row_mass: Vec<f64> = Vec::new();
        let mut i = 1usize;
        loop {
            let x = spec.x_minus_at(i);
            let m = y_sum_neglog(x);
            if m < 1e-19 && i > spec.k() {
                break;
            }
            row_mass.push(m);
            i += 1;
            if i > ROW_CUT_HARD_CAP {
                return Err(Error::TailUnachievable {
                    wanted: trunc.tail_tol,
                    row_cut: ROW_CUT_HARD_CAP,
                });
            }
        }
        // suffix[i] = mass of rows i+1.. (1-based), summed smallest-first
        let mut suffix = vec![0.0f64; row_mass.len() + 1];
        for i in (0..row_mass.len()).rev() {
            suffix[i] = suffix[i + 1] + row_mass[i];
        }
        let target = -(-trunc.tail_tol).ln_1p(); // -ln(1 - tol)
        let bound_beyond = |r: usize| -> f64 {
            let s = suffix.get(r).copied().unwrap_or(0.0);
            -(-s).exp_m1() // 1 - exp(-s)
        };
        let row_cut = match trunc.row_cut {
            Some(r) => r,
            None => (0..=row_mass.len())
                .find(|&r| suffix[r] <= target)
                .unwrap_or(row_mass.len())
                .max(1),
        };
        let tail_bound = bound_beyond(row_cut);
        if tail_bound > trunc.tail_tol {
            return Err(Error::TailUnachievable {
                wanted: trunc.tail_tol,
                row_cut,
            });
        }
        // Row a of the matrix carries the (row_cut - a)-th negative
        // specialization so that shapes of recording-tableau entries <= v
        // give the ascending slices directly.
        let x_by_row: Vec<f64> = (0..row_cut)
            .map(|a| spec.x_minus_at(row_cut - a))
            .collect();
        let y_by_col: Vec<f64> = (0..d).map(|b| ys[d - 1 - b]).collect();
        for &x in &x_by_row {
            for &y in &y_by_col {
                let p = x * y;
                if !(p < 1.0) {
                    return Err(Error::InvalidSpec(format!(
                        "geometric parameter {p} >= 1; spec is not summable"
                    )));
                }
            }
        }
        Ok(Sampler {
            row_cut,
            tail_bound,
            x_by_row,
            y_by_col,
        })
    }

    pub fn row_cut(&self) -> usize {
        self.row_cut
    }

    /// Probability bound on the discarded event (some row beyond the cut
    /// non-empty).
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Draws the sample with the given index from the seed's substream.
    pub fn sample(&self, seed: u64, index: u64) -> PlanePartition {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut matrix = vec![0u32; self.x_by_row.len() * self.y_by_col.len()];
        for (a, &x) in self.x_by_row.iter().enumerate() {
            for (b, &y) in self.y_by_col.iter().enumerate() {
                matrix[a * self.y_by_col.len() + b] = geometric(&mut rng, x * y);
            }
        }
        self.assemble(&matrix)
    }

    /// RSK assembly of the slice sequence from a biletter matrix.
    pub(crate) fn assemble(&self, matrix: &[u32]) -> PlanePartition {
        let n_rows = self.x_by_row.len();
        let n_cols = self.y_by_col.len();
        let mut p: Vec<Vec<u32>> = Vec::new();
        let mut q: Vec<Vec<u32>> = Vec::new();
        for a in 0..n_rows {
            for b in 0..n_cols {
                for _ in 0..matrix[a * n_cols + b] {
                    insert(&mut p, &mut q, a as u32 + 1, b as u32 + 1);
                }
            }
        }
        let r = n_rows as i64;
        let d = n_cols as i64;
        let mut slices: Vec<Vec<u32>> = Vec::new();
        for t in (-r + 1)..d {
            let parts = if t <= 0 {
                shape_of_entries_le(&q, (r + t) as u32)
            } else {
                shape_of_entries_le(&p, (d - t) as u32)
            };
            slices.push(parts);
        }
        PlanePartition::from_slices(-r + 1, &slices).expect("RSK slices interlace")
    }
}

/// Geometric on {0, 1, ...} with `P(n) = (1-p) p^n`, by inverting the CDF:
/// `n = floor(ln(1-u) / ln(p))` has `P(n >= j) = p^j`.
fn geometric<R: Rng>(rng: &mut R, p: f64) -> u32 {
    if p <= 0.0 {
        return 0;
    }
    let u: f64 = rng.random();
    let n = ((-u).ln_1p() / p.ln()).floor();
    n.min(u32::MAX as f64) as u32
}

/// SSYT row insertion of value `b`, recording `a` at the new cell.
fn insert(p: &mut Vec<Vec<u32>>, q: &mut Vec<Vec<u32>>, a: u32, mut val: u32) {
    let mut row = 0usize;
    loop {
        if row == p.len() {
            p.push(vec![val]);
            q.push(vec![a]);
            return;
        }
        let pos = p[row].partition_point(|&x| x <= val);
        if pos == p[row].len() {
            p[row].push(val);
            q[row].push(a);
            return;
        }
        std::mem::swap(&mut val, &mut p[row][pos]);
        row += 1;
    }
}

/// Row lengths of the sub-tableau with entries `<= v` (a partition).
fn shape_of_entries_le(tab: &[Vec<u32>], v: u32) -> Vec<u32> {
    let mut parts = Vec::new();
    for row in tab {
        let c = row.partition_point(|&x| x <= v) as u32;
        if c == 0 {
            break;
        }
        parts.push(c);
    }
    parts
}

/// Sample mean and binomial standard error of the joint-occupancy indicator.
pub fn empirical_correlation(
    samples: &[PlanePartition],
    points: &[LatticePoint],
) -> (f64, f64) {
    let n = samples.len();
    assert!(n >= 2, "need at least two samples");
    let hits = samples
        .iter()
        .filter(|pp| points.iter().all(|&p| pp.occupied(p)))
        .count();
    let est = hits as f64 / n as f64;
    let stderr = (est * (1.0 - est) / n as f64).sqrt();
    (est, stderr)
}
