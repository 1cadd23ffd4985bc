//! Brute-force ground truth for small truncated systems: exact partition
//! functions, exact correlation functions, and full enumeration.
//!
//! The measure factorizes over diagonal slices with interlacing constraints,
//! so `Z` and marginals are computed by a transfer-style dynamic program over
//! slice states `pi(-R) = {} -> ... -> pi(d-1)`, with the row truncation `R`
//! realized as `pi(t) = {}` for `t <= -R`. The truncation error is reported
//! exactly as `1 - Z_box / Z_inf`, where `Z_inf` is the closed-form Cauchy
//! product of the untruncated measure.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::lattice::{LatticePoint, PlanePartition};
use crate::weights::WeightSpec;
use crate::Result;

/// Truncation of the infinite system to a finite search space.
#[derive(Debug, Clone, Copy)]
pub struct TruncationBox {
    /// Row cap: slices `t <= -max_rows` are forced empty.
    pub max_rows: usize,
    /// Entry cap for every part.
    pub max_entry: u32,
}

pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Exact partition-function data for a truncated system.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    /// Z of the truncated system (weights relative to the empty partition).
    pub z: f64,
    /// log Z accumulated independently in log space.
    pub log_z: f64,
    /// Closed-form Z of the untruncated system.
    pub z_infinite: f64,
    /// Probability mass lost to the truncation: `1 - z / z_infinite`.
    pub tail_bound: f64,
    /// Number of transfer operations performed.
    pub states_visited: u64,
}

/// Compensated (Neumaier) accumulator paired with a log-space shadow.
#[derive(Debug, Clone, Copy)]
struct Acc {
    sum: f64,
    comp: f64,
    log: f64,
}

impl Acc {
    fn zero() -> Self {
        Acc {
            sum: 0.0,
            comp: 0.0,
            log: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, w: f64, log_w: f64) {
        let t = self.sum + w;
        if self.sum.abs() >= w.abs() {
            self.comp += (self.sum - t) + w;
        } else {
            self.comp += (w - t) + self.sum;
        }
        self.sum = t;
        self.log = log_add(self.log, log_w);
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Enumerates interlacing successors `lam` of `mu` with `lam >= mu`
/// (ascending side), parts bounded by `max_entry`, length by `len_cap`.
fn ascending_successors(mu: &[u32], max_entry: u32, len_cap: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    fn rec(mu: &[u32], max_entry: u32, len_cap: usize, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        // lam_1 in [mu_1, E]; lam_i in [mu_i, min(mu_{i-1})] for i >= 2.
        let lo = mu.get(i).copied().unwrap_or(0);
        let hi = if i == 0 {
            max_entry
        } else {
            mu.get(i - 1).copied().unwrap_or(0)
        };
        if i >= len_cap || hi == 0 {
            if lo == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if lo == 0 {
            out.push(cur.clone()); // stop here: remaining parts zero
        }
        for v in lo.max(1)..=hi {
            cur.push(v);
            rec(mu, max_entry, len_cap, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(mu, max_entry, len_cap, 0, &mut cur, &mut out);
    out
}

/// Enumerates interlacing successors `lam` of `mu` with `lam <= mu`
/// (descending side): `mu_1 >= lam_1 >= mu_2 >= lam_2 >= ...`.
fn descending_successors(mu: &[u32], len_cap: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = Vec::new();
    fn rec(mu: &[u32], len_cap: usize, i: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let hi = mu.get(i).copied().unwrap_or(0);
        let lo = mu.get(i + 1).copied().unwrap_or(0);
        if i >= len_cap || hi == 0 {
            if lo == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if lo == 0 {
            out.push(cur.clone());
        }
        for v in lo.max(1)..=hi {
            cur.push(v);
            rec(mu, len_cap, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(mu, len_cap, 0, &mut cur, &mut out);
    out
}

fn len_cap(spec: &WeightSpec, tbox: &TruncationBox, t: i64) -> usize {
    let d = spec.d() as i64;
    let r = tbox.max_rows as i64;
    let cap = if t <= 0 { (r + t).min(d) } else { (d - t).min(r) };
    cap.max(0) as usize
}

/// True if the slice occupies lattice offset `a` (`lambda_i - i = a`,
/// including the trailing zero parts).
fn occupied(parts: &[u32], a: i64) -> bool {
    if a < 0 && (-a) as usize > parts.len() {
        return true;
    }
    parts
        .iter()
        .enumerate()
        .any(|(idx, &p)| p as i64 - (idx as i64 + 1) == a)
}

/// Required occupancies grouped by slice.
fn offsets_by_slice(points: &[LatticePoint]) -> BTreeMap<i64, Vec<i64>> {
    let mut map: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for p in points {
        map.entry(p.t).or_default().push(p.diagonal_offset());
    }
    map
}

struct DpOutcome {
    z: f64,
    log_z: f64,
    visited: u64,
}

/// States below this absolute weight are dropped from the DP. All weights
/// are positive and anchored at 1 for the empty path, so the total mass
/// discarded over a run is orders of magnitude below every tolerance used
/// downstream (the tightest is the 1e-10 tail bound).
const PRUNE_TOL: f64 = 1e-18;

/// Runs the slice DP; states failing the occupancy requirements at their
/// slice are dropped.
fn run_dp(
    spec: &WeightSpec,
    tbox: &TruncationBox,
    required: &BTreeMap<i64, Vec<i64>>,
    budget: u64,
) -> Result<DpOutcome> {
    let d = spec.d() as i64;
    let r = tbox.max_rows as i64;
    // Requirements outside the dynamic range must be satisfied by the
    // empty slice.
    for (&t, offs) in required.iter() {
        if t <= -r || t >= d {
            for &a in offs {
                if !occupied(&[], a) {
                    return Ok(DpOutcome {
                        z: 0.0,
                        log_z: f64::NEG_INFINITY,
                        visited: 0,
                    });
                }
            }
        }
    }
    let mut states: BTreeMap<Vec<u32>, Acc> = BTreeMap::new();
    let mut start = Acc::zero();
    start.add(1.0, 0.0);
    states.insert(Vec::new(), start);
    let mut visited: u64 = 0;
    for t in (-r + 1)..d {
        let cap = len_cap(spec, tbox, t);
        let qt = spec.q_weight(t);
        let ln_qt = qt.ln();
        let reqs = required.get(&t).map(|v| v.as_slice()).unwrap_or(&[]);
        let mut next: BTreeMap<Vec<u32>, Acc> = BTreeMap::new();
        for (mu, acc) in states.iter() {
            let succ = if t <= 0 {
                ascending_successors(mu, tbox.max_entry, cap)
            } else {
                descending_successors(mu, cap)
            };
            visited += succ.len() as u64;
            if visited > budget {
                return Err(Error::BudgetExceeded { visited, budget });
            }
            for lam in succ {
                if !reqs.iter().all(|&a| occupied(&lam, a)) {
                    continue;
                }
                let vol: u64 = lam.iter().map(|&p| p as u64).sum();
                let w = acc.value() * qt.powi(vol as i32);
                let lw = acc.log + ln_qt * vol as f64;
                next.entry(lam).or_insert_with(Acc::zero).add(w, lw);
            }
        }
        next.retain(|_, acc| acc.value() > PRUNE_TOL);
        states = next;
        if states.is_empty() {
            return Ok(DpOutcome {
                z: 0.0,
                log_z: f64::NEG_INFINITY,
                visited,
            });
        }
    }
    let mut total = Acc::zero();
    for acc in states.values() {
        total.add(acc.value(), acc.log);
    }
    Ok(DpOutcome {
        z: total.value(),
        log_z: total.log,
        visited,
    })
}

/// Closed-form partition function of the untruncated system,
/// `prod (1 - x^-_i x^+_j)^{-1}`.
pub fn z_infinite(spec: &WeightSpec) -> f64 {
    let mut log_z = 0.0;
    let y: Vec<f64> = (1..=spec.d()).map(|j| spec.x_plus_at(j)).collect();
    let y_max = y.iter().cloned().fold(0.0f64, f64::max);
    let mut i = 1usize;
    loop {
        let x = spec.x_minus_at(i);
        if x * y_max < 1e-18 && i > spec.k() {
            break;
        }
        for &yj in &y {
            log_z -= (-x * yj).ln_1p();
        }
        i += 1;
        if i > 10_000_000 {
            break;
        }
    }
    log_z.exp()
}

/// Exact `Z` with truncation diagnostics.
pub fn partition_function(
    spec: &WeightSpec,
    tbox: &TruncationBox,
    budget: u64,
) -> Result<OracleReport> {
    let dp = run_dp(spec, tbox, &BTreeMap::new(), budget)?;
    let zi = z_infinite(spec);
    let tail = (1.0 - dp.z / zi).max(0.0);
    Ok(OracleReport {
        z: dp.z,
        log_z: dp.log_z,
        z_infinite: zi,
        tail_bound: tail,
        states_visited: dp.visited,
    })
}

/// Exact probability that horizontal lozenges occupy all given points.
pub fn exact_correlation(
    spec: &WeightSpec,
    tbox: &TruncationBox,
    points: &[LatticePoint],
    budget: u64,
) -> Result<f64> {
    for p in points {
        if !p.on_lattice() {
            return Err(Error::OffLattice {
                t: p.t,
                h: p.h.as_f64(),
            });
        }
    }
    let z = run_dp(spec, tbox, &BTreeMap::new(), budget)?;
    let zu = run_dp(spec, tbox, &offsets_by_slice(points), budget)?;
    Ok(zu.z / z.z)
}

/// Every plane partition in the box together with its unnormalized weight.
pub fn enumerate(
    spec: &WeightSpec,
    tbox: &TruncationBox,
    budget: u64,
) -> Result<Vec<(PlanePartition, f64)>> {
    let d = spec.d() as i64;
    let r = tbox.max_rows as i64;
    let t_min = -r + 1;
    let mut out = Vec::new();
    let mut visited: u64 = 0;
    // DFS over slice sequences with interlacing pruning.
    struct Frame<'a> {
        spec: &'a WeightSpec,
        tbox: &'a TruncationBox,
        d: i64,
        t_min: i64,
    }
    fn rec(
        f: &Frame,
        t: i64,
        mu: &[u32],
        weight: f64,
        slices: &mut Vec<Vec<u32>>,
        visited: &mut u64,
        budget: u64,
        out: &mut Vec<(PlanePartition, f64)>,
    ) -> Result<()> {
        if t == f.d {
            let pp = PlanePartition::from_slices(f.t_min, slices)?;
            out.push((pp, weight));
            return Ok(());
        }
        let cap = len_cap(f.spec, f.tbox, t);
        let succ = if t <= 0 {
            ascending_successors(mu, f.tbox.max_entry, cap)
        } else {
            descending_successors(mu, cap)
        };
        *visited += succ.len() as u64;
        if *visited > budget {
            return Err(Error::BudgetExceeded {
                visited: *visited,
                budget,
            });
        }
        let qt = f.spec.q_weight(t);
        for lam in succ {
            let vol: u64 = lam.iter().map(|&p| p as u64).sum();
            let w = weight * qt.powi(vol as i32);
            slices.push(lam);
            let lam_ref = slices.last().unwrap().clone();
            rec(f, t + 1, &lam_ref, w, slices, visited, budget, out)?;
            slices.pop();
        }
        Ok(())
    }
    let frame = Frame {
        spec,
        tbox,
        d,
        t_min,
    };
    let mut slices = Vec::new();
    rec(&frame, t_min, &[], 1.0, &mut slices, &mut visited, budget, &mut out)?;
    Ok(out)
}
