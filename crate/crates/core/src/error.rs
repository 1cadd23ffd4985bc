use num_complex::Complex64;
use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A weight specification violates a construction invariant.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// A lattice point with parity inconsistent with its column.
    #[error("point (t={t}, h={h}) is not on the horizontal-lozenge lattice (2h + t must be odd)")]
    OffLattice { t: i64, h: f64 },

    /// Evaluation requested at (or too close to) a pole of the integrand.
    #[error("evaluation point {z} is within {dist:.3e} of a pole")]
    NearPole { z: Complex64, dist: f64 },

    /// Evaluation requested on a branch segment of the action.
    #[error("point {z} lies on a branch segment of S")]
    OnBranchCut { z: Complex64 },

    /// Quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: last two values {last:?}, {prev:?} (tol {tol:.3e})")]
    QuadratureDiverged {
        prev: Complex64,
        last: Complex64,
        tol: f64,
    },

    /// Root finder failed to converge.
    #[error("root finder did not converge after {iters} iterations")]
    RootsDiverged { iters: usize },

    /// The scaled point is not in the liquid region.
    #[error("point (tau={tau}, chi={chi}) is not liquid ({n_pairs} complex pairs)")]
    NotLiquid { tau: f64, chi: f64, n_pairs: usize },

    /// Enumeration search space exceeds the configured budget.
    #[error("enumeration budget exceeded: {visited} states (budget {budget})")]
    BudgetExceeded { visited: u64, budget: u64 },

    /// The requested truncation tail bound cannot be met.
    #[error("tail bound {wanted:.3e} unachievable within row cut {row_cut}")]
    TailUnachievable { wanted: f64, row_cut: usize },

    /// Requested render window is too large.
    #[error("render window holds ~{tiles} tiles, above the {limit} limit")]
    WindowTooLarge { tiles: u64, limit: u64 },

    /// Out-of-range argument.
    #[error("{0}")]
    OutOfRange(String),

    /// Malformed input file or record.
    #[error("parse error: {0}")]
    Parse(String),
}
