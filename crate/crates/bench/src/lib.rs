//! Shared fixtures for the perioloz benchmarks.

use perioloz_core::asymptotics::LimitSpec;
use perioloz_core::weights::WeightSpec;

/// The k = 2 desk-scale spec used throughout the benchmarks.
pub fn desk_spec() -> WeightSpec {
    WeightSpec::from_q(2, vec![2.0, 0.5], 0.3, 4).expect("valid desk spec")
}

/// A k = 3 limit spec with three distinct betas.
pub fn k3_limit() -> LimitSpec {
    LimitSpec::new(3, vec![2.0, 3.0, 1.0 / 6.0], 1.0, 0).expect("valid limit spec")
}

/// A finite-size spec deep enough to exercise the quadrature loops.
pub fn medium_spec() -> WeightSpec {
    k3_limit().at_r(0.05).expect("valid medium spec")
}
