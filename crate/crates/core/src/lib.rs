//! Random plane partitions under period-`k` volume weights with a corner
//! modification: the finite-size determinantal correlation kernel, exact
//! sampling, brute-force oracles, the asymptotic phase diagram, the limit
//! kernels (bulk edge, turning points, middle slice) and the frozen-facet
//! predictor.
//!
//! The model assigns a plane partition `pi` the probability proportional to
//! `prod_t q_t^{|pi(t)|}` where `pi(t)` are the diagonal slices, the weights
//! `q_t = q * alpha_{t mod k}` are periodic except at the corner slice `t = 0`
//! which carries an extra factor `gamma = prod_{alpha_j < 1} alpha_j`, and the
//! column depth is `d`. Everything downstream (specializations, kernels,
//! scaling limits) is driven by [`weights::WeightSpec`] and its `r -> 0` limit
//! [`asymptotics::LimitSpec`].

pub mod asymptotics;
pub mod dilog;
pub mod error;
pub mod facets;
pub mod kernel;
pub mod lattice;
pub mod limit_kernel;
pub mod oracle;
pub mod poly;
pub mod quad;
pub mod render;
pub mod sampler;
pub mod weights;

pub use error::Error;
pub use lattice::{DiagonalSlice, Half, LatticePoint, PlanePartition};
pub use weights::{BetaData, WeightSpec};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
