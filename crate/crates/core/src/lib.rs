//! Chance-constrained subcarrier allocation for slow adaptive OFDMA.
//!
//! The allocation is frozen for a whole adaptation window (many fading
//! slots) and chosen so that each user's short-term rate demand holds with
//! probability at least `1 - eps_k`. The chance constraints are replaced by
//! their Bernstein safe tractable counterparts, the resulting convex program
//! is solved with an analytic-center cutting-plane method, and the outcome
//! is validated by Monte Carlo simulation against a per-slot LP baseline
//! that re-optimizes on every fading slot.
//!
//! Module map:
//! - [`channel`]: fading statistics, rates, user geometry, correlated gains
//! - [`quad`]: adaptive Gauss-Kronrod quadrature shared by all integrals
//! - [`bernstein`]: safe tractable constraint values, minimizing rho, gradients
//! - [`accpm`]: polytope, analytic centers, separation oracle, cutting-plane solve
//! - [`lp`]: dense primal simplex for the fast-adaptive baseline
//! - [`experiments`]: seeded window batches, outage estimation, sweeps

pub mod accpm;
pub mod bernstein;
pub mod channel;
pub mod exec;
pub mod experiments;
pub mod lp;
#[doc(hidden)]
pub mod oracles;
pub mod quad;
pub mod seed;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
