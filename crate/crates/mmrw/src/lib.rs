//! Matrix-analytic methods for nonnegative block tri-diagonal operators,
//! applied to decay-rate bounds for 3-D skip-free Markov-modulated random
//! walks.
//!
//! The library computes, for a level-homogeneous triplet (A_{-1}, A_0, A_1)
//! of nonnegative blocks:
//!
//! * the minimal nonnegative solutions R and G of the matrix quadratic
//!   equations, the fundamental block N = (I - H)^{-1}, and their
//!   Wiener-Hopf factorization residuals ([`rg`]);
//! * spectral radii, Perron vectors, and stationary laws of the phase blocks
//!   ([`phase`]);
//! * finite truncations of (possibly nested) block tri-diagonal operators and
//!   their monotone spectral-radius sequences ([`tridiag`]);
//! * the spectral functions chi and the convex region
//!   {s : chi(e^s) <= 1} with its directional extremes, which bound the
//!   directional decay rates of occupation measures ([`spectral`]);
//! * 3-D modulated-walk kernels, including the three-queue cyclic-service
//!   model via uniformization ([`model`]);
//! * box-truncated occupation measures and slope fits that verify the decay
//!   bounds numerically ([`occupation`]).
//!
//! Start with the runnable examples (`cargo run --release --example
//! three_queue_gamma`), or the `mmrw` binary for the same flows as
//! subcommands.

pub mod dense;
pub mod error;
pub mod model;
pub mod occupation;
pub mod phase;
mod power;
pub mod rg;
pub mod sparse;
pub mod spectral;
pub mod tridiag;

pub use error::{Error, Result};
pub use model::{build_three_queue, validate, Axis, MmrwModel, QueueRates, ValidationReport};
pub use occupation::{
    decay_slope, fundamental_box, fundamental_box_direct, n0n_consistency, verify_bounds,
    verify_bounds_with, BoundCheckReport, BoxOccupation, BoxState, DecaySlopeEstimate, Transverse,
    VerifyOptions,
};
pub use phase::{
    is_irreducible, perron_vectors, spectral_radius, stationary_distribution, PerronData,
    PhaseMatrix,
};
pub use rg::{compute_n, solve, solve_g, solve_r, wiener_hopf_residual, RgOptions, RgSolution};
pub use spectral::{
    chi, chi_nested, directional_min, gamma_region, gamma_star, mean_drift, zeta_roots,
    BoundarySample, ChiFunction, ChiMode, GammaOptions, GammaReport,
};
pub use tridiag::{a_star, cp_truncated, cp_truncated_limit, truncate, CpSequence, NestedOperator, Triplet, TruncatedMatrix};
