//! Phase unmixing: recover the phases of `K` complex sources from an
//! `M`-channel linear mixture `y = A s0 + n` when the mixing matrix `A` and
//! the source magnitudes `b = |s0|` are known.
//!
//! The problem is `min ‖A s − y‖²` subject to `|s_k| = b_k`, a non-convex
//! quadratically constrained quadratic program. This crate provides
//!
//! - closed-form baselines: least squares, the oracle multichannel Wiener
//!   filter (MWF) and its magnitude-normalized form (NMWF),
//! - coordinate descent with exact per-source phase updates (PhUnAlt), with
//!   multi-start and warm-start chaining,
//! - a semidefinite relaxation solved by block-coordinate descent (PhUnLift),
//!   with a dual certificate that lower-bounds the global optimum,
//! - a brute-force grid oracle for small `K`,
//! - an STFT-domain informed source separation pipeline built on the above.

pub mod error;
pub mod instance;
pub mod lifting;
pub mod linalg;
pub mod oracle;
pub mod seed;
pub mod separation;
pub mod solvers;

pub use error::{PhunError, Result};
pub use instance::{
    generate_instance, is_exact, least_squares, relative_error, residual,
    sample_complex_gaussian, GenerationSpec, Instance, Snr, EXACT_THRESHOLD,
};
pub use lifting::{
    bcd_solve, build_lifted, duality_gap, extract_solution, phunlift, stability_bound, BcdConfig,
    LiftedIterate, LiftedProblem,
};
pub use oracle::{certify_global, grid_search, GridSpec};
pub use solvers::{
    chain, multistart_phunalt, mwf, nmwf, phunalt, phunalt_update, random_phase_init, solve,
    AltConfig, SolveOptions, SolverKind, SolverResult,
};
