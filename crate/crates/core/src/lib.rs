//! Quantum transport in a degenerate three-level system coupled to three
//! thermal bosonic reservoirs.
//!
//! The system has a ground level, a sink level, and an M-fold degenerate
//! upper level. A photon reservoir drives the upper level from the ground
//! level through a collective coupling vector chi, a phonon reservoir
//! connects the upper level to the sink level through a second vector psi,
//! and a third reservoir drains the sink level back to the ground level.
//! Everything observable about the stationary transport reduces to the
//! squared coupling norms, the angle between the two vectors, and the six
//! thermal rates.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: system and reservoir descriptions, thermal rates, and the
//!   bright-vector geometry (angle, overlap phase, orthogonal partner).
//! - [`density`]: validated density matrices.
//! - [`liouvillian`]: the three dissipative generators, their matrix form on
//!   vectorized states, and the invariant-subspace bases.
//! - [`stationary`]: stationary states three ways (parallel closed form,
//!   general closed form, numeric kernel extraction) for cross-validation.
//! - [`dynamics`]: fixed-step time integration with physical-sanity
//!   monitors and relaxation-rate fitting.
//! - [`transport`]: the exciton flow into the sink, its closed forms, the
//!   cosine-squared angle law, dark directions, and parameter sweeps.

pub mod density;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod liouvillian;
pub mod model;
pub mod stationary;
pub mod transport;

pub use density::DensityMatrix;
pub use error::{Error, Result};
pub use liouvillian::{
    apply_theta_em, apply_theta_ph, apply_theta_sink, apply_total, build_superoperator,
    invariant_basis, parallel_basis, unvectorize, vectorize, LiouvillianMatrix,
};
pub use model::{
    bright_geometry, build_rates, planck_occupation, BrightGeometry, RateSet, ReservoirLabel,
    ReservoirRates, ReservoirSpec, SystemSpec, PARALLEL_SIN_TOL,
};
pub use stationary::{
    full_kernel_dimension, stationary_alpha0, stationary_general, stationary_numeric, Method,
    StationaryResult,
};
pub use dynamics::{evolve, rate_scale, relaxation_rate, EvolutionTrace};
pub use transport::{
    dark_basis, dark_projector, flow_alpha0, flow_from_state, flow_general, numerator_angle_law,
    sweep, AngleLawRow, AngleLawTable, FlowResult, SweepParameter, SweepRow, SweepTable,
};
