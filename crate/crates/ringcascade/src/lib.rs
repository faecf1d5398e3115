//! ringcascade: a numerical laboratory for multiscale vortex-ring stretching
//! cascades.
//!
//! The crate integrates four dyadic cascade ODE models for ring amplitudes
//! (strong, flattened, frozen-profile, localized), evaluates the
//! quadrature-defined Biot-Savart coefficients of a cone-localized ring
//! profile, verifies front-migration and Riccati comparison bounds, evaluates
//! the axisymmetric Biot-Savart velocity of multi-ring vorticity snapshots,
//! and computes Lorentz quasi-norms of the sampled fields.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release --example coefficient_table
//! cargo run --release --example cascade_inflation
//! cargo run --release --example flattened_dichotomy
//! cargo run --release --example front_migration
//! cargo run --release --example tn_scaling
//! cargo run --release --example biot_savart_check
//! cargo run --release --example lorentz_norms
//! ```
//!
//! A thin `ringcascade` binary exposes the same capabilities as subcommands
//! (`run`, `sweep`, `verify`, `coeffs`, `bs-check`, `lorentz`) for scripted
//! use; see the README.

// Validation deliberately writes `!(x > 0.0)` so NaN fails closed; indexed
// loops follow the stencil arithmetic.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod biotsavart;
pub mod cascade;
pub mod cli;
pub mod coeffs;
pub mod error;
pub mod format;
pub mod lorentz;
pub mod manifest;
pub mod ode;
pub mod profile;
pub mod quad;

pub use error::{Error, Result};
