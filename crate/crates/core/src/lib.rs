//! Exact state-vector simulation of four-level (ququart) teleportation and
//! entanglement swapping, and of the same protocols run on logical levels
//! encoded in the entangled complement of an unextendible product basis.
//!
//! Module map:
//!
//! - [`qmath`]: dense complex states, operators, partial traces, Schmidt
//!   coefficients, complements and Born-rule measurement.
//! - [`basis`]: the W/X/Y/Z basis of two ququarts and the correction unitaries.
//! - [`protocols`]: teleportation and swapping, exact and sampled.
//! - [`upb`]: Shifts and Tiles product bases, their certificates and the
//!   four-dimensional entangled complement.
//! - [`collective`]: the logical protocols embedded into 2×2×2 and 3×3 systems.
//! - [`partysim`]: Alice/Bob/Clara session harness with ownership and causality checks.

pub mod basis;
pub mod collective;
pub mod partysim;
pub mod protocols;
pub mod error;
pub mod qmath;
pub mod rng;
pub mod transcription;
pub mod upb;

pub use basis::{BasisLabel, Family};
pub use error::{Error, Result};
pub use qmath::{Amplitude, Operator, StateVector};

/// Version string stamped into every report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
