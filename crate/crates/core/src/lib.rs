//! Simulation and optimization toolkit for IRS-assisted secure MISO links.
//!
//! An access point with `n_tx` antennas serves a single-antenna user while a
//! passive eavesdropper listens. A reflecting surface with `n_irs` unit-modulus
//! elements sits between them. The transmit strategy splits a fixed power
//! budget: a maximum-ratio beamformer carries the payload at the minimum power
//! that meets the user's SNR target, and everything left over is spent on
//! artificial noise confined to the null space of the user's effective channel,
//! so only the eavesdropper is degraded.
//!
//! The surface phases are chosen to maximize the user's effective channel gain,
//! a unit-modulus-constrained quadratic problem solved by two interchangeable
//! optimizers in [`phase_opt`]: a Riemannian conjugate-gradient method on the
//! product-of-circles manifold, and a minorize-maximize scheme with closed-form
//! per-element updates. [`experiments`] wraps everything in a seeded,
//! reproducible Monte-Carlo harness.

pub mod channel;
pub mod experiments;
pub mod numerics;
pub mod phase_opt;
pub mod rng;
pub mod transmit;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

pub use channel::{ChannelSet, ScenarioConfig};
pub use experiments::{Algorithm, SweepSpec, SweepVariable};
pub use phase_opt::{PhaseVector, QuadraticForm, SolveTrace};
pub use transmit::{RateReport, TransmitDesign};
