//! Two-mode Gaussian states: covariance algebra, entanglement and steering
//! classification, and work extraction under measurement-feedback protocols.
//!
//! The crate is organized bottom-up: [`gaussian`] holds the state types and
//! symplectic criteria, [`classify`] the separability/steering tests and
//! boundary curves, [`protocols`] the measure-displace-squeeze protocols and
//! their closed-form work, [`montecarlo`] a sampling oracle for the
//! conditional-state formulas, and [`sweep`] grid sweeps, boundary extrema,
//! and transition finders used by the CLI.

pub mod classify;
pub mod gaussian;
pub mod montecarlo;
pub mod protocols;
pub mod search;
pub mod sweep;

pub use nalgebra;
