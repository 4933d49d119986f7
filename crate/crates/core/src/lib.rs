//! Bohmian trajectories in a two-dimensional harmonic oscillator and in a
//! single moving point vortex.
//!
//! The crate evaluates the analytic wavefunction and its velocity field,
//! integrates trajectories through the singular, time-periodic flow, builds
//! stroboscopic sections, and analyses the period map: saddle fixed points,
//! their invariant manifolds, homoclinic crossings and Lyapunov exponents.

pub mod chaos;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod pointvortex;
pub mod velocity;
pub mod wavefunction;

pub use error::{Error, Result};
pub use velocity::{PlanePoint, PlaneVector, VelocityField};
