//! Simulation library for quantifying how the phase predicted by the
//! adiabatic theorem drifts away from the exact phase of a spin-half system
//! in a uniformly rotating magnetic field.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod numerics;
pub mod phase;
pub mod spectral;

pub use error::{Error, Result};
