//! Gaussian-state variational solver for a harmonically trapped Bose gas with
//! contact interactions.
//!
//! Units: lengths in oscillator lengths, energies in trap quanta, `ħ = m = 1`.

pub mod basis;
pub mod error;
pub mod fluct;
pub mod gpe;
pub mod gstate;
mod linalg;
pub mod ground;
pub mod tof;

pub use error::{GbecError, Result};
