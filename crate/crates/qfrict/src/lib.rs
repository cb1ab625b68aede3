//! Quantum friction of a two-level atom moving parallel to a metallic
//! half-space in the non-retarded regime.
//!
//! Units: ħ = 1. All inputs must share one consistent unit system; the
//! reduced preset Ω = 1, z = 1 is what the tests and the CLI default to.

pub mod amplitudes;
pub mod error;
pub mod friction;
pub mod material;
pub mod quadrature;
pub mod trajectory;

pub use amplitudes::DopplerMode;
pub use error::{QfError, Result};
pub use material::{AtomParams, MaterialParams};
pub use trajectory::{Trajectory, TrajectoryKind};
