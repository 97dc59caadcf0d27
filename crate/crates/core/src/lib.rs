//! QED corrections to the Abraham momentum and the Aharonov-Casher-type
//! vacuum momentum of hydrogenic circular Rydberg states.
//!
//! Internal arithmetic is in Gaussian-type Hartree atomic units
//! (hbar = e = m_e = 1, c = 1/alpha); SI enters and leaves through
//! [`units`]. State algebra uses the electron position relative to the
//! core, so the Stark coupling reads `H_S = +E z`.

pub mod abraham;
pub mod ac_vacuum;
pub mod basis;
pub mod cache;
pub mod error;
pub mod laguerre;
pub mod matelem;
pub mod perturb;
pub mod quad;
pub mod radial;
pub mod sum;
pub mod units;

pub use error::{Error, Result};
