//! Hard-decision renormalization group (HDRG) decoders for D(Z_d) toric
//! codes, including a minimum-weight-matching HDRG decoder with shortcut
//! distance updates, a Phi-Lambda non-Abelian decoder simulated on D(Z_6),
//! and the Monte Carlo harness used to benchmark them.

pub mod bench;
pub mod code;
pub mod error;
pub mod hdrg;
pub mod matching;
pub mod mwm;
pub mod noise;
pub mod nonabelian;

pub use error::{Error, Result};
