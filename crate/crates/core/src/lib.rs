//! Numerical core for synthesizing robust piecewise-constant microwave pulses
//! that drive two superconducting qubits through a shared cavity.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs. IO and the command line live in the `pulseforge` companion
//! crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod model;
pub mod numkit;
pub mod pulse;
pub mod scp;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// 2π, used at every GHz → rad/ns boundary.
pub const TWO_PI: f64 = 2.0 * core::f64::consts::PI;
