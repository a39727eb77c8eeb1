//! Simulator for polarization-entangled photon generation with linear optics
//! and single-photon quantum non-demolition (QNDM) heralding.
//!
//! Layers, bottom up:
//!
//! - [`fock`]: sparse occupation-basis states and density matrices.
//! - [`elements`]: polarizing beam splitter, polarization unitaries, phase shifters.
//! - [`qndm`]: photon-number heralding, the atom-cavity meter model, polarization readout.
//! - [`protocols`]: two-photon entangler, Bell states, GHZ step and n-photon chain, Monte Carlo.
//! - [`purification`]: single-photon mixed-state purification rounds and trajectories.
//! - [`circuit`]: a line-oriented circuit script language and its interpreter.
//! - [`report`]: JSON report envelope shared by the CLI and the C ABI.

pub mod circuit;
pub mod elements;
mod error;
pub mod fock;
pub mod protocols;
pub mod purification;
pub mod qndm;
pub mod report;
pub mod tol;

pub use error::{Error, Result};
