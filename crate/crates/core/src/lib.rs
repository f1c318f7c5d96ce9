//! Compact device models, parameter extraction and small neuromorphic
//! simulations for organic transistors.
//!
//! The crate is split by device family:
//!
//! - [`tft`]: gradual-channel model of lateral thin-film transistors,
//!   small-signal figures of merit and transmission-line contact analysis.
//! - [`electrothermal`]: self-heating of permeable-base transistors, with
//!   multi-valued steady states and S-shaped negative differential resistance.
//! - [`oect`]: steady-state and transient currents of electrochemical
//!   transistors, Nernst shifts and turn-off-voltage sensing.
//! - [`impedance`]: Warburg diffusion impedance, equivalent-circuit fitting
//!   and two-parameter ion classification.
//! - [`reservoir`]: single-node delayed-feedback reservoir with time
//!   multiplexing, chaos diagnostics and a linear readout.
//! - [`synapse`]: phenomenological growth and plasticity of grown synaptic
//!   networks.
//!
//! Sweeps over independent inputs go through [`exec`], which uses rayon when
//! the `parallel` feature is enabled (the default) and a plain iterator
//! otherwise.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod electrothermal;
mod error;
pub mod exec;
pub mod impedance;
pub mod oect;
pub mod reservoir;
pub mod synapse;
pub mod tft;

pub use error::{Error, ErrorClass, Result};
