//! Behavioral simulator and codec for an image sensor whose pixels encrypt
//! their own output.
//!
//! Every pixel carries a multidomain ferroelectric FET (FeFET) in its readout
//! branch. Programming the FeFET with one of `L` gate-pulse amplitudes selects
//! one of `L` transfer curves from photodiode voltage to output current; the
//! per-pixel choice of level is the symmetric key. A receiver holding the key
//! inverts the nominal curves to recover the image.
//!
//! Module map:
//!
//! * [`fefet`]: domain-ensemble FeFET model (reset, program, disturb, conductance).
//! * [`pixel`]: one pixel (reset, integration, readout through the X_P / FeFET stack).
//! * [`array`]: row/column array, row-by-row programming protocol and frame capture.
//! * [`variation`]: counter-based per-pixel process-variation sampler.
//! * [`codec`]: image codes to voltages to currents to codes, key files, LUT inversion.
//! * [`metrics`]: adjacent-pixel correlation, PSNR, key entropy, recovery reports.
//! * [`montecarlo`]: per-level spread of polarization and conductance under variation.
//! * [`config`]: plain-text run configuration and its stable digest.

// `!(x > 0.0)` is the NaN-rejecting form used throughout validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod codec;
pub mod config;
mod error;
pub mod fefet;
pub mod grid;
pub mod lut;
pub mod metrics;
pub mod montecarlo;
pub mod pixel;
pub mod variation;

pub use error::{Error, Result};
pub use grid::Grid;
