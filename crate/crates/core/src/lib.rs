//! Achievable rates of MISO downlinks with finite-resolution receiver ADCs
//! and limited channel-direction feedback.
//!
//! - [`quantizer`]: uniform quantizer design and the Bussgang model.
//! - [`feedback`]: random vector quantization codebooks.
//! - [`precoder`]: conjugate and zero-forcing beamformers.
//! - [`rates`]: closed-form rate expressions and bounds.
//! - [`montecarlo`]: seeded, parallel rate simulation.
//! - [`cli`]: the `qmiso` front end.

pub mod cli;
pub mod error;
pub mod feedback;
pub mod montecarlo;
pub mod precoder;
pub mod quadrature;
pub mod quantizer;
pub mod rates;

pub use error::{Error, Result};
