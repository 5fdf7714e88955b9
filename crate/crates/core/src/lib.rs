//! Quantitative error envelopes for first-order averaging of
//! one-frequency periodic systems, with the polar J2 satellite problem as
//! a complete instance.

pub mod averaging;
pub mod error;
pub mod j2problem;
pub mod kepler;
pub mod numerics;

pub use error::{Error, Result};
pub mod runner;
