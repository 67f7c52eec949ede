//! Bayesian classifiers over knowledge-base individuals with open-world
//! (true/false/unknown) features.

pub mod cli;
pub mod dataset;
pub mod em;
pub mod eval;
pub mod error;
pub mod kg_encoder;
mod math;
pub mod mbnb;
pub mod mixture_hbm;
pub mod model_io;
pub mod rules;
pub mod synth;

pub use error::{Error, Result};
