//! Diversity-aware reinforcement learning for string-based molecule
//! generation.
//!
//! A small recurrent policy emits molecules in a restricted line notation.
//! Each generative step samples a batch, scores it with an extrinsic
//! [`oracle`], reshapes the scores with one of the [`shaping`] strategies
//! (scaffold-count penalties and/or intrinsic rewards) and takes one
//! gradient step on the squared augmented-likelihood loss.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common instantiations.

pub mod chem;
pub mod diversity;
pub mod oracle;
pub mod policy;
pub mod rnd;
mod scalar;
pub mod shaping;

pub use scalar::{logistic, Scalar};

pub type PolicyNet64 = policy::PolicyNet<f64>;
pub type PolicyNet32 = policy::PolicyNet<f32>;
pub type ScaffoldMemory64 = shaping::ScaffoldMemory<f64>;
pub type ShapingParams64 = shaping::ShapingParams<f64>;
pub type RndState64 = rnd::RndState<f64>;
pub type OracleSpec64 = oracle::OracleSpec<f64>;
