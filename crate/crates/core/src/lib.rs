//! Anti-copy 2D barcodes: an RS-protected multi-level source stream with a
//! keyed BCH authentication message hidden in its parity, plus GGD channel
//! models, attack simulation and code-length optimization.
//!
//! Numeric cores (GGD evaluation, profiles, estimators, fits, error-rate
//! prediction) are generic over [`Real`]; the `*32`/`*64` aliases below pin
//! the scalar. Everything touching randomness, I/O or batches runs in `f64`.

pub mod auth;
pub mod bits;
pub mod bundled;
pub mod channel;
pub mod coding;
pub mod error;
pub mod experiment;
pub mod ggd;
pub mod layout;
pub mod optimize;
pub mod predict;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GgdParams32 = ggd::GgdParams<f32>;
pub type GgdParams64 = ggd::GgdParams<f64>;
pub type Profile32 = ggd::ConstellationProfile<f32>;
pub type Profile64 = ggd::ConstellationProfile<f64>;
pub type SampleSet32 = ggd::SampleSet<f32>;
pub type SampleSet64 = ggd::SampleSet<f64>;
pub type Rule32 = predict::DemodulationRule<f32>;
pub type Rule64 = predict::DemodulationRule<f64>;
