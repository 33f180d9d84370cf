//! Class-number verification machinery for the 2-power cyclotomic tower.

pub mod bernoulli;
pub mod candidates;
pub mod certificate;
pub mod cyclo;
pub mod error;
pub mod factor;
pub mod fpoly;
pub mod group_ring;
pub mod modular;
pub mod ntt;
pub mod pipeline;
pub mod primes;
pub mod serde_dec;
pub mod tower;
pub mod wieferich;
pub mod zpoly;

pub use error::{Error, Result};
pub use tower::{OddPrimitiveCharacter, TowerLevel};
