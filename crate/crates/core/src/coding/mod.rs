//! Block codes over GF(2^8): Reed-Solomon for the source stream and binary
//! BCH for the authentication message.

pub mod bch;
pub mod gf256;
pub mod rs;

pub use bch::BchCode;
pub use rs::ReedSolomon;
