//! Bee identification over a permuting, deleting binary symmetric channel.
//!
//! A codebook of `m` binary barcodes is permuted, `k` rows are dropped and the
//! surviving `m - k` rows pass through a BSC(p). This crate provides:
//!
//! * [`codebook`]: bit-packed codewords, Hamming distance, codebook I/O.
//! * [`channel`]: uniform injective maps, transmission and likelihood.
//! * [`decode`]: independent nearest-codeword decoding and joint ML decoding
//!   via a rectangular assignment solver, plus an exhaustive reference decoder.
//! * [`oracle`]: exact error probabilities on tiny instances.
//! * [`montecarlo`]: seeded, thread-count-invariant error estimation.
//! * [`exponents`]: reliability-function bounds, bee-identification exponent
//!   and capacity bounds, and the low-rate inequality checks.
//! * [`verify`]: inequality suites against the exact oracle.

pub mod channel;
pub mod codebook;
pub mod decode;
mod error;
pub mod exponents;
pub mod montecarlo;
pub mod oracle;
pub mod verify;

pub use channel::{ChannelParams, InjectiveMap, Observation};
pub use codebook::{Codebook, Codeword};
pub use decode::{DecodeResult, DecoderKind};
pub use error::{Error, Result};
