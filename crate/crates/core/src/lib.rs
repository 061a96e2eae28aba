//! Generalized staircase codes with arbitrary bit degree.
//!
//! A code is a stream of `S x S` binary blocks in which every row of
//!
//! ```text
//! ( Pi_M(B[m - d_M])  ...  Pi_1(B[m - d_1])  B[m] )
//! ```
//!
//! is a codeword of a shortened extended Hamming code of length `(M+1)S`.
//! The offsets `d_k` form a Golomb ruler and the permutations `pi_k` form an
//! `(M+1, S)`-net, so each bit is protected by `M + 1` component codewords
//! and any two component codewords share at most one bit.
//!
//! The crate is organised bottom-up:
//!
//! * [`nets`] - Golomb rulers and the permutation families.
//! * [`component`] - the extended Hamming component code.
//! * [`geometry`] - parameters, validation and the bit/constraint incidence.
//! * [`encoder`] / [`decoder`] - framed recursive encoding and sliding-window
//!   syndrome decoding.
//! * [`channel`] - BSC / hard-decision Shannon limit arithmetic, generic over
//!   the floating point type.
//! * [`sim`] - deterministic parallel Monte-Carlo BER measurement.
//! * [`wire`] - the packed on-disk format used by the command line tools.

pub mod bits;
pub mod channel;
pub mod component;
pub mod decoder;
pub mod encoder;
mod error;
pub mod geometry;
pub mod nets;
pub mod sim;
pub mod wire;

pub use error::{Error, Result};

pub use bits::Block;
pub use component::{ComponentCode, DecodeAction, Syndrome};
pub use decoder::{DecodeStats, WindowDecoder};
pub use encoder::{BlockEncoder, FrameLayout};
pub use geometry::{BitCoord, Code, CodeParams, CodewordSlot, ValidationReport};
pub use nets::{GolombRuler, PermFamily, PermKind, Ruler};
pub use sim::{ChannelSpec, PointResult, StopRules, SweepSpec};

/// Exact rational code rate.
pub type Rate = num_rational::Ratio<u64>;

/// Channel operating point in double precision, the type used throughout the
/// simulator.
pub type ChannelPoint = channel::ChannelPoint<f64>;

/// Single precision channel point, mostly useful for quick tabulation.
pub type ChannelPointF32 = channel::ChannelPoint<f32>;
