//! Surface-code decoding under circuit-level depolarizing noise: a standard
//! minimum-weight perfect matching decoder and an iterative decoder that
//! reweights each lattice from the matching found on its dual.

pub mod code;
pub mod decoder;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod matcher;
pub mod noise;
pub mod pauli;
pub mod scalar;

pub use code::{CodeLayout, Lattice, SeCircuit, StabilizerKind};
pub use error::{Error, Result};
pub use noise::{FaultEnumeration, FaultEvent, FaultPayload, NoiseParams, SyndromeHistory};
pub use pauli::{Pauli, PauliOperator};
pub use scalar::{Rational, Scalar};
pub use experiments::{DecoderKind, SimConfig};

pub type Graph = graph::DecodingGraph<f64>;
pub type Graph32 = graph::DecodingGraph<f32>;
pub type Matching = matcher::MatchingResult<f64>;
