//! G-PCC bitstream access without decoding.
//!
//! A stream is a sequence of TLV records (`u(8)` type, `u(32)` big-endian
//! length, payload). Parameter-set fields are located through a
//! [`SyntaxDescriptorProfile`], so encoder syntax changes are a data change.

mod bits;
mod features;
mod profile;
mod sidecar;
mod tlv;

pub use bits::{BitReader, BitWriter};
pub use features::{extract_features, FeatureVector, PointCountSource, Provenance};
pub use profile::{
    extract_syntax_fields, Coding, Comparison, FieldDescriptor, FieldRole, PresenceCondition,
    StreamBuilder, SyntaxDescriptorProfile,
};
pub use sidecar::{load_sidecar, Sidecar};
pub use tlv::{
    read_tlv_units, summarize_stream, write_tlv_units, StreamSummary, TlvUnit, TypeMap, UnitKind,
    TLV_HEADER_LEN,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BitstreamError {
    #[error("empty stream")]
    EmptyStream,
    #[error("truncated unit at byte offset {offset}")]
    TruncatedUnit { offset: usize },
    #[error("bitstream exhausted at bit {bit} while reading `{field}`")]
    BitstreamExhausted { field: String, bit: usize },
    #[error("malformed exp-Golomb code at bit {bit}: 32 or more leading zeros")]
    MalformedExpGolomb { bit: usize },
    #[error("no descriptor in profile `{profile}` targets unit type {unit_type}")]
    ProfileMismatch { profile: String, unit_type: u8 },
    #[error("no parameter set unit yields `{field}`")]
    MissingParameterSet { field: String },
    #[error("point count must be positive")]
    NonPositivePointCount,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("sidecar is missing field `{0}`")]
    MissingField(String),
    #[error("sidecar tbpp {given} disagrees with attribute_bits/point_count = {derived}")]
    InconsistentTbpp { given: f64, derived: f64 },
    #[error("malformed document: {0}")]
    Malformed(String),
}
