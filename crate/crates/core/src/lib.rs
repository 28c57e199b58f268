//! Bitstream-layer, no-reference quality model for Trisoup-Lifting G-PCC
//! point clouds.
//!
//! The crate is split along the processing pipeline:
//!
//! * [`bitstream`] parses TLV-encapsulated G-PCC streams and produces a
//!   [`FeatureVector`] (TQP, TBPP, tNSL) without decoding any payload.
//! * [`model`] evaluates the closed-form quality model on those features.
//! * [`calibration`] fits [`ModelParams`] from a labelled [`Dataset`].
//! * [`subjective`] turns raw panel ratings into MOS.
//! * [`evaluation`] holds the correlation metrics, cross-validation,
//!   randomized trials, ablation and variance-ratio significance testing.

pub mod bitstream;
pub mod calibration;
pub mod dataset;
pub mod evaluation;
pub mod model;
pub mod optim;
pub mod rng;
pub mod subjective;
pub mod synthetic;

pub use bitstream::{
    extract_features, load_sidecar, BitstreamError, FeatureVector, PointCountSource, Provenance,
    SyntaxDescriptorProfile,
};
pub use calibration::{calibrate_full, CalibrationOptions, FitDiagnostics, FitError};
pub use dataset::{Dataset, DatasetError, DatasetRecord};
pub use evaluation::{EvalError, EvalReport, SignificanceMatrix, Triple};
pub use model::{predict, ModelError, ModelParams, Prediction};
pub use subjective::{MosTable, RatingMatrix, SubjectiveError};

/// Version string embedded in every document the tooling writes.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
