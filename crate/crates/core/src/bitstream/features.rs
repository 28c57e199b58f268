use serde::{Deserialize, Serialize};

use super::profile::{extract_syntax_fields, FieldRole, SyntaxDescriptorProfile};
use super::tlv::{read_tlv_units, summarize_stream, TlvUnit};
use super::BitstreamError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ParsedFromBitstream,
    Sidecar,
}

/// The three bitstream features the model consumes.
///
/// `tqp` and `tnsl` are integers in encoder streams but kept real-valued so
/// the same type serves fitting and sensitivity sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub tqp: f64,
    /// Texture bits per point.
    pub tbpp: f64,
    pub tnsl: f64,
    /// TBPP denominator, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_count: Option<u64>,
    /// TBPP numerator, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute_bits: Option<u64>,
    pub provenance: Provenance,
}

impl FeatureVector {
    pub fn new(tqp: f64, tbpp: f64, tnsl: f64) -> Self {
        Self {
            tqp,
            tbpp,
            tnsl,
            point_count: None,
            attribute_bits: None,
            provenance: Provenance::Sidecar,
        }
    }

    /// Checks `tqp > 0`, `tbpp > 0`, `tnsl >= 0`, all finite.
    pub fn is_valid(&self) -> bool {
        self.tqp.is_finite()
            && self.tbpp.is_finite()
            && self.tnsl.is_finite()
            && self.tqp > 0.0
            && self.tbpp > 0.0
            && self.tnsl >= 0.0
    }
}

/// Where the TBPP denominator comes from. The stream itself never carries
/// the source point count, so it is always supplied from outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointCountSource {
    /// Read from a sidecar document next to the stream.
    Sidecar(u64),
    /// Given directly, e.g. on the command line.
    Explicit(u64),
}

impl PointCountSource {
    pub fn count(self) -> u64 {
        match self {
            PointCountSource::Sidecar(n) | PointCountSource::Explicit(n) => n,
        }
    }
}

fn role_value(
    units: &[TlvUnit],
    profile: &SyntaxDescriptorProfile,
    role: FieldRole,
) -> Result<i64, BitstreamError> {
    let descriptor = profile.role_field(role);
    for unit in units.iter().filter(|u| u.unit_type == descriptor.target) {
        let fields = extract_syntax_fields(unit, profile)?;
        if let Some(&value) = fields.get(&descriptor.name) {
            return Ok(value);
        }
    }
    Err(BitstreamError::MissingParameterSet {
        field: descriptor.name.clone(),
    })
}

/// Parses `stream` and returns its feature vector. The first parameter-set
/// unit carrying each role field wins.
pub fn extract_features(
    stream: &[u8],
    profile: &SyntaxDescriptorProfile,
    point_count: PointCountSource,
) -> Result<FeatureVector, BitstreamError> {
    let n = point_count.count();
    if n == 0 {
        return Err(BitstreamError::NonPositivePointCount);
    }
    let units = read_tlv_units(stream)?;
    let tqp = role_value(&units, profile, FieldRole::Tqp)?;
    let tnsl = role_value(&units, profile, FieldRole::Tnsl)?;
    let summary = summarize_stream(&units, &profile.unit_types);
    let bits = summary.attribute_payload_bits;
    Ok(FeatureVector {
        tqp: tqp as f64,
        tbpp: bits as f64 / n as f64,
        tnsl: tnsl as f64,
        point_count: Some(n),
        attribute_bits: Some(bits),
        provenance: Provenance::ParsedFromBitstream,
    })
}
