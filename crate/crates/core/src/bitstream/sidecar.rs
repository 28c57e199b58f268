use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, Provenance};
use super::BitstreamError;

/// Feature sidecar document. Either `tbpp` or the pair
/// (`attribute_bits`, `point_count`) must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_id: Option<String>,
    #[serde(default)]
    pub tqp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tbpp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_count: Option<u64>,
    #[serde(default)]
    pub tnsl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_version: Option<String>,
}

impl Sidecar {
    pub fn from_features(features: &FeatureVector, content_id: Option<String>) -> Self {
        Self {
            content_id,
            tqp: Some(features.tqp),
            tbpp: Some(features.tbpp),
            attribute_bits: features.attribute_bits,
            point_count: features.point_count,
            tnsl: Some(features.tnsl),
            provenance: Some(features.provenance),
            tool_version: Some(crate::TOOL_VERSION.to_owned()),
        }
    }

    pub fn to_features(&self) -> Result<FeatureVector, BitstreamError> {
        let missing = |name: &str| BitstreamError::MissingField(name.to_owned());
        let tqp = self.tqp.ok_or_else(|| missing("tqp"))?;
        let tnsl = self.tnsl.ok_or_else(|| missing("tnsl"))?;
        let derived = match (self.attribute_bits, self.point_count) {
            (Some(_), Some(0)) => return Err(BitstreamError::NonPositivePointCount),
            (Some(bits), Some(n)) => Some(bits as f64 / n as f64),
            _ => None,
        };
        let tbpp = match (self.tbpp, derived) {
            (Some(given), Some(derived)) => {
                if (given - derived).abs() > 1e-9 * derived.abs().max(f64::MIN_POSITIVE) {
                    return Err(BitstreamError::InconsistentTbpp { given, derived });
                }
                given
            }
            (Some(given), None) => given,
            (None, Some(derived)) => derived,
            (None, None) => return Err(missing("tbpp")),
        };
        Ok(FeatureVector {
            tqp,
            tbpp,
            tnsl,
            point_count: self.point_count,
            attribute_bits: self.attribute_bits,
            provenance: self.provenance.unwrap_or(Provenance::Sidecar),
        })
    }
}

/// Parses a JSON sidecar into a feature vector.
pub fn load_sidecar(document: &str) -> Result<FeatureVector, BitstreamError> {
    let sidecar: Sidecar =
        serde_json::from_str(document).map_err(|e| BitstreamError::Malformed(e.to_string()))?;
    let mut features = sidecar.to_features()?;
    features.provenance = Provenance::Sidecar;
    Ok(features)
}
