//! Closed-form quality model.
//!
//! Texture complexity is estimated from the attribute bitstream as
//! `TC = s(TQP)·TBPP + i(TQP)` with a quadratic slope and linear intercept.
//! The texture-only score is `MOS_T = (α·TC + β)·TQP + b`, and geometry
//! distortion enters as a logistic attenuation `D_G(tNSL)` multiplying it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitstream::FeatureVector;

const PUBLISHED: &str = include_str!("../data/published.json");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("reference MOS at minimal TQP is zero")]
    DivisionByZeroMos,
    #[error("parameter `{0}` is not finite")]
    NonFiniteParameter(&'static str),
    #[error("malformed parameter document: {0}")]
    Malformed(String),
}

/// Closed interval of feature values seen during calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub tqp: [f64; 2],
    pub tnsl: [f64; 2],
}

impl FeatureRange {
    pub fn contains(&self, f: &FeatureVector) -> bool {
        (self.tqp[0]..=self.tqp[1]).contains(&f.tqp)
            && (self.tnsl[0]..=self.tnsl[1]).contains(&f.tnsl)
    }
}

/// The eleven fitted constants plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// MOS intercept.
    pub b: f64,
    /// Texture-slope regression on TC: `a = alpha·TC + beta`.
    pub alpha: f64,
    pub beta: f64,
    /// `s(TQP) = a1·TQP² + a2·TQP + a3`.
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// `i(TQP) = b1·TQP + b2`.
    pub b1: f64,
    pub b2: f64,
    /// `D_G(tNSL) = l1 / (1 + e^(tNSL + l2)) + l3`.
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_range: Option<FeatureRange>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl ModelParams {
    /// Published parameter set for the WPC6.0 training contents.
    pub fn published() -> Self {
        Self::from_json(PUBLISHED).expect("shipped parameters are valid")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let p: Self =
            serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in self.named_values() {
            if !v.is_finite() {
                return Err(ModelError::NonFiniteParameter(name));
            }
        }
        Ok(())
    }

    pub fn named_values(&self) -> [(&'static str, f64); 11] {
        [
            ("b", self.b),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("b1", self.b1),
            ("b2", self.b2),
            ("l1", self.l1),
            ("l2", self.l2),
            ("l3", self.l3),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mos_est: f64,
    pub mos_texture: f64,
    pub attenuation: f64,
    pub tc_est: f64,
    /// Features fall outside the calibration range recorded in the params.
    pub out_of_range: bool,
}

impl Prediction {
    /// Copy with `mos_est` clamped to `[lo, hi]`. Components are untouched.
    pub fn clamped(mut self, lo: f64, hi: f64) -> Self {
        self.mos_est = self.mos_est.clamp(lo, hi);
        self
    }
}

pub fn slope_of_tqp(tqp: f64, p: &ModelParams) -> f64 {
    p.a1 * tqp * tqp + p.a2 * tqp + p.a3
}

pub fn intercept_of_tqp(tqp: f64, p: &ModelParams) -> f64 {
    p.b1 * tqp + p.b2
}

/// No-reference texture complexity from TQP and TBPP.
pub fn estimate_tc(tqp: f64, tbpp: f64, p: &ModelParams) -> f64 {
    slope_of_tqp(tqp, p) * tbpp + intercept_of_tqp(tqp, p)
}

pub fn texture_mos(tc: f64, tqp: f64, p: &ModelParams) -> f64 {
    (p.alpha * tc + p.beta) * tqp + p.b
}

pub fn geometry_attenuation(tnsl: f64, p: &ModelParams) -> f64 {
    p.l1 / (1.0 + (tnsl + p.l2).exp()) + p.l3
}

/// Full model. Never clamps; see [`Prediction::clamped`].
pub fn predict(f: &FeatureVector, p: &ModelParams) -> Prediction {
    let tc_est = estimate_tc(f.tqp, f.tbpp, p);
    let mos_texture = texture_mos(tc_est, f.tqp, p);
    let attenuation = geometry_attenuation(f.tnsl, p);
    Prediction {
        mos_est: mos_texture * attenuation,
        mos_texture,
        attenuation,
        tc_est,
        out_of_range: p.training_range.is_some_and(|r| !r.contains(f)),
    }
}

/// MOS at a setting relative to MOS at the minimal TQP of the same tNSL.
pub fn nmos(mos_at: f64, mos_at_tqp_min: f64) -> Result<f64, ModelError> {
    if mos_at_tqp_min == 0.0 {
        return Err(ModelError::DivisionByZeroMos);
    }
    Ok(mos_at / mos_at_tqp_min)
}
