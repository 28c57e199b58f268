//! Forward simulation of labelled datasets from a known parameter set.
//!
//! Used for closed-loop checks of the calibration and evaluation code and
//! for benchmarks. The generating formulas are written out here rather than
//! calling into [`crate::model`], so a simulation can check the model code.

use rand_distr::{Distribution, Normal};

use crate::bitstream::FeatureVector;
use crate::dataset::{Dataset, DatasetRecord};
use crate::model::ModelParams;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub contents: usize,
    pub tqps: Vec<f64>,
    pub tnsls: Vec<f64>,
    /// Texture complexities are spread evenly over this interval.
    pub tc_range: (f64, f64),
    /// Gaussian noise added to every MOS.
    pub mos_noise: f64,
    /// Gaussian noise added to each record's reference TC.
    pub tc_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// 20 contents × 5 TQP × 4 tNSL, noiseless.
    fn default() -> Self {
        Self {
            contents: 20,
            tqps: vec![28.0, 34.0, 40.0, 46.0, 51.0],
            tnsls: vec![3.0, 4.0, 5.0, 6.0],
            tc_range: (6.0, 24.0),
            mos_noise: 0.0,
            tc_noise: 0.0,
            seed: rng::DEFAULT_SEED,
        }
    }
}

pub fn content_id(i: usize) -> String {
    format!("content_{i:02}")
}

/// Generates one record per (content, TQP, tNSL). TBPP is chosen so the
/// TC estimate recovers the content's true TC exactly; MOS follows the
/// multiplicative texture × attenuation form.
pub fn generate(params: &ModelParams, spec: &SyntheticSpec) -> Dataset {
    let mut rng = rng::seeded(spec.seed);
    let mos_noise = Normal::new(0.0, spec.mos_noise.max(0.0)).expect("finite sigma");
    let tc_noise = Normal::new(0.0, spec.tc_noise.max(0.0)).expect("finite sigma");
    let (lo, hi) = spec.tc_range;
    let p = params;
    let mut records = Vec::new();
    for c in 0..spec.contents {
        let frac = if spec.contents > 1 {
            c as f64 / (spec.contents - 1) as f64
        } else {
            0.5
        };
        let tc = lo + (hi - lo) * frac;
        for &q in &spec.tqps {
            let slope = p.a1 * q * q + p.a2 * q + p.a3;
            let intercept = p.b1 * q + p.b2;
            let tbpp = (tc - intercept) / slope;
            let mos_t = (p.alpha * tc + p.beta) * q + p.b;
            for &t in &spec.tnsls {
                let d_g = p.l1 / (1.0 + (t + p.l2).exp()) + p.l3;
                let mut mos = mos_t * d_g;
                let mut tc_ref = tc;
                if spec.mos_noise > 0.0 {
                    mos += mos_noise.sample(&mut rng);
                }
                if spec.tc_noise > 0.0 {
                    tc_ref += tc_noise.sample(&mut rng);
                }
                records.push(
                    DatasetRecord::new(content_id(c), FeatureVector::new(q, tbpp, t), mos)
                        .with_tc_ref(tc_ref),
                );
            }
        }
    }
    Dataset::new(records).expect("generated records are unique and finite")
}
