//! Shared inputs for the benchmarks.

use pcq_core::bitstream::{StreamBuilder, SyntaxDescriptorProfile};
use pcq_core::synthetic::{generate, SyntheticSpec};
use pcq_core::{Dataset, ModelParams};

pub const POINT_COUNT: u64 = 500_000;

pub fn profile() -> SyntaxDescriptorProfile {
    SyntaxDescriptorProfile::builtin("tmc13-v23").expect("builtin profile")
}

/// A stream at TQP 40, tNSL 3 with 125 kB of attribute payload.
pub fn stream(profile: &SyntaxDescriptorProfile) -> Vec<u8> {
    StreamBuilder::new(profile)
        .tqp(40)
        .tnsl(3)
        .geometry_data(vec![0x5A; 40_000])
        .attribute_data(vec![0xA5; 125_000])
        .build()
}

/// 20 contents × 5 TQP × 4 tNSL with MOS noise σ = 3.
pub fn dataset() -> Dataset {
    generate(
        &ModelParams::published(),
        &SyntheticSpec {
            mos_noise: 3.0,
            ..Default::default()
        },
    )
}
