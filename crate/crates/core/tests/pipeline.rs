//! End-to-end flows across modules: streams to predictions, raw ratings to
//! a calibrated model, and model comparison.

use pcq_core::bitstream::{
    extract_features, PointCountSource, StreamBuilder, SyntaxDescriptorProfile,
};
use pcq_core::evaluation::{
    loocv, mapped_residuals, random_trials, significance_matrix, Cell, TrialOptions,
};
use pcq_core::subjective::{process_ratings, SubjectiveOptions};
use pcq_core::synthetic::{generate, SyntheticSpec};
use pcq_core::{
    calibrate_full, predict, CalibrationOptions, Dataset, DatasetRecord, ModelParams, RatingMatrix,
};
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;

const POINTS: u64 = 20_000;

#[test]
fn streams_to_predictions() {
    let profile = SyntaxDescriptorProfile::builtin("tmc13-v23").unwrap();
    let params = ModelParams::published();
    let data = generate(&params, &SyntheticSpec::default());
    for r in data.records.iter().step_by(7) {
        let bytes = (r.features.tbpp * POINTS as f64 / 8.0).round() as usize;
        let stream = StreamBuilder::new(&profile)
            .tqp(r.features.tqp as i64)
            .tnsl(r.features.tnsl as i64)
            .geometry_data(vec![0; 100])
            .attribute_data(vec![0x3C; bytes])
            .build();
        let f = extract_features(&stream, &profile, PointCountSource::Explicit(POINTS)).unwrap();
        assert_eq!((f.tqp, f.tnsl), (r.features.tqp, r.features.tnsl));
        assert_eq!(f.tbpp, (bytes * 8) as f64 / POINTS as f64);
        // TBPP is quantised to whole bytes; the model is smooth in TBPP.
        let gap = predict(&f, &params).mos_est - predict(&r.features, &params).mos_est;
        assert!(gap.abs() < 0.05, "{gap}");
    }
}

/// Synthetic panel: 24 observers with personal offset/scale and noise.
fn ratings_for(data: &Dataset, seed: u64) -> RatingMatrix {
    let mut rng = pcq_core::rng::seeded(seed);
    let noise = Normal::new(0.0, 4.0).unwrap();
    let bias = Normal::new(0.0, 5.0).unwrap();
    let observers: Vec<String> = (0..24).map(|o| format!("obs{o:02}")).collect();
    let habits: Vec<(f64, f64)> = observers
        .iter()
        .map(|_| {
            (
                bias.sample(&mut rng),
                1.0 + 0.1 * bias.sample(&mut rng) / 5.0,
            )
        })
        .collect();
    let stimuli: Vec<String> = (0..data.len()).map(|i| format!("stim{i:03}")).collect();
    let dense = data
        .records
        .iter()
        .map(|r| {
            habits
                .iter()
                .map(|(b, s)| s * r.mos + b + noise.sample(&mut rng))
                .collect()
        })
        .collect();
    RatingMatrix::from_dense(stimuli, observers, dense)
}

#[test]
fn ratings_to_calibrated_model() {
    let truth = ModelParams::published();
    let data = generate(&truth, &SyntheticSpec::default());
    let outcome = process_ratings(&ratings_for(&data, 17), &SubjectiveOptions::default()).unwrap();
    assert_eq!(outcome.mos.rows.len(), data.len());

    let records: Vec<DatasetRecord> = data
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.mos = outcome.mos.get(&format!("stim{i:03}")).unwrap().mos;
            r
        })
        .collect();
    let relabelled = Dataset::new(records).unwrap();

    let opts = CalibrationOptions::default();
    let (fitted, diag) = calibrate_full(&relabelled, &opts).unwrap();
    assert!(diag.attenuation_converged);
    let report = loocv(&relabelled, &opts).unwrap();
    let mean = report.mean.unwrap();
    assert!(mean.plcc > 0.95, "{mean:?}");
    assert!(mean.srcc > 0.9, "{mean:?}");

    let fitted_pred: Vec<f64> = data
        .records
        .iter()
        .map(|r| predict(&r.features, &fitted).mos_est)
        .collect();
    let true_mos: Vec<f64> = data.records.iter().map(|r| r.mos).collect();
    assert!(pcq_core::evaluation::plcc(&fitted_pred, &true_mos).unwrap() > 0.98);
}

#[test]
fn random_trials_agree_across_thread_counts() {
    let data = generate(
        &ModelParams::published(),
        &SyntheticSpec {
            mos_noise: 2.0,
            ..Default::default()
        },
    );
    let opts = TrialOptions {
        trials: 12,
        ..Default::default()
    };
    let cal = CalibrationOptions::default();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let a = single.install(|| random_trials(&data, &cal, opts)).unwrap();
    let b = random_trials(&data, &cal, opts).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
}

#[test]
fn model_comparison_prefers_the_accurate_model() {
    let truth = ModelParams::published();
    let data = generate(&truth, &SyntheticSpec::default());
    let mut rng = pcq_core::rng::seeded(99);
    let small = Normal::new(0.0, 1.0).unwrap();
    let large = Normal::new(0.0, 10.0).unwrap();
    let mut scores: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    let mut mos = BTreeMap::new();
    for (i, r) in data.records.iter().enumerate() {
        let id = format!("stim{i:03}");
        let p = predict(&r.features, &truth).mos_est;
        scores
            .entry("model".into())
            .or_default()
            .insert(id.clone(), p + small.sample(&mut rng));
        scores
            .entry("rival".into())
            .or_default()
            .insert(id.clone(), p + large.sample(&mut rng));
        mos.insert(id, r.mos);
    }
    let mapped = mapped_residuals(&scores, &mos).unwrap();
    let residuals: Vec<(String, Vec<f64>)> = mapped
        .into_iter()
        .map(|(m, map)| (m, map.residuals))
        .collect();
    let matrix = significance_matrix(&residuals, 0.95).unwrap();
    assert_eq!(matrix.models, vec!["model", "rival"]);
    assert_eq!(matrix.cells[0][1], Cell::RowBetter);
    assert_eq!(matrix.cells[1][0], Cell::ColumnBetter);
}
