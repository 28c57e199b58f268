//! Acceptance suite, run without the libtest harness so its report is
//! always printed. One `PASS`/`FAIL`/`SKIP` line per criterion; exits
//! non-zero if any criterion fails.
//!
//! Optional data, picked up from the environment when present:
//! - `PCQ_WPC6_CSV`: the released WPC6.0 dataset CSV (criterion 4);
//! - `PCQ_TMC13_FIXTURES`: directory of encoder outputs named
//!   `tqp{Q}_tnsl{N}.bin` (criterion 8).

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use pcq_core::bitstream::{
    extract_features, read_tlv_units, write_tlv_units, PointCountSource, StreamBuilder, TlvUnit,
};
use pcq_core::evaluation::fdist::f_cdf;
use pcq_core::evaluation::{
    ablation, ftest_variance_ratio, loocv, loocv_folds, plcc, rmse, significance_matrix, srcc,
    Verdict, WPC6_TESTING_CONTENTS, WPC6_TRAINING_CONTENTS,
};
use pcq_core::model::geometry_attenuation;
use pcq_core::synthetic::{generate, SyntheticSpec};
use pcq_core::{calibrate_full, predict, CalibrationOptions, Dataset, FeatureVector, ModelParams};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;
use rand_distr::{Distribution, Normal};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(s) => Pass(s),
        Err(s) => Fail(s),
    }
}

fn proptest_run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
    .run(&strategy, test)
    .map_err(|e| e.to_string())
}

// Published constants, written out independently of the shipped JSON.
const B: f64 = 90.3036;
const ALPHA: f64 = 0.0189;
const BETA: f64 = -0.5006;
const A1: f64 = 0.2442;
const A2: f64 = -15.3958;
const A3: f64 = 247.4869;
const B1: f64 = 0.1311;
const B2: f64 = -4.1114;
const L1: f64 = 19.2911;
const L2: f64 = -8.8925;
const L3: f64 = -18.1897;

fn hand_dg(tnsl: f64) -> f64 {
    L1 / (1.0 + (tnsl + L2).exp()) + L3
}

fn criterion_1() -> Outcome {
    outcome((|| {
        let p = ModelParams::published();
        let shipped = [
            p.b, p.alpha, p.beta, p.a1, p.a2, p.a3, p.b1, p.b2, p.l1, p.l2, p.l3,
        ];
        check(
            shipped == [B, ALPHA, BETA, A1, A2, A3, B1, B2, L1, L2, L3],
            "shipped parameters differ from the published table",
        )?;

        let s40 = A1 * 40.0 * 40.0 + A2 * 40.0 + A3;
        let i40 = B1 * 40.0 + B2;
        let tc = s40 * 0.5 + i40;
        check((tc - 12.32005).abs() < 1e-9, format!("tc {tc}"))?;
        let texture = (ALPHA * tc + BETA) * 40.0 + B;
        check(
            (texture - 79.5935578).abs() < 1e-6,
            format!("texture {texture}"),
        )?;
        let expected = texture * hand_dg(3.0);

        let got = predict(&FeatureVector::new(40.0, 0.5, 3.0), &p);
        check(
            (got.mos_est - expected).abs() < 1e-9,
            format!("mos_est {} vs {expected}", got.mos_est),
        )?;
        check((got.mos_texture - texture).abs() < 1e-9, "mos_texture")?;
        for t in [3.0, 6.0] {
            let d = geometry_attenuation(t, &p);
            check((d - hand_dg(t)).abs() < 1e-12, format!("D_G({t}) {d}"))?;
        }
        Ok(format!(
            "mos_est {:.6} (texture {texture:.7} × D_G(3) {:.7})",
            got.mos_est,
            hand_dg(3.0)
        ))
    })())
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Rank = 1 + #smaller + (#equal - 1) / 2.
fn brute_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let less = v.iter().filter(|b| *b < a).count() as f64;
            let equal = v.iter().filter(|b| *b == a).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let mut rng = pcq_core::rng::seeded(2024);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x: Vec<f64> = (0..50).map(|_| rng.random::<f64>() * 100.0).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.random::<f64>() * 60.0 - 30.0)
                .collect();
            let p_ref = brute_pearson(&x, &y);
            let s_ref = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
            let r_ref = (x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 50.0).sqrt();
            let errs = [
                (plcc(&x, &y).map_err(|e| e.to_string())? - p_ref).abs(),
                (srcc(&x, &y).map_err(|e| e.to_string())? - s_ref).abs(),
                (rmse(&x, &y).map_err(|e| e.to_string())? - r_ref).abs(),
            ];
            worst = errs.iter().copied().fold(worst, f64::max);
        }
        check(worst < 1e-12, format!("max deviation {worst:e}"))?;

        // Hand-enumerated tie cases.
        let s = srcc(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).map_err(|e| e.to_string())?;
        let hand = 4.5 / (4.5f64.sqrt() * 5.0f64.sqrt());
        check(
            (s - hand).abs() < 1e-12,
            format!("tie case 1: {s} vs {hand}"),
        )?;
        let s = srcc(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).map_err(|e| e.to_string())?;
        let hand = 1.5 / (1.5f64.sqrt() * 2.0f64.sqrt());
        check(
            (s - hand).abs() < 1e-12,
            format!("tie case 2: {s} vs {hand}"),
        )?;
        let s = srcc(&[5.0, 5.0, 1.0, 1.0], &[4.0, 3.0, 2.0, 1.0]).map_err(|e| e.to_string())?;
        let hand = 4.0 / (4.0f64.sqrt() * 5.0f64.sqrt());
        check(
            (s - hand).abs() < 1e-12,
            format!("tie case 3: {s} vs {hand}"),
        )?;

        let elapsed = start.elapsed();
        check(
            elapsed < Duration::from_secs(1),
            format!("took {elapsed:?}"),
        )?;
        Ok(format!(
            "max deviation {worst:.1e} over 100 vectors; tie cases exact; {elapsed:.0?}"
        ))
    })())
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let truth = ModelParams::published();
        let opts = CalibrationOptions::default();

        let clean = generate(&truth, &SyntheticSpec::default());
        check(clean.len() == 400, format!("{} records", clean.len()))?;
        let (fitted, _) = calibrate_full(&clean, &opts).map_err(|e| e.to_string())?;
        let worst = clean
            .records
            .iter()
            .map(|r| {
                (predict(&r.features, &fitted).mos_est - predict(&r.features, &truth).mos_est).abs()
            })
            .fold(0.0, f64::max);
        check(worst < 1e-6, format!("noiseless max error {worst:e}"))?;

        let noisy = generate(
            &truth,
            &SyntheticSpec {
                mos_noise: 3.0,
                ..Default::default()
            },
        );
        let (refit, _) = calibrate_full(&noisy, &opts).map_err(|e| e.to_string())?;
        let a: Vec<f64> = noisy
            .records
            .iter()
            .map(|r| predict(&r.features, &refit).mos_est)
            .collect();
        let b: Vec<f64> = noisy
            .records
            .iter()
            .map(|r| predict(&r.features, &truth).mos_est)
            .collect();
        let r = plcc(&a, &b).map_err(|e| e.to_string())?;
        check(r > 0.99, format!("noisy PLCC {r}"))?;

        let elapsed = start.elapsed();
        check(
            elapsed < Duration::from_secs(10),
            format!("took {elapsed:?}"),
        )?;
        Ok(format!(
            "noiseless max error {worst:.1e}; sigma=3 PLCC {r:.5}; {elapsed:.0?}"
        ))
    })())
}

fn criterion_4() -> Outcome {
    let Some(path) = std::env::var_os("PCQ_WPC6_CSV").map(PathBuf::from) else {
        return Skip(
            "WPC6.0 dataset not available (set PCQ_WPC6_CSV); criterion 3 stands in".into(),
        );
    };
    outcome((|| {
        let data = Dataset::from_csv_path(&path).map_err(|e| e.to_string())?;
        let opts = CalibrationOptions::default();
        let report = loocv(&data, &opts).map_err(|e| e.to_string())?;
        let mean = report.mean.ok_or("no LOOCV mean")?;
        let loocv_ok = (mean.plcc - 0.9652).abs() <= 0.005
            && (mean.srcc - 0.8564).abs() <= 0.01
            && (mean.rmse - 7.6214).abs() <= 0.2;

        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let abl = ablation(
            &data,
            &opts,
            &ids(&WPC6_TRAINING_CONTENTS),
            &ids(&WPC6_TESTING_CONTENTS),
        )
        .map_err(|e| e.to_string())?;
        let full = abl.row("full").ok_or("no full-model ablation row")?.triple;
        let abl_ok = (full.plcc - 0.9562).abs() <= 0.005
            && (full.srcc - 0.8589).abs() <= 0.01
            && (full.rmse - 8.3304).abs() <= 0.2;

        let summary = format!(
            "LOOCV mean ({:.4}, {:.4}, {:.4}); ablation full ({:.4}, {:.4}, {:.4}); \
             reference-TC check needs source clouds and is not run",
            mean.plcc, mean.srcc, mean.rmse, full.plcc, full.srcc, full.rmse
        );
        check(loocv_ok && abl_ok, summary.clone())?;
        Ok(summary)
    })())
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        let table = ModelParams::published();
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.1).collect();
        proptest_run(
            256,
            (0.01f64..50.0, -15.0f64..5.0, -30.0f64..30.0),
            |(l1, l2, l3)| {
                let p = ModelParams {
                    l1,
                    l2,
                    l3,
                    ..table.clone()
                };
                for w in grid.windows(2) {
                    let (a, b) = (
                        geometry_attenuation(w[0], &p),
                        geometry_attenuation(w[1], &p),
                    );
                    // Far in the tail the logistic saturates below f64 resolution.
                    if (a - l3).abs() > 1e-9 * l1 {
                        prop_assert!(b < a, "D_G({}) = {b} !< D_G({}) = {a}", w[1], w[0]);
                    } else {
                        prop_assert!(b <= a);
                    }
                }
                Ok(())
            },
        )
        .map_err(|e| format!("D_G monotonicity: {e}"))?;
        check(
            grid.windows(2)
                .all(|w| geometry_attenuation(w[1], &table) < geometry_attenuation(w[0], &table)),
            "published D_G not strictly decreasing on [0, 20]",
        )?;

        proptest_run(
            512,
            (20.0f64..56.0, 0.01f64..5.0, 0.0f64..10.0),
            |(q, t, n)| {
                let pr = predict(&FeatureVector::new(q, t, n), &table);
                prop_assert_eq!(pr.mos_est, pr.mos_texture * pr.attenuation);
                Ok(())
            },
        )
        .map_err(|e| format!("factorization: {e}"))?;

        let vecs = proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 5..60);
        proptest_run(
            256,
            (vecs.clone(), 0.01f64..50.0, -50.0f64..50.0),
            |(xy, a, c)| {
                let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
                let Ok(base) = plcc(&x, &y) else {
                    return Ok(());
                };
                let ax: Vec<f64> = x.iter().map(|v| a * v + c).collect();
                prop_assert!((plcc(&ax, &y).unwrap() - base).abs() < 1e-9);
                Ok(())
            },
        )
        .map_err(|e| format!("PLCC affine invariance: {e}"))?;
        proptest_run(256, vecs, |xy| {
            let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
            let Ok(base) = srcc(&x, &y) else {
                return Ok(());
            };
            let fx: Vec<f64> = x.iter().map(|v| (v / 40.0).exp() + v.powi(3)).collect();
            prop_assert!((srcc(&fx, &y).unwrap() - base).abs() < 1e-12);
            Ok(())
        })
        .map_err(|e| format!("SRCC monotone invariance: {e}"))?;

        proptest_run(
            64,
            (2usize..25, 1usize..4, any::<u64>()),
            |(contents, levels, seed)| {
                let spec = SyntheticSpec {
                    contents,
                    tqps: vec![28.0, 40.0, 51.0][..levels].to_vec(),
                    tnsls: vec![3.0, 6.0],
                    seed,
                    ..Default::default()
                };
                let data = generate(&table, &spec);
                let folds = loocv_folds(&data).unwrap();
                prop_assert_eq!(folds.len(), contents);
                for f in &folds {
                    let train = f.train.content_ids();
                    prop_assert!(!train.contains(&f.held_out));
                    prop_assert_eq!(f.test.content_ids(), vec![f.held_out.clone()]);
                    prop_assert_eq!(f.train.len() + f.test.len(), data.len());
                }
                Ok(())
            },
        )
        .map_err(|e| format!("LOOCV leakage: {e}"))?;

        let elapsed = start.elapsed();
        check(
            elapsed < Duration::from_secs(5),
            format!("took {elapsed:?}"),
        )?;
        Ok(format!("5 property groups hold; {elapsed:.0?}"))
    })())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    outcome((|| {
        for d in [10.0, 30.0, 100.0, 399.0] {
            let c = f_cdf(1.0, d, d);
            check((c - 0.5).abs() < 1e-10, format!("CDF(1; {d}, {d}) = {c}"))?;
        }

        let mut rng = pcq_core::rng::seeded(6);
        let unit = Normal::new(0.0, 1.0).unwrap();
        let wide = Normal::new(0.0, 5.0).unwrap();
        let a: Vec<f64> = (0..100).map(|_| unit.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..100).map(|_| wide.sample(&mut rng)).collect();
        let t = ftest_variance_ratio(&a, &b, 0.95).map_err(|e| e.to_string())?;
        check(
            t.verdict == Verdict::ABetter,
            format!("variance ratio {:?}", t),
        )?;
        let t = ftest_variance_ratio(&b, &b, 0.95).map_err(|e| e.to_string())?;
        check(
            t.verdict == Verdict::Indistinguishable,
            "identical residuals flagged",
        )?;

        proptest_run(
            64,
            (2usize..6, 31usize..80, any::<u64>()),
            |(models, n, seed)| {
                let mut rng = pcq_core::rng::seeded(seed);
                let res: Vec<(String, Vec<f64>)> = (0..models)
                    .map(|m| {
                        let sd = 1.0 + rng.random::<f64>() * 4.0;
                        let dist = Normal::new(0.0, sd).unwrap();
                        (
                            format!("m{m}"),
                            (0..n).map(|_| dist.sample(&mut rng)).collect(),
                        )
                    })
                    .collect();
                let mat = significance_matrix(&res, 0.95).unwrap();
                prop_assert!(mat.is_antisymmetric());
                Ok(())
            },
        )
        .map_err(|e| format!("antisymmetry: {e}"))?;

        let elapsed = start.elapsed();
        check(
            elapsed < Duration::from_secs(2),
            format!("took {elapsed:?}"),
        )?;
        Ok(format!(
            "symmetry, simulation, identity and antisymmetry hold; {elapsed:.0?}"
        ))
    })())
}

fn criterion_7() -> Outcome {
    outcome((|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let bs = write(dir.path(), "fixture.bin", stream(40, 3, 125_000));
        let mut runs = Vec::new();
        for _ in 0..5 {
            let t = Instant::now();
            let out = run(&["predict", s(&bs), "--point-count", "500000"]);
            runs.push(t.elapsed());
            check(out.status.success(), stderr(&out))?;
        }
        runs.sort();
        let median = runs[runs.len() / 2];
        check(
            median < Duration::from_millis(100),
            format!("predict median {median:?}"),
        )?;

        let p = ModelParams::published();
        let f = FeatureVector::new(40.0, 0.5, 3.0);
        let iters = 10_000u32;
        let t = Instant::now();
        let mut acc = 0.0;
        for _ in 0..iters {
            acc += predict(std::hint::black_box(&f), &p).mos_est;
        }
        let per = t.elapsed() / iters;
        std::hint::black_box(acc);
        check(
            per < Duration::from_millis(1),
            format!("model evaluation {per:?}"),
        )?;
        Ok(format!(
            "pcq predict median {median:.1?} (process included); model evaluation {per:.1?}"
        ))
    })())
}

fn fuzz_stream(rng: &mut impl Rng) -> Vec<TlvUnit> {
    let n = rng.random_range(1..12);
    (0..n)
        .map(|_| {
            let len = match rng.random_range(0..4) {
                0 => 0,
                1 => rng.random_range(1..8),
                _ => rng.random_range(8..4096),
            };
            TlvUnit::new(rng.random(), (0..len).map(|_| rng.random()).collect())
        })
        .collect()
}

fn criterion_8() -> Outcome {
    let fuzz = (|| {
        let mut rng = pcq_core::rng::seeded(8);
        let profile = profile();
        for i in 0..100 {
            let units = fuzz_stream(&mut rng);
            let bytes = write_tlv_units(&units);
            let back = read_tlv_units(&bytes).map_err(|e| format!("stream {i}: {e}"))?;
            check(back.len() == units.len(), format!("stream {i}: unit count"))?;
            for (a, b) in units.iter().zip(&back) {
                check(
                    a.unit_type == b.unit_type && a.payload == b.payload,
                    format!("stream {i}: unit mismatch at offset {}", b.stream_offset),
                )?;
            }
            check(
                write_tlv_units(&back) == bytes,
                format!("stream {i}: re-encode differs"),
            )?;

            // Coded values are offset by 4 and 2 in this profile.
            let tqp = rng.random_range(4..64);
            let tnsl = rng.random_range(2..16);
            let built = StreamBuilder::new(&profile)
                .tqp(tqp)
                .tnsl(tnsl)
                .geometry_data(
                    (0..rng.random_range(0..256))
                        .map(|_| rng.random())
                        .collect(),
                )
                .attribute_data(
                    (0..rng.random_range(1..2048))
                        .map(|_| rng.random())
                        .collect(),
                )
                .build();
            let units = read_tlv_units(&built).map_err(|e| e.to_string())?;
            check(
                write_tlv_units(&units) == built,
                format!("builder stream {i}: re-encode differs"),
            )?;
            let f = extract_features(&built, &profile, PointCountSource::Explicit(1000))
                .map_err(|e| e.to_string())?;
            check(
                f.tqp == tqp as f64 && f.tnsl == tnsl as f64,
                format!(
                    "builder stream {i}: got ({}, {}) want ({tqp}, {tnsl})",
                    f.tqp, f.tnsl
                ),
            )?;
        }
        Ok::<_, String>(())
    })();
    if let Err(e) = fuzz {
        return Fail(e);
    }

    let Some(dir) = std::env::var_os("PCQ_TMC13_FIXTURES").map(PathBuf::from) else {
        return Pass(
            "100 fuzzed streams round-trip bit-exactly; encoder fixtures not available \
             (set PCQ_TMC13_FIXTURES), fixture half skipped"
                .into(),
        );
    };
    outcome((|| {
        let profile = profile();
        let mut seen = 0;
        for q in [28, 34, 40, 46, 51] {
            for n in [3, 4, 5, 6] {
                let path = dir.join(format!("tqp{q}_tnsl{n}.bin"));
                let bytes = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                let f = extract_features(&bytes, &profile, PointCountSource::Explicit(1))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                check(
                    f.tqp == q as f64 && f.tnsl == n as f64,
                    format!("{}: extracted ({}, {})", path.display(), f.tqp, f.tnsl),
                )?;
                seen += 1;
            }
        }
        Ok(format!(
            "100 fuzzed streams round-trip; {seen} encoder fixtures match their configuration"
        ))
    })())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("closed-form fidelity", criterion_1),
        ("metric oracles", criterion_2),
        ("calibration closed loop", criterion_3),
        ("published-number reproduction", criterion_4),
        ("invariant suite", criterion_5),
        ("significance machinery", criterion_6),
        ("performance", criterion_7),
        ("parser round-trip", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        match f() {
            Pass(msg) => println!("criterion {n} PASS {name}: {msg}"),
            Skip(msg) => println!("criterion {n} SKIP {name}: {msg}"),
            Fail(msg) => {
                println!("criterion {n} FAIL {name}: {msg}");
                failed.push(n);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
