use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::json;

use pcq_core::bitstream::{Sidecar, SyntaxDescriptorProfile};
use pcq_core::calibration::{
    compute_reference_tc, read_ascii_ply, InterceptMode, TcCoefficients, TcSource,
};
use pcq_core::evaluation::{
    self, mapped_residuals, read_model_scores, significance_matrix, TrialOptions,
    WPC6_TESTING_CONTENTS, WPC6_TRAINING_CONTENTS,
};
use pcq_core::subjective::{process_ratings, Axis, SubjectiveOptions};
use pcq_core::{
    calibrate_full, extract_features, load_sidecar, predict as model_predict, BitstreamError,
    CalibrationOptions, Dataset, DatasetError, EvalError, FeatureVector, PointCountSource,
    RatingMatrix, SubjectiveError, TOOL_VERSION,
};

use crate::failure::{fail, Classify, CmdResult, Failure, Kind};
use crate::io::{csv_preamble, emit, load_params, load_profile, open, read_bytes, read_text};
use crate::{
    AxisArg, CalibrateArgs, EvaluateArgs, ExtractArgs, InterceptArg, Mode, PredictArgs, StreamArgs,
    SubjectiveArgs, TcSourceArg,
};

fn bitstream_kind(e: &BitstreamError) -> Kind {
    match e {
        BitstreamError::NonPositivePointCount
        | BitstreamError::InvalidProfile(_)
        | BitstreamError::ProfileMismatch { .. } => Kind::Config,
        _ => Kind::Parse,
    }
}

fn bitstream_failure(e: BitstreamError, path: &Path) -> Failure {
    let kind = bitstream_kind(&e);
    Failure {
        kind,
        error: anyhow::Error::new(e).context(format!("{}", path.display())),
    }
}

fn dataset_failure(e: DatasetError, path: &Path) -> Failure {
    let kind = match e {
        DatasetError::Io(_) => Kind::Input,
        _ => Kind::Parse,
    };
    Failure {
        kind,
        error: anyhow::Error::new(e).context(format!("{}", path.display())),
    }
}

fn eval_failure(e: EvalError) -> Failure {
    let kind = match e {
        EvalError::InvalidArgument(_) | EvalError::EmptyTestSet | EvalError::EmptyTrainingSet => {
            Kind::Config
        }
        EvalError::Csv(_) | EvalError::MismatchedStimuli(_) => Kind::Parse,
        _ => Kind::Numeric,
    };
    Failure {
        kind,
        error: e.into(),
    }
}

fn subjective_failure(e: SubjectiveError) -> Failure {
    let kind = match e {
        SubjectiveError::Csv(_) | SubjectiveError::DuplicateScore { .. } => Kind::Parse,
        SubjectiveError::TooFewObservers(_) => Kind::Config,
        _ => Kind::Numeric,
    };
    Failure {
        kind,
        error: e.into(),
    }
}

fn load_dataset(path: &Path) -> CmdResult<Dataset> {
    let file = open(path)?;
    Dataset::from_csv_reader(file).map_err(|e| dataset_failure(e, path))
}

fn point_count(spec: Option<&str>) -> CmdResult<PointCountSource> {
    let Some(spec) = spec else {
        return fail(
            Kind::Config,
            "bitstream input needs --point-count (an integer or a sidecar path)",
        );
    };
    if let Ok(n) = spec.parse::<u64>() {
        return Ok(PointCountSource::Explicit(n));
    }
    let path = Path::new(spec);
    let text = read_text(path)?;
    let sidecar: Sidecar = serde_json::from_str(&text)
        .with_context(|| format!("invalid sidecar {}", path.display()))
        .kind(Kind::Parse)?;
    match sidecar.point_count {
        Some(n) => Ok(PointCountSource::Sidecar(n)),
        None => fail(
            Kind::Config,
            format!("sidecar {} has no point_count", path.display()),
        ),
    }
}

fn parse_stream(
    path: &Path,
    profile: &SyntaxDescriptorProfile,
    stream: &StreamArgs,
) -> CmdResult<FeatureVector> {
    let count = point_count(stream.point_count.as_deref())?;
    let bytes = read_bytes(path)?;
    extract_features(&bytes, profile, count).map_err(|e| bitstream_failure(e, path))
}

pub fn extract(args: ExtractArgs) -> CmdResult {
    let profile = load_profile(&args.stream.profile)?;
    let features = parse_stream(&args.bitstream, &profile, &args.stream)?;
    let sidecar = Sidecar::from_features(&features, args.content_id);
    let mut doc = serde_json::to_string_pretty(&sidecar).kind(Kind::Numeric)?;
    doc.push('\n');
    emit(args.out.as_deref(), doc.as_bytes())
}

fn expand_inputs(inputs: &[PathBuf]) -> CmdResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("cannot list {}", input.display()))
                .kind(Kind::Input)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            out.extend(found);
        } else if !input.exists() {
            return fail(Kind::Input, format!("{} does not exist", input.display()));
        } else {
            out.push(input.clone());
        }
    }
    Ok(out)
}

fn is_sidecar(path: &Path) -> bool {
    path.extension().is_some_and(|x| x == "json")
}

pub fn predict(args: PredictArgs) -> CmdResult {
    let loaded = load_params(args.params.as_deref())?;
    let batch = args.inputs.len() > 1 || args.inputs.iter().any(|p| p.is_dir());
    let inputs = expand_inputs(&args.inputs)?;
    let mut profile = None;
    let mut results = Vec::with_capacity(inputs.len());
    for path in &inputs {
        let features = if is_sidecar(path) {
            load_sidecar(&read_text(path)?).map_err(|e| bitstream_failure(e, path))?
        } else {
            if profile.is_none() {
                profile = Some(load_profile(&args.stream.profile)?);
            }
            parse_stream(path, profile.as_ref().expect("loaded above"), &args.stream)?
        };
        let mut prediction = model_predict(&features, &loaded.params);
        if args.clamp {
            prediction = prediction.clamped(1.0, 100.0);
        }
        if !prediction.mos_est.is_finite() {
            return fail(
                Kind::Numeric,
                format!("{}: prediction is not finite", path.display()),
            );
        }
        results.push((path, features, prediction));
    }

    let doc = if batch {
        let mut text = csv_preamble(&[
            ("tool_version", TOOL_VERSION.to_string()),
            ("params", loaded.source.clone()),
        ]);
        text.push_str("input,tqp,tbpp,tnsl,mos_est,mos_texture,attenuation,tc_est,out_of_range\n");
        for (path, f, p) in &results {
            let _ = writeln!(
                text,
                "{},{},{},{},{:.6},{:.6},{:.9},{:.6},{}",
                path.display(),
                f.tqp,
                f.tbpp,
                f.tnsl,
                p.mos_est,
                p.mos_texture,
                p.attenuation,
                p.tc_est,
                p.out_of_range
            );
        }
        text
    } else {
        let (path, f, p) = &results[0];
        let mut text = serde_json::to_string_pretty(&json!({
            "tool_version": TOOL_VERSION,
            "params_source": loaded.source,
            "input": path.display().to_string(),
            "features": f,
            "prediction": p,
            "clamped": args.clamp,
        }))
        .kind(Kind::Numeric)?;
        text.push('\n');
        text
    };
    emit(args.out.as_deref(), doc.as_bytes())
}

fn tc_source(arg: TcSourceArg) -> TcSource {
    match arg {
        TcSourceArg::Auto => TcSource::Auto,
        TcSourceArg::Reference => TcSource::Reference,
        TcSourceArg::Estimated => TcSource::Estimated,
    }
}

/// Fills missing reference TC from `<dir>/<content_id>.ply`.
fn fill_reference_tc(dataset: &mut Dataset, dir: &Path, k: usize) -> CmdResult {
    let mut cache: BTreeMap<String, f64> = BTreeMap::new();
    for id in dataset.content_ids() {
        let needs = dataset
            .records
            .iter()
            .any(|r| r.content_id == id && r.tc_ref.is_none());
        if !needs {
            continue;
        }
        let path = dir.join(format!("{id}.ply"));
        if !path.exists() {
            return fail(
                Kind::Input,
                format!("reference cloud {} not found", path.display()),
            );
        }
        let cloud = read_ascii_ply(&path)
            .with_context(|| format!("{}", path.display()))
            .kind(Kind::Parse)?;
        let tc = compute_reference_tc(&cloud.colors, &cloud.positions, k)
            .with_context(|| format!("reference TC for {}", path.display()))
            .kind(Kind::Numeric)?;
        eprintln!("reference tc {id}: {tc:.6}");
        cache.insert(id, tc);
    }
    for r in &mut dataset.records {
        if r.tc_ref.is_none() {
            r.tc_ref = cache.get(&r.content_id).copied();
        }
    }
    Ok(())
}

pub fn calibrate(args: CalibrateArgs) -> CmdResult {
    let mut dataset = load_dataset(&args.dataset)?;
    if let Some(dir) = &args.clouds {
        fill_reference_tc(&mut dataset, dir, args.knn)?;
    }
    let tc_coefficients = match &args.tc_from {
        Some(p) => {
            let loaded = load_params(Some(p))?;
            let q = loaded.params;
            Some(TcCoefficients {
                a1: q.a1,
                a2: q.a2,
                a3: q.a3,
                b1: q.b1,
                b2: q.b2,
            })
        }
        None => None,
    };
    let options = CalibrationOptions {
        tc_source: tc_source(args.tc_source),
        intercept: match args.intercept {
            InterceptArg::Shared => InterceptMode::Shared,
            InterceptArg::MeanMos => InterceptMode::MeanMosAtMinimalDistortion,
        },
        tc_coefficients,
        ..Default::default()
    };
    let (mut params, diagnostics) = calibrate_full(&dataset, &options)
        .with_context(|| format!("calibrating on {}", args.dataset.display()))
        .kind(Kind::Numeric)?;
    params
        .metadata
        .insert("dataset".into(), args.dataset.display().to_string());
    if args.clouds.is_some() {
        params.metadata.insert("knn".into(), args.knn.to_string());
    }
    for w in &diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    for (stage, rss) in &diagnostics.stage_rss {
        eprintln!("rss {stage}: {rss:.6e}");
    }
    if let Some(path) = &args.diagnostics {
        let mut doc = serde_json::to_string_pretty(&json!({
            "tool_version": TOOL_VERSION,
            "dataset": args.dataset.display().to_string(),
            "diagnostics": diagnostics,
        }))
        .kind(Kind::Numeric)?;
        doc.push('\n');
        emit(Some(path), doc.as_bytes())?;
    }
    let mut doc = params.to_json();
    doc.push('\n');
    emit(args.out.as_deref(), doc.as_bytes())
}

fn ablation_split(
    dataset: &Dataset,
    args: &EvaluateArgs,
) -> CmdResult<(Vec<String>, Vec<String>, &'static str)> {
    match (
        args.train_contents.is_empty(),
        args.test_contents.is_empty(),
    ) {
        (false, false) => Ok((
            args.train_contents.clone(),
            args.test_contents.clone(),
            "command line",
        )),
        (true, true) => {
            let ids = dataset.content_ids();
            let published = WPC6_TRAINING_CONTENTS
                .iter()
                .chain(&WPC6_TESTING_CONTENTS)
                .all(|c| ids.iter().any(|i| i == c));
            if !published {
                return fail(
                    Kind::Config,
                    "ablation needs --train-contents and --test-contents \
                     (the dataset does not contain the published split)",
                );
            }
            let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
            Ok((
                own(&WPC6_TRAINING_CONTENTS),
                own(&WPC6_TESTING_CONTENTS),
                "published",
            ))
        }
        _ => fail(
            Kind::Config,
            "--train-contents and --test-contents must be given together",
        ),
    }
}

pub fn evaluate(args: EvaluateArgs) -> CmdResult {
    if args.mode == Mode::Significance {
        return significance(&args);
    }
    let Some(path) = &args.dataset else {
        return fail(Kind::Config, "this mode needs a dataset CSV");
    };
    let dataset = load_dataset(path)?;
    let calibrator = CalibrationOptions {
        tc_source: tc_source(args.tc_source),
        ..Default::default()
    };
    let mut preamble = vec![
        ("tool_version", TOOL_VERSION.to_string()),
        ("dataset", path.display().to_string()),
    ];
    let report = match args.mode {
        Mode::Loocv => evaluation::loocv(&dataset, &calibrator).map_err(eval_failure)?,
        Mode::Random => {
            eprintln!("seed: {}", args.seed);
            preamble.push(("seed", args.seed.to_string()));
            let options = TrialOptions {
                trials: args.trials,
                train_fraction: args.train_fraction,
                seed: args.seed,
            };
            evaluation::random_trials(&dataset, &calibrator, options).map_err(eval_failure)?
        }
        Mode::Ablation => {
            let (train, test, origin) = ablation_split(&dataset, &args)?;
            preamble.push(("split", origin.to_string()));
            evaluation::ablation(&dataset, &calibrator, &train, &test).map_err(eval_failure)?
        }
        Mode::Significance => unreachable!("handled above"),
    };
    preamble.push(("protocol", report.protocol.clone()));
    for (group, error) in &report.failed {
        eprintln!("warning: {group} excluded: {error}");
    }
    if let Some(m) = &report.mean {
        eprintln!(
            "mean plcc {:.4} srcc {:.4} rmse {:.4} over {} groups",
            m.plcc,
            m.srcc,
            m.rmse,
            report.rows.len()
        );
    }
    let mut text = csv_preamble(&preamble);
    text.push_str(&report.to_csv_string());
    emit(args.out.as_deref(), text.as_bytes())
}

fn significance(args: &EvaluateArgs) -> CmdResult {
    let (Some(scores_path), Some(mos_path)) = (&args.scores, &args.mos) else {
        return fail(Kind::Config, "significance mode needs --scores and --mos");
    };
    let scores = read_model_scores(open(scores_path)?).map_err(eval_failure)?;
    let mos = pcq_core::MosTable::from_csv_reader(open(mos_path)?)
        .map_err(subjective_failure)?
        .to_map();
    let mapped = mapped_residuals(&scores, &mos).map_err(eval_failure)?;
    for (model, m) in &mapped {
        if let Some(w) = &m.warning {
            eprintln!("warning: {model}: {w}");
        }
    }
    let residuals: Vec<(String, Vec<f64>)> = mapped
        .into_iter()
        .map(|(id, m)| (id, m.residuals))
        .collect();
    let matrix = significance_matrix(&residuals, args.confidence).map_err(eval_failure)?;
    let grid = matrix.render_grid();
    eprint!("{grid}");
    if let Some(path) = &args.grid {
        emit(Some(path), grid.as_bytes())?;
    }
    let mut text = csv_preamble(&[
        ("tool_version", TOOL_VERSION.to_string()),
        ("confidence", args.confidence.to_string()),
    ]);
    text.push_str(&matrix.to_csv());
    emit(args.out.as_deref(), text.as_bytes())
}

pub fn subjective(args: SubjectiveArgs) -> CmdResult {
    let matrix = RatingMatrix::from_csv_reader(open(&args.ratings)?).map_err(subjective_failure)?;
    let options = SubjectiveOptions {
        axis: match args.axis {
            AxisArg::PerObserver => Axis::PerObserver,
            AxisArg::PerStimulus => Axis::PerStimulus,
        },
        screen: !args.no_screen,
        ..Default::default()
    };
    let outcome = process_ratings(&matrix, &options).map_err(subjective_failure)?;
    if !outcome.rejected.is_empty() {
        eprintln!("rejected observers: {}", outcome.rejected.join(", "));
    }
    for row in outcome.mos.rows.iter().filter(|r| r.single_observer()) {
        eprintln!("warning: {} has a single retained score", row.stimulus_id);
    }
    let mut buf = csv_preamble(&[
        ("tool_version", TOOL_VERSION.to_string()),
        ("rejected", outcome.rejected.join(";")),
    ])
    .into_bytes();
    outcome
        .mos
        .write_csv(&mut buf)
        .map_err(subjective_failure)?;
    emit(args.out.as_deref(), &buf)
}
