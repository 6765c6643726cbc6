use std::fs::File;
use std::hint::black_box;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dctpipe_core::classifier::{train, SoftmaxModel, TrainConfig};
use dctpipe_core::codec::{decode_jpeg, encode_jpeg, Subsampling};
use dctpipe_core::metrics::{confusion, format_report, precision_recall_f1, topk_accuracy};
use dctpipe_core::{partial_decode, render_dct_image, to_channelized_tensor, CoefficientPlane};
use dctpipe_dataset::build::{load_rgb, path_digest};
use dctpipe_dataset::format::{write_header, write_record, FORMAT_VERSION};
use dctpipe_dataset::{
    build_dataset, load_examples, scan_corpus, BuildConfig, ClassLabel, DatasetManifest,
    DatasetRecord, Payload, Representation, SplitCounts, SplitName, SplitRatios,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    BenchArgs, BuildArgs, Cli, Command, DecodeArgs, EncodeArgs, EvaluateArgs, ExtractArgs, Format,
    TrainArgs,
};
use crate::error::{CliError, Result};

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Encode(a) => encode(cli, a),
        Command::Decode(a) => decode(cli, a),
        Command::ExtractDct(a) => extract_dct(cli, a),
        Command::BuildDataset(a) => build(cli, a),
        Command::Train(a) => train_cmd(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Bench(a) => bench(cli, a),
    }
}

fn output(cli: &Cli) -> Result<&Path> {
    cli.output
        .as_deref()
        .ok_or_else(|| CliError::Usage("--output is required for this command".into()))
}

fn seed(cli: &Cli) -> Result<u64> {
    cli.seed
        .ok_or_else(|| CliError::Usage("--seed is required for this command".into()))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn emit(cli: &Cli, text: String, json: serde_json::Value) {
    match cli.format {
        Format::Text => println!("{text}"),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json).expect("json value serializes")
        ),
    }
}

fn encode(cli: &Cli, a: &EncodeArgs) -> Result<()> {
    let out = output(cli)?;
    let img = load_rgb(&read(&a.input)?)
        .map_err(|e| CliError::Unsupported(format!("{}: {e}", a.input.display())))?;
    let bytes = encode_jpeg(&img, a.quality, a.subsampling)?;
    write(out, &bytes)?;
    emit(
        cli,
        format!(
            "{}x{} at quality {} ({}) -> {} bytes",
            img.width(),
            img.height(),
            a.quality,
            a.subsampling,
            bytes.len()
        ),
        json!({"width": img.width(), "height": img.height(), "quality": a.quality,
               "subsampling": a.subsampling, "bytes": bytes.len(), "output": out}),
    );
    Ok(())
}

fn save_png(path: &Path, width: u32, height: u32, channels: usize, samples: Vec<u8>) -> Result<()> {
    let color = match channels {
        1 => image::ExtendedColorType::L8,
        3 => image::ExtendedColorType::Rgb8,
        n => {
            return Err(CliError::Unsupported(format!(
                "cannot write {n}-channel PNG"
            )))
        }
    };
    image::save_buffer_with_format(
        path,
        &samples,
        width,
        height,
        color,
        image::ImageFormat::Png,
    )
    .map_err(|e| CliError::io(path, e))
}

fn decode(cli: &Cli, a: &DecodeArgs) -> Result<()> {
    let out = output(cli)?;
    let img = decode_jpeg(&read(&a.input)?)?;
    let (w, h) = (img.width(), img.height());
    save_png(out, w, h, 3, img.into_samples())?;
    emit(
        cli,
        format!("{w}x{h} -> {}", out.display()),
        json!({"width": w, "height": h, "output": out}),
    );
    Ok(())
}

fn selected_planes<'a>(
    planes: &'a [CoefficientPlane],
    luma: bool,
) -> Result<&'a [CoefficientPlane]> {
    let used = if luma { &planes[..1] } else { planes };
    let grid = (used[0].blocks_wide, used[0].blocks_high);
    if used.iter().any(|p| (p.blocks_wide, p.blocks_high) != grid) {
        return Err(CliError::Unsupported(
            "component block grids differ (subsampled chroma); pass --luma".into(),
        ));
    }
    Ok(used)
}

fn extract_dct(cli: &Cli, a: &ExtractArgs) -> Result<()> {
    let out = output(cli)?;
    let coeffs = partial_decode(&read(&a.input)?)?;
    let planes = selected_planes(&coeffs.planes, a.luma)?;
    if a.render {
        let r = render_dct_image(planes)?;
        save_png(
            out,
            r.width as u32,
            r.height as u32,
            r.channels,
            r.samples.clone(),
        )?;
        emit(
            cli,
            format!(
                "{}x{}x{} rendering -> {}",
                r.width,
                r.height,
                r.channels,
                out.display()
            ),
            json!({"width": r.width, "height": r.height, "channels": r.channels, "output": out}),
        );
        return Ok(());
    }

    let mut values = Vec::new();
    for p in planes {
        values.extend_from_slice(&to_channelized_tensor(p)?.values);
    }
    let shape = vec![
        planes.len() as u32,
        planes[0].blocks_high as u32,
        planes[0].blocks_wide as u32,
        64,
    ];
    let all_full = coeffs
        .planes
        .iter()
        .all(|p| (p.h_sampling, p.v_sampling) == (1, 1));
    let subsampling = match coeffs.planes.as_slice() {
        [_] | [_, _, _] if all_full => Some(Subsampling::S444),
        [y, cb, cr]
            if (y.h_sampling, y.v_sampling) == (2, 2)
                && [cb, cr]
                    .iter()
                    .all(|p| (p.h_sampling, p.v_sampling) == (1, 1)) =>
        {
            Some(Subsampling::S420)
        }
        _ => None,
    };
    let name = a
        .input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        classes: vec![ClassLabel::from_name(0, "unlabeled")],
        representation: Representation::DctTensor,
        quality: None,
        subsampling,
        target_size: None,
        luma_only: a.luma,
        record_shape: shape.clone(),
        split_ratios: SplitRatios::new(1.0, 0.0, 0.0).expect("valid ratios"),
        split_seed: 0,
        counts: SplitCounts {
            train: 1,
            val: 0,
            test: 0,
        },
        source_digests: vec![path_digest(&name)],
    };
    let record = DatasetRecord {
        label: 0,
        shape: shape.clone(),
        payload: Payload::F32(values),
    };
    let file = File::create(out).map_err(|e| CliError::io(out, e))?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, &manifest)
        .and_then(|_| write_record(&mut w, &record))
        .and_then(|_| std::io::Write::flush(&mut w))
        .map_err(|e| CliError::io(out, e))?;
    emit(
        cli,
        format!("tensor {shape:?} -> {}", out.display()),
        json!({"shape": shape, "output": out}),
    );
    Ok(())
}

fn build(cli: &Cli, a: &BuildArgs) -> Result<()> {
    let seed = seed(cli)?;
    let out = output(cli)?;
    let config = BuildConfig {
        representation: a.representation,
        quality: a.quality,
        subsampling: a.subsampling,
        target_size: a.size,
        luma_only: a.luma,
        ratios: a.split,
        seed,
        threads: cli.threads,
    };
    config.validate()?;
    let corpus = scan_corpus(&a.root)?;
    let summary = build_dataset(&corpus, &config, out)?;
    let m = &summary.manifest;
    emit(
        cli,
        format!(
            "{} classes, {} records (train {}, val {}, test {}), shape {:?}, {} rejected -> {}",
            m.classes.len(),
            m.counts.total(),
            m.counts.train,
            m.counts.val,
            m.counts.test,
            m.record_shape,
            summary.rejects.rejected.len(),
            out.display()
        ),
        json!({"classes": m.classes.len(), "counts": m.counts, "record_shape": m.record_shape,
               "rejected": summary.rejects.rejected.len(), "rejects_report": summary.rejects_path,
               "output": out}),
    );
    Ok(())
}

#[derive(Serialize)]
struct History<'a> {
    config: &'a TrainConfig,
    classes: usize,
    feature_dim: usize,
    epochs: &'a [dctpipe_core::classifier::EpochRecord],
}

fn history_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    model.with_file_name(format!("{stem}.history.json"))
}

fn train_cmd(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let config = TrainConfig {
        learning_rate: a.lr,
        batch_size: a.batch,
        epochs: a.epochs,
        seed: seed(cli)?,
        l2: a.l2,
    };
    let out = output(cli)?;
    let data = load_examples(&a.dataset)?;
    let classes = data.manifest.classes.len();
    let val = (!data.val.is_empty()).then_some(&data.val);
    let outcome = train(&data.train, val, classes, &config)?;
    write(out, &outcome.model.to_bytes())?;
    let history = History {
        config: &config,
        classes,
        feature_dim: data.train.dim(),
        epochs: &outcome.history,
    };
    let hist_path = a.history.clone().unwrap_or_else(|| history_path(out));
    let hist_json = serde_json::to_vec_pretty(&history).expect("history serializes");
    write(&hist_path, &hist_json)?;
    let last = outcome.history.last().expect("at least one epoch");
    emit(
        cli,
        format!(
            "{} epochs on {} records: loss {:.4}, train accuracy {:.4} -> {}",
            outcome.history.len(),
            data.train.len(),
            last.loss,
            last.accuracy,
            out.display()
        ),
        json!({"epochs": outcome.history.len(), "loss": last.loss, "accuracy": last.accuracy,
               "val_accuracy": last.val_accuracy, "model": out, "history": hist_path}),
    );
    Ok(())
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<()> {
    let model = SoftmaxModel::from_bytes(&read(&a.model)?)?;
    let data = load_examples(&a.dataset)?;
    let classes = data.manifest.classes.len();
    if model.classes() != classes || model.dim() != data.train.dim() {
        return Err(CliError::Unsupported(format!(
            "model is {} classes x {} features, dataset is {classes} x {}",
            model.classes(),
            model.dim(),
            data.train.dim()
        )));
    }
    if a.topk == 0 || a.topk > classes {
        return Err(CliError::Usage(format!(
            "--topk {} outside 1..={classes}",
            a.topk
        )));
    }
    let split: SplitName = a.split.into();
    let examples = data.get(split);
    let mut rankings = Vec::with_capacity(examples.len());
    for i in 0..examples.len() {
        let ranked = model.predict_topk(examples.row(i), classes)?;
        rankings.push(ranked.into_iter().map(|(c, _)| c).collect::<Vec<_>>());
    }
    let labels = examples.labels();
    let preds: Vec<usize> = rankings.iter().map(|r| r[0]).collect();
    let mut report = precision_recall_f1(&confusion(&preds, labels, classes)?);
    for k in [3.min(classes), a.topk] {
        report = report.with_topk(k, topk_accuracy(&rankings, labels, k)?);
    }
    if classes < 3 {
        // Every ranking holds fewer than three classes, so all of them hit.
        report = report.with_topk(3, topk_accuracy(&rankings, labels, classes)?);
    }
    let rendered = format_report(&report, &data.manifest.class_names());
    if let Some(out) = &cli.output {
        write(out, rendered.json.as_bytes())?;
    }
    match cli.format {
        Format::Text => print!("{}", rendered.text),
        Format::Json => println!("{}", rendered.json),
    }
    Ok(())
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    if !a.corpus.is_dir() {
        return Err(CliError::io(&a.corpus, "not a directory"));
    }
    if a.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(&a.corpus)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "jpg" | "jpeg"))
        })
        .collect();
    paths.sort();
    let mut corpus = Vec::with_capacity(paths.len());
    for p in &paths {
        let bytes = read(p)?;
        match decode_jpeg(&bytes) {
            Ok(_) => corpus.push(bytes),
            Err(e) => log::warn!("skipping {}: {e}", p.display()),
        }
    }
    if corpus.is_empty() {
        return Err(CliError::Unsupported(format!(
            "no decodable baseline JPEGs under {}",
            a.corpus.display()
        )));
    }

    let time_pass = |partial: bool| {
        let start = Instant::now();
        for bytes in &corpus {
            if partial {
                black_box(partial_decode(black_box(bytes)).expect("checked above"));
            } else {
                black_box(decode_jpeg(black_box(bytes)).expect("checked above"));
            }
        }
        start.elapsed().as_secs_f64() * 1e3 / corpus.len() as f64
    };
    time_pass(true);
    time_pass(false);
    let mut partial_runs = Vec::with_capacity(a.repeats);
    let mut full_runs = Vec::with_capacity(a.repeats);
    for r in 0..a.repeats {
        if r % 2 == 0 {
            partial_runs.push(time_pass(true));
            full_runs.push(time_pass(false));
        } else {
            full_runs.push(time_pass(false));
            partial_runs.push(time_pass(true));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (partial_ms, full_ms) = (mean(&partial_runs), mean(&full_runs));
    let ratio = partial_ms / full_ms;
    emit(
        cli,
        format!(
            "{} images x {} passes\npartial decode  {partial_ms:9.4} ms/image\nfull decode     {full_ms:9.4} ms/image\npartial / full  {ratio:9.4}",
            corpus.len(),
            a.repeats
        ),
        json!({"images": corpus.len(), "repeats": a.repeats,
               "partial_mean_ms": partial_ms, "full_mean_ms": full_ms, "partial_over_full": ratio,
               "partial_runs_ms": partial_runs, "full_runs_ms": full_runs}),
    );
    Ok(())
}
