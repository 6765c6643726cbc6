//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its measurements; the test fails if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use dctpipe_core::classifier::{evaluate, train, Examples, SoftmaxModel, TrainConfig};
use dctpipe_core::codec::{
    decode_jpeg, dpcm_decode, dpcm_encode, encode_jpeg, encode_jpeg_with_planes, entropy_decode,
    entropy_encode, forward_dct, inverse_dct, parse_stream, reconstruct_samples, rle_decode,
    rle_encode, upsample_components, zigzag_scan, zigzag_unscan, DpcmStream, HuffmanSpec, RgbImage,
    RleSymbolSequence, SampleBlock, Subsampling,
};
use dctpipe_core::metrics::f1_score;
use dctpipe_core::{extract_coefficients, partial_decode, partial_decode_with_stats};
use dctpipe_dataset::synthetic::write_grating_corpus;
use dctpipe_dataset::{
    build_dataset, load_examples, scan_corpus, BuildConfig, Representation, SplitRatios,
};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn core_fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn random_block(rng: &mut impl Rng) -> SampleBlock {
    SampleBlock::new(std::array::from_fn(|_| rng.random_range(-128..=127))).unwrap()
}

fn direct_dct(p: &[i16; 64]) -> [f64; 64] {
    let c = |k: usize| if k == 0 { 0.5f64.sqrt() } else { 1.0 };
    std::array::from_fn(|idx| {
        let (i, j) = (idx / 8, idx % 8);
        let mut sum = 0.0;
        for x in 0..8 {
            for y in 0..8 {
                sum += p[8 * x + y] as f64
                    * ((2 * x + 1) as f64 * i as f64 * PI / 16.0).cos()
                    * ((2 * y + 1) as f64 * j as f64 * PI / 16.0).cos();
            }
        }
        0.25 * c(i) * c(j) * sum
    })
}

fn dct_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0f64;
    for _ in 0..1000 {
        let b = random_block(&mut rng);
        let slow = direct_dct(b.values());
        for (a, e) in forward_dct(&b).0.iter().zip(&slow) {
            worst = worst.max((a - e).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && secs < 5.0,
        format!("max |diff| {worst:.2e} over 1000 blocks in {secs:.3} s"),
    )
}

fn perfect_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let (mut mismatched, mut worst_energy) = (0, 0f64);
    for _ in 0..10_000 {
        let b = random_block(&mut rng);
        let d = forward_dct(&b);
        if inverse_dct(&d) != b {
            mismatched += 1;
        }
        let spatial: f64 = b.values().iter().map(|&v| (v as f64).powi(2)).sum();
        let spectral: f64 = d.0.iter().map(|c| c * c).sum();
        if spatial > 0.0 {
            worst_energy = worst_energy.max(((spectral - spatial) / spatial).abs());
        }
    }
    check(
        mismatched == 0 && worst_energy <= 1e-6,
        format!(
            "{mismatched} of 10000 blocks differ; worst relative energy error {worst_energy:.2e}"
        ),
    )
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(PropConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PropConfig::default()
    });
    runner
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn bijections() -> Outcome {
    let sparse = || prop::collection::vec(prop_oneof![6 => Just(0i32), 2 => -1023i32..=1023], 63);
    run_property("zigzag", prop::collection::vec(any::<i32>(), 64), |v| {
        let g: [i32; 64] = v.try_into().unwrap();
        prop_assert_eq!(zigzag_unscan(&zigzag_scan(&g)), g);
        Ok(())
    })?;
    run_property(
        "dpcm",
        prop::collection::vec(-2047i32..=2047, 1..64),
        |dc| {
            prop_assert_eq!(dpcm_decode(&dpcm_encode(&dc).unwrap()).unwrap(), dc.clone());
            let diffs = DpcmStream(dc.clone());
            prop_assert_eq!(dpcm_encode(&dpcm_decode(&diffs).unwrap()).unwrap(), diffs);
            Ok(())
        },
    )?;
    run_property("rle", sparse(), |v| {
        let ac: [i32; 63] = v.try_into().unwrap();
        prop_assert_eq!(rle_decode(&rle_encode(&ac)).unwrap(), ac);
        Ok(())
    })?;
    run_property(
        "huffman",
        (
            prop::collection::vec((-1023i32..=1023, sparse()), 1..10),
            any::<bool>(),
        ),
        |(blocks, chroma)| {
            let (dct, act) = if chroma {
                (HuffmanSpec::chroma_dc(), HuffmanSpec::chroma_ac())
            } else {
                (HuffmanSpec::luma_dc(), HuffmanSpec::luma_ac())
            };
            let dc: Vec<i32> = blocks.iter().map(|b| b.0).collect();
            let dpcm = dpcm_encode(&dc).unwrap();
            let rle: Vec<RleSymbolSequence> = blocks
                .iter()
                .map(|b| rle_encode(&b.1.clone().try_into().unwrap()))
                .collect();
            let bytes = entropy_encode(&dpcm, &rle, &dct, &act).unwrap();
            let (d2, r2) = entropy_decode(&bytes, blocks.len(), &dct, &act).unwrap();
            prop_assert_eq!(d2, dpcm);
            prop_assert_eq!(r2, rle);
            Ok(())
        },
    )?;
    Ok("zigzag, DPCM, RLE and Huffman each held for 10000 cases".into())
}

fn random_image(rng: &mut impl Rng, max_side: u32) -> RgbImage {
    let (w, h) = (
        rng.random_range(1..=max_side),
        rng.random_range(1..=max_side),
    );
    let base: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..255.0));
    let slope: [f64; 6] = std::array::from_fn(|_| rng.random_range(-6.0..6.0));
    let noise = rng.random_range(0.0..40.0);
    RgbImage::from_fn(w, h, |x, y| {
        std::array::from_fn(|c| {
            let v = base[c] + slope[2 * c] * x as f64 + slope[2 * c + 1] * y as f64;
            (v + rng.random_range(-noise..=noise)).clamp(0.0, 255.0) as u8
        })
    })
    .unwrap()
}

fn lossless_transport() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut failures = Vec::new();
    for i in 0..50 {
        let img = random_image(&mut rng, 96);
        let sub = if i % 2 == 0 {
            Subsampling::S444
        } else {
            Subsampling::S420
        };
        for q in [10, 50, 75, 90, 100] {
            let enc = encode_jpeg_with_planes(&img, q, sub).map_err(|e| e.to_string())?;
            let stream = parse_stream(&enc.bytes).map_err(|e| e.to_string())?;
            if extract_coefficients(&stream).map_err(|e| e.to_string())? != enc.planes {
                failures.push(format!("image {i} q{q}"));
            }
        }
    }
    check(
        failures.is_empty(),
        format!("250 encodes, {} mismatched {failures:?}", failures.len()),
    )
}

fn interop() -> Outcome {
    let dir = core_fixtures().join("external");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "jpg"))
        .collect();
    files.sort();
    let (mut worst_component, mut worst_rgb) = (0i32, 0i32);
    for path in &files {
        let bytes = std::fs::read(path).unwrap();
        let planes = partial_decode(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        let samples = reconstruct_samples(&planes).map_err(|e| e.to_string())?;
        let full = upsample_components(&planes, &samples).map_err(|e| e.to_string())?;
        let reference = image::open(path.with_extension("ycc.png"))
            .unwrap()
            .to_rgb8();
        for (c, plane) in full.iter().enumerate() {
            for (ours, theirs) in plane.samples.iter().zip(reference.pixels().map(|p| p.0[c])) {
                worst_component = worst_component.max((*ours as i32 - theirs as i32).abs());
            }
        }
        let rgb = decode_jpeg(&bytes).map_err(|e| e.to_string())?;
        let reference = image::open(path.with_extension("ref.png"))
            .unwrap()
            .to_rgb8();
        for (a, b) in rgb.samples().iter().zip(reference.as_raw()) {
            worst_rgb = worst_rgb.max((*a as i32 - *b as i32).abs());
        }
    }
    check(
        files.len() >= 20 && worst_component <= 1,
        format!(
            "{} libjpeg files decoded; max sample diff {worst_component} on Y/Cb/Cr, {worst_rgb} after the colour transform",
            files.len()
        ),
    )
}

fn no_idct_and_throughput() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let corpus: Vec<Vec<u8>> = (0..100)
        .map(|i| {
            let img = random_image(&mut rng, 256);
            let sub = if i % 2 == 0 {
                Subsampling::S444
            } else {
                Subsampling::S420
            };
            encode_jpeg(&img, 75, sub).unwrap()
        })
        .collect();
    let mut idct_calls = 0;
    for bytes in &corpus {
        idct_calls += partial_decode_with_stats(bytes)
            .map_err(|e| e.to_string())?
            .1
            .idct_blocks;
    }
    let time = |partial: bool| {
        let start = Instant::now();
        for bytes in &corpus {
            if partial {
                std::hint::black_box(partial_decode(bytes).unwrap());
            } else {
                std::hint::black_box(decode_jpeg(bytes).unwrap());
            }
        }
        start.elapsed().as_secs_f64() * 1e3 / corpus.len() as f64
    };
    time(true);
    time(false);
    let (mut partial, mut full) = (0.0, 0.0);
    for _ in 0..3 {
        partial += time(true) / 3.0;
        full += time(false) / 3.0;
    }
    check(
        idct_calls == 0 && partial < full,
        format!("{idct_calls} IDCT calls; mean {partial:.3} ms partial vs {full:.3} ms full per image (ratio {:.3})", partial / full),
    )
}

const PUBLISHED: [(f64, f64, f64); 32] = [
    (1.00, 0.77, 0.87),
    (1.00, 1.00, 1.00),
    (0.92, 1.00, 0.96),
    (0.91, 0.93, 0.92),
    (0.96, 0.98, 0.97),
    (0.98, 0.96, 0.97),
    (1.00, 1.00, 1.00),
    (0.93, 0.93, 0.93),
    (1.00, 0.98, 0.99),
    (0.67, 1.00, 0.80),
    (1.00, 0.92, 0.96),
    (0.93, 0.92, 0.92),
    (0.91, 0.80, 0.85),
    (0.96, 1.00, 0.98),
    (0.97, 0.94, 0.96),
    (0.92, 0.82, 0.87),
    (0.97, 0.94, 0.96),
    (0.17, 0.33, 0.22),
    (0.94, 1.00, 0.97),
    (0.99, 1.00, 0.99),
    (1.00, 1.00, 1.00),
    (0.83, 1.00, 0.91),
    (0.95, 0.79, 0.86),
    (0.96, 1.00, 0.98),
    (0.84, 1.00, 0.91),
    (0.81, 0.93, 0.87),
    (0.95, 0.84, 0.89),
    (0.78, 0.90, 0.84),
    (0.92, 0.91, 0.91),
    (0.78, 0.96, 0.86),
    (0.91, 0.28, 0.43),
    (0.93, 0.93, 0.93),
];

fn metric_fidelity() -> Outcome {
    let worst = PUBLISHED
        .iter()
        .map(|&(p, r, f)| (f1_score(p, r) - f).abs())
        .fold(0.0, f64::max);
    let scab = f1_score(1.00, 0.77);
    let pepper = f1_score(0.17, 0.33);
    check(
        worst <= 0.01 && (scab - 0.87).abs() <= 0.01 && (pepper - 0.22).abs() <= 0.01,
        format!("32 rows, worst |F1 - printed| {worst:.4}; 1.00/0.77 -> {scab:.4}, 0.17/0.33 -> {pepper:.4}"),
    )
}

/// Regularized mean cross-entropy computed directly from the definition.
fn oracle_loss(m: &SoftmaxModel, data: &Examples, l2: f64) -> f64 {
    let (k, d) = (m.classes(), m.dim());
    let mut total = 0.0;
    for i in 0..data.len() {
        let x: Vec<f64> = (0..d)
            .map(|j| (data.row(i)[j] - m.mean()[j]) / m.std()[j])
            .collect();
        let z: Vec<f64> = (0..k)
            .map(|c| m.biases[c] + (0..d).map(|j| m.weights[c * d + j] * x[j]).sum::<f64>())
            .collect();
        total += z.iter().map(|v| v.exp()).sum::<f64>().ln() - z[data.label(i)];
    }
    total / data.len() as f64 + 0.5 * l2 * m.weights.iter().map(|w| w * w).sum::<f64>()
}

fn gradient_check() -> Outcome {
    let mut worst = 0f64;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Examples::new(5);
        for _ in 0..6 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            data.push(x, rng.random_range(0..3)).unwrap();
        }
        let mut model = SoftmaxModel::fitted_to(&data, 3);
        model
            .weights
            .iter_mut()
            .for_each(|w| *w = rng.random_range(-1.0..1.0));
        model
            .biases
            .iter_mut()
            .for_each(|b| *b = rng.random_range(-1.0..1.0));
        let l2 = 0.05;
        let (_, grad) = model.loss_and_grad(&data, &[0, 1, 2, 3, 4, 5], l2).unwrap();
        let loss_at = |m: &SoftmaxModel| oracle_loss(m, &data, l2);
        let h = 1e-5;
        for i in 0..model.weights.len() + model.biases.len() {
            let (mut up, mut down) = (model.clone(), model.clone());
            let analytic = if i < 15 {
                up.weights[i] += h;
                down.weights[i] -= h;
                grad.weights[i]
            } else {
                up.biases[i - 15] += h;
                down.biases[i - 15] -= h;
                grad.biases[i - 15]
            };
            let numeric = (loss_at(&up) - loss_at(&down)) / (2.0 * h);
            worst =
                worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8));
        }
    }
    check(
        worst <= 1e-5,
        format!("20 random 5-feature 3-class instances, worst relative error {worst:.2e}"),
    )
}

fn grating_classification() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("gratings");
    write_grating_corpus(&root, 240, 64, 2024).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let corpus = scan_corpus(&root).map_err(|e| e.to_string())?;
    let config = BuildConfig {
        target_size: 64,
        ratios: SplitRatios::new(200.0 / 240.0, 0.0, 40.0 / 240.0).map_err(|e| e.to_string())?,
        threads: 1,
        ..BuildConfig::new(Representation::DctTensor, 7)
    };
    let out = dir.path().join("gratings.dctd");
    build_dataset(&corpus, &config, &out).map_err(|e| e.to_string())?;
    let data = load_examples(&out).map_err(|e| e.to_string())?;
    let train_config = TrainConfig {
        learning_rate: 0.05,
        batch_size: 32,
        epochs: 10,
        seed: 7,
        l2: 1e-4,
    };
    let outcome = train(&data.train, None, 4, &train_config).map_err(|e| e.to_string())?;
    let (_, accuracy) = evaluate(&outcome.model, &data.test, 0.0).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(
        data.train.len() == 800 && data.test.len() == 160 && accuracy >= 0.95 && secs < 60.0,
        format!(
            "{} train / {} test dct-tensor records; test accuracy {accuracy:.4}; build + train {secs:.1} s on one thread",
            data.train.len(),
            data.test.len()
        ),
    )
}

fn dctpipe(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dctpipe"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "dctpipe {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().join("corpus");
    write_grating_corpus(&root, 12, 64, 9).map_err(|e| e.to_string())?;
    let root = root.to_str().unwrap();
    let mut runs = Vec::new();
    for run in 0..2 {
        let path = |name: &str| {
            dir.path()
                .join(format!("{name}{run}"))
                .to_str()
                .unwrap()
                .to_owned()
        };
        let (data, model, history) = (path("data.dctd"), path("model.smx"), path("history.json"));
        let threads = if run == 0 { "1" } else { "3" };
        dctpipe(&[
            "build-dataset",
            root,
            "--size",
            "64",
            "--seed",
            "5",
            "--threads",
            threads,
            "-o",
            &data,
        ])?;
        dctpipe(&[
            "train",
            &data,
            "--epochs",
            "3",
            "--seed",
            "5",
            "--history",
            &history,
            "-o",
            &model,
        ])?;
        runs.push([data, model, history].map(|p| std::fs::read(p).unwrap()));
    }
    let same = runs[0] == runs[1];
    check(
        same,
        format!(
            "dataset {} bytes, model {} bytes, history {} bytes; identical across runs: {same}",
            runs[0][0].len(),
            runs[0][1].len(),
            runs[0][2].len()
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("DCT oracle equivalence", dct_oracle),
        ("Perfect reconstruction", perfect_reconstruction),
        ("Bijection suite", bijections),
        ("Lossless coefficient transport", lossless_transport),
        ("Interop", interop),
        ("No-IDCT and throughput", no_idct_and_throughput),
        ("Metric fidelity", metric_fidelity),
        ("Gradient check", gradient_check),
        (
            "Compressed-domain classification at desk scale",
            grating_classification,
        ),
        ("Determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                println!("FAIL  {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
