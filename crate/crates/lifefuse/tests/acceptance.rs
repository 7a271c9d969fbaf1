//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use lifefuse::config::RunConfig;
use lifefuse::run::{run, Command};
use lifefuse_core::dsp::{
    cross_correlate, emd_decompose, make_windows, pca_clutter_suppress, principal_components, EmdConfig, FusionSample,
};
use lifefuse_core::fusion::{
    ds_combine_pair, ds_scores, evaluate, roc_auc, split_samples, train_split, FusionConfig, FusionNetwork,
    FusionProbe, MassFunction, DEFAULT_RELIABILITY,
};
use lifefuse_core::math::{pearson, sin, PI};
use lifefuse_core::neural::gradcheck::{ConvBceProbe, ConvProbe, DenseProbe, LstmProbe};
use lifefuse_core::neural::{
    grad_check, weighted_bce, ClassifierConfig, ClassifierProbe, Differentiable, SequenceClassifier, Tensor,
};
use lifefuse_core::rng::{rng_from_seed, uniform_symmetric};
use lifefuse_core::sim::{simulate_probability_streams, EchoMatrix, ScenarioConfig};

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn gradients() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let mut probes: Vec<(&str, Box<dyn Differentiable>)> = vec![
        ("dense", Box::new(DenseProbe::random(5, 4, &mut rng).unwrap())),
        ("conv1d", Box::new(ConvProbe::random(2, 3, 3, 10, &mut rng).unwrap())),
        ("lstm", Box::new(LstmProbe::random(3, 3, 1, 4, &mut rng).unwrap())),
        ("lstm stack", Box::new(LstmProbe::random(2, 3, 2, 5, &mut rng).unwrap())),
        (
            "conv1d+sigmoid+bce",
            Box::new(ConvBceProbe::random(2, 3, 9, &mut rng).unwrap()),
        ),
    ];
    let classifier = SequenceClassifier::new(ClassifierConfig {
        input_channels: 2,
        input_len: 12,
        conv: vec![(3, 3)],
        lstm_hidden: 3,
        lstm_layers: 2,
        dense: vec![3],
        keep_prob: 1.0,
        seed: 5,
    })
    .unwrap();
    let input = (0..24).map(|_| uniform_symmetric(&mut rng, 1.0)).collect();
    probes.push((
        "sequence classifier",
        Box::new(ClassifierProbe {
            net: classifier,
            input,
            label: 1,
        }),
    ));

    let fusion = FusionNetwork::new(FusionConfig {
        conv_channels: 2,
        branch_lstm_layers: 2,
        branch_hidden: 2,
        fusion_hidden_1: 3,
        fusion_hidden_2: 3,
        dense_widths: vec![3, 2],
        ..FusionConfig::for_window(8)
    })
    .unwrap();
    let data = (0..48).map(|_| 0.5 + uniform_symmetric(&mut rng, 0.5)).collect();
    let sample = FusionSample::new(8, data, 1, 1.0).unwrap();
    probes.push(("fusion network G=8", Box::new(FusionProbe { net: fusion, sample })));

    let mut worst = (0.0f64, String::new());
    for (name, probe) in &mut probes {
        match grad_check(probe.as_mut(), 1e-3) {
            Ok(r) if r.max_relative_error > worst.0 => {
                worst = (r.max_relative_error, format!("{name}: {}", r.worst_coordinate))
            }
            Ok(_) => {}
            Err(e) => return outcome(false, format!("{name}: {e}")),
        }
    }
    outcome(
        worst.0 < 1e-4,
        format!(
            "{} models, max relative error {:.2e} ({})",
            probes.len(),
            worst.0,
            worst.1
        ),
    )
}

fn emd() -> Outcome {
    let t = |i: usize| i as f64 / 64.0;
    let fast: Vec<f64> = (0..512).map(|i| sin(2.0 * PI * 2.0 * t(i))).collect();
    let slow: Vec<f64> = (0..512).map(|i| sin(2.0 * PI * 0.25 * t(i))).collect();
    let x: Vec<f64> = fast.iter().zip(&slow).map(|(a, b)| a + b).collect();
    let r = match emd_decompose(&x, &EmdConfig::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let Some(imf1) = r.imfs.first() else {
        return outcome(false, "no IMFs extracted");
    };
    let corr = pearson(imf1, &fast);
    let err = r
        .reconstruct()
        .iter()
        .zip(&x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        corr > 0.95 && err < 1e-9,
        format!(
            "IMF1 vs 2 Hz corr {corr:.4}, reconstruction error {err:.1e}, {} IMFs",
            r.imfs.len()
        ),
    )
}

fn pca() -> Outcome {
    let (rows, cols, bin) = (200, 8, 3);
    let clutter = |c: usize| [3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, -6.0][c];
    let s = |r: usize| 0.05 * sin(2.0 * PI * 0.3 * r as f64 * 0.05);
    let data = (0..rows * cols)
        .map(|i| clutter(i % cols) + if i % cols == bin { s(i / cols) } else { 0.0 })
        .collect();
    let echo = EchoMatrix::new(rows, cols, data, 0.05, 50e-12).unwrap();
    let kept = pca_clutter_suppress(&echo, 1, 1).unwrap();
    let injected: Vec<f64> = (0..rows).map(s).collect();
    let corr = pearson(&kept.column(bin), &injected);
    let full = pca_clutter_suppress(&echo, 0, cols).unwrap();
    let centered = principal_components(&echo).centered;
    let err = full
        .data()
        .iter()
        .zip(&centered)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    outcome(
        corr > 0.99 && err < 1e-9,
        format!("retained corr {corr:.5}, full-rank error {err:.1e}"),
    )
}

fn correlation() -> Outcome {
    let mut rng = rng_from_seed(77);
    let mut uniform = |bound: f64| uniform_symmetric(&mut rng, bound);
    for pair in 0..1000 {
        // lengths in 1..=64, values integers in [-20, 20]
        let nx = 1 + ((uniform(0.5) + 0.5) * 64.0).min(63.0) as usize;
        let ny = 1 + ((uniform(0.5) + 0.5) * 64.0).min(63.0) as usize;
        let x: Vec<f64> = (0..nx).map(|_| uniform(20.0).round()).collect();
        let y: Vec<f64> = (0..ny).map(|_| uniform(20.0).round()).collect();
        let got = cross_correlate(&x, &y).unwrap();
        for (&m, &v) in got.lags.iter().zip(&got.values) {
            let mut want = 0.0;
            for (n, xn) in x.iter().enumerate() {
                let k = n as i64 + m;
                if k >= 0 && (k as usize) < ny {
                    want += xn * y[k as usize];
                }
            }
            if v != want {
                return outcome(false, format!("pair {pair}, lag {m}: {v} != {want}"));
            }
        }
        if got.lags.len() != nx + ny - 1 {
            return outcome(false, format!("pair {pair}: {} lags", got.lags.len()));
        }
    }
    outcome(true, "1000 integer pairs up to length 64 match exactly")
}

fn bce() -> Outcome {
    let case = |x: f64, y: f64, w: f64| {
        weighted_bce(
            &Tensor::from_slice(&[x]),
            &Tensor::from_slice(&[y]),
            &Tensor::from_slice(&[w]),
        )
        .unwrap()
        .0
    };
    let values = [case(1.0, 1.0, 1.0), case(0.5, 1.0, 1.0), case(0.5, 0.0, 2.0)];
    let expected = [0.0, 2f64.ln(), 2.0 * 2f64.ln()];
    let max_err = values
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let pred = Tensor::from_slice(&[0.1, 0.35, 0.8, 0.99]);
    let target = Tensor::from_slice(&[0.0, 1.0, 1.0, 0.0]);
    let w = [0.5, 1.0, 2.0, 3.0];
    let (base, _) = weighted_bce(&pred, &target, &Tensor::from_slice(&w)).unwrap();
    let doubled: Vec<f64> = w.iter().map(|v| v * 2.0).collect();
    let (twice, _) = weighted_bce(&pred, &target, &Tensor::from_slice(&doubled)).unwrap();
    let linear = twice == 2.0 * base;
    outcome(
        max_err < 1e-9 && linear,
        format!("values {values:.6?}, max error {max_err:.1e}, weight linearity exact: {linear}"),
    )
}

fn windows() -> Outcome {
    let streams = simulate_probability_streams(&ScenarioConfig::default()).unwrap();
    let w = make_windows(&streams, 64, 5).unwrap();
    let shaped = w.iter().all(|s| s.window() == 64 && s.data().len() == 3 * 2 * 64);
    outcome(
        streams.len() == 1000 && w.len() == 936 && shaped,
        format!("L={} G=64 gives {} samples of 3x2x64", streams.len(), w.len()),
    )
}

fn desk_config(output: &Path) -> RunConfig {
    RunConfig::resolve(
        Some("desk"),
        None,
        &[format!("paths.output={}", output.display())],
        None,
    )
    .unwrap()
}

/// The standard-scenario training run through the command pipeline.
fn protocol_run(output: &Path) -> lifefuse::Result<()> {
    let cfg = desk_config(output);
    let mut quiet = |_: &str| {};
    run(Command::TrainFusion, &cfg, &mut quiet)?;
    run(Command::Eval, &cfg, &mut quiet)?;
    Ok(())
}

fn history_rows(output: &Path) -> Vec<(f64, f64, f64)> {
    let path = output.join("history.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    lifefuse::report::parse_history(&path, &text).unwrap()
}

fn training_protocol(output: &Path) -> Outcome {
    let start = Instant::now();
    if let Err(e) = protocol_run(output) {
        return outcome(false, e.to_string());
    }
    let secs = start.elapsed().as_secs_f64();
    let rows = history_rows(output);
    let (first, last) = (rows[0], rows[rows.len() - 1]);
    let cfg = desk_config(output);
    let pass = rows.len() == cfg.fusion.epochs + 1
        && (first.1 - 2f64.ln()).abs() < 0.1
        && last.1 < 0.35
        && (last.2 - last.1).abs() <= 0.15
        && secs < 900.0
        && output.join("predictions.csv").exists();
    outcome(
        pass,
        format!(
            "{} epochs, batch {}: train {:.3} -> {:.3}, test {:.3}, {:.0} s; curves in {}",
            cfg.fusion.epochs,
            cfg.fusion.batch,
            first.1,
            last.1,
            last.2,
            secs,
            output.display()
        ),
    )
}

struct SplitRun {
    net: FusionNetwork,
    test_final: f64,
    test: Vec<FusionSample>,
}

fn train_on(scenario: &ScenarioConfig, fusion: &FusionConfig) -> lifefuse::Result<SplitRun> {
    let streams = simulate_probability_streams(scenario)?;
    let samples = make_windows(&streams, fusion.window, fusion.smooth_width)?;
    let (train, test) = split_samples(&samples)?;
    let mut net = FusionNetwork::new(fusion.clone())?;
    let h = train_split(&mut net, &train, &test, &mut |_| {})?;
    let last = *h.last().expect("at least one epoch");
    Ok(SplitRun {
        net,
        test_final: last.test_loss,
        test,
    })
}

fn fusion_benefit() -> Outcome {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in SEEDS {
        let mut scenario = ScenarioConfig::interference(0.2);
        scenario.seed = seed;
        let fusion = FusionConfig {
            seed,
            ..FusionConfig::desk()
        };
        let r = match train_on(&scenario, &fusion) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let labels: Vec<u8> = r.test.iter().map(|s| s.label).collect();
        let fused = evaluate(&r.net, &r.test, 0.5).unwrap().metrics.roc_auc;
        let best = (0..3)
            .map(|b| {
                let scores: Vec<f64> = r.test.iter().map(|s| s.last_raw()[b]).collect();
                roc_auc(&scores, &labels).unwrap()
            })
            .fold(0.0, f64::max);
        let ds = roc_auc(&ds_scores(&r.test, &[DEFAULT_RELIABILITY; 3]).unwrap(), &labels).unwrap();
        let ok = fused >= best + 0.05 && fused > ds;
        wins += ok as usize;
        lines.push(format!(
            "s{seed} {fused:.3}/{best:.3}/{ds:.3}{}",
            if ok { "" } else { "x" }
        ));
    }
    outcome(
        wins >= 4,
        format!("{wins}/5 seeds; fusion/best single/D-S AUC: {}", lines.join(", ")),
    )
}

fn smoothing_ablation() -> Outcome {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in SEEDS {
        let scenario = ScenarioConfig {
            seed,
            ..ScenarioConfig::default()
        };
        let losses: Result<Vec<f64>, String> = [5, 1]
            .iter()
            .map(|&h| {
                let fusion = FusionConfig {
                    seed,
                    smooth_width: h,
                    ..FusionConfig::desk()
                };
                train_on(&scenario, &fusion)
                    .map(|r| r.test_final)
                    .map_err(|e| e.to_string())
            })
            .collect();
        let losses = match losses {
            Ok(l) => l,
            Err(e) => return outcome(false, format!("seed {seed}: {e}")),
        };
        let ok = losses[0] < losses[1];
        wins += ok as usize;
        lines.push(format!(
            "s{seed} {:.4}/{:.4}{}",
            losses[0],
            losses[1],
            if ok { "" } else { "x" }
        ));
    }
    outcome(
        wins >= 4,
        format!("{wins}/5 seeds; final test loss H=5/H=1: {}", lines.join(", ")),
    )
}

fn dempster() -> Outcome {
    let m1 = MassFunction::new(0.6, 0.3, 0.1).unwrap();
    let m2 = MassFunction::new(0.7, 0.2, 0.1).unwrap();
    let (m, k) = ds_combine_pair(&m1, &m2).unwrap();
    let hand = (m.life - 0.8209).abs() < 1e-4
        && (m.none - 0.1642).abs() < 1e-4
        && (m.theta - 0.0149).abs() < 1e-4
        && (k - 0.33).abs() < 1e-9;

    let mut rng = rng_from_seed(10);
    let mut random_mass = || {
        let a = uniform_symmetric(&mut rng, 0.5) + 0.5;
        let b = uniform_symmetric(&mut rng, 0.5) + 0.5;
        let c = uniform_symmetric(&mut rng, 0.5) + 0.5 + 1e-3;
        let s = a + b + c;
        MassFunction::new(a / s, b / s, 1.0 - a / s - b / s).unwrap()
    };
    let close = |a: &MassFunction, b: &MassFunction| {
        (a.life - b.life).abs() < 1e-9 && (a.none - b.none).abs() < 1e-9 && (a.theta - b.theta).abs() < 1e-9
    };
    let mut failures = 0;
    for _ in 0..1000 {
        let (a, b, c) = (random_mass(), random_mass(), random_mass());
        let comb = |x: &MassFunction, y: &MassFunction| ds_combine_pair(x, y).map(|r| r.0);
        let ok = (|| -> lifefuse_core::Result<bool> {
            let commute = close(&comb(&a, &b)?, &comb(&b, &a)?);
            let assoc = close(&comb(&comb(&a, &b)?, &c)?, &comb(&a, &comb(&b, &c)?)?);
            Ok(commute && assoc)
        })();
        if !matches!(ok, Ok(true)) {
            failures += 1;
        }
    }
    outcome(
        hand && failures == 0,
        format!(
            "hand case ({:.4}, {:.4}, {:.4}) K={k:.2}; {failures} property failures over 1000 triples",
            m.life, m.none, m.theta
        ),
    )
}

fn determinism(first: &Path) -> Outcome {
    let second = scratch("determinism");
    if let Err(e) = protocol_run(&second) {
        return outcome(false, e.to_string());
    }
    let read = |dir: &Path, f: &str| std::fs::read(dir.join(f)).unwrap_or_default();
    let same_history =
        !read(first, "history.csv").is_empty() && read(first, "history.csv") == read(&second, "history.csv");
    let same_ckpt = read(first, "fusion.ckpt") == read(&second, "fusion.ckpt");
    outcome(
        same_history,
        format!("history.csv identical: {same_history}; checkpoint identical: {same_ckpt}"),
    )
}

fn main() {
    let protocol_dir = scratch("training-protocol");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("gradient correctness", Box::new(gradients)),
        ("EMD oracle", Box::new(emd)),
        ("PCA clutter suppression", Box::new(pca)),
        ("cross-correlation oracle", Box::new(correlation)),
        ("weighted BCE values", Box::new(bce)),
        ("windowing count", Box::new(windows)),
        (
            "training protocol",
            Box::new({
                let d = protocol_dir.clone();
                move || training_protocol(&d)
            }),
        ),
        ("fusion benefit under interference", Box::new(fusion_benefit)),
        ("smoothing ablation", Box::new(smoothing_ablation)),
        ("Dempster oracle", Box::new(dempster)),
        (
            "determinism",
            Box::new({
                let d = protocol_dir.clone();
                move || determinism(&d)
            }),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| outcome(false, "panicked"));
        failed += !result.pass as usize;
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
