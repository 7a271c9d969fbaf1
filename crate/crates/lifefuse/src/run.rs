//! The six commands.

use std::path::{Path, PathBuf};

use lifefuse_core::detectors::{synthetic_uwb_echo, uwb_window_samples, UwbDetector, UwbSample};
use lifefuse_core::dsp::{make_windows, FusionSample};
use lifefuse_core::fusion::{
    ds_scores, evaluate, roc_auc, split_samples, train_split, EpochRecord, FusionConfig, FusionNetwork, TrainHistory,
};
use lifefuse_core::neural::{AdamConfig, FitConfig};
use lifefuse_core::rng::derive_seed;
use lifefuse_core::sim::simulate_probability_streams;
use lifefuse_core::SensorStreams;

use crate::checkpoint;
use crate::config::RunConfig;
use crate::echo::{encode_echo, sidecar_path, EchoSidecar};
use crate::error::{Error, Result};
use crate::fsutil::read_file;
use crate::manifest::{ArtifactWriter, Manifest};
use crate::report::{self, EvalReport};
use crate::streams::{format_streams, read_streams};
use crate::svg::{LineChart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    TrainUwb,
    TrainFusion,
    Eval,
    Sweep,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::TrainUwb => "train-uwb",
            Command::TrainFusion => "train-fusion",
            Command::Eval => "eval",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

/// Runs one command and returns the manifest it wrote.
pub fn run(command: Command, cfg: &RunConfig, log: &mut dyn FnMut(&str)) -> Result<Manifest> {
    let mut out = ArtifactWriter::new(&cfg.paths.output);
    let config_json = cfg.to_json();
    out.write("config.json", config_json.as_bytes())?;
    match command {
        Command::Simulate => simulate(cfg, &mut out)?,
        Command::TrainUwb => train_uwb(cfg, &mut out, log)?,
        Command::TrainFusion => train_fusion(cfg, &mut out, log)?,
        Command::Eval => eval(cfg, &mut out)?,
        Command::Sweep => sweep(cfg, &mut out, log)?,
        Command::Report => report(cfg, &mut out)?,
    }
    out.finish(Manifest {
        command: command.name().into(),
        config_sha256: crate::fsutil::sha256_hex(config_json.as_bytes()),
        seed: cfg.seed,
        scenario_seed: cfg.scenario.seed,
        fusion_seed: cfg.fusion.seed,
        uwb_seed: cfg.uwb.seed,
        artifacts: Default::default(),
    })
}

fn write_echo_artifact(out: &mut ArtifactWriter, name: &str, echo: &lifefuse_core::sim::EchoMatrix) -> Result<()> {
    out.write(name, &encode_echo(echo))?;
    let side = EchoSidecar {
        rows: echo.rows() as u64,
        cols: echo.cols() as u64,
        slow_interval: echo.slow_interval,
        fast_interval: echo.fast_interval,
    };
    let json = serde_json::to_string_pretty(&side).expect("sidecar serializes") + "\n";
    let side_name = sidecar_path(Path::new(name)).to_string_lossy().into_owned();
    out.write(&side_name, json.as_bytes())?;
    Ok(())
}

fn simulate(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<()> {
    let streams = simulate_probability_streams(&cfg.scenario)?;
    out.write("streams.csv", format_streams(&streams).as_bytes())?;
    let rows = cfg.uwb_training.echo_rows;
    for (name, present, stream) in [("echo_present.bin", true, 0), ("echo_absent.bin", false, 1)] {
        let echo = synthetic_uwb_echo(present, rows, &cfg.uwb_synth, derive_seed(cfg.uwb.seed, stream))?;
        write_echo_artifact(out, name, &echo)?;
    }
    Ok(())
}

/// Equal numbers of presence and absence windows, each from its own echo.
pub fn uwb_dataset(cfg: &RunConfig) -> Result<Vec<UwbSample>> {
    let pulse = cfg.uwb_synth.pulse()?;
    let w = cfg.uwb.window;
    let mut samples = Vec::with_capacity(2 * cfg.uwb_training.windows_per_class);
    for i in 0..cfg.uwb_training.windows_per_class {
        for present in [true, false] {
            let seed = derive_seed(cfg.uwb.seed, 1000 + 2 * i as u64 + u64::from(present));
            let echo = synthetic_uwb_echo(present, w, &cfg.uwb_synth, seed)?;
            let labels = vec![u8::from(present); w];
            samples.extend(uwb_window_samples(&echo, &pulse, &labels, &cfg.uwb, w)?);
        }
    }
    Ok(samples)
}

fn train_uwb(cfg: &RunConfig, out: &mut ArtifactWriter, log: &mut dyn FnMut(&str)) -> Result<()> {
    let data = uwb_dataset(cfg)?;
    let n_valid = ((data.len() as f64 * cfg.uwb_training.valid_fraction) as usize).min(data.len() - 2);
    let (train, valid) = data.split_at(data.len() - n_valid);
    let mut det = UwbDetector::new(cfg.uwb.clone())?;
    let t = &cfg.uwb_training;
    let fit = FitConfig {
        epochs: t.epochs,
        batch: t.batch,
        adam: AdamConfig {
            learning_rate: t.learning_rate,
            ..AdamConfig::default()
        },
        clip_norm: t.clip_norm,
        seed: cfg.uwb.seed,
    };
    log(&format!(
        "train-uwb: {} train / {} validation windows",
        train.len(),
        valid.len()
    ));
    let history = det.fit(train, valid, &fit)?;
    let records: Vec<EpochRecord> = history
        .train_loss
        .iter()
        .enumerate()
        .map(|(i, &tr)| EpochRecord {
            epoch: i + 1,
            train_loss: tr,
            test_loss: history.valid_loss.get(i).copied().unwrap_or(f64::NAN),
        })
        .collect();
    let correct = valid
        .iter()
        .map(|s| det.predict(s).map(|p| u8::from(p > 0.5) == s.label))
        .collect::<lifefuse_core::Result<Vec<bool>>>()?;
    let accuracy = correct.iter().filter(|&&c| c).count() as f64 / correct.len().max(1) as f64;
    log(&format!("train-uwb: validation accuracy {accuracy:.3}"));

    out.write(
        "uwb.ckpt",
        &checkpoint::encode(checkpoint::ModelConfig::Uwb(det.config().clone()), det.model()),
    )?;
    out.write("uwb_history.csv", report::format_history(&records).as_bytes())?;
    let metrics = serde_json::json!({ "validation_accuracy": accuracy, "validation_windows": valid.len() });
    out.write("uwb_metrics.json", report::format_json(&metrics).as_bytes())?;
    if cfg.emit_plots {
        out.write(
            "uwb_loss.svg",
            loss_chart("UWB detector loss", &records).render().as_bytes(),
        )?;
    }
    Ok(())
}

/// Streams from `paths.input`, or simulated from the scenario.
fn load_streams(cfg: &RunConfig) -> Result<SensorStreams> {
    match &cfg.paths.input {
        Some(path) => read_streams(path),
        None => Ok(simulate_probability_streams(&cfg.scenario)?),
    }
}

fn windows(streams: &SensorStreams, fusion: &FusionConfig) -> Result<(Vec<FusionSample>, Vec<FusionSample>)> {
    let samples = make_windows(streams, fusion.window, fusion.smooth_width)?;
    Ok(split_samples(&samples)?)
}

/// Trains one network on a prepared split.
pub fn fit_fusion(
    fusion: &FusionConfig,
    train: &[FusionSample],
    test: &[FusionSample],
    log: &mut dyn FnMut(&str),
) -> Result<(FusionNetwork, TrainHistory)> {
    let mut net = FusionNetwork::new(fusion.clone())?;
    let history = train_split(&mut net, train, test, &mut |r| {
        log(&format!(
            "epoch {:>3}  train {:.5}  test {:.5}",
            r.epoch, r.train_loss, r.test_loss
        ))
    })?;
    Ok((net, history))
}

fn loss_chart(title: &str, records: &[EpochRecord]) -> LineChart {
    LineChart {
        title: title.into(),
        x_label: "epoch".into(),
        y_label: "loss".into(),
        series: vec![
            Series {
                name: "train".into(),
                points: records.iter().map(|r| (r.epoch as f64, r.train_loss)).collect(),
            },
            Series {
                name: "test".into(),
                points: records.iter().map(|r| (r.epoch as f64, r.test_loss)).collect(),
            },
        ],
    }
}

fn train_fusion(cfg: &RunConfig, out: &mut ArtifactWriter, log: &mut dyn FnMut(&str)) -> Result<()> {
    let streams = load_streams(cfg)?;
    let (train, test) = windows(&streams, &cfg.fusion)?;
    log(&format!(
        "train-fusion: {} train / {} test windows",
        train.len(),
        test.len()
    ));
    let (net, history) = fit_fusion(&cfg.fusion, &train, &test, log)?;
    out.write(
        "fusion.ckpt",
        &checkpoint::encode(checkpoint::ModelConfig::Fusion(net.config().clone()), &net),
    )?;
    out.write("history.csv", report::format_history(&history.records).as_bytes())?;
    if cfg.emit_plots {
        out.write(
            "loss.svg",
            loss_chart("Fusion training loss", &history.records).render().as_bytes(),
        )?;
    }
    Ok(())
}

fn eval(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<()> {
    let ckpt = cfg
        .paths
        .checkpoint
        .clone()
        .unwrap_or_else(|| cfg.paths.output.join("fusion.ckpt"));
    let net = checkpoint::load_fusion(&ckpt)?;
    let streams = load_streams(cfg)?;
    let (_, test) = windows(&streams, net.config())?;
    let evaluation = evaluate(&net, &test, cfg.threshold)?;

    let labels: Vec<u8> = test.iter().map(|s| s.label).collect();
    let mut sensor_auc = [0.0; 3];
    for (b, auc) in sensor_auc.iter_mut().enumerate() {
        let scores: Vec<f64> = test.iter().map(|s| s.last_raw()[b]).collect();
        *auc = roc_auc(&scores, &labels)?;
    }
    let ds = ds_scores(&test, &cfg.ds_reliability)?;
    let rep = EvalReport {
        fusion: evaluation.metrics,
        threshold: cfg.threshold,
        sensor_auc,
        ds_auc: roc_auc(&ds, &labels)?,
        ds_reliability: cfg.ds_reliability,
        test_windows: test.len(),
    };
    out.write("metrics.json", report::format_json(&rep).as_bytes())?;
    let predictions = report::format_predictions(&evaluation.predictions, &streams.timestamps);
    out.write("predictions.csv", predictions.as_bytes())?;
    if cfg.emit_plots {
        out.write(
            "fit.svg",
            fit_chart(&predictions_points(&evaluation.predictions, &streams.timestamps))
                .render()
                .as_bytes(),
        )?;
    }
    Ok(())
}

fn predictions_points(p: &[lifefuse_core::fusion::Prediction], timestamps: &[f64]) -> Vec<(f64, f64, f64)> {
    p.iter()
        .map(|p| {
            let t = timestamps.get(p.step).copied().unwrap_or(p.step as f64);
            (t, p.pred, f64::from(p.truth))
        })
        .collect()
}

fn fit_chart(rows: &[(f64, f64, f64)]) -> LineChart {
    LineChart {
        title: "Predicted vs. true presence".into(),
        x_label: "time (s)".into(),
        y_label: "probability".into(),
        series: vec![
            Series {
                name: "predicted".into(),
                points: rows.iter().map(|r| (r.0, r.1)).collect(),
            },
            Series {
                name: "truth".into(),
                points: rows.iter().map(|r| (r.0, r.2)).collect(),
            },
        ],
    }
}

/// The single-variable variants around `base`. An even smoothing width is
/// not allowed, so `smooth10` runs with H = 11.
pub fn sweep_variants(base: &FusionConfig) -> Vec<(String, FusionConfig)> {
    let with = |f: &dyn Fn(&mut FusionConfig)| {
        let mut c = base.clone();
        f(&mut c);
        c
    };
    vec![
        ("layer3".into(), with(&|c| c.branch_lstm_layers = 3)),
        ("layer4".into(), with(&|c| c.branch_lstm_layers = 4)),
        ("layer5".into(), with(&|c| c.branch_lstm_layers = 5)),
        ("conv1".into(), with(&|c| c.conv_kernel = 1)),
        ("conv3".into(), with(&|c| c.conv_kernel = 3)),
        ("drop0_7".into(), with(&|c| c.keep_prob = 0.7)),
        ("drop0_8".into(), with(&|c| c.keep_prob = 0.8)),
        ("smooth5".into(), with(&|c| c.smooth_width = 5)),
        ("smooth10".into(), with(&|c| c.smooth_width = 11)),
    ]
}

fn sweep(cfg: &RunConfig, out: &mut ArtifactWriter, log: &mut dyn FnMut(&str)) -> Result<()> {
    let streams = load_streams(cfg)?;
    let mut all = Vec::new();
    for (name, variant) in sweep_variants(&cfg.fusion) {
        log(&format!("sweep: {name}"));
        let (train, test) = windows(&streams, &variant)?;
        let (_, history) = fit_fusion(&variant, &train, &test, log)?;
        out.write(
            &format!("sweep/{name}/history.csv"),
            report::format_history(&history.records).as_bytes(),
        )?;
        all.push((name, history.records));
    }
    out.write("comparison.csv", report::format_comparison(&all).as_bytes())?;
    if cfg.emit_plots {
        for (file, title, pick) in sweep_charts() {
            let chart = comparison_chart(
                title,
                &all.iter()
                    .map(|(n, r)| {
                        (
                            n.clone(),
                            r.iter().map(|r| (r.epoch as f64, r.train_loss, r.test_loss)).collect(),
                        )
                    })
                    .collect::<Vec<_>>(),
                pick,
            );
            out.write(file, chart.render().as_bytes())?;
        }
    }
    Ok(())
}

type Pick = fn(&(f64, f64, f64)) -> (f64, f64);

fn sweep_charts() -> [(&'static str, &'static str, Pick); 2] {
    [
        ("sweep_train.svg", "Train loss by variant", |r| (r.0, r.1)),
        ("sweep_test.svg", "Test loss by variant", |r| (r.0, r.2)),
    ]
}

fn comparison_chart(title: &str, variants: &[(String, Vec<(f64, f64, f64)>)], pick: Pick) -> LineChart {
    LineChart {
        title: title.into(),
        x_label: "epoch".into(),
        y_label: "loss".into(),
        series: variants
            .iter()
            .map(|(name, rows)| Series {
                name: name.clone(),
                points: rows.iter().map(pick).collect(),
            })
            .collect(),
    }
}

fn read_optional(path: &Path) -> Result<Option<String>> {
    if !path.exists() {
        return Ok(None);
    }
    let bytes = read_file(path)?;
    String::from_utf8(bytes)
        .map(Some)
        .map_err(|_| Error::parse(path, 1, "file is not UTF-8"))
}

/// Charts every history, prediction and comparison file in the input run
/// directory (default: the output directory).
fn report(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<()> {
    let dir: PathBuf = cfg.paths.input.clone().unwrap_or_else(|| cfg.paths.output.clone());
    let mut made = 0;
    let history = dir.join("history.csv");
    if let Some(text) = read_optional(&history)? {
        let rows = report::parse_history(&history, &text)?;
        let records: Vec<EpochRecord> = rows
            .iter()
            .map(|&(e, tr, te)| EpochRecord {
                epoch: e as usize,
                train_loss: tr,
                test_loss: te,
            })
            .collect();
        out.write(
            "loss.svg",
            loss_chart("Fusion training loss", &records).render().as_bytes(),
        )?;
        made += 1;
    }
    let predictions = dir.join("predictions.csv");
    if let Some(text) = read_optional(&predictions)? {
        let rows = report::parse_predictions(&predictions, &text)?;
        out.write("fit.svg", fit_chart(&rows).render().as_bytes())?;
        made += 1;
    }
    let comparison = dir.join("comparison.csv");
    if let Some(text) = read_optional(&comparison)? {
        let variants = report::parse_comparison(&comparison, &text)?;
        for (file, title, pick) in sweep_charts() {
            out.write(file, comparison_chart(title, &variants, pick).render().as_bytes())?;
        }
        made += 1;
    }
    if made == 0 {
        return Err(Error::Config(format!(
            "{} holds no history.csv, predictions.csv or comparison.csv",
            dir.display()
        )));
    }
    Ok(())
}
