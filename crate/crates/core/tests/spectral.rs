//! Frequency-domain and Monte-Carlo oracles, with rustfft as the reference.

use lifefuse_core::dsp::{cross_correlate, make_windows};
use lifefuse_core::fusion::roc_auc;
use lifefuse_core::neural::{dropout, DropoutMode, Tensor};
use lifefuse_core::rng::derived_rng;
use lifefuse_core::sim::{
    generate_pulse, simulate_acoustic, simulate_echo_matrix, simulate_probability_streams, AcousticParams, PulseKind,
    ScenarioConfig, UwbChannelModel, VitalPath,
};
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

fn spectrum(x: &[f64], len: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

/// Index of the largest magnitude among the positive-frequency bins.
fn peak_bin(mag: &[f64]) -> usize {
    (1..mag.len() / 2).max_by(|&a, &b| mag[a].total_cmp(&mag[b])).unwrap()
}

#[test]
fn monocycle_spectrum_peaks_at_center_frequency() {
    let dt = 50e-12;
    let pulse = generate_pulse(PulseKind::GaussianMonocycle, 1e9, dt, 64).unwrap();
    let f = |len: usize| peak_bin(&spectrum(&pulse.samples, len)) as f64 / (len as f64 * dt);
    let coarse = f(64);
    assert!((coarse - 1e9).abs() <= 0.2e9, "64-point peak at {coarse} Hz");
    // Zero padding resolves the peak far more finely.
    let fine = f(8192);
    assert!((fine - 1e9).abs() <= 0.02e9, "padded peak at {fine} Hz");
}

#[test]
fn slow_time_spectrum_peaks_at_breathing_rate() {
    let (prf, rows, fb) = (20.0, 512, 0.3);
    let pulse = generate_pulse(PulseKind::GaussianMonocycle, 1e9, 50e-12, 32).unwrap();
    let channel = UwbChannelModel {
        vital: VitalPath {
            amplitude: 1.0,
            base_delay: 1.0e-9,
            motion_amplitude: 5e-12,
            breath_freq: fb,
            heartbeat: None,
        },
        clutter: vec![],
        noise_std: 0.0,
    };
    let echo = simulate_echo_matrix(&channel, &pulse, rows, 64, 1.0 / prf, 0).unwrap();
    let variance = |c: &[f64]| {
        let m = c.iter().sum::<f64>() / c.len() as f64;
        c.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
    };
    let bin = (0..echo.cols())
        .max_by(|&a, &b| variance(&echo.column(a)).total_cmp(&variance(&echo.column(b))))
        .unwrap();
    let mut col = echo.column(bin);
    let mean = col.iter().sum::<f64>() / rows as f64;
    col.iter_mut().for_each(|v| *v -= mean);
    let k = peak_bin(&spectrum(&col, rows));
    let expected = fb * rows as f64 / prf;
    assert!((k as f64 - expected).abs() <= 1.0, "peak bin {k}, expected {expected}");
}

#[test]
fn correlation_matches_fft_on_real_inputs() {
    let mut rng = derived_rng(3, 0);
    for _ in 0..50 {
        let nx: usize = rng.random_range(1..80);
        let ny: usize = rng.random_range(1..80);
        let x: Vec<f64> = (0..nx).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..ny).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = cross_correlate(&x, &y).unwrap();

        // r(m) = Σ x(n) y(n+m) is the linear convolution of reversed x with y.
        let len = (nx + ny - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        let pad = |v: &mut Vec<Complex<f64>>| v.resize(len, Complex::new(0.0, 0.0));
        let mut a: Vec<Complex<f64>> = x.iter().rev().map(|&v| Complex::new(v, 0.0)).collect();
        let mut b: Vec<Complex<f64>> = y.iter().map(|&v| Complex::new(v, 0.0)).collect();
        pad(&mut a);
        pad(&mut b);
        fwd.process(&mut a);
        fwd.process(&mut b);
        let mut c: Vec<Complex<f64>> = a.iter().zip(&b).map(|(p, q)| p * q).collect();
        inv.process(&mut c);
        // Output index j corresponds to lag j - (nx - 1).
        for (j, v) in c.iter().take(nx + ny - 1).enumerate() {
            let lag = j as i64 - (nx as i64 - 1);
            let got = r.at(lag).unwrap();
            assert!(
                (got - v.re / len as f64).abs() < 1e-9,
                "lag {lag}: {got} vs {}",
                v.re / len as f64
            );
        }
    }
}

#[test]
fn uninformative_sensors_have_chance_auc() {
    let mut cfg = ScenarioConfig::default();
    cfg.duration = 12_000.0;
    for s in &mut cfg.sensors {
        s.mean_prob_present = 0.5;
        s.mean_prob_absent = 0.5;
    }
    let streams = simulate_probability_streams(&cfg).unwrap();
    for s in streams.sensors() {
        let auc = roc_auc(&s.probs, &s.labels).unwrap();
        assert!((auc - 0.5).abs() <= 0.05, "AUC {auc}");
    }
}

#[test]
fn random_scores_have_chance_auc() {
    let mut rng = derived_rng(5, 0);
    let labels: Vec<u8> = (0..10_000).map(|i| (i % 2) as u8).collect();
    let scores: Vec<f64> = labels.iter().map(|_| rng.random()).collect();
    let auc = roc_auc(&scores, &labels).unwrap();
    assert!((auc - 0.5).abs() <= 0.03, "AUC {auc}");
}

#[test]
fn dropout_keeps_the_requested_fraction() {
    let x = Tensor::from_slice(&vec![1.0; 1_000_000]);
    let y = dropout(&x, 0.8, DropoutMode::Train, 17).unwrap();
    let kept = y.values().iter().filter(|&&v| v != 0.0).count() as f64 / 1e6;
    assert!((kept - 0.8).abs() <= 0.01, "kept {kept}");
    // Inverted dropout preserves the mean.
    let mean = y.values().iter().sum::<f64>() / 1e6;
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
}

#[test]
fn tap_train_repeats_at_the_tap_period() {
    let p = AcousticParams {
        noise_std: 0.0,
        breath_amplitude: 0.0,
        ..AcousticParams::default()
    };
    let x = simulate_acoustic(&[1; 8], &p, 0).unwrap();
    let lag = (p.sample_rate / p.tap_rate) as usize;
    let r0: f64 = x.iter().map(|v| v * v).sum();
    let r1: f64 = x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum();
    // The lagged sum covers one tap period fewer than the zero-lag sum.
    let periods = x.len() as f64 / lag as f64;
    let ratio = r1 / r0 * periods / (periods - 1.0);
    assert!((ratio - 1.0).abs() <= 0.05, "ratio {ratio}");
}

#[test]
fn heavy_noise_dominates_the_signal() {
    let p = AcousticParams {
        noise_std: 10.0,
        ..AcousticParams::default()
    };
    let presence: Vec<u8> = (0..40).map(|i| ((i / 5) % 2) as u8).collect();
    let x = simulate_acoustic(&presence, &p, 4).unwrap();
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / x.len() as f64;
    let dt = 1.0 / p.sample_rate;
    let per_step = (p.sample_rate * p.step_seconds) as usize;
    let clean: Vec<f64> = (0..x.len())
        .map(|i| {
            if presence[i / per_step] == 1 {
                p.clean_value(i as f64 * dt)
            } else {
                0.0
            }
        })
        .collect();
    let cm = clean.iter().sum::<f64>() / clean.len() as f64;
    let cvar = clean.iter().map(|v| (v - cm) * (v - cm)).sum::<f64>() / clean.len() as f64;
    assert!(var >= 100.0 * cvar, "{var} vs {cvar}");
}

#[test]
fn window_count_follows_the_stream_length() {
    let streams = simulate_probability_streams(&ScenarioConfig::default()).unwrap();
    for g in [8, 64, 128] {
        assert_eq!(make_windows(&streams, g, 5).unwrap().len(), 1000 - g);
    }
}
