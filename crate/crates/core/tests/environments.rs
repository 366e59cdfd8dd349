//! Noise models, arm generation, event logs and the synthetic news stream.

use std::io::Write;

use driftls::env::{
    gen_arm_set, generate_news_stream, read_event_log, read_truth, synth_news_stream, write_event_log, ActionSet,
    Arm, ArmSetSpec, EventRecord, LinearEnv, NewsStreamConfig, NoiseModel,
};
use driftls::linalg::{dot, norm2};
use driftls::rng::rng_for;
use driftls::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: [NoiseModel; 3] = [
    NoiseModel::Uniform,
    NoiseModel::Rademacher,
    NoiseModel::TruncGauss { sigma: 0.5 },
];

#[test]
fn noise_is_bounded_and_centred() {
    let mut rng = rng_for(1, 1);
    for model in MODELS {
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| model.sample(&mut rng)).collect();
        assert!(draws.iter().all(|v| v.abs() <= 1.0));
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!(mean.abs() <= 5.0 * se, "{model:?}: mean {mean}, se {se}");
    }
}

#[test]
fn sample_reward_mean_matches_signal() {
    let theta = vec![0.3, -0.4];
    let env = LinearEnv::new(theta.clone(), NoiseModel::Uniform, ActionSet::UnitSphere).unwrap();
    let x = [0.6, 0.8];
    let mut rng = rng_for(2, 1);
    let n = 100_000;
    let ys: Vec<f64> = (0..n).map(|_| env.sample_reward(&x, &mut rng).unwrap()).collect();
    let signal = dot(&x, &theta);
    assert!(ys.iter().all(|y| (y - signal).abs() <= 1.0));
    let mean = ys.iter().sum::<f64>() / n as f64;
    let sd = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((mean - signal).abs() <= 4.0 * sd / (n as f64).sqrt());

    let quiet = LinearEnv::new(theta, NoiseModel::Zero, ActionSet::UnitSphere).unwrap();
    assert_eq!(quiet.sample_reward(&x, &mut rng).unwrap(), signal);
    assert!(matches!(quiet.sample_reward(&[0.5, 0.5], &mut rng), Err(Error::Contract(_))));
}

fn random_records(n: usize, seed: u64) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n as u64)
        .map(|t| {
            let spec = ArmSetSpec { d: 3, k: 1 + (t % 4) as usize, density: 0.7, fixed_pool: false };
            let arms = gen_arm_set(&spec, &mut rng);
            let chosen = (t % 3 != 0).then(|| arms[rng.random_range(0..arms.len())].id);
            let reward = (t % 5 != 0).then(|| rng.random_range(-1.0..1.0));
            EventRecord { t, arms, chosen, reward }
        })
        .collect()
}

#[test]
fn event_log_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    let recs = random_records(1000, 3);
    write_event_log(&path, &recs).unwrap();
    assert_eq!(read_event_log(&path).unwrap(), recs);

    let empty = dir.path().join("empty.jsonl");
    std::fs::File::create(&empty).unwrap();
    assert!(read_event_log(&empty).unwrap().is_empty());
}

/// Removes one required field from one line and expects an error naming that line.
#[test]
fn fuzzed_field_deletions_report_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let recs = random_records(40, 4);
    let lines: Vec<serde_json::Value> = recs.iter().map(|r| serde_json::to_value(r).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..200 {
        let target = rng.random_range(0..lines.len());
        let mut broken = lines.clone();
        let rec = broken[target].as_object_mut().unwrap();
        match rng.random_range(0..4) {
            0 => {
                rec.remove("t");
            }
            1 => {
                rec.remove("arms");
            }
            2 => {
                let arms = rec.get_mut("arms").unwrap().as_array_mut().unwrap();
                let k = rng.random_range(0..arms.len());
                arms[k].as_object_mut().unwrap().remove("id");
            }
            _ => {
                let arms = rec.get_mut("arms").unwrap().as_array_mut().unwrap();
                let k = rng.random_range(0..arms.len());
                arms[k].as_object_mut().unwrap().remove("x");
            }
        }
        let path = dir.path().join(format!("fuzz{case}.jsonl"));
        let mut f = std::fs::File::create(&path).unwrap();
        for v in &broken {
            writeln!(f, "{v}").unwrap();
        }
        drop(f);
        match read_event_log(&path) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, target + 1, "case {case}"),
            other => panic!("case {case}: expected schema error, got {other:?}"),
        }
    }
}

#[test]
fn writer_rejects_invalid_records() {
    let dir = tempfile::tempdir().unwrap();
    let bad = EventRecord { t: 0, arms: vec![Arm { id: 0, x: vec![2.0] }], chosen: None, reward: None };
    assert!(write_event_log(&dir.path().join("bad.jsonl"), &[bad]).is_err());
}

#[test]
fn news_stream_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = NewsStreamConfig { d: 8, k: 6, horizon: 300, density: 0.4, fixed_pool: false, theta_norm: 1.0 };
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let theta = synth_news_stream(&cfg, 42, &a).unwrap();
    synth_news_stream(&cfg, 42, &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_truth(&a).unwrap().theta_star, theta);
    let recs = read_event_log(&a).unwrap();
    assert_eq!(recs.len(), 300);
    for r in &recs {
        assert!(r.arms.iter().all(|arm| norm2(&arm.x) <= 1.0 + 1e-9));
        assert!(matches!(r.reward, Some(v) if v == 0.0 || v == 1.0));
    }
    let c = dir.path().join("c.jsonl");
    synth_news_stream(&cfg, 43, &c).unwrap();
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

/// Best fixed arm of a fixed pool vs the uniform logging policy, both
/// simulated against the click model.
#[test]
fn best_arm_beats_uniform_policy() {
    let cfg = NewsStreamConfig { d: 5, k: 8, horizon: 10_000, density: 1.0, fixed_pool: true, theta_norm: 1.0 };
    let (recs, theta) = generate_news_stream(&cfg, 7).unwrap();
    let pool = &recs[0].arms;
    let best = pool
        .iter()
        .max_by(|a, b| dot(&a.x, &theta).total_cmp(&dot(&b.x, &theta)))
        .unwrap();
    let model = driftls::env::NewsClickModel::new(theta.clone());
    let mut rng = rng_for(7, 99);
    let best_clicks: f64 = (0..cfg.horizon).map(|_| model.sample_click(&best.x, &mut rng)).sum();
    let logged_clicks: f64 = recs.iter().map(|r| r.reward.unwrap()).sum();
    assert!(best_clicks > logged_clicks, "best {best_clicks} vs uniform {logged_clicks}");
}
