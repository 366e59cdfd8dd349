//! PEGE and LinUCB policies against brute-force and exact-solver oracles.

use driftls::bandits::{
    best_action, pege_run, replay_linucb, run_linucb_sim, LinUcbConfig, LinUcbSim, PegeConfig, Variant,
};
use driftls::bounds::{expectation_bound, BoundParams};
use driftls::env::{generate_news_stream, random_unit_vector, ActionSet, LinearEnv, NewsStreamConfig, NoiseModel};
use driftls::linalg::{dist, dot, Matrix};
use driftls::metrics::{ctr_score, cumulative_regret};
use driftls::rng::rng_for;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ellipsoid_best_action_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = 3;
    for _ in 0..3 {
        // Q = I + G G' keeps lambda_min(Q) >= 1.
        let g = Matrix::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let mut q = Matrix::identity(d);
        for i in 0..d {
            let col: Vec<f64> = (0..d).map(|r| g[(r, i)]).collect();
            q.add_outer(&col, 1.0);
        }
        let set = ActionSet::ellipsoid(q.clone()).unwrap();
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let best = best_action(&theta, &set).unwrap();
        assert!(set.admits(&best.x));
        let ours = dot(&theta, &best.x);
        let mut brute = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            let u = random_unit_vector(d, &mut rng);
            let s = q.quad_form(&u).sqrt();
            brute = brute.max(dot(&theta, &u) / s);
        }
        assert!(ours >= brute - 1e-12, "sampled point beats the closed form");
        assert!(ours - brute <= 1e-3, "gap {}", ours - brute);
    }
}

#[test]
fn pege_phase_accounting() {
    let env = LinearEnv::new(vec![0.0, 0.6, 0.8], NoiseModel::Uniform, ActionSet::UnitSphere).unwrap();
    for m in 1..=6u64 {
        let d = 3;
        let horizon = m * d + m * (m + 1) / 2;
        let run = pege_run(&PegeConfig::standard(3, horizon, true), &env, m).unwrap();
        assert_eq!(run.ledger.len() as u64, horizon);
        assert_eq!(run.phases.len() as u64, m);
        let explore = run.ledger.entries().iter().filter(|e| e.arm_id.is_some()).count() as u64;
        assert_eq!(explore, m * d);
        assert_eq!(run.phases.last().unwrap().n, m * d);
    }
}

#[test]
fn regret_ledger_matches_replayed_trace() {
    let theta = vec![0.8, -0.6];
    let env = LinearEnv::new(theta.clone(), NoiseModel::Uniform, ActionSet::UnitSphere).unwrap();
    let run = pege_run(&PegeConfig::standard(2, 3000, true), &env, 9).unwrap();
    let actions: Vec<&[f64]> = run.ledger.entries().iter().map(|e| e.action.as_slice()).collect();
    let replayed = cumulative_regret(actions, &theta, env.best_value()).unwrap();
    for (e, r) in run.ledger.entries().iter().zip(&replayed) {
        assert!((e.cum_regret - r).abs() <= 1e-12);
        assert!(e.inst_regret >= -1e-12);
    }
}

#[test]
fn fpege_tracker_error_under_expectation_bound_at_phase_ends() {
    let d = 2;
    let seeds = 100;
    let horizon = 20_000;
    let mut sums: Vec<f64> = Vec::new();
    let mut ns: Vec<u64> = Vec::new();
    let mut c = 0.0;
    for seed in 0..seeds {
        let theta = random_unit_vector(d, &mut rng_for(seed, 4));
        let env = LinearEnv::new(theta, NoiseModel::Uniform, ActionSet::UnitSphere).unwrap();
        let mut cfg = PegeConfig::standard(d, horizon, true);
        cfg.track_exact = true;
        let run = pege_run(&cfg, &env, seed).unwrap();
        c = run.c;
        if sums.is_empty() {
            sums = vec![0.0; run.phases.len()];
            ns = run.phases.iter().map(|p| p.n).collect();
        }
        for (s, p) in sums.iter_mut().zip(&run.phases) {
            *s += dist(&p.theta, p.theta_hat.as_ref().unwrap());
        }
    }
    let params = BoundParams {
        mu: 1.0 / (2.0 * d as f64),
        c,
        d,
        n0: d as u64,
        delta: 0.1,
        theta_init_dist: 1.0,
    };
    for (s, n) in sums.iter().zip(&ns) {
        if *n > params.n0 {
            let bound = expectation_bound(*n, &params).unwrap();
            assert!(s / seeds as f64 <= bound, "n = {n}: mean {} > {bound}", s / seeds as f64);
        }
    }
}

#[test]
fn exact_linucb_regret_is_sublinear() {
    let sim = LinUcbSim {
        d: 10,
        k: 5,
        horizon: 20_000,
        density: 1.0,
        fixed_pool: false,
        noise: NoiseModel::Uniform,
        theta_norm: 1.0,
    };
    let cfg = LinUcbConfig::standard(Variant::Exact, 0.5, 5);
    let (mut half, mut full) = (0.0, 0.0);
    for seed in 0..20 {
        let run = run_linucb_sim(&cfg, &sim, seed).unwrap();
        let e = run.ledger.entries();
        half += e[9_999].cum_regret;
        full += e[19_999].cum_regret;
    }
    assert!(full / half <= 1.8, "regret ratio {}", full / half);
}

#[test]
fn flinucb_gd_paper_parameters_stay_finite() {
    let sim = LinUcbSim {
        d: 20,
        k: 10,
        horizon: 5_000,
        density: 0.3,
        fixed_pool: false,
        noise: NoiseModel::Uniform,
        theta_norm: 1.0,
    };
    for variant in [Variant::Gd, Variant::Svrg, Variant::Sag] {
        let cfg = LinUcbConfig::standard(variant, 1.0, 10);
        let run = run_linucb_sim(&cfg, &sim, 3).unwrap();
        assert!(run.max_abs_theta.is_finite());
        assert_eq!(run.ledger.len(), 5_000);
    }
}

#[test]
fn replay_counts_only_matched_rounds() {
    let news = NewsStreamConfig { d: 6, k: 4, horizon: 4_000, density: 1.0, fixed_pool: true, theta_norm: 1.0 };
    let (recs, _) = generate_news_stream(&news, 5).unwrap();
    let cfg = LinUcbConfig::standard(Variant::Gd, 0.3, 4);
    let out = replay_linucb(&cfg, 6, recs.iter().cloned().map(Ok), 5).unwrap();
    assert_eq!(out.records, 4_000);
    assert!(out.matched > 500 && out.matched < 2_000, "matched {}", out.matched);
    assert!(out.clicks <= out.matched as f64);
    let by_hand = out.clicks / out.matched as f64 * 1e4;
    assert!((out.ctr.unwrap() - by_hand).abs() < 1e-9);
    let rewards = vec![1.0; 5].into_iter().chain(vec![0.0; 95]).collect::<Vec<_>>();
    assert_eq!(ctr_score(&rewards).unwrap(), 500.0);
}
