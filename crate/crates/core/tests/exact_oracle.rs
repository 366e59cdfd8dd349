//! Incremental OLS/RLS against direct normal-equation solves.

use driftls::env::random_unit_vector;
use driftls::exact::{OlsState, RlsState};
use driftls::linalg::{dist, dot, norm2, Matrix};
use driftls::schedule::RegSchedule;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn normal_equations(xs: &[Vec<f64>], ys: &[f64], shift: f64) -> (DMatrix<f64>, DVector<f64>) {
    let d = xs[0].len();
    let mut a = DMatrix::<f64>::identity(d, d) * shift;
    let mut b = DVector::<f64>::zeros(d);
    for (x, y) in xs.iter().zip(ys) {
        let v = DVector::from_column_slice(x);
        a += &v * v.transpose();
        b += v * *y;
    }
    (a, b)
}

fn direct(xs: &[Vec<f64>], ys: &[f64], shift: f64) -> Vec<f64> {
    let (a, b) = normal_equations(xs, ys, shift);
    a.lu().solve(&b).expect("invertible").as_slice().to_vec()
}

#[test]
fn ols_matches_direct_solve_on_random_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for s in 0..40 {
        let d = 1 + s % 12;
        let n = 50 + 20 * s;
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut ols = OlsState::new(d).with_refactor_every(97);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let x = random_unit_vector(d, &mut rng);
            let y = dot(&x, &theta) + rng.random_range(-1.0..1.0);
            ols.append_xy(&x, y).unwrap();
            xs.push(x);
            ys.push(y);
        }
        let want = direct(&xs, &ys, 0.0);
        let got = ols.solution().unwrap();
        let rel = dist(&got, &want) / norm2(&want).max(1e-300);
        assert!(rel <= 1e-8, "stream {s}: relative error {rel:e}");
        if let Some(drift) = ols.last_refactor_drift() {
            assert!(drift <= 1e-9, "refactor drift {drift:e}");
        }
    }
}

#[test]
fn rls_matches_direct_solve_and_confidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for reg in [RegSchedule::InverseN, RegSchedule::Power { alpha: 0.6 }, RegSchedule::Constant(0.3)] {
        let d = 6;
        let mut rls = RlsState::new(d, reg);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for n in 1..=300 {
            let x = random_unit_vector(d, &mut rng);
            let y = rng.random_range(-1.0..1.0);
            rls.append_xy(&x, y).unwrap();
            xs.push(x);
            ys.push(y);
            if n % 37 == 0 || n < 4 {
                let shift = n as f64 * reg.lambda(n);
                let want = direct(&xs, &ys, shift);
                assert!(dist(&rls.solution().unwrap(), &want) <= 1e-8 * (1.0 + norm2(&want)));
                let (a, _) = normal_equations(&xs, &ys, shift);
                let q = random_unit_vector(d, &mut rng);
                let qv = DVector::from_column_slice(&q);
                let conf = (qv.transpose() * a.try_inverse().unwrap() * &qv)[(0, 0)];
                let ours = rls.exact_confidence(&q).unwrap();
                assert!((ours - conf).abs() <= 1e-9 * conf.abs().max(1.0));
            }
        }
    }
}

#[test]
fn refuses_before_rank_and_ridge_fallback() {
    let mut ols = OlsState::new(3);
    ols.append_xy(&[1.0, 0.0, 0.0], 2.0).unwrap();
    ols.append_xy(&[2.0, 0.0, 0.0], 4.0).unwrap();
    assert!(ols.solution().is_err());
    let r = ols.ridge_solution().unwrap();
    assert!((r[0] - 2.0).abs() < 1e-6 && r[1] == 0.0);
    ols.append_xy(&[0.0, 1.0, 0.0], 1.0).unwrap();
    assert!(ols.solution().is_err());
    ols.append_xy(&[0.0, 1.0, 1.0], 1.0).unwrap();
    assert!(ols.is_ready());
}

#[test]
fn zero_noise_identifies_theta_star() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for d in [1usize, 4, 16] {
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut ols = OlsState::new(d);
        for _ in 0..(d + 5) {
            let x = random_unit_vector(d, &mut rng);
            ols.append_xy(&x, dot(&x, &theta)).unwrap();
        }
        assert!(dist(&ols.solution().unwrap(), &theta) <= 1e-9);
    }
}

#[test]
fn snapshot_round_trips_through_json() {
    let mut ols = OlsState::new(2);
    ols.append_xy(&[1.0, 0.0], 1.0).unwrap();
    ols.append_xy(&[0.0, 1.0], -1.0).unwrap();
    let json = ols.snapshot().to_json().unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["n"], 2);
    assert_eq!(v["b_sum"][1], -1.0);
    let a = Matrix::from_rows(&serde_json::from_value::<Vec<Vec<f64>>>(v["a_sum"].clone()).unwrap()).unwrap();
    assert_eq!(a, Matrix::identity(2));
}
