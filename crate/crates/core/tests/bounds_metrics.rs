use driftls::bounds::{beta_of, k1_of, k2_of, BoundParams};
use driftls::metrics::slope_fit;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> impl Strategy<Value = BoundParams> {
    (0.01f64..2.0, 0.67f64..0.99, 1usize..50, 1u64..100, 0.001f64..0.999, 0.0f64..10.0).prop_map(
        |(mu, r, d, n0, delta, dist)| BoundParams {
            mu,
            c: 4.0 * r / mu,
            d,
            n0,
            delta,
            theta_init_dist: dist,
        },
    )
}

proptest! {
    #[test]
    fn constants_are_finite_positive_and_ordered(p in params(), extra in 1u64..1_000_000) {
        let n = p.n0 + extra;
        let k1 = k1_of(n, &p).unwrap();
        let k2 = k2_of(n, &p).unwrap();
        prop_assert!(k1.is_finite() && k1 > 0.0);
        prop_assert!(k2.is_finite() && k2 >= k1);
        prop_assert!(beta_of(n as f64 + 1.0, &p) > 0.0);
    }

    #[test]
    fn slope_is_scale_invariant(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let series: Vec<(f64, f64)> = (1..20)
            .map(|k| (k as f64 * 10.0, rng.random_range(0.1..10.0)))
            .collect();
        let scaled: Vec<(f64, f64)> = series.iter().map(|(n, v)| (*n, v * scale)).collect();
        prop_assert!((slope_fit(&series).unwrap() - slope_fit(&scaled).unwrap()).abs() < 1e-9);
    }
}

/// Noisy power law against the closed-form simple-regression slope.
#[test]
fn slope_matches_regression_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let series: Vec<(f64, f64)> = (0..30)
        .map(|k| {
            let n = 10f64.powf(1.0 + k as f64 / 10.0);
            (n, 5.0 * n.powf(-0.5) * (rng.random_range(-0.2f64..0.2)).exp())
        })
        .collect();
    let xs: Vec<f64> = series.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.ln()).collect();
    let m = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let oracle = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    assert!((slope_fit(&series).unwrap() - oracle).abs() < 1e-10);
    assert!((oracle + 0.5).abs() < 0.1);
}
