use proptest::prelude::*;

use kernel_greeks::harness::rng::{chunk_rng, uniform, Purpose};
use kernel_greeks::{Randomizer, Randomizer64};

/// Largest gap between the empirical CDF of `draws` and `cdf`.
fn ks_statistic(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sampler_matches_its_distribution() {
    // asymptotic Kolmogorov quantile at the 0.1% level
    const K_999: f64 = 1.949;
    let n = 50_000;
    let cases: [(f64, f64); 5] = [(0.0, 4.0), (0.05, 9.7), (-0.3, 2.0), (1e-9, 1.0), (2.0, 3.0)];
    for (k, (theta, eps)) in cases.into_iter().enumerate() {
        let r: Randomizer64 = Randomizer::truncated_exponential(theta, eps).unwrap();
        let mut rng = chunk_rng(11, Purpose::Main, k, 0);
        let draws: Vec<f64> = (0..n).map(|_| r.sample_offset(uniform(&mut rng), 100.0).offset).collect();
        assert!(draws.iter().all(|l| l.abs() <= eps));
        let d = ks_statistic(draws.clone(), |l| r.cdf(l));
        assert!(d * (n as f64).sqrt() < K_999, "theta={theta} eps={eps} D={d}");
        let mean = draws.iter().sum::<f64>() / n as f64;
        if theta == 0.0 {
            assert!(mean.abs() < 4.0 * eps / (3.0 * n as f64).sqrt());
        } else {
            assert_eq!(mean.signum(), theta.signum());
        }
    }
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 4000;
    let dx = (b - a) / m as f64;
    // composite Simpson
    (0..=m)
        .map(|i| {
            let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * f((a + i as f64 * dx).min(b))
        })
        .sum::<f64>()
        * dx
        / 3.0
}

proptest! {
    #[test]
    fn density_is_normalized(theta in -3.0f64..3.0, eps in 0.05f64..5.0) {
        let r = Randomizer::truncated_exponential(theta, eps).unwrap();
        let mass = integrate(|l| r.density_at(l), -eps, eps);
        prop_assert!((mass - 1.0).abs() < 1e-8, "mass {mass}");
        prop_assert_eq!(r.density_at(eps * 1.0001), 0.0);
        prop_assert!((r.cdf(eps) - 1.0).abs() < 1e-12 && r.cdf(-eps).abs() < 1e-12);
    }

    #[test]
    fn antithetic_draw_mirrors_offset(u in 0.0f64..1.0, eps in 0.1f64..10.0) {
        let r = Randomizer::uniform(eps).unwrap();
        let s = r.sample_offset(u, 100.0);
        let a = s.antithetic(100.0);
        prop_assert!((a.offset + s.offset).abs() < 1e-12);
        prop_assert!((a.lambda + s.lambda - 200.0).abs() < 1e-10);
    }
}
