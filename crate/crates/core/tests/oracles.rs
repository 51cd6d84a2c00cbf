//! Independent oracles: empirical distance distribution, the spherical
//! orbit Doppler, and Monte-Carlo convergence.

use std::f64::consts::PI;

use leo_doppler::coverage::coverage_exact_numeric;
use leo_doppler::doppler::{doppler_oracle_finite_difference, make_context};
use leo_doppler::geometry::{distance_cdf, sample_terminal, spherical_elevation};
use leo_doppler::montecarlo::{estimate_coverage, terminal_stream, McConfig, McMode};
use leo_doppler::scenario::{db_to_linear, BandLabel, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s_band() -> ScenarioConfig {
    ScenarioConfig::preset(BandLabel::S).unwrap()
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn empirical_cdf_at_rim() {
    // Offset = radius, x = radius: both lens half-angles are pi/3.
    let r = s_band().cell().cell_radius_m;
    let expected = 2.0 / 3.0 - 3f64.sqrt() / (2.0 * PI);
    assert!((distance_cdf(r, r, r) - expected).abs() < 1e-13);
    assert!((expected - 0.391_002_218_955_4).abs() < 1e-12);

    let n = 10_000_000u64;
    let mut rng = terminal_stream(2024, 0);
    let hits = (0..n)
        .filter(|_| sample_terminal(&mut rng, r, r).horizontal_distance_m <= r)
        .count() as f64;
    let p = hits / n as f64;
    let se = (expected * (1.0 - expected) / n as f64).sqrt();
    assert!((p - expected).abs() <= 3.0 * se, "{p} vs {expected} (se {se})");
}

#[test]
fn kolmogorov_smirnov_against_uniform_disc() {
    let r = s_band().cell().cell_radius_m;
    for (i, d) in [0.0, 0.5 * r, r, 2.0 * r].into_iter().enumerate() {
        let mut rng = terminal_stream(7 + i as u64, 0);
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| sample_terminal(&mut rng, r, d).horizontal_distance_m)
            .collect();
        let ks = ks_statistic(xs, |x| distance_cdf(x, r, d));
        assert!(ks < 0.005, "offset {d}: KS {ks}");
    }
}

#[test]
fn flat_earth_doppler_tracks_orbit_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for band in BandLabel::PRESETS {
        let sc = ScenarioConfig::preset(band).unwrap();
        let ctx = make_context(&sc);
        let h = sc.orbit().altitude_m;
        let r_e = sc.constants().earth_radius_m;
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        while checked < 1000 {
            let x_min = rng.random_range(0.0..600e3);
            let x_t = x_min + rng.random_range(1e3..1.5e6);
            if spherical_elevation(x_t, h, r_e) < 10f64.to_radians() {
                continue;
            }
            let model = ctx.magnitude_with_min(x_t, x_min);
            let oracle = doppler_oracle_finite_difference(x_t, x_min, h, &sc, 1e-3).unwrap();
            let err = (model - oracle).abs() / oracle;
            worst = worst.max(err);
            checked += 1;
        }
        assert!(worst < 0.05, "{band}: worst relative error {worst}");
    }
}

#[test]
fn doppler_zero_at_closest_approach() {
    for band in BandLabel::PRESETS {
        let sc = ScenarioConfig::preset(band).unwrap();
        let ctx = make_context(&sc);
        for x_min in [0.0, 1.0, 52_493.198_115_554_4, 3e5, 1e6] {
            assert_eq!(ctx.magnitude_with_min(x_min, x_min), 0.0);
        }
        let at = doppler_oracle_finite_difference(1e5, 1e5, sc.orbit().altitude_m, &sc, 1e-3).unwrap();
        assert!(at.abs() < 1.0, "{band}: {at}");
    }
}

#[test]
fn doppler_grid_monotone() {
    let ctx = make_context(&s_band());
    let x0 = ctx.min_center_orbit_distance_m;
    let mut prev = 0.0;
    for i in 0..1000 {
        let v = ctx.magnitude(x0 + i as f64 * 2e3);
        assert!(v >= prev);
        prev = v;
    }
}

#[test]
fn monte_carlo_error_decays_as_inverse_root() {
    let sc = s_band().with_inputs(|i| i.cell.center_offset_km = 100.0).unwrap();
    let tau = db_to_linear(2.0);
    let truth = coverage_exact_numeric(tau, &sc, &make_context(&sc));
    assert!(truth > 0.2 && truth < 0.8);

    let sizes: Vec<u64> = (0..8).map(|k| 1000 << k).collect();
    let seeds = 48u64;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &n in &sizes {
        let mse = (0..seeds)
            .map(|s| {
                let p = estimate_coverage(tau, &sc, &McConfig::new(n, 1000 + s, McMode::Residual))
                    .unwrap()
                    .probability;
                (p - truth).powi(2)
            })
            .sum::<f64>()
            / seeds as f64;
        xs.push((n as f64).ln());
        ys.push(0.5 * mse.ln());
    }
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}
