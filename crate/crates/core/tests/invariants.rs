use std::f64::consts::PI;

use brownlab::asymptotics::{self, LadderCheck, LADDER};
use brownlab::biane::{h_map, BianeData};
use brownlab::elliptic::{build_field, BrownDensityField, EllipticParams};
use brownlab::measure::Law;
use brownlab::rmt::{compare_degenerate, compare_esd, sample_ensemble, EnsembleSpec};
use brownlab::pushforward::{q_map, u_inverse, u_map, verify_q_pushforward, verify_u_pushforward};
use brownlab::stats;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn dirac() -> Law {
    Law::dirac(0.0).unwrap()
}

fn bern() -> Law {
    Law::atomic(&[(-1.0, 0.5), (1.0, 0.5)]).unwrap()
}

fn three_atoms() -> Law {
    Law::atomic(&[(-1.5, 0.2), (0.25, 0.5), (2.0, 0.3)]).unwrap()
}

fn params(s: f64, t: f64) -> EllipticParams {
    EllipticParams::new(s, t).unwrap()
}

/// `(1/2πt)(1 + t·dI/da)` with `I(a) = ∫ (α(a)−x)/((α(a)−x)² + v²) dν`,
/// differentiated by centred differences.
fn fiber_integral_density(field: &BrownDensityField, a: f64, h: f64) -> f64 {
    let law = field.law();
    let shift = |a: f64| {
        let al = field.alpha_of_a(a).unwrap();
        let v = field.biane().v(al).unwrap();
        law.nodes()
            .iter()
            .zip(law.weights())
            .map(|(x, w)| w * (al - x) / ((al - x) * (al - x) + v * v))
            .sum::<f64>()
    };
    let t = field.params().t();
    let d = (shift(a + h) - shift(a - h)) / (2.0 * h);
    (1.0 + t * d) / (2.0 * PI * t)
}

#[test]
fn ratio_density_matches_fiber_integral() {
    for (law, s, t) in [(bern(), 2.0, 1.0), (three_atoms(), 1.5, 0.7), (bern(), 0.8, 1.2)] {
        let field = build_field(&law, params(s, t), 1024).unwrap();
        let (lo, hi) = field.omega();
        let mut worst: f64 = 0.0;
        for (k, w) in field.w_values().iter().enumerate() {
            let Some(w) = w else { continue };
            let a = field.a_grid()[k];
            let h = 1e-5_f64.min(0.25 * (a - lo).min(hi - a));
            if field.v_values()[k] < 1e-3 {
                // the derivative of I(a) is singular where v vanishes
                continue;
            }
            worst = worst.max((w - fiber_integral_density(&field, a, h)).abs());
        }
        assert!(worst < 1e-5, "{} s={s} t={t}: {worst}", law.describe());
    }
}

#[test]
fn boundary_is_scaled_v_and_alpha_increases() {
    for (law, s, t) in [(bern(), 2.0, 1.0), (three_atoms(), 0.4, 0.6)] {
        let p = params(s, t);
        let field = build_field(&law, p, 512).unwrap();
        assert!(field.alpha_grid().windows(2).all(|w| w[1] > w[0]));
        assert!(field.a_grid().windows(2).all(|w| w[1] > w[0]));
        assert!(field.w_values().iter().flatten().all(|w| *w >= 0.0));
        for k in 0..field.a_grid().len() {
            let alpha = field.alpha_grid()[k];
            let v = field.biane().v(alpha).unwrap();
            assert!((field.b_values()[k] - p.r() * v).abs() < 1e-14);
        }
    }
}

#[test]
fn point_mass_boundary_is_the_ellipse() {
    for (s, t) in [(1.0, 0.3), (2.0, 1.0), (3.0, 5.5)] {
        let field = build_field(&dirac(), params(s, t), 256).unwrap();
        let (ax, by) = ((2.0 * s - t) / s.sqrt(), t / s.sqrt());
        for (&a, &b) in field.a_grid().iter().zip(field.b_values()) {
            let exact = by * (1.0 - (a / ax).powi(2)).max(0.0).sqrt();
            assert!((b - exact).abs() < 1e-8);
        }
        let flat = s / (PI * t * (2.0 * s - t));
        assert!(field.w_values().iter().flatten().all(|w| (w - flat).abs() < 1e-8));
    }
}

#[test]
fn u_map_round_trips_on_the_closed_domain() {
    let mut rng = ChaCha20Rng::seed_from_u64(41);
    for (law, s, t) in [(bern(), 2.0, 1.0), (three_atoms(), 1.0, 1.7), (dirac(), 1.0, 0.5)] {
        let p = params(s, t);
        let field = build_field(&law, p, 512).unwrap();
        let (lo, hi) = field.omega();
        for _ in 0..1000 {
            let a = rng.random_range(lo..=hi);
            let b = field.boundary(a).unwrap() * rng.random_range(-1.0..=1.0);
            let w = Complex64::new(a, b);
            let back = u_map(field.biane(), &p, u_inverse(field.biane(), &p, w).unwrap()).unwrap();
            assert!((back - w).norm() < 1e-9, "{w} -> {back}");
        }
    }
}

#[test]
fn u_map_agrees_with_h_on_the_boundary() {
    for (law, s, t) in [(bern(), 2.0, 1.0), (three_atoms(), 1.0, 1.7)] {
        let p = params(s, t);
        let biane = BianeData::new(law.clone(), s).unwrap();
        let l = biane.lambda().clone();
        for k in 1..200 {
            let alpha = l.lo + (l.hi - l.lo) * k as f64 / 200.0;
            let v = biane.v(alpha).unwrap();
            if v <= 0.0 {
                continue;
            }
            let z = Complex64::new(alpha, v);
            let h = h_map(&law, s - t, z).unwrap();
            assert!((u_map(&biane, &p, z).unwrap() - h).norm() < 1e-9);
        }
    }
}

#[test]
fn q_map_is_constant_on_fibers_and_increasing() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for (law, s, t) in [(bern(), 2.0, 1.0), (bern(), 1.0, 1.0), (three_atoms(), 1.0, 1.7)] {
        let field = build_field(&law, params(s, t), 512).unwrap();
        let (lo, hi) = field.omega();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..50 {
            let a = lo + (hi - lo) * (k as f64 + 0.5) / 50.0;
            let top = field.boundary(a).unwrap();
            let values: Vec<f64> = (0..5)
                .map(|_| q_map(&field, Complex64::new(a, top * rng.random_range(-1.0..=1.0))).unwrap())
                .collect();
            let spread = values.iter().fold(0.0_f64, |m, v| m.max((v - values[0]).abs()));
            assert!(spread <= 1e-12);
            assert!(values[0] > prev);
            prev = values[0];
        }
    }
}

#[test]
fn pushforward_distances_shrink_with_sample_size() {
    let p = params(2.0, 1.0);
    for verify in [verify_u_pushforward, verify_q_pushforward] {
        let ks: Vec<(usize, f64)> = [1_000, 10_000, 100_000]
            .iter()
            .map(|&n| (n, verify(&bern(), p, n, 99).unwrap().ks_real))
            .collect();
        for pair in ks.windows(2) {
            let (n, d) = pair[1];
            assert!(d <= pair[0].1 + 3.0 / (n as f64).sqrt(), "{ks:?}");
        }
        // a correct reference keeps the distance at the sampling scale
        for (n, d) in &ks {
            assert!(*d < 3.0 / (*n as f64).sqrt(), "{ks:?}");
        }
    }
}

#[test]
fn pushforward_examples_at_full_size() {
    let n = 100_000;
    let u = verify_u_pushforward(&dirac(), params(1.0, 1.0), n, 1).unwrap();
    assert!(u.ks_real <= 0.01, "{u:?}");
    let q = verify_q_pushforward(&dirac(), params(1.0, 1.0), n, 1).unwrap();
    assert!(q.ks_real <= 0.01, "{q:?}");
    let q = verify_q_pushforward(&dirac(), params(1.0, 2.0), n, 1).unwrap();
    assert!(q.ks_real <= 0.01 && q.reference == "semicircle", "{q:?}");
}

#[test]
fn ellipse_deviation_decays_along_the_ladder() {
    let lad = asymptotics::run_ladder(
        &bern(),
        LadderCheck::EllipseBoundary {
            ratio: 0.5,
            phi0: PI / 6.0,
        },
        &LADDER,
    )
    .unwrap();
    let slope = lad.loglog_slope.unwrap();
    assert!(slope <= -0.4, "slope {slope}");
    assert!(lad.passes_at_top());
}

#[test]
fn every_standard_check_holds_at_the_top_of_the_ladder() {
    for check in asymptotics::standard_checks() {
        let lad = asymptotics::run_ladder(&bern(), check, &LADDER).unwrap();
        assert!(lad.passes_at_top(), "{lad:?}");
        assert!(lad.onset.is_some());
    }
}

#[test]
fn unimodality_below_threshold_is_only_recorded() {
    let below = asymptotics::check_unimodal(&bern(), 0.1).unwrap();
    // two separated bumps at this scale
    assert!(!below);
    let recs = asymptotics::unimodal_ladder(&three_atoms(), &[0.1, 100.0]).unwrap();
    assert!(recs[1].unimodal && recs[1].s >= recs[1].threshold);
}

#[test]
fn field_marginal_of_the_disk_is_a_semicircle() {
    let field = build_field(&Law::dirac(0.5).unwrap(), params(1.0, 1.0), 2048).unwrap();
    let cdf = field.marginal_cdf();
    for k in 0..=20 {
        let x = -0.6 + 2.2 * k as f64 / 20.0;
        assert!((cdf.eval(x) - stats::semiellipse_cdf(0.5, 1.0, x)).abs() < 1e-5);
    }
}

fn ensemble(law: Law, s: f64, t: f64, n: usize, trials: usize, allow: bool) -> EnsembleSpec {
    EnsembleSpec {
        n,
        trials,
        law,
        params: params(s, t),
        seed: 7,
        allow_degenerate: allow,
    }
}

#[test]
fn outside_fraction_falls_as_the_matrices_grow() {
    let field = build_field(&bern(), params(2.0, 1.0), 1024).unwrap();
    let fractions: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let sample = sample_ensemble(&ensemble(bern(), 2.0, 1.0, n, 4, false)).unwrap();
            compare_esd(&sample, &field).unwrap().outside_fraction
        })
        .collect();
    for (pair, n) in fractions.windows(2).zip([400.0_f64, 800.0]) {
        // allow one binomial standard deviation of noise at the larger size
        let noise = (0.05 / (4.0 * n)).sqrt();
        assert!(pair[1] <= pair[0] + noise, "{fractions:?}");
    }
}

#[test]
fn skew_point_mass_spectrum_is_a_vertical_semicircle() {
    assert!(ensemble(dirac(), 2.0, 4.0, 50, 1, false).validate().is_err());
    let sample = sample_ensemble(&ensemble(dirac(), 1.0, 2.0, 1000, 1, true)).unwrap();
    let report = compare_degenerate(&sample, 0.0);
    assert!(report.heuristic);
    assert!(report.ks_imag <= 0.05, "{report:?}");
}

#[test]
fn point_mass_spectrum_fills_the_ellipse() {
    let field = build_field(&dirac(), params(2.0, 1.0), 1024).unwrap();
    let sample = sample_ensemble(&ensemble(dirac(), 2.0, 1.0, 1000, 1, false)).unwrap();
    let report = compare_esd(&sample, &field).unwrap();
    assert!(report.ks_real <= 0.05 && report.outside_fraction <= 0.02, "{report:?}");
}
