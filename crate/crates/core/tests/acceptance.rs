//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::time::Instant;

use brownlab::asymptotics::{self, LadderCheck, LADDER};
use brownlab::biane::BianeData;
use brownlab::elliptic::{a_of_alpha, alpha_of_a, build_field, BrownDensityField, EllipticParams};
use brownlab::measure::Law;
use brownlab::pushforward::{verify_q_pushforward, verify_u_pushforward};
use brownlab::rmt::{self, EnsembleSpec};
use brownlab::stats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

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

/// Grid indices with a density value, i.e. away from the edge guard bands.
fn interior(field: &BrownDensityField) -> Vec<usize> {
    (0..field.a_grid().len()).filter(|&k| field.w_values()[k].is_some()).collect()
}

/// Sup-norm distance of the field boundary from the ellipse with semi-axes
/// `ax`, `by` (`ax = by` for a circle), over the grid and 512 extra points.
fn ellipse_errors(field: &BrownDensityField, ax: f64, by: f64) -> (f64, f64) {
    let exact = |a: f64| by * (1.0 - (a / ax).powi(2)).max(0.0).sqrt();
    let mut grid_err: f64 = 0.0;
    for (&a, &b) in field.a_grid().iter().zip(field.b_values()) {
        grid_err = grid_err.max((b - exact(a)).abs());
    }
    let (lo, hi) = field.omega();
    for k in 0..512 {
        let a = lo + (hi - lo) * (k as f64 + 0.5) / 512.0;
        grid_err = grid_err.max((field.boundary(a).unwrap() - exact(a)).abs());
    }
    let omega_err = (lo + ax).abs().max((hi - ax).abs());
    (grid_err, omega_err)
}

fn density_error(field: &BrownDensityField, value: f64) -> f64 {
    field
        .w_values()
        .iter()
        .flatten()
        .map(|w| (w - value).abs())
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let field = build_field(&dirac(), params(1.0, 1.0), 512).unwrap();
    let (b_err, o_err) = ellipse_errors(&field, 1.0, 1.0);
    let d_err = density_error(&field, 1.0 / PI);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        b_err <= 1e-8 && o_err <= 1e-8 && d_err <= 1e-8 && secs < 5.0,
        format!("circle err {b_err:.2e}, endpoint err {o_err:.2e}, density err {d_err:.2e}, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let field = build_field(&dirac(), params(2.0, 1.0), 512).unwrap();
    let (b_err, o_err) = ellipse_errors(&field, 3.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt());
    let d_err = density_error(&field, 2.0 / (3.0 * PI));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        b_err <= 1e-8 && o_err <= 1e-8 && d_err <= 1e-8 && secs < 5.0,
        format!("ellipse err {b_err:.2e}, endpoint err {o_err:.2e}, density err {d_err:.2e}, {secs:.2} s"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let p = params(1.0, 1.0);
    let field = build_field(&bern(), p, 2048).unwrap();
    let mut id_err: f64 = 0.0;
    for &a in field.a_grid() {
        id_err = id_err.max((field.alpha_of_a(a).unwrap() - a).abs());
    }
    let mut d_err: f64 = 0.0;
    for k in interior(&field) {
        let a = field.a_grid()[k];
        let circ = field.biane().circular_brown_density(a).unwrap();
        d_err = d_err.max((field.w_values()[k].unwrap() - circ).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        id_err <= 1e-10 && d_err <= 1e-8 && secs < 10.0,
        format!("identity err {id_err:.2e}, density err {d_err:.2e}, {secs:.2} s"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let (s, t) = (1.0, 2.0);
    let field = build_field(&bern(), params(s, t), 2048).unwrap();
    let (lo, hi) = field.omega();
    let mut err: f64 = 0.0;
    let mut checked = 0;
    for k in interior(&field) {
        let a = field.a_grid()[k];
        // keep the stencil inside Ω, where α(a) is smooth
        let h = 1e-5_f64.min(0.25 * (a - lo).min(hi - a));
        let slope = (field.alpha_of_a(a + h).unwrap() - field.alpha_of_a(a - h).unwrap()) / (2.0 * h);
        let oracle = (slope - 0.5) / (2.0 * PI * s);
        err = err.max((field.w_values()[k].unwrap() - oracle).abs());
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        err <= 1e-5 && secs < 10.0,
        format!("max |w - (dα/da - 1/2)/2πs| = {err:.2e} over {checked} points, {secs:.2} s"),
    )
}

fn criterion_5() -> Outcome {
    let laws = [dirac(), bern(), three_atoms()];
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (mut r1, mut r2) = (0.0_f64, 0.0_f64);
    let mut done = 0;
    while done < 10_000 {
        let law = &laws[done % 3];
        let s = rng.random_range(0.5..4.0);
        let t = rng.random_range(0.05..1.95) * s;
        let p = params(s, t);
        let biane = BianeData::new(law.clone(), s).unwrap();
        let (lo, hi) = (biane.lambda().lo, biane.lambda().hi);
        let a_lo = a_of_alpha(&biane, &p, lo).unwrap();
        let a_hi = a_of_alpha(&biane, &p, hi).unwrap();
        let a = rng.random_range(a_lo..a_hi);
        let alpha = alpha_of_a(&biane, &p, a).unwrap();
        let v = biane.v(alpha).unwrap();
        if v <= 0.0 {
            // a fell in a gap of Ω ∩ ℝ
            continue;
        }
        let mut inv = 0.0;
        let mut first = 0.0;
        for (&x, &w) in law.nodes().iter().zip(law.weights()) {
            let d = (alpha - x) * (alpha - x) + v * v;
            inv += w / d;
            first += w * x / d;
        }
        r1 = r1.max((inv - 1.0 / s).abs());
        r2 = r2.max(((2.0 * s - t) * alpha / s - (s - t) * first - a).abs());
        done += 1;
    }
    outcome(
        r1 <= 1e-8 && r2 <= 1e-8,
        format!("10000 points: max residuals {r1:.2e} (1/s equation), {r2:.2e} (a equation)"),
    )
}

fn criterion_6() -> Outcome {
    let semicircle = Law::semicircle(0.5, 801).unwrap();
    let cases: Vec<(&str, Law, f64, f64)> = vec![
        ("delta s=t=1", dirac(), 1.0, 1.0),
        ("delta s=2 t=1", dirac(), 2.0, 1.0),
        ("delta(2) s=t=1", Law::dirac(2.0).unwrap(), 1.0, 1.0),
        ("bernoulli s=t=1", bern(), 1.0, 1.0),
        ("bernoulli s=1 t=2", bern(), 1.0, 2.0),
        ("bernoulli s=2 t=1", bern(), 2.0, 1.0),
        ("bernoulli s=t=0.5", bern(), 0.5, 0.5),
        ("bernoulli s=1 t=0.5", bern(), 1.0, 0.5),
        ("three atoms s=1.5 t=0.7", three_atoms(), 1.5, 0.7),
        ("three atoms s=0.3 t=0.5", three_atoms(), 0.3, 0.5),
        ("semicircle s=1 t=1.5", semicircle, 1.0, 1.5),
    ];
    let mut worst_mass: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, law, s, t) in cases {
        let field = build_field(&law, params(s, t), 2048).unwrap();
        let dm = (field.total_mass() - 1.0).abs();
        let dmean = (field.holomorphic_mean().re - law.mean()).abs();
        worst_mass = worst_mass.max(dm);
        worst_mean = worst_mean.max(dmean);
        if dm > 1e-4 || dmean > 1e-4 {
            failed.push(name);
        }
    }
    outcome(
        failed.is_empty(),
        format!("11 fields: worst mass err {worst_mass:.2e}, worst mean err {worst_mean:.2e}; failing {failed:?}"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cases = [(dirac(), 1.0, 1.0), (dirac(), 2.0, 1.0), (bern(), 2.0, 1.0)];
    let ks: Vec<f64> = cases
        .iter()
        .map(|(law, s, t)| verify_u_pushforward(law, params(*s, *t), 100_000, 7).unwrap().ks_real)
        .collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ks.iter().all(|&d| d <= 0.02) && secs < 30.0,
        format!("KS = {:.4}, {:.4}, {:.4}; {secs:.2} s", ks[0], ks[1], ks[2]),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let cases = [(dirac(), 1.0, 1.0), (dirac(), 1.0, 2.0), (bern(), 2.0, 1.0)];
    let ks: Vec<f64> = cases
        .iter()
        .map(|(law, s, t)| verify_q_pushforward(law, params(*s, *t), 100_000, 8).unwrap().ks_real)
        .collect();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ks.iter().all(|&d| d <= 0.02) && secs < 30.0,
        format!("KS = {:.4}, {:.4}, {:.4}; {secs:.2} s", ks[0], ks[1], ks[2]),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let spec = |law: Law, s: f64, t: f64| EnsembleSpec {
        n: 1000,
        trials: 10,
        law,
        params: params(s, t),
        seed: 20240901,
        allow_degenerate: false,
    };
    let disk = spec(dirac(), 1.0, 1.0);
    let sample = rmt::sample_ensemble(&disk).unwrap();
    let field = build_field(&dirac(), params(1.0, 1.0), 2048).unwrap();
    let report = rmt::compare_esd(&sample, &field).unwrap();
    // oracle for the disk: the real part of the circular law is the
    // semicircle of radius 1
    let re: Vec<f64> = sample.eigenvalues().iter().map(|z| z.re).collect();
    let ks_oracle = stats::ks_statistic(&re, |x| stats::semiellipse_cdf(0.0, 1.0, x));

    let bspec = spec(bern(), 1.0, 0.5);
    let bsample = rmt::sample_ensemble(&bspec).unwrap();
    let bfield = build_field(&bern(), params(1.0, 0.5), 2048).unwrap();
    let breport = rmt::compare_esd(&bsample, &bfield).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        report.outside_fraction <= 0.02
            && report.ks_real <= 0.05
            && ks_oracle <= 0.05
            && breport.ks_real <= 0.05
            && secs < 300.0,
        format!(
            "disk: outside {:.4}, KS {:.4} (closed form {:.4}); bernoulli: KS {:.4}, outside {:.4}; {secs:.1} s",
            report.outside_fraction, report.ks_real, ks_oracle, breport.ks_real, breport.outside_fraction
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let law = bern();
    let ellipse = asymptotics::run_ladder(
        &law,
        LadderCheck::EllipseBoundary {
            ratio: 0.5,
            phi0: PI / 6.0,
        },
        &LADDER,
    )
    .unwrap();
    let density = asymptotics::run_ladder(
        &law,
        LadderCheck::DensityFixedRatio {
            ratio: 0.5,
            c: 2.0,
            phi0: PI / 4.0,
        },
        &LADDER,
    )
    .unwrap();
    let skew = asymptotics::check_skew_regime(&law, 1600.0, 1.5).unwrap();
    let top_two = ellipse.records[2].pass && ellipse.records[3].pass;
    let secs = start.elapsed().as_secs_f64();
    let fmt = |r: &asymptotics::Record| format!("{:.2e}/{:.2e}", r.measured, r.bound);
    outcome(
        top_two && density.passes_at_top() && skew.endpoints.pass && secs < 120.0,
        format!(
            "ellipse s=400 {}, s=1600 {}; density s=1600 {}; skew gap s=1600 {}; {secs:.2} s",
            fmt(&ellipse.records[2]),
            fmt(&ellipse.records[3]),
            fmt(&density.records[3]),
            fmt(&skew.endpoints)
        ),
    )
}

fn criterion_11() -> Outcome {
    let law = bern();
    let mut s_values = vec![16.0];
    s_values.extend(LADDER);
    let flags: Vec<bool> = s_values
        .iter()
        .map(|&s| asymptotics::check_unimodal(&law, s).unwrap())
        .collect();
    outcome(
        flags.iter().all(|&f| f),
        format!("s = {s_values:?}: unimodal {flags:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("circular law recovery", criterion_1),
        ("elliptic law recovery", criterion_2),
        ("s = t reduction", criterion_3),
        ("t = 2s reduction", criterion_4),
        ("defining system residuals", criterion_5),
        ("mass and mean", criterion_6),
        ("push-forward U", criterion_7),
        ("push-forward Q", criterion_8),
        ("random matrix convergence", criterion_9),
        ("asymptotic ladder", criterion_10),
        ("unimodality", criterion_11),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag}: {name}: {}", k + 1, o.detail);
        failures += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
