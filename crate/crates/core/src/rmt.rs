//! Random-matrix check of the Brown measure.
//!
//! Each trial draws `A = Y + √(s−t/2)·X + i√(t/2)·X'` with `Y` the diagonal of
//! ν-quantiles at `(k−½)/n` and `X, X'` independent GUE matrices normalized to
//! a variance-one semicircle limit, then computes all eigenvalues with LAPACK's
//! dense nonsymmetric solver.
//!
//! Randomness: trial `k` uses `ChaCha20Rng::seed_from_u64(seed)` switched to
//! stream `k`, so output does not depend on how trials are scheduled.

use std::io::Write;

use ndarray::Array2;
use ndarray_linalg::EigVals;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::elliptic::{BrownDensityField, EllipticParams};
use crate::error::{Error, Result};
use crate::measure::Law;
use crate::stats;

/// Vertical dilation applied to the boundary when counting outliers.
pub const OUTSIDE_DILATION: f64 = 0.05;

/// Number of vertical bands in the band-count summary.
pub const BANDS: usize = 20;

#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub n: usize,
    pub trials: usize,
    pub law: Law,
    pub params: EllipticParams,
    pub seed: u64,
    /// Permit `s = t/2`, where convergence of the spectrum is not known.
    pub allow_degenerate: bool,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!("matrix size {} is below 2", self.n)));
        }
        if self.trials == 0 {
            return Err(Error::Validation("need at least one trial".into()));
        }
        if self.params.is_skew() && !self.allow_degenerate {
            return Err(Error::Assumption(
                "s = t/2: spectral convergence is not guaranteed; pass --allow-degenerate to run anyway".into(),
            ));
        }
        Ok(())
    }

    /// Reports for `s = t/2` are heuristic.
    pub fn is_heuristic(&self) -> bool {
        self.params.is_skew()
    }
}

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// GUE matrix with `E|X_ij|² = 1/n`; its spectrum tends to the semicircle on
/// `[−2, 2]`.
pub fn sample_gue(n: usize, rng: &mut impl Rng) -> Array2<Complex64> {
    let diag_sd = (1.0 / n as f64).sqrt();
    let off_sd = (0.5 / n as f64).sqrt();
    let mut x = Array2::<Complex64>::zeros((n, n));
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        x[[i, i]] = Complex64::new(diag_sd * d, 0.0);
        for j in i + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(off_sd * re, off_sd * im);
            x[[i, j]] = z;
            x[[j, i]] = z.conj();
        }
    }
    x
}

/// ν-quantiles at `(k − ½)/n`, `k = 1..n`.
pub fn diagonal_quantiles(law: &Law, n: usize) -> Vec<f64> {
    (1..=n).map(|k| law.quantile((k as f64 - 0.5) / n as f64)).collect()
}

/// The matrix of trial `trial`.
pub fn ensemble_matrix(spec: &EnsembleSpec, trial: usize) -> Array2<Complex64> {
    let n = spec.n;
    let mut rng = trial_rng(spec.seed, trial);
    let x = sample_gue(n, &mut rng);
    let xp = sample_gue(n, &mut rng);
    let re_scale = (spec.params.s() - 0.5 * spec.params.t()).max(0.0).sqrt();
    let im_scale = Complex64::new(0.0, (0.5 * spec.params.t()).sqrt());
    let mut a = x * re_scale + xp * im_scale;
    for (i, y) in diagonal_quantiles(&spec.law, n).into_iter().enumerate() {
        a[[i, i]] += y;
    }
    a
}

/// Eigenvalues of all trials, concatenated in trial order.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    eigenvalues: Vec<Complex64>,
    spec: EnsembleSpec,
}

impl SpectralSample {
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    /// Eigenvalues of one trial.
    pub fn trial(&self, k: usize) -> &[Complex64] {
        &self.eigenvalues[k * self.spec.n..(k + 1) * self.spec.n]
    }

    /// CSV with columns `re,im,trial`.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "re,im,trial")?;
        for (k, chunk) in self.eigenvalues.chunks(self.spec.n).enumerate() {
            for z in chunk {
                writeln!(out, "{:.16e},{:.16e},{k}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

pub fn sample_ensemble(spec: &EnsembleSpec) -> Result<SpectralSample> {
    spec.validate()?;
    let per_trial = (0..spec.trials)
        .into_par_iter()
        .map(|k| {
            let a = ensemble_matrix(spec, k);
            let ev = a.eigvals().map_err(|e| Error::Eigensolver {
                trial: k,
                message: e.to_string(),
            })?;
            if ev.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::Eigensolver {
                    trial: k,
                    message: "non-finite eigenvalue".into(),
                });
            }
            Ok(ev.to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralSample {
        eigenvalues: per_trial.concat(),
        spec: spec.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
    pub observed: usize,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EsdParams {
    pub s: f64,
    pub t: f64,
    pub law: String,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
}

/// Comparison of an eigenvalue cloud with the Brown measure.
#[derive(Debug, Clone, Serialize)]
pub struct EsdReport {
    pub schema_version: &'static str,
    pub params: EsdParams,
    pub eigenvalues: usize,
    /// Share of eigenvalues with `|Im λ| > (1 + dilation)·b(Re λ)`.
    pub outside_fraction: f64,
    pub dilation: f64,
    pub ks_real: f64,
    pub bands: Vec<Band>,
    /// `Σ (observed − expected)² / expected` over bands with positive
    /// expectation.
    pub chi_square: f64,
    pub heuristic: bool,
}

fn esd_params(spec: &EnsembleSpec) -> EsdParams {
    EsdParams {
        s: spec.params.s(),
        t: spec.params.t(),
        law: spec.law.describe(),
        n: spec.n,
        trials: spec.trials,
        seed: spec.seed,
    }
}

pub fn compare_esd(sample: &SpectralSample, field: &BrownDensityField) -> Result<EsdReport> {
    let spec = sample.spec();
    if spec.params != field.params() || &spec.law != field.law() {
        return Err(Error::ParamMismatch(format!(
            "sample drawn for s = {}, t = {}, {} but field built for s = {}, t = {}, {}",
            spec.params.s(),
            spec.params.t(),
            spec.law.describe(),
            field.params().s(),
            field.params().t(),
            field.law().describe()
        )));
    }
    let ev = sample.eigenvalues();
    let total = ev.len();
    let outside = ev
        .par_iter()
        .map(|z| Ok(usize::from(z.im.abs() > (1.0 + OUTSIDE_DILATION) * field.boundary(z.re)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum::<usize>();

    let cdf = field.marginal_cdf();
    let re: Vec<f64> = ev.iter().map(|z| z.re).collect();
    let ks_real = stats::ks_statistic(&re, |x| cdf.eval(x));

    let (lo, hi) = field.omega();
    let width = (hi - lo) / BANDS as f64;
    let mut bands: Vec<Band> = (0..BANDS)
        .map(|k| {
            let (b_lo, b_hi) = (lo + k as f64 * width, lo + (k + 1) as f64 * width);
            Band {
                lo: b_lo,
                hi: b_hi,
                observed: 0,
                expected: total as f64 * (cdf.eval(b_hi) - cdf.eval(b_lo)),
            }
        })
        .collect();
    for x in &re {
        if *x >= lo && *x <= hi {
            let k = (((x - lo) / width) as usize).min(BANDS - 1);
            bands[k].observed += 1;
        }
    }
    let chi_square = bands
        .iter()
        .filter(|b| b.expected > 0.0)
        .map(|b| (b.observed as f64 - b.expected).powi(2) / b.expected)
        .sum();

    Ok(EsdReport {
        schema_version: "1",
        params: esd_params(spec),
        eigenvalues: total,
        outside_fraction: outside as f64 / total as f64,
        dilation: OUTSIDE_DILATION,
        ks_real,
        bands,
        chi_square,
        heuristic: spec.is_heuristic(),
    })
}

/// Comparison for a point mass at `atom` with `s = t/2`, where the Brown
/// measure is the semicircle of variance `t/2` on the vertical line through
/// the atom.
#[derive(Debug, Clone, Serialize)]
pub struct DegenerateEsdReport {
    pub schema_version: &'static str,
    pub params: EsdParams,
    pub eigenvalues: usize,
    pub atom: f64,
    /// Largest `|Re λ − atom|`.
    pub max_real_spread: f64,
    /// KS distance of `Im λ` against the semicircle of variance `t/2`.
    pub ks_imag: f64,
    pub heuristic: bool,
}

pub fn compare_degenerate(sample: &SpectralSample, atom: f64) -> DegenerateEsdReport {
    let spec = sample.spec();
    let half_t = 0.5 * spec.params.t();
    let ev = sample.eigenvalues();
    let im: Vec<f64> = ev.iter().map(|z| z.im).collect();
    let ks_imag = stats::ks_statistic(&im, |x| stats::semicircle_cdf(0.0, half_t, x));
    DegenerateEsdReport {
        schema_version: "1",
        params: esd_params(spec),
        eigenvalues: ev.len(),
        atom,
        max_real_spread: ev.iter().map(|z| (z.re - atom).abs()).fold(0.0, f64::max),
        ks_imag,
        heuristic: true,
    }
}
