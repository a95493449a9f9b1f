//! The maps relating three measures:
//!
//! * `U(α + iβ) = a(α) + i(t/s)β` carries Brown(y₀ + c_s) to the Brown measure
//!   of `y₀ + σ̃_{s−t/2} + iσ_{t/2}`;
//! * `Q(a + ib) = (s·a − t·α(a))/(s − t)` carries the latter to
//!   `Law(y₀ + σ_s)`. When `s = t` it is `ψ(α(a))` instead.
//!
//! The `verify_*` functions sample Brown(y₀ + c_s), push the cloud through a
//! map and measure the Kolmogorov–Smirnov distance of the real parts against
//! an independently computed distribution function.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::biane::{psi_derivative_from, BianeData};
use crate::elliptic::{a_from_point, alpha_of_a, build_field, component_grid, BrownDensityField, EllipticParams};
use crate::error::{Error, Result};
use crate::measure::Law;
use crate::stats::{self, TabulatedCdf};

/// Grid used to tabulate fiber masses for sampling and reference CDFs.
pub const SAMPLING_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    BrownCircular,
    BrownElliptic,
    Rmt,
}

/// Weighted points in the plane.
#[derive(Debug, Clone)]
pub struct PlanarSampleSet {
    points: Vec<Complex64>,
    weights: Vec<f64>,
    provenance: Provenance,
}

impl PlanarSampleSet {
    pub fn new(points: Vec<Complex64>, weights: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(Error::Validation(format!(
                "{} points with {} weights",
                points.len(),
                weights.len()
            )));
        }
        if points.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Validation("non-finite sample point".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Validation("negative or NaN sample weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("sample weights sum to {total}")));
        }
        Ok(PlanarSampleSet {
            points,
            weights,
            provenance,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        let w = 1.0 / points.len().max(1) as f64;
        let weights = vec![w; points.len()];
        Self::new(points, weights, provenance)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Real parts paired with weights.
    pub fn real_marginal(&self) -> Vec<(f64, f64)> {
        self.points.iter().zip(&self.weights).map(|(z, w)| (z.re, *w)).collect()
    }

    /// Applies `f` to every point, keeping the weights.
    pub fn map<F>(&self, provenance: Provenance, f: F) -> Result<Self>
    where
        F: Fn(Complex64) -> Result<Complex64> + Sync,
    {
        let points = self.points.par_iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
        Self::new(points, self.weights.clone(), provenance)
    }
}

/// `U(α + iβ) = a(α) + i(t/s)β`.
pub fn u_map(biane: &BianeData, params: &EllipticParams, z: Complex64) -> Result<Complex64> {
    let p = biane.point(z.re)?;
    if biane.s() != params.s() {
        return Err(Error::ParamMismatch(format!(
            "Biane data built for s = {} but parameters have s = {}",
            biane.s(),
            params.s()
        )));
    }
    Ok(Complex64::new(a_from_point(params, &p), params.r() * z.im))
}

/// `U⁻¹(a + ib) = α(a) + i(s/t)b`.
pub fn u_inverse(biane: &BianeData, params: &EllipticParams, w: Complex64) -> Result<Complex64> {
    Ok(Complex64::new(alpha_of_a(biane, params, w.re)?, w.im / params.r()))
}

/// `Q ∘ U` on the vertical line over `α`: `(s·a(α) − tα)/(s − t)`, or `ψ(α)`
/// when `s = t`. Well defined even when `a` is constant (`ν` a point mass
/// and `s = t/2`).
pub fn q_of_alpha(biane: &BianeData, params: &EllipticParams, alpha: f64) -> Result<f64> {
    if params.is_circular() {
        return biane.psi(alpha);
    }
    let a = a_from_point(params, &biane.point(alpha)?);
    Ok((params.s() * a - params.t() * alpha) / (params.s() - params.t()))
}

/// `Q(w)`, independent of `Im w`.
pub fn q_map(field: &BrownDensityField, w: Complex64) -> Result<f64> {
    let (lo, hi) = field.omega();
    let slack = 1e-12 * (hi - lo).abs().max(1.0);
    if !(w.re >= lo - slack && w.re <= hi + slack) {
        return Err(Error::Domain(format!("Re w = {} outside [{lo}, {hi}]", w.re)));
    }
    let params = field.params();
    let alpha = field.alpha_of_a(w.re)?;
    if params.is_circular() {
        return field.biane().psi(alpha);
    }
    Ok((params.s() * w.re - params.t() * alpha) / (params.s() - params.t()))
}

/// Draws `n` points of Brown(y₀ + c_s): `α` by inverting the cumulative fiber
/// mass `v(α)ψ'(α)/(πs)` (piecewise linear on [`SAMPLING_GRID`] points), then
/// `β` uniform on `(−v(α), v(α))`.
pub fn sample_circular_brown(biane: &BianeData, n: usize, rng: &mut impl Rng) -> Result<PlanarSampleSet> {
    if n == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let s = biane.s();
    let (grid, _) = component_grid(biane.lambda(), SAMPLING_GRID);
    let mass: Vec<f64> = grid
        .par_iter()
        .map(|&al| {
            let p = biane.point(al)?;
            Ok(if p.v > 0.0 {
                p.v * psi_derivative_from(s, &p) / (std::f64::consts::PI * s)
            } else {
                0.0
            })
        })
        .collect::<Result<_>>()?;
    let mut cum = vec![0.0; grid.len()];
    for k in 1..grid.len() {
        cum[k] = cum[k - 1] + 0.5 * (mass[k - 1] + mass[k]) * (grid[k] - grid[k - 1]);
    }
    let uniforms: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let points = uniforms
        .par_iter()
        .map(|&(u1, u2)| {
            let alpha = stats::invert_piecewise_linear(&grid, &mass, &cum, u1);
            let v = biane.v(alpha)?;
            Ok(Complex64::new(alpha, (2.0 * u2 - 1.0) * v))
        })
        .collect::<Result<Vec<_>>>()?;
    PlanarSampleSet::uniform(points, Provenance::BrownCircular)
}

/// Distribution function of `Law(y₀ + σ_s)` by the trapezoid rule in
/// `ξ = ψ(α)` of the density `v(α)/(πs)`.
pub fn free_convolution_cdf(biane: &BianeData, n_grid: usize) -> Result<TabulatedCdf> {
    let (grid, _) = component_grid(biane.lambda(), n_grid);
    let pts = biane.free_convolution_density(&grid)?;
    let (xi, p): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Ok(TabulatedCdf::from_density(xi, &p))
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub s: f64,
    pub t: f64,
    pub law: String,
    pub seed: u64,
}

/// Outcome of one push-forward check.
#[derive(Debug, Clone, Serialize)]
pub struct PushforwardReport {
    pub schema_version: &'static str,
    pub map: &'static str,
    pub ks_real: f64,
    pub n: usize,
    pub params: ReportParams,
    /// Which distribution function the pushed cloud was compared against.
    pub reference: &'static str,
}

fn report_params(law: &Law, params: &EllipticParams, seed: u64) -> ReportParams {
    ReportParams {
        s: params.s(),
        t: params.t(),
        law: law.describe(),
        seed,
    }
}

/// Pushes `n` samples of Brown(y₀ + c_s) through `U` and compares real parts
/// with the field marginal (the semiellipse for a point mass).
pub fn verify_u_pushforward(law: &Law, params: EllipticParams, n: usize, seed: u64) -> Result<PushforwardReport> {
    let field = build_field(law, params, SAMPLING_GRID)?;
    let biane = field.biane();
    let cloud = sample_circular_brown(biane, n, &mut ChaCha20Rng::seed_from_u64(seed))?;
    let pushed = cloud.map(Provenance::BrownElliptic, |z| u_map(biane, &params, z))?;
    let marginal = pushed.real_marginal();
    let (ks_real, reference) = match law.single_atom() {
        Some(x0) => {
            let half = (2.0 * params.s() - params.t()) / params.s().sqrt();
            (
                stats::ks_weighted(&marginal, |x| stats::semiellipse_cdf(x0, half, x)),
                "semiellipse",
            )
        }
        None => {
            let cdf = field.marginal_cdf();
            (stats::ks_weighted(&marginal, |x| cdf.eval(x)), "field-marginal")
        }
    };
    Ok(PushforwardReport {
        schema_version: "1",
        map: "U",
        ks_real,
        n,
        params: report_params(law, &params, seed),
        reference,
    })
}

/// Pushes `n` samples of Brown(y₀ + c_s) through `Q ∘ U` and compares with the
/// distribution function of `y₀ + σ_s` (closed-form semicircle for a point
/// mass).
pub fn verify_q_pushforward(law: &Law, params: EllipticParams, n: usize, seed: u64) -> Result<PushforwardReport> {
    let biane = BianeData::new(law.clone(), params.s())?;
    let cloud = sample_circular_brown(&biane, n, &mut ChaCha20Rng::seed_from_u64(seed))?;
    let values: Vec<(f64, f64)> = cloud
        .points()
        .par_iter()
        .zip(cloud.weights())
        .map(|(z, &w)| Ok((q_of_alpha(&biane, &params, z.re)?, w)))
        .collect::<Result<_>>()?;
    let (ks_real, reference) = match law.single_atom() {
        Some(x0) => (
            stats::ks_weighted(&values, |x| stats::semicircle_cdf(x0, params.s(), x)),
            "semicircle",
        ),
        None => {
            let cdf = free_convolution_cdf(&biane, SAMPLING_GRID)?;
            (stats::ks_weighted(&values, |x| cdf.eval(x)), "free-convolution")
        }
    };
    Ok(PushforwardReport {
        schema_version: "1",
        map: "Q",
        ks_real,
        n,
        params: report_params(law, &params, seed),
        reference,
    })
}
