//! Brown measure of `y₀ + σ̃_{s−t/2} + i·σ_{t/2}`.
//!
//! The measure lives on `Ω = {a + ib : |b| < b(a)}` with a density that is
//! constant on each vertical segment. Everything is parametrized by the real
//! part `α` of the boundary point `α + i·v(α)` of the circular-case domain:
//!
//! * `a(α) = α + (s−t)·∫ (α−x) dν / ((α−x)² + v²)` is an increasing
//!   homeomorphism of ℝ; its inverse is `α(a)`.
//! * `b(a) = (t/s)·v(α(a))`.
//! * with `r = t/s` and `w_c` the circular-case density at `α`,
//!   `w(a) = w_c / (r·(r + 2π(1−r)s·w_c))`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::biane::{psi_derivative_from, BianeData, BoundaryPoint, LambdaInterval};
use crate::error::{Error, Result};
use crate::measure::Law;
use crate::roots;
use crate::stats::TabulatedCdf;

/// Number of grid points at each end of a field where the density is not
/// reported.
pub const GUARD_POINTS: usize = 2;

/// Total variance `s` and imaginary-part parameter `t`, with `s ≥ t/2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticParams {
    s: f64,
    t: f64,
}

impl EllipticParams {
    pub fn new(s: f64, t: f64) -> Result<EllipticParams> {
        if !(s.is_finite() && t.is_finite()) {
            return Err(Error::Validation(format!("non-finite parameters s = {s}, t = {t}")));
        }
        if !(t > 0.0) {
            return Err(Error::Validation(format!("t = {t} must be positive")));
        }
        if s < 0.5 * t * (1.0 - 1e-15) {
            return Err(Error::Validation(format!("need s ≥ t/2, got s = {s}, t = {t}")));
        }
        Ok(EllipticParams { s, t })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `r = t/s ∈ (0, 2]`.
    pub fn r(&self) -> f64 {
        self.t / self.s
    }

    /// `s = t/2`: the elliptic part is purely imaginary.
    pub fn is_skew(&self) -> bool {
        (2.0 * self.s - self.t).abs() <= 1e-12 * self.s
    }

    /// `s = t` up to the relative threshold where `(s a − t α)/(s − t)` is
    /// replaced by `ψ(α)`.
    pub fn is_circular(&self) -> bool {
        (self.s - self.t).abs() < 1e-8 * self.s
    }
}

fn check_biane(biane: &BianeData, params: &EllipticParams) -> Result<()> {
    if biane.s() != params.s {
        return Err(Error::ParamMismatch(format!(
            "Biane data built for s = {} but parameters have s = {}",
            biane.s(),
            params.s
        )));
    }
    Ok(())
}

/// `a(α)` from an already evaluated boundary point.
pub fn a_from_point(params: &EllipticParams, p: &BoundaryPoint) -> f64 {
    p.alpha + (params.s - params.t) * p.res.shift
}

/// Fiber density `w(a)` from the boundary point over `α(a)`; requires `v > 0`.
pub fn density_from_point(params: &EllipticParams, p: &BoundaryPoint) -> f64 {
    let r = params.r();
    let psi_d = psi_derivative_from(params.s, p);
    let w_c = psi_d / (2.0 * PI * params.s);
    // r + 2π(1−r)s·w_c = r + (1−r)ψ'
    w_c / (r * (r + (1.0 - r) * psi_d))
}

/// `a_{s,t}(α) = Re H_{ν,s−t}(α + i v(α))`.
pub fn a_of_alpha(biane: &BianeData, params: &EllipticParams, alpha: f64) -> Result<f64> {
    check_biane(biane, params)?;
    Ok(a_from_point(params, &biane.point(alpha)?))
}

/// Inverse of [`a_of_alpha`] by monotone bisection.
pub fn alpha_of_a(biane: &BianeData, params: &EllipticParams, a: f64) -> Result<f64> {
    check_biane(biane, params)?;
    let (lo, hi) = biane.law().support();
    let reach = 3.0 * params.s.sqrt();
    roots::invert_increasing(
        |x| Ok(a_from_point(params, &biane.point(x)?)),
        a,
        lo - reach,
        hi + reach,
        biane.config().root_tol,
    )
}

/// Sorted `α` grid on `[lo, hi]`: half uniform, half cosine-spaced so points
/// cluster where `v` vanishes like a square root.
pub fn alpha_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n_uniform = (n / 2).max(2);
    let n_cos = (n - n_uniform).max(2);
    let span = hi - lo;
    let mut pts: Vec<f64> = (0..n_uniform)
        .map(|k| lo + span * k as f64 / (n_uniform - 1) as f64)
        .chain((0..n_cos).map(|k| lo + span * 0.5 * (1.0 - (PI * k as f64 / (n_cos - 1) as f64).cos())))
        .map(|x| x.clamp(lo, hi))
        .collect();
    pts.sort_by(f64::total_cmp);
    let tol = 1e-14 * span.abs().max(1.0);
    pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    pts
}

/// `α` grid over the closure of `{v > 0}` with about `n` points: one
/// [`alpha_grid`] per component, so every edge where `v` vanishes gets
/// clustered points. The flags mark the guard band at each component edge.
pub fn component_grid(lambda: &LambdaInterval, n: usize) -> (Vec<f64>, Vec<bool>) {
    let comps = &lambda.components;
    let total: f64 = comps.iter().map(|(l, h)| h - l).sum();
    let mut alpha = Vec::with_capacity(n + 16 * comps.len());
    let mut guarded = Vec::with_capacity(alpha.capacity());
    for &(l, h) in comps {
        let m = ((n as f64 * (h - l) / total).round() as usize).max(16);
        let g = alpha_grid(l, h, m);
        let len = g.len();
        guarded.extend((0..len).map(|k| k < GUARD_POINTS || k + GUARD_POINTS >= len));
        alpha.extend(g);
    }
    (alpha, guarded)
}

/// The Brown measure sampled along an `α` grid covering the closed hull of
/// `{v > 0}`.
#[derive(Debug, Clone)]
pub struct BrownDensityField {
    params: EllipticParams,
    biane: BianeData,
    alpha: Vec<f64>,
    a: Vec<f64>,
    v: Vec<f64>,
    b: Vec<f64>,
    w: Vec<Option<f64>>,
    omega: (f64, f64),
}

/// Builds the field on roughly `n_grid` points.
///
/// Fails with [`Error::Degenerate`] when `s = t/2` and ν is a point mass; the
/// measure is then one-dimensional (see [`degenerate_semicircle`]).
pub fn build_field(law: &Law, params: EllipticParams, n_grid: usize) -> Result<BrownDensityField> {
    if params.is_skew() {
        if let Some(atom) = law.single_atom() {
            return Err(Error::Degenerate {
                atom,
                half_t: 0.5 * params.t,
            });
        }
    }
    if n_grid < 8 {
        return Err(Error::Validation(format!("grid of {n_grid} points is too small")));
    }
    let biane = BianeData::new(law.clone(), params.s)?;
    BrownDensityField::from_biane(biane, params, n_grid)
}

impl BrownDensityField {
    pub fn from_biane(biane: BianeData, params: EllipticParams, n_grid: usize) -> Result<Self> {
        check_biane(&biane, &params)?;
        let (alpha, guarded) = component_grid(biane.lambda(), n_grid);
        let n = alpha.len();
        let rows: Vec<(f64, f64, f64, Option<f64>)> = alpha
            .par_iter()
            .zip(&guarded)
            .map(|(&al, &guard)| {
                let p = biane.point(al)?;
                let a = a_from_point(&params, &p);
                let w = (p.v > 0.0 && !guard).then(|| density_from_point(&params, &p));
                Ok((a, p.v, params.r() * p.v, w))
            })
            .collect::<Result<_>>()?;

        let a: Vec<f64> = rows.iter().map(|r| r.0).collect();
        if a.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Convergence(
                "a(α) is not strictly increasing on the grid; refine the law's quadrature".into(),
            ));
        }
        let omega = (a[0], a[n - 1]);
        Ok(BrownDensityField {
            params,
            biane,
            alpha,
            v: rows.iter().map(|r| r.1).collect(),
            b: rows.iter().map(|r| r.2).collect(),
            w: rows.iter().map(|r| r.3).collect(),
            a,
            omega,
        })
    }

    pub fn params(&self) -> EllipticParams {
        self.params
    }

    pub fn biane(&self) -> &BianeData {
        &self.biane
    }

    pub fn law(&self) -> &Law {
        self.biane.law()
    }

    pub fn alpha_grid(&self) -> &[f64] {
        &self.alpha
    }

    pub fn a_grid(&self) -> &[f64] {
        &self.a
    }

    pub fn v_values(&self) -> &[f64] {
        &self.v
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b
    }

    /// Fiber densities; `None` wherever `v = 0` and in the guard band at each
    /// edge of a component of `{v > 0}`.
    pub fn w_values(&self) -> &[Option<f64>] {
        &self.w
    }

    /// Endpoints of `Ω ∩ ℝ` (of its hull when the positivity set is split).
    pub fn omega(&self) -> (f64, f64) {
        self.omega
    }

    pub fn alpha_of_a(&self, a: f64) -> Result<f64> {
        alpha_of_a(&self.biane, &self.params, a)
    }

    /// `b(a)`; zero outside `Ω ∩ ℝ`.
    pub fn boundary(&self, a: f64) -> Result<f64> {
        if a <= self.omega.0 || a >= self.omega.1 {
            return Ok(0.0);
        }
        let alpha = self.alpha_of_a(a)?;
        Ok(self.params.r() * self.biane.v(alpha)?)
    }

    /// Density on the vertical segment over `a`, for `a` strictly inside
    /// `Ω ∩ ℝ`.
    pub fn density(&self, a: f64) -> Result<f64> {
        if a <= self.omega.0 || a >= self.omega.1 {
            return Err(Error::Domain(format!(
                "a = {a} outside ({}, {})",
                self.omega.0, self.omega.1
            )));
        }
        let p = self.biane.point(self.alpha_of_a(a)?)?;
        if p.v <= 0.0 {
            return Err(Error::Domain(format!("a = {a} lies in a gap of Ω ∩ ℝ")));
        }
        Ok(density_from_point(&self.params, &p))
    }

    /// Mass of each vertical fiber, `2·b(a)·w(a)`, zero where `w` is absent.
    pub fn fiber_masses(&self) -> Vec<f64> {
        self.b
            .iter()
            .zip(&self.w)
            .map(|(b, w)| w.map_or(0.0, |w| 2.0 * b * w))
            .collect()
    }

    fn trapezoid(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.a.len() - 1)
            .map(|k| 0.5 * (f(k) + f(k + 1)) * (self.a[k + 1] - self.a[k]))
            .sum()
    }

    /// `∫ 2 b(a) w(a) da`.
    pub fn total_mass(&self) -> f64 {
        let m = self.fiber_masses();
        self.trapezoid(|k| m[k])
    }

    /// `∫ (a + ib) dBrown`; the imaginary part vanishes by symmetry.
    pub fn holomorphic_mean(&self) -> num_complex::Complex64 {
        let m = self.fiber_masses();
        num_complex::Complex64::new(self.trapezoid(|k| self.a[k] * m[k]), 0.0)
    }

    /// Distribution function of the real part of the Brown measure, from the
    /// fiber masses by the trapezoid rule.
    pub fn marginal_cdf(&self) -> TabulatedCdf {
        TabulatedCdf::from_density(self.a.clone(), &self.fiber_masses())
    }
}

/// Brown measure in the degenerate case `ν = δ_u`, `s = t/2`: the semicircle
/// of variance `t/2` on the vertical line through `u`. Returns `(b, density)`
/// on `n` points of `[−2√(t/2), 2√(t/2)]`.
pub fn degenerate_semicircle(t: f64, n: usize) -> Vec<(f64, f64)> {
    let var = 0.5 * t;
    let radius = 2.0 * var.sqrt();
    let n = n.max(2);
    (0..n)
        .map(|k| {
            let b = -radius + 2.0 * radius * k as f64 / (n - 1) as f64;
            let d = (4.0 * var - b * b).max(0.0).sqrt() / (2.0 * PI * var);
            (b, d)
        })
        .collect()
}
