//! Free convolution with a semicircle through Biane's boundary function.
//!
//! For a law ν and variance s > 0, `v(α)` is the unique `v > 0` solving
//! `∫ dν(x) / ((α−x)² + v²) = 1/s` when `∫ dν(x)/(α−x)² > 1/s`, and zero
//! otherwise. The map `H(z) = z + s·G(z)` sends `α + i·v(α)` to the real point
//! `ψ(α)`; `ψ` is an increasing homeomorphism of ℝ, the density of
//! `Law(y₀ + σ_s)` at `ψ(α)` is `v(α)/(πs)`, and `ψ'(α)/(2πs)` is the density of
//! the Brown measure of `y₀ + c_s` on the vertical segment above `α`.
//!
//! The positivity set `{v > 0}` is a single interval once
//! `s ≥ 4·diam(supp ν)²`. For smaller `s` it can split; [`LambdaInterval`]
//! then reports its convex hull, sets `hull_only` and lists the components.

use num_complex::Complex64;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::measure::{Law, ATOM_EPS};
use crate::roots::{self, bisect};

/// Number of points in the positivity scan used to detect interior zeros.
pub const SCAN_POINTS: usize = 4096;

/// Laws with at most this many nodes get an exact per-gap check for interior
/// zeros of `v` instead of the grid scan.
const EXACT_GAP_CHECK_NODES: usize = 512;

/// Resolvent integrals at the point `α + iv`, with `d = α − x` and
/// `D = d² + v²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolvent {
    /// `∫ dν / D`
    pub inv: f64,
    /// `∫ d dν / D` (= Re G(α + iv))
    pub shift: f64,
    /// `∫ x dν / D`
    pub first: f64,
    /// `∫ d dν / D²`
    pub shift_sq: f64,
    /// `∫ dν / D²`
    pub inv_sq: f64,
}

impl Resolvent {
    pub fn at(law: &Law, alpha: f64, v: f64) -> Resolvent {
        let v2 = v * v;
        let mut r = Resolvent {
            inv: 0.0,
            shift: 0.0,
            first: 0.0,
            shift_sq: 0.0,
            inv_sq: 0.0,
        };
        for (x, w) in law.iter() {
            let d = alpha - x;
            let big_d = d * d + v2;
            let inv = w / big_d;
            r.inv += inv;
            r.shift += d * inv;
            r.first += x * inv;
            r.shift_sq += d * inv / big_d;
            r.inv_sq += inv / big_d;
        }
        r
    }
}

/// Biane's function `v_{ν,s}(α)`.
///
/// Solves `g(u) = ∫ dν/((α−x)² + u) − 1/s = 0` for `u = v²` on `(0, s]`
/// (`u ≤ s` always, since the integrand is at most `1/u`). `g` is convex and
/// decreasing, so a Newton step from the left never overshoots; bisection
/// guards the remaining cases.
pub fn v_function(law: &Law, s: f64, alpha: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("variance s = {s} must be positive")));
    }
    let target = 1.0 / s;
    if law.inverse_square_mass(alpha) <= target {
        return Ok(0.0);
    }
    let g = |u: f64| -> (f64, f64) {
        let mut val = 0.0;
        let mut der = 0.0;
        for (x, w) in law.iter() {
            let d = alpha - x;
            let q = 1.0 / (d * d + u);
            val += w * q;
            der -= w * q * q;
        }
        (val - target, der)
    };

    let (mut lo, mut hi) = (0.0_f64, s);
    // Start from an interior point; Newton from the left then converges
    // monotonically.
    let mut u = 0.5 * s;
    for _ in 0..roots::MAX_ITER {
        let (gv, gd) = g(u);
        if gv == 0.0 {
            return Ok(u.sqrt());
        }
        if gv > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let newton = u - gv / gd;
        let next = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - u).abs() <= 4.0 * f64::EPSILON * u || (hi - lo) <= 4.0 * f64::EPSILON * hi {
            return Ok(next.sqrt());
        }
        u = next;
    }
    Err(Error::Convergence(format!(
        "v root-find at α = {alpha}, s = {s} did not converge"
    )))
}

/// `H_{ν,r}(z) = z + r·G_ν(z)`. `r` may be negative.
pub fn h_map(law: &Law, r: f64, z: Complex64) -> Result<Complex64> {
    Ok(z + r * law.cauchy_transform(z)?)
}

/// Complex derivative `H'_{ν,s}(z) = 1 − s·∫ dν(x)/(z − x)²`.
pub fn h_prime(law: &Law, s: f64, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && law.iter().any(|(x, _)| (z.re - x).abs() <= ATOM_EPS) {
        return Err(Error::Domain(format!("H' evaluated at an atom {}", z.re)));
    }
    let sum: Complex64 = law.iter().map(|(x, w)| w / ((z - x) * (z - x))).sum();
    Ok(1.0 - s * sum)
}

/// Endpoints of the closure of `{α : v(α) > 0}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LambdaInterval {
    pub lo: f64,
    pub hi: f64,
    /// `v` vanishes somewhere strictly between `lo` and `hi`; the interval is
    /// only the convex hull of the positivity set.
    pub hull_only: bool,
    /// Maximal intervals where `v > 0`, in increasing order.
    pub components: Vec<(f64, f64)>,
}

/// Locates `inf` and `sup` of `{v > 0}`.
///
/// Beyond the outermost node the map `α ↦ ∫ dν/(α−x)²` decreases strictly from
/// `+∞` to at most `1/s` at distance `√s`, so each outer endpoint is a
/// bracketed bisection.
pub fn lambda_interval(law: &Law, s: f64, cfg: &Config) -> Result<LambdaInterval> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("variance s = {s} must be positive")));
    }
    let target = 1.0 / s;
    let nodes = law.nodes();
    let (x_min, x_max) = (nodes[0], nodes[nodes.len() - 1]);
    // a point mass sits exactly at distance √s; pad so rounding cannot
    // leave the far end of the bracket on the wrong side
    let reach = s.sqrt() * (1.0 + 1e-9);
    let f = |a: f64| Ok(law.inverse_square_mass(a) - target);
    let hi = bisect(f, x_max, x_max + reach, cfg.root_tol)?;
    let lo = bisect(f, x_min - reach, x_min, cfg.root_tol)?;

    let mut gaps = Vec::new();
    if nodes.len() <= EXACT_GAP_CHECK_NODES {
        // Between consecutive nodes the integral is convex with poles at both
        // ends; v vanishes inside iff its minimum drops to 1/s.
        for pair in nodes.windows(2) {
            let (l, r) = (pair[0], pair[1]);
            let (m, neg_min) = roots::golden_max(|a| Ok(-law.inverse_square_mass(a)), l, r, 1e-13)?;
            if -neg_min < target {
                gaps.push((bisect(f, l, m, cfg.root_tol)?, bisect(f, m, r, cfg.root_tol)?));
            }
        }
    } else {
        let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
        let at = |k: usize| lo + k as f64 * step;
        let mut open: Option<f64> = None;
        for k in 1..SCAN_POINTS - 1 {
            let below = law.inverse_square_mass(at(k)) <= target;
            match (below, open) {
                (true, None) => open = Some(bisect(f, at(k - 1), at(k), cfg.root_tol)?),
                (false, Some(start)) => {
                    gaps.push((start, bisect(f, at(k - 1), at(k), cfg.root_tol)?));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(start) = open {
            gaps.push((start, at(SCAN_POINTS - 2)));
        }
    }
    let mut components = Vec::with_capacity(gaps.len() + 1);
    let mut left = lo;
    for &(g0, g1) in &gaps {
        components.push((left, g0));
        left = g1;
    }
    components.push((left, hi));
    Ok(LambdaInterval {
        lo,
        hi,
        hull_only: !gaps.is_empty(),
        components,
    })
}

/// A law together with a semicircle variance `s`: everything needed to
/// evaluate `v`, `ψ` and the circular-case Brown density.
#[derive(Debug, Clone)]
pub struct BianeData {
    law: Law,
    s: f64,
    lambda: LambdaInterval,
    config: Config,
}

/// `α + i·v(α)` on the boundary of the positivity region, with its resolvent
/// integrals.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub alpha: f64,
    pub v: f64,
    pub res: Resolvent,
}

impl BianeData {
    pub fn new(law: Law, s: f64) -> Result<BianeData> {
        BianeData::with_config(law, s, Config::default())
    }

    pub fn with_config(law: Law, s: f64, config: Config) -> Result<BianeData> {
        let lambda = lambda_interval(&law, s, &config)?;
        Ok(BianeData {
            law,
            s,
            lambda,
            config,
        })
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn lambda(&self) -> &LambdaInterval {
        &self.lambda
    }

    pub fn v(&self, alpha: f64) -> Result<f64> {
        if alpha <= self.lambda.lo || alpha >= self.lambda.hi {
            return Ok(0.0);
        }
        v_function(&self.law, self.s, alpha)
    }

    pub fn point(&self, alpha: f64) -> Result<BoundaryPoint> {
        let v = self.v(alpha)?;
        Ok(BoundaryPoint {
            alpha,
            v,
            res: Resolvent::at(&self.law, alpha, v),
        })
    }

    /// `ψ(α) = Re H(α + i v(α))`.
    pub fn psi(&self, alpha: f64) -> Result<f64> {
        let p = self.point(alpha)?;
        debug_assert!(
            p.v == 0.0 || (p.v * (1.0 - self.s * p.res.inv)).abs() <= 10.0 * self.config.root_tol * p.v.max(1.0),
            "Im H does not vanish on the boundary"
        );
        Ok(alpha + self.s * p.res.shift)
    }

    /// `ψ'(α)`, defined where `v(α) > 0`.
    ///
    /// Differentiating `ψ(α) = α + s∫ d/D` with `v'` eliminated through the
    /// defining equation gives `ψ' = 2s (A² + v²B²) / B` where
    /// `A = ∫ d/D²`, `B = ∫ 1/D²`. This is `1 / Re(1/H'(α + iv))` written
    /// without the cancellation in `H'` near the endpoints.
    pub fn psi_derivative(&self, alpha: f64) -> Result<f64> {
        let p = self.point(alpha)?;
        if p.v <= 0.0 {
            return Err(Error::Domain(format!("ψ' requires v(α) > 0; v({alpha}) = 0")));
        }
        Ok(psi_derivative_from(self.s, &p))
    }

    /// Parametric samples `(ψ(α), v(α)/(πs))` of the density of `y₀ + σ_s`.
    pub fn free_convolution_density(&self, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
        alphas
            .iter()
            .map(|&a| {
                let p = self.point(a)?;
                Ok((a + self.s * p.res.shift, p.v / (std::f64::consts::PI * self.s)))
            })
            .collect()
    }

    /// Density `ψ'(α)/(2πs)` of Brown(y₀ + c_s), constant on the vertical
    /// segment `{α + iβ : |β| < v(α)}`.
    pub fn circular_brown_density(&self, alpha: f64) -> Result<f64> {
        if alpha <= self.lambda.lo || alpha >= self.lambda.hi {
            return Err(Error::Domain(format!(
                "α = {alpha} outside ({}, {})",
                self.lambda.lo, self.lambda.hi
            )));
        }
        Ok(self.psi_derivative(alpha)? / (2.0 * std::f64::consts::PI * self.s))
    }

    /// Samples `v` at `n` equispaced points across the closed hull of `{v > 0}`.
    pub fn scan_v(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        let n = n.max(2);
        let (lo, hi) = (self.lambda.lo, self.lambda.hi);
        let step = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|k| {
                let a = if k == n - 1 { hi } else { lo + k as f64 * step };
                Ok((a, self.v(a)?))
            })
            .collect()
    }

    /// `ψ⁻¹(ξ)` by bisection; ψ is strictly increasing.
    pub fn psi_inverse(&self, xi: f64) -> Result<f64> {
        let reach = 3.0 * self.s.sqrt();
        roots::invert_increasing(
            |a| self.psi(a),
            xi,
            self.lambda.lo - reach,
            self.lambda.hi + reach,
            self.config.root_tol,
        )
    }
}

pub(crate) fn psi_derivative_from(s: f64, p: &BoundaryPoint) -> f64 {
    let a = p.res.shift_sq;
    let b = p.res.inv_sq;
    2.0 * s * (a * a + p.v * p.v * b * b) / b
}
