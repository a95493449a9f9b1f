//! One-dimensional distribution functions and Kolmogorov–Smirnov distances.

use std::f64::consts::PI;

/// Piecewise-linear interpolation on sorted `xs`, clamped at the ends.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let k = xs.partition_point(|&p| p <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let (y0, y1) = (ys[k - 1], ys[k]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Distribution function tabulated on a sorted grid and interpolated
/// linearly between nodes.
#[derive(Debug, Clone)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    ps: Vec<f64>,
}

impl TabulatedCdf {
    /// Integrates a piecewise-linear density by the trapezoid rule and
    /// normalizes the result to end at one. Needs at least two nodes.
    pub fn from_density(xs: Vec<f64>, density: &[f64]) -> TabulatedCdf {
        assert!(xs.len() >= 2 && xs.len() == density.len());
        let mut ps = vec![0.0; xs.len()];
        for k in 1..xs.len() {
            ps[k] = ps[k - 1] + 0.5 * (density[k - 1] + density[k]) * (xs[k] - xs[k - 1]);
        }
        let total = ps[ps.len() - 1];
        if total > 0.0 {
            ps.iter_mut().for_each(|p| *p /= total);
        }
        TabulatedCdf { xs, ps }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ps
    }

    pub fn eval(&self, x: f64) -> f64 {
        interpolate(&self.xs, &self.ps, x)
    }
}

/// Inverse of the distribution with piecewise-linear density `fs` on the
/// nodes `xs`; `cum[k]` is the trapezoid mass of `[xs[0], xs[k]]` and the last
/// entry is the total mass. Within a cell the quadratic is solved exactly.
pub fn invert_piecewise_linear(xs: &[f64], fs: &[f64], cum: &[f64], p: f64) -> f64 {
    let target = p.clamp(0.0, 1.0) * cum[cum.len() - 1];
    let k = cum.partition_point(|&c| c < target).clamp(1, xs.len() - 1) - 1;
    let h = xs[k + 1] - xs[k];
    let need = target - cum[k];
    let slope = (fs[k + 1] - fs[k]) / h;
    let u = if need <= 0.0 {
        0.0
    } else if slope.abs() * h <= 1e-14 * fs[k].abs() {
        need / fs[k]
    } else {
        let disc = (fs[k] * fs[k] + 2.0 * slope * need).max(0.0);
        2.0 * need / (fs[k] + disc.sqrt())
    };
    xs[k] + u.clamp(0.0, h)
}

/// Semicircle law of the given variance centred at `center`.
pub fn semicircle_cdf(center: f64, variance: f64, x: f64) -> f64 {
    semiellipse_cdf(center, 2.0 * variance.sqrt(), x)
}

/// Law with density proportional to `√(A² − (x−c)²)` on `[c−A, c+A]`.
pub fn semiellipse_cdf(center: f64, half_width: f64, x: f64) -> f64 {
    let u = ((x - center) / half_width).clamp(-1.0, 1.0);
    0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI
}

/// Kolmogorov–Smirnov distance `sup |F_n − F|` between the empirical law of
/// `samples` and a continuous distribution function.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Kolmogorov–Smirnov distance for a weighted sample.
pub fn ks_weighted(samples: &[(f64, f64)], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = xs.iter().map(|p| p.1).sum();
    let mut below = 0.0;
    let mut d: f64 = 0.0;
    for (x, w) in xs {
        let f = cdf(x);
        d = d.max(f - below / total);
        below += w;
        d = d.max(below / total - f);
    }
    d
}
