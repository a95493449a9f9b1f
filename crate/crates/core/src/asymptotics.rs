//! Large-`s` behaviour: edges of the positivity set, the ellipse shape of the
//! boundary, flattening of the density, and the `s = t/2` regime.
//!
//! Bounds are stated for a centred law of unit variance. Here the law is
//! centred at its mean `m` and the bounds are scaled back with its variance
//! `σ²`, so e.g. the edge bound `3c/(2√s)` becomes `3cσ²/(2√s)`. A point mass
//! has `σ² = 0`; its measured errors are pure round-off and are compared with
//! [`SLACK`] instead.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::biane::{BianeData, BoundaryPoint};
use crate::elliptic::{a_from_point, density_from_point, EllipticParams};
use crate::error::Result;
use crate::measure::Law;
use crate::roots;

/// Absolute allowance for round-off when comparing with a bound.
pub const SLACK: f64 = 1e-9;

/// Ladder of `s` values scanned for the onset of each bound.
pub const LADDER: [f64; 4] = [25.0, 100.0, 400.0, 1600.0];

const PHI_POINTS: usize = 181;
const DENSITY_POINTS: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `t/s` fixed as `s → ∞`.
    FixedRatio,
    /// `t` fixed as `s → ∞`.
    FixedT,
    /// `t = 2s`.
    Skew,
    /// `s = t`: the circular case.
    Circular,
}

/// One measured error and the bound it is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub s: f64,
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Record {
    fn new(s: f64, t: f64, measured: f64, bound: f64) -> Record {
        Record {
            s,
            t,
            measured,
            bound,
            pass: measured <= bound + SLACK,
        }
    }
}

fn centred(law: &Law) -> (f64, f64) {
    (law.mean(), law.variance())
}

/// Distance of the edges of `{v > 0}` from `m ± √s`, against `3cσ²/(2√s)`.
pub fn check_endpoints_circular(law: &Law, s: f64, c: f64) -> Result<Record> {
    let (m, var) = centred(law);
    let biane = BianeData::new(law.clone(), s)?;
    let l = biane.lambda();
    let root = s.sqrt();
    let gap = (l.hi - (m + root)).abs().max((l.lo - (m - root)).abs());
    Ok(Record::new(s, s, gap, 3.0 * c * var / (2.0 * root)))
}

/// Largest distance between the boundary point `U(α + iv(α))` and the ellipse
/// point `m + ((2s−t)/√s)cos φ + i(t/√s)sin φ`, where `ψ(α) = m + 2√s cos φ`
/// and `φ ∈ [φ₀, π − φ₀]`; the bound is `σ²r/(√s sin φ₀)`.
pub fn check_ellipse_boundary(law: &Law, params: EllipticParams, phi0: f64) -> Result<Record> {
    let (m, var) = centred(law);
    let (s, t) = (params.s(), params.t());
    let biane = BianeData::new(law.clone(), s)?;
    let root = s.sqrt();
    let deviations = (0..PHI_POINTS)
        .into_par_iter()
        .map(|k| {
            let phi = phi0 + (PI - 2.0 * phi0) * k as f64 / (PHI_POINTS - 1) as f64;
            let alpha = biane.psi_inverse(m + 2.0 * root * phi.cos())?;
            let p = biane.point(alpha)?;
            let (a, b) = (a_from_point(&params, &p), params.r() * p.v);
            let (ea, eb) = (m + (2.0 * s - t) / root * phi.cos(), t / root * phi.sin());
            Ok((a - ea).hypot(b - eb))
        })
        .collect::<Result<Vec<f64>>>()?;
    let dev = deviations.into_iter().fold(0.0, f64::max);
    Ok(Record::new(s, t, dev, var * params.r() / (root * phi0.sin())))
}

/// Points over `{α : |ψ(α) − m| < 2√s cos φ₀}`, the bulk region of the density
/// checks.
fn bulk_points(biane: &BianeData, m: f64, phi0: f64) -> Result<Vec<BoundaryPoint>> {
    let reach = 2.0 * biane.s().sqrt() * phi0.cos();
    let lo = biane.psi_inverse(m - reach)?;
    let hi = biane.psi_inverse(m + reach)?;
    (0..DENSITY_POINTS)
        .into_par_iter()
        .map(|k| biane.point(lo + (hi - lo) * (k as f64 + 0.5) / DENSITY_POINTS as f64))
        .collect()
}

/// Largest deviation of the density from its flat limit over the bulk region.
///
/// * [`Regime::FixedRatio`]: limit `s/(π(2s−t)t)`, bound
///   `cσ²/(π(2s−t)²)·(6 + 1/sin³φ₀)`;
/// * [`Regime::FixedT`]: limit `1/(2πt)`, bound `c/(4πs)`.
///
/// Other regimes fall back to the fixed-ratio bound.
pub fn check_density_flat(law: &Law, params: EllipticParams, c: f64, phi0: f64, regime: Regime) -> Result<Record> {
    let (m, var) = centred(law);
    let (s, t) = (params.s(), params.t());
    let biane = BianeData::new(law.clone(), s)?;
    let (limit, bound) = match regime {
        Regime::FixedT => (1.0 / (2.0 * PI * t), c / (4.0 * PI * s)),
        _ => (
            s / (PI * (2.0 * s - t) * t),
            c * var / (PI * (2.0 * s - t).powi(2)) * (6.0 + phi0.sin().powi(-3)),
        ),
    };
    let dev = bulk_points(&biane, m, phi0)?
        .iter()
        .filter(|p| p.v > 0.0)
        .map(|p| (density_from_point(&params, p) - limit).abs())
        .fold(0.0, f64::max);
    Ok(Record::new(s, t, dev, bound))
}

/// The two `t = 2s` measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewRecord {
    /// Distance of the ends of `Ω ∩ ℝ` from `m`, against `4cσ²/√s`.
    pub endpoints: Record,
    /// `|sup b − 2√s|`, against `2cσ²/√s`.
    pub height: Record,
}

pub fn check_skew_regime(law: &Law, s: f64, c: f64) -> Result<SkewRecord> {
    let (m, var) = centred(law);
    let t = 2.0 * s;
    let biane = BianeData::new(law.clone(), s)?;
    let root = s.sqrt();
    let l = biane.lambda();
    // with t = 2s, a(α) = α − s∫(α−x)/D dν = 2α − ψ(α)
    let a_at = |alpha: f64| -> Result<f64> { Ok(2.0 * alpha - biane.psi(alpha)?) };
    let gap = (a_at(l.lo)? - m).abs().max((a_at(l.hi)? - m).abs());

    let scan = biane.scan_v(4096)?;
    let k = (0..scan.len()).max_by(|&i, &j| scan[i].1.total_cmp(&scan[j].1)).unwrap_or(0);
    let (lo, hi) = (scan[k.saturating_sub(1)].0, scan[(k + 1).min(scan.len() - 1)].0);
    let (_, v_max) = roots::golden_max(|a| biane.v(a), lo, hi, 1e-12)?;
    let sup_b = 2.0 * v_max.max(scan[k].1);

    Ok(SkewRecord {
        endpoints: Record::new(s, t, gap, 4.0 * c * var / root),
        height: Record::new(s, t, (sup_b - 2.0 * root).abs(), 2.0 * c * var / root),
    })
}

/// Whether `v` sampled on 4096 points rises then falls; differences of at most
/// `1e-12` are ignored.
pub fn check_unimodal(law: &Law, s: f64) -> Result<bool> {
    let biane = BianeData::new(law.clone(), s)?;
    let scan = biane.scan_v(4096)?;
    let signs: Vec<bool> = scan
        .windows(2)
        .map(|p| p[1].1 - p[0].1)
        .filter(|d| d.abs() > 1e-12)
        .map(|d| d > 0.0)
        .collect();
    let changes = signs.windows(2).filter(|p| p[0] != p[1]).count();
    Ok(match changes {
        0 => true,
        1 => signs[0],
        _ => false,
    })
}

/// `s ≥ 4·diam(supp ν)²`, beyond which `v` is known to be unimodal.
pub fn unimodal_threshold(law: &Law) -> f64 {
    4.0 * law.diameter().powi(2)
}

/// Which quantity a ladder scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum LadderCheck {
    CircularEndpoints { c: f64 },
    EllipseBoundary { ratio: f64, phi0: f64 },
    DensityFixedRatio { ratio: f64, c: f64, phi0: f64 },
    DensityFixedT { t: f64, c: f64, phi0: f64 },
    SkewEndpoints { c: f64 },
    SkewHeight { c: f64 },
}

impl LadderCheck {
    pub fn regime(&self) -> Regime {
        match self {
            LadderCheck::CircularEndpoints { .. } => Regime::Circular,
            LadderCheck::EllipseBoundary { .. } | LadderCheck::DensityFixedRatio { .. } => Regime::FixedRatio,
            LadderCheck::DensityFixedT { .. } => Regime::FixedT,
            LadderCheck::SkewEndpoints { .. } | LadderCheck::SkewHeight { .. } => Regime::Skew,
        }
    }

    pub fn run(&self, law: &Law, s: f64) -> Result<Record> {
        match *self {
            LadderCheck::CircularEndpoints { c } => check_endpoints_circular(law, s, c),
            LadderCheck::EllipseBoundary { ratio, phi0 } => {
                check_ellipse_boundary(law, EllipticParams::new(s, ratio * s)?, phi0)
            }
            LadderCheck::DensityFixedRatio { ratio, c, phi0 } => {
                check_density_flat(law, EllipticParams::new(s, ratio * s)?, c, phi0, Regime::FixedRatio)
            }
            LadderCheck::DensityFixedT { t, c, phi0 } => {
                check_density_flat(law, EllipticParams::new(s, t)?, c, phi0, Regime::FixedT)
            }
            LadderCheck::SkewEndpoints { c } => Ok(check_skew_regime(law, s, c)?.endpoints),
            LadderCheck::SkewHeight { c } => Ok(check_skew_regime(law, s, c)?.height),
        }
    }
}

/// A check run along a ladder of `s` values.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeCheck {
    pub regime: Regime,
    #[serde(flatten)]
    pub check: LadderCheck,
    pub s_values: Vec<f64>,
    pub records: Vec<Record>,
    /// Smallest ladder value from which the bound holds at every larger value;
    /// `None` if it fails at the top of the ladder.
    pub onset: Option<f64>,
    /// Least-squares slope of `log(measured)` against `log s`, when every
    /// measurement is positive.
    pub loglog_slope: Option<f64>,
}

impl RegimeCheck {
    /// Whether the bound holds at the largest `s`.
    pub fn passes_at_top(&self) -> bool {
        self.records.last().is_some_and(|r| r.pass)
    }
}

pub fn run_ladder(law: &Law, check: LadderCheck, s_values: &[f64]) -> Result<RegimeCheck> {
    let mut s_values = s_values.to_vec();
    s_values.sort_by(f64::total_cmp);
    let records = s_values
        .par_iter()
        .map(|&s| check.run(law, s))
        .collect::<Result<Vec<_>>>()?;
    let onset = records
        .iter()
        .rposition(|r| !r.pass)
        .map_or(Some(0), |k| (k + 1 < records.len()).then_some(k + 1))
        .map(|k| records[k].s);
    let loglog_slope = records.iter().all(|r| r.measured > 0.0).then(|| {
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.s.ln(), r.measured.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(RegimeCheck {
        regime: check.regime(),
        check,
        s_values,
        records,
        onset,
        loglog_slope: loglog_slope.filter(|x| x.is_finite()),
    })
}

/// Unimodality of `v` at each `s`.
#[derive(Debug, Clone, Serialize)]
pub struct UnimodalRecord {
    pub s: f64,
    pub threshold: f64,
    pub unimodal: bool,
}

pub fn unimodal_ladder(law: &Law, s_values: &[f64]) -> Result<Vec<UnimodalRecord>> {
    let threshold = unimodal_threshold(law);
    s_values
        .par_iter()
        .map(|&s| {
            Ok(UnimodalRecord {
                s,
                threshold,
                unimodal: check_unimodal(law, s)?,
            })
        })
        .collect()
}

/// The default battery: every ladder check with the constants used in the
/// test suite.
pub fn standard_checks() -> Vec<LadderCheck> {
    vec![
        LadderCheck::CircularEndpoints { c: 1.5 },
        LadderCheck::EllipseBoundary {
            ratio: 0.5,
            phi0: PI / 6.0,
        },
        LadderCheck::DensityFixedRatio {
            ratio: 0.5,
            c: 2.0,
            phi0: PI / 4.0,
        },
        LadderCheck::DensityFixedT {
            t: 1.0,
            c: 2.0,
            phi0: PI / 4.0,
        },
        LadderCheck::SkewEndpoints { c: 1.5 },
        LadderCheck::SkewHeight { c: 1.5 },
    ]
}
