//! Compactly supported probability measures on the real line.
//!
//! Every [`Law`] is stored as a finite quadrature rule `(x_k, w_k)`: atoms carry
//! their masses, gridded densities carry `density(x_k)` times the composite
//! trapezoid weight of node `k`. Integrals against the law are then plain
//! weighted sums, exact for atomic laws.
//!
//! Gridded densities are integrated with the trapezoid rule on the nodes the
//! caller supplies. Densities with steep edges (square-root vanishing, say) must
//! be given on nodes fine enough to resolve them; no refinement is attempted.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Atoms closer than this to an evaluation point are treated as coincident.
pub const ATOM_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    Atomic,
    GriddedDensity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Law {
    kind: LawKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Original grid and normalized density values, for gridded laws.
    grid: Option<(Vec<f64>, Vec<f64>)>,
    support: (f64, f64),
}

fn check_finite(label: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().find(|x| !x.is_finite()) {
        Some(x) => Err(Error::Validation(format!("non-finite {label}: {x}"))),
        None => Ok(()),
    }
}

impl Law {
    /// Builds an atomic law from `(location, weight)` pairs. Weights are
    /// normalized to total mass one; duplicate locations are merged.
    pub fn atomic(atoms: &[(f64, f64)]) -> Result<Law> {
        if atoms.is_empty() {
            return Err(Error::Validation("atomic law needs at least one atom".into()));
        }
        let xs: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let ws: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        check_finite("atom location", &xs)?;
        check_finite("atom weight", &ws)?;
        if let Some(w) = ws.iter().find(|w| **w < 0.0) {
            return Err(Error::Validation(format!("negative atom weight {w}")));
        }
        let total: f64 = ws.iter().sum();
        if total <= 0.0 {
            return Err(Error::Validation("atom weights sum to zero".into()));
        }

        let mut sorted: Vec<(f64, f64)> = atoms
            .iter()
            .filter(|a| a.1 > 0.0)
            .map(|&(x, w)| (x, w / total))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nodes: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut weights: Vec<f64> = Vec::with_capacity(sorted.len());
        for (x, w) in sorted {
            match nodes.last() {
                Some(&last) if last == x => *weights.last_mut().unwrap() += w,
                _ => {
                    nodes.push(x);
                    weights.push(w);
                }
            }
        }
        let support = (nodes[0], *nodes.last().unwrap());
        Ok(Law {
            kind: LawKind::Atomic,
            nodes,
            weights,
            grid: None,
            support,
        })
    }

    pub fn dirac(x: f64) -> Result<Law> {
        Law::atomic(&[(x, 1.0)])
    }

    /// Mass `1 - p` at `a` and `p` at `b`.
    pub fn bernoulli(p: f64, a: f64, b: f64) -> Result<Law> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!("bernoulli p = {p} outside [0, 1]")));
        }
        Law::atomic(&[(a, 1.0 - p), (b, p)])
    }

    /// Empirical measure of a sample: each observation gets weight `1/n`.
    pub fn empirical(samples: &[f64]) -> Result<Law> {
        if samples.is_empty() {
            return Err(Error::Validation("empty sample".into()));
        }
        check_finite("sample", samples)?;
        let w = 1.0 / samples.len() as f64;
        let atoms: Vec<(f64, f64)> = samples.iter().map(|&x| (x, w)).collect();
        Law::atomic(&atoms)
    }

    /// Law with density `values` on the strictly increasing `nodes`, normalized
    /// so that its trapezoid integral is one.
    pub fn gridded(nodes: &[f64], values: &[f64]) -> Result<Law> {
        if nodes.len() != values.len() {
            return Err(Error::Validation(format!(
                "density grid has {} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if nodes.len() < 2 {
            return Err(Error::Validation("density grid needs at least two nodes".into()));
        }
        check_finite("density node", nodes)?;
        check_finite("density value", values)?;
        if nodes.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Validation("density nodes must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::Validation(format!("negative density value {v}")));
        }
        let n = nodes.len();
        let mut cell = vec![0.0; n];
        for k in 0..n - 1 {
            let h = nodes[k + 1] - nodes[k];
            cell[k] += 0.5 * h;
            cell[k + 1] += 0.5 * h;
        }
        let raw: Vec<f64> = values.iter().zip(&cell).map(|(v, c)| v * c).collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::Validation("density integrates to zero".into()));
        }
        let (q_nodes, q_weights): (Vec<f64>, Vec<f64>) = nodes
            .iter()
            .zip(&raw)
            .filter(|(_, w)| **w > 0.0)
            .map(|(x, w)| (*x, w / total))
            .unzip();
        Ok(Law {
            kind: LawKind::GriddedDensity,
            nodes: q_nodes,
            weights: q_weights,
            grid: Some((nodes.to_vec(), values.iter().map(|v| v / total).collect())),
            support: (nodes[0], nodes[n - 1]),
        })
    }

    /// Semicircle law of the given variance, tabulated on `n_nodes`
    /// Chebyshev-spaced nodes (clustered at the square-root edges).
    pub fn semicircle(variance: f64, n_nodes: usize) -> Result<Law> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::Validation(format!("semicircle variance {variance} must be positive")));
        }
        let n = n_nodes.max(3);
        let radius = 2.0 * variance.sqrt();
        let nodes: Vec<f64> = (0..n)
            .map(|k| -radius * (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())
            .collect();
        let values: Vec<f64> = nodes
            .iter()
            .map(|x| (4.0 * variance - x * x).max(0.0).sqrt() / (2.0 * std::f64::consts::PI * variance))
            .collect();
        Law::gridded(&nodes, &values)
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    /// Quadrature nodes with strictly positive weight.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Original nodes and normalized density values, for gridded laws.
    pub fn density_grid(&self) -> Option<(&[f64], &[f64])> {
        self.grid.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()))
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Largest distance between two points of the support.
    pub fn diameter(&self) -> f64 {
        self.support.1 - self.support.0
    }

    /// Largest `|x|` over the support.
    pub fn radius(&self) -> f64 {
        self.support.0.abs().max(self.support.1.abs())
    }

    /// The point mass location, if the law is a single atom.
    pub fn single_atom(&self) -> Option<f64> {
        (self.nodes.len() == 1).then(|| self.nodes[0])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ f dν`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// `∫ xⁿ dν`, for `n ≤ 64`. The zeroth moment is exactly one.
    pub fn moment(&self, n: u32) -> f64 {
        assert!(n <= 64, "moment order {n} exceeds 64");
        if n == 0 {
            return 1.0;
        }
        self.integrate(|x| x.powi(n as i32))
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// Second central moment.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x| (x - m) * (x - m))
    }

    /// Cauchy transform `G(z) = ∫ dν(x) / (z - x)`.
    pub fn cauchy_transform(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && z.re >= self.support.0 && z.re <= self.support.1 {
            return Err(Error::Domain(format!(
                "Cauchy transform evaluated at {} on the support [{}, {}]",
                z.re, self.support.0, self.support.1
            )));
        }
        Ok(self.iter().map(|(x, w)| w / (z - x)).sum())
    }

    /// `∫ dν(x) / (α - x)²`, taken as `+∞` when an atom sits at `α`.
    pub fn inverse_square_mass(&self, alpha: f64) -> f64 {
        let mut acc = 0.0;
        for (x, w) in self.iter() {
            let d = alpha - x;
            if d.abs() <= ATOM_EPS {
                return f64::INFINITY;
            }
            acc += w / (d * d);
        }
        acc
    }

    /// Left-continuous quantile `inf{x : F(x) ≥ p}`. Gridded laws interpolate
    /// the trapezoid CDF linearly between nodes.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match self.kind {
            LawKind::Atomic => {
                let mut acc = 0.0;
                for (x, w) in self.iter() {
                    acc += w;
                    if acc >= p - 1e-15 {
                        return x;
                    }
                }
                self.support.1
            }
            LawKind::GriddedDensity => {
                let (xs, fs) = self.density_grid().expect("gridded law keeps its grid");
                let mut acc = 0.0;
                for k in 0..xs.len() - 1 {
                    let h = xs[k + 1] - xs[k];
                    let cell = 0.5 * h * (fs[k] + fs[k + 1]);
                    if acc + cell >= p && cell > 0.0 {
                        // density f0 + (f1 − f0)u/h on the cell; solve the quadratic
                        // f0·u + (f1 − f0)u²/(2h) = p − acc for u ∈ [0, h]
                        let need = p - acc;
                        let slope = (fs[k + 1] - fs[k]) / h;
                        let u = if slope.abs() < 1e-300 {
                            need / fs[k]
                        } else {
                            let disc = (fs[k] * fs[k] + 2.0 * slope * need).max(0.0);
                            2.0 * need / (fs[k] + disc.sqrt())
                        };
                        return xs[k] + u.clamp(0.0, h);
                    }
                    acc += cell;
                }
                self.support.1
            }
        }
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        match self.kind {
            LawKind::Atomic => {
                let atoms: Vec<String> = self
                    .iter()
                    .take(8)
                    .map(|(x, w)| format!("{x}:{w}"))
                    .collect();
                let more = if self.nodes.len() > 8 { ",..." } else { "" };
                format!("atoms[{}]({}{more})", self.nodes.len(), atoms.join(","))
            }
            LawKind::GriddedDensity => format!(
                "density[{} nodes on [{}, {}]]",
                self.nodes.len(),
                self.support.0,
                self.support.1
            ),
        }
    }
}

#[derive(Debug, Deserialize)]
struct DensitySpec {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum MeasureSpec {
    Atoms { atoms: Vec<(f64, f64)> },
    Density { density: DensitySpec },
    Samples { samples: Vec<f64> },
    Builtin {
        builtin: String,
        #[serde(default)]
        variance: Option<f64>,
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        a: Option<f64>,
        #[serde(default)]
        b: Option<f64>,
    },
}

/// Node count used for the builtin semicircle.
pub const BUILTIN_SEMICIRCLE_NODES: usize = 4097;

/// Parses a JSON measure spec, e.g. `{"atoms":[[-1,0.5],[1,0.5]]}` or
/// `{"builtin":"semicircle","variance":1}`.
pub fn parse_measure_json(text: &str) -> Result<Law> {
    let spec: MeasureSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("measure spec: {e}")))?;
    match spec {
        MeasureSpec::Atoms { atoms } => Law::atomic(&atoms),
        MeasureSpec::Density { density } => Law::gridded(&density.nodes, &density.values),
        MeasureSpec::Samples { samples } => Law::empirical(&samples),
        MeasureSpec::Builtin {
            builtin,
            variance,
            p,
            a,
            b,
        } => match builtin.as_str() {
            "semicircle" => Law::semicircle(variance.unwrap_or(1.0), BUILTIN_SEMICIRCLE_NODES),
            "bernoulli" => Law::bernoulli(p.unwrap_or(0.5), a.unwrap_or(-1.0), b.unwrap_or(1.0)),
            "dirac" => Law::dirac(a.unwrap_or(0.0)),
            other => Err(Error::Parse(format!("unknown builtin law '{other}'"))),
        },
    }
}

/// Parses a plain-text sample: one real per line; blank lines and lines
/// starting with `#` are skipped.
pub fn parse_sample_text(text: &str) -> Result<Law> {
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let x: f64 = line
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: '{line}' is not a real number", lineno + 1)))?;
        samples.push(x);
    }
    Law::empirical(&samples)
}

/// Parses the inline form `"x:w,x:w,..."`.
pub fn parse_inline_atoms(text: &str) -> Result<Law> {
    let mut atoms = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (x, w) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("atom '{item}' is not of the form x:w")))?;
        let x: f64 = x.trim().parse().map_err(|_| Error::Parse(format!("bad location in '{item}'")))?;
        let w: f64 = w.trim().parse().map_err(|_| Error::Parse(format!("bad weight in '{item}'")))?;
        atoms.push((x, w));
    }
    Law::atomic(&atoms)
}

/// Reads a law from a file: JSON measure spec if the content starts with `{`,
/// plain-text sample otherwise.
pub fn ingest(path: &Path) -> Result<Law> {
    let text = fs::read_to_string(path)?;
    ingest_str(&text)
}

pub fn ingest_str(text: &str) -> Result<Law> {
    if text.trim_start().starts_with('{') {
        parse_measure_json(text)
    } else {
        parse_sample_text(text)
    }
}
