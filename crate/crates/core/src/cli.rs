//! The `brownlab` command line.
//!
//! Exit codes: 0 success, 1 an internal check on the output failed (mass or
//! mean of a field off by more than `1e-4`), 2 bad input or parameters,
//! 3 a root-find or the eigensolver failed, 4 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::asymptotics::{self, RegimeCheck, UnimodalRecord, LADDER};
use crate::elliptic::{build_field, degenerate_semicircle, BrownDensityField, EllipticParams};
use crate::error::{Error, Result};
use crate::measure::{self, Law};
use crate::pushforward::{self, PushforwardReport};
use crate::rmt::{self, EnsembleSpec};

/// Tolerance of the mass and mean checks on a built field.
pub const FIELD_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "brownlab", version, about = "Brown measures of self-adjoint plus free elliptic elements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fiber density over the a-grid (columns a, alpha, b, w).
    Density(FieldArgs),
    /// Upper boundary b(a) of the support (columns a, b).
    Boundary(FieldArgs),
    /// Kolmogorov–Smirnov checks of the two push-forward maps.
    Pushforward(PushforwardArgs),
    /// Eigenvalues of the matrix model compared with the Brown measure.
    Rmt(RmtArgs),
    /// Large-s checks along the ladder 25, 100, 400, 1600.
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// JSON measure file, or a text file of samples, one per line.
    #[arg(long, value_name = "PATH")]
    pub measure: Option<PathBuf>,
    /// Inline atoms "x:w,x:w,...".
    #[arg(long, value_name = "ATOMS", allow_hyphen_values = true)]
    pub atoms: Option<String>,
}

impl Source {
    pub fn load(&self) -> Result<Law> {
        match (&self.measure, &self.atoms) {
            (Some(path), _) => measure::ingest(path),
            (None, Some(text)) => measure::parse_inline_atoms(text),
            (None, None) => Err(Error::Validation("one of --measure or --atoms is required".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl Output {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct PushforwardArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub t: f64,
    /// Number of sampled points.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct RmtArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub t: f64,
    /// Matrix dimension.
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid of the reference field.
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Also write the eigenvalues (re,im,trial) to this file.
    #[arg(long, value_name = "PATH")]
    pub eigenvalues: Option<PathBuf>,
    /// Run with s = t/2, where convergence is not established.
    #[arg(long)]
    pub allow_degenerate: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub output: Output,
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("BROWNLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore the error if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("brownlab: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Density(a) => cmd_density(a),
        Command::Boundary(a) => cmd_boundary(a),
        Command::Pushforward(a) => cmd_pushforward(a),
        Command::Rmt(a) => cmd_rmt(a),
        Command::Asymptotics(a) => cmd_asymptotics(a),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_json(out: &Output, value: &impl Serialize) -> Result<()> {
    let mut w = out.writer()?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct FieldChecks {
    mass: f64,
    mean: f64,
    law_mean: f64,
    pass: bool,
}

fn field_checks(field: &BrownDensityField) -> FieldChecks {
    let mass = field.total_mass();
    let mean = field.holomorphic_mean().re;
    let law_mean = field.law().mean();
    FieldChecks {
        mass,
        mean,
        law_mean,
        pass: (mass - 1.0).abs() <= FIELD_CHECK_TOL && (mean - law_mean).abs() <= FIELD_CHECK_TOL,
    }
}

#[derive(Debug, Serialize)]
struct DensityRow {
    a: f64,
    alpha: f64,
    b: f64,
    w: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FieldReport {
    schema_version: &'static str,
    s: f64,
    t: f64,
    law: String,
    omega: (f64, f64),
    checks: FieldChecks,
    rows: Vec<DensityRow>,
}

#[derive(Debug, Serialize)]
struct DegenerateReport {
    schema_version: &'static str,
    s: f64,
    t: f64,
    atom: f64,
    /// `(b, density)` of the semicircle on the vertical line through the atom.
    rows: Vec<(f64, f64)>,
}

enum Built {
    Field(Box<BrownDensityField>),
    Degenerate { atom: f64, params: EllipticParams },
}

fn build(source: &Source, s: f64, t: f64, grid: usize) -> Result<Built> {
    let law = source.load()?;
    let params = EllipticParams::new(s, t)?;
    match build_field(&law, params, grid) {
        Ok(f) => Ok(Built::Field(Box::new(f))),
        Err(Error::Degenerate { atom, .. }) => Ok(Built::Degenerate { atom, params }),
        Err(e) => Err(e),
    }
}

fn write_degenerate(out: &Output, atom: f64, params: EllipticParams, grid: usize) -> Result<i32> {
    let rows = degenerate_semicircle(params.t(), grid);
    if out.format == Some(Format::Json) {
        write_json(
            out,
            &DegenerateReport {
                schema_version: "1",
                s: params.s(),
                t: params.t(),
                atom,
                rows,
            },
        )?;
    } else {
        let mut w = out.writer()?;
        writeln!(
            w,
            "# s={} t={} degenerate: semicircle of variance t/2 on the line a={}",
            num(params.s()),
            num(params.t()),
            num(atom)
        )?;
        writeln!(w, "a,b,density")?;
        for (b, d) in rows {
            writeln!(w, "{},{},{}", num(atom), num(b), num(d))?;
        }
        w.flush()?;
    }
    Ok(0)
}

fn field_header(w: &mut dyn Write, field: &BrownDensityField, checks: &FieldChecks) -> Result<()> {
    let p = field.params();
    writeln!(
        w,
        "# s={} t={} mass={} mean={} check={}",
        num(p.s()),
        num(p.t()),
        num(checks.mass),
        num(checks.mean),
        if checks.pass { "pass" } else { "fail" }
    )?;
    Ok(())
}

pub fn cmd_density(args: &FieldArgs) -> Result<i32> {
    let field = match build(&args.source, args.s, args.t, args.grid)? {
        Built::Field(f) => f,
        Built::Degenerate { atom, params } => return write_degenerate(&args.output, atom, params, args.grid),
    };
    let checks = field_checks(&field);
    let code = i32::from(!checks.pass);
    let rows = field
        .a_grid()
        .iter()
        .zip(field.alpha_grid())
        .zip(field.b_values())
        .zip(field.w_values())
        .map(|(((&a, &alpha), &b), &w)| DensityRow { a, alpha, b, w });
    if args.output.format == Some(Format::Json) {
        let p = field.params();
        write_json(
            &args.output,
            &FieldReport {
                schema_version: "1",
                s: p.s(),
                t: p.t(),
                law: field.law().describe(),
                omega: field.omega(),
                checks,
                rows: rows.collect(),
            },
        )?;
    } else {
        let mut w = args.output.writer()?;
        field_header(&mut w, &field, &checks)?;
        writeln!(w, "a,alpha,b,w")?;
        for r in rows {
            let dens = r.w.map(num).unwrap_or_default();
            writeln!(w, "{},{},{},{}", num(r.a), num(r.alpha), num(r.b), dens)?;
        }
        w.flush()?;
    }
    Ok(code)
}

pub fn cmd_boundary(args: &FieldArgs) -> Result<i32> {
    let field = match build(&args.source, args.s, args.t, args.grid)? {
        Built::Field(f) => f,
        Built::Degenerate { atom, params } => return write_degenerate(&args.output, atom, params, args.grid),
    };
    let checks = field_checks(&field);
    let code = i32::from(!checks.pass);
    let pairs: Vec<(f64, f64)> = field.a_grid().iter().copied().zip(field.b_values().iter().copied()).collect();
    if args.output.format == Some(Format::Json) {
        #[derive(Serialize)]
        struct BoundaryReport {
            schema_version: &'static str,
            s: f64,
            t: f64,
            law: String,
            omega: (f64, f64),
            checks: FieldChecks,
            /// `(a, b(a))` pairs.
            boundary: Vec<(f64, f64)>,
        }
        let p = field.params();
        write_json(
            &args.output,
            &BoundaryReport {
                schema_version: "1",
                s: p.s(),
                t: p.t(),
                law: field.law().describe(),
                omega: field.omega(),
                checks,
                boundary: pairs,
            },
        )?;
    } else {
        let mut w = args.output.writer()?;
        field_header(&mut w, &field, &checks)?;
        writeln!(w, "a,b")?;
        for (a, b) in pairs {
            writeln!(w, "{},{}", num(a), num(b))?;
        }
        w.flush()?;
    }
    Ok(code)
}

#[derive(Debug, Serialize)]
struct PushforwardSummary {
    schema_version: &'static str,
    /// Absent when ν is a point mass and s = t/2: the target measure is then
    /// carried by a vertical segment.
    u: Option<PushforwardReport>,
    q: PushforwardReport,
}

pub fn cmd_pushforward(args: &PushforwardArgs) -> Result<i32> {
    if args.output.format == Some(Format::Csv) {
        return Err(Error::Validation("pushforward reports are JSON only".into()));
    }
    let law = args.source.load()?;
    let params = EllipticParams::new(args.s, args.t)?;
    let u = match pushforward::verify_u_pushforward(&law, params, args.samples, args.seed) {
        Ok(r) => Some(r),
        Err(Error::Degenerate { .. }) => None,
        Err(e) => return Err(e),
    };
    let q = pushforward::verify_q_pushforward(&law, params, args.samples, args.seed)?;
    write_json(
        &args.output,
        &PushforwardSummary {
            schema_version: "1",
            u,
            q,
        },
    )?;
    Ok(0)
}

pub fn cmd_rmt(args: &RmtArgs) -> Result<i32> {
    let law = args.source.load()?;
    let params = EllipticParams::new(args.s, args.t)?;
    let spec = EnsembleSpec {
        n: args.n,
        trials: args.trials,
        law: law.clone(),
        params,
        seed: args.seed,
        allow_degenerate: args.allow_degenerate,
    };
    spec.validate()?;
    let sample = rmt::sample_ensemble(&spec)?;
    if let Some(path) = &args.eigenvalues {
        let mut w = BufWriter::new(File::create(path)?);
        sample.write_csv(&mut w)?;
        w.flush()?;
    }
    if args.output.format == Some(Format::Csv) {
        let mut w = args.output.writer()?;
        sample.write_csv(&mut w)?;
        w.flush()?;
        return Ok(0);
    }
    match build_field(&law, params, args.grid) {
        Ok(field) => write_json(&args.output, &rmt::compare_esd(&sample, &field)?)?,
        Err(Error::Degenerate { atom, .. }) => write_json(&args.output, &rmt::compare_degenerate(&sample, atom))?,
        Err(e) => return Err(e),
    }
    Ok(0)
}

#[derive(Debug, Serialize)]
struct AsymptoticsReport {
    schema_version: &'static str,
    law: String,
    mean: f64,
    variance: f64,
    ladder: Vec<RegimeCheck>,
    unimodal: Vec<UnimodalRecord>,
}

pub fn cmd_asymptotics(args: &AsymptoticsArgs) -> Result<i32> {
    if args.output.format == Some(Format::Csv) {
        return Err(Error::Validation("asymptotics reports are JSON only".into()));
    }
    let law = args.source.load()?;
    let ladder = asymptotics::standard_checks()
        .into_iter()
        .map(|c| asymptotics::run_ladder(&law, c, &LADDER))
        .collect::<Result<Vec<_>>>()?;
    let threshold = asymptotics::unimodal_threshold(&law);
    let mut s_values = vec![threshold];
    s_values.extend(LADDER.iter().filter(|&&s| s > threshold));
    let unimodal = asymptotics::unimodal_ladder(&law, &s_values)?;
    write_json(
        &args.output,
        &AsymptoticsReport {
            schema_version: "1",
            law: law.describe(),
            mean: law.mean(),
            variance: law.variance(),
            ladder,
            unimodal,
        },
    )?;
    Ok(0)
}
