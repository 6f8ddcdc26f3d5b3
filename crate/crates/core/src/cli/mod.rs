//! Command-line front end: problem ingestion, dispatch and CSV/JSON output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 construction error,
//! 4 convergence failure or eigenvalue shortfall.

pub mod builtins;
pub mod config;
pub mod expr;
pub mod samples;

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::chebfun::C64;
use crate::error::{Error, ErrorCategory, Result};
use crate::nsbf::KernelKind;
use crate::spectral::{
    quantum_well, BoundaryCondition, ClosedForm, Discretization, EigenResult, Mode, Potential, SpectralProblem,
};
use crate::spps::sanity_ratio_to;
use builtins::{builtin, Hints, Kind, ProblemDef};
use config::{parse_interval, BcSpec, ConfigFile};
use expr::{constant, Expression};
use samples::Samples;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e.category() {
        ErrorCategory::Config => EXIT_CONFIG,
        ErrorCategory::Construction => EXIT_CONSTRUCTION,
        ErrorCategory::Convergence => EXIT_CONVERGENCE,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sltransmute",
    version,
    about = "Sturm-Liouville problems via transmutation kernels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues of the spectral problem (bound states for well builtins).
    Eigs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Spectral shift λ* (constant expression).
        #[arg(long, allow_hyphen_values = true)]
        shift: Option<String>,
        /// Only roots with Re ω below this value.
        #[arg(long)]
        omega_max: Option<f64>,
    },
    /// Solution of the initial value problem at a given λ.
    Ivp {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// y at the left end.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        y0: String,
        /// y' at the left end.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        y1: String,
        /// Number of equally spaced sample points.
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Bound states of the whole-line operator with `q` on the interval.
    Qwell {
        #[command(flatten)]
        common: Common,
        /// β search range "lo,hi" (λ = -β²).
        #[arg(long)]
        beta_range: Option<String>,
    },
    /// Approximate transmutation kernel on a triangular grid.
    Kernel {
        #[command(flatten)]
        common: Common,
        /// Grid divisions along x.
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
    /// φ_k(b)/b^k ratios, or fit errors over a range of N.
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// "start:end:step" sweep of N.
        #[arg(long)]
        n_sweep: Option<String>,
        /// Take the φ_k/x^k ratios at this point (native coordinates) from
        /// a single basis built on [a, x]. Default: right end of the first
        /// segment.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML run file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in problem, e.g. `paine1` or `coffey_evans(50)`.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Potential as an expression in x.
    #[arg(long, allow_hyphen_values = true)]
    pub potential: Option<String>,
    /// Potential samples file (`x, re[, im]` rows).
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Interval "a,b".
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<String>,
    /// `dirichlet`, `neumann` or `alpha=EXPR,beta=EXPR[,kappa=EXPR]` in omega.
    #[arg(long)]
    pub bc_left: Option<String>,
    #[arg(long)]
    pub bc_right: Option<String>,
    /// Chebyshev degree M.
    #[arg(short = 'm', long = "m")]
    pub m: Option<usize>,
    /// Kernel order N.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    /// SPPS truncation K.
    #[arg(short = 'k', long = "k")]
    pub k: Option<usize>,
    /// Number of subintervals with separate bases.
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A fully resolved problem in native coordinates plus run settings.
pub struct Setup {
    pub def: ProblemDef,
    pub disc: Discretization,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub file: ConfigFile,
}

impl Setup {
    pub fn resolve(common: &Common) -> Result<Self> {
        let file = match &common.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let pr = &file.problem;
        let interval = common.interval.clone().or_else(|| pr.interval.clone());
        let interval = interval.as_deref().map(parse_interval).transpose()?;

        let cli_src = [
            common.builtin.is_some(),
            common.potential.is_some(),
            common.samples.is_some(),
        ];
        let file_src = [pr.builtin.is_some(), pr.potential.is_some(), pr.samples_file.is_some()];
        let pick = if cli_src.iter().any(|&b| b) { cli_src } else { file_src };
        if pick.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::Config(
                "give exactly one of builtin, potential or samples".into(),
            ));
        }
        let builtin_spec = common.builtin.clone().or_else(|| pr.builtin.clone());
        let expr_spec = common.potential.clone().or_else(|| pr.potential.clone());
        let samples_spec = common.samples.clone().or_else(|| pr.samples_file.clone());

        let mut def = if pick[0] {
            let mut d = builtin(builtin_spec.as_deref().unwrap_or_default())?;
            if let Some((a, b)) = interval {
                d.a = a;
                d.b = b;
            }
            d
        } else if pick[1] {
            let text = expr_spec.unwrap_or_default();
            let (a, b) = interval.ok_or_else(|| Error::Config("an expression potential needs an interval".into()))?;
            user_problem(text.clone(), a, b, Expression::parse(&text, "x")?.into_fn())
        } else {
            let path = samples_spec.unwrap_or_default();
            let s = Samples::load(&path)?;
            let (a, b) = interval.unwrap_or_else(|| s.span());
            s.check_span(a, b)?;
            user_problem(path.display().to_string(), a, b, s.into_fn())
        };

        let bc = |flag: &Option<String>, file_bc: &Option<BcSpec>| -> Result<Option<BoundaryCondition>> {
            match (flag, file_bc) {
                (Some(t), _) => Ok(Some(BcSpec::parse_flag(t)?.build()?)),
                (None, Some(s)) => Ok(Some(s.build()?)),
                (None, None) => Ok(None),
            }
        };
        if let Some(l) = bc(&common.bc_left, &pr.bc_left)? {
            def.left = l;
        }
        if let Some(r) = bc(&common.bc_right, &pr.bc_right)? {
            def.right = r;
        }

        let run = &file.run;
        let base = Discretization::default();
        let hints = def.hints;
        let disc = Discretization {
            m: common.m.or(run.m).or(hints.m).unwrap_or(base.m),
            n: common.n.or(run.n).or(hints.n).unwrap_or(base.n),
            k: common.k.or(run.k),
            segments: common.segments.or(run.segments).or(hints.segments).unwrap_or(1),
        };
        disc.validate()?;
        let format = match (common.format, file.output.format.as_deref()) {
            (Some(f), _) => f,
            (None, None) => Format::Csv,
            (None, Some(s)) => {
                Format::from_str(s, true).map_err(|_| Error::Config(format!("unknown output format '{s}'")))?
            }
        };
        let out = common.out.clone().or_else(|| file.output.out.clone());
        Ok(Self {
            def,
            disc,
            format,
            out,
            file,
        })
    }

    /// The problem moved to `[0, b - a]`.
    pub fn build(&self, disc: Discretization) -> Result<SpectralProblem> {
        let d = &self.def;
        let a = d.a;
        let q = d.q.clone();
        let q: Potential = Arc::new(move |x| q(x + a));
        let len = d.b - d.a;
        match &d.particular {
            None => SpectralProblem::new(len, q, d.left.clone(), d.right.clone(), disc),
            Some(pf) => {
                let pf = pf.clone();
                let shifted: ClosedForm = Arc::new(move |x| pf(x + a));
                SpectralProblem::with_particular(len, q, d.left.clone(), d.right.clone(), disc, shifted)
            }
        }
    }
}

fn user_problem(name: String, a: f64, b: f64, q: Potential) -> ProblemDef {
    ProblemDef {
        name,
        a,
        b,
        q,
        particular: None,
        left: BoundaryCondition::dirichlet(),
        right: BoundaryCondition::dirichlet(),
        kind: Kind::Spectral,
        hints: Hints::default(),
    }
}

/// Rows of one output table.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
    fn json(&self) -> Value {
        match self {
            Cell::Int(k) => json!(k),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Flag(b) => json!(b),
        }
    }
}

impl Table {
    /// The CSV shows only `csv_cols` leading columns; JSON carries all.
    pub fn render(&self, format: Format, csv_cols: usize) -> String {
        match format {
            Format::Csv => {
                let mut s = self.columns[..csv_cols].join(",");
                s.push('\n');
                for r in &self.rows {
                    let line: Vec<String> = r[..csv_cols].iter().map(Cell::csv).collect();
                    s.push_str(&line.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            self.columns
                                .iter()
                                .zip(r)
                                .map(|(c, v)| (c.to_string(), v.json()))
                                .collect(),
                        )
                    })
                    .collect();
                let mut s =
                    serde_json::to_string_pretty(&json!({ "meta": self.meta, "rows": rows })).expect("serializable");
                s.push('\n');
                s
            }
        }
    }
}

fn meta(setup: &Setup, disc: Discretization, eps: (f64, f64), start: Instant) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("problem".into(), json!(setup.def.name));
    m.insert("interval".into(), json!([setup.def.a, setup.def.b]));
    m.insert("N".into(), json!(disc.n));
    m.insert("M".into(), json!(disc.m));
    m.insert("K".into(), json!(disc.spps_degree()));
    m.insert("segments".into(), json!(disc.segments));
    m.insert("eps1".into(), json!(eps.0));
    m.insert("eps2".into(), json!(eps.1));
    m.insert("runtime_ms".into(), json!(start.elapsed().as_secs_f64() * 1e3));
    m
}

const EIG_COLUMNS: [&str; 9] = [
    "index",
    "lambda_re",
    "lambda_im",
    "omega_re",
    "omega_im",
    "residual",
    "method",
    "cluster",
    "unconverged",
];

fn eigen_table(r: &EigenResult, shift: C64) -> Vec<Vec<Cell>> {
    (0..r.len())
        .map(|i| {
            let l = r.eigenvalues[i];
            let w = if shift == C64::new(0.0, 0.0) {
                r.omegas[i]
            } else {
                l.sqrt()
            };
            vec![
                Cell::Int(i),
                Cell::Num(l.re),
                Cell::Num(l.im),
                Cell::Num(w.re),
                Cell::Num(w.im),
                Cell::Num(r.residuals[i]),
                Cell::Text(r.methods[i].as_str().into()),
                Cell::Flag(r.flags[i].cluster),
                Cell::Flag(r.flags[i].unconverged),
            ]
        })
        .collect()
}

/// Output of one command: rendered text and the exit status it implies.
pub struct Outcome {
    pub text: String,
    pub status: i32,
    pub notes: Vec<String>,
}

fn eigen_outcome(setup: &Setup, disc: Discretization, r: &EigenResult, shift: C64, start: Instant) -> Outcome {
    let mut m = meta(setup, disc, (r.eps1, r.eps2), start);
    m.insert("shift".into(), json!([shift.re, shift.im]));
    m.insert("shortfall".into(), json!(r.shortfall));
    m.insert("warnings".into(), json!(r.warnings));
    let table = Table {
        columns: EIG_COLUMNS.to_vec(),
        rows: eigen_table(r, shift),
        meta: m,
    };
    let mut notes = vec![format!("eps1 = {:e}, eps2 = {:e}", r.eps1, r.eps2)];
    notes.extend(r.warnings.iter().cloned());
    Outcome {
        text: table.render(setup.format, 7),
        status: if r.shortfall > 0 { EXIT_CONVERGENCE } else { EXIT_OK },
        notes,
    }
}

fn parse_pair(text: &str) -> Result<(f64, f64)> {
    parse_interval(text)
}

fn parse_sweep(text: &str) -> Result<Vec<usize>> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<usize> {
        s.trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad sweep bound '{s}'")))
    };
    let (a, b, step) = match parts.as_slice() {
        [a, b] => (num(a)?, num(b)?, 1),
        [a, b, s] => (num(a)?, num(b)?, num(s)?),
        _ => return Err(Error::Config(format!("sweep '{text}' must be start:end[:step]"))),
    };
    if a == 0 || step == 0 || b < a {
        return Err(Error::Config(format!("sweep '{text}' is empty")));
    }
    Ok((a..=b).step_by(step).collect())
}

/// Runs one command and renders its output.
pub fn execute(cmd: &Command) -> Result<Outcome> {
    let start = Instant::now();
    match cmd {
        Command::Eigs {
            common,
            count,
            mode,
            shift,
            omega_max,
        } => {
            let setup = Setup::resolve(common)?;
            // wells default to every bound state
            let requested = count.or(setup.file.run.count);
            let count = requested.unwrap_or(10);
            let shift = match shift {
                Some(s) => constant(s)?,
                None => setup.file.shift()?.unwrap_or_default(),
            };
            let mode = match (mode, setup.file.run.mode.as_deref()) {
                (Some(m), _) => *m,
                (None, None) => ModeArg::Auto,
                (None, Some(s)) => {
                    ModeArg::from_str(s, true).map_err(|_| Error::Config(format!("unknown mode '{s}'")))?
                }
            };
            let mode = match mode {
                ModeArg::Auto => Mode::Auto,
                ModeArg::Real => Mode::RealScan,
                ModeArg::Complex => Mode::Complex,
            };
            let problem = setup.build(setup.disc)?;
            let mut r = if setup.def.kind == Kind::Well {
                quantum_well(&problem, None)?
            } else {
                let p = problem.spectral_shift(shift)?;
                p.find_eigenvalues_below(count, mode, *omega_max)?
            };
            let count = if setup.def.kind == Kind::Well {
                requested.unwrap_or(r.len())
            } else {
                count
            };
            if setup.def.kind == Kind::Well && r.len() < count {
                r.shortfall = count - r.len();
                r.warnings.push(format!("only {} bound states exist", r.len()));
            }
            if setup.def.kind == Kind::Well && r.len() > count {
                r.eigenvalues.truncate(count);
                r.omegas.truncate(count);
                r.methods.truncate(count);
                r.residuals.truncate(count);
                r.flags.truncate(count);
            }
            let shift = if setup.def.kind == Kind::Well {
                C64::default()
            } else {
                shift
            };
            Ok(eigen_outcome(&setup, setup.disc, &r, shift, start))
        }
        Command::Qwell { common, beta_range } => {
            let setup = Setup::resolve(common)?;
            let range = beta_range.as_deref().map(parse_pair).transpose()?;
            let problem = setup.build(setup.disc)?;
            let r = quantum_well(&problem, range)?;
            Ok(eigen_outcome(&setup, setup.disc, &r, C64::default(), start))
        }
        Command::Ivp {
            common,
            lambda,
            y0,
            y1,
            points,
        } => {
            let setup = Setup::resolve(common)?;
            if *points < 2 {
                return Err(Error::Config("--points must be at least 2".into()));
            }
            let (lambda, y0, y1) = (constant(lambda)?, constant(y0)?, constant(y1)?);
            let problem = setup.build(setup.disc)?;
            let len = problem.b();
            let xs: Vec<f64> = (0..*points).map(|j| len * j as f64 / (*points - 1) as f64).collect();
            let vals = problem.solve_ivp(lambda, y0, y1, &xs)?;
            let rows = xs
                .iter()
                .zip(vals)
                .map(|(&x, (y, dy))| {
                    vec![
                        Cell::Num(x + setup.def.a),
                        Cell::Num(y.re),
                        Cell::Num(y.im),
                        Cell::Num(dy.re),
                        Cell::Num(dy.im),
                    ]
                })
                .collect();
            let mut m = meta(&setup, setup.disc, problem.eps(), start);
            m.insert("lambda".into(), json!([lambda.re, lambda.im]));
            let t = Table {
                columns: vec!["x", "y_re", "y_im", "dy_re", "dy_im"],
                rows,
                meta: m,
            };
            Ok(Outcome {
                text: t.render(setup.format, 5),
                status: EXIT_OK,
                notes: vec![],
            })
        }
        Command::Kernel { common, grid } => {
            let setup = Setup::resolve(common)?;
            if setup.disc.segments != 1 {
                return Err(Error::Config("kernel output needs a single segment".into()));
            }
            if *grid < 1 {
                return Err(Error::Config("--grid must be at least 1".into()));
            }
            let problem = setup.build(setup.disc)?;
            let basis = problem.basis();
            let len = problem.b();
            let mut rows = Vec::new();
            for i in 0..=*grid {
                let x = len * i as f64 / *grid as f64;
                for j in 0..=i {
                    let t = if i == 0 {
                        0.0
                    } else {
                        x * (2.0 * j as f64 / i as f64 - 1.0)
                    };
                    let k = basis.kernel_eval(x, t.clamp(-x, x), KernelKind::Kf)?;
                    rows.push(vec![Cell::Num(x), Cell::Num(t), Cell::Num(k.re), Cell::Num(k.im)]);
                }
            }
            let t = Table {
                columns: vec!["x", "t", "k_re", "k_im"],
                rows,
                meta: meta(&setup, setup.disc, problem.eps(), start),
            };
            Ok(Outcome {
                text: t.render(setup.format, 4),
                status: EXIT_OK,
                notes: vec![],
            })
        }
        Command::Diagnose { common, n_sweep, x } => {
            let setup = Setup::resolve(common)?;
            match n_sweep {
                Some(spec) => {
                    let mut rows = Vec::new();
                    for n in parse_sweep(spec)? {
                        let disc = Discretization { n, ..setup.disc };
                        disc.validate()?;
                        let p = setup.build(disc)?;
                        let (e1, e2) = p.eps();
                        rows.push(vec![Cell::Int(n), Cell::Num(e1), Cell::Num(e2)]);
                    }
                    let t = Table {
                        columns: vec!["n", "eps1", "eps2"],
                        rows,
                        meta: meta(&setup, setup.disc, (f64::NAN, f64::NAN), start),
                    };
                    Ok(Outcome {
                        text: t.render(setup.format, 3),
                        status: EXIT_OK,
                        notes: vec![],
                    })
                }
                None => {
                    // φ_k(x) depends on q over [a, x] only; building there keeps
                    // the roundoff of the much larger values beyond x out
                    let mut setup = setup;
                    if let Some(v) = *x {
                        if !(v > setup.def.a && v <= setup.def.b) {
                            return Err(Error::Config(format!(
                                "--x must lie in ({}, {}]",
                                setup.def.a, setup.def.b
                            )));
                        }
                        setup.def.b = v;
                        setup.disc.segments = 1;
                    }
                    let problem = setup.build(setup.disc)?;
                    let basis = problem.basis();
                    let rep = sanity_ratio_to(basis.table(), basis.b(), setup.disc.n)?;
                    let rows = rep
                        .ratios
                        .iter()
                        .enumerate()
                        .map(|(k, r)| vec![Cell::Int(k), Cell::Num(*r)])
                        .collect();
                    let mut m = meta(&setup, setup.disc, problem.eps(), start);
                    m.insert("x".into(), json!(rep.x + setup.def.a));
                    m.insert("flagged".into(), json!(rep.flagged));
                    let t = Table {
                        columns: vec!["k", "ratio"],
                        rows,
                        meta: m,
                    };
                    let notes = if rep.flagged {
                        vec!["phi_k/x^k leaves [1e-3, 1e3] for large k: formal powers are unreliable".into()]
                    } else {
                        vec![]
                    };
                    Ok(Outcome {
                        text: t.render(setup.format, 2),
                        status: EXIT_OK,
                        notes,
                    })
                }
            }
        }
    }
}

fn out_path(cmd: &Command) -> Option<PathBuf> {
    let common = match cmd {
        Command::Eigs { common, .. }
        | Command::Ivp { common, .. }
        | Command::Qwell { common, .. }
        | Command::Kernel { common, .. }
        | Command::Diagnose { common, .. } => common,
    };
    common.out.clone().or_else(|| {
        common
            .config
            .as_ref()
            .and_then(|p| ConfigFile::load(p).ok())
            .and_then(|c| c.output.out)
    })
}

/// Parses `args`, runs, writes output and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            for n in &outcome.notes {
                eprintln!("{n}");
            }
            let written = match out_path(&cli.command) {
                Some(p) => std::fs::write(&p, &outcome.text).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => std::io::stdout()
                    .write_all(outcome.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error (config): {e}");
                return EXIT_CONFIG;
            }
            outcome.status
        }
        Err(e) => {
            let cat = match e.category() {
                ErrorCategory::Config => "config",
                ErrorCategory::Construction => "construction",
                ErrorCategory::Convergence => "convergence",
            };
            eprintln!("error ({cat}): {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        assert_eq!(parse_sweep("8:32:8").unwrap(), vec![8, 16, 24, 32]);
        assert_eq!(parse_sweep("3:5").unwrap(), vec![3, 4, 5]);
        assert!(parse_sweep("5:3").is_err());
        assert!(parse_sweep("0:3").is_err());
        assert!(parse_sweep("1:2:3:4").is_err());
    }

    #[test]
    fn csv_cells_carry_17_digits() {
        assert_eq!(Cell::Num(0.1).csv(), "1.0000000000000001e-1");
        let back: f64 = Cell::Num(std::f64::consts::PI).csv().parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }
}
