//! Catalog of the standard test problems, in their native coordinates.

use std::sync::Arc;

use super::expr::constant;
use crate::chebfun::C64;
use crate::error::{Error, Result};
use crate::spectral::{BcCoef, BoundaryCondition, ClosedForm, Potential};

/// What `eigs` computes for a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Spectral,
    /// Bound states of the whole-line operator with `q` on the interval.
    Well,
}

/// Discretization hints; unset fields fall back to the run defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Hints {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub segments: Option<usize>,
}

#[derive(Clone)]
pub struct ProblemDef {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub q: Potential,
    pub particular: Option<ClosedForm>,
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub kind: Kind,
    pub hints: Hints,
}

fn re(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Splits `name(arg, ...)` into the name and argument texts.
fn split_call(spec: &str) -> Result<(String, Vec<String>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    if !spec.ends_with(')') {
        return Err(Error::Config(format!("malformed builtin '{spec}'")));
    }
    let name = spec[..open].trim().to_string();
    let inner = &spec[open + 1..spec.len() - 1];
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|s| s.trim().to_string()).collect()
    };
    Ok((name, args))
}

fn args_or<const K: usize>(name: &str, args: &[String], defaults: [&str; K]) -> Result<[C64; K]> {
    if !args.is_empty() && args.len() != K {
        return Err(Error::Config(format!(
            "{name} takes {K} argument(s), got {}",
            args.len()
        )));
    }
    let mut out = [C64::new(0.0, 0.0); K];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = constant(args.get(k).map_or(defaults[k], |s| s.as_str()))?;
    }
    Ok(out)
}

fn real_arg(name: &str, z: C64) -> Result<f64> {
    if z.im != 0.0 || !z.re.is_finite() {
        return Err(Error::Config(format!("{name} expects real arguments")));
    }
    Ok(z.re)
}

/// Looks up `spec`, e.g. `coffey_evans(50)` or `square_well(15, 1)`.
pub fn builtin(spec: &str) -> Result<ProblemDef> {
    let (name, args) = split_call(spec)?;
    let dirichlet = BoundaryCondition::dirichlet;
    let pi = std::f64::consts::PI;
    let b = match name.as_str() {
        "paine1" => {
            args_or(&name, &args, [])?;
            ProblemDef {
                name,
                a: 0.0,
                b: pi,
                q: Arc::new(|x: f64| re(x.exp())),
                particular: None,
                left: dirichlet(),
                right: dirichlet(),
                kind: Kind::Spectral,
                hints: Hints {
                    m: Some(256),
                    n: Some(30),
                    segments: None,
                },
            }
        }
        "paine2" => {
            args_or(&name, &args, [])?;
            // (1+10x)^g with g(g-1) = 1
            let g = 0.5 * (1.0 + 5f64.sqrt());
            ProblemDef {
                name,
                a: 0.0,
                b: pi,
                q: Arc::new(|x: f64| re(1.0 / ((x + 0.1) * (x + 0.1)))),
                particular: Some(Arc::new(move |x: f64| {
                    let u = 1.0 + 10.0 * x;
                    (re(u.powf(g)), re(10.0 * g * u.powf(g - 1.0)))
                })),
                left: dirichlet(),
                right: dirichlet(),
                kind: Kind::Spectral,
                hints: Hints {
                    m: Some(256),
                    n: Some(30),
                    segments: None,
                },
            }
        }
        "coffey_evans" => {
            let [beta] = args_or(&name, &args, ["50"])?;
            let beta = real_arg(&name, beta)?;
            ProblemDef {
                name,
                a: -pi / 2.0,
                b: pi / 2.0,
                q: Arc::new(move |x: f64| {
                    let s = (2.0 * x).sin();
                    re(beta * beta * s * s - 2.0 * beta * (2.0 * x).cos())
                }),
                // e^{(β/2) cos 2x} solves f'' = q f
                particular: Some(Arc::new(move |x: f64| {
                    let f = (0.5 * beta * (2.0 * x).cos()).exp();
                    (re(f), re(-beta * (2.0 * x).sin() * f))
                })),
                left: dirichlet(),
                right: dirichlet(),
                kind: Kind::Spectral,
                hints: Hints {
                    m: Some(128),
                    n: Some(30),
                    segments: Some(16),
                },
            }
        }
        "complex_const" => {
            let [c] = args_or(&name, &args, ["3+4*i"])?;
            ProblemDef {
                name,
                a: 0.0,
                b: pi,
                q: Arc::new(move |_| c),
                particular: None,
                left: BoundaryCondition::neumann(),
                right: BoundaryCondition::neumann(),
                kind: Kind::Spectral,
                hints: Hints {
                    m: Some(128),
                    n: Some(30),
                    segments: None,
                },
            }
        }
        "chanane" => {
            args_or(&name, &args, [])?;
            // u'(0) = 0, u(0) + ω u(1) = 0
            let right = BoundaryCondition::new(BcCoef::Fn(Arc::new(|w| w)), 0.0).with_coupling(1.0);
            ProblemDef {
                name,
                a: 0.0,
                b: 1.0,
                q: Arc::new(|x: f64| C64::new(0.0, 2.0 * x).exp()),
                particular: None,
                left: BoundaryCondition::neumann(),
                right,
                kind: Kind::Spectral,
                hints: Hints {
                    m: Some(96),
                    n: Some(20),
                    segments: None,
                },
            }
        }
        "square_well" => {
            let [u, half] = args_or(&name, &args, ["15", "1"])?;
            let (u, half) = (real_arg(&name, u)?, real_arg(&name, half)?);
            if !(half > 0.0) {
                return Err(Error::Config("square_well half-width must be positive".into()));
            }
            ProblemDef {
                name,
                a: -half,
                b: half,
                q: Arc::new(move |_| re(-u)),
                particular: None,
                left: dirichlet(),
                right: dirichlet(),
                kind: Kind::Well,
                hints: Hints {
                    m: Some(128),
                    n: Some(32),
                    segments: None,
                },
            }
        }
        "sech2" => {
            let [m, half] = args_or(&name, &args, ["3", "5"])?;
            let (m, half) = (real_arg(&name, m)?, real_arg(&name, half)?);
            if !(half > 0.0) {
                return Err(Error::Config("sech2 half-width must be positive".into()));
            }
            ProblemDef {
                name,
                a: -half,
                b: half,
                q: Arc::new(move |x: f64| {
                    let s = 1.0 / x.cosh();
                    re(-m * (m + 1.0) * s * s)
                }),
                particular: None,
                left: dirichlet(),
                right: dirichlet(),
                kind: Kind::Well,
                hints: Hints {
                    m: Some(256),
                    n: Some(30),
                    // a single basis cannot be fitted on a long interval in
                    // double precision; about 2.5 units per segment works
                    segments: Some(((2.0 * half / 2.5).ceil() as usize).max(1)),
                },
            }
        }
        _ => return Err(Error::UnknownIdentifier(name)),
    };
    Ok(b)
}
