//! TOML run files:
//!
//! ```toml
//! [problem]
//! interval = "0,pi"
//! potential = "exp(x)"          # or samples_file = "q.dat", or builtin = "paine1"
//! bc_left = "dirichlet"
//! bc_right = { alpha = "omega", beta = 0, kappa = 1 }
//!
//! [run]
//! m = 256
//! n = 30
//! count = 10
//! shift = "0"
//!
//! [output]
//! format = "csv"
//! out = "eigs.csv"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use super::expr::{constant, Expression};
use crate::chebfun::C64;
use crate::error::{Error, Result};
use crate::spectral::{BcCoef, BoundaryCondition};

/// A number or an expression text.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Number(v) => format!("{v:?}"),
            Scalar::Text(s) => s.clone(),
        }
    }
}

/// Boundary condition as a keyword or as coefficient expressions in `omega`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BcSpec {
    Keyword(String),
    Coefficients {
        alpha: Scalar,
        beta: Scalar,
        #[serde(default)]
        kappa: Option<Scalar>,
    },
}

fn coef(text: &str) -> Result<BcCoef> {
    let e = Expression::parse(text, "omega")?;
    if e.is_constant() {
        return Ok(BcCoef::Const(e.eval(C64::new(0.0, 0.0))));
    }
    Ok(BcCoef::Fn(Arc::new(move |w| e.eval(w))))
}

impl BcSpec {
    /// `dirichlet`, `neumann` or `alpha=EXPR,beta=EXPR[,kappa=EXPR]`.
    pub fn parse_flag(text: &str) -> Result<Self> {
        let t = text.trim();
        if !t.contains('=') {
            return Ok(BcSpec::Keyword(t.to_string()));
        }
        let (mut alpha, mut beta, mut kappa) = (None, None, None);
        for part in t.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("boundary condition term '{part}' lacks '='")))?;
            let v = Some(Scalar::Text(v.trim().to_string()));
            match k.trim() {
                "alpha" => alpha = v,
                "beta" => beta = v,
                "kappa" => kappa = v,
                other => return Err(Error::Config(format!("unknown boundary condition key '{other}'"))),
            }
        }
        match (alpha, beta) {
            (Some(alpha), Some(beta)) => Ok(BcSpec::Coefficients { alpha, beta, kappa }),
            _ => Err(Error::Config("boundary condition needs both alpha and beta".into())),
        }
    }

    pub fn build(&self) -> Result<BoundaryCondition> {
        match self {
            BcSpec::Keyword(k) => match k.to_ascii_lowercase().as_str() {
                "dirichlet" => Ok(BoundaryCondition::dirichlet()),
                "neumann" => Ok(BoundaryCondition::neumann()),
                other => Err(Error::Config(format!(
                    "unknown boundary condition '{other}' (use dirichlet, neumann or alpha=..,beta=..)"
                ))),
            },
            BcSpec::Coefficients { alpha, beta, kappa } => {
                let mut bc = BoundaryCondition::new(coef(&alpha.text())?, coef(&beta.text())?);
                if let Some(k) = kappa {
                    bc = bc.with_coupling(coef(&k.text())?);
                }
                Ok(bc)
            }
        }
    }
}

/// `"a,b"` with each end a real constant expression.
pub fn parse_interval(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("interval '{text}' must be 'a,b'")))?;
    let ends = (constant(a)?, constant(b)?);
    let (a, b) = match ends {
        (a, b) if a.im == 0.0 && b.im == 0.0 => (a.re, b.re),
        _ => return Err(Error::Config("interval ends must be real".into())),
    };
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Config(format!("interval [{a}, {b}] is empty or not finite")));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub interval: Option<String>,
    pub potential: Option<String>,
    pub samples_file: Option<PathBuf>,
    pub builtin: Option<String>,
    pub bc_left: Option<BcSpec>,
    pub bc_right: Option<BcSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub segments: Option<usize>,
    pub count: Option<usize>,
    pub shift: Option<Scalar>,
    pub mode: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path`; relative `samples_file` and `out` paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.problem.samples_file, &mut cfg.output.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn shift(&self) -> Result<Option<C64>> {
        self.run.shift.as_ref().map(|s| constant(&s.text())).transpose()
    }
}
