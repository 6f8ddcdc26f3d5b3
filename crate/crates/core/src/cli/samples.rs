//! Tabulated potentials: `x, re[, im]` rows, comma or whitespace separated,
//! `#` starts a comment. Values between abscissas come from the cubic through
//! the four nearest samples (two at the ends of the table use the first or
//! last four).

use std::path::Path;
use std::sync::Arc;

use crate::chebfun::C64;
use crate::error::{Error, Result};
use crate::spectral::Potential;

#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub x: Vec<f64>,
    pub q: Vec<C64>,
}

impl Samples {
    pub fn parse(text: &str) -> Result<Self> {
        let mut x = Vec::new();
        let mut q = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if !(2..=3).contains(&cols.len()) {
                return Err(Error::Config(format!(
                    "samples line {}: expected 2 or 3 columns, found {}",
                    ln + 1,
                    cols.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Config(format!("samples line {}: bad number '{s}'", ln + 1)))?;
                if !v.is_finite() {
                    return Err(Error::Config(format!("samples line {}: non-finite value", ln + 1)));
                }
                Ok(v)
            };
            x.push(num(cols[0])?);
            let im = if cols.len() == 3 { num(cols[2])? } else { 0.0 };
            q.push(C64::new(num(cols[1])?, im));
        }
        let s = Self { x, q };
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read samples file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.x.len() < 4 {
            return Err(Error::Config("samples need at least 4 rows".into()));
        }
        if self.x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("sample abscissas must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Checks that the table covers `[a, b]`.
    pub fn check_span(&self, a: f64, b: f64) -> Result<()> {
        let (lo, hi) = (self.x[0], self.x[self.x.len() - 1]);
        let tol = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if lo > a + tol || hi < b - tol {
            return Err(Error::Config(format!(
                "samples span [{lo}, {hi}] but the interval is [{a}, {b}]"
            )));
        }
        Ok(())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, t: f64) -> C64 {
        let n = self.x.len();
        let i = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let start = i.saturating_sub(1).min(n - 4);
        let xs = &self.x[start..start + 4];
        let ys = &self.q[start..start + 4];
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (t - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += ys[j] * w;
        }
        acc
    }

    pub fn into_fn(self) -> Potential {
        Arc::new(move |t| self.eval(t))
    }
}
