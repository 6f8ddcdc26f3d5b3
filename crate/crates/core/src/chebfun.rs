//! Chebyshev representation of functions on a finite interval.
//!
//! Every function of `x` in the solver is carried as a Chebyshev series on
//! `[a, b]` (first-kind basis mapped affinely). Sampling happens on the
//! Chebyshev–Lobatto nodes
//!
//! ```text
//! x_k = a + (b - a)/2 * (1 + cos(k pi / M)),   k = 0..=M
//! ```
//!
//! which are listed in **descending** order (`x_0 = b`, `x_M = a`). This
//! ordering is used everywhere in the crate.
//!
//! Conversions between node values and coefficients are DCT-I transforms:
//! FFT based when `M` is a power of two, direct summation otherwise.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance applied when a point slightly outside the interval is clamped.
pub const CLAMP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidArgument(format!("degenerate interval [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    /// `[0, b]`, the canonical working interval.
    pub fn from_zero(b: f64) -> Result<Self> {
        Self::new(0.0, b)
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    fn to_unit(self, x: f64) -> f64 {
        (2.0 * (x - self.a) / self.len() - 1.0).clamp(-1.0, 1.0)
    }

    /// Checks `x` against the interval, clamping it when it sits within the
    /// round-off tolerance of an endpoint.
    pub fn check(&self, x: f64) -> Result<f64> {
        let tol = CLAMP_TOL * self.len().max(self.b.abs());
        if !x.is_finite() || x < self.a - tol || x > self.b + tol {
            return Err(Error::Domain {
                x,
                lo: self.a,
                hi: self.b,
            });
        }
        Ok(x.clamp(self.a, self.b))
    }
}

/// Chebyshev–Lobatto abscissas for `M` subintervals, in descending order.
pub fn cheb_nodes(m: usize, interval: Interval) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("node count M must be >= 1".into()));
    }
    let interval = Interval::new(interval.a, interval.b)?;
    let half = 0.5 * interval.len();
    Ok((0..=m)
        .map(|k| {
            if k == 0 {
                interval.b
            } else if k == m {
                interval.a
            } else {
                interval.a + half * (1.0 + (k as f64 * PI / m as f64).cos())
            }
        })
        .collect())
}

/// A complex-valued function on `[a, b]` given by its Chebyshev coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevExpansion {
    interval: Interval,
    coeffs: Vec<C64>,
}

impl ChebyshevExpansion {
    pub fn new(interval: Interval, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "Chebyshev expansion needs at least one coefficient".into(),
            ));
        }
        Ok(Self { interval, coeffs })
    }

    pub fn constant(interval: Interval, value: C64) -> Self {
        Self {
            interval,
            coeffs: vec![value],
        }
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Value at `x`; points outside the interval beyond the clamp tolerance are rejected.
    pub fn evaluate(&self, x: f64) -> Result<C64> {
        let x = self.interval.check(x)?;
        Ok(clenshaw(&self.coeffs, self.interval.to_unit(x)))
    }

    /// Value at the left endpoint: alternating coefficient sum.
    pub fn left_value(&self) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { *c } else { -*c })
            .sum()
    }

    /// Value at the right endpoint: plain coefficient sum.
    pub fn right_value(&self) -> C64 {
        self.coeffs.iter().sum()
    }

    /// Expansion of `x -> ∫_a^x self`. The result has degree `M + 1` and
    /// vanishes exactly at the left endpoint.
    pub fn antiderivative(&self) -> Self {
        let c = &self.coeffs;
        let n = c.len();
        let get = |k: usize| if k < n { c[k] } else { C64::new(0.0, 0.0) };
        let scale = 0.5 * self.interval.len();
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        out[1] = (get(0) - get(2) * 0.5) * scale;
        for (k, slot) in out.iter_mut().enumerate().skip(2) {
            *slot = (get(k - 1) - get(k + 1)) * (scale / (2.0 * k as f64));
        }
        let mut left = C64::new(0.0, 0.0);
        for (k, v) in out.iter().enumerate().skip(1) {
            if k % 2 == 0 {
                left += v;
            } else {
                left -= v;
            }
        }
        out[0] = -left;
        Self {
            interval: self.interval,
            coeffs: out,
        }
    }

    /// Coefficient-space derivative.
    pub fn derivative(&self) -> Self {
        let c = &self.coeffs;
        let n = c.len();
        if n == 1 {
            return Self::constant(self.interval, C64::new(0.0, 0.0));
        }
        let mut d = vec![C64::new(0.0, 0.0); n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + c[k] * (2.0 * k as f64);
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / self.interval.len();
        for v in &mut d {
            *v *= scale;
        }
        Self {
            interval: self.interval,
            coeffs: d,
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            interval: self.interval,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(C64, C64) -> C64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        let coeffs = (0..n)
            .map(|k| {
                op(
                    *self.coeffs.get(k).unwrap_or(&zero),
                    *other.coeffs.get(k).unwrap_or(&zero),
                )
            })
            .collect();
        Self {
            interval: self.interval,
            coeffs,
        }
    }
}

impl Add for &ChebyshevExpansion {
    type Output = ChebyshevExpansion;
    fn add(self, rhs: Self) -> ChebyshevExpansion {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ChebyshevExpansion {
    type Output = ChebyshevExpansion;
    fn sub(self, rhs: Self) -> ChebyshevExpansion {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<C64> for &ChebyshevExpansion {
    type Output = ChebyshevExpansion;
    fn mul(self, rhs: C64) -> ChebyshevExpansion {
        self.scaled(rhs)
    }
}

/// Clenshaw recurrence for `sum c_k T_k(t)`.
fn clenshaw(coeffs: &[C64], t: f64) -> C64 {
    let mut b1 = C64::new(0.0, 0.0);
    let mut b2 = C64::new(0.0, 0.0);
    for c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * (2.0 * t) - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + b1 * t - b2
}

/// A fixed Chebyshev–Lobatto grid with its cached transform.
///
/// Functions are moved between node values and coefficients through this
/// type; pointwise products are formed on the node values.
#[derive(Clone)]
pub struct ChebGrid {
    interval: Interval,
    m: usize,
    nodes: Vec<f64>,
    fft: Option<Arc<dyn Fft<f64>>>,
    cos_table: Vec<f64>,
}

impl std::fmt::Debug for ChebGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChebGrid")
            .field("interval", &self.interval)
            .field("m", &self.m)
            .field("fft", &self.fft.is_some())
            .finish()
    }
}

impl ChebGrid {
    pub fn new(m: usize, interval: Interval) -> Result<Self> {
        let nodes = cheb_nodes(m, interval)?;
        let (fft, cos_table) = if m.is_power_of_two() {
            let mut planner = FftPlanner::new();
            (Some(planner.plan_fft_forward(2 * m)), Vec::new())
        } else {
            let table = (0..2 * m).map(|r| (r as f64 * PI / m as f64).cos()).collect();
            (None, table)
        };
        Ok(Self {
            interval,
            m,
            nodes,
            fft,
            cos_table,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sample(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// `S_k = sum''_j v_j cos(pi j k / M)` (first and last terms halved).
    fn dct1(&self, v: &[C64]) -> Vec<C64> {
        let m = self.m;
        match &self.fft {
            Some(fft) => {
                let mut buf = Vec::with_capacity(2 * m);
                buf.extend_from_slice(v);
                buf.extend(v[1..m].iter().rev());
                fft.process(&mut buf);
                buf.truncate(m + 1);
                for x in &mut buf {
                    *x *= 0.5;
                }
                buf
            }
            None => (0..=m)
                .map(|k| {
                    let mut s = (v[0] + if k % 2 == 0 { v[m] } else { -v[m] }) * 0.5;
                    for (j, vj) in v.iter().enumerate().take(m).skip(1) {
                        s += vj * self.cos_table[(j * k) % (2 * m)];
                    }
                    s
                })
                .collect(),
        }
    }

    /// Chebyshev interpolant through node samples.
    pub fn to_expansion(&self, samples: &[C64]) -> Result<ChebyshevExpansion> {
        Ok(ChebyshevExpansion {
            interval: self.interval,
            coeffs: self.coeffs_of(samples)?,
        })
    }

    fn coeffs_of(&self, samples: &[C64]) -> Result<Vec<C64>> {
        if samples.len() != self.m + 1 {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                self.m + 1,
                samples.len()
            )));
        }
        let m = self.m;
        let mut c = self.dct1(samples);
        let scale = 2.0 / m as f64;
        for x in &mut c {
            *x *= scale;
        }
        c[0] *= 0.5;
        c[m] *= 0.5;
        Ok(c)
    }

    /// Node values of an expansion on this grid's interval. Terms above degree
    /// `M` are folded onto their aliases (`T_{2M-k} = T_k` at the nodes).
    pub fn values(&self, exp: &ChebyshevExpansion) -> Vec<C64> {
        self.values_from_coeffs(&exp.coeffs)
    }

    fn values_from_coeffs(&self, coeffs: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut folded = vec![C64::new(0.0, 0.0); m + 1];
        for (k, c) in coeffs.iter().enumerate() {
            let r = k % (2 * m);
            let r = if r > m { 2 * m - r } else { r };
            folded[r] += c;
        }
        folded[0] *= 2.0;
        folded[m] *= 2.0;
        self.dct1(&folded)
    }

    /// Node values of `∫_a^x g` given node values of `g`.
    pub fn antiderivative_values(&self, values: &[C64]) -> Vec<C64> {
        let exp = ChebyshevExpansion {
            interval: self.interval,
            coeffs: self.coeffs_of(values).expect("length checked by caller"),
        };
        self.values(&exp.antiderivative())
    }

    /// Node values of `g'` given node values of `g`.
    pub fn derivative_values(&self, values: &[C64]) -> Vec<C64> {
        let exp = ChebyshevExpansion {
            interval: self.interval,
            coeffs: self.coeffs_of(values).expect("length checked by caller"),
        };
        self.values(&exp.derivative())
    }

    /// Matrix of the linear map "node values of g -> node values of ∫_a^x g".
    pub fn antiderivative_matrix(&self) -> Vec<Vec<C64>> {
        let n = self.m + 1;
        let mut cols = Vec::with_capacity(n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            cols.push(self.antiderivative_values(&e));
            e[j] = C64::new(0.0, 0.0);
        }
        // transpose columns into rows
        (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
    }
}
