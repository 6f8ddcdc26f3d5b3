//! Sturm–Liouville spectral problems on `[0, b]`:
//!
//! ```text
//! -y'' + q y = λ y,
//! α0(ω) y(0) + β0(ω) y'(0) = 0,
//! αb(ω) y(b) + βb(ω) y'(b) [+ κ(ω) y(0)] = 0,      λ = ω²
//! ```
//!
//! The solution satisfying the left condition is
//! `y = β0 c(ω,x;h) − (α0 + β0 h) s(ω,x;∞)`, so the characteristic function is
//! `Φ_N(ω) = αb y(b) + βb y'(b) + κ β0` evaluated through the approximate
//! solutions of [`crate::nsbf`].

mod qwell;
mod search;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use qwell::quantum_well;

use crate::chebfun::{ChebGrid, Interval, C64};
use crate::error::{Error, Result};
use crate::nsbf::{PointData, SolutionBasis};
use crate::spps::{formal_powers, particular_solution, spps_char_roots, ConstantBc, ParticularStrategy};
use crate::traces::{fit_kernel, goursat_targets};

/// Potential on the working interval `[0, b]`.
pub type Potential = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Coefficient of a boundary condition: a constant or an entire function of ω.
#[derive(Clone)]
pub enum BcCoef {
    Const(C64),
    Fn(Arc<dyn Fn(C64) -> C64 + Send + Sync>),
}

impl BcCoef {
    pub fn eval(&self, omega: C64) -> C64 {
        match self {
            BcCoef::Const(c) => *c,
            BcCoef::Fn(f) => f(omega),
        }
    }
    pub fn as_const(&self) -> Option<C64> {
        match self {
            BcCoef::Const(c) => Some(*c),
            BcCoef::Fn(_) => None,
        }
    }
}

impl fmt::Debug for BcCoef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcCoef::Const(c) => write!(f, "Const({c})"),
            BcCoef::Fn(_) => write!(f, "Fn(..)"),
        }
    }
}

impl From<C64> for BcCoef {
    fn from(c: C64) -> Self {
        BcCoef::Const(c)
    }
}

impl From<f64> for BcCoef {
    fn from(c: f64) -> Self {
        BcCoef::Const(C64::new(c, 0.0))
    }
}

/// `α y + β y' (+ κ y(opposite end)) = 0`.
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    pub alpha: BcCoef,
    pub beta: BcCoef,
    /// Coefficient of `y(0)` in the right-hand condition (two-point
    /// conditions such as `y(0) + ω y(b) = 0`); ignored on the left.
    pub coupling: Option<BcCoef>,
}

impl BoundaryCondition {
    pub fn new(alpha: impl Into<BcCoef>, beta: impl Into<BcCoef>) -> Self {
        Self {
            alpha: alpha.into(),
            beta: beta.into(),
            coupling: None,
        }
    }
    pub fn dirichlet() -> Self {
        Self::new(1.0, 0.0)
    }
    pub fn neumann() -> Self {
        Self::new(0.0, 1.0)
    }
    pub fn with_coupling(mut self, kappa: impl Into<BcCoef>) -> Self {
        self.coupling = Some(kappa.into());
        self
    }

    /// `(α(ω), β(ω))`, rejecting `|α| + |β| (+ |κ|) = 0`.
    pub fn eval(&self, omega: C64) -> Result<(C64, C64)> {
        let a = self.alpha.eval(omega);
        let b = self.beta.eval(omega);
        let k = self.coupling.as_ref().map_or(0.0, |k| k.eval(omega).norm());
        if !(a.norm() + b.norm() + k > 0.0) {
            return Err(Error::InvalidBoundaryCondition {
                re: omega.re,
                im: omega.im,
            });
        }
        Ok((a, b))
    }

    fn constant(&self) -> Option<(C64, C64)> {
        if self.coupling.is_some() {
            return None;
        }
        Some((self.alpha.as_const()?, self.beta.as_const()?))
    }

    fn is_real_constant(&self) -> bool {
        self.constant().is_some_and(|(a, b)| a.im == 0.0 && b.im == 0.0)
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    /// Chebyshev degree `M`.
    pub m: usize,
    /// Kernel order `N`.
    pub n: usize,
    /// SPPS truncation `K` (default `2N`).
    pub k: Option<usize>,
    /// Number of equal subintervals, each with its own basis.
    pub segments: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            m: 256,
            n: 30,
            k: None,
            segments: 1,
        }
    }
}

impl Discretization {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            k: None,
            segments: 1,
        }
    }
    pub fn with_segments(mut self, segments: usize) -> Self {
        self.segments = segments;
        self
    }
    pub fn spps_degree(&self) -> usize {
        self.k.unwrap_or(2 * self.n)
    }
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Config("N must be >= 1".into()));
        }
        if self.m < 2 * self.n + 8 {
            return Err(Error::Config(format!(
                "M = {} is below the resolution floor 2N+8 = {}",
                self.m,
                2 * self.n + 8
            )));
        }
        if self.spps_degree() < 1 {
            return Err(Error::Config("SPPS truncation K must be >= 1".into()));
        }
        if self.segments < 1 {
            return Err(Error::Config("segment count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Closed-form particular solution `x -> (f(x), f'(x))` on `[0, b]`.
pub type ClosedForm = Arc<dyn Fn(f64) -> (C64, C64) + Send + Sync>;

/// Search mode for [`SpectralProblem::find_eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Real scan when the problem is self-adjoint, complex otherwise.
    Auto,
    RealScan,
    Complex,
}

/// How an eigenvalue was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spps,
    PhiN,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spps => "spps",
            Method::PhiN => "phiN",
        }
    }
}

/// Per-root diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RootFlags {
    /// Another root lies within `1e3 u |ω|`.
    pub cluster: bool,
    /// Refinement stopped without meeting the acceptance test.
    pub unconverged: bool,
}

#[derive(Debug, Clone, Default)]
pub struct EigenResult {
    pub eigenvalues: Vec<C64>,
    pub omegas: Vec<C64>,
    pub methods: Vec<Method>,
    /// `|Φ_N(ω)|` at the accepted root.
    pub residuals: Vec<f64>,
    pub flags: Vec<RootFlags>,
    pub eps1: f64,
    pub eps2: f64,
    /// How many of the requested eigenvalues were not found.
    pub shortfall: usize,
    pub warnings: Vec<String>,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Segment offset, grid, potential samples, and how to get `f`.
type Part = (f64, ChebGrid, Vec<C64>, ParticularStrategy);

/// One subinterval `[offset, offset + len]` with its own basis in the local
/// coordinate.
#[derive(Clone)]
struct Segment {
    offset: f64,
    q_nodes: Vec<C64>,
    basis: Arc<SolutionBasis>,
}

/// A discretized spectral problem with its fitted solution basis.
///
/// With more than one segment the solution is carried across the interior
/// points by the local fundamental matrices.
#[derive(Clone)]
pub struct SpectralProblem {
    interval: Interval,
    segments: Vec<Segment>,
    left: BoundaryCondition,
    right: BoundaryCondition,
    disc: Discretization,
    shift: C64,
    /// The unshifted potential, kept for rebuilding.
    q: Potential,
}

impl fmt::Debug for SpectralProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralProblem")
            .field("interval", &self.interval)
            .field("disc", &self.disc)
            .field("shift", &self.shift)
            .field("left", &self.left)
            .field("right", &self.right)
            .finish_non_exhaustive()
    }
}

impl SpectralProblem {
    /// Builds the problem on `[0, b]` with the particular solution obtained
    /// numerically from `q`.
    pub fn new(
        b: f64,
        q: Potential,
        left: BoundaryCondition,
        right: BoundaryCondition,
        disc: Discretization,
    ) -> Result<Self> {
        Self::build(b, q, left, right, disc, None)
    }

    /// As [`SpectralProblem::new`] with a known particular solution.
    pub fn with_particular(
        b: f64,
        q: Potential,
        left: BoundaryCondition,
        right: BoundaryCondition,
        disc: Discretization,
        particular: ClosedForm,
    ) -> Result<Self> {
        Self::build(b, q, left, right, disc, Some(particular))
    }

    fn build(
        b: f64,
        q: Potential,
        left: BoundaryCondition,
        right: BoundaryCondition,
        disc: Discretization,
        particular: Option<ClosedForm>,
    ) -> Result<Self> {
        disc.validate()?;
        let interval = Interval::new(0.0, b)?;
        let parts = Self::sample(b, &q, C64::new(0.0, 0.0), disc, particular.as_ref())?;
        Self::from_parts(interval, parts, left, right, disc, C64::new(0.0, 0.0), q)
    }

    /// Per-segment grids with `q + shift` sampled on them.
    fn sample(
        b: f64,
        q: &Potential,
        shift: C64,
        disc: Discretization,
        particular: Option<&ClosedForm>,
    ) -> Result<Vec<Part>> {
        let len = b / disc.segments as f64;
        let mut parts = Vec::with_capacity(disc.segments);
        for j in 0..disc.segments {
            let offset = j as f64 * len;
            let grid = ChebGrid::new(disc.m, Interval::new(0.0, len)?)?;
            let q_nodes = grid.sample(|x| q(offset + x) + shift);
            let strategy = match particular {
                None => ParticularStrategy::Auto,
                Some(pf) => {
                    let (f, fp): (Vec<C64>, Vec<C64>) = grid.nodes().iter().map(|&x| pf(offset + x)).unzip();
                    ParticularStrategy::ClosedForm { f, f_prime: Some(fp) }
                }
            };
            parts.push((offset, grid, q_nodes, strategy));
        }
        Ok(parts)
    }

    fn from_parts(
        interval: Interval,
        parts: Vec<Part>,
        left: BoundaryCondition,
        right: BoundaryCondition,
        disc: Discretization,
        shift: C64,
        q: Potential,
    ) -> Result<Self> {
        let mut segments = Vec::with_capacity(parts.len());
        let spps_order = if parts.len() == 1 {
            2 * disc.spps_degree() + 1
        } else {
            0
        };
        for (offset, grid, q_nodes, strategy) in parts {
            let ps = particular_solution(&grid, &q_nodes, strategy)?;
            // the long SPPS table is optional: on overflow keep only what the
            // kernel fit needs and let the Φ_N search work alone
            let table = match formal_powers(&ps, disc.n.max(spps_order)) {
                Err(Error::Overflow { order }) if order > disc.n => formal_powers(&ps, disc.n)?,
                r => r?,
            };
            let q_exp = grid.to_expansion(&q_nodes)?;
            let (g1, g2) = goursat_targets(&q_exp, ps.h());
            let kernel = fit_kernel(&table, &g1, &g2, disc.n, None)?;
            segments.push(Segment {
                offset,
                q_nodes,
                basis: Arc::new(SolutionBasis::new(kernel, table)?),
            });
        }
        Ok(Self {
            interval,
            segments,
            left,
            right,
            disc,
            shift,
            q,
        })
    }

    pub fn b(&self) -> f64 {
        self.interval.b
    }
    pub fn interval(&self) -> Interval {
        self.interval
    }
    /// Basis of the first segment (the whole interval when unsegmented).
    pub fn basis(&self) -> &SolutionBasis {
        &self.segments[0].basis
    }
    /// `(offset, basis)` per segment.
    pub fn segments(&self) -> impl Iterator<Item = (f64, &SolutionBasis)> {
        self.segments.iter().map(|s| (s.offset, &*s.basis))
    }
    pub fn discretization(&self) -> Discretization {
        self.disc
    }
    pub fn shift(&self) -> C64 {
        self.shift
    }
    pub fn left(&self) -> &BoundaryCondition {
        &self.left
    }
    pub fn right(&self) -> &BoundaryCondition {
        &self.right
    }
    /// Worst fit errors over the segments.
    pub fn eps(&self) -> (f64, f64) {
        self.segments.iter().fold((0.0, 0.0), |(e1, e2), s| {
            let k = s.basis.kernel();
            (f64::max(e1, k.eps1()), f64::max(e2, k.eps2()))
        })
    }
    /// Potential (including any shift) at the Chebyshev nodes of every segment.
    pub fn q_values(&self) -> impl Iterator<Item = C64> + '_ {
        self.segments.iter().flat_map(|s| s.q_nodes.iter().copied())
    }

    /// Real potential, real constant boundary coefficients.
    pub fn is_self_adjoint(&self) -> bool {
        self.q_values().all(|v| v.im == 0.0) && self.left.is_real_constant() && self.right.is_real_constant()
    }

    /// `Φ_N(ω)`.
    pub fn char_function(&self, omega: C64) -> Result<C64> {
        self.char_value(&self.left, &self.right, omega)
    }

    /// `Φ_N(ω)` for the given conditions.
    fn char_value(&self, left: &BoundaryCondition, right: &BoundaryCondition, omega: C64) -> Result<C64> {
        let (a0, b0) = left.eval(omega)?;
        let (ab, bb) = right.eval(omega)?;
        let mut state = (b0, -a0);
        for seg in &self.segments {
            state = carry(&seg.basis, seg.basis.at_b(), omega, state);
        }
        let mut phi = ab * state.0 + bb * state.1;
        if let Some(k) = &right.coupling {
            phi += k.eval(omega) * b0;
        }
        Ok(phi)
    }

    /// Solution with `y(0) = β0`, `y'(0) = −α0` at each `x` of `[0, b]`.
    pub fn eigenfunction(&self, lambda: C64, xs: &[f64]) -> Result<Vec<C64>> {
        let omega = (lambda + self.shift).sqrt();
        let (a0, b0) = self.left.eval(omega)?;
        Ok(self.solve_ivp(lambda, b0, -a0, xs)?.into_iter().map(|v| v.0).collect())
    }

    /// `(y, y')` of the solution with `y(0) = y0`, `y'(0) = y1` at each `x`
    /// of `[0, b]`: `y = y0 c_N + (y1 − y0 h) s_N` segment by segment.
    pub fn solve_ivp(&self, lambda: C64, y0: C64, y1: C64, xs: &[f64]) -> Result<Vec<(C64, C64)>> {
        let omega = (lambda + self.shift).sqrt();
        let mut starts = Vec::with_capacity(self.segments.len());
        let mut state = (y0, y1);
        for seg in &self.segments {
            starts.push(state);
            state = carry(&seg.basis, seg.basis.at_b(), omega, state);
        }
        xs.iter()
            .map(|&x| {
                if !(0.0..=self.b()).contains(&x) {
                    return Err(Error::Domain {
                        x,
                        lo: 0.0,
                        hi: self.b(),
                    });
                }
                let j = self.segments.iter().rposition(|s| s.offset <= x).unwrap_or(0);
                let seg = &self.segments[j];
                let local = (x - seg.offset).clamp(0.0, seg.basis.b());
                let p = seg.basis.point(local)?;
                Ok(carry(&seg.basis, &p, omega, starts[j]))
            })
            .collect()
    }

    /// Rebuilds the problem for `q + λ*`; eigenvalues are reported unshifted.
    ///
    /// A positive shift makes solutions grow like `exp ∫ sqrt(Re q)`, and in
    /// double precision the fit degrades once that exponent exceeds a few
    /// units per segment. The rebuilt problem therefore gets enough segments
    /// to keep the per-segment exponent at the original level (at least
    /// [`SHIFT_GROWTH_PER_SEGMENT`]).
    pub fn spectral_shift(&self, lambda_star: C64) -> Result<Self> {
        if lambda_star == C64::new(0.0, 0.0) {
            return Ok(self.clone());
        }
        let shift = self.shift + lambda_star;
        let segs = self.segments.len();
        let before = growth_exponent(&self.q, self.b(), self.shift);
        let after = growth_exponent(&self.q, self.b(), shift);
        let per_segment = (before / segs as f64).max(SHIFT_GROWTH_PER_SEGMENT);
        let disc = self.disc.with_segments(segs.max((after / per_segment).ceil() as usize));
        let parts = Self::sample(self.b(), &self.q, shift, disc, None)?;
        Self::from_parts(
            self.interval,
            parts,
            self.left.clone(),
            self.right.clone(),
            disc,
            shift,
            self.q.clone(),
        )
    }

    /// The first `count` eigenvalues ordered by real, then imaginary part.
    pub fn find_eigenvalues(&self, count: usize, mode: Mode) -> Result<EigenResult> {
        self.find_eigenvalues_below(count, mode, None)
    }

    /// As [`find_eigenvalues`](Self::find_eigenvalues) with the ω search capped.
    pub fn find_eigenvalues_below(&self, count: usize, mode: Mode, omega_max: Option<f64>) -> Result<EigenResult> {
        if count == 0 {
            return Err(Error::InvalidArgument("count must be >= 1".into()));
        }
        let mode = match mode {
            Mode::Auto if self.is_self_adjoint() => Mode::RealScan,
            Mode::Auto => Mode::Complex,
            m => m,
        };
        let phi_roots = match mode {
            Mode::RealScan => search::real_scan(self, count, omega_max)?,
            _ => search::complex_search(self, count, omega_max, &self.spps_seeds())?,
        };
        let spps = self.spps_roots().unwrap_or_default();
        let merged = search::merge(phi_roots, spps);
        Ok(search::assemble(self, merged, count, omega_max))
    }

    /// SPPS characteristic roots (as shifted `λ + λ*`) inside the disc where
    /// the truncated series is trustworthy. Empty for ω-dependent conditions
    /// and segmented problems.
    fn spps_roots(&self) -> Option<Vec<C64>> {
        if self.segments.len() != 1 {
            return None;
        }
        let (a0, b0) = self.left.constant()?;
        let (ab, bb) = self.right.constant()?;
        let bc = ConstantBc {
            alpha0: a0,
            beta0: b0,
            alpha_b: ab,
            beta_b: bb,
        };
        let k = self.disc.spps_degree();
        if self.basis().table().order() < 2 * k + 1 {
            return None;
        }
        let omega_r = (k as f64 / 4.0).min(8.0) / self.b();
        spps_char_roots(self.basis().table(), &bc, k, omega_r * omega_r).ok()
    }

    fn spps_seeds(&self) -> Vec<C64> {
        self.spps_roots()
            .unwrap_or_default()
            .into_iter()
            .map(|mu| mu.sqrt())
            .collect()
    }

    /// Asymptotic spacing `π/b` of the ω-roots.
    fn spacing(&self) -> f64 {
        PI / self.b()
    }
}

/// Per-segment growth exponent a spectral shift may reach before the rebuilt
/// problem is split further.
pub const SHIFT_GROWTH_PER_SEGMENT: f64 = 4.0;

/// `∫_0^b sqrt(max(Re(q + shift), 0))` by the midpoint rule.
fn growth_exponent(q: &Potential, b: f64, shift: C64) -> f64 {
    let n = 512;
    let h = b / n as f64;
    (0..n)
        .map(|i| (q((i as f64 + 0.5) * h) + shift).re.max(0.0).sqrt() * h)
        .sum()
}

/// `(y, y')` at `p` from `(y, y')` at the segment start:
/// `y = y0 (c − h s) + y0' s`.
fn carry(basis: &SolutionBasis, p: &PointData, omega: C64, (y0, dy0): (C64, C64)) -> (C64, C64) {
    let v = basis.eval_point(p, omega);
    let h = basis.h();
    (y0 * (v.c - h * v.s) + dy0 * v.s, y0 * (v.dc - h * v.ds) + dy0 * v.ds)
}
