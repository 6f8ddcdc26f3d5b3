//! Recursive integrals, formal powers and spectral parameter power series.
//!
//! Starting from a non-vanishing solution `f` of `f'' = q f` with `f(0) = 1`,
//! the recursive integrals
//!
//! ```text
//! X(0) = X~(0) = 1
//! X(n)(x)  = n ∫_0^x X(n-1)(s)  (f(s)^2)^((-1)^n)     ds
//! X~(n)(x) = n ∫_0^x X~(n-1)(s) (f(s)^2)^((-1)^(n-1)) ds
//! ```
//!
//! give the formal powers `phi_k = f X(k)` (k odd) / `f X~(k)` (k even) and
//! `psi_k = X~(k)/f` (k odd) / `X(k)/f` (k even). Their traces on the
//! characteristics, `c_m` and `s_m`, are the approximating system used by
//! [`crate::traces`].
//!
//! Series solutions here follow the convention `y'' - q y = lambda y`; the
//! characteristic polynomial converts to the eigenvalue convention
//! `-y'' + q y = lambda y`.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

use crate::chebfun::{ChebGrid, ChebyshevExpansion, Interval, C64};
use crate::error::{Error, Result};

static NEXT_SOLUTION_ID: AtomicU64 = AtomicU64::new(1);

/// Picard iterations are abandoned after this many sweeps.
pub const PICARD_MAX_ITER: usize = 200;

/// Picard iterates growing beyond this factor over the converged solution
/// have lost too many digits to cancellation; the integral equation is then
/// solved directly instead.
const PICARD_GROWTH_LIMIT: f64 = 1e4;

/// Minimum of `|f|/max|f|` accepted by the automatic non-vanishing sweep.
pub const NONVANISH_REL: f64 = 1e-3;

/// Default residual tolerance factor for `f'' - q f`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Where the particular solution comes from.
#[derive(Debug, Clone)]
pub enum ParticularStrategy {
    /// Solve `f'' = q f` numerically from the sampled potential.
    Auto,
    /// Use given node samples (e.g. a known closed form). `f_prime` is
    /// obtained by spectral differentiation when absent.
    ClosedForm { f: Vec<C64>, f_prime: Option<Vec<C64>> },
}

/// The non-vanishing solution `f` of `f'' = q f` with `f(0) = 1`, `h = f'(0)`.
#[derive(Debug, Clone)]
pub struct ParticularSolution {
    id: u64,
    grid: ChebGrid,
    q: Vec<C64>,
    f: Vec<C64>,
    f_prime: Vec<C64>,
    h: C64,
    f_exp: ChebyshevExpansion,
    f_prime_exp: ChebyshevExpansion,
    residual: f64,
}

impl ParticularSolution {
    pub fn id(&self) -> u64 {
        self.id
    }
    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }
    pub fn interval(&self) -> Interval {
        self.grid.interval()
    }
    /// Node values of the potential the solution was built for.
    pub fn q_nodes(&self) -> &[C64] {
        &self.q
    }
    pub fn f_nodes(&self) -> &[C64] {
        &self.f
    }
    pub fn f_prime_nodes(&self) -> &[C64] {
        &self.f_prime
    }
    pub fn f(&self) -> &ChebyshevExpansion {
        &self.f_exp
    }
    pub fn f_prime(&self) -> &ChebyshevExpansion {
        &self.f_prime_exp
    }
    pub fn h(&self) -> C64 {
        self.h
    }
    /// `max |f'' - q f| / max|f|` measured on the nodes at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn min_abs(&self) -> f64 {
        self.f.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn min_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
}

/// Builds the particular solution for the potential sampled at `grid` nodes.
pub fn particular_solution(grid: &ChebGrid, q: &[C64], strategy: ParticularStrategy) -> Result<ParticularSolution> {
    particular_solution_with_tol(grid, q, strategy, RESIDUAL_TOL)
}

pub fn particular_solution_with_tol(
    grid: &ChebGrid,
    q: &[C64],
    strategy: ParticularStrategy,
    residual_tol: f64,
) -> Result<ParticularSolution> {
    let n = grid.m() + 1;
    if q.len() != n {
        return Err(Error::InvalidArgument(format!(
            "potential has {} samples, grid needs {n}",
            q.len()
        )));
    }
    if q.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::InvalidArgument("potential has non-finite samples".into()));
    }
    let (f, f_prime) = match strategy {
        ParticularStrategy::ClosedForm { f, f_prime } => {
            if f.len() != n || f_prime.as_ref().is_some_and(|d| d.len() != n) {
                return Err(Error::InvalidArgument(
                    "closed-form samples do not match the grid".into(),
                ));
            }
            let f0 = f[grid.m()];
            if f0.norm() == 0.0 {
                return Err(Error::NonVanishing { min_abs: 0.0 });
            }
            let f: Vec<C64> = f.iter().map(|v| v / f0).collect();
            let fp = match f_prime {
                Some(d) => d.iter().map(|v| v / f0).collect(),
                None => grid.derivative_values(&f),
            };
            let m = min_abs(&f);
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::NonVanishing { min_abs: m });
            }
            (f, fp)
        }
        ParticularStrategy::Auto => auto_particular(grid, q)?,
    };

    // integral form: f = f(0) + ∫f', f' = f'(0) + ∫qf (no differentiation noise)
    let qmax = max_abs(q);
    let fmax = max_abs(&f);
    let left = grid.m();
    let int_fp = grid.antiderivative_values(&f_prime);
    let qf: Vec<C64> = q.iter().zip(&f).map(|(a, b)| a * b).collect();
    let int_qf = grid.antiderivative_values(&qf);
    let r1 = (0..n).map(|i| (f[i] - f[left] - int_fp[i]).norm()).fold(0.0, f64::max);
    let r2 = (0..n)
        .map(|i| (f_prime[i] - f_prime[left] - int_qf[i]).norm())
        .fold(0.0, f64::max);
    let residual = r1.max(r2) / fmax;
    let tol = residual_tol * (1.0 + qmax) * (1.0 + grid.interval().len());
    if !(residual <= tol) {
        return Err(Error::Residual {
            residual,
            tolerance: tol,
        });
    }

    let h = f_prime[grid.m()];
    Ok(ParticularSolution {
        id: NEXT_SOLUTION_ID.fetch_add(1, Ordering::Relaxed),
        grid: grid.clone(),
        q: q.to_vec(),
        f_exp: grid.to_expansion(&f)?,
        f_prime_exp: grid.to_expansion(&f_prime)?,
        f,
        f_prime,
        h,
        residual,
    })
}

/// Solves `f'' = q f` for the two canonical initial conditions and combines them.
fn auto_particular(grid: &ChebGrid, q: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let x: Vec<C64> = grid
        .nodes()
        .iter()
        .map(|&x| C64::new(x - grid.interval().a, 0.0))
        .collect();
    let ones = vec![C64::new(1.0, 0.0); x.len()];

    let (f1, f2) = match (picard(grid, q, &ones), picard(grid, q, &x)) {
        (Some(a), Some(b)) => (a, b),
        _ => direct_solve(grid, q, &ones, &x)?,
    };
    // f' = f'(0) + ∫ q f
    let deriv = |f: &[C64], slope: f64| -> Vec<C64> {
        let qf: Vec<C64> = q.iter().zip(f).map(|(a, b)| a * b).collect();
        grid.antiderivative_values(&qf).into_iter().map(|v| v + slope).collect()
    };
    let f1p = deriv(&f1, 0.0);
    let f2p = deriv(&f2, 1.0);

    let real_q = q.iter().all(|v| v.im == 0.0);
    let combine = |gamma: C64| -> (Vec<C64>, Vec<C64>) {
        (
            f1.iter().zip(&f2).map(|(a, b)| a + gamma * b).collect(),
            f1p.iter().zip(&f2p).map(|(a, b)| a + gamma * b).collect(),
        )
    };
    if real_q {
        let gamma = real_gamma(&f1, &f2);
        let (f, fp) = combine(C64::new(0.0, gamma));
        let m = min_abs(&f);
        if !(m > 0.0) {
            return Err(Error::Construction { min_abs: m });
        }
        return Ok((f, fp));
    }

    let accept = |f: &[C64]| {
        let m = min_abs(f);
        (m > NONVANISH_REL * max_abs(f), m)
    };
    let mut best = 0.0_f64;
    let (ok, m) = accept(&f1);
    if ok {
        return Ok((f1, f1p));
    }
    best = best.max(m);
    for gamma in gamma_sweep() {
        let (f, fp) = combine(gamma);
        let (ok, m) = accept(&f);
        if ok {
            return Ok((f, fp));
        }
        best = best.max(m);
    }
    Err(Error::Construction { min_abs: best })
}

/// Multiplier `γ` for `f = f1 + iγ f2` with real `f1`, `f2`.
///
/// Complex zeros of `f` sit near real zeros of `f1` (at height about
/// `γ f2²`) and of `f2` (about `1/(γ f1²)`, including `x = 0`). Balancing the
/// two keeps them as far from the interval as possible; `γ = 0` (real `f = f1`)
/// when `f1` stays clear of zero.
fn real_gamma(f1: &[C64], f2: &[C64]) -> f64 {
    let r1: Vec<f64> = f1.iter().map(|v| v.re).collect();
    let r2: Vec<f64> = f2.iter().map(|v| v.re).collect();
    let big1 = r1.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    // dips are local minima of |f1|; the last node is x = 0 where f1 = 1, so
    // a growing f1 is not mistaken for a vanishing one
    let last = r1.len() - 1;
    let dips: Vec<usize> = (0..last)
        .filter(|&i| {
            let v = r1[i].abs();
            v <= r1[i + 1].abs() && (i == 0 || v <= r1[i - 1].abs())
        })
        .collect();
    let small1 = dips.iter().fold(f64::INFINITY, |m, &i| m.min(r1[i].abs()));
    let crosses = r1.windows(2).any(|w| w[0].signum() != w[1].signum());
    if !crosses && small1 >= NONVANISH_REL * big1 {
        return 0.0;
    }
    // values of `other` where `zero_of` changes sign or has a local |.| minimum
    let at_zeros = |zero_of: &[f64], other: &[f64]| -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..zero_of.len() - 1 {
            let (a, b) = (zero_of[i], zero_of[i + 1]);
            if a == 0.0 {
                out.push(other[i]);
            } else if a.signum() != b.signum() && b != 0.0 {
                let t = a / (a - b);
                out.push(other[i] + t * (other[i + 1] - other[i]));
            }
        }
        out
    };
    let mut z1 = at_zeros(&r1, &r2);
    if z1.is_empty() {
        // near-zero dip without a sign change
        let i = dips
            .iter()
            .copied()
            .min_by(|&a, &b| r1[a].abs().total_cmp(&r1[b].abs()))
            .unwrap_or(0);
        z1.push(r2[i]);
    }
    let z2 = at_zeros(&r2, &r1);
    let a = z1.iter().fold(f64::INFINITY, |m, v| m.min(v * v));
    // x = 0 is always a zero of f2 with f1 = 1
    let b = z2.iter().fold(1.0_f64, |m, v| m.min(1.0 / (v * v)));
    if !(a > 0.0) || !a.is_finite() {
        return 1.0;
    }
    (b / a).sqrt()
}

/// Fixed order of trial multipliers for `f1 + gamma f2`:
/// i, 1, -i, -1, 2i, 2, -2i, -2, 4i, ...
fn gamma_sweep() -> impl Iterator<Item = C64> {
    [1.0, 2.0, 4.0, 8.0]
        .into_iter()
        .flat_map(|r| [C64::new(0.0, r), C64::new(r, 0.0), C64::new(0.0, -r), C64::new(-r, 0.0)])
}

/// Picard iteration on `f = init + ∫∫ q f`. Returns `None` when it fails to
/// converge or when its iterates swell enough to have lost accuracy.
fn picard(grid: &ChebGrid, q: &[C64], init: &[C64]) -> Option<Vec<C64>> {
    let mut f = init.to_vec();
    let mut peak = max_abs(&f);
    for _ in 0..PICARD_MAX_ITER {
        let qf: Vec<C64> = q.iter().zip(&f).map(|(a, b)| a * b).collect();
        let once = grid.antiderivative_values(&qf);
        let twice = grid.antiderivative_values(&once);
        let next: Vec<C64> = init.iter().zip(&twice).map(|(a, b)| a + b).collect();
        let norm = max_abs(&next);
        peak = peak.max(norm);
        let diff = next.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        f = next;
        if !norm.is_finite() {
            return None;
        }
        if diff <= 4.0 * f64::EPSILON * norm {
            return if peak <= PICARD_GROWTH_LIMIT * norm {
                Some(f)
            } else {
                None
            };
        }
    }
    None
}

/// Solves `(I - A A diag(q)) f = init` for both right-hand sides by LU.
fn direct_solve(grid: &ChebGrid, q: &[C64], rhs1: &[C64], rhs2: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = q.len();
    let a = grid.antiderivative_matrix();
    let amat = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let aq = DMatrix::from_fn(n, n, |i, j| a[i][j] * q[j]);
    let op = DMatrix::<C64>::identity(n, n) - &amat * &aq;
    let lu = op.lu();
    let solve = |rhs: &[C64]| -> Result<Vec<C64>> {
        let b = nalgebra::DVector::from_column_slice(rhs);
        lu.solve(&b)
            .map(|v| v.iter().copied().collect())
            .ok_or(Error::Construction { min_abs: 0.0 })
    };
    Ok((solve(rhs1)?, solve(rhs2)?))
}

/// Node values of one function per row.
pub type Rows = Vec<Vec<C64>>;

/// Node values of the two recursive-integral families `X(n)`, `X~(n)`, `n = 0..=order`.
pub fn recursive_integrals(ps: &ParticularSolution, order: usize) -> Result<(Rows, Rows)> {
    let m = min_abs(&ps.f);
    if !(m > 0.0) {
        return Err(Error::NonVanishing { min_abs: m });
    }
    let grid = &ps.grid;
    let f2: Vec<C64> = ps.f.iter().map(|v| v * v).collect();
    let inv_f2: Vec<C64> = f2.iter().map(|v| v.inv()).collect();
    let ones = vec![C64::new(1.0, 0.0); f2.len()];
    let mut xs = vec![ones.clone()];
    let mut xts = vec![ones];
    for n in 1..=order {
        let (w, wt) = if n % 2 == 0 { (&f2, &inv_f2) } else { (&inv_f2, &f2) };
        let step = |prev: &[C64], w: &[C64]| -> Vec<C64> {
            let integrand: Vec<C64> = prev.iter().zip(w).map(|(a, b)| a * b).collect();
            let mut out = grid.antiderivative_values(&integrand);
            for v in &mut out {
                *v *= n as f64;
            }
            // the left node is x = 0; enforce the exact zero there
            let last = out.len() - 1;
            out[last] = C64::new(0.0, 0.0);
            out
        };
        let x_next = step(&xs[n - 1], w);
        let xt_next = step(&xts[n - 1], wt);
        xs.push(x_next);
        xts.push(xt_next);
    }
    Ok((xs, xts))
}

/// `binom[n][k]` for `0 <= k <= n <= order`.
pub(crate) fn binomials(order: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut row = vec![1.0; n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// Formal powers, recursive integrals and trace systems up to order `N`.
#[derive(Debug, Clone)]
pub struct FormalPowerTable {
    order: usize,
    source_id: u64,
    grid: ChebGrid,
    h: C64,
    f: Vec<C64>,
    f_prime: Vec<C64>,
    x: Vec<Vec<C64>>,
    xt: Vec<Vec<C64>>,
    phi: Vec<Vec<C64>>,
    psi: Vec<Vec<C64>>,
    traces_c: Vec<Vec<C64>>,
    traces_s: Vec<Vec<C64>>,
    phi_exp: Vec<ChebyshevExpansion>,
    psi_exp: Vec<ChebyshevExpansion>,
}

impl FormalPowerTable {
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn source_id(&self) -> u64 {
        self.source_id
    }
    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }
    pub fn interval(&self) -> Interval {
        self.grid.interval()
    }
    pub fn h(&self) -> C64 {
        self.h
    }
    pub fn f_nodes(&self) -> &[C64] {
        &self.f
    }
    pub fn f_prime_nodes(&self) -> &[C64] {
        &self.f_prime
    }
    /// Node values of `phi_k`.
    pub fn phi_nodes(&self, k: usize) -> &[C64] {
        &self.phi[k]
    }
    pub fn psi_nodes(&self, k: usize) -> &[C64] {
        &self.psi[k]
    }
    pub fn x_nodes(&self, n: usize) -> &[C64] {
        &self.x[n]
    }
    pub fn xt_nodes(&self, n: usize) -> &[C64] {
        &self.xt[n]
    }
    /// Node values of the trace `c_m`, `m = 0..=N`.
    pub fn c_nodes(&self, m: usize) -> &[C64] {
        &self.traces_c[m]
    }
    /// Node values of the trace `s_m`, `m = 1..=N`.
    pub fn s_nodes(&self, m: usize) -> &[C64] {
        assert!(m >= 1, "s_0 is not part of the trace system");
        &self.traces_s[m]
    }
    pub fn phi(&self, k: usize) -> &ChebyshevExpansion {
        &self.phi_exp[k]
    }
    pub fn psi(&self, k: usize) -> &ChebyshevExpansion {
        &self.psi_exp[k]
    }
    pub fn x_expansion(&self, n: usize) -> ChebyshevExpansion {
        self.grid.to_expansion(&self.x[n]).expect("grid-sized")
    }
    pub fn xt_expansion(&self, n: usize) -> ChebyshevExpansion {
        self.grid.to_expansion(&self.xt[n]).expect("grid-sized")
    }
    pub fn trace_c(&self, m: usize) -> ChebyshevExpansion {
        self.grid.to_expansion(&self.traces_c[m]).expect("grid-sized")
    }
    pub fn trace_s(&self, m: usize) -> ChebyshevExpansion {
        self.grid.to_expansion(self.s_nodes(m)).expect("grid-sized")
    }

    /// `phi_0..phi_N` at an arbitrary `x`; node index lookups are exact.
    pub fn phi_at(&self, x: f64) -> Result<Vec<C64>> {
        self.values_at(x, &self.phi, &self.phi_exp)
    }

    pub fn psi_at(&self, x: f64) -> Result<Vec<C64>> {
        self.values_at(x, &self.psi, &self.psi_exp)
    }

    /// `(f(x), f'(x))`.
    pub fn f_at(&self, x: f64) -> Result<(C64, C64)> {
        let x = self.interval().check(x)?;
        if let Some(i) = self.node_index(x) {
            return Ok((self.f[i], self.f_prime[i]));
        }
        let f = self.grid.to_expansion(&self.f)?.evaluate(x)?;
        let fp = self.grid.to_expansion(&self.f_prime)?.evaluate(x)?;
        Ok((f, fp))
    }

    fn node_index(&self, x: f64) -> Option<usize> {
        let nodes = self.grid.nodes();
        if x == nodes[0] {
            Some(0)
        } else if x == nodes[nodes.len() - 1] {
            Some(nodes.len() - 1)
        } else {
            nodes.iter().position(|&t| t == x)
        }
    }

    fn values_at(&self, x: f64, nodes: &[Vec<C64>], exps: &[ChebyshevExpansion]) -> Result<Vec<C64>> {
        let x = self.interval().check(x)?;
        if let Some(i) = self.node_index(x) {
            return Ok(nodes.iter().map(|v| v[i]).collect());
        }
        exps.iter().map(|e| e.evaluate(x)).collect()
    }
}

/// Assembles the formal powers and trace systems of order `N`.
pub fn formal_powers(ps: &ParticularSolution, order: usize) -> Result<FormalPowerTable> {
    let (x, xt) = recursive_integrals(ps, order)?;
    let f = &ps.f;
    let mut phi = Vec::with_capacity(order + 1);
    let mut psi = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let (pk, sk) = if k % 2 == 1 { (&x[k], &xt[k]) } else { (&xt[k], &x[k]) };
        phi.push(pk.iter().zip(f).map(|(a, b)| a * b).collect::<Vec<_>>());
        psi.push(sk.iter().zip(f).map(|(a, b)| a / b).collect::<Vec<_>>());
    }
    if let Some(k) = (0..=order).find(|&k| phi[k].iter().chain(&psi[k]).any(|v| !v.is_finite())) {
        return Err(Error::Overflow { order: k });
    }
    // phi_k(0) = psi_k(0) = 0 for k >= 1
    let last = ps.grid.m();
    for k in 1..=order {
        phi[k][last] = C64::new(0.0, 0.0);
        psi[k][last] = C64::new(0.0, 0.0);
    }

    let binom = binomials(order);
    let nodes = ps.grid.nodes();
    let npts = nodes.len();
    let mut traces_c = Vec::with_capacity(order + 1);
    let mut traces_s = Vec::with_capacity(order + 1);
    traces_c.push(f.clone());
    traces_s.push(vec![C64::new(0.0, 0.0); npts]);
    for m in 1..=order {
        let mut cm = vec![C64::new(0.0, 0.0); npts];
        let mut sm = vec![C64::new(0.0, 0.0); npts];
        for (i, &xv) in nodes.iter().enumerate() {
            let mut xp = 1.0;
            for k in 0..=m {
                let term = phi[m - k][i] * (binom[m][k] * xp);
                if k % 2 == 0 {
                    cm[i] += term;
                } else {
                    sm[i] += term;
                }
                xp *= xv;
            }
        }
        if cm.iter().chain(&sm).any(|v| !v.is_finite()) {
            return Err(Error::Overflow { order: m });
        }
        traces_c.push(cm);
        traces_s.push(sm);
    }

    let grid = ps.grid.clone();
    let phi_exp = phi.iter().map(|v| grid.to_expansion(v)).collect::<Result<Vec<_>>>()?;
    let psi_exp = psi.iter().map(|v| grid.to_expansion(v)).collect::<Result<Vec<_>>>()?;

    Ok(FormalPowerTable {
        order,
        source_id: ps.id,
        grid,
        h: ps.h,
        f: ps.f.clone(),
        f_prime: ps.f_prime.clone(),
        x,
        xt,
        phi,
        psi,
        traces_c,
        traces_s,
        phi_exp,
        psi_exp,
    })
}

/// Truncated SPPS solutions of `y'' - q y = lambda y`.
#[derive(Debug, Clone)]
pub struct SppsSolution {
    pub y1: ChebyshevExpansion,
    pub y2: ChebyshevExpansion,
    pub y1_prime: ChebyshevExpansion,
    pub y2_prime: ChebyshevExpansion,
}

/// Node values of `(y1, y2, y1', y2')` truncated after `k = K`.
pub fn spps_nodes(table: &FormalPowerTable, lambda: C64, truncation: usize) -> Result<[Vec<C64>; 4]> {
    if 2 * truncation + 1 > table.order {
        return Err(Error::InvalidArgument(format!(
            "SPPS truncation K = {truncation} needs formal powers up to {}, table has {}",
            2 * truncation + 1,
            table.order
        )));
    }
    let npts = table.f.len();
    let ratio: Vec<C64> = table.f.iter().zip(&table.f_prime).map(|(f, fp)| fp / f).collect();
    let mut y1 = vec![C64::new(0.0, 0.0); npts];
    let mut y2 = y1.clone();
    let mut d1 = table.f_prime.clone();
    let mut d2 = y1.clone();
    // w_even = lambda^k/(2k)!, w_odd = lambda^k/(2k+1)!
    let mut w_even = C64::new(1.0, 0.0);
    for k in 0..=truncation {
        if k > 0 {
            w_even *= lambda / ((2 * k - 1) as f64 * (2 * k) as f64);
        }
        let w_odd = w_even / (2 * k + 1) as f64;
        let p_even = &table.phi[2 * k];
        let p_odd = &table.phi[2 * k + 1];
        for i in 0..npts {
            y1[i] += w_even * p_even[i];
            y2[i] += w_odd * p_odd[i];
            if k > 0 {
                d1[i] += w_even * (ratio[i] * p_even[i] + table.psi[2 * k - 1][i] * (2 * k) as f64);
            }
            d2[i] += w_odd * (ratio[i] * p_odd[i] + table.psi[2 * k][i] * (2 * k + 1) as f64);
        }
    }
    Ok([y1, y2, d1, d2])
}

pub fn spps_solution(table: &FormalPowerTable, lambda: C64, truncation: usize) -> Result<SppsSolution> {
    let [y1, y2, d1, d2] = spps_nodes(table, lambda, truncation)?;
    let g = &table.grid;
    Ok(SppsSolution {
        y1: g.to_expansion(&y1)?,
        y2: g.to_expansion(&y2)?,
        y1_prime: g.to_expansion(&d1)?,
        y2_prime: g.to_expansion(&d2)?,
    })
}

/// Constant boundary coefficients `alpha0 y(0) + beta0 y'(0) = 0`,
/// `alpha_b y(b) + beta_b y'(b) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantBc {
    pub alpha0: C64,
    pub beta0: C64,
    pub alpha_b: C64,
    pub beta_b: C64,
}

/// Coefficients (ascending) of the SPPS characteristic polynomial in the
/// eigenvalue `lambda` of `-y'' + q y = lambda y`.
pub fn spps_char_polynomial(table: &FormalPowerTable, bc: &ConstantBc, degree: usize) -> Result<Vec<C64>> {
    if degree < 1 {
        return Err(Error::InvalidArgument("SPPS degree K must be >= 1".into()));
    }
    if 2 * degree + 1 > table.order {
        return Err(Error::InvalidArgument(format!(
            "SPPS degree {degree} needs formal powers up to {}, table has {}",
            2 * degree + 1,
            table.order
        )));
    }
    let b = 0; // node index of x = b
    let (fb, fpb) = (table.f[b], table.f_prime[b]);
    let ratio = fpb / fb;
    let left = bc.alpha0 + bc.beta0 * table.h;
    let mut coeffs = Vec::with_capacity(degree + 1);
    let mut w_even = 1.0_f64;
    for k in 0..=degree {
        if k > 0 {
            w_even /= ((2 * k - 1) * 2 * k) as f64;
        }
        let w_odd = w_even / (2 * k + 1) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let pe = table.phi[2 * k][b];
        let po = table.phi[2 * k + 1][b];
        let de = if k == 0 {
            fpb
        } else {
            ratio * pe + table.psi[2 * k - 1][b] * (2 * k) as f64
        };
        let dodd = ratio * po + table.psi[2 * k][b] * (2 * k + 1) as f64;
        let c1 = bc.alpha_b * pe + bc.beta_b * de;
        let c2 = bc.alpha_b * po + bc.beta_b * dodd;
        coeffs.push((bc.beta0 * c1 * w_even - left * c2 * w_odd) * sign);
    }
    Ok(coeffs)
}

/// Roots of the SPPS characteristic polynomial within `|lambda| <= radius`, by
/// companion-matrix eigenvalues with Newton polishing, sorted by modulus.
pub fn spps_char_roots(table: &FormalPowerTable, bc: &ConstantBc, degree: usize, radius: f64) -> Result<Vec<C64>> {
    let coeffs = spps_char_polynomial(table, bc, degree)?;
    Ok(polynomial_roots_within(&coeffs, radius))
}

fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub(crate) fn polynomial_roots_within(coeffs: &[C64], radius: f64) -> Vec<C64> {
    let radius = radius.max(f64::MIN_POSITIVE);
    // rescale lambda = R nu so the trust disc is the unit disc
    let mut scaled: Vec<C64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * radius.powi(k as i32))
        .collect();
    let big = scaled.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if big == 0.0 {
        return Vec::new();
    }
    // terms negligible on the trust disc only create spurious far roots
    while scaled.len() > 1 && scaled.last().unwrap().norm() <= 1e-15 * big {
        scaled.pop();
    }
    let deg = scaled.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = scaled[deg];
    let mut comp = DMatrix::<C64>::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -scaled[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    balance(&mut comp);
    let eig = match comp.clone().schur().eigenvalues() {
        Some(e) => e,
        None => return Vec::new(),
    };
    let mut roots: Vec<C64> = eig
        .iter()
        .map(|&nu| {
            let mut z = nu;
            for _ in 0..8 {
                let (p, dp) = horner(&scaled, z);
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1e-300) {
                    break;
                }
            }
            z * radius
        })
        .filter(|z| z.re.is_finite() && z.im.is_finite() && z.norm() <= radius)
        .collect();
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    roots
}

/// Diagonal similarity balancing (powers of two) of a square matrix.
fn balance(a: &mut DMatrix<C64>) {
    let n = a.nrows();
    let radix = 2.0_f64;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].norm();
                    r += a[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                f *= radix;
                cc *= radix;
                rr /= radix;
            }
            while cc > rr * radix {
                f /= radix;
                cc /= radix;
                rr *= radix;
            }
            if (cc + rr) < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Result of the `|phi_k(x)/x^k|` diagnostic.
#[derive(Debug, Clone)]
pub struct SanityReport {
    pub x: f64,
    pub ratios: Vec<f64>,
    pub flagged: bool,
}

/// Healthy formal powers satisfy `phi_k(x)/x^k -> 1`; the last quartile of
/// ratios outside `[1e-3, 1e3]` (or non-finite) raises the flag.
pub fn sanity_ratio(table: &FormalPowerTable, x: f64) -> Result<SanityReport> {
    sanity_ratio_to(table, x, table.order())
}

/// As [`sanity_ratio`] over `k <= order` only (e.g. the kernel order `N`
/// when the table was built longer for the series solutions).
pub fn sanity_ratio_to(table: &FormalPowerTable, x: f64, order: usize) -> Result<SanityReport> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument("sanity ratio needs x > 0".into()));
    }
    let phi = table.phi_at(x)?;
    let ratios: Vec<f64> = phi
        .iter()
        .take(order.min(table.order()) + 1)
        .enumerate()
        .map(|(k, p)| (p / x.powi(k as i32)).norm())
        .collect();
    let start = ratios.len() - ratios.len().div_ceil(4);
    let flagged = ratios[start..]
        .iter()
        .any(|r| !r.is_finite() || !(1e-3..=1e3).contains(r));
    Ok(SanityReport { x, ratios, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(m: usize, b: f64) -> ChebGrid {
        ChebGrid::new(m, Interval::new(0.0, b).unwrap()).unwrap()
    }

    fn zero_table(m: usize, b: f64, n: usize) -> FormalPowerTable {
        let g = grid(m, b);
        let q = vec![C64::new(0.0, 0.0); m + 1];
        let unit = ParticularStrategy::ClosedForm {
            f: vec![C64::new(1.0, 0.0); m + 1],
            f_prime: None,
        };
        let ps = particular_solution(&g, &q, unit).unwrap();
        formal_powers(&ps, n).unwrap()
    }

    #[test]
    fn zero_potential_gives_unit_solution() {
        let g = grid(32, 2.0);
        let q = vec![C64::new(0.0, 0.0); 33];
        let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
        // f1 = 1 never vanishes, so the real solution is kept: h = 0
        assert!(ps.h().norm() < 1e-14);
        assert!(ps.f_nodes().iter().all(|v| (v - 1.0).norm() < 1e-14));
        let c = ParticularStrategy::ClosedForm {
            f: vec![C64::new(1.0, 0.0); 33],
            f_prime: None,
        };
        let ps = particular_solution(&g, &q, c).unwrap();
        assert!(ps.h().norm() < 1e-14);
        assert_eq!(ps.f_nodes()[32], C64::new(1.0, 0.0));
    }

    #[test]
    fn unit_f_recursive_integrals_are_powers() {
        let t = zero_table(64, 1.5, 12);
        let nodes = t.grid().nodes().to_vec();
        for n in 0..=12 {
            for (i, &x) in nodes.iter().enumerate() {
                let want = x.powi(n as i32);
                let tol = 100.0 * 12.0 * f64::EPSILON * 1.5f64.powi(n as i32);
                assert!((t.x_nodes(n)[i] - want).norm() <= tol);
                assert!((t.xt_nodes(n)[i] - want).norm() <= tol);
                assert!((t.phi_nodes(n)[i] - want).norm() <= tol);
                let two = 2f64.powi(n as i32 - 1);
                if n >= 1 {
                    let w = two * want;
                    assert!((t.c_nodes(n)[i] - w).norm() <= 4.0 * tol * 2f64.powi(n as i32));
                    assert!((t.s_nodes(n)[i] - w).norm() <= 4.0 * tol * 2f64.powi(n as i32));
                }
            }
        }
    }

    #[test]
    fn vanishing_closed_form_rejected() {
        let g = grid(16, 1.0);
        let q = vec![C64::new(0.0, 0.0); 17];
        let mut f = vec![C64::new(1.0, 0.0); 17];
        f[3] = C64::new(0.0, 0.0);
        let err = particular_solution(&g, &q, ParticularStrategy::ClosedForm { f, f_prime: None }).unwrap_err();
        assert!(matches!(err, Error::NonVanishing { .. }));
    }

    #[test]
    fn spps_lambda_zero_returns_f_and_phi1() {
        let g = grid(64, 2.0);
        let q: Vec<C64> = g.sample(|x| C64::new(x.exp(), 0.0));
        let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
        let t = formal_powers(&ps, 9).unwrap();
        let [y1, y2, d1, d2] = spps_nodes(&t, C64::new(0.0, 0.0), 4).unwrap();
        for i in 0..=64 {
            assert!((y1[i] - t.f_nodes()[i]).norm() < 1e-13 * t.f_nodes()[i].norm());
            assert!((y2[i] - t.phi_nodes(1)[i]).norm() < 1e-13 * (1.0 + y2[i].norm()));
        }
        // initial values y1(0)=1, y1'(0)=h, y2(0)=0, y2'(0)=1
        let l = 64;
        let eps = 10.0 * f64::EPSILON;
        assert!((y1[l] - 1.0).norm() <= eps);
        assert!((d1[l] - t.h()).norm() <= eps * (1.0 + t.h().norm()));
        assert!(y2[l].norm() <= eps);
        assert!((d2[l] - 1.0).norm() <= eps);
    }

    #[test]
    fn spps_trig_limit_for_zero_potential() {
        let t = zero_table(64, PI, 61);
        let omega = 1.7;
        let [y1, y2, ..] = spps_nodes(&t, C64::new(-omega * omega, 0.0), 30).unwrap();
        // f = 1 + i x here, so y1 = cos + i sin/omega... compare via IVP data
        for (i, &x) in t.grid().nodes().iter().enumerate() {
            let c = (omega * x).cos();
            let s = (omega * x).sin() / omega;
            let want1 = C64::new(c, 0.0) + t.h() * s;
            assert!((y1[i] - want1).norm() < 1e-12, "x={x}");
            assert!((y2[i] - s).norm() < 1e-12);
        }
    }

    #[test]
    fn truncation_guard() {
        let t = zero_table(16, 1.0, 5);
        assert!(spps_nodes(&t, C64::new(1.0, 0.0), 3).is_err());
        let bc = ConstantBc {
            alpha0: C64::new(1.0, 0.0),
            beta0: C64::new(0.0, 0.0),
            alpha_b: C64::new(1.0, 0.0),
            beta_b: C64::new(0.0, 0.0),
        };
        assert!(spps_char_roots(&t, &bc, 0, 1.0).is_err());
    }

    #[test]
    fn dirichlet_spps_roots_for_zero_potential() {
        let t = zero_table(64, PI, 25);
        let bc = ConstantBc {
            alpha0: C64::new(1.0, 0.0),
            beta0: C64::new(0.0, 0.0),
            alpha_b: C64::new(1.0, 0.0),
            beta_b: C64::new(0.0, 0.0),
        };
        let roots = spps_char_roots(&t, &bc, 12, 5.0).unwrap();
        assert!(!roots.is_empty());
        assert!((roots[0] - 1.0).norm() < 1e-8, "{roots:?}");
        assert!(roots.iter().any(|r| (r - 4.0).norm() < 1e-6));
    }

    #[test]
    fn sanity_ratio_zero_potential_is_one() {
        let g = grid(32, 1.0);
        let q = vec![C64::new(0.0, 0.0); 33];
        let ps = particular_solution(
            &g,
            &q,
            ParticularStrategy::ClosedForm {
                f: vec![C64::new(1.0, 0.0); 33],
                f_prime: None,
            },
        )
        .unwrap();
        let t = formal_powers(&ps, 20).unwrap();
        let r = sanity_ratio(&t, 1.0).unwrap();
        // repeated integration loses a few bits per order
        for (k, v) in r.ratios.iter().enumerate() {
            assert!((v - 1.0).abs() < 1e-15 * 2f64.powi(k as i32), "k={k}");
        }
        assert!(!r.flagged);
    }

    fn paine_table(m: usize, b: f64, n: usize) -> FormalPowerTable {
        let g = grid(m, b);
        let q = g.sample(|x| C64::new(x.exp(), 0.0));
        let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
        formal_powers(&ps, n).unwrap()
    }

    #[test]
    fn sanity_ratio_paine_resolved() {
        let r = sanity_ratio(&paine_table(256, 1.0, 40), 1.0).unwrap();
        assert!(!r.flagged, "{:?}", r.ratios);
        assert!(r.ratios.iter().all(|v| (0.5..2.0).contains(v)));
    }

    #[test]
    fn sanity_ratio_flags_unreliable_powers() {
        // a degree-8 grid cannot carry x^40
        let coarse = sanity_ratio(&paine_table(8, 1.0, 40), 1.0).unwrap();
        assert!(coarse.flagged);
        // interior point of a long interval: roundoff of order u*pi^k swamps phi_k(1)
        let interior = sanity_ratio(&paine_table(256, PI, 40), 1.0).unwrap();
        assert!(interior.flagged);
    }

    #[test]
    fn oscillating_real_potential_balances_gamma() {
        // q = -15: f1 = cos(wx), f2 = sin(wx)/w, the balanced choice is e^{iwx}
        let g = grid(128, 2.0);
        let q = vec![C64::new(-15.0, 0.0); 129];
        let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
        let w = 15f64.sqrt();
        assert!((ps.h() - C64::new(0.0, w)).norm() < 0.2 * w);
        assert!(ps.min_abs() > 0.5);
    }

    #[test]
    fn growing_solution_stays_real() {
        // f1 = cosh(5.4x) rises from 1 to ~4e3 without a zero: keep f = f1
        let g = grid(96, 1.7);
        let q = vec![C64::new(28.9, 0.0); 97];
        let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
        assert!(ps.h().im == 0.0 && ps.h().re.abs() < 1e-10, "{}", ps.h());
    }

    #[test]
    fn gamma_sweep_order_is_fixed() {
        let g: Vec<C64> = gamma_sweep().take(5).collect();
        assert_eq!(
            g,
            vec![
                C64::new(0.0, 1.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, 2.0)
            ]
        );
    }
}
