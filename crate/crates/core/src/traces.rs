//! Least-squares fit of the Goursat data by the trace systems.
//!
//! The kernel coefficients satisfy, on `[0, b]`,
//!
//! ```text
//! g1(x) = h/2 + 1/4 ∫_0^x q  ≈  Σ_{n=0}^N a_n c_n(x)
//! g2(x) =       1/4 ∫_0^x q  ≈  Σ_{n=1}^N b_n s_n(x)
//! ```
//!
//! with `a_0 = b_0 = h/2` held fixed.

use nalgebra::{DMatrix, DVector};

use crate::chebfun::{ChebyshevExpansion, C64};
use crate::error::{Error, Result};
use crate::spps::{FormalPowerTable, Rows};

/// Singular values below `RCOND * max(rows, cols) * sigma_max` are dropped.
pub const RCOND: f64 = f64::EPSILON;

/// Fewer than this fraction of numerically independent columns is reported
/// as a conditioning failure instead of a truncated fit.
pub const MIN_RANK_FRACTION: f64 = 0.5;

/// Fitted kernel coefficients and achieved errors.
#[derive(Debug, Clone)]
pub struct KernelApproximation {
    n: usize,
    a: Vec<C64>,
    b: Vec<C64>,
    eps1: f64,
    eps2: f64,
    h: C64,
    rank: (usize, usize),
    source_id: u64,
}

impl KernelApproximation {
    pub fn order(&self) -> usize {
        self.n
    }
    /// `a_0..a_N`.
    pub fn a(&self) -> &[C64] {
        &self.a
    }
    /// `b_0..b_N`, `b_0 = h/2`.
    pub fn b(&self) -> &[C64] {
        &self.b
    }
    pub fn eps1(&self) -> f64 {
        self.eps1
    }
    pub fn eps2(&self) -> f64 {
        self.eps2
    }
    pub fn h(&self) -> C64 {
        self.h
    }
    /// Numerical rank of the `c` and `s` column systems.
    pub fn effective_rank(&self) -> (usize, usize) {
        self.rank
    }
    pub fn source_id(&self) -> u64 {
        self.source_id
    }
}

/// `g1 = h/2 + ∫q/4`, `g2 = ∫q/4`.
pub fn goursat_targets(q: &ChebyshevExpansion, h: C64) -> (ChebyshevExpansion, ChebyshevExpansion) {
    let g2 = q.antiderivative().scaled(C64::new(0.25, 0.0));
    let mut c = g2.coeffs().to_vec();
    c[0] += h * 0.5;
    let g1 = ChebyshevExpansion::new(g2.interval(), c).expect("non-empty");
    (g1, g2)
}

/// Fits `a_1..a_N`, `b_1..b_N`. `abscissas` defaults to the table's nodes.
pub fn fit_kernel(
    table: &FormalPowerTable,
    g1: &ChebyshevExpansion,
    g2: &ChebyshevExpansion,
    n: usize,
    abscissas: Option<&[f64]>,
) -> Result<KernelApproximation> {
    if n == 0 {
        return Err(Error::InvalidArgument("kernel order N must be >= 1".into()));
    }
    if n > table.order() {
        return Err(Error::InvalidArgument(format!(
            "kernel order {n} exceeds formal power order {}",
            table.order()
        )));
    }
    let h = table.h();
    let half_h = h * 0.5;

    // columns c_0..c_N, s_1..s_N and targets sampled on the fit grid
    let (cols_c, cols_s, t1, t2): (Rows, Rows, Vec<C64>, Vec<C64>) = match abscissas {
        None => {
            let grid = table.grid();
            (
                (0..=n).map(|m| table.c_nodes(m).to_vec()).collect(),
                (1..=n).map(|m| table.s_nodes(m).to_vec()).collect(),
                grid.values(g1),
                grid.values(g2),
            )
        }
        Some(xs) => {
            let ev = |e: &ChebyshevExpansion| -> Result<Vec<C64>> { xs.iter().map(|&x| e.evaluate(x)).collect() };
            (
                (0..=n).map(|m| ev(&table.trace_c(m))).collect::<Result<_>>()?,
                (1..=n).map(|m| ev(&table.trace_s(m))).collect::<Result<_>>()?,
                ev(g1)?,
                ev(g2)?,
            )
        }
    };
    let rows = t1.len();
    if rows < 2 * (n + 1) {
        return Err(Error::InvalidArgument(format!(
            "fit grid has {rows} points, order {n} needs at least {}",
            2 * (n + 1)
        )));
    }

    let rhs1: Vec<C64> = t1.iter().zip(&cols_c[0]).map(|(g, c)| g - half_h * c).collect();
    let (a_fit, rank1) = lstsq(&cols_c[1..], &rhs1, n)?;
    let (b_fit, rank2) = lstsq(&cols_s, &t2, n)?;

    let mut a = vec![half_h];
    a.extend(a_fit);
    let mut b = vec![half_h];
    b.extend(b_fit);

    let resid = |target: &[C64], cols: &[Vec<C64>], coef: &[C64]| -> f64 {
        (0..rows)
            .map(|i| {
                let s: C64 = cols.iter().zip(coef).map(|(c, k)| c[i] * k).sum();
                (target[i] - s).norm()
            })
            .fold(0.0, f64::max)
    };
    let eps1 = resid(&t1, &cols_c, &a);
    let eps2 = resid(&t2, &cols_s, &b[1..]);

    Ok(KernelApproximation {
        n,
        a,
        b,
        eps1,
        eps2,
        h,
        rank: (rank1, rank2),
        source_id: table.source_id(),
    })
}

/// Column-equilibrated min-norm least squares via SVD.
fn lstsq(cols: &[Vec<C64>], rhs: &[C64], requested: usize) -> Result<(Vec<C64>, usize)> {
    let rows = rhs.len();
    let ncols = cols.len();
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| {
            let s = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let a = DMatrix::from_fn(rows, ncols, |i, j| cols[j][i] / scale[j]);
    let b = DVector::from_column_slice(rhs);
    if b.iter().all(|v| v.norm() == 0.0) {
        return Ok((vec![C64::new(0.0, 0.0); ncols], ncols));
    }
    if a.iter().any(|v| !v.is_finite()) || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning {
            effective_rank: 0,
            requested,
        });
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = RCOND * rows.max(ncols) as f64 * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if (rank as f64) < MIN_RANK_FRACTION * requested as f64 {
        return Err(Error::Conditioning {
            effective_rank: rank,
            requested,
        });
    }
    let x = svd
        .solve(&b, cutoff)
        .map_err(|e| Error::Convergence(format!("least-squares solve failed: {e}")))?;
    Ok((x.iter().zip(&scale).map(|(v, s)| v / s).collect(), rank))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebfun::{ChebGrid, Interval};
    use crate::spps::{formal_powers, particular_solution, ParticularStrategy};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn targets_for_constant_potential() {
        let iv = Interval::new(0.0, 2.0).unwrap();
        let q = ChebyshevExpansion::constant(iv, c(-15.0));
        let h = C64::new(0.0, 15f64.sqrt());
        let (g1, g2) = goursat_targets(&q, h);
        for x in [0.0, 0.5, 1.3, 2.0] {
            let want2 = c(-15.0 * x / 4.0);
            assert!((g2.evaluate(x).unwrap() - want2).norm() < 1e-14);
            assert!((g1.evaluate(x).unwrap() - (want2 + h / 2.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_potential_fits_nothing() {
        let g = ChebGrid::new(32, Interval::new(0.0, 1.0).unwrap()).unwrap();
        let q = vec![c(0.0); 33];
        let unit = ParticularStrategy::ClosedForm {
            f: vec![c(1.0); 33],
            f_prime: None,
        };
        let ps = particular_solution(&g, &q, unit).unwrap();
        let t = formal_powers(&ps, 8).unwrap();
        let qe = g.to_expansion(&q).unwrap();
        let (g1, g2) = goursat_targets(&qe, ps.h());
        let k = fit_kernel(&t, &g1, &g2, 8, None).unwrap();
        assert!(k.a().iter().chain(k.b()).all(|v| v.norm() == 0.0));
        assert_eq!(k.eps1(), 0.0);
        assert_eq!(k.eps2(), 0.0);
    }

    #[test]
    fn order_and_grid_guards() {
        let g = ChebGrid::new(8, Interval::new(0.0, 1.0).unwrap()).unwrap();
        let q = vec![c(1.0); 9];
        let ps = particular_solution(&g, &q, ParticularStrategy::Auto).unwrap();
        let t = formal_powers(&ps, 6).unwrap();
        let qe = g.to_expansion(&q).unwrap();
        let (g1, g2) = goursat_targets(&qe, ps.h());
        assert!(fit_kernel(&t, &g1, &g2, 7, None).is_err());
        // 9 nodes < 2(N+1) = 14
        assert!(fit_kernel(&t, &g1, &g2, 6, None).is_err());
        assert!(fit_kernel(&t, &g1, &g2, 3, None).is_ok());
    }
}
