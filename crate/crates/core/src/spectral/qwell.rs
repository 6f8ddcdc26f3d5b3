//! Bound states of `-u'' + Q u = λ u` on the line with `Q = q` on `[0, ℓ]`
//! and `Q = 0` outside. With `λ = -β²`, `ω = iβ`, the decaying exterior
//! solutions impose `u'(0) - β u(0) = 0` and `u'(ℓ) + β u(ℓ) = 0`.

use super::search::refine_bracket;
use super::{BoundaryCondition, EigenResult, Method, RootFlags, SpectralProblem};
use crate::chebfun::C64;
use crate::error::Result;
use std::sync::Arc;

fn well_conditions() -> (BoundaryCondition, BoundaryCondition) {
    // β = -iω: α0 = -β = iω, αb = β = -iω
    let left = BoundaryCondition::new(super::BcCoef::Fn(Arc::new(|w: C64| C64::new(0.0, 1.0) * w)), 1.0);
    let right = BoundaryCondition::new(super::BcCoef::Fn(Arc::new(|w: C64| C64::new(0.0, -1.0) * w)), 1.0);
    (left, right)
}

/// Scans `β` over `beta_range` (default `(0, sqrt(max(-q)))`) and returns
/// `λ = -β²` for every bound state found. The problem's own boundary
/// conditions are not used.
pub fn quantum_well(problem: &SpectralProblem, beta_range: Option<(f64, f64)>) -> Result<EigenResult> {
    let (eps1, eps2) = problem.eps();
    let mut result = EigenResult {
        eps1,
        eps2,
        ..Default::default()
    };
    let neg_max = problem.q_values().map(|v| -v.re).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = match beta_range {
        Some(r) => r,
        None if neg_max > 0.0 => (0.0, neg_max.sqrt()),
        None => return Ok(result),
    };
    if !(hi > lo) {
        return Ok(result);
    }
    let (left, right) = well_conditions();
    let phi = |beta: f64| problem.char_value(&left, &right, C64::new(0.0, beta));

    // Φ(iβ) is real up to a constant phase for real q
    let step = (problem.spacing() / 8.0).min((hi - lo) / 400.0);
    let first = lo + step * 1e-3;
    let probes: Vec<C64> = (0..16)
        .map(|j| phi(lo + (hi - lo) * (j as f64 + 0.5) / 16.0))
        .collect::<Result<_>>()?;
    let big = probes
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    let rot = if big.norm() > 0.0 {
        big.conj() / big.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let g = |beta: f64| -> Result<f64> { Ok((rot * phi(beta)?).re) };

    let mut betas: Vec<(f64, bool)> = Vec::new();
    let mut ta = first;
    let mut ga = g(ta)?;
    let n_steps = ((hi - first) / step).ceil() as usize;
    for j in 1..=n_steps {
        let tb = (first + j as f64 * step).min(hi * (1.0 - 1e-14));
        if tb <= ta {
            break;
        }
        let gb = g(tb)?;
        if gb == 0.0 {
            betas.push((tb, true));
        } else if ga != 0.0 && ga.signum() != gb.signum() {
            match refine_bracket(g, ta, tb)? {
                Some(t) => betas.push((t, true)),
                None => betas.push((0.5 * (ta + tb), false)),
            }
        }
        ta = tb;
        ga = gb;
    }

    // deepest state first: ascending λ = -β²
    betas.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (beta, ok) in betas {
        let omega = C64::new(0.0, beta);
        result.eigenvalues.push(C64::new(-beta * beta, 0.0));
        result.omegas.push(omega);
        result.methods.push(Method::PhiN);
        result.residuals.push(phi(beta)?.norm());
        result.flags.push(RootFlags {
            cluster: false,
            unconverged: !ok,
        });
        if !ok {
            result
                .warnings
                .push(format!("bound state near beta = {beta} did not converge"));
        }
    }
    Ok(result)
}
