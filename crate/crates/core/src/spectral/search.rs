//! Root localization for `Φ_N`: real bracketing scans, complex Newton from
//! grid minima, and merging with the SPPS roots near the origin.

use roots::{find_root_brent, Convergency};

use super::{EigenResult, Method, RootFlags, SpectralProblem};
use crate::chebfun::C64;
use crate::error::{Error, Result};

/// Relative ω tolerance for root refinement.
const OMEGA_RTOL: f64 = 1e-13;
const MAX_ITER: usize = 60;
/// Accepted roots satisfy `|Φ_N| <= ACCEPT * local scale of |Φ_N|`.
const ACCEPT: f64 = 1e-8;
/// Roots closer than `CLUSTER * u * |ω|` are flagged as a cluster.
const CLUSTER: f64 = 1e3;

/// A root of the characteristic function; `mu = ω²` is the (shifted) eigenvalue.
#[derive(Debug, Clone, Copy)]
pub(super) struct Candidate {
    pub mu: C64,
    pub omega: C64,
    pub method: Method,
    pub unconverged: bool,
}

/// Relative tolerance with an absolute floor.
struct RelTol(f64);

impl Convergency<f64> for RelTol {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= (OMEGA_RTOL * x1.abs().max(x2.abs())).max(self.0)
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= MAX_ITER
    }
}

/// Unit rotation that makes a (numerically) real-valued `Φ` real.
fn phase_of(samples: &[C64]) -> C64 {
    let big = samples
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(C64::new(1.0, 0.0));
    if big.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        big.conj() / big.norm()
    }
}

/// Brackets and refines sign changes of `Re(rot Φ(dir·t))` for `t` in `[t0, t_end]`.
fn scan_axis(
    p: &SpectralProblem,
    dir: C64,
    t0: f64,
    step: f64,
    t_end: f64,
    want: Option<usize>,
    out: &mut Vec<Candidate>,
) -> Result<()> {
    let probes: Vec<C64> = (1..=8)
        .map(|j| p.char_function(dir * (t0 + 0.731 * j as f64 * step)))
        .collect::<Result<_>>()?;
    let rot = phase_of(&probes);
    let eval = |t: f64| -> Result<(f64, f64)> {
        let v = p.char_function(dir * t)?;
        Ok(((rot * v).re, v.norm()))
    };
    let found_before = out.len();
    let mut ta = t0;
    let (mut ga, mut sa) = eval(ta)?;
    let mut j = 1;
    loop {
        let tb = t0 + j as f64 * step;
        if tb > t_end {
            break;
        }
        if want.is_some_and(|w| out.len() - found_before >= w) {
            break;
        }
        let (gb, sb) = eval(tb)?;
        if gb == 0.0 {
            push_real(p, dir, tb, sa.max(sb), out)?;
        } else if ga != 0.0 && ga.signum() != gb.signum() {
            let root = refine_bracket(|t| eval(t).map(|v| v.0), ta, tb)?;
            match root {
                Some(t) => push_real(p, dir, t, sa.max(sb), out)?,
                None => {
                    let t = 0.5 * (ta + tb);
                    out.push(Candidate {
                        mu: (dir * t) * (dir * t),
                        omega: dir * t,
                        method: Method::PhiN,
                        unconverged: true,
                    });
                }
            }
        }
        ta = tb;
        ga = gb;
        sa = sb;
        j += 1;
    }
    Ok(())
}

fn push_real(p: &SpectralProblem, dir: C64, t: f64, scale: f64, out: &mut Vec<Candidate>) -> Result<()> {
    let omega = dir * t;
    let r = p.char_function(omega)?.norm();
    // real roots of a self-adjoint problem: drop round-off imaginary parts
    let mu = C64::new((omega * omega).re, 0.0);
    let unconverged = r > ACCEPT * scale.max(f64::MIN_POSITIVE);
    let copies = if unconverged { 1 } else { multiplicity(p, omega)? };
    for _ in 0..copies {
        out.push(Candidate {
            mu,
            omega,
            method: Method::PhiN,
            unconverged,
        });
    }
    Ok(())
}

/// Odd multiplicity (1, 3 or 5) of a sign-change root, read off the growth
/// `|Φ(ω±2d)| / |Φ(ω±d)| ≈ 2^m` at `d` well above any unresolvable
/// splitting and well below the root spacing.
fn multiplicity(p: &SpectralProblem, omega: C64) -> Result<usize> {
    let d = 1e-3
        * p.spacing()
        * if omega.re == 0.0 {
            C64::new(0.0, 1.0)
        } else {
            C64::new(1.0, 0.0)
        };
    let f = |w: C64| p.char_function(w).map(|v| v.norm());
    let near = f(omega + d)? * f(omega - d)?;
    let far = f(omega + 2.0 * d)? * f(omega - 2.0 * d)?;
    if !(near > 0.0) || !far.is_finite() {
        return Ok(1);
    }
    let m = (far / near).log(4.0);
    Ok(if m < 2.0 {
        1
    } else if m < 4.0 {
        3
    } else {
        5
    })
}

/// Sign-change scan along `ω > 0` (and `ω = iτ` where negative eigenvalues
/// may exist) with step `π/(4b)`.
pub(super) fn real_scan(p: &SpectralProblem, count: usize, omega_max: Option<f64>) -> Result<Vec<Candidate>> {
    let spacing = p.spacing();
    let step = spacing / 4.0;
    let mut out = Vec::new();

    // negative eigenvalues: ω = iτ, τ² <= -min q plus slack for Robin terms
    let qmin = p.q_values().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let robin = [&p.left, &p.right]
        .iter()
        .filter_map(|bc| bc.constant())
        .map(|(a, b)| if b.norm() > 0.0 { (a / b).norm() } else { 0.0 })
        .sum::<f64>();
    let tau_max = (-qmin).max(0.0).sqrt() + spacing + robin;
    let t0 = step / 4.0;
    scan_axis(p, C64::new(0.0, 1.0), t0, step, tau_max, None, &mut out)?;
    origin_gap(p, t0 * t0, &mut out)?;
    let negatives = out.len();

    let (end, want) = match omega_max {
        Some(w) => (w, None),
        None => (
            (count as f64 + 10.0) * spacing * 4.0 + 50.0 * spacing,
            Some(count.saturating_sub(negatives) + 2),
        ),
    };
    scan_axis(p, C64::new(1.0, 0.0), step / 4.0, step, end, want, &mut out)?;
    Ok(out)
}

/// The axis scans start at `|ω| = t0`; a root with `|λ| < t0²` shows up as
/// a sign change of `Φ(√λ)` across `λ ∈ [-t0², t0²]`.
fn origin_gap(p: &SpectralProblem, s0: f64, out: &mut Vec<Candidate>) -> Result<()> {
    let at = |s: f64| C64::new(s, 0.0).sqrt();
    let probes = [p.char_function(at(-s0))?, p.char_function(at(s0))?];
    let rot = phase_of(&probes);
    let g = |s: f64| -> Result<f64> { Ok((rot * p.char_function(at(s))?).re) };
    let (ga, gb) = ((rot * probes[0]).re, (rot * probes[1]).re);
    if ga == 0.0 || gb == 0.0 || ga.signum() == gb.signum() {
        return Ok(());
    }
    let (s, ok) = match refine_bracket_to(g, -s0, s0, OMEGA_RTOL * s0)? {
        Some(s) => (s, true),
        None => (0.0, false),
    };
    let scale = probes[0].norm().max(probes[1].norm());
    let omega = at(s);
    let r = p.char_function(omega)?.norm();
    out.push(Candidate {
        mu: C64::new(s, 0.0),
        omega,
        method: Method::PhiN,
        unconverged: !ok || r > ACCEPT * scale.max(f64::MIN_POSITIVE),
    });
    Ok(())
}

/// Newton iteration with a central-difference derivative and step limiting.
fn newton(p: &SpectralProblem, seed: C64, max_step: f64) -> Option<(C64, bool)> {
    let mut w = seed;
    for _ in 0..MAX_ITER {
        let f = p.char_function(w).ok()?;
        if f.norm() == 0.0 {
            return Some((w, true));
        }
        let d = 1e-6 * w.norm().max(1.0);
        let fp = (p.char_function(w + d).ok()? - p.char_function(w - d).ok()?) / (2.0 * d);
        if fp.norm() == 0.0 || !fp.re.is_finite() {
            return None;
        }
        let mut dw = f / fp;
        if dw.norm() > max_step {
            dw *= max_step / dw.norm();
        }
        w -= dw;
        if !(w.re.is_finite() && w.im.is_finite()) {
            return None;
        }
        if dw.norm() <= OMEGA_RTOL * w.norm().max(1.0) {
            return Some((w, true));
        }
    }
    Some((w, false))
}

/// Newton from local minima of `|Φ_N|` on a grid over `[0, W] × [-Y, Y]`,
/// from lattice points `k π/(2b) + 0.5i π/b`, and from the SPPS roots.
pub(super) fn complex_search(
    p: &SpectralProblem,
    count: usize,
    omega_max: Option<f64>,
    seeds: &[C64],
) -> Result<Vec<Candidate>> {
    let spacing = p.spacing();
    let y_half = 2.0_f64.max(spacing);
    let dx = spacing / 8.0;
    let dy = (spacing / 8.0).min(y_half / 8.0);
    let mut w_end = omega_max.unwrap_or((count as f64 + 3.0) * spacing);
    let mut w_start = 0.0;
    let mut all: Vec<Candidate> = Vec::new();
    let mut seeded = false;

    loop {
        let nx = ((w_end - w_start) / dx).ceil() as usize + 1;
        let ny = (2.0 * y_half / dy).round() as usize + 1;
        let mut grid = vec![vec![0.0_f64; ny]; nx];
        for (i, col) in grid.iter_mut().enumerate() {
            for (j, v) in col.iter_mut().enumerate() {
                let w = C64::new(w_start + i as f64 * dx, -y_half + j as f64 * dy);
                *v = p.char_function(w)?.norm();
            }
        }
        let mut starts: Vec<(C64, f64)> = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let v = grid[i][j];
                let mut is_min = true;
                let mut scale = v;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a < 0 || b < 0 || a >= nx as i64 || b >= ny as i64 {
                            continue;
                        }
                        let u = grid[a as usize][b as usize];
                        scale = scale.max(u);
                        if u < v {
                            is_min = false;
                        }
                    }
                }
                if is_min {
                    starts.push((C64::new(w_start + i as f64 * dx, -y_half + j as f64 * dy), scale));
                }
            }
        }
        let mut k = (w_start / (spacing / 2.0)).ceil() as usize;
        while k as f64 * spacing / 2.0 <= w_end {
            let w = C64::new(k as f64 * spacing / 2.0, 0.5 * spacing);
            let s = p.char_function(w)?.norm();
            starts.push((w, s));
            k += 1;
        }
        if !seeded {
            for &w in seeds {
                let s = p.char_function(w + dx)?.norm().max(p.char_function(w - dx)?.norm());
                starts.push((w, s));
            }
            seeded = true;
        }

        for (seed, scale) in starts {
            let Some((mut w, converged)) = newton(p, seed, spacing / 2.0) else {
                continue;
            };
            if w.re < 0.0 || (w.re == 0.0 && w.im < 0.0) {
                // keep −ω only when it is itself a root (even Φ)
                let r_neg = p.char_function(-w)?.norm();
                let r_pos = p.char_function(w)?.norm();
                if r_neg > 10.0 * r_pos.max(ACCEPT * scale) {
                    continue;
                }
                w = -w;
            }
            let r = p.char_function(w)?.norm();
            let local = scale.max(p.char_function(w + dx)?.norm());
            if r > ACCEPT * local {
                continue;
            }
            let mu = w * w;
            if all.iter().any(|c| (c.mu - mu).norm() <= 1e-9 * (1.0 + mu.norm())) {
                continue;
            }
            all.push(Candidate {
                mu,
                omega: w,
                method: Method::PhiN,
                unconverged: !converged,
            });
        }

        if omega_max.is_some() {
            break;
        }
        // enough roots safely inside the scanned strip?
        let inside = all.iter().filter(|c| c.omega.re <= w_end - 2.0 * spacing).count();
        if inside >= count || w_end > (count as f64 + 3.0) * spacing * 16.0 {
            break;
        }
        w_start = w_end - dx;
        w_end *= 2.0;
    }
    Ok(all)
}

/// Takes the SPPS roots up to and including the closest (SPPS, Φ_N) pair and
/// the Φ_N roots beyond it. Without a matching pair the SPPS roots are ignored.
pub(super) fn merge(phi: Vec<Candidate>, spps: Vec<C64>) -> Vec<Candidate> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, s) in spps.iter().enumerate() {
        for (j, c) in phi.iter().enumerate() {
            let d = (s - c.mu).norm();
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((i, j, d));
            }
        }
    }
    let Some((i, j, d)) = best else {
        return phi;
    };
    if d > 1e-6 * (1.0 + spps[i].norm()) {
        return phi;
    }
    let pivot_spps = spps[i].norm();
    let pivot_phi = phi[j].mu.norm();
    let real = phi.iter().all(|c| c.mu.im == 0.0);
    let mut out: Vec<Candidate> = spps
        .iter()
        .filter(|s| s.norm() <= pivot_spps)
        .map(|&s| {
            let mu = if real { C64::new(s.re, 0.0) } else { s };
            let mut omega = mu.sqrt();
            if omega.re < 0.0 {
                omega = -omega;
            }
            Candidate {
                mu,
                omega,
                method: Method::Spps,
                unconverged: false,
            }
        })
        .collect();
    out.extend(phi.into_iter().filter(|c| c.mu.norm() > pivot_phi));
    out
}

/// Unshifts, orders, deduplicates, flags clusters and truncates to `count`.
pub(super) fn assemble(
    p: &SpectralProblem,
    mut roots: Vec<Candidate>,
    count: usize,
    omega_max: Option<f64>,
) -> EigenResult {
    let shift = p.shift();
    let key = |c: &Candidate| c.mu - shift;
    roots.sort_by(|a, b| {
        let (la, lb) = (key(a), key(b));
        la.re.total_cmp(&lb.re).then(la.im.total_cmp(&lb.im))
    });
    let mut uniq: Vec<Candidate> = Vec::with_capacity(roots.len());
    for c in roots {
        if let Some(last) = uniq.last() {
            // identical roots reached twice (e.g. SPPS and Φ_N) collapse
            if (last.mu - c.mu).norm() <= 1e-12 * (1.0 + c.mu.norm()) && last.method != c.method {
                continue;
            }
        }
        uniq.push(c);
    }
    if let Some(w) = omega_max {
        uniq.retain(|c| c.omega.re <= w);
    }
    let mut result = EigenResult {
        eps1: p.eps().0,
        eps2: p.eps().1,
        ..Default::default()
    };
    let n = uniq.len();
    let mut flags = vec![RootFlags::default(); n];
    for i in 0..n {
        flags[i].unconverged = uniq[i].unconverged;
        if i + 1 < n {
            let (a, b) = (uniq[i].omega, uniq[i + 1].omega);
            if (a - b).norm() < CLUSTER * f64::EPSILON * a.norm().max(b.norm()) {
                flags[i].cluster = true;
                flags[i + 1].cluster = true;
            }
        }
    }
    for (c, fl) in uniq.iter().zip(flags).take(count) {
        let residual = p.char_function(c.omega).map(|v| v.norm()).unwrap_or(f64::NAN);
        if fl.unconverged {
            result.warnings.push(format!(
                "root near omega = {} did not meet the acceptance test",
                c.omega
            ));
        }
        result.eigenvalues.push(c.mu - shift);
        result.omegas.push(c.omega);
        result.methods.push(c.method);
        result.residuals.push(residual);
        result.flags.push(fl);
    }
    result.shortfall = count.saturating_sub(result.eigenvalues.len());
    if result.shortfall > 0 {
        let range = omega_max.map(|w| format!(" below omega = {w}")).unwrap_or_default();
        result.warnings.push(format!(
            "found {} of {count} requested eigenvalues{range}",
            result.len()
        ));
    }
    result
}

/// Refines sign changes of a real function of `t` given as grid samples.
pub(super) fn refine_bracket<F>(g: F, ta: f64, tb: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    refine_bracket_to(g, ta, tb, 1e-300)
}

fn refine_bracket_to<F>(mut g: F, ta: f64, tb: f64, floor: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut err: Option<Error> = None;
    let root = find_root_brent(
        ta,
        tb,
        |t| match g(t) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        },
        &mut RelTol(floor),
    );
    if let Some(e) = err {
        return Err(e);
    }
    if root.is_ok() {
        return Ok(root.ok());
    }
    // Brent stalls on flat (multiple) roots; bisection does not
    let (mut a, mut b) = (ta, tb);
    let mut ga = g(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if RelTol(floor).is_converged(a, b) || m == a || m == b {
            return Ok(Some(m));
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(Some(m));
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(None)
}
