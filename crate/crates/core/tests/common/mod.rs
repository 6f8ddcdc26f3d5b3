//! Independent reference solvers for the integration tests: an adaptive
//! Dormand–Prince integrator, complex shooting, and a scaled Prüfer angle
//! for Dirichlet eigenvalues. Nothing here touches the library's numerics.

#![allow(dead_code)]

use sltransmute::C64;

/// A real potential.
pub type RealQ = fn(f64) -> f64;

pub type Rhs<'a> = &'a dyn Fn(f64, &[f64], &mut [f64]);

/// Adaptive RK5(4) from `x0` to `x1` (either direction).
pub fn dopri(rhs: Rhs, x0: f64, y0: &[f64], x1: f64, rtol: f64, atol: f64) -> Vec<f64> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // fifth-order weights are A[6]; these are fifth minus fourth
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let d = y0.len();
    let mut y = y0.to_vec();
    let mut x = x0;
    let span = x1 - x0;
    if span == 0.0 {
        return y;
    }
    let dir = span.signum();
    let mut h = dir * span.abs().min(1e-3);
    let mut k = vec![vec![0.0; d]; 7];
    let mut tmp = vec![0.0; d];
    rhs(x, &y, &mut k[0]);
    let mut steps = 0usize;
    while (x1 - x) * dir > 0.0 {
        steps += 1;
        assert!(steps < 50_000_000, "integrator stalled at x = {x}");
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        for s in 1..7 {
            for i in 0..d {
                tmp[i] = y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>();
            }
            rhs(x + C[s] * h, &tmp, &mut k[s]);
        }
        // tmp now holds the fifth-order solution (FSAL stage input)
        let mut err: f64 = 0.0;
        for i in 0..d {
            let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = atol + rtol * y[i].abs().max(tmp[i].abs());
            err = err.max((e / sc).abs());
        }
        if err <= 1.0 {
            x += h;
            y.copy_from_slice(&tmp);
            k.swap(0, 6);
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
    }
    y
}

/// Solution of `-y'' + q y = λ y` with `y(x0) = y0`, `y'(x0) = y1`, returned
/// as `(y, y')` at each of `xs`.
pub fn shoot(q: &dyn Fn(f64) -> C64, lambda: C64, x0: f64, y0: C64, y1: C64, xs: &[f64]) -> Vec<(C64, C64)> {
    let rhs = |x: f64, s: &[f64], ds: &mut [f64]| {
        let w = q(x) - lambda;
        let y = C64::new(s[0], s[1]);
        let d2 = w * y;
        ds[0] = s[2];
        ds[1] = s[3];
        ds[2] = d2.re;
        ds[3] = d2.im;
    };
    xs.iter()
        .map(|&x| {
            let s = dopri(&rhs, x0, &[y0.re, y0.im, y1.re, y1.im], x, 1e-13, 1e-14);
            (C64::new(s[0], s[1]), C64::new(s[2], s[3]))
        })
        .collect()
}

/// Scaled Prüfer angle at `b` for `-y'' + q y = λ y`, `y(0) = 0`, real `q`.
/// With `y = r sin θ / √S`, `y' = r √S cos θ` the angle obeys
/// `θ' = S cos²θ + (λ - q) sin²θ / S` and `θ(b) = nπ` at the `n`-th
/// Dirichlet eigenvalue.
pub fn prufer_angle(q: &dyn Fn(f64) -> f64, b: f64, lambda: f64) -> f64 {
    let s = lambda.abs().sqrt().max(1.0);
    let rhs = |x: f64, t: &[f64], dt: &mut [f64]| {
        let (sn, cs) = t[0].sin_cos();
        dt[0] = s * cs * cs + (lambda - q(x)) * sn * sn / s;
    };
    dopri(&rhs, 0.0, &[0.0], b, 1e-13, 1e-13)[0]
}

/// Number of Dirichlet eigenvalues below `lambda`.
pub fn dirichlet_count(q: &dyn Fn(f64) -> f64, b: f64, lambda: f64) -> usize {
    (prufer_angle(q, b, lambda) / std::f64::consts::PI).floor().max(0.0) as usize
}

/// The `n`-th (1-based) Dirichlet eigenvalue on `[0, b]`, starting the bracket
/// search at `guess`.
pub fn dirichlet_eigenvalue(q: &dyn Fn(f64) -> f64, b: f64, n: usize, guess: f64) -> f64 {
    let target = n as f64 * std::f64::consts::PI;
    let g = |l: f64| prufer_angle(q, b, l) - target;
    let mut step = 1.0 + 0.01 * guess.abs();
    let (mut lo, mut hi) = (guess - step, guess + step);
    while g(lo) > 0.0 {
        step *= 2.0;
        lo -= step;
    }
    while g(hi) < 0.0 {
        step *= 2.0;
        hi += step;
    }
    // Illinois false position
    let (mut flo, mut fhi) = (g(lo), g(hi));
    let mut side = 0;
    for _ in 0..200 {
        let m = (lo * fhi - hi * flo) / (fhi - flo);
        let fm = g(m);
        if fm == 0.0 || (hi - lo) < 1e-15 * m.abs().max(1.0) {
            return m;
        }
        if (fm > 0.0) == (fhi > 0.0) {
            hi = m;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        } else {
            lo = m;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        }
        if (hi - lo) < 4e-16 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Recursive integrals `X(n)`, `X~(n)` for `n = 0..=order` at `xs`, by
/// integrating `f'' = q f` together with the whole chain as one ODE system.
pub fn recursive_integrals(q: &dyn Fn(f64) -> f64, h: f64, order: usize, xs: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    // state: f, f', X(1..=order), X~(1..=order)
    let rhs = |x: f64, s: &[f64], ds: &mut [f64]| {
        let f = s[0];
        ds[0] = s[1];
        ds[1] = q(x) * f;
        let f2 = f * f;
        for n in 1..=order {
            let (w, wt) = if n % 2 == 0 { (f2, 1.0 / f2) } else { (1.0 / f2, f2) };
            let prev = if n == 1 { 1.0 } else { s[n] };
            let prevt = if n == 1 { 1.0 } else { s[order + n] };
            ds[1 + n] = n as f64 * prev * w;
            ds[1 + order + n] = n as f64 * prevt * wt;
        }
    };
    let mut init = vec![0.0; 2 + 2 * order];
    init[0] = 1.0;
    init[1] = h;
    xs.iter()
        .map(|&x| {
            let s = dopri(&rhs, 0.0, &init, x, 1e-13, 1e-15);
            let mut xv = vec![1.0];
            xv.extend_from_slice(&s[2..2 + order]);
            let mut xt = vec![1.0];
            xt.extend_from_slice(&s[2 + order..]);
            (xv, xt)
        })
        .collect()
}
