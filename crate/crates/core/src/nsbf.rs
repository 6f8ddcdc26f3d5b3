//! Neumann-series-of-Bessel-type evaluation of the approximate solutions
//! `c_N`, `s_N`, their Darboux derivatives and the approximate kernels.
//!
//! All four solution formulas reduce, for fixed `x`, to sums
//! `Σ_k P_k(x) M_k(ω, x)` where `M_k` are the moments `∫_0^x t^k sin ωt dt`
//! or `∫_0^x t^k cos ωt dt`. The `P_k` are precomputed once per `x`
//! ([`PointData`]), so each `ω` costs `O(N)`.

use crate::chebfun::C64;
use crate::error::{Error, Result};
use crate::spps::{binomials, FormalPowerTable};
use crate::traces::KernelApproximation;

/// Below this `|ωx|` the moments are summed from their Maclaurin series.
pub const SERIES_THRESHOLD: f64 = 0.5;

/// `∫_0^x t^k sin ωt dt`, `∫_0^x t^k cos ωt dt` and `∫_0^x t^k sin(ωt)/ω dt`.
#[derive(Debug, Clone)]
pub struct TrigMoments {
    pub omega: C64,
    pub x: f64,
    pub sin_moments: Vec<C64>,
    pub cos_moments: Vec<C64>,
    /// Sine moments divided by `ω`, finite at `ω = 0`.
    pub sin_over_omega: Vec<C64>,
}

/// Scaled moments on `[0,1]` with `z = ωx`:
/// `sig_k = ∫ u^k sin(zu)/z du`, `cos_k = ∫ u^k cos(zu) du`, `k = 0..=k_max`.
fn unit_moments(z: C64, k_max: usize, theta: f64) -> (Vec<C64>, Vec<C64>) {
    let az = z.norm();
    let mut sig = vec![C64::new(0.0, 0.0); k_max + 1];
    let mut cos = vec![C64::new(0.0, 0.0); k_max + 1];
    if az < theta || az == 0.0 {
        let z2 = z * z;
        for k in 0..=k_max {
            // Σ (-1)^j z^{2j} / ((2j+1)! (k+2j+2)) and Σ (-1)^j z^{2j} / ((2j)! (k+2j+1))
            let mut ps = C64::new(1.0, 0.0); // (-1)^j z^{2j}/(2j)!
            let mut s_acc = C64::new(0.0, 0.0);
            let mut c_acc = C64::new(0.0, 0.0);
            for j in 0..60 {
                let kf = k as f64;
                let jf = j as f64;
                let ts = ps / ((2.0 * jf + 1.0) * (kf + 2.0 * jf + 2.0));
                let tc = ps / (kf + 2.0 * jf + 1.0);
                s_acc += ts;
                c_acc += tc;
                if ts.norm() <= f64::EPSILON * s_acc.norm() && tc.norm() <= f64::EPSILON * c_acc.norm() {
                    break;
                }
                ps = -ps * z2 / ((2.0 * jf + 1.0) * (2.0 * jf + 2.0));
            }
            sig[k] = s_acc;
            cos[k] = c_acc;
        }
        return (sig, cos);
    }

    let (sz, cz) = (z.sin(), z.cos());
    // upward is stable while k <= |z|
    let k_up = (az.floor() as usize).min(k_max);
    let mut s_prev = (C64::new(1.0, 0.0) - cz) / z; // ∫ u^0 sin(zu)
    let mut c_prev = sz / z;
    sig[0] = s_prev / z;
    cos[0] = c_prev;
    for k in 1..=k_up {
        let kf = k as f64;
        let s_k = (-cz + c_prev * kf) / z;
        let c_k = (sz - s_prev * kf) / z;
        sig[k] = s_k / z;
        cos[k] = c_k;
        s_prev = s_k;
        c_prev = c_k;
    }
    if k_up == k_max {
        return (sig, cos);
    }
    // downward from zero start values far enough above max(k_max, |z|)
    // start-value error reaches index k_max damped by Π_{k_max<j<=K} |z|/j
    let mut k_start = k_max.max(az.ceil() as usize);
    let mut damp = 1.0;
    while damp > 1e-20 {
        k_start += 1;
        damp *= az / k_start as f64;
    }
    let mut s_k = C64::new(0.0, 0.0);
    let mut c_k = C64::new(0.0, 0.0);
    for k in (k_up + 2..=k_start).rev() {
        let kf = k as f64;
        let c_km1 = (z * s_k + cz) / kf;
        let s_km1 = (sz - z * c_k) / kf;
        s_k = s_km1;
        c_k = c_km1;
        let idx = k - 1;
        if idx <= k_max {
            sig[idx] = s_k / z;
            cos[idx] = c_k;
        }
    }
    (sig, cos)
}

/// Moments for `k = 0..=k_max`. For `|ωx| >= θ` an upward recurrence runs
/// while `k <= |ωx|` and a downward one above; below `θ` a Maclaurin series.
pub fn trig_moments(omega: C64, x: f64, k_max: usize) -> TrigMoments {
    trig_moments_with_threshold(omega, x, k_max, SERIES_THRESHOLD)
}

/// [`trig_moments`] with an explicit series threshold `θ`.
pub fn trig_moments_with_threshold(omega: C64, x: f64, k_max: usize, theta: f64) -> TrigMoments {
    let z = omega * x;
    let (sig, cos) = unit_moments(z, k_max, theta);
    let mut sin_moments = Vec::with_capacity(k_max + 1);
    let mut cos_moments = Vec::with_capacity(k_max + 1);
    let mut sin_over_omega = Vec::with_capacity(k_max + 1);
    let mut xp = x; // x^{k+1}
    for k in 0..=k_max {
        cos_moments.push(cos[k] * xp);
        sin_over_omega.push(sig[k] * (xp * x));
        sin_moments.push(sig[k] * z * xp);
        xp *= x;
    }
    TrigMoments {
        omega,
        x,
        sin_moments,
        cos_moments,
        sin_over_omega,
    }
}

/// Which approximate kernel [`SolutionBasis::kernel_eval`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `K_{f,N}`
    Kf,
    /// `K_{1/f,N}`
    K1f,
    /// `C_N`, the cosine kernel
    C,
    /// `S_N`, the sine kernel
    S,
}

/// `x`-dependent reductions of the solution formulas.
#[derive(Debug, Clone)]
pub struct PointData {
    pub x: f64,
    /// `f'(x)/f(x)`
    ratio: C64,
    /// `Σ_n a_n C(n,k) φ_{n-k}(x)`, even `k` (used by `c_N`)
    pa_phi: Vec<C64>,
    /// `Σ_n b_n C(n,k) φ_{n-k}(x)`, odd `k`, `n >= 1` (used by `s_N`)
    pb_phi: Vec<C64>,
    /// `Σ_{n>=1} a_n C(n,k) ψ_{n-k}(x)`, odd `k` (used by `˚c_N`)
    pa_psi: Vec<C64>,
    /// `Σ_n b_n C(n,k) ψ_{n-k}(x)`, even `k` (used by `˚s_N`)
    pb_psi: Vec<C64>,
}

/// Values of the four approximate solutions at one `(ω, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionValues {
    pub c: C64,
    pub s: C64,
    pub dc: C64,
    pub ds: C64,
}

/// Fitted kernel coupled with the formal powers it was built from.
#[derive(Debug, Clone)]
pub struct SolutionBasis {
    kernel: KernelApproximation,
    table: FormalPowerTable,
    binom: Vec<Vec<f64>>,
    at_b: PointData,
}

impl SolutionBasis {
    pub fn new(kernel: KernelApproximation, table: FormalPowerTable) -> Result<Self> {
        if kernel.source_id() != table.source_id() {
            return Err(Error::MismatchedBasis);
        }
        if kernel.order() > table.order() {
            return Err(Error::InvalidArgument(format!(
                "kernel order {} exceeds table order {}",
                kernel.order(),
                table.order()
            )));
        }
        let binom = binomials(kernel.order());
        let b = table.interval().b;
        let mut basis = Self {
            kernel,
            table,
            binom,
            at_b: PointData {
                x: b,
                ratio: C64::new(0.0, 0.0),
                pa_phi: Vec::new(),
                pb_phi: Vec::new(),
                pa_psi: Vec::new(),
                pb_psi: Vec::new(),
            },
        };
        basis.at_b = basis.point(b)?;
        Ok(basis)
    }

    pub fn kernel(&self) -> &KernelApproximation {
        &self.kernel
    }
    pub fn table(&self) -> &FormalPowerTable {
        &self.table
    }
    pub fn order(&self) -> usize {
        self.kernel.order()
    }
    pub fn h(&self) -> C64 {
        self.kernel.h()
    }
    pub fn b(&self) -> f64 {
        self.table.interval().b
    }
    /// Precomputed reductions at the right endpoint.
    pub fn at_b(&self) -> &PointData {
        &self.at_b
    }

    /// Precomputes the reductions at `x`.
    pub fn point(&self, x: f64) -> Result<PointData> {
        let x = self.table.interval().check(x)?;
        let n = self.order();
        let phi = self.table.phi_at(x)?;
        let psi = self.table.psi_at(x)?;
        let (f, fp) = self.table.f_at(x)?;
        let a = self.kernel.a();
        let b = self.kernel.b();
        let zero = C64::new(0.0, 0.0);
        let mut pa_phi = vec![zero; n + 1];
        let mut pb_phi = vec![zero; n + 1];
        let mut pa_psi = vec![zero; n + 1];
        let mut pb_psi = vec![zero; n + 1];
        for m in 0..=n {
            for k in 0..=m {
                let bin = self.binom[m][k];
                if k % 2 == 0 {
                    pa_phi[k] += a[m] * bin * phi[m - k];
                    pb_psi[k] += b[m] * bin * psi[m - k];
                } else {
                    pb_phi[k] += b[m] * bin * phi[m - k];
                    pa_psi[k] += a[m] * bin * psi[m - k];
                }
            }
        }
        Ok(PointData {
            x,
            ratio: fp / f,
            pa_phi,
            pb_phi,
            pa_psi,
            pb_psi,
        })
    }

    /// `c_N, s_N, ˚c_N, ˚s_N` from precomputed point data.
    pub fn eval_point(&self, p: &PointData, omega: C64) -> SolutionValues {
        let n = self.order();
        let m = trig_moments(omega, p.x, n);
        let z = omega * p.x;
        let (sz, cz) = (z.sin(), z.cos());
        let zero = C64::new(0.0, 0.0);
        let mut c_sum = zero;
        let mut s_sum = zero;
        let mut dc_sum = zero;
        let mut ds_sum = zero;
        for k in 0..=n {
            if k % 2 == 0 {
                c_sum += p.pa_phi[k] * m.cos_moments[k];
                ds_sum += p.pb_psi[k] * m.cos_moments[k];
            } else {
                s_sum += p.pb_phi[k] * m.sin_over_omega[k];
                dc_sum += p.pa_psi[k] * m.sin_moments[k];
            }
        }
        // sin(ωx)/ω = x * sinc(ωx), continuous at ω = 0
        let sinc = if z.norm() < 1e-8 {
            C64::new(1.0, 0.0) - z * z / 6.0
        } else {
            sz / z
        };
        let c = cz + c_sum * 2.0;
        let s = sinc * p.x + s_sum * 2.0;
        let dc = -omega * sz + omega * dc_sum * 2.0 + p.ratio * c;
        let ds = cz - ds_sum * 2.0 + p.ratio * s;
        SolutionValues { c, s, dc, ds }
    }

    pub fn eval(&self, omega: C64, x: f64) -> Result<SolutionValues> {
        let p = self.point(x)?;
        Ok(self.eval_point(&p, omega))
    }

    pub fn c_n(&self, omega: C64, x: f64) -> Result<C64> {
        Ok(self.eval(omega, x)?.c)
    }
    pub fn s_n(&self, omega: C64, x: f64) -> Result<C64> {
        Ok(self.eval(omega, x)?.s)
    }
    pub fn dc_n(&self, omega: C64, x: f64) -> Result<C64> {
        Ok(self.eval(omega, x)?.dc)
    }
    pub fn ds_n(&self, omega: C64, x: f64) -> Result<C64> {
        Ok(self.eval(omega, x)?.ds)
    }

    /// Evaluates an approximate kernel on the triangle `|t| <= x <= b`.
    pub fn kernel_eval(&self, x: f64, t: f64, which: KernelKind) -> Result<C64> {
        let iv = self.table.interval();
        let x = iv.check(x)?;
        if t.abs() > x * (1.0 + 1e-12) + 1e-14 {
            return Err(Error::Domain { x: t, lo: -x, hi: x });
        }
        let n = self.order();
        let a = self.kernel.a();
        let b = self.kernel.b();
        let zero = C64::new(0.0, 0.0);
        let phi = self.table.phi_at(x)?;
        let psi = self.table.psi_at(x)?;
        // u_{2m-1} / v_{2m-1}: even powers of t; u_{2m} / v_{2m}: odd
        let wave = |vals: &[C64], m: usize, odd: bool| -> C64 {
            let mut acc = zero;
            let mut tp = 1.0;
            for k in 0..=m {
                if (k % 2 == 1) == odd {
                    acc += vals[m - k] * (self.binom[m][k] * tp);
                }
                tp *= t;
            }
            acc
        };
        let val = match which {
            KernelKind::Kf | KernelKind::C | KernelKind::S => {
                let mut even = a[0] * phi[0];
                let mut odd = zero;
                for m in 1..=n {
                    even += a[m] * wave(&phi, m, false);
                    odd += b[m] * wave(&phi, m, true);
                }
                match which {
                    KernelKind::Kf => even + odd,
                    KernelKind::C => even * 2.0,
                    _ => odd * 2.0,
                }
            }
            KernelKind::K1f => {
                let mut acc = b[0] * psi[0];
                for m in 1..=n {
                    acc += a[m] * wave(&psi, m, true) + b[m] * wave(&psi, m, false);
                }
                -acc
            }
        };
        Ok(val)
    }
}
